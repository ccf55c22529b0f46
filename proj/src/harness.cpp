#include "pooltest/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pooltest/adaptive.hpp"
#include "pooltest/groupcode.hpp"
#include "pooltest/text.hpp"
#include "pooltest/theory.hpp"

namespace pooltest {
namespace {

constexpr std::uint64_t kNoiseTag = 0x6e6f697365ULL;    // decorrelates noise stream
constexpr std::uint64_t kDesignTag = 0x64657369676eULL; // decorrelates design seed

struct Outcome {
  std::vector<std::uint32_t> positives;
  std::uint64_t tests = 0;
  std::uint64_t first_pass_tests = 0;
  std::uint64_t first_pass_false_positives = 0;
};

std::uint64_t count_difference(const std::vector<std::uint32_t>& a,
                               const PopulationState& pop, bool in_a_not_infected) {
  // in_a_not_infected: count of a-members that are healthy (false positives);
  // otherwise count of infected subjects missing from a (false negatives).
  std::uint64_t fp = 0;
  std::uint64_t hits = 0;
  for (const auto s : a) {
    if (pop.infected(s)) {
      ++hits;
    } else {
      ++fp;
    }
  }
  if (in_a_not_infected) return fp;
  return pop.infected_count - hits;
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::divide_conquer:
      return "dnc";
    case Method::group_coding:
      return "gc";
    case Method::individual:
      return "individual";
  }
  return "?";
}

AggregateResult run_experiment(const ExperimentSpec& spec) {
  theory::validate_prevalence(spec.f);
  if (spec.n < 1) throw std::domain_error("population size must be >= 1");
  if (spec.trials < 1) throw std::domain_error("trials must be >= 1");

  AggregateResult agg;
  agg.entropy_cost = theory::entropy_bound(spec.f, 1);
  if (static_cast<double>(spec.n) * spec.f < 10.0) {
    agg.warnings.push_back("n*f = " +
                           text::format_double(static_cast<double>(spec.n) * spec.f) +
                           " < 10: single realizations will be noisy");
  }

  DncSchedule schedule;
  theory::Params params{};
  switch (spec.method) {
    case Method::divide_conquer:
      schedule = make_schedule(spec.f);
      agg.theory_cost = schedule.predicted_cost;
      break;
    case Method::group_coding:
      params = theory::derive(spec.f);
      agg.theory_cost = theory::expected_total_tests(spec.f, params.m, params.k, spec.n,
                                                     spec.with_retest) /
                        spec.n;
      break;
    case Method::individual:
      agg.theory_cost = 1.0;
      break;
  }

  agg.trials.reserve(spec.trials);
  for (int t = 0; t < spec.trials; ++t) {
    const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(t);
    const auto pop = generate_population(spec.n, spec.f, seed);
    Rng noise(derive_seed(seed, kNoiseTag));

    Outcome outcome;
    switch (spec.method) {
      case Method::divide_conquer: {
        auto trace = run_divide_and_conquer(pop, schedule, spec.model, noise);
        outcome.tests = trace.ledger.total();
        outcome.positives = std::move(trace.positives);
        break;
      }
      case Method::group_coding: {
        const auto design = build_design(spec.n, spec.f, derive_seed(seed, kDesignTag));
        auto result = run_group_coding(pop, design, spec.model, noise, spec.with_retest);
        outcome.tests = result.ledger.total();
        outcome.first_pass_tests = design.n_groups;
        outcome.first_pass_false_positives =
            count_difference(result.first_pass_positives, pop, true);
        outcome.positives = spec.with_retest ? std::move(*result.confirmed_positives)
                                             : std::move(result.first_pass_positives);
        break;
      }
      case Method::individual: {
        TestLedger ledger;
        ledger.begin_stage("individual");
        std::vector<std::uint32_t> positives;
        for (std::uint32_t s = 0; s < spec.n; ++s) {
          if (pooled_test(pop, {&s, 1}, spec.model, ledger, noise)) {
            positives.push_back(s);
          }
        }
        outcome.tests = ledger.total();
        outcome.positives = std::move(positives);
        break;
      }
    }

    TrialRecord rec;
    rec.trial = t;
    rec.seed = seed;
    rec.tests = outcome.tests;
    rec.cost = static_cast<double>(outcome.tests) / spec.n;
    rec.false_positives = count_difference(outcome.positives, pop, true);
    rec.false_negatives = count_difference(outcome.positives, pop, false);
    rec.true_infected = pop.infected_count;
    rec.first_pass_tests = outcome.first_pass_tests;
    rec.first_pass_false_positives = outcome.first_pass_false_positives;
    agg.trials.push_back(rec);
  }

  double sum = 0, sum_fp = 0, sum_fn = 0;
  for (const auto& r : agg.trials) {
    sum += r.cost;
    sum_fp += static_cast<double>(r.false_positives);
    sum_fn += static_cast<double>(r.false_negatives);
  }
  const auto nt = static_cast<double>(agg.trials.size());
  agg.mean_cost = sum / nt;
  agg.mean_false_positives = sum_fp / nt;
  agg.mean_false_negatives = sum_fn / nt;
  if (agg.trials.size() > 1) {
    double ss = 0;
    for (const auto& r : agg.trials) {
      ss += (r.cost - agg.mean_cost) * (r.cost - agg.mean_cost);
    }
    agg.cost_stddev = std::sqrt(ss / (nt - 1));
  }
  return agg;
}

DncTrace dnc_trial_trace(const ExperimentSpec& spec, int trial) {
  if (spec.method != Method::divide_conquer) {
    throw std::domain_error("trace replay is only defined for the dnc method");
  }
  if (trial < 0 || trial >= spec.trials) {
    throw std::domain_error("trial index out of range");
  }
  const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(trial);
  const auto pop = generate_population(spec.n, spec.f, seed);
  Rng noise(derive_seed(seed, kNoiseTag));
  const auto schedule = make_schedule(spec.f);
  return run_divide_and_conquer(pop, schedule, spec.model, noise);
}

void write_results_csv(std::ostream& out, const ExperimentSpec& spec,
                       const AggregateResult& result) {
  out << "trial,seed,method,f,n,tests,cost,false_pos,false_neg\n";
  for (const auto& r : result.trials) {
    out << r.trial << ',' << r.seed << ',' << method_name(spec.method) << ','
        << text::format_double(spec.f) << ',' << spec.n << ',' << r.tests << ','
        << text::format_double(r.cost) << ',' << r.false_positives << ','
        << r.false_negatives << '\n';
  }
  double mean_tests = 0;
  for (const auto& r : result.trials) mean_tests += static_cast<double>(r.tests);
  mean_tests /= static_cast<double>(result.trials.size());
  out << "summary," << spec.base_seed << ',' << method_name(spec.method) << ','
      << text::format_double(spec.f) << ',' << spec.n << ','
      << text::format_double(mean_tests) << ',' << text::format_double(result.mean_cost)
      << ',' << text::format_double(result.mean_false_positives) << ','
      << text::format_double(result.mean_false_negatives) << '\n';
}

void write_results_text(std::ostream& out, const ExperimentSpec& spec,
                        const AggregateResult& result) {
  out << "method=" << method_name(spec.method) << '\n';
  out << "f=" << text::format_double(spec.f) << '\n';
  out << "n=" << spec.n << '\n';
  out << "trials=" << result.trials.size() << '\n';
  out << "base_seed=" << spec.base_seed << '\n';
  out << "fn_rate=" << text::format_double(spec.model.fn_rate) << '\n';
  out << "fp_rate=" << text::format_double(spec.model.fp_rate) << '\n';
  out << "with_retest=" << (spec.with_retest ? 1 : 0) << '\n';
  out << "mean_cost=" << text::format_double(result.mean_cost) << '\n';
  out << "cost_stddev=" << text::format_double(result.cost_stddev) << '\n';
  out << "mean_false_positives=" << text::format_double(result.mean_false_positives)
      << '\n';
  out << "mean_false_negatives=" << text::format_double(result.mean_false_negatives)
      << '\n';
  out << "theory_cost=" << text::format_double(result.theory_cost) << '\n';
  out << "entropy_cost=" << text::format_double(result.entropy_cost) << '\n';
}

std::string table1_report(std::uint32_t n, int trials, std::uint64_t base_seed) {
  std::ostringstream out;
  out << "pooled testing comparison, n=" << n << ", trials=" << trials
      << ", base_seed=" << base_seed << "\n\n";
  for (const double f : {1e-2, 1e-3}) {
    ExperimentSpec dnc{n, f, Method::divide_conquer, {}, false, trials, base_seed};
    ExperimentSpec gc{n, f, Method::group_coding, {}, true, trials, base_seed};
    const auto dnc_result = run_experiment(dnc);
    const auto gc_result = run_experiment(gc);
    const auto schedule = make_schedule(f);
    const auto params = theory::derive(f);

    double infected = 0, gc_first_fp = 0, gc_first_tests = 0, gc_total = 0, dnc_tests = 0;
    for (const auto& r : dnc_result.trials) {
      infected += static_cast<double>(r.true_infected);
      dnc_tests += static_cast<double>(r.tests);
    }
    for (const auto& r : gc_result.trials) {
      gc_first_fp += static_cast<double>(r.first_pass_false_positives);
      gc_first_tests += static_cast<double>(r.first_pass_tests);
      gc_total += static_cast<double>(r.tests);
    }
    const auto nt = static_cast<double>(trials);
    infected /= nt;
    gc_first_fp /= nt;
    gc_first_tests /= nt;
    gc_total /= nt;
    dnc_tests /= nt;

    out << "f=" << text::format_double(f) << "  true infected (mean) " << infected
        << "\n";
    out << "  divide and conquer: iterations " << schedule.iterations()
        << "  pool sizes ";
    for (std::size_t i = 0; i < schedule.pool_sizes.size(); ++i) {
      out << (i ? ", " : "") << schedule.pool_sizes[i];
    }
    out << "\n    tests " << dnc_tests << "  cost "
        << text::format_double(dnc_result.mean_cost) << "  (model "
        << text::format_double(dnc_result.theory_cost) << ")\n";
    out << "  group coding: m " << params.m << "  k " << params.k
        << "  first-pass false positives " << gc_first_fp << "\n    tests "
        << gc_first_tests << "/" << gc_total << "  cost "
        << text::format_double(gc_first_tests / n) << "/"
        << text::format_double(gc_result.mean_cost) << "  (model "
        << text::format_double(gc_result.theory_cost) << ")\n";
    out << "  entropy bound (cost) " << text::format_double(params.bits_per_subject)
        << "\n";
    for (const auto& w : dnc_result.warnings) out << "  warning: " << w << "\n";
    out << "\n";
  }
  return out.str();
}

}  // namespace pooltest
