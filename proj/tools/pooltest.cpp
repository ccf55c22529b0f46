// Command-line surface: theory tables, design generation, simulation, and
// offline decoding of pool results.
//
// Exit codes: 0 ok, 2 usage or malformed input, 3 infeasible design,
// 4 design/results mismatch.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pooltest/adaptive.hpp"
#include "pooltest/errors.hpp"
#include "pooltest/groupcode.hpp"
#include "pooltest/harness.hpp"
#include "pooltest/testbed.hpp"
#include "pooltest/text.hpp"
#include "pooltest/theory.hpp"

namespace {

using pooltest::text::format_double;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitMismatch = 4;

// Payloads go to --out (or stdout); diagnostics and the config echo go to
// stderr so piped output stays clean.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw pooltest::ParseError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw pooltest::ParseError(std::string("cannot open ") + what + ": " + path);
  }
  return in;
}

void echo_config(const std::string& line) { std::cerr << "config: " << line << "\n"; }

int cmd_bounds(const std::vector<double>& fs, std::uint64_t n, const std::string& out_path,
               const std::string& format) {
  std::ostringstream cfg;
  cfg << "cmd=bounds n=" << n << " format=" << format << " out=" << (out_path.empty() ? "-" : out_path) << " f=";
  for (std::size_t i = 0; i < fs.size(); ++i) cfg << (i ? "," : "") << format_double(fs[i]);
  echo_config(cfg.str());

  for (const auto f : fs) pooltest::theory::validate_prevalence(f);
  Output out(out_path);
  if (format == "csv") {
    out.stream() << "f,entropy_per_subject,entropy_bits,m_exact,m,k_exact,k,"
                    "cost_first_pass,cost_with_retest\n";
  }
  for (const auto f : fs) {
    const auto p = pooltest::theory::derive(f);
    const double first = pooltest::theory::expected_total_tests(f, p.m, p.k, 1, false);
    if (format == "csv") {
      out.stream() << format_double(f) << ',' << format_double(p.bits_per_subject) << ','
                   << format_double(pooltest::theory::entropy_bound(f, n)) << ','
                   << format_double(p.m_exact) << ',' << p.m << ','
                   << format_double(p.k_exact) << ',' << p.k << ','
                   << format_double(first) << ',' << format_double(p.expected_cost)
                   << '\n';
    } else {
      out.stream() << "f=" << format_double(f) << '\n'
                   << "entropy_per_subject=" << format_double(p.bits_per_subject) << '\n'
                   << "entropy_bits=" << format_double(pooltest::theory::entropy_bound(f, n))
                   << '\n'
                   << "m_exact=" << format_double(p.m_exact) << '\n'
                   << "m=" << p.m << '\n'
                   << "k_exact=" << format_double(p.k_exact) << '\n'
                   << "k=" << p.k << '\n'
                   << "cost_first_pass=" << format_double(first) << '\n'
                   << "cost_with_retest=" << format_double(p.expected_cost) << '\n';
    }
    if (p.m == 1) {
      std::cerr << "warning: f=" << format_double(f)
                << " gives pool size 1; pooling degenerates to individual testing\n";
    }
  }
  return kExitOk;
}

int cmd_plan(std::uint64_t n, double f, std::uint64_t seed, const std::string& out_path) {
  echo_config("cmd=plan n=" + std::to_string(n) + " f=" + format_double(f) +
              " seed=" + std::to_string(seed) + " out=" + (out_path.empty() ? "-" : out_path));
  const auto design = pooltest::build_design(static_cast<std::uint32_t>(n), f, seed);
  Output out(out_path);
  pooltest::write_design(out.stream(), design);
  const auto p = pooltest::theory::derive(f);
  std::cerr << "n_groups=" << design.n_groups << " k=" << design.k
            << " expected_cost_first_pass="
            << format_double(static_cast<double>(design.n_groups) / design.n)
            << " expected_cost_with_retest=" << format_double(p.expected_cost) << "\n";
  return kExitOk;
}

int cmd_simulate(const std::string& method, double f, std::uint64_t n, int trials,
                 std::uint64_t seed, double fn_rate, double fp_rate, bool retest,
                 const std::string& out_path, const std::string& format,
                 const std::string& trace_out) {
  pooltest::ExperimentSpec spec;
  spec.n = static_cast<std::uint32_t>(n);
  spec.f = f;
  spec.trials = trials;
  spec.base_seed = seed;
  spec.model = {fn_rate, fp_rate};
  spec.with_retest = retest;
  if (method == "dnc") {
    spec.method = pooltest::Method::divide_conquer;
  } else if (method == "gc") {
    spec.method = pooltest::Method::group_coding;
  } else if (method == "individual") {
    spec.method = pooltest::Method::individual;
  } else {
    std::cerr << "error: unknown method '" << method << "' (dnc|gc|individual)\n";
    return kExitUsage;
  }
  echo_config("cmd=simulate method=" + method + " f=" + format_double(f) +
              " n=" + std::to_string(n) + " trials=" + std::to_string(trials) +
              " seed=" + std::to_string(seed) + " fn-rate=" + format_double(fn_rate) +
              " fp-rate=" + format_double(fp_rate) +
              " retest=" + std::to_string(retest ? 1 : 0) + " format=" + format +
              " out=" + (out_path.empty() ? "-" : out_path) +
              (trace_out.empty() ? "" : " trace-out=" + trace_out));

  if (!trace_out.empty() && spec.method != pooltest::Method::divide_conquer) {
    std::cerr << "error: --trace-out applies to --method dnc only\n";
    return kExitUsage;
  }
  const auto result = pooltest::run_experiment(spec);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  if (!trace_out.empty()) {
    const auto trace = pooltest::dnc_trial_trace(spec, 0);
    Output tout(trace_out);
    pooltest::write_trace_csv(tout.stream(), trace);
    std::cerr << "trace for trial 0 written to " << trace_out << "\n";
  }
  Output out(out_path);
  if (format == "csv") {
    pooltest::write_results_csv(out.stream(), spec, result);
  } else {
    pooltest::write_results_text(out.stream(), spec, result);
  }
  std::cerr << "mean_cost=" << format_double(result.mean_cost)
            << " stddev=" << format_double(result.cost_stddev)
            << " mean_false_pos=" << format_double(result.mean_false_positives)
            << " mean_false_neg=" << format_double(result.mean_false_negatives)
            << " theory_cost=" << format_double(result.theory_cost)
            << " entropy_cost=" << format_double(result.entropy_cost) << "\n";
  return kExitOk;
}

int cmd_decode(const std::string& design_path, const std::string& results_path,
               const std::string& out_path) {
  echo_config("cmd=decode design=" + design_path + " results=" + results_path +
              " out=" + (out_path.empty() ? "-" : out_path));
  auto design_in = open_input(design_path, "design file");
  const auto design = pooltest::read_design(design_in);
  auto results_in = open_input(results_path, "results file");
  const auto results = pooltest::read_results(results_in, design.n_groups);
  const auto positives = pooltest::decode(design, results);
  Output out(out_path);
  pooltest::write_positives(out.stream(), positives, "firstpass");
  std::cerr << "groups=" << design.n_groups << " positives=" << positives.size() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-testing toolkit: pooled-test planning, simulation and decoding"};
  app.require_subcommand(1);

  // bounds
  auto* bounds = app.add_subcommand("bounds", "print pooling parameters and bounds");
  std::vector<double> bounds_f;
  std::uint64_t bounds_n = 100000;
  std::string bounds_out, bounds_format = "csv";
  bounds->add_option("--f", bounds_f, "prevalence value(s)")->required();
  bounds->add_option("--n", bounds_n, "population size for the total-bits column");
  bounds->add_option("--out", bounds_out, "output path (default stdout)");
  bounds->add_option("--format", bounds_format, "csv|txt")
      ->check(CLI::IsMember({"csv", "txt"}));

  // plan
  auto* plan = app.add_subcommand("plan", "generate a group-coding design file");
  std::uint64_t plan_n = 0, plan_seed = 1;
  double plan_f = 0;
  std::string plan_out;
  plan->add_option("--n", plan_n, "population size")->required();
  plan->add_option("--f", plan_f, "prevalence")->required();
  plan->add_option("--seed", plan_seed, "design seed");
  plan->add_option("--out", plan_out, "output path (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run seeded Monte Carlo trials");
  std::string sim_method;
  double sim_f = 0, sim_fn = 0, sim_fp = 0;
  std::uint64_t sim_n = 0, sim_seed = 1;
  int sim_trials = 25;
  bool sim_retest = true;
  std::string sim_out, sim_format = "csv", sim_trace_out;
  sim->add_option("--method", sim_method, "dnc|gc|individual")->required();
  sim->add_option("--f", sim_f, "prevalence")->required();
  sim->add_option("--n", sim_n, "population size")->required();
  sim->add_option("--trials", sim_trials, "number of trials");
  sim->add_option("--seed", sim_seed, "base seed (trial t uses base+t)");
  sim->add_option("--fn-rate", sim_fn, "per-test false-negative rate");
  sim->add_option("--fp-rate", sim_fp, "per-test false-positive rate");
  sim->add_flag("--retest,!--no-retest", sim_retest,
                "retest first-pass positives individually (group coding)");
  sim->add_option("--out", sim_out, "output path (default stdout)");
  sim->add_option("--format", sim_format, "csv|txt")
      ->check(CLI::IsMember({"csv", "txt"}));
  sim->add_option("--trace-out", sim_trace_out,
                  "write trial 0's per-round trace CSV (dnc only)");

  // decode
  auto* dec = app.add_subcommand("decode", "decode a results file against a design");
  std::string dec_design, dec_results, dec_out;
  dec->add_option("--design", dec_design, "design file from 'plan'")->required();
  dec->add_option("--results", dec_results, "per-group results file")->required();
  dec->add_option("--out", dec_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*bounds) return cmd_bounds(bounds_f, bounds_n, bounds_out, bounds_format);
    if (*plan) return cmd_plan(plan_n, plan_f, plan_seed, plan_out);
    if (*sim) {
      return cmd_simulate(sim_method, sim_f, sim_n, sim_trials, sim_seed, sim_fn, sim_fp,
                          sim_retest, sim_out, sim_format, sim_trace_out);
    }
    if (*dec) return cmd_decode(dec_design, dec_results, dec_out);
  } catch (const pooltest::InfeasibleDesign& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const pooltest::DataMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
