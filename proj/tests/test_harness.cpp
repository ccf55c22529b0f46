#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "pooltest/harness.hpp"
#include "pooltest/theory.hpp"

using namespace pooltest;

TEST_CASE("individual testing costs exactly one test per subject") {
  ExperimentSpec spec{2000, 1e-2, Method::individual, {}, false, 3, 5};
  const auto result = run_experiment(spec);
  CHECK(result.mean_cost == 1.0);
  CHECK(result.cost_stddev == 0.0);
  CHECK(result.mean_false_positives == 0.0);
  CHECK(result.mean_false_negatives == 0.0);
  CHECK(result.theory_cost == 1.0);
  for (const auto& t : result.trials) CHECK(t.tests == 2000);
}

TEST_CASE("trial seeds fan out from the base seed") {
  ExperimentSpec spec{500, 0.02, Method::individual, {}, false, 4, 90};
  const auto result = run_experiment(spec);
  REQUIRE(result.trials.size() == 4);
  for (int t = 0; t < 4; ++t) {
    CHECK(result.trials[t].trial == t);
    CHECK(result.trials[t].seed == 90 + static_cast<std::uint64_t>(t));
  }
}

TEST_CASE("experiments are bit-reproducible") {
  ExperimentSpec spec{20000, 1e-2, Method::group_coding, {0.01, 0.001}, true, 5, 7};
  const auto a = run_experiment(spec);
  const auto b = run_experiment(spec);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].tests == b.trials[i].tests);
    CHECK(a.trials[i].false_positives == b.trials[i].false_positives);
    CHECK(a.trials[i].false_negatives == b.trials[i].false_negatives);
  }
  std::ostringstream csv_a, csv_b;
  write_results_csv(csv_a, spec, a);
  write_results_csv(csv_b, spec, b);
  CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("group-coding cost sits near its expectation") {
  ExperimentSpec spec{50000, 1e-2, Method::group_coding, {}, true, 10, 11};
  const auto result = run_experiment(spec);
  const double se = result.cost_stddev / std::sqrt(10.0);
  CHECK(std::abs(result.mean_cost - result.theory_cost) <= 3 * se + 1e-9);
  CHECK(result.mean_false_negatives == 0.0);  // perfect test + retest
  CHECK(result.mean_false_positives == 0.0);
}

TEST_CASE("no method beats the information bound, none worse than individual") {
  for (const auto method : {Method::divide_conquer, Method::group_coding}) {
    for (const double f : {1e-2, 5e-2}) {
      ExperimentSpec spec{20000, f, method, {}, true, 3, 17};
      const auto result = run_experiment(spec);
      CHECK(result.mean_cost >= result.entropy_cost);
      CHECK(result.mean_cost <= 1.0);
    }
  }
}

TEST_CASE("small-sample warning") {
  ExperimentSpec spec{100, 1e-2, Method::individual, {}, false, 1, 1};
  const auto result = run_experiment(spec);
  REQUIRE(!result.warnings.empty());
  CHECK(result.warnings.front().find("n*f") != std::string::npos);

  ExperimentSpec big{10000, 1e-2, Method::individual, {}, false, 1, 1};
  CHECK(run_experiment(big).warnings.empty());
}

TEST_CASE("noisy individual testing misses at rate p") {
  ExperimentSpec spec{200000, 1e-2, Method::individual, {0.1, 0.0}, false, 1, 23};
  const auto result = run_experiment(spec);
  const double expected = 0.1 * result.trials.front().true_infected;
  CHECK(result.mean_false_negatives == doctest::Approx(expected).epsilon(0.25));
  CHECK(result.mean_false_positives == 0.0);
}

TEST_CASE("CSV export shape") {
  ExperimentSpec spec{1000, 1e-2, Method::divide_conquer, {}, false, 3, 2};
  const auto result = run_experiment(spec);
  std::ostringstream out;
  write_results_csv(out, spec, result);
  const auto text = out.str();
  CHECK(text.rfind("trial,seed,method,f,n,tests,cost,false_pos,false_neg\n", 0) == 0);
  std::size_t lines = 0;
  for (const char c : text) lines += (c == '\n');
  CHECK(lines == 1 + 3 + 1);  // header + trials + summary
  CHECK(text.find("summary,") != std::string::npos);
  CHECK(text.find(",dnc,") != std::string::npos);
}

TEST_CASE("text export carries the resolved spec and aggregates") {
  ExperimentSpec spec{1000, 1e-2, Method::group_coding, {0.05, 0.0}, false, 2, 3};
  const auto result = run_experiment(spec);
  std::ostringstream out;
  write_results_text(out, spec, result);
  const auto text = out.str();
  CHECK(text.find("method=gc\n") != std::string::npos);
  CHECK(text.find("fn_rate=0.05\n") != std::string::npos);
  CHECK(text.find("with_retest=0\n") != std::string::npos);
  CHECK(text.find("mean_cost=") != std::string::npos);
  CHECK(text.find("entropy_cost=") != std::string::npos);
}

TEST_CASE("trace replay reproduces the recorded trial") {
  ExperimentSpec spec{30000, 1e-2, Method::divide_conquer, {0.02, 0.0}, false, 3, 41};
  const auto result = run_experiment(spec);
  for (int t = 0; t < spec.trials; ++t) {
    const auto trace = dnc_trial_trace(spec, t);
    CHECK(trace.ledger.total() == result.trials[t].tests);
  }
  CHECK_THROWS_AS(dnc_trial_trace(spec, 3), std::domain_error);
  ExperimentSpec gc{1000, 1e-2, Method::group_coding, {}, true, 1, 1};
  CHECK_THROWS_AS(dnc_trial_trace(gc, 0), std::domain_error);
}

TEST_CASE("comparison report mentions the derived parameters") {
  const auto report = table1_report(20000, 2, 31);
  CHECK(report.find("m 69") != std::string::npos);
  CHECK(report.find("k 6") != std::string::npos);
  CHECK(report.find("m 693") != std::string::npos);
  CHECK(report.find("k 9") != std::string::npos);
  CHECK(report.find("divide and conquer") != std::string::npos);
  CHECK(report.find("group coding") != std::string::npos);
  CHECK(report.find("entropy bound") != std::string::npos);
}
