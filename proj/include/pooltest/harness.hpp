#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pooltest/adaptive.hpp"
#include "pooltest/testbed.hpp"

// Monte Carlo experiment runner.  Trial t uses seed base_seed + t; each
// trial owns its population, ledger and noise stream, so trials are
// independent and the aggregation is a deterministic ordered reduction.
// Ground truth stays on the harness side; the methods never see it.

namespace pooltest {

enum class Method { divide_conquer, group_coding, individual };

const char* method_name(Method m);

struct ExperimentSpec {
  std::uint32_t n = 0;
  double f = 0.0;
  Method method = Method::individual;
  TestModel model;
  bool with_retest = true;  // group coding only
  int trials = 25;
  std::uint64_t base_seed = 1;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t tests = 0;
  double cost = 0.0;
  std::uint64_t false_positives = 0;
  std::uint64_t false_negatives = 0;
  std::uint32_t true_infected = 0;
  // group coding extras (0 otherwise)
  std::uint64_t first_pass_tests = 0;
  std::uint64_t first_pass_false_positives = 0;
};

struct AggregateResult {
  double mean_cost = 0.0;
  double cost_stddev = 0.0;
  double mean_false_positives = 0.0;
  double mean_false_negatives = 0.0;
  double theory_cost = 0.0;   // model prediction for this method
  double entropy_cost = 0.0;  // information bound per subject
  std::vector<TrialRecord> trials;
  std::vector<std::string> warnings;
};

AggregateResult run_experiment(const ExperimentSpec& spec);

// Replays one divide-and-conquer trial of the spec with the seeds
// run_experiment would use and returns its per-round trace.
DncTrace dnc_trial_trace(const ExperimentSpec& spec, int trial);

// CSV export: header, one row per trial, and a final summary row.
void write_results_csv(std::ostream& out, const ExperimentSpec& spec,
                       const AggregateResult& result);
// key=value summary for machine consumption.
void write_results_text(std::ostream& out, const ExperimentSpec& spec,
                        const AggregateResult& result);

// Side-by-side run of both methods at f = 1e-2 and 1e-3 with a perfect
// test: iterations and pool-size sequence for divide and conquer, m/k/false
// positives and first/total cost for group coding, and the entropy bound.
std::string table1_report(std::uint32_t n, int trials, std::uint64_t base_seed);

}  // namespace pooltest
