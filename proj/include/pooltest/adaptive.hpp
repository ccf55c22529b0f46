#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pooltest/testbed.hpp"

// Divide and conquer: pool the whole population at the calibrated size,
// drop every member of a negative pool, re-pool the survivors consecutively
// (in retained order, no reshuffle) at the next scheduled size, and repeat
// until the pool size reaches one, at which point the surviving subjects are
// tested individually.
//
// Keeping the survivors in order matters: every positive pool carries at
// least one infected member, so after a round the infected are spread more
// evenly than in an iid population.  Later pools are therefore positive more
// than half the time and the effective prevalence grows by less than the
// naive factor 1/P(pool positive).  make_schedule models exactly this.

namespace pooltest {

struct DncSchedule {
  double f0 = 0.0;
  std::vector<int> pool_sizes;  // strictly decreasing, last entry 1
  double predicted_cost = 0.0;  // expected tests per subject under the model
  int iterations() const { return static_cast<int>(pool_sizes.size()); }
};

// Expected-value ("fluid") model of the consecutive re-pooling process.
// Round 1 treats the population as iid.  For every later round the retained
// subjects form equal blocks of the previous pool size, each holding at
// least one infected; the model tracks the per-block infected-count
// distribution (evolved by binomial thinning over window overlaps, offsets
// uniform) and picks each round's pool size from the updated prevalence.
// Throws std::domain_error unless 0 < f0 < 1.
DncSchedule make_schedule(double f0);

struct DncRound {
  int pool_size = 0;
  std::uint64_t pools_formed = 0;
  std::uint64_t pools_positive = 0;
  std::uint64_t retained_after = 0;
};

struct DncTrace {
  std::vector<DncRound> rounds;
  std::vector<std::uint32_t> positives;  // final reported infected set
  TestLedger ledger;
};

struct DncOptions {
  // Re-derive each round's pool size from the observed retention instead of
  // following the precomputed schedule (the schedule still seeds f0 and the
  // first pool size).
  bool reestimate_prevalence = false;
  // Shuffle the retained subjects between rounds.  Off by default: the
  // consecutive order is what the schedule models, and shuffling wastes the
  // evenness that negative-pool elimination creates.
  bool shuffle_between_rounds = false;
};

DncTrace run_divide_and_conquer(const PopulationState& pop, const DncSchedule& schedule,
                                const TestModel& model, Rng& rng,
                                const DncOptions& options = {});

// One CSV row per iteration:
// iteration,m,pools_formed,pools_positive,subjects_retained,tests_cumulative
void write_trace_csv(std::ostream& out, const DncTrace& trace);

}  // namespace pooltest
