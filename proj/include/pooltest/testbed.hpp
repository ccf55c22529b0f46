#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pooltest/rng.hpp"

// Synthetic ground-truth populations and the pooled-test oracle both
// identification methods consume.  A PopulationState is immutable after
// generation and safe to share across threads; each worker owns its own
// ledger and Rng stream, and ledgers merge by summation.

namespace pooltest {

struct PopulationState {
  std::uint32_t n = 0;
  double f = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> words;  // bitmap, bit i set = subject i infected
  std::uint32_t infected_count = 0;

  bool infected(std::uint32_t i) const {
    return (words[i >> 6] >> (i & 63)) & 1u;
  }
  std::vector<std::uint32_t> infected_indices() const;
};

// Each subject infected independently with probability f; bit-identical
// reconstruction for a fixed (n, f, seed).
PopulationState generate_population(std::uint32_t n, double f, std::uint64_t seed);

// Flat-file dump/load: header line "n,f,seed,infected_count", then one line
// with the infected indices, comma-separated ascending.
void write_population(std::ostream& out, const PopulationState& pop);
PopulationState read_population(std::istream& in);

// Noise of a single pooled test: p = false-negative rate, q = false-positive
// rate.  p = q = 0 is the perfect test.
struct TestModel {
  double fn_rate = 0.0;
  double fp_rate = 0.0;
  bool perfect() const { return fn_rate == 0.0 && fp_rate == 0.0; }
};

// Counts every test performed, grouped into named stages.
class TestLedger {
 public:
  // Subsequent record() calls count toward this stage.
  void begin_stage(std::string_view label);
  void record(std::uint64_t count = 1);
  std::uint64_t total() const { return total_; }
  const std::vector<std::pair<std::string, std::uint64_t>>& stages() const {
    return stages_;
  }
  void merge(const TestLedger& other);

 private:
  std::uint64_t total_ = 0;
  std::vector<std::pair<std::string, std::uint64_t>> stages_;
};

// One pooled test on the given members.  Returns positive with probability
// 1-p if any member is infected, with probability q otherwise; increments
// the ledger by exactly one.  The perfect model draws no randomness.
// Throws std::invalid_argument on an empty member set or an out-of-range
// index (a design bug upstream, not a data condition).
bool pooled_test(const PopulationState& pop, std::span<const std::uint32_t> members,
                 const TestModel& model, TestLedger& ledger, Rng& rng);

}  // namespace pooltest
