#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pooltest/testbed.hpp"

// Group coding: every subject joins k groups so that no two subjects share
// the same set of groups.  All n_groups pools are tested in one batch; a
// subject decodes positive iff every group it belongs to tested positive.
// An optional second pass retests the decoded positives individually.

namespace pooltest {

struct PoolingDesign {
  std::uint32_t n = 0;
  std::uint32_t n_groups = 0;
  int k = 1;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint32_t>> groups;  // group id -> sorted members
  std::vector<std::uint32_t> signatures;           // n*k, sorted per subject

  std::span<const std::uint32_t> signature(std::uint32_t subject) const {
    return {signatures.data() + static_cast<std::size_t>(subject) * k,
            static_cast<std::size_t>(k)};
  }
};

// Builds the balanced design for prevalence f: pool size m and redundancy k
// from the closed forms, n_groups = round(n*k/m), subjects dealt onto the
// k least-loaded groups (seeded shuffle breaks ties) with signature
// uniqueness enforced by deterministic probing.  Deterministic for a fixed
// (n, f, seed).  Throws InfeasibleDesign when C(n_groups, k) < n.
PoolingDesign build_design(std::uint32_t n, double f, std::uint64_t seed);

// Structural invariant check (degree, uniqueness, balance); throws
// std::logic_error on violation.  Used by tests and after file loads.
void validate_design(const PoolingDesign& design);

// Tests all n_groups pools; returns one result byte (0/1) per group.
std::vector<std::uint8_t> first_pass(const PopulationState& pop,
                                     const PoolingDesign& design,
                                     const TestModel& model, TestLedger& ledger,
                                     Rng& rng);

// Pure decode: subjects whose k groups are all positive, ascending.
// Throws std::invalid_argument if results.size() != design.n_groups.
std::vector<std::uint32_t> decode(const PoolingDesign& design,
                                  std::span<const std::uint8_t> results);

// Independent reference decoder for small instances: recomputes each group's
// result directly from the infected set and scans every group for membership
// instead of using the stored signatures.  Perfect-test semantics.
std::vector<std::uint32_t> decode_bruteforce_oracle(
    const PoolingDesign& design, std::span<const std::uint32_t> infected);

// Individually retests the candidates; returns those testing positive.
std::vector<std::uint32_t> retest_pass(const PopulationState& pop,
                                       std::span<const std::uint32_t> candidates,
                                       const TestModel& model, TestLedger& ledger,
                                       Rng& rng);

struct DecodeResult {
  std::vector<std::uint32_t> first_pass_positives;
  std::optional<std::vector<std::uint32_t>> confirmed_positives;  // retest ran
  TestLedger ledger;
};

DecodeResult run_group_coding(const PopulationState& pop, const PoolingDesign& design,
                              const TestModel& model, Rng& rng, bool with_retest);

// --- file formats -----------------------------------------------------------
// Design file: "n=", "n_groups=", "k=", "seed=" header lines, then one
// record per group: "group_id: subject_id, subject_id, ...".
void write_design(std::ostream& out, const PoolingDesign& design);
PoolingDesign read_design(std::istream& in);

// Results file: one "group_id,0|1" line per group.
void write_results(std::ostream& out, std::span<const std::uint8_t> results);
// Requires exactly one result for each of the design's groups; throws
// DataMismatch naming the first missing/unknown group id.
std::vector<std::uint8_t> read_results(std::istream& in, std::uint32_t n_groups);

// Decode output: one "subject_id,flag" line per positive subject.
void write_positives(std::ostream& out, std::span<const std::uint32_t> subjects,
                     std::string_view flag);

}  // namespace pooltest
