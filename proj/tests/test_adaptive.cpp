#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "pooltest/adaptive.hpp"
#include "pooltest/testbed.hpp"

using namespace pooltest;

namespace {

// Reference pool-size sequence for f=1e-2.
const std::vector<int> kReference01 = {68, 35, 20, 12, 7, 4, 2, 1};

bool positives_match_truth(const DncTrace& trace, const PopulationState& pop) {
  if (trace.positives.size() != pop.infected_count) return false;
  for (const auto s : trace.positives) {
    if (!pop.infected(s)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("schedule for f=1e-2") {
  const auto s = make_schedule(1e-2);
  CHECK(s.pool_sizes == std::vector<int>{69, 34, 19, 11, 6, 3, 2, 1});
  CHECK(s.iterations() == 8);
  CHECK(s.predicted_cost == doctest::Approx(0.124165).epsilon(1e-4));
  REQUIRE(s.pool_sizes.size() == kReference01.size());
  for (std::size_t i = 0; i < kReference01.size(); ++i) {
    CHECK(std::abs(s.pool_sizes[i] - kReference01[i]) <= 1);
  }
}

TEST_CASE("schedule for f=1e-3") {
  const auto s = make_schedule(1e-3);
  CHECK(s.pool_sizes ==
        std::vector<int>{693, 346, 197, 116, 69, 41, 25, 15, 9, 5, 3, 1});
  CHECK(s.iterations() == 12);
  CHECK(s.predicted_cost == doctest::Approx(0.018770).epsilon(1e-3));
}

TEST_CASE("schedule degenerates to a single individual round at high prevalence") {
  CHECK(make_schedule(0.49).pool_sizes == std::vector<int>{1});
  CHECK(make_schedule(0.49).predicted_cost == 1.0);
  CHECK(make_schedule(0.25).pool_sizes == std::vector<int>{2, 1});
}

TEST_CASE("schedules decrease strictly and end at one") {
  for (const double f :
       {1e-6, 1e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 0.03, 0.1, 0.2, 0.45}) {
    const auto s = make_schedule(f);
    REQUIRE(!s.pool_sizes.empty());
    CHECK(s.pool_sizes.back() == 1);
    for (std::size_t i = 1; i < s.pool_sizes.size(); ++i) {
      CHECK(s.pool_sizes[i] < s.pool_sizes[i - 1]);
    }
    CHECK(s.predicted_cost > 0.0);
    CHECK(s.predicted_cost <= 1.0);
  }
}

TEST_CASE("schedule rejects out-of-range prevalence") {
  CHECK_THROWS_AS(make_schedule(0.0), std::domain_error);
  CHECK_THROWS_AS(make_schedule(1.0), std::domain_error);
}

TEST_CASE("all-healthy population costs one round of pools") {
  const auto pop = generate_population(5000, 1e-9, 2);
  REQUIRE(pop.infected_count == 0);
  const auto schedule = make_schedule(1e-2);
  TestModel perfect;
  Rng rng(1);
  const auto trace = run_divide_and_conquer(pop, schedule, perfect, rng);
  CHECK(trace.positives.empty());
  const std::uint64_t m1 = schedule.pool_sizes.front();
  CHECK(trace.ledger.total() == (5000 + m1 - 1) / m1);
}

TEST_CASE("perfect test recovers the ground truth exactly") {
  const auto schedule = make_schedule(1e-2);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pop = generate_population(10000, 1e-2, seed);
    TestModel perfect;
    Rng rng(seed);
    const auto trace = run_divide_and_conquer(pop, schedule, perfect, rng);
    CHECK(positives_match_truth(trace, pop));
  }
}

TEST_CASE("trace bookkeeping invariants") {
  const auto pop = generate_population(50000, 1e-2, 77);
  const auto schedule = make_schedule(1e-2);
  TestModel perfect;
  Rng rng(5);
  const auto trace = run_divide_and_conquer(pop, schedule, perfect, rng);

  std::uint64_t pools = 0;
  std::uint64_t prev_retained = pop.n;
  for (const auto& r : trace.rounds) {
    pools += r.pools_formed;
    CHECK(r.pools_positive <= r.pools_formed);
    CHECK(r.retained_after <= prev_retained);  // retained never grows
    prev_retained = r.retained_after;
  }
  CHECK(trace.ledger.total() == pools);
  CHECK(trace.rounds.size() == schedule.pool_sizes.size());
  CHECK(trace.positives.size() == trace.rounds.back().retained_after);
}

TEST_CASE("trace CSV export shape") {
  const auto pop = generate_population(2000, 1e-2, 3);
  const auto schedule = make_schedule(1e-2);
  TestModel perfect;
  Rng rng(4);
  const auto trace = run_divide_and_conquer(pop, schedule, perfect, rng);
  std::ostringstream out;
  write_trace_csv(out, trace);
  const auto text = out.str();
  CHECK(text.rfind("iteration,m,pools_formed,", 0) == 0);
  std::size_t lines = 0;
  for (const char c : text) lines += (c == '\n');
  CHECK(lines == trace.rounds.size() + 1);
}

TEST_CASE("round ordering options preserve exact recovery") {
  const auto pop = generate_population(20000, 1e-2, 9);
  const auto schedule = make_schedule(1e-2);
  TestModel perfect;

  DncOptions shuffled;
  shuffled.shuffle_between_rounds = true;
  Rng rng1(6);
  CHECK(positives_match_truth(
      run_divide_and_conquer(pop, schedule, perfect, rng1, shuffled), pop));

  DncOptions adaptive;
  adaptive.reestimate_prevalence = true;
  Rng rng2(7);
  const auto trace = run_divide_and_conquer(pop, schedule, perfect, rng2, adaptive);
  CHECK(positives_match_truth(trace, pop));
  CHECK(trace.rounds.back().pool_size == 1);
}

TEST_CASE("per-round false negatives compound over the schedule") {
  // With per-test false-negative rate p and L rounds, an infected subject
  // survives with probability (1-p)^L.
  const auto schedule = make_schedule(1e-2);
  const int rounds = schedule.iterations();
  const double p = 0.01;
  const double expected_miss = 1.0 - std::pow(1.0 - p, rounds);

  const auto pop = generate_population(1000000, 1e-2, 31);
  TestModel noisy{p, 0.0};
  Rng rng(8);
  const auto trace = run_divide_and_conquer(pop, schedule, noisy, rng);

  std::uint64_t found = 0;
  for (const auto s : trace.positives) {
    if (pop.infected(s)) ++found;
  }
  REQUIRE(pop.infected_count > 9000);
  const double miss =
      1.0 - static_cast<double>(found) / static_cast<double>(pop.infected_count);
  CHECK(std::abs(miss - expected_miss) < 0.01);
}
