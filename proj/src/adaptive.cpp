#include "pooltest/adaptive.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "pooltest/theory.hpp"

namespace pooltest {
namespace {

// Per-block infected-count distributions are truncated at kOccMax; with the
// pool size tracking the calibrated optimum the mean count stays near ln 2,
// so the truncated tail is negligible.
constexpr int kOccMax = 32;
using Dist = std::array<double, kOccMax + 1>;

// Straddle offsets are enumerated exactly up to this pool size and sampled
// beyond it (only relevant for prevalences far below 1e-4).
constexpr int kExactOffsetLimit = 4096;

const double* comb_table() {
  static const auto table = [] {
    static double c[kOccMax + 1][kOccMax + 1];
    for (int n = 0; n <= kOccMax; ++n) {
      c[n][0] = 1.0;
      for (int r = 1; r <= n; ++r) {
        c[n][r] = c[n - 1][r - 1] + (r <= n - 1 ? c[n - 1][r] : 0.0);
      }
    }
    return &c[0][0];
  }();
  return table;
}

double comb(int n, int r) { return comb_table()[n * (kOccMax + 1) + r]; }

// K ~ Bin(n, p) conditioned on K >= 1, truncated.
Dist binom_positive(double n, double p) {
  Dist d{};
  double prob = std::exp(n * std::log1p(-p));  // P(K = 0)
  const double ratio = p / (1.0 - p);
  double sum = 0.0;
  for (int k = 1; k <= kOccMax; ++k) {
    prob *= (n - (k - 1)) / k * ratio;
    d[k] = prob;
    sum += prob;
  }
  for (int k = 1; k <= kOccMax; ++k) d[k] /= sum;
  return d;
}

// K' ~ Bin(K, p) with K ~ dist.
Dist thin(const Dist& dist, double p) {
  Dist out{};
  if (p <= 0.0) {
    out[0] = 1.0;
    return out;
  }
  for (int k = 0; k <= kOccMax; ++k) {
    if (dist[k] == 0.0) continue;
    for (int j = 0; j <= k; ++j) {
      out[j] += dist[k] * comb(k, j) * std::pow(p, j) * std::pow(1.0 - p, k - j);
    }
  }
  return out;
}

Dist convolve(const Dist& a, const Dist& b) {
  Dist out{};
  for (int i = 0; i <= kOccMax; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; i + j <= kOccMax; ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

}  // namespace

DncSchedule make_schedule(double f0) {
  theory::validate_prevalence(f0);
  DncSchedule schedule;
  schedule.f0 = f0;

  const int m1 = theory::rounded_pool_size(f0);
  schedule.pool_sizes.push_back(m1);
  double cost = 1.0 / m1;
  if (m1 == 1) {
    schedule.predicted_cost = 1.0;
    return schedule;
  }

  double rho = 1.0 - std::exp(m1 * std::log1p(-f0));
  Dist kdist = binom_positive(m1, f0);
  double retained = rho;
  double f = f0 / rho;
  int block = m1;

  while (schedule.pool_sizes.size() < 64) {
    int m = std::min(theory::rounded_pool_size(f), block - 1);
    m = std::max(m, 1);
    schedule.pool_sizes.push_back(m);
    if (m == 1) {
      cost += retained;  // individual tests on everyone still retained
      break;
    }
    cost += retained / m;

    // Windows of m cells over blocks of `block` cells, window offset o
    // uniform over the block.  For o <= block - m the window sits inside one
    // block; otherwise it takes the a-cell tail of one block and the
    // (m-a)-cell head of the next.
    Dist next{};
    double survive = 0.0;
    {
      const Dist whole = thin(kdist, static_cast<double>(m) / block);
      const double weight = block - m + 1;
      survive += weight * (1.0 - whole[0]);
      for (int k = 1; k <= kOccMax; ++k) next[k] += weight * whole[k];
    }
    const int straddles = m - 1;
    const int samples = std::min(straddles, kExactOffsetLimit);
    if (samples > 0) {
      const double weight = static_cast<double>(straddles) / samples;
      for (int s = 0; s < samples; ++s) {
        const double a =
            (samples == straddles) ? s + 1 : (s + 0.5) * straddles / samples;
        const Dist tail = thin(kdist, a / block);
        const Dist head = thin(kdist, (m - a) / block);
        const Dist win = convolve(tail, head);
        survive += weight * (1.0 - win[0]);
        for (int k = 1; k <= kOccMax; ++k) next[k] += weight * win[k];
      }
    }
    survive /= block;
    double norm = 0.0;
    for (int k = 1; k <= kOccMax; ++k) norm += next[k];
    for (int k = 1; k <= kOccMax; ++k) next[k] /= norm;

    kdist = next;
    retained *= survive;
    f = std::min(0.499999, f / survive);
    block = m;
  }
  if (schedule.pool_sizes.back() != 1) {
    // iteration cap reached; close with the individual round
    schedule.pool_sizes.push_back(1);
    cost += retained;
  }
  schedule.predicted_cost = cost;
  return schedule;
}

DncTrace run_divide_and_conquer(const PopulationState& pop, const DncSchedule& schedule,
                                const TestModel& model, Rng& rng,
                                const DncOptions& options) {
  if (schedule.pool_sizes.empty()) {
    throw std::invalid_argument("divide and conquer: empty schedule");
  }
  DncTrace trace;
  std::vector<std::uint32_t> retained(pop.n);
  std::iota(retained.begin(), retained.end(), 0u);
  std::vector<std::uint32_t> kept;

  double f_est = schedule.f0;
  int prev_m = 0;
  std::size_t round = 0;
  while (true) {
    int m;
    if (round < schedule.pool_sizes.size()) {
      m = schedule.pool_sizes[round];
    } else if (options.reestimate_prevalence) {
      m = std::max(1, std::min(theory::rounded_pool_size(f_est), prev_m - 1));
    } else {
      break;
    }
    if (options.reestimate_prevalence && round > 0 && prev_m > 1) {
      m = std::max(1, std::min(theory::rounded_pool_size(f_est), prev_m - 1));
    }

    trace.ledger.begin_stage("round-" + std::to_string(round + 1));
    if (options.shuffle_between_rounds && round > 0) {
      rng.shuffle(std::span<std::uint32_t>(retained));
    }

    const std::uint64_t count = retained.size();
    const std::uint64_t pools = (count + m - 1) / static_cast<std::uint64_t>(m);
    kept.clear();
    std::uint64_t positive = 0;
    for (std::uint64_t p = 0; p < pools; ++p) {
      const std::uint64_t begin = p * static_cast<std::uint64_t>(m);
      const std::uint64_t end = std::min(begin + m, count);
      const std::span<const std::uint32_t> pool(retained.data() + begin, end - begin);
      if (pooled_test(pop, pool, model, trace.ledger, rng)) {
        ++positive;
        kept.insert(kept.end(), pool.begin(), pool.end());
      }
    }
    const std::uint64_t before = count;
    retained.swap(kept);
    trace.rounds.push_back({m, pools, positive, retained.size()});

    if (options.reestimate_prevalence && before > 0 && !retained.empty()) {
      f_est = std::min(0.499999, f_est * static_cast<double>(before) /
                                     static_cast<double>(retained.size()));
    }
    prev_m = m;
    ++round;
    const bool scheduled_done =
        !options.reestimate_prevalence && round >= schedule.pool_sizes.size();
    const bool adaptive_done =
        options.reestimate_prevalence && (m == 1 || retained.empty());
    if (scheduled_done || adaptive_done) break;
  }

  trace.positives = std::move(retained);
  return trace;
}

void write_trace_csv(std::ostream& out, const DncTrace& trace) {
  out << "iteration,m,pools_formed,pools_positive,subjects_retained,tests_cumulative\n";
  std::uint64_t cumulative = 0;
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const auto& r = trace.rounds[i];
    cumulative += r.pools_formed;
    out << (i + 1) << ',' << r.pool_size << ',' << r.pools_formed << ','
        << r.pools_positive << ',' << r.retained_after << ',' << cumulative << '\n';
  }
}

}  // namespace pooltest
