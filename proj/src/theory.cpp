#include "pooltest/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pooltest::theory {
namespace {

// log2(1-f) via log1p, accurate for small f.
double log2_1m(double f) { return std::log1p(-f) / std::numbers::ln2; }

int round_clamped(double x) {
  if (!(x > 0)) return 1;
  const auto r = std::llround(x);
  return r < 1 ? 1 : static_cast<int>(r);
}

}  // namespace

void validate_prevalence(double f) {
  if (!(f > 0.0) || !(f < 1.0)) {
    throw std::domain_error("prevalence must lie in (0, 1), got " + std::to_string(f));
  }
}

double entropy_bound(double f, std::uint64_t n) {
  validate_prevalence(f);
  if (n < 1) throw std::domain_error("population size must be >= 1");
  const double h = -f * std::log2(f) - (1.0 - f) * log2_1m(f);
  return static_cast<double>(n) * h;
}

double optimal_pool_size(double f) {
  validate_prevalence(f);
  return -1.0 / log2_1m(f);
}

double optimal_redundancy(double f) {
  validate_prevalence(f);
  return -std::log2(-log2_1m(f) / ((1.0 - f) * std::numbers::ln2));
}

int rounded_pool_size(double f) { return round_clamped(optimal_pool_size(f)); }

int rounded_redundancy(double f) { return round_clamped(optimal_redundancy(f)); }

double expected_total_tests(double f, int pool_size, int redundancy,
                            std::uint64_t n, bool with_retest) {
  validate_prevalence(f);
  if (pool_size < 1 || redundancy < 1 || n < 1) {
    throw std::domain_error("pool size, redundancy and n must all be >= 1");
  }
  const double first = static_cast<double>(redundancy) / pool_size;
  if (!with_retest) return static_cast<double>(n) * first;
  const double retest = f + (1.0 - f) * std::ldexp(1.0, -redundancy);
  return static_cast<double>(n) * (first + retest);
}

int best_redundancy_by_scan(double f) {
  const int m = rounded_pool_size(f);
  int best_k = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 64; ++k) {
    const double cost = expected_total_tests(f, m, k, 1, true);
    if (cost < best) {
      best = cost;
      best_k = k;
    }
  }
  return best_k;
}

Params derive(double f) {
  Params p;
  p.f = f;
  p.m_exact = optimal_pool_size(f);
  p.m = round_clamped(p.m_exact);
  p.k_exact = optimal_redundancy(f);
  p.k = round_clamped(p.k_exact);
  p.bits_per_subject = entropy_bound(f, 1);
  p.expected_cost = expected_total_tests(f, p.m, p.k, 1, true);
  return p;
}

}  // namespace pooltest::theory
