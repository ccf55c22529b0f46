#pragma once

#include <cstdint>

// Closed-form pooled-testing quantities for a prevalence f:
//
//   entropy_bound      information content of the infection pattern, in bits;
//                      a lower bound on the number of binary tests.
//   optimal_pool_size  pool size M with (1-f)^M = 1/2, so a pooled test is
//                      positive or negative with equal probability.
//   optimal_redundancy groups-per-subject K minimizing the expected total
//                      test count of the group-coding method with a retest
//                      pass, K = -log2(-log2(1-f) / ((1-f) ln 2)).
//   expected_total_tests
//                      N (K/M + f + (1-f) 2^-K) with the retest pass,
//                      N K/M without it.

namespace pooltest::theory {

// Throws std::domain_error unless 0 < f < 1.
void validate_prevalence(double f);

double entropy_bound(double f, std::uint64_t n = 1);
double optimal_pool_size(double f);
double optimal_redundancy(double f);

// Nearest integer (half away from zero), clamped to >= 1.  The redundancy
// formula goes negative for f beyond roughly 0.31; the clamp makes k = 1
// there, where pooling has stopped paying for itself.
int rounded_pool_size(double f);
int rounded_redundancy(double f);

double expected_total_tests(double f, int pool_size, int redundancy,
                            std::uint64_t n, bool with_retest);

// Brute-force integer argmin of expected_total_tests over k in [1, 64],
// with the pool size fixed at rounded_pool_size(f).  Cross-check for the
// closed form; the two agree within +-1 after rounding.
int best_redundancy_by_scan(double f);

struct Params {
  double f = 0;
  double m_exact = 0;
  int m = 1;
  double k_exact = 0;
  int k = 1;
  double bits_per_subject = 0;  // entropy_bound(f, 1)
  double expected_cost = 0;     // expected_total_tests(f, m, k, 1, true)
};

Params derive(double f);

}  // namespace pooltest::theory
