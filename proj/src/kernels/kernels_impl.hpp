#pragma once

#include <cstdint>
#include <span>

namespace pooltest::kernels::detail {

void bernoulli_fill_scalar(std::span<std::uint64_t> words, std::uint64_t n,
                           std::uint64_t seed, std::uint64_t threshold);
std::uint64_t popcount_scalar(std::span<const std::uint64_t> words);
void all_groups_positive_scalar(std::span<const std::uint32_t> signatures, int k,
                                std::span<const std::uint8_t> results,
                                std::span<std::uint8_t> out);

#if defined(__x86_64__) || defined(_M_X64)
#define POOLTEST_HAVE_AVX2_BUILD 1
void bernoulli_fill_avx2(std::span<std::uint64_t> words, std::uint64_t n,
                         std::uint64_t seed, std::uint64_t threshold);
std::uint64_t popcount_avx2(std::span<const std::uint64_t> words);
void all_groups_positive_avx2(std::span<const std::uint32_t> signatures, int k,
                              std::span<const std::uint8_t> results,
                              std::span<std::uint8_t> out);
#else
#define POOLTEST_HAVE_AVX2_BUILD 0
#endif

}  // namespace pooltest::kernels::detail
