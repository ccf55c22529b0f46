#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Data-parallel inner loops, with a scalar reference implementation and an
// AVX2 variant selected at runtime.  Both variants produce bit-identical
// output, so nothing downstream depends on which one ran.

namespace pooltest::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
bool isa_supported(Isa isa);
// Overrides auto-detection (tests, benchmarks).  Throws std::invalid_argument
// if the requested ISA is not supported on this machine.
void force_isa(Isa isa);
const char* isa_name(Isa isa);

// Extra bytes required at the end of the group-results buffer passed to
// all_groups_positive (gather loads read up to 3 bytes past the last group).
inline constexpr std::size_t kResultsPadding = 8;

// Per-index Bernoulli bitmap: bit i of words is set iff
// (splitmix64_at(seed, i) >> 12) < threshold, i in [0, n).
// words.size() must be ceil(n/64); all bits past n end up zero.
void bernoulli_fill(std::span<std::uint64_t> words, std::uint64_t n,
                    std::uint64_t seed, std::uint64_t threshold);

std::uint64_t popcount_words(std::span<const std::uint64_t> words);

// out[i] = 1 iff results[signatures[i*k + j]] == 1 for all j in [0,k), else 0.
// signatures holds out.size()*k group indices; results must include
// kResultsPadding trailing bytes beyond the last addressable group.
void all_groups_positive(std::span<const std::uint32_t> signatures, int k,
                         std::span<const std::uint8_t> results,
                         std::span<std::uint8_t> out);

}  // namespace pooltest::kernels
