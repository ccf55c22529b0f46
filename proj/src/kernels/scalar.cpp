#include <bit>
#include <cstring>

#include "pooltest/rng.hpp"
#include "kernels_impl.hpp"

namespace pooltest::kernels::detail {

void bernoulli_fill_scalar(std::span<std::uint64_t> words, std::uint64_t n,
                           std::uint64_t seed, std::uint64_t threshold) {
  if (words.empty()) return;
  std::memset(words.data(), 0, words.size() * sizeof(std::uint64_t));
  for (std::uint64_t i = 0; i < n; ++i) {
    if ((splitmix64_at(seed, i) >> 12) < threshold) {
      words[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
  }
}

std::uint64_t popcount_scalar(std::span<const std::uint64_t> words) {
  std::uint64_t total = 0;
  for (auto w : words) total += static_cast<std::uint64_t>(std::popcount(w));
  return total;
}

void all_groups_positive_scalar(std::span<const std::uint32_t> signatures, int k,
                                std::span<const std::uint8_t> results,
                                std::span<std::uint8_t> out) {
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t* sig = signatures.data() + i * static_cast<std::size_t>(k);
    std::uint8_t all = 1;
    for (int j = 0; j < k; ++j) all &= (results[sig[j]] == 1);
    out[i] = all;
  }
}

}  // namespace pooltest::kernels::detail
