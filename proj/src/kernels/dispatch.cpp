#include "pooltest/kernels.hpp"

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "kernels_impl.hpp"

namespace pooltest::kernels {
namespace {

bool cpu_has_avx2() {
#if POOLTEST_HAVE_AVX2_BUILD && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("POOLTEST_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::avx2;
    // unknown or unsupported value: fall through to auto-detection
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

void force_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument(std::string("unsupported ISA: ") + isa_name(isa));
  }
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "?";
}

void bernoulli_fill(std::span<std::uint64_t> words, std::uint64_t n,
                    std::uint64_t seed, std::uint64_t threshold) {
#if POOLTEST_HAVE_AVX2_BUILD
  if (active_isa() == Isa::avx2) {
    detail::bernoulli_fill_avx2(words, n, seed, threshold);
    return;
  }
#endif
  detail::bernoulli_fill_scalar(words, n, seed, threshold);
}

std::uint64_t popcount_words(std::span<const std::uint64_t> words) {
#if POOLTEST_HAVE_AVX2_BUILD
  if (active_isa() == Isa::avx2) return detail::popcount_avx2(words);
#endif
  return detail::popcount_scalar(words);
}

void all_groups_positive(std::span<const std::uint32_t> signatures, int k,
                         std::span<const std::uint8_t> results,
                         std::span<std::uint8_t> out) {
#if POOLTEST_HAVE_AVX2_BUILD
  // gather indices are 32-bit
  const bool fits = out.size() * static_cast<std::uint64_t>(k) <= INT32_MAX;
  if (fits && active_isa() == Isa::avx2) {
    detail::all_groups_positive_avx2(signatures, k, results, out);
    return;
  }
#endif
  detail::all_groups_positive_scalar(signatures, k, results, out);
}

}  // namespace pooltest::kernels
