// AVX2 kernel variants.  This translation unit is compiled with -mavx2 and
// only ever entered after a runtime cpuid check.

#include "kernels_impl.hpp"

#if POOLTEST_HAVE_AVX2_BUILD

#include <immintrin.h>

#include <cstring>

#include "pooltest/rng.hpp"

namespace pooltest::kernels::detail {
namespace {

// 64x64 -> low 64 multiply, 4 lanes (Haswell sequence).
inline __m256i mullo64(__m256i a, __m256i b) {
  const __m256i bswap = _mm256_shuffle_epi32(b, 0xB1);
  const __m256i prodlh = _mm256_mullo_epi32(a, bswap);
  const __m256i prodlh2 = _mm256_hadd_epi32(prodlh, _mm256_setzero_si256());
  const __m256i prodlh3 = _mm256_shuffle_epi32(prodlh2, 0x73);
  const __m256i prodll = _mm256_mul_epu32(a, b);
  return _mm256_add_epi64(prodll, prodlh3);
}

// splitmix64 finalizer, 4 lanes.
inline __m256i mix64x4(__m256i z) {
  const __m256i c1 = _mm256_set1_epi64x(static_cast<long long>(0xBF58476D1CE4E5B9ULL));
  const __m256i c2 = _mm256_set1_epi64x(static_cast<long long>(0x94D049BB133111EBULL));
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 30));
  z = mullo64(z, c1);
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 27));
  z = mullo64(z, c2);
  return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

}  // namespace

void bernoulli_fill_avx2(std::span<std::uint64_t> words, std::uint64_t n,
                         std::uint64_t seed, std::uint64_t threshold) {
  if (words.empty()) return;
  std::memset(words.data(), 0, words.size() * sizeof(std::uint64_t));
  // threshold and the shifted hash both fit in 52 bits, so signed compares
  // are safe.
  const __m256i thr = _mm256_set1_epi64x(static_cast<long long>(threshold));
  const __m256i step = _mm256_set1_epi64x(static_cast<long long>(4 * kGolden));
  // lane l of the running state holds seed + (i + 1 + l) * kGolden
  __m256i cur = _mm256_setr_epi64x(
      static_cast<long long>(seed + 1 * kGolden), static_cast<long long>(seed + 2 * kGolden),
      static_cast<long long>(seed + 3 * kGolden), static_cast<long long>(seed + 4 * kGolden));

  const std::uint64_t full_words = n / 64;
  for (std::uint64_t w = 0; w < full_words; ++w) {
    std::uint64_t bits = 0;
    for (int v = 0; v < 16; ++v) {
      const __m256i z = mix64x4(cur);
      cur = _mm256_add_epi64(cur, step);
      const __m256i u = _mm256_srli_epi64(z, 12);
      const __m256i lt = _mm256_cmpgt_epi64(thr, u);
      const auto mask =
          static_cast<std::uint64_t>(_mm256_movemask_pd(_mm256_castsi256_pd(lt)));
      bits |= mask << (4 * v);
    }
    words[w] = bits;
  }
  for (std::uint64_t i = full_words * 64; i < n; ++i) {
    if ((splitmix64_at(seed, i) >> 12) < threshold) {
      words[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
  }
}

std::uint64_t popcount_avx2(std::span<const std::uint64_t> words) {
  // Nibble-LUT popcount over 32-byte chunks, accumulated with psadbw.
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0F);
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= words.size(); i += 4) {
    const __m256i v =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words.data() + i));
    const __m256i lo = _mm256_and_si256(v, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    const __m256i cnt =
        _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, _mm256_setzero_si256()));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < words.size(); ++i) {
    total += static_cast<std::uint64_t>(__builtin_popcountll(words[i]));
  }
  return total;
}

void all_groups_positive_avx2(std::span<const std::uint32_t> signatures, int k,
                              std::span<const std::uint8_t> results,
                              std::span<std::uint8_t> out) {
  const std::size_t n = out.size();
  const auto* sig_base = reinterpret_cast<const int*>(signatures.data());
  const auto* res_base = reinterpret_cast<const int*>(results.data());
  const __m256i lane_k =
      _mm256_mullo_epi32(_mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7), _mm256_set1_epi32(k));
  const __m256i one = _mm256_set1_epi32(1);
  const __m256i byte_mask = _mm256_set1_epi32(0xFF);

  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i acc = _mm256_set1_epi32(-1);
    for (int j = 0; j < k; ++j) {
      const __m256i idx =
          _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(i) * k + j), lane_k);
      const __m256i gid = _mm256_i32gather_epi32(sig_base, idx, 4);
      // byte gather: loads 4 bytes at each group offset, keep the low one
      __m256i r = _mm256_i32gather_epi32(res_base, gid, 1);
      r = _mm256_and_si256(r, byte_mask);
      acc = _mm256_and_si256(acc, _mm256_cmpeq_epi32(r, one));
    }
    const int mask = _mm256_movemask_ps(_mm256_castsi256_ps(acc));
    for (int l = 0; l < 8; ++l) {
      out[i + l] = static_cast<std::uint8_t>((mask >> l) & 1);
    }
  }
  for (; i < n; ++i) {
    const std::uint32_t* sig = signatures.data() + i * static_cast<std::size_t>(k);
    std::uint8_t all = 1;
    for (int j = 0; j < k; ++j) all &= (results[sig[j]] == 1);
    out[i] = all;
  }
}

}  // namespace pooltest::kernels::detail

#endif  // POOLTEST_HAVE_AVX2_BUILD
