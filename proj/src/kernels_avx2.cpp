// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "noncekit/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace noncekit::kernels {

namespace {

__attribute__((target("avx2"))) int first_match(std::uint32_t px, const std::uint32_t* palette,
                                                 int palette_size, __m256i tolv, int tol) {
  const __m256i p = _mm256_set1_epi32(static_cast<int>(px));
  const __m256i zero = _mm256_setzero_si256();
  int c = 0;
  for (; c + 8 <= palette_size; c += 8) {
    __m256i q = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(palette + c));
    __m256i diff = _mm256_or_si256(_mm256_subs_epu8(p, q), _mm256_subs_epu8(q, p));
    __m256i over = _mm256_subs_epu8(diff, tolv);
    __m256i ok = _mm256_cmpeq_epi32(over, zero);
    int mask = _mm256_movemask_ps(_mm256_castsi256_ps(ok));
    if (mask) return c + __builtin_ctz(static_cast<unsigned>(mask));
  }
  for (; c < palette_size; ++c) {
    std::uint32_t q = palette[c];
    bool ok = true;
    for (int shift = 0; shift < 24 && ok; shift += 8) {
      int a = int((px >> shift) & 0xFF), b = int((q >> shift) & 0xFF);
      ok = a - b <= tol && b - a <= tol;
    }
    if (ok) return c;
  }
  return -1;
}

__attribute__((target("avx2"))) std::size_t label_avx2(const std::uint32_t* original,
                                                       const std::uint32_t* colored, std::size_t n,
                                                       const std::uint32_t* palette,
                                                       int palette_size, int tol,
                                                       std::int16_t* labels) {
  const std::uint8_t t = static_cast<std::uint8_t>(tol < 0 ? 0 : (tol > 255 ? 255 : tol));
  // The top byte never differs, so its tolerance is irrelevant.
  const __m256i tolv = _mm256_set1_epi32(static_cast<int>(t | (t << 8) | (t << 16)));
  std::size_t unmatched = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(original + i));
    __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(colored + i));
    int same = _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(a, b)));
    if (same == 0xFF) {
      _mm_storeu_si128(reinterpret_cast<__m128i*>(labels + i), _mm_set1_epi16(-1));
      continue;
    }
    for (int k = 0; k < 8; ++k) {
      if (same & (1 << k)) {
        labels[i + k] = -1;
        continue;
      }
      int m = first_match(colored[i + k], palette, palette_size, tolv, t);
      labels[i + k] = static_cast<std::int16_t>(m);
      if (m < 0) ++unmatched;
    }
  }
  for (; i < n; ++i) {
    if (original[i] == colored[i]) {
      labels[i] = -1;
      continue;
    }
    int m = first_match(colored[i], palette, palette_size, tolv, t);
    labels[i] = static_cast<std::int16_t>(m);
    if (m < 0) ++unmatched;
  }
  return unmatched;
}

}  // namespace

LabelFn label_pixels_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") ? &label_avx2 : nullptr;
}

}  // namespace noncekit::kernels

#else

namespace noncekit::kernels {
LabelFn label_pixels_avx2() { return nullptr; }
}  // namespace noncekit::kernels

#endif
