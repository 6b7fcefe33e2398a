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

#if defined(__ARM_NEON)
#include <arm_neon.h>

namespace noncekit::kernels {

namespace {

int first_match(std::uint32_t px, const std::uint32_t* palette, int palette_size, uint8x16_t tolv) {
  const uint8x16_t p = vreinterpretq_u8_u32(vdupq_n_u32(px));
  int c = 0;
  for (; c + 4 <= palette_size; c += 4) {
    uint8x16_t q = vreinterpretq_u8_u32(vld1q_u32(palette + c));
    uint8x16_t over = vqsubq_u8(vabdq_u8(p, q), tolv);
    uint32x4_t ok = vceqq_u32(vreinterpretq_u32_u8(over), vdupq_n_u32(0));
    std::uint32_t lanes[4];
    vst1q_u32(lanes, ok);
    for (int k = 0; k < 4; ++k)
      if (lanes[k]) return c + k;
  }
  for (; c < palette_size; ++c) {
    uint8x8_t q = vreinterpret_u8_u32(vdup_n_u32(palette[c]));
    uint8x8_t over = vqsub_u8(vabd_u8(vget_low_u8(p), q), vget_low_u8(tolv));
    if (vget_lane_u32(vreinterpret_u32_u8(over), 0) == 0) return c;
  }
  return -1;
}

std::size_t label_neon(const std::uint32_t* original, const std::uint32_t* colored, std::size_t n,
                       const std::uint32_t* palette, int palette_size, int tol,
                       std::int16_t* labels) {
  const std::uint8_t t = static_cast<std::uint8_t>(tol < 0 ? 0 : (tol > 255 ? 255 : tol));
  const uint8x16_t tolv = vreinterpretq_u8_u32(vdupq_n_u32(t | (t << 8) | (t << 16)));
  std::size_t unmatched = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    uint32x4_t eq = vceqq_u32(vld1q_u32(original + i), vld1q_u32(colored + i));
    if (vminvq_u32(eq) == 0xFFFFFFFFu) {
      vst1_s16(labels + i, vdup_n_s16(-1));
      continue;
    }
    for (int k = 0; k < 4; ++k) {
      std::size_t j = i + k;
      if (original[j] == colored[j]) {
        labels[j] = -1;
        continue;
      }
      int m = first_match(colored[j], palette, palette_size, tolv);
      labels[j] = static_cast<std::int16_t>(m);
      if (m < 0) ++unmatched;
    }
  }
  for (; i < n; ++i) {
    if (original[i] == colored[i]) {
      labels[i] = -1;
      continue;
    }
    int m = first_match(colored[i], palette, palette_size, tolv);
    labels[i] = static_cast<std::int16_t>(m);
    if (m < 0) ++unmatched;
  }
  return unmatched;
}

}  // namespace

LabelFn label_pixels_neon() { return &label_neon; }

}  // namespace noncekit::kernels

#else

namespace noncekit::kernels {
LabelFn label_pixels_neon() { return nullptr; }
}  // namespace noncekit::kernels

#endif
