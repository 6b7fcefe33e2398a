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

#include <cstdlib>
#include <cstring>

namespace noncekit::kernels {

namespace {

bool within(std::uint32_t a, std::uint32_t b, int tol) {
  for (int shift = 0; shift < 24; shift += 8) {
    int ca = int((a >> shift) & 0xFF), cb = int((b >> shift) & 0xFF);
    if (ca - cb > tol || cb - ca > tol) return false;
  }
  return true;
}

bool force_scalar() {
  const char* v = std::getenv("NONCEKIT_SIMD");
  return v && std::strcmp(v, "scalar") == 0;
}

}  // namespace

std::size_t label_pixels_scalar(const std::uint32_t* original, const std::uint32_t* colored,
                                std::size_t n, const std::uint32_t* palette, int palette_size,
                                int tol, std::int16_t* labels) {
  std::size_t unmatched = 0;
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = -1;
    if (colored[i] == original[i]) continue;
    for (int c = 0; c < palette_size; ++c) {
      if (within(colored[i], palette[c], tol)) {
        labels[i] = static_cast<std::int16_t>(c);
        break;
      }
    }
    if (labels[i] < 0) ++unmatched;
  }
  return unmatched;
}

LabelFn label_pixels() {
  static const LabelFn fn = [] {
    if (force_scalar()) return &label_pixels_scalar;
    if (auto f = label_pixels_avx2()) return f;
    if (auto f = label_pixels_neon()) return f;
    return &label_pixels_scalar;
  }();
  return fn;
}

std::string_view active_variant() {
  LabelFn f = label_pixels();
  if (f == &label_pixels_scalar) return "scalar";
  if (f == label_pixels_avx2()) return "avx2";
  return "neon";
}

}  // namespace noncekit::kernels
