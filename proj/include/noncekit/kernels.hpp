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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Per-pixel palette matching for the color/diff localization step. Pixels are
// packed as r | g << 8 | b << 16 with the top byte zero.
namespace noncekit::kernels {

constexpr std::uint32_t pack_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return std::uint32_t(r) | (std::uint32_t(g) << 8) | (std::uint32_t(b) << 16);
}

// For every i: labels[i] is the lowest palette index whose channels are all
// within tol of colored[i], provided colored[i] != original[i]; otherwise -1.
// Returns how many differing pixels matched no palette entry.
using LabelFn = std::size_t (*)(const std::uint32_t* original, const std::uint32_t* colored,
                                std::size_t n, const std::uint32_t* palette, int palette_size,
                                int tol, std::int16_t* labels);

std::size_t label_pixels_scalar(const std::uint32_t* original, const std::uint32_t* colored,
                                std::size_t n, const std::uint32_t* palette, int palette_size,
                                int tol, std::int16_t* labels);

// Null when the variant is not compiled in or the CPU lacks the feature.
LabelFn label_pixels_avx2();
LabelFn label_pixels_neon();

// Best available variant; NONCEKIT_SIMD=scalar forces the reference.
LabelFn label_pixels();
std::string_view active_variant();

}  // namespace noncekit::kernels
