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

#include "noncekit/common.hpp"

#include <algorithm>
#include <cstdio>

namespace noncekit {

bool BoundingBox::valid() const {
  constexpr double eps = 1e-9;
  return page >= 0 && left >= 0 && top >= 0 && width > 0 && height > 0 &&
         left + width <= 1 + eps && top + height <= 1 + eps;
}

BoundingBox merge(const BoundingBox& a, const BoundingBox& b) {
  BoundingBox out;
  out.page = a.page;
  out.left = std::min(a.left, b.left);
  out.top = std::min(a.top, b.top);
  out.width = std::max(a.right(), b.right()) - out.left;
  out.height = std::max(a.bottom(), b.bottom()) - out.top;
  return out;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace noncekit
