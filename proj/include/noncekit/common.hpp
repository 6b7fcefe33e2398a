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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace noncekit {

// Half-open [start, end) character range.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return end <= start; }
  bool contains(const CharSpan& o) const { return start <= o.start && o.end <= end; }
  bool contains(std::size_t pos) const { return start <= pos && pos < end; }
  bool overlaps(const CharSpan& o) const { return start < o.end && o.start < end; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
  friend auto operator<=>(const CharSpan&, const CharSpan&) = default;
};

// A span inside one original source file.
struct TexSpan {
  std::string file;
  std::size_t start = 0;
  std::size_t end = 0;

  CharSpan chars() const { return {start, end}; }
  bool contains(const TexSpan& o) const {
    return file == o.file && start <= o.start && o.end <= end;
  }
  bool nests_with(const TexSpan& o) const { return contains(o) || o.contains(*this); }
  friend bool operator==(const TexSpan&, const TexSpan&) = default;
  friend auto operator<=>(const TexSpan&, const TexSpan&) = default;
};

// Page-relative rectangle; all coordinates are fractions of the page size,
// origin at the top-left corner.
struct BoundingBox {
  int page = 0;
  double left = 0;
  double top = 0;
  double width = 0;
  double height = 0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  bool valid() const;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Smallest box containing both (same page assumed).
BoundingBox merge(const BoundingBox& a, const BoundingBox& b);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Error carrying a character offset into the input it was raised for.
class OffsetError : public Error {
 public:
  OffsetError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ParseError : public OffsetError {
 public:
  using OffsetError::OffsetError;
};

class UnbalancedDelimiter : public OffsetError {
 public:
  using OffsetError::OffsetError;
};

// Stable 64-bit FNV-1a, used for ids derived from content.
std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace noncekit
