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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

// A tiny typesetter for a subset of LaTeX, used where no TeX installation is
// available. Output is one 1-bit-glyph RGB raster per letter-size page at
// 150 dpi, without anti-aliasing. Color commands never change layout.
namespace minitex {

constexpr int kPageWidth = 1275;
constexpr int kPageHeight = 1650;
constexpr int kDpi = 150;

class TexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlyphData {
  int size;  // 0 text, 1 script
  std::uint32_t code;
  int advance, left, top, width, height;
  std::vector<const char*> rows;
};

const GlyphData* find_glyph(std::uint32_t code, int size);

// Where a typeset glyph came from; file -1 for generated material such as
// citation numbers.
struct Origin {
  int file = -1;
  int offset = -1;
};

struct PlacedGlyph {
  int page = 0;
  int x = 0, y = 0;  // top-left of the bitmap
  const GlyphData* glyph = nullptr;
  std::uint32_t color = 0;  // r | g << 8 | b << 16
  Origin origin;
};

struct Document {
  int pages = 0;
  std::vector<std::string> files;  // paths relative to the working directory
  std::vector<PlacedGlyph> glyphs;
};

// Typesets main_file (resolving \input relative to dir).
Document typeset(const std::filesystem::path& dir, const std::string& main_file);

// RGB rasters, packed r | g << 8 | b << 16.
std::vector<std::vector<std::uint32_t>> render(const Document& doc);

void write_pdf(const std::filesystem::path& path,
               const std::vector<std::vector<std::uint32_t>>& pages);

struct PdfImage {
  int width = 0, height = 0;
  std::vector<unsigned char> rgb;
};
std::vector<PdfImage> read_pdf_images(const std::filesystem::path& path);

}  // namespace minitex
