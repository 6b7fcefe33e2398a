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
#include <map>
#include <string>
#include <vector>

#include "noncekit/common.hpp"
#include "noncekit/mathparse.hpp"

namespace noncekit::locate {

class CapacityError : public Error {
 public:
  using Error::Error;
};
class SpliceError : public Error {
 public:
  using Error::Error;
};
class CompileError : public Error {
 public:
  CompileError(const std::string& what, std::string log_tail)
      : Error(what), log_tail_(std::move(log_tail)) {}
  const std::string& log_tail() const { return log_tail_; }

 private:
  std::string log_tail_;
};
class RasterError : public Error {
 public:
  using Error::Error;
};
class PageMismatchError : public Error {
 public:
  using Error::Error;
};
class MissingChildError : public Error {
 public:
  using Error::Error;
};

// Something to be colored: an entity occurrence and the TeX it spans.
struct Target {
  std::string id;
  TexSpan span;
};

struct Assignment {
  std::string id;
  TexSpan span;
  int color = 0;
};

struct ColorBatch {
  int index = 0;
  std::vector<Assignment> assignments;  // colors distinct within a batch
};

// Partitions targets into batches of at most capacity entries; targets whose
// spans overlap never share a batch. Without overlaps this gives
// ceil(N / capacity) batches.
std::vector<ColorBatch> plan_color_batches(const std::vector<Target>& targets, int capacity);

// capacity hues evenly spaced around the color wheel at full saturation.
std::vector<std::uint32_t> make_palette(int capacity);

// Wraps each assigned span in "{\color[RGB]{r,g,b}" ... "}". Only files that
// change are returned. Adds \usepackage{xcolor} to main_file if needed.
std::map<std::string, std::string> instrument_tex(
    const std::map<std::string, std::string>& files, const std::string& main_file,
    const ColorBatch& batch, const std::vector<std::uint32_t>& palette);

// Throws SpliceError when wrapping span in a group would not compile: the
// span has unbalanced braces or opens/closes an environment it does not
// close/open.
void check_splice(std::string_view file_text, CharSpan span);

struct RasterPage {
  int index = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> pixels;  // packed r | g << 8 | b << 16
};

// Netpbm P6 (maxval 255) reader/writer.
RasterPage read_ppm(const std::filesystem::path& path, int index = 0);
void write_ppm(const std::filesystem::path& path, const RasterPage& page);

struct RenderConfig {
  // Placeholders: {main} main file, {outdir} output directory, {jobname}
  // main file stem.
  std::string compiler_cmd =
      "pdflatex -interaction=nonstopmode -halt-on-error -output-directory {outdir} {main}";
  // Placeholders: {dpi}, {pdf}, {prefix}. One image per page named
  // prefix-N.ppm with N zero-padded to a common width.
  std::string rasterizer_cmd = "pdftoppm -r {dpi} {pdf} {prefix}";
  int dpi = 150;
};

// Compiles a scratch copy of source_dir (with overrides written over it) and
// rasterizes every page. The source directory is never modified.
std::vector<RasterPage> render_document(const RenderConfig& config,
                                        const std::filesystem::path& source_dir,
                                        const std::string& main_file,
                                        const std::map<std::string, std::string>& overrides = {});

// Pixel-space box, inclusive bounds.
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
  friend auto operator<=>(const PixelBox&, const PixelBox&) = default;
};

// One run per row: the extent from first to last set pixel.
struct RowRun {
  int y = 0, x0 = 0, x1 = 0;
};

// Joins runs of vertically adjacent rows that overlap horizontally, then
// merges overlapping boxes until none overlap. Runs must be sorted by row.
std::vector<PixelBox> blobs_from_runs(const std::vector<RowRun>& runs);

// Row-major mask, nonzero = set.
std::vector<PixelBox> detect_blobs(const std::vector<std::uint8_t>& mask, int width, int height);

BoundingBox to_fraction(const PixelBox& box, int page, int width, int height);

struct BatchResult {
  std::map<std::string, std::vector<BoundingBox>> boxes;
  std::size_t unmatched_pixels = 0;
};

// Diffs colored against original renders and returns the boxes of each
// assigned color. Throws PageMismatchError if page count or size differs.
BatchResult locate_batch(const std::vector<RasterPage>& original,
                         const std::vector<RasterPage>& colored, const ColorBatch& batch,
                         const std::vector<std::uint32_t>& palette, int tolerance = 8);

// Boxes for a composite from the boxes of the symbols it is made of: one box
// per page and line (children whose vertical extents overlap share a box).
// Simple symbols and accents are treated as located directly.
std::vector<BoundingBox> compose_bounding_boxes(
    const mathparse::SymbolRecord& symbol,
    const std::map<std::string, const mathparse::SymbolRecord*>& symbols,
    const std::map<std::string, std::vector<BoundingBox>>& located);

// Groups boxes by page and vertical overlap; one union box per group.
std::vector<BoundingBox> union_by_line(std::vector<BoundingBox> boxes);

struct LocateConfig {
  RenderConfig render;
  int capacity = 100;
  int tolerance = 8;
  int workers = 4;
};

struct LocateReport {
  std::map<std::string, std::vector<BoundingBox>> boxes;
  std::vector<std::string> misses;  // targets that produced no boxes
  int batches = 0;
  int compiles = 0;
  std::size_t unmatched_pixels = 0;
  std::vector<std::string> warnings;
};

// Full colorize/compile/rasterize/diff loop. Targets that cannot be spliced
// are recorded as misses. A batch whose compile fails is split in half and
// retried once.
LocateReport locate_targets(const LocateConfig& config, const std::filesystem::path& source_dir,
                            const std::string& main_file,
                            const std::map<std::string, std::string>& files,
                            const std::vector<Target>& targets);

}  // namespace noncekit::locate
