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

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "../support/blob_oracle.hpp"
#include "doctest.h"
#include "noncekit/kernels.hpp"
#include "noncekit/locate.hpp"

using namespace noncekit;
using namespace noncekit::locate;

namespace {

std::vector<Target> flat_targets(int n) {
  std::vector<Target> out;
  for (int i = 0; i < n; ++i)
    out.push_back({"e" + std::to_string(i), {"main.tex", std::size_t(10 * i), std::size_t(10 * i + 5)}});
  return out;
}

bool valid_plan(const std::vector<Target>& targets, const std::vector<ColorBatch>& batches, int c) {
  std::multiset<std::string> seen;
  for (const auto& b : batches) {
    if (static_cast<int>(b.assignments.size()) > c || b.assignments.empty()) return false;
    std::set<int> colors;
    for (std::size_t i = 0; i < b.assignments.size(); ++i) {
      if (!colors.insert(b.assignments[i].color).second) return false;
      seen.insert(b.assignments[i].id);
      for (std::size_t j = i + 1; j < b.assignments.size(); ++j) {
        const auto& x = b.assignments[i].span;
        const auto& y = b.assignments[j].span;
        if (x.file == y.file && x.start < y.end && y.start < x.end) return false;
      }
    }
  }
  if (seen.size() != targets.size()) return false;
  for (const auto& t : targets)
    if (seen.count(t.id) != 1) return false;
  return true;
}

// Smallest batch count by exhaustive assignment.
int min_batches(const std::vector<Target>& t, int c) {
  int n = static_cast<int>(t.size());
  for (int k = 1; k <= n; ++k) {
    std::vector<int> slot(n, 0);
    std::function<bool(int)> rec = [&](int i) -> bool {
      if (i == n) return true;
      for (int b = 0; b < k; ++b) {
        int count = 0;
        bool ok = true;
        for (int j = 0; j < i && ok; ++j) {
          if (slot[j] != b) continue;
          ++count;
          ok = !(t[j].span.start < t[i].span.end && t[i].span.start < t[j].span.end);
        }
        if (!ok || count >= c) continue;
        slot[i] = b;
        if (rec(i + 1)) return true;
      }
      return false;
    };
    if (rec(0)) return k;
  }
  return n;
}

RasterPage blank(int w, int h) {
  RasterPage p;
  p.width = w;
  p.height = h;
  p.pixels.assign(static_cast<std::size_t>(w) * h, kernels::pack_rgb(255, 255, 255));
  return p;
}

void fill(RasterPage& p, int x0, int y0, int x1, int y1, std::uint32_t c) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) p.pixels[y * p.width + x] = c;
}

}  // namespace

TEST_CASE("batch count is ceil(N/C) without nesting") {
  for (int n : {1, 99, 100, 101, 250}) {
    auto t = flat_targets(n);
    auto b = plan_color_batches(t, 100);
    CHECK(b.size() == static_cast<std::size_t>((n + 99) / 100));
    CHECK(valid_plan(t, b, 100));
  }
}

TEST_CASE("nested pair with one color needs two batches") {
  std::vector<Target> t = {{"eq", {"main.tex", 0, 10}}, {"sym", {"main.tex", 2, 3}}};
  auto b = plan_color_batches(t, 1);
  CHECK(b.size() == 2);
  CHECK(min_batches(t, 1) == 2);
  CHECK(valid_plan(t, b, 1));
  // With room for both, nesting still keeps them apart.
  CHECK(plan_color_batches(t, 100).size() == 2);
}

TEST_CASE("batching errors") {
  CHECK_THROWS_AS(plan_color_batches(flat_targets(3), 0), CapacityError);
  auto t = flat_targets(2);
  t[1].id = t[0].id;
  CHECK_THROWS_AS(plan_color_batches(t, 5), CapacityError);
  CHECK(plan_color_batches({}, 5).empty());
}

TEST_CASE("batching on random nested families is near the exhaustive optimum") {
  std::mt19937 rng(11);
  int optimal = 0;
  const int runs = 2000;
  for (int iter = 0; iter < runs; ++iter) {
    int n = 1 + static_cast<int>(rng() % 6);
    int c = 1 + static_cast<int>(rng() % 3);
    // Random nested spans: each new span sits inside or beside an earlier one.
    std::vector<Target> t;
    std::vector<std::pair<std::size_t, std::size_t>> spans = {{0, 1000}};
    for (int i = 0; i < n; ++i) {
      auto [lo, hi] = spans[rng() % spans.size()];
      std::size_t len = hi - lo;
      if (len < 4) {
        lo = 2000 + 100 * i;
        hi = lo + 50;
        len = 50;
      }
      std::size_t a = lo + rng() % (len / 2), b = a + 1 + rng() % (hi - a - 1);
      spans.push_back({a, b});
      t.push_back({"t" + std::to_string(i), {"main.tex", a, b}});
    }
    auto plan = plan_color_batches(t, c);
    REQUIRE(valid_plan(t, plan, c));
    int best = min_batches(t, c);
    CHECK(static_cast<int>(plan.size()) <= best + 1);
    optimal += static_cast<int>(plan.size()) == best;
  }
  CHECK(optimal >= runs * 99 / 100);
}

TEST_CASE("palette colors are distinct beyond tolerance") {
  auto p = make_palette(100);
  REQUIRE(p.size() == 100);
  CHECK(p[0] == kernels::pack_rgb(255, 0, 0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      int worst = 0;
      for (int s = 0; s < 24; s += 8)
        worst = std::max(worst, std::abs(int((p[i] >> s) & 0xFF) - int((p[j] >> s) & 0xFF)));
      CHECK(worst > 8);
    }
    // Never confusable with black ink or white paper.
    std::uint32_t v = p[i];
    CHECK(std::max({v & 0xFF, (v >> 8) & 0xFF, (v >> 16) & 0xFF}) == 255u);
    CHECK(std::min({v & 0xFF, (v >> 8) & 0xFF, (v >> 16) & 0xFF}) == 0u);
  }
}

TEST_CASE("instrumentation wraps spans right to left") {
  std::map<std::string, std::string> files = {
      {"main.tex", "\\documentclass{article}\n\\begin{document}\nA $x$ and $y$.\n\\end{document}\n"}};
  const std::string& src = files["main.tex"];
  std::size_t x = src.find("x$"), y = src.find("y$");
  ColorBatch b;
  b.assignments = {{"x", {"main.tex", x, x + 1}, 7}, {"y", {"main.tex", y, y + 1}, 0}};
  auto palette = make_palette(100);
  auto out = instrument_tex(files, "main.tex", b, palette);
  const std::string& s = out.at("main.tex");
  CHECK(s.find("\\usepackage{xcolor}\n\\begin{document}") != std::string::npos);
  std::uint32_t c7 = palette[7];
  std::string wrap7 = "${\\color[RGB]{" + std::to_string(c7 & 0xFF) + "," +
                      std::to_string((c7 >> 8) & 0xFF) + "," + std::to_string(c7 >> 16) + "}x}$";
  CHECK(s.find(wrap7) != std::string::npos);
  CHECK(s.find("${\\color[RGB]{255,0,0}y}$") != std::string::npos);

  CHECK(instrument_tex(files, "main.tex", ColorBatch{}, palette).empty());
}

TEST_CASE("splice checks") {
  CHECK_NOTHROW(check_splice("a {b} c", {0, 7}));
  CHECK_THROWS_AS(check_splice("a {b} c", {0, 3}), SpliceError);
  CHECK_THROWS_AS(check_splice("a {b} c", {3, 7}), SpliceError);
  CHECK_THROWS_AS(check_splice("x &= y", {0, 6}), SpliceError);
  CHECK_THROWS_AS(check_splice("x \\\\ y", {0, 6}), SpliceError);
  CHECK_NOTHROW(check_splice("\\begin{align}x &= y\\end{align}", {0, 30}));
  CHECK_THROWS_AS(check_splice("\\begin{itemize} a", {0, 17}), SpliceError);
  CHECK_THROWS_AS(check_splice("\\left( x", {0, 8}), SpliceError);
  CHECK_NOTHROW(check_splice("\\left( x \\right)", {0, 16}));
  CHECK_NOTHROW(check_splice("\\{ x", {0, 4}));
  CHECK_THROWS_AS(check_splice("abc", {1, 1}), SpliceError);
}

TEST_CASE("blobs: blank mask and the letter i") {
  CHECK(detect_blobs(std::vector<std::uint8_t>(64 * 64, 0), 64, 64).empty());
  // Dot, one blank row, then the stem.
  int w = 7, h = 12;
  std::vector<std::uint8_t> m(w * h, 0);
  for (int y = 0; y < 2; ++y)
    for (int x = 2; x < 4; ++x) m[y * w + x] = 1;
  for (int y = 3; y < 12; ++y)
    for (int x = 2; x < 4; ++x) m[y * w + x] = 1;
  auto boxes = detect_blobs(m, w, h);
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0] == PixelBox{2, 0, 3, 1});
  CHECK(boxes[1] == PixelBox{2, 3, 3, 11});
}

TEST_CASE("blobs match the brute-force oracle on random masks") {
  std::mt19937 rng(2024);
  int checked = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    const int w = 64, h = 64;
    std::vector<std::uint8_t> m(w * h, 0);
    // Sparse random rectangles plus salt noise give varied shapes.
    int rects = static_cast<int>(rng() % 12);
    for (int r = 0; r < rects; ++r) {
      int x0 = rng() % w, y0 = rng() % h;
      int x1 = std::min(w - 1, x0 + static_cast<int>(rng() % 10));
      int y1 = std::min(h - 1, y0 + static_cast<int>(rng() % 10));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) m[y * w + x] = 1;
    }
    int salt = static_cast<int>(rng() % 40);
    for (int s = 0; s < salt; ++s) m[rng() % (w * h)] = 1;
    auto got = detect_blobs(m, w, h);
    auto want = testing::blob_oracle(m, w, h);
    CHECK(got == want);
    for (std::size_t i = 0; i < got.size(); ++i)
      for (std::size_t j = i + 1; j < got.size(); ++j) {
        const auto& a = got[i];
        const auto& b = got[j];
        CHECK_FALSE((a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1));
      }
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("blob boxes are minimal") {
  std::mt19937 rng(5);
  for (int iter = 0; iter < 200; ++iter) {
    const int w = 32, h = 32;
    std::vector<std::uint8_t> m(w * h);
    for (auto& v : m) v = (rng() % 9) == 0;
    for (const auto& b : detect_blobs(m, w, h)) {
      auto any_in_row = [&](int y) {
        for (int x = b.x0; x <= b.x1; ++x)
          if (m[y * w + x]) return true;
        return false;
      };
      auto any_in_col = [&](int x) {
        for (int y = b.y0; y <= b.y1; ++y)
          if (m[y * w + x]) return true;
        return false;
      };
      CHECK(any_in_row(b.y0));
      CHECK(any_in_row(b.y1));
      CHECK(any_in_col(b.x0));
      CHECK(any_in_col(b.x1));
    }
  }
}

TEST_CASE("pixel kernel variants agree with the scalar reference") {
  auto palette = make_palette(100);
  std::mt19937 rng(99);
  std::vector<kernels::LabelFn> variants;
  if (auto f = kernels::label_pixels_avx2()) variants.push_back(f);
  if (auto f = kernels::label_pixels_neon()) variants.push_back(f);
  variants.push_back(kernels::label_pixels());
  MESSAGE("active variant: " << kernels::active_variant());
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t n = 1 + rng() % 3000;
    int used = 1 + static_cast<int>(rng() % 100);
    int tol = static_cast<int>(rng() % 20);
    std::vector<std::uint32_t> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = (rng() % 2) ? kernels::pack_rgb(255, 255, 255) : kernels::pack_rgb(0, 0, 0);
      switch (rng() % 4) {
        case 0: b[i] = a[i]; break;
        case 1: b[i] = rng() & 0xFFFFFF; break;
        default: {
          std::uint32_t p = palette[rng() % used];
          std::uint32_t jitter = 0;
          for (int s = 0; s < 24; s += 8) {
            int v = int((p >> s) & 0xFF) + static_cast<int>(rng() % 21) - 10;
            jitter |= std::uint32_t(std::clamp(v, 0, 255)) << s;
          }
          b[i] = jitter;
        }
      }
    }
    std::vector<std::int16_t> ref(n), got(n);
    auto ref_unmatched = kernels::label_pixels_scalar(a.data(), b.data(), n, palette.data(), used, tol, ref.data());
    for (auto f : variants) {
      auto un = f(a.data(), b.data(), n, palette.data(), used, tol, got.data());
      CHECK(un == ref_unmatched);
      CHECK(got == ref);
    }
  }
}

TEST_CASE("locate_batch finds colored regions") {
  auto palette = make_palette(100);
  RasterPage orig = blank(100, 50);
  fill(orig, 10, 10, 19, 19, 0);
  fill(orig, 40, 10, 49, 30, 0);
  fill(orig, 60, 5, 70, 8, 0);  // never colored
  RasterPage col = orig;
  fill(col, 10, 10, 19, 19, palette[0]);
  fill(col, 40, 10, 49, 15, palette[1]);
  fill(col, 40, 20, 49, 30, palette[1]);  // second line of the same entity
  ColorBatch b;
  b.assignments = {{"a", {"main.tex", 0, 1}, 0}, {"b", {"main.tex", 2, 3}, 1},
                   {"gone", {"main.tex", 4, 5}, 2}};
  auto r = locate_batch({orig}, {col}, b, palette);
  REQUIRE(r.boxes.at("a").size() == 1);
  CHECK(r.boxes.at("a")[0] == to_fraction({10, 10, 19, 19}, 0, 100, 50));
  CHECK(r.boxes.at("b").size() == 2);
  CHECK(r.boxes.at("gone").empty());
  CHECK(r.unmatched_pixels == 0);

  RasterPage other = blank(100, 50);
  CHECK_THROWS_AS(locate_batch({orig}, {col, other}, b, palette), PageMismatchError);
  RasterPage small = blank(90, 50);
  CHECK_THROWS_AS(locate_batch({orig}, {small}, b, palette), PageMismatchError);
}

TEST_CASE("composite boxes are unions of child boxes per line") {
  using mathparse::SymbolKind;
  using mathparse::SymbolRecord;
  SymbolRecord xi{"s0", SymbolKind::script, "x_i", {}, "", std::nullopt, {"s1", "s2"}, {}};
  SymbolRecord x{"s1", SymbolKind::simple, "x", {}, "", "s0", {}, {}};
  SymbolRecord i{"s2", SymbolKind::simple, "i", {}, "", "s0", {}, {}};
  std::map<std::string, const SymbolRecord*> syms = {{"s0", &xi}, {"s1", &x}, {"s2", &i}};
  BoundingBox bx{0, 0.10, 0.20, 0.02, 0.02};
  BoundingBox bi{0, 0.12, 0.21, 0.01, 0.02};
  std::map<std::string, std::vector<BoundingBox>> loc = {{"s1", {bx}}, {"s2", {bi}}};
  auto out = compose_bounding_boxes(xi, syms, loc);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == merge(bx, bi));

  // Single child: identity.
  SymbolRecord hat{"s3", SymbolKind::script, "x_{}", {}, "", std::nullopt, {"s1"}, {}};
  auto one = compose_bounding_boxes(hat, syms, loc);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == bx);

  // Child on the next line gives a second box.
  loc["s2"] = {BoundingBox{0, 0.05, 0.30, 0.01, 0.02}};
  CHECK(compose_bounding_boxes(xi, syms, loc).size() == 2);
  loc["s2"] = {BoundingBox{1, 0.05, 0.20, 0.01, 0.02}};
  CHECK(compose_bounding_boxes(xi, syms, loc).size() == 2);

  loc.erase("s2");
  CHECK_THROWS_AS(compose_bounding_boxes(xi, syms, loc), MissingChildError);
}

TEST_CASE("ppm round trip") {
  RasterPage p = blank(5, 3);
  p.pixels[7] = kernels::pack_rgb(1, 2, 3);
  auto path = std::filesystem::temp_directory_path() / "noncekit_rt.ppm";
  write_ppm(path, p);
  auto q = read_ppm(path);
  CHECK(q.width == 5);
  CHECK(q.height == 3);
  CHECK(q.pixels == p.pixels);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_ppm(path), RasterError);
}
