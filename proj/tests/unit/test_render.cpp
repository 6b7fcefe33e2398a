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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "noncekit/kernels.hpp"
#include "noncekit/locate.hpp"

using namespace noncekit;
using namespace noncekit::locate;
namespace fs = std::filesystem;

namespace {

RenderConfig minitex_config() {
  RenderConfig c;
  c.compiler_cmd = std::string(NONCEKIT_MINITEX) + " {main} {outdir}";
  c.rasterizer_cmd = std::string(NONCEKIT_MINITEX_RASTER) + " -r {dpi} {pdf} {prefix}";
  return c;
}

struct TempSource {
  fs::path dir;
  explicit TempSource(const std::string& name, const std::string& main) {
    dir = fs::temp_directory_path() / ("noncekit_render_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "main.tex") << main;
  }
  ~TempSource() { fs::remove_all(dir); }
  std::string text() const {
    std::ifstream in(dir / "main.tex");
    return {std::istreambuf_iterator<char>(in), {}};
  }
};

std::string doc(const std::string& body) {
  return "\\documentclass{article}\n\\begin{document}\n" + body + "\n\\end{document}\n";
}

TexSpan span_of(const std::string& text, const std::string& needle, std::size_t from = 0) {
  std::size_t p = text.find(needle, from);
  REQUIRE(p != std::string::npos);
  return {"main.tex", p, p + needle.size()};
}

}  // namespace

TEST_CASE("render produces one raster per page") {
  std::string body;
  for (int i = 0; i < 80; ++i) body += "Paragraph number " + std::to_string(i) + " has text.\n\n";
  TempSource src("pages", doc(body));
  auto pages = render_document(minitex_config(), src.dir, "main.tex");
  CHECK(pages.size() >= 2);
  for (const auto& p : pages) {
    CHECK(p.width == 1275);
    CHECK(p.height == 1650);
  }
  auto cfg = minitex_config();
  cfg.dpi = 75;
  auto small = render_document(cfg, src.dir, "main.tex");
  CHECK(small.size() == pages.size());
  CHECK(small[0].width == 638);
}

TEST_CASE("compile failures carry the log tail") {
  TempSource src("broken", doc("Unbalanced {group here."));
  try {
    render_document(minitex_config(), src.dir, "main.tex");
    FAIL("expected CompileError");
  } catch (const CompileError& e) {
    CHECK(e.log_tail().find("File ended") != std::string::npos);
  }
  RenderConfig bad = minitex_config();
  bad.rasterizer_cmd = "false";
  TempSource ok("okdoc", doc("Fine."));
  CHECK_THROWS_AS(render_document(bad, ok.dir, "main.tex"), RasterError);
}

TEST_CASE("coloring does not move uncolored glyphs") {
  TempSource src("layout", doc("Let $x_i + y$ be given, with a term SRL here.\n\n"
                               "\\begin{equation}z = x_i^2\\end{equation}"));
  const std::string text = src.text();
  ColorBatch b;
  b.assignments = {{"x", span_of(text, "x_i"), 0}, {"srl", span_of(text, "SRL"), 1},
                   {"z", span_of(text, "z ="), 2}};
  b.assignments[2].span.end -= 2;
  auto palette = make_palette(100);
  auto instrumented = instrument_tex({{"main.tex", text}}, "main.tex", b, palette);
  auto cfg = minitex_config();
  auto a = render_document(cfg, src.dir, "main.tex");
  auto c = render_document(cfg, src.dir, "main.tex", instrumented);
  REQUIRE(a.size() == c.size());
  // Every pixel either matches or is a palette color over original ink.
  std::size_t recolored = 0;
  for (std::size_t i = 0; i < a[0].pixels.size(); ++i) {
    if (a[0].pixels[i] == c[0].pixels[i]) continue;
    CHECK(a[0].pixels[i] == kernels::pack_rgb(0, 0, 0));
    ++recolored;
  }
  CHECK(recolored > 0);
  // The source directory is untouched.
  CHECK(src.text() == text);
}

TEST_CASE("the letter i is two boxes") {
  TempSource src("letter_i", doc("i"));
  const std::string text = src.text();
  ColorBatch b;
  b.assignments = {{"i", span_of(text, "i\n\\end"), 0}};
  b.assignments[0].span.end = b.assignments[0].span.start + 1;
  auto palette = make_palette(100);
  auto cfg = minitex_config();
  auto a = render_document(cfg, src.dir, "main.tex");
  auto c = render_document(cfg, src.dir, "main.tex", instrument_tex({{"main.tex", text}}, "main.tex", b, palette));
  auto r = locate_batch(a, c, b, palette);
  CHECK(r.boxes.at("i").size() == 2);
}

TEST_CASE("end-to-end localization of nested targets") {
  TempSource src("e2e", doc("We use $k$ clusters. Results follow for SRL.\n\n"
                            "\\begin{align}a &= b \\\\ c &= d\\end{align}"));
  const std::string text = src.text();
  std::vector<Target> targets = {
      {"sent-1", span_of(text, "We use $k$ clusters.")},
      {"eq-1", span_of(text, "k")},
      {"term-srl", span_of(text, "SRL")},
      {"eq-2", span_of(text, "\\begin{align}a &= b \\\\ c &= d\\end{align}")},
      {"bad", span_of(text, "&= b")},
  };
  LocateConfig cfg;
  cfg.render = minitex_config();
  cfg.capacity = 2;
  cfg.workers = 2;
  auto report = locate_targets(cfg, src.dir, "main.tex", {{"main.tex", text}}, targets);
  CHECK(report.misses == std::vector<std::string>{"bad"});
  CHECK(report.boxes.at("sent-1").size() == 1);
  CHECK(report.boxes.at("eq-1").size() == 1);
  CHECK(report.boxes.at("term-srl").size() == 1);
  CHECK(report.boxes.at("eq-2").size() == 2);  // one box per row
  CHECK(report.batches == 2);
  CHECK(report.compiles == report.batches + 1);
  const auto& s = report.boxes.at("sent-1")[0];
  const auto& k = report.boxes.at("eq-1")[0];
  CHECK(s.left <= k.left);
  CHECK(k.right() <= s.right());
  CHECK(report.unmatched_pixels == 0);
}

TEST_CASE("a failing batch is retried in halves") {
  TempSource src("retry", doc("Alpha beta gamma delta."));
  const std::string text = src.text();
  std::vector<Target> targets = {{"a", span_of(text, "Alpha")}, {"b", span_of(text, "beta")},
                                 {"c", span_of(text, "gamma")}, {"d", span_of(text, "delta")}};
  LocateConfig cfg;
  cfg.render = minitex_config();
  // Any instrumented file that wraps "gamma" fails to compile.
  cfg.render.compiler_cmd = "if grep -q 'gamma}' {main}; then exit 1; fi; " + cfg.render.compiler_cmd;
  auto report = locate_targets(cfg, src.dir, "main.tex", {{"main.tex", text}}, targets);
  CHECK(report.boxes.count("a"));
  CHECK(report.boxes.count("b"));
  CHECK(report.misses == std::vector<std::string>{"c", "d"});
  CHECK(report.compiles == 4);  // original, full batch, two halves
}
