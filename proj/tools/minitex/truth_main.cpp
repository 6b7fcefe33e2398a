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

// minitex-truth: ground-truth boxes for a fixture paper, read from the
// typesetter's glyph trace rather than from rendered colors.
//   minitex-truth <source-dir> <main.tex> <out.json>
//
// Every colored target of the pipeline gets the boxes of the ink whose
// source offset falls inside its span. Composite symbols get one box per
// line around the ink of their leaf symbols.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "minitex.hpp"
#include "noncekit/pipeline.hpp"
#include "noncekit/serialize.hpp"

namespace fs = std::filesystem;
using namespace noncekit;

namespace {

struct Box {
  int page, x0, y0, x1, y1;
  bool overlaps(const Box& o) const {
    return page == o.page && x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
  }
};

Box unite(const Box& a, const Box& b) {
  return {a.page, std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

// Repeatedly merges any two overlapping boxes until none overlap.
std::vector<Box> merge_all(std::vector<Box> boxes) {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < boxes.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < boxes.size() && !changed; ++j)
        if (boxes[i].overlaps(boxes[j])) {
          boxes[i] = unite(boxes[i], boxes[j]);
          boxes.erase(boxes.begin() + static_cast<long>(j));
          changed = true;
        }
  }
  std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
    return std::tie(a.page, a.y0, a.x0) < std::tie(b.page, b.y0, b.x0);
  });
  return boxes;
}

// Ink pixels -> one extent per row -> rows chained when adjacent and
// horizontally overlapping -> overlapping boxes merged.
std::vector<Box> blobs(const std::map<int, std::map<int, std::pair<int, int>>>& rows) {
  std::vector<Box> out;
  for (const auto& [page, by_row] : rows) {
    std::vector<Box> runs;
    for (const auto& [y, ext] : by_row) runs.push_back({page, ext.first, y, ext.second, y});
    std::vector<int> group(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) group[i] = static_cast<int>(i);
    auto find = [&](int i) {
      while (group[i] != i) i = group[i] = group[group[i]];
      return i;
    };
    for (std::size_t i = 0; i < runs.size(); ++i)
      for (std::size_t j = 0; j < runs.size(); ++j)
        if (runs[j].y0 == runs[i].y0 + 1 && runs[i].x0 <= runs[j].x1 && runs[j].x0 <= runs[i].x1)
          group[find(static_cast<int>(j))] = find(static_cast<int>(i));
    std::map<int, Box> comp;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      int g = find(static_cast<int>(i));
      auto it = comp.find(g);
      if (it == comp.end()) comp.emplace(g, runs[i]);
      else it->second = unite(it->second, runs[i]);
    }
    for (const auto& [g, b] : comp) out.push_back(b);
  }
  return merge_all(out);
}

// Boxes grouped by page and chains of vertical overlap, one union each.
std::vector<Box> by_line(std::vector<Box> boxes) {
  std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
    return std::tie(a.page, a.y0, a.x0) < std::tie(b.page, b.y0, b.x0);
  });
  std::vector<Box> out;
  for (const auto& b : boxes) {
    bool joined = false;
    for (auto& o : out)
      if (o.page == b.page && o.y0 <= b.y1 && b.y0 <= o.y1) {
        o = unite(o, b);
        joined = true;
        break;
      }
    if (!joined) out.push_back(b);
  }
  // A union can bridge two earlier lines.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < out.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < out.size() && !changed; ++j)
        if (out[i].page == out[j].page && out[i].y0 <= out[j].y1 && out[j].y0 <= out[i].y1) {
          out[i] = unite(out[i], out[j]);
          out.erase(out.begin() + static_cast<long>(j));
          changed = true;
        }
  }
  return out;
}

json box_json(const Box& b) { return json::array({b.page, b.x0, b.y0, b.x1, b.y1}); }

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: minitex-truth <source-dir> <main.tex> <out.json>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  const std::string main_file = argv[2];
  try {
    const auto doc = texscan::SourceDocument::load(dir, main_file);
    auto a = pipeline::scan(doc, "truth");
    pipeline::parse(a, doc);
    const auto targets = pipeline::build_targets(a);

    const auto typeset = minitex::typeset(dir, main_file);
    std::map<std::string, int> file_index;
    for (std::size_t k = 0; k < typeset.files.size(); ++k)
      file_index[fs::path(typeset.files[k]).lexically_normal().string()] = static_cast<int>(k);

    std::map<std::string, std::vector<Box>> truth;
    json entries = json::array();
    auto kind_of = [&](const std::string& id) -> std::string {
      if (id.rfind("sent-", 0) == 0) return "sentence";
      if (id.rfind("term-", 0) == 0) return "term";
      if (id.find(".s") != std::string::npos) return "symbol";
      return "equation";
    };
    for (const auto& t : targets) {
      auto fi = file_index.find(fs::path(t.span.file).lexically_normal().string());
      std::map<int, std::map<int, std::pair<int, int>>> rows;
      if (fi != file_index.end()) {
        for (const auto& g : typeset.glyphs) {
          if (g.origin.file != fi->second) continue;
          const auto off = static_cast<std::size_t>(g.origin.offset);
          if (off < t.span.start || off >= t.span.end) continue;
          for (int r = 0; r < g.glyph->height; ++r)
            for (int c = 0; c < g.glyph->width; ++c) {
              if (g.glyph->rows[r][c] != '1') continue;
              const int x = g.x + c, y = g.y + r;
              if (x < 0 || y < 0 || x >= minitex::kPageWidth || y >= minitex::kPageHeight) continue;
              auto [it, fresh] = rows[g.page].try_emplace(y, x, x);
              if (!fresh) {
                it->second.first = std::min(it->second.first, x);
                it->second.second = std::max(it->second.second, x);
              }
            }
        }
      }
      truth[t.id] = blobs(rows);
      json boxes = json::array();
      for (const auto& b : truth[t.id]) boxes.push_back(box_json(b));
      entries.push_back({{"id", t.id}, {"kind", kind_of(t.id)}, {"file", t.span.file},
                         {"start", t.span.start}, {"end", t.span.end}, {"boxes", boxes}});
    }

    // Composites: leaf descendants' ink grouped by line.
    std::map<std::string, const Occurrence*> occ;
    for (const auto& e : a.entities)
      for (const auto& o : e.occurrences) occ[o.id] = &o;
    for (const auto& e : a.entities) {
      if (e.kind != EntityKind::symbol) continue;
      for (const auto& o : e.occurrences) {
        if (truth.count(o.id) || o.children.empty()) continue;
        std::vector<Box> leaves;
        std::vector<std::string> stack = o.children;
        while (!stack.empty()) {
          std::string id = stack.back();
          stack.pop_back();
          if (auto it = truth.find(id); it != truth.end()) {
            leaves.insert(leaves.end(), it->second.begin(), it->second.end());
          } else if (auto c = occ.find(id); c != occ.end()) {
            stack.insert(stack.end(), c->second->children.begin(), c->second->children.end());
          }
        }
        json boxes = json::array();
        for (const auto& b : by_line(leaves)) boxes.push_back(box_json(b));
        entries.push_back({{"id", o.id}, {"kind", "composite"}, {"file", o.span.file},
                           {"start", o.span.start}, {"end", o.span.end}, {"boxes", boxes}});
      }
    }

    json out = {{"dpi", minitex::kDpi},
                {"width", minitex::kPageWidth},
                {"height", minitex::kPageHeight},
                {"pages", typeset.pages},
                {"entries", entries}};
    std::ofstream f(argv[3], std::ios::binary);
    f << dump(out);
    std::cout << "wrote " << entries.size() << " entries to " << argv[3] << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
