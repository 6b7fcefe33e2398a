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

#include "noncekit/locate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "noncekit/kernels.hpp"

namespace noncekit::locate {

// --- batching --------------------------------------------------------------------

namespace {

// Disjoint half-open intervals per file.
class IntervalSet {
 public:
  bool overlaps(const TexSpan& s) const {
    auto f = files_.find(s.file);
    if (f == files_.end()) return false;
    const auto& m = f->second;
    auto it = m.upper_bound(s.start);
    if (it != m.end() && it->first < s.end) return true;
    if (it != m.begin()) {
      --it;
      if (it->second > s.start) return true;
    }
    return false;
  }
  // Spans with equal starts only arise for overlapping targets, which are
  // rejected before insertion.
  void insert(const TexSpan& s) { files_[s.file][s.start] = s.end; }

 private:
  std::map<std::string, std::map<std::size_t, std::size_t>> files_;
};

}  // namespace

std::vector<ColorBatch> plan_color_batches(const std::vector<Target>& targets, int capacity) {
  if (capacity < 1) throw CapacityError("color capacity must be at least 1");
  std::set<std::string> ids;
  for (const auto& t : targets)
    if (!ids.insert(t.id).second) throw CapacityError("duplicate target id " + t.id);

  struct Open {
    std::vector<std::size_t> members;
    IntervalSet spans;
  };
  auto first_fit = [&](const std::vector<std::size_t>& order) {
    std::vector<Open> open;
    for (std::size_t idx : order) {
      const Target& t = targets[idx];
      Open* slot = nullptr;
      for (auto& b : open) {
        if (static_cast<int>(b.members.size()) < capacity && !b.spans.overlaps(t.span)) {
          slot = &b;
          break;
        }
      }
      if (!slot) slot = &open.emplace_back();
      slot->members.push_back(idx);
      slot->spans.insert(t.span);
    }
    return open;
  };

  // A few first-fit orders; the smallest plan wins. Overlap-constrained
  // bounded coloring has no cheap exact solution, so this is a heuristic.
  auto len = [&](std::size_t i) { return targets[i].span.end - targets[i].span.start; };
  std::vector<std::size_t> base(targets.size());
  for (std::size_t i = 0; i < base.size(); ++i) base[i] = i;
  std::vector<std::vector<std::size_t>> orders;
  orders.push_back(base);
  std::stable_sort(orders.back().begin(), orders.back().end(),
                   [&](std::size_t a, std::size_t b) { return len(a) > len(b); });
  orders.push_back(base);
  std::stable_sort(orders.back().begin(), orders.back().end(), [&](std::size_t a, std::size_t b) {
    const auto& x = targets[a].span;
    const auto& y = targets[b].span;
    if (x.file != y.file) return x.file < y.file;
    if (x.start != y.start) return x.start < y.start;
    return x.end > y.end;
  });
  orders.push_back(base);
  std::stable_sort(orders.back().begin(), orders.back().end(), [&](std::size_t a, std::size_t b) {
    const auto& x = targets[a].span;
    const auto& y = targets[b].span;
    if (x.file != y.file) return x.file < y.file;
    return x.end < y.end;
  });
  std::vector<Open> open;
  for (const auto& order : orders) {
    auto plan = first_fit(order);
    if (open.empty() || plan.size() < open.size()) open = std::move(plan);
  }

  std::vector<ColorBatch> out;
  for (auto& b : open) {
    std::sort(b.members.begin(), b.members.end(), [&](std::size_t x, std::size_t y) {
      if (targets[x].span != targets[y].span) return targets[x].span < targets[y].span;
      return targets[x].id < targets[y].id;
    });
    ColorBatch batch;
    batch.index = static_cast<int>(out.size());
    int color = 0;
    for (std::size_t m : b.members)
      batch.assignments.push_back({targets[m].id, targets[m].span, color++});
    out.push_back(std::move(batch));
  }
  return out;
}

std::vector<std::uint32_t> make_palette(int capacity) {
  if (capacity < 1) throw CapacityError("color capacity must be at least 1");
  std::vector<std::uint32_t> out;
  for (int i = 0; i < capacity; ++i) {
    double h = 6.0 * i / capacity;
    int sector = static_cast<int>(std::floor(h)) % 6;
    double f = h - std::floor(h);
    auto c = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * v)); };
    std::uint8_t hi = 255, lo = 0, up = c(f), down = c(1 - f);
    std::uint8_t r = 0, g = 0, b = 0;
    switch (sector) {
      case 0: r = hi, g = up, b = lo; break;
      case 1: r = down, g = hi, b = lo; break;
      case 2: r = lo, g = hi, b = up; break;
      case 3: r = lo, g = down, b = hi; break;
      case 4: r = up, g = lo, b = hi; break;
      default: r = hi, g = lo, b = down; break;
    }
    out.push_back(kernels::pack_rgb(r, g, b));
  }
  return out;
}

// --- instrumentation --------------------------------------------------------------

void check_splice(std::string_view text, CharSpan span) {
  if (span.empty() || span.end > text.size()) throw SpliceError("span out of range");
  int depth = 0;
  int left_right = 0;
  std::vector<std::string> envs;
  for (std::size_t i = span.start; i < span.end; ++i) {
    char c = text[i];
    if (c == '%') {
      while (i < span.end && text[i] != '\n') ++i;
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}' && --depth < 0) throw SpliceError("span closes a group it did not open");
    if (c == '&' && depth == 0 && envs.empty())
      throw SpliceError("span contains an alignment tab");
    if (c != '\\') continue;
    if (i + 1 >= span.end) throw SpliceError("span ends inside a command");
    if (text[i + 1] == '\\' && depth == 0 && envs.empty())
      throw SpliceError("span contains a row break");
    std::size_t j = i + 1;
    while (j < span.end && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view name = text.substr(i + 1, j - i - 1);
    if (name.empty()) {
      ++i;
      continue;
    }
    if (name == "left") ++left_right;
    if (name == "right" && --left_right < 0) throw SpliceError("unmatched \\right in span");
    if (name == "begin" || name == "end") {
      std::size_t close = text.find('}', j);
      if (j >= span.end || text[j] != '{' || close == std::string_view::npos || close >= span.end)
        throw SpliceError("environment marker cut by span");
      std::string env(text.substr(j + 1, close - j - 1));
      if (name == "begin") {
        envs.push_back(env);
      } else {
        if (envs.empty() || envs.back() != env) throw SpliceError("span closes environment " + env);
        envs.pop_back();
      }
      i = close;
      continue;
    }
    i = j - 1;
  }
  if (depth != 0) throw SpliceError("span leaves a group open");
  if (!envs.empty()) throw SpliceError("span leaves environment " + envs.back() + " open");
  if (left_right != 0) throw SpliceError("span leaves \\left open");
}

std::map<std::string, std::string> instrument_tex(
    const std::map<std::string, std::string>& files, const std::string& main_file,
    const ColorBatch& batch, const std::vector<std::uint32_t>& palette) {
  std::map<std::string, std::vector<const Assignment*>> by_file;
  for (const auto& a : batch.assignments) {
    if (a.color < 0 || a.color >= static_cast<int>(palette.size()))
      throw CapacityError("color index outside palette");
    by_file[a.span.file].push_back(&a);
  }
  std::map<std::string, std::string> out;
  if (batch.assignments.empty()) return out;
  for (auto& [file, list] : by_file) {
    auto it = files.find(file);
    if (it == files.end()) throw SpliceError("unknown file " + file);
    std::string text = it->second;
    std::sort(list.begin(), list.end(),
              [](const Assignment* a, const Assignment* b) { return a->span.start > b->span.start; });
    for (const Assignment* a : list) {
      check_splice(it->second, a->span.chars());
      std::uint32_t rgb = palette[a->color];
      std::string open = "{\\color[RGB]{" + std::to_string(rgb & 0xFF) + "," +
                         std::to_string((rgb >> 8) & 0xFF) + "," +
                         std::to_string((rgb >> 16) & 0xFF) + "}";
      text.insert(a->span.end, "}");
      text.insert(a->span.start, open);
    }
    out[file] = std::move(text);
  }
  auto main_it = out.find(main_file);
  std::string main = main_it != out.end() ? main_it->second : files.at(main_file);
  if (main.find("{xcolor}") == std::string::npos && main.find("{color}") == std::string::npos) {
    auto pos = main.find("\\begin{document}");
    if (pos != std::string::npos) {
      main.insert(pos, "\\usepackage{xcolor}\n");
      out[main_file] = std::move(main);
    }
  }
  return out;
}

// --- blobs -----------------------------------------------------------------------

std::vector<PixelBox> blobs_from_runs(const std::vector<RowRun>& runs) {
  std::vector<PixelBox> boxes;
  const RowRun* prev = nullptr;
  for (const RowRun& r : runs) {
    bool joins = prev && prev->y + 1 == r.y && prev->x0 <= r.x1 && r.x0 <= prev->x1;
    if (joins) {
      PixelBox& b = boxes.back();
      b.x0 = std::min(b.x0, r.x0);
      b.x1 = std::max(b.x1, r.x1);
      b.y1 = r.y;
    } else {
      boxes.push_back({r.x0, r.y, r.x1, r.y});
    }
    prev = &r;
  }
  // Merge overlapping boxes until stable.
  bool changed = true;
  while (changed) {
    changed = false;
    std::sort(boxes.begin(), boxes.end(),
              [](const PixelBox& a, const PixelBox& b) { return a.y0 < b.y0; });
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      for (std::size_t j = i + 1; j < boxes.size() && boxes[j].y0 <= boxes[i].y1; ++j) {
        PixelBox& a = boxes[i];
        const PixelBox& b = boxes[j];
        if (a.x0 <= b.x1 && b.x0 <= a.x1) {
          a = {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1),
               std::max(a.y1, b.y1)};
          boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
          j = i;  // rescan with the grown box
        }
      }
    }
  }
  std::sort(boxes.begin(), boxes.end());
  return boxes;
}

std::vector<PixelBox> detect_blobs(const std::vector<std::uint8_t>& mask, int width, int height) {
  std::vector<RowRun> runs;
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* row = mask.data() + static_cast<std::size_t>(y) * width;
    int first = -1, last = -1;
    for (int x = 0; x < width; ++x) {
      if (!row[x]) continue;
      if (first < 0) first = x;
      last = x;
    }
    if (first >= 0) runs.push_back({y, first, last});
  }
  return blobs_from_runs(runs);
}

BoundingBox to_fraction(const PixelBox& b, int page, int width, int height) {
  BoundingBox out;
  out.page = page;
  out.left = static_cast<double>(b.x0) / width;
  out.top = static_cast<double>(b.y0) / height;
  out.width = static_cast<double>(b.x1 - b.x0 + 1) / width;
  out.height = static_cast<double>(b.y1 - b.y0 + 1) / height;
  return out;
}

// --- diffing ---------------------------------------------------------------------

BatchResult locate_batch(const std::vector<RasterPage>& original,
                         const std::vector<RasterPage>& colored, const ColorBatch& batch,
                         const std::vector<std::uint32_t>& palette, int tolerance) {
  if (original.size() != colored.size())
    throw PageMismatchError("page count changed from " + std::to_string(original.size()) +
                            " to " + std::to_string(colored.size()));
  BatchResult result;
  int used = 0;
  std::map<int, const Assignment*> by_color;
  for (const auto& a : batch.assignments) {
    result.boxes[a.id];
    by_color[a.color] = &a;
    used = std::max(used, a.color + 1);
  }
  if (used == 0) return result;
  if (used > static_cast<int>(palette.size())) throw CapacityError("color index outside palette");

  const kernels::LabelFn label = kernels::label_pixels();
  std::vector<std::int16_t> labels;
  std::vector<std::vector<RowRun>> runs(used);
  std::vector<int> first(used, -1), last(used, -1);
  std::vector<int> touched;
  for (std::size_t p = 0; p < original.size(); ++p) {
    const RasterPage& a = original[p];
    const RasterPage& b = colored[p];
    if (a.width != b.width || a.height != b.height)
      throw PageMismatchError("page " + std::to_string(p) + " changed size");
    labels.resize(a.pixels.size());
    result.unmatched_pixels += label(a.pixels.data(), b.pixels.data(), a.pixels.size(),
                                     palette.data(), used, tolerance, labels.data());
    for (auto& r : runs) r.clear();
    for (int y = 0; y < a.height; ++y) {
      const std::int16_t* row = labels.data() + static_cast<std::size_t>(y) * a.width;
      for (int x = 0; x < a.width; ++x) {
        int c = row[x];
        if (c < 0) continue;
        if (first[c] < 0) {
          first[c] = x;
          touched.push_back(c);
        }
        last[c] = x;
      }
      for (int c : touched) {
        runs[c].push_back({y, first[c], last[c]});
        first[c] = -1;
      }
      touched.clear();
    }
    for (const auto& [c, assignment] : by_color) {
      auto& out = result.boxes[assignment->id];
      for (const PixelBox& box : blobs_from_runs(runs[c]))
        out.push_back(to_fraction(box, static_cast<int>(p), a.width, a.height));
    }
  }
  return result;
}

// --- composition -----------------------------------------------------------------

std::vector<BoundingBox> union_by_line(std::vector<BoundingBox> boxes) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < boxes.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        const BoundingBox& a = boxes[i];
        const BoundingBox& b = boxes[j];
        // Boxes that only touch stay apart; the slack absorbs rounding.
        constexpr double eps = 1e-9;
        if (a.page == b.page && a.top < b.bottom() - eps && b.top < a.bottom() - eps) {
          boxes[i] = merge(a, b);
          boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
          break;
        }
      }
    }
  }
  std::sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
    if (a.page != b.page) return a.page < b.page;
    if (a.top != b.top) return a.top < b.top;
    return a.left < b.left;
  });
  return boxes;
}

std::vector<BoundingBox> compose_bounding_boxes(
    const mathparse::SymbolRecord& symbol,
    const std::map<std::string, const mathparse::SymbolRecord*>& symbols,
    const std::map<std::string, std::vector<BoundingBox>>& located) {
  using mathparse::SymbolKind;
  std::vector<BoundingBox> parts;
  auto gather = [&](const mathparse::SymbolRecord& s, auto& self) -> void {
    if (s.kind == SymbolKind::simple || s.kind == SymbolKind::accent) {
      auto it = located.find(s.id);
      if (it == located.end() || it->second.empty())
        throw MissingChildError("no boxes for " + s.id + " (" + s.tex + ")");
      parts.insert(parts.end(), it->second.begin(), it->second.end());
      return;
    }
    if (s.children.empty()) throw MissingChildError("composite " + s.id + " has no children");
    for (const auto& cid : s.children) {
      auto it = symbols.find(cid);
      if (it == symbols.end()) throw MissingChildError("unknown child " + cid);
      self(*it->second, self);
    }
  };
  gather(symbol, gather);
  return union_by_line(std::move(parts));
}

// --- pipeline --------------------------------------------------------------------

namespace {

struct JobOutcome {
  BatchResult result;
  std::vector<std::string> failed;
  std::vector<std::string> warnings;
  int compiles = 0;
};

ColorBatch subset(const ColorBatch& b, std::size_t from, std::size_t to) {
  ColorBatch out;
  out.index = b.index;
  out.assignments.assign(b.assignments.begin() + static_cast<std::ptrdiff_t>(from),
                         b.assignments.begin() + static_cast<std::ptrdiff_t>(to));
  return out;
}

void run_batch(const LocateConfig& config, const std::filesystem::path& dir,
               const std::string& main_file, const std::map<std::string, std::string>& files,
               const std::vector<RasterPage>& original, const std::vector<std::uint32_t>& palette,
               const ColorBatch& batch, bool may_split, JobOutcome& out) {
  const std::string tag = "batch " + std::to_string(batch.index);
  try {
    auto instrumented = instrument_tex(files, main_file, batch, palette);
    ++out.compiles;
    auto pages = render_document(config.render, dir, main_file, instrumented);
    BatchResult r = locate_batch(original, pages, batch, palette, config.tolerance);
    out.result.unmatched_pixels += r.unmatched_pixels;
    for (auto& [id, boxes] : r.boxes) out.result.boxes[id] = std::move(boxes);
  } catch (const PageMismatchError& e) {
    out.warnings.push_back(tag + ": " + e.what());
    for (const auto& a : batch.assignments) out.failed.push_back(a.id);
  } catch (const Error& e) {
    if (may_split && batch.assignments.size() > 1) {
      out.warnings.push_back(tag + " failed, retrying in halves: " + e.what());
      std::size_t half = batch.assignments.size() / 2;
      run_batch(config, dir, main_file, files, original, palette, subset(batch, 0, half), false,
                out);
      run_batch(config, dir, main_file, files, original, palette,
                subset(batch, half, batch.assignments.size()), false, out);
      return;
    }
    out.warnings.push_back(tag + ": " + e.what());
    for (const auto& a : batch.assignments) out.failed.push_back(a.id);
  }
}

}  // namespace

LocateReport locate_targets(const LocateConfig& config, const std::filesystem::path& source_dir,
                            const std::string& main_file,
                            const std::map<std::string, std::string>& files,
                            const std::vector<Target>& targets) {
  LocateReport report;
  std::vector<Target> valid;
  for (const auto& t : targets) {
    auto it = files.find(t.span.file);
    try {
      if (it == files.end()) throw SpliceError("unknown file");
      check_splice(it->second, t.span.chars());
      valid.push_back(t);
    } catch (const SpliceError& e) {
      report.misses.push_back(t.id);
      report.warnings.push_back(t.id + ": " + e.what());
    }
  }
  const auto palette = make_palette(config.capacity);
  const auto batches = plan_color_batches(valid, config.capacity);
  report.batches = static_cast<int>(batches.size());

  const auto original = render_document(config.render, source_dir, main_file);
  report.compiles = 1;

  std::vector<JobOutcome> outcomes(batches.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < batches.size();)
      run_batch(config, source_dir, main_file, files, original, palette, batches[k], true,
                outcomes[k]);
  };
  int n = std::max(1, std::min<int>(config.workers, static_cast<int>(batches.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::set<std::string> failed;
  for (auto& o : outcomes) {
    report.compiles += o.compiles;
    report.unmatched_pixels += o.result.unmatched_pixels;
    for (auto& [id, boxes] : o.result.boxes) report.boxes[id] = std::move(boxes);
    failed.insert(o.failed.begin(), o.failed.end());
    report.warnings.insert(report.warnings.end(), o.warnings.begin(), o.warnings.end());
  }
  for (const auto& t : valid) {
    auto it = report.boxes.find(t.id);
    if (failed.count(t.id) || it == report.boxes.end() || it->second.empty()) {
      report.boxes.erase(t.id);
      report.misses.push_back(t.id);
    }
  }
  std::sort(report.misses.begin(), report.misses.end());
  return report;
}

}  // namespace noncekit::locate
