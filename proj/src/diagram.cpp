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

#include "noncekit/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace noncekit::diagram {

std::string_view to_string(Side s) { return s == Side::top ? "top" : "bottom"; }

std::vector<double> space_labels(const std::vector<double>& anchors,
                                 const std::vector<double>& widths, double gap, double lo,
                                 double hi) {
  const std::size_t n = anchors.size();
  if (widths.size() != n) throw Error("space_labels: anchors and widths differ in length");
  if (n == 0) return {};
  // Shift each center by the room its predecessors need; the problem becomes
  // isotonic regression with a common lower and upper bound.
  std::vector<double> offset(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) offset[i] = offset[i - 1] + (widths[i - 1] + widths[i]) / 2 + gap;
  const double min_y = lo + widths[0] / 2;
  const double max_y = hi - widths[n - 1] / 2 - offset[n - 1];
  if (min_y > max_y + 1e-12) throw OverflowError("labels do not fit in one row");

  // Pool adjacent violators.
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < n; ++i) {
    blocks.push_back({anchors[i] - offset[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      Block b = blocks.back();
      blocks.pop_back();
      blocks.back().sum += b.sum;
      blocks.back().count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(n);
  for (const auto& b : blocks) {
    double y = std::clamp(b.mean(), min_y, std::max(min_y, max_y));
    for (std::size_t k = 0; k < b.count; ++k) out.push_back(y + offset[out.size()]);
  }
  return out;
}

std::vector<Side> assign_sides(const std::vector<double>& top_cost,
                               const std::vector<double>& bottom_cost) {
  const std::size_t n = top_cost.size();
  // Labels sorted by how much they prefer the top; the best split for a
  // given top count takes a prefix.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return top_cost[a] - bottom_cost[a] < top_cost[b] - bottom_cost[b];
  });
  auto cost = [&](std::size_t tops) {
    double c = 0;
    for (std::size_t k = 0; k < n; ++k) c += k < tops ? top_cost[idx[k]] : bottom_cost[idx[k]];
    return c;
  };
  std::size_t tops = (n + 1) / 2;
  if (n % 2 == 1 && cost(n / 2) < cost(tops) - 1e-12) tops = n / 2;
  std::vector<Side> out(n, Side::bottom);
  for (std::size_t k = 0; k < tops; ++k) out[idx[k]] = Side::top;
  return out;
}

std::string truncate_label(const std::string& text, std::size_t max_chars) {
  std::vector<std::size_t> starts;  // byte offset of each code point
  for (std::size_t i = 0; i < text.size(); ++i)
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) starts.push_back(i);
  if (starts.size() <= max_chars || max_chars == 0) return text;
  std::string out = text.substr(0, starts[max_chars - 1]);
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out + "\xE2\x80\xA6";
}

namespace {

std::size_t code_points(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  return n;
}

// Definition used for a label: the position-sensitive choice, except that an
// equation never labels a symbol with itself.
std::optional<DefinitionRecord> label_definition(const manifest::PaperManifest& m,
                                                 const EquationRecord& eq, const std::string& entity) {
  auto view = manifest::select_definition(m, entity, eq.flat.start);
  if (view.record && view.record->source != eq.id) return view.record;
  const DefinitionRecord* best = nullptr;
  for (const auto& d : m.definitions_of(entity)) {
    if (d.source == eq.id) continue;
    if (d.position < eq.flat.start || !best) best = &d;
    if (d.position >= eq.flat.start) break;
  }
  if (!best) return std::nullopt;
  return *best;
}

struct Pending {
  LabelPlacement label;
  double width = 0;
  double symbol_y = 0;
};

}  // namespace

DiagramPlan plan_diagram(const manifest::PaperManifest& m, std::string_view equation,
                         const DiagramConfig& config) {
  const EquationRecord* eq = m.equation(equation);
  if (!eq) throw UnknownEquation("unknown equation " + std::string(equation));
  if (eq->boxes.empty()) throw UnlocalizedEquation("equation " + eq->id + " has no boxes");
  DiagramPlan plan;
  plan.equation = eq->id;
  plan.page = eq->boxes.front().page;
  BoundingBox frame = eq->boxes.front();
  for (const auto& b : eq->boxes)
    if (b.page == plan.page) frame = merge(frame, b);

  std::vector<Pending> pending;
  std::set<std::string> labeled;
  for (const auto& occ_id : eq->symbols) {
    const Occurrence* occ = m.occurrence(occ_id);
    const Entity* owner = m.owner(occ_id);
    if (!occ || !owner || labeled.count(owner->id)) continue;
    auto box = std::find_if(occ->boxes.begin(), occ->boxes.end(),
                            [&](const BoundingBox& b) { return b.page == plan.page; });
    if (box == occ->boxes.end()) continue;
    auto def = label_definition(m, *eq, owner->id);
    if (!def) continue;
    labeled.insert(owner->id);
    Pending p;
    p.label.symbol = occ->id;
    p.label.entity = owner->id;
    p.label.anchor_x = box->left + box->width / 2;
    p.label.full_text = def->definiens;
    p.label.text = truncate_label(def->definiens, config.max_chars);
    p.label.source = def->source;
    p.width = static_cast<double>(code_points(p.label.text)) * config.char_width + config.padding;
    p.symbol_y = box->top + box->height / 2;
    pending.push_back(std::move(p));
  }

  std::vector<double> top_cost, bottom_cost;
  for (const auto& p : pending) {
    top_cost.push_back(std::abs(p.symbol_y - frame.top));
    bottom_cost.push_back(std::abs(frame.bottom() - p.symbol_y));
  }
  const auto sides = assign_sides(top_cost, bottom_cost);

  for (Side side : {Side::top, Side::bottom}) {
    std::vector<Pending*> group;
    for (std::size_t k = 0; k < pending.size(); ++k)
      if (sides[k] == side) group.push_back(&pending[k]);
    std::stable_sort(group.begin(), group.end(), [](const Pending* a, const Pending* b) {
      return std::tie(a->label.anchor_x, a->label.symbol) < std::tie(b->label.anchor_x, b->label.symbol);
    });
    // Interleave labels over as few rows as fit.
    for (std::size_t rows = 1; !group.empty(); ++rows) {
      std::vector<std::vector<double>> centers(rows);
      bool fits = true;
      for (std::size_t r = 0; r < rows && fits; ++r) {
        std::vector<double> anchors, widths;
        for (std::size_t k = r; k < group.size(); k += rows) {
          anchors.push_back(group[k]->label.anchor_x);
          widths.push_back(group[k]->width);
        }
        try {
          centers[r] = space_labels(anchors, widths, config.gap, config.left, config.right);
        } catch (const OverflowError&) {
          fits = false;
        }
      }
      if (!fits && rows < group.size()) continue;
      if (!fits) throw OverflowError("a single label is wider than the page");
      for (std::size_t k = 0; k < group.size(); ++k) {
        auto& l = group[k]->label;
        const std::size_t r = k % rows;
        const double cx = centers[r][k / rows];
        const double h = config.label_height;
        l.side = side;
        l.row = static_cast<int>(r);
        l.box.page = plan.page;
        l.box.width = group[k]->width;
        l.box.height = h;
        l.box.left = cx - l.box.width / 2;
        const double step = static_cast<double>(r) * (h + config.row_gap);
        l.box.top = side == Side::top ? frame.top - config.margin - h - step
                                      : frame.bottom() + config.margin + step;
      }
      break;
    }
  }

  for (auto& p : pending) {
    const auto& l = p.label;
    LeaderLine line;
    line.symbol = l.symbol;
    line.from_x = l.box.left + l.box.width / 2;
    line.from_y = l.side == Side::top ? l.box.bottom() : l.box.top;
    line.to_x = l.anchor_x;
    line.to_y = p.symbol_y;
    plan.leaders.push_back(line);
    plan.labels.push_back(std::move(p.label));
  }
  return plan;
}

json to_json(const DiagramPlan& plan) {
  json labels = json::array();
  for (const auto& l : plan.labels)
    labels.push_back({{"symbol", l.symbol},
                      {"entity", l.entity},
                      {"side", to_string(l.side)},
                      {"row", l.row},
                      {"anchor_x", l.anchor_x},
                      {"text", l.text},
                      {"full_text", l.full_text},
                      {"source", l.source},
                      {"box", l.box}});
  json leaders = json::array();
  for (const auto& d : plan.leaders)
    leaders.push_back({{"symbol", d.symbol},
                       {"from", {d.from_x, d.from_y}},
                       {"to", {d.to_x, d.to_y}}});
  return {{"equation", plan.equation}, {"page", plan.page}, {"labels", labels}, {"leaders", leaders}};
}

}  // namespace noncekit::diagram
