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

#include <string>
#include <vector>

#include "noncekit/manifest.hpp"

namespace noncekit::diagram {

class OverflowError : public Error {
 public:
  using Error::Error;
};

class UnlocalizedEquation : public Error {
 public:
  using Error::Error;
};

class UnknownEquation : public Error {
 public:
  using Error::Error;
};

enum class Side { top, bottom };
std::string_view to_string(Side s);

struct LabelPlacement {
  std::string symbol;  // occurrence id
  std::string entity;
  Side side = Side::top;
  int row = 0;          // 0 is nearest the equation
  double anchor_x = 0;  // symbol center, page fraction
  std::string text;     // possibly truncated
  std::string full_text;
  std::string source;  // definition source id
  BoundingBox box;
};

// Straight segment from the label edge facing the equation to the symbol center.
struct LeaderLine {
  std::string symbol;
  double from_x = 0, from_y = 0;
  double to_x = 0, to_y = 0;
};

struct DiagramPlan {
  std::string equation;
  int page = -1;
  std::vector<LabelPlacement> labels;
  std::vector<LeaderLine> leaders;
};

struct DiagramConfig {
  double char_width = 0.0065;  // page widths per character
  double padding = 0.006;      // added to every label width
  double label_height = 0.014;
  double margin = 0.01;  // between the equation box and the first row
  double row_gap = 0.004;
  double gap = 0.004;  // minimum horizontal gap between labels
  double left = 0.02;
  double right = 0.98;
  std::size_t max_chars = 32;
};

// Centers for labels sorted by anchor: order preserving, at least gap apart,
// inside [lo, hi], with the least total squared displacement from anchors.
// Throws OverflowError if the labels cannot fit.
std::vector<double> space_labels(const std::vector<double>& anchors,
                                 const std::vector<double>& widths, double gap, double lo,
                                 double hi);

// Sides for labels given each label's distance to the top and bottom rows.
// Side counts differ by at most one; within that, total distance is least.
std::vector<Side> assign_sides(const std::vector<double>& top_cost,
                               const std::vector<double>& bottom_cost);

// Truncates to max_chars code points, ending with an ellipsis when cut.
std::string truncate_label(const std::string& text, std::size_t max_chars);

// Labels every distinct symbol of the equation that has a definition at the
// equation's position.
DiagramPlan plan_diagram(const manifest::PaperManifest& m, std::string_view equation,
                         const DiagramConfig& config = {});

json to_json(const DiagramPlan& plan);

}  // namespace noncekit::diagram
