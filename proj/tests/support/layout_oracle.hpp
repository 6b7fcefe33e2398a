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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "noncekit/diagram.hpp"

// Brute-force references for label layout.
namespace noncekit::testing {

// Least squared displacement over centers restricted to a grid of the
// given step, by dynamic programming over labels. Widths, gap and bounds
// should be grid multiples so the constraints are exact on the lattice.
// Returns an empty vector when nothing fits.
inline std::vector<double> grid_spacing(const std::vector<double>& anchors,
                                        const std::vector<double>& widths, double gap, double lo,
                                        double hi, double step = 0.001) {
  const std::size_t n = anchors.size();
  const long cells = std::lround((hi - lo) / step);
  const double inf = std::numeric_limits<double>::infinity();
  auto at = [&](long g) { return lo + static_cast<double>(g) * step; };
  std::vector<std::vector<double>> best(n, std::vector<double>(cells + 1, inf));
  std::vector<std::vector<long>> from(n, std::vector<long>(cells + 1, -1));
  for (std::size_t i = 0; i < n; ++i) {
    const long first = static_cast<long>(std::ceil(widths[i] / 2 / step - 1e-9));
    const long last = cells - first;
    const long need =
        i == 0 ? 0 : static_cast<long>(std::ceil(((widths[i - 1] + widths[i]) / 2 + gap) / step - 1e-9));
    double run = inf;
    long run_at = -1;
    long scanned = -1;
    for (long g = first; g <= last; ++g) {
      double prior = 0;
      if (i > 0) {
        while (scanned < g - need) {
          ++scanned;
          if (best[i - 1][scanned] < run) {
            run = best[i - 1][scanned];
            run_at = scanned;
          }
        }
        prior = run;
        if (prior == inf) continue;
      }
      const double d = at(g) - anchors[i];
      best[i][g] = prior + d * d;
      from[i][g] = run_at;
    }
  }
  long g = -1;
  double total = inf;
  for (long k = 0; k <= cells; ++k)
    if (best[n - 1][k] < total) total = best[n - 1][k], g = k;
  if (g < 0) return {};
  std::vector<double> out(n);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = at(g);
    g = from[i][g];
  }
  return out;
}

inline double squared_displacement(const std::vector<double>& anchors,
                                   const std::vector<double>& centers) {
  double s = 0;
  for (std::size_t i = 0; i < anchors.size(); ++i) s += (centers[i] - anchors[i]) * (centers[i] - anchors[i]);
  return s;
}

// Least total cost over every side assignment with balanced counts.
inline double best_side_cost(const std::vector<double>& top, const std::vector<double>& bottom) {
  const std::size_t n = top.size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const long tops = __builtin_popcount(mask);
    if (std::abs(2 * tops - static_cast<long>(n)) > 1) continue;
    double c = 0;
    for (std::size_t k = 0; k < n; ++k) c += (mask >> k & 1u) ? top[k] : bottom[k];
    best = std::min(best, c);
  }
  return best;
}

struct LabelSet {
  std::vector<double> anchors;  // sorted
  std::vector<double> widths;
  std::vector<double> top_cost;
  std::vector<double> bottom_cost;
};

// Anchors anywhere on the line; widths even multiples of 0.001 so half
// widths stay on the grid.
inline LabelSet random_label_set(std::mt19937& rng, std::size_t max_labels = 8) {
  std::uniform_int_distribution<std::size_t> count(1, max_labels);
  std::uniform_real_distribution<double> x(0.1, 0.9), cost(0.0, 0.05);
  std::uniform_int_distribution<int> width(10, 70);
  LabelSet s;
  const std::size_t n = count(rng);
  // Clustered anchors force overlaps.
  const double center = x(rng);
  std::normal_distribution<double> spread(center, 0.08);
  for (std::size_t k = 0; k < n; ++k) {
    s.anchors.push_back(std::clamp(spread(rng), 0.05, 0.95));
    s.widths.push_back(width(rng) * 0.002);
    s.top_cost.push_back(cost(rng));
    s.bottom_cost.push_back(cost(rng));
  }
  std::sort(s.anchors.begin(), s.anchors.end());
  return s;
}

}  // namespace noncekit::testing
