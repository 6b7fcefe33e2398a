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

#include <optional>
#include <string>

#include "noncekit/manifest.hpp"

namespace noncekit::testing {

// Brute-force definition selection: scan every definition and keep the best
// candidate.
struct ExpectedView {
  manifest::ViewStatus status;
  std::optional<DefinitionRecord> record;
  bool forward = false;
};

inline CharSpan source_extent(const manifest::PaperManifest& m, const std::string& source) {
  if (const auto* s = m.sentence(source)) return s->flat;
  return m.equation(source)->flat;
}

inline ExpectedView brute_select(const manifest::PaperManifest& m, const std::string& entity,
                                 std::size_t position) {
  using manifest::ViewStatus;
  const auto& defs = m.definitions_of(entity);
  for (const auto& d : defs)
    if (source_extent(m, d.source).contains(position)) return {ViewStatus::defined_here, d, false};
  std::optional<DefinitionRecord> best;
  for (const auto& d : defs)
    if (d.position < position &&
        (!best || d.position > best->position ||
         (d.position == best->position && priority(d.kind) < priority(best->kind))))
      best = d;
  if (best) return {ViewStatus::definition, best, false};
  for (const auto& d : defs)
    if (!best || d.position < best->position ||
        (d.position == best->position && priority(d.kind) < priority(best->kind)))
      best = d;
  if (best) return {ViewStatus::definition, best, true};
  return {ViewStatus::none, std::nullopt, false};
}

}  // namespace noncekit::testing
