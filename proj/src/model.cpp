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

#include "noncekit/model.hpp"

namespace noncekit {

std::string_view to_string(EntityKind k) { return k == EntityKind::symbol ? "symbol" : "term"; }

EntityKind entity_kind_from(std::string_view s) {
  if (s == "symbol") return EntityKind::symbol;
  if (s == "term") return EntityKind::term;
  throw Error("unknown entity kind " + std::string(s));
}

std::string_view to_string(DefinitionKind k) {
  switch (k) {
    case DefinitionKind::prose: return "prose";
    case DefinitionKind::formula: return "formula";
    case DefinitionKind::abbreviation: return "abbreviation";
  }
  return "prose";
}

DefinitionKind definition_kind_from(std::string_view s) {
  if (s == "prose") return DefinitionKind::prose;
  if (s == "formula") return DefinitionKind::formula;
  if (s == "abbreviation") return DefinitionKind::abbreviation;
  throw Error("unknown definition kind " + std::string(s));
}

int priority(DefinitionKind k) {
  switch (k) {
    case DefinitionKind::prose: return 0;
    case DefinitionKind::formula: return 1;
    case DefinitionKind::abbreviation: return 2;
  }
  return 3;
}

bool definition_order(const DefinitionRecord& a, const DefinitionRecord& b) {
  if (a.position != b.position) return a.position < b.position;
  if (a.kind != b.kind) return priority(a.kind) < priority(b.kind);
  return a.source < b.source;
}

std::string symbol_entity_id(std::string_view key) {
  return "s" + hex64(fnv1a(key)).substr(0, 12);
}

std::string term_entity_id(std::string_view text) { return "t" + hex64(fnv1a(text)).substr(0, 12); }

}  // namespace noncekit
