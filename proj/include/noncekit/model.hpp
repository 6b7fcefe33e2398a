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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noncekit/common.hpp"
#include "noncekit/mathparse.hpp"
#include "noncekit/texscan.hpp"

// Records shared by extraction, the manifest and the service.
namespace noncekit {

enum class EntityKind { symbol, term };
std::string_view to_string(EntityKind k);
EntityKind entity_kind_from(std::string_view s);

// One appearance of an entity in the paper.
struct Occurrence {
  std::string id;
  TexSpan span;
  CharSpan flat;                  // document-global offsets
  std::string sentence;           // owning sentence id, empty if none
  std::string equation;           // enclosing equation id (symbols only)
  std::optional<std::string> parent;  // enclosing composite occurrence
  std::vector<std::string> children;
  bool composed = false;          // boxes derived from children
  std::vector<BoundingBox> boxes;
  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

struct Entity {
  std::string id;
  EntityKind kind = EntityKind::symbol;
  std::string key;  // normalized symbol key or the term's surface text
  std::string tex;  // display form of the first occurrence
  std::vector<Occurrence> occurrences;
  friend bool operator==(const Entity&, const Entity&) = default;
};

enum class DefinitionKind { prose, formula, abbreviation };
std::string_view to_string(DefinitionKind k);
DefinitionKind definition_kind_from(std::string_view s);
// Lower is preferred when two definitions share a position.
int priority(DefinitionKind k);

struct DefinitionRecord {
  std::string definiendum;  // entity id
  std::string definiens;
  DefinitionKind kind = DefinitionKind::prose;
  std::string source;  // sentence or equation id
  std::size_t position = 0;
  friend bool operator==(const DefinitionRecord&, const DefinitionRecord&) = default;
};

// Orders definitions of one entity by position, then kind priority.
bool definition_order(const DefinitionRecord& a, const DefinitionRecord& b);

struct EquationRecord {
  std::string id;
  TexSpan span;   // body
  CharSpan flat;  // body, document-global
  std::string tex;
  bool display = false;
  std::string sentence;
  std::vector<std::string> symbols;  // occurrence ids, pre-order
  mathparse::MathNode tree;
  std::vector<BoundingBox> boxes;
  friend bool operator==(const EquationRecord&, const EquationRecord&) = default;
};

using SentenceRecord = texscan::SentenceRecord;

// entity id -> sentence ids in document order
using UsageIndex = std::map<std::string, std::vector<std::string>>;

// Content-derived entity ids.
std::string symbol_entity_id(std::string_view normalized_key);
std::string term_entity_id(std::string_view text);

}  // namespace noncekit
