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

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "noncekit/model.hpp"
#include "noncekit/serialize.hpp"

namespace noncekit::manifest {

constexpr int kSchemaVersion = 1;

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class UnknownEntity : public Error {
 public:
  using Error::Error;
};

struct PaperManifest {
  int version = kSchemaVersion;
  std::string paper;
  std::vector<Entity> entities;
  std::vector<SentenceRecord> sentences;
  std::vector<EquationRecord> equations;
  std::map<std::string, std::vector<DefinitionRecord>> definitions;  // by entity id
  UsageIndex usages;
  json extra = json::object();  // top-level fields this version does not know

  // Rebuilds the id lookups; call after mutating the records.
  void reindex();

  const Entity* entity(std::string_view id) const;
  const SentenceRecord* sentence(std::string_view id) const;
  const EquationRecord* equation(std::string_view id) const;
  const Occurrence* occurrence(std::string_view id) const;
  // Entity an occurrence belongs to.
  const Entity* owner(std::string_view occurrence_id) const;
  const std::vector<DefinitionRecord>& definitions_of(std::string_view entity) const;
  const std::vector<std::string>& usages_of(std::string_view entity) const;
  // Sentence index in document order, or npos.
  std::size_t sentence_index(std::string_view id) const;

  friend bool operator==(const PaperManifest& a, const PaperManifest& b);

 private:
  std::map<std::string, std::size_t, std::less<>> entity_at_, sentence_at_, equation_at_;
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> occurrence_at_;
};

// Every broken reference or invariant, one message each. Empty when valid.
std::vector<std::string> validate(const PaperManifest& m);

// Groups definitions per entity in document order and validates.
// Throws ValidationError listing every problem.
PaperManifest build_manifest(std::string paper, std::vector<Entity> entities,
                             std::vector<SentenceRecord> sentences,
                             std::vector<EquationRecord> equations,
                             std::vector<DefinitionRecord> definitions, UsageIndex usages);

bool localized(const Entity& e);
// Some occurrence needs more than one box (line or page break).
bool multi_box(const Entity& e);

// Human-readable counts: entities by kind, localized percentage with one
// decimal, definitions by kind.
std::string count_report(const PaperManifest& m);

// --- position-sensitive definitions ------------------------------------------------

enum class ViewStatus { definition, defined_here, none };
std::string_view to_string(ViewStatus s);

struct ContextLink {
  std::string source;    // sentence or equation id
  std::string sentence;  // sentence to highlight
  int page = -1;         // page index of the source, -1 if unlocalized
};

struct DefinitionView {
  ViewStatus status = ViewStatus::none;
  // The selected definition; for defined_here, the one made at this spot.
  std::optional<DefinitionRecord> record;
  bool forward = false;  // record comes after the query position
  std::optional<ContextLink> link;
  std::size_t definitions = 0;  // prose and abbreviation definitions
  std::size_t formulae = 0;
  std::size_t usages = 0;
};

// The definition most recently before position. Inside a defining source
// the answer is defined_here. With nothing earlier, the earliest later
// definition is returned marked forward.
DefinitionView select_definition(const PaperManifest& m, std::string_view entity,
                                 std::size_t position);

ContextLink context_link(const PaperManifest& m, const DefinitionRecord& d);

// --- reading aids ------------------------------------------------------------------

// (entity id, occurrence id) pairs to underline: the entity has a definition
// somewhere and the occurrence is not inside one of its defining sources.
std::set<std::pair<std::string, std::string>> scent_occurrences(const PaperManifest& m);

struct PageRegions {
  int page = 0;
  std::vector<BoundingBox> keep;
};

struct Declutter {
  bool localized = false;
  std::vector<PageRegions> pages;  // sorted by page
  std::size_t occurrences = 0;     // match count for the search bar
  std::size_t sentences = 0;
};

// Regions left unmasked when decluttering around an entity: its occurrence
// boxes, the boxes of the sentences that contain it, and the boxes of
// display equations it appears in.
Declutter declutter_regions(const PaperManifest& m, std::string_view entity);

struct GlossaryEntry {
  std::string entity;
  std::string tex;
  EntityKind kind = EntityKind::symbol;
  std::size_t first_position = 0;
  std::vector<DefinitionRecord> definitions;
};

// Defined entities by first appearance, ties by id.
std::vector<GlossaryEntry> build_glossary(const PaperManifest& m);

// --- persistence -------------------------------------------------------------------

json to_json(const PaperManifest& m);
// Throws FormatError on malformed input.
PaperManifest from_json(const json& j);

void save_manifest(const PaperManifest& m, const std::filesystem::path& path);
// Throws FormatError for unreadable or malformed files, ValidationError for
// broken references.
PaperManifest load_manifest(const std::filesystem::path& path);

}  // namespace noncekit::manifest
