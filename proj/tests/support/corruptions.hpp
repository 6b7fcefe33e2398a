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

#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noncekit/manifest.hpp"

// Planted reference corruptions. Each one breaks exactly one link or
// invariant of a valid manifest; the element it touches is drawn from a
// seeded generator so reruns are reproducible.
namespace noncekit::testing {

struct Corruption {
  std::string name;
  std::function<void(manifest::PaperManifest&, std::mt19937&)> apply;
  // The file format cannot express it (definitions are stored under their
  // entity without repeating the definiendum).
  bool in_memory_only = false;
};

namespace detail {

template <class T>
T& pick(std::vector<T*>& pool, std::mt19937& rng, const char* what) {
  if (pool.empty()) throw std::runtime_error(std::string("no candidate ") + what);
  return *pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
}

inline std::vector<Occurrence*> occurrences(manifest::PaperManifest& m,
                                            const std::function<bool(const Occurrence&)>& keep) {
  std::vector<Occurrence*> out;
  for (auto& e : m.entities)
    for (auto& o : e.occurrences)
      if (keep(o)) out.push_back(&o);
  return out;
}

inline std::vector<DefinitionRecord*> definitions(
    manifest::PaperManifest& m, const std::function<bool(const DefinitionRecord&)>& keep) {
  std::vector<DefinitionRecord*> out;
  for (auto& [id, defs] : m.definitions)
    for (auto& d : defs)
      if (keep(d)) out.push_back(&d);
  return out;
}

inline std::vector<std::vector<std::string>*> usage_lists(manifest::PaperManifest& m) {
  std::vector<std::vector<std::string>*> out;
  for (auto& [id, s] : m.usages)
    if (!s.empty()) out.push_back(&s);
  return out;
}

}  // namespace detail

inline std::vector<Corruption> seeded_corruptions() {
  using manifest::PaperManifest;
  using Rng = std::mt19937;
  auto any_def = [](const DefinitionRecord&) { return true; };
  std::vector<Corruption> c;
  c.push_back({"definition list keyed by a missing entity", [](PaperManifest& m, Rng& rng) {
                 std::vector<std::string> names;
                 for (auto& [id, defs] : m.definitions) names.push_back(id);
                 std::string id = names.at(std::uniform_int_distribution<std::size_t>(
                     0, names.size() - 1)(rng));
                 auto defs = std::move(m.definitions[id]);
                 m.definitions.erase(id);
                 for (auto& d : defs) d.definiendum = "missing-entity";
                 m.definitions["missing-entity"] = std::move(defs);
               }});
  c.push_back({"definition source names a missing sentence", [any_def](PaperManifest& m, Rng& rng) {
                 auto pool = detail::definitions(m, any_def);
                 detail::pick(pool, rng, "definition").source = "sent-missing";
               }});
  c.push_back({"definition source names a missing equation", [any_def](PaperManifest& m, Rng& rng) {
                 auto pool = detail::definitions(m, any_def);
                 detail::pick(pool, rng, "definition").source = "eq-missing";
               }});
  c.push_back({"definiendum disagrees with its list", [](PaperManifest& m, Rng& rng) {
                 auto pool = detail::definitions(m, [](const DefinitionRecord&) { return true; });
                 auto& d = detail::pick(pool, rng, "definition");
                 for (const auto& e : m.entities)
                   if (e.id != d.definiendum) {
                     d.definiendum = e.id;
                     return;
                   }
               },
               true});
  c.push_back({"definition position detached from its source", [any_def](PaperManifest& m, Rng& rng) {
                 auto pool = detail::definitions(m, any_def);
                 detail::pick(pool, rng, "definition").position += 1;
               }});
  c.push_back({"definition source lacks the definiendum", [](PaperManifest& m, Rng& rng) {
                 auto pool = detail::definitions(m, [](const DefinitionRecord&) { return true; });
                 auto& d = detail::pick(pool, rng, "definition");
                 const Entity* e = m.entity(d.definiendum);
                 for (const auto& s : m.sentences) {
                   bool mentions = false;
                   for (const auto& o : e->occurrences) mentions |= s.flat.contains(o.flat);
                   if (!mentions) {
                     d.source = s.id;
                     d.position = s.flat.start;
                     return;
                   }
                 }
               }});
  c.push_back({"definitions out of document order", [](PaperManifest& m, Rng& rng) {
                 std::vector<std::vector<DefinitionRecord>*> lists;
                 for (auto& [id, defs] : m.definitions)
                   if (defs.size() > 1 && defs.front().position != defs.back().position)
                     lists.push_back(&defs);
                 auto& defs = detail::pick(lists, rng, "definition list");
                 std::swap(defs.front(), defs.back());
               }});
  c.push_back({"usage list keyed by a missing entity", [](PaperManifest& m, Rng& rng) {
                 std::vector<std::string> names;
                 for (auto& [id, s] : m.usages) names.push_back(id);
                 std::string id = names.at(std::uniform_int_distribution<std::size_t>(
                     0, names.size() - 1)(rng));
                 m.usages["missing-entity"] = m.usages[id];
               }});
  c.push_back({"usage names a missing sentence", [](PaperManifest& m, Rng& rng) {
                 auto lists = detail::usage_lists(m);
                 auto& l = detail::pick(lists, rng, "usage list");
                 l.back() = "sent-missing";
               }});
  c.push_back({"usage sentences repeated", [](PaperManifest& m, Rng& rng) {
                 auto lists = detail::usage_lists(m);
                 auto& l = detail::pick(lists, rng, "usage list");
                 l.push_back(l.back());
               }});
  c.push_back({"occurrence names a missing sentence", [](PaperManifest& m, Rng& rng) {
                 auto pool = detail::occurrences(m, [](const Occurrence& o) { return !o.sentence.empty(); });
                 detail::pick(pool, rng, "occurrence").sentence = "sent-missing";
               }});
  c.push_back({"occurrence names a missing equation", [](PaperManifest& m, Rng& rng) {
                 auto pool = detail::occurrences(m, [](const Occurrence& o) { return !o.equation.empty(); });
                 detail::pick(pool, rng, "occurrence").equation = "eq-missing";
               }});
  c.push_back({"occurrence names a missing parent", [](PaperManifest& m, Rng& rng) {
                 auto pool = detail::occurrences(m, [](const Occurrence& o) { return o.parent.has_value(); });
                 detail::pick(pool, rng, "occurrence").parent = "occ-missing";
               }});
  c.push_back({"occurrence lists a missing child", [](PaperManifest& m, Rng& rng) {
                 auto pool = detail::occurrences(m, [](const Occurrence& o) { return !o.children.empty(); });
                 detail::pick(pool, rng, "occurrence").children.push_back("occ-missing");
               }});
  c.push_back({"equation names a missing sentence", [](PaperManifest& m, Rng& rng) {
                 std::vector<EquationRecord*> pool;
                 for (auto& q : m.equations)
                   if (!q.sentence.empty()) pool.push_back(&q);
                 detail::pick(pool, rng, "equation").sentence = "sent-missing";
               }});
  c.push_back({"equation lists a missing symbol", [](PaperManifest& m, Rng& rng) {
                 std::vector<EquationRecord*> pool;
                 for (auto& q : m.equations)
                   if (!q.symbols.empty()) pool.push_back(&q);
                 detail::pick(pool, rng, "equation").symbols.back() = "occ-missing";
               }});
  c.push_back({"sentence math names a missing equation", [](PaperManifest& m, Rng& rng) {
                 std::vector<SentenceRecord*> pool;
                 for (auto& s : m.sentences)
                   if (!s.math.empty()) pool.push_back(&s);
                 detail::pick(pool, rng, "sentence").math.front().equation = "eq-missing";
               }});
  c.push_back({"duplicate sentence id", [](PaperManifest& m, Rng& rng) {
                 std::vector<SentenceRecord*> pool;
                 for (std::size_t k = 1; k < m.sentences.size(); ++k) pool.push_back(&m.sentences[k]);
                 detail::pick(pool, rng, "sentence").id = m.sentences.front().id;
               }});
  c.push_back({"duplicate entity id", [](PaperManifest& m, Rng& rng) {
                 std::vector<Entity*> pool;
                 for (std::size_t k = 1; k < m.entities.size(); ++k) pool.push_back(&m.entities[k]);
                 detail::pick(pool, rng, "entity").id = m.entities.front().id;
               }});
  c.push_back({"box outside the page", [](PaperManifest& m, Rng& rng) {
                 auto pool = detail::occurrences(m, [](const Occurrence& o) { return !o.boxes.empty(); });
                 auto& b = detail::pick(pool, rng, "occurrence").boxes.front();
                 b.width = -b.width - 0.01;
               }});
  return c;
}

}  // namespace noncekit::testing
