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

#include "noncekit/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "noncekit/defextract.hpp"

namespace noncekit::manifest {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "manifest validation failed:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

const std::vector<DefinitionRecord> kNoDefinitions;
const std::vector<std::string> kNoUsages;

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

// --- lookups ---------------------------------------------------------------------------

void PaperManifest::reindex() {
  entity_at_.clear();
  sentence_at_.clear();
  equation_at_.clear();
  occurrence_at_.clear();
  for (std::size_t i = 0; i < entities.size(); ++i) {
    entity_at_.emplace(entities[i].id, i);
    for (std::size_t k = 0; k < entities[i].occurrences.size(); ++k)
      occurrence_at_.emplace(entities[i].occurrences[k].id, std::pair{i, k});
  }
  for (std::size_t i = 0; i < sentences.size(); ++i) sentence_at_.emplace(sentences[i].id, i);
  for (std::size_t i = 0; i < equations.size(); ++i) equation_at_.emplace(equations[i].id, i);
}

const Entity* PaperManifest::entity(std::string_view id) const {
  auto it = entity_at_.find(id);
  return it == entity_at_.end() ? nullptr : &entities[it->second];
}

const SentenceRecord* PaperManifest::sentence(std::string_view id) const {
  auto it = sentence_at_.find(id);
  return it == sentence_at_.end() ? nullptr : &sentences[it->second];
}

const EquationRecord* PaperManifest::equation(std::string_view id) const {
  auto it = equation_at_.find(id);
  return it == equation_at_.end() ? nullptr : &equations[it->second];
}

const Occurrence* PaperManifest::occurrence(std::string_view id) const {
  auto it = occurrence_at_.find(id);
  if (it == occurrence_at_.end()) return nullptr;
  return &entities[it->second.first].occurrences[it->second.second];
}

const Entity* PaperManifest::owner(std::string_view id) const {
  auto it = occurrence_at_.find(id);
  return it == occurrence_at_.end() ? nullptr : &entities[it->second.first];
}

const std::vector<DefinitionRecord>& PaperManifest::definitions_of(std::string_view e) const {
  auto it = definitions.find(std::string(e));
  return it == definitions.end() ? kNoDefinitions : it->second;
}

const std::vector<std::string>& PaperManifest::usages_of(std::string_view e) const {
  auto it = usages.find(std::string(e));
  return it == usages.end() ? kNoUsages : it->second;
}

std::size_t PaperManifest::sentence_index(std::string_view id) const {
  auto it = sentence_at_.find(id);
  return it == sentence_at_.end() ? std::string::npos : it->second;
}

bool operator==(const PaperManifest& a, const PaperManifest& b) {
  return a.version == b.version && a.paper == b.paper && a.entities == b.entities &&
         a.sentences == b.sentences && a.equations == b.equations &&
         a.definitions == b.definitions && a.usages == b.usages && a.extra == b.extra;
}

// --- validation ------------------------------------------------------------------------

namespace {

CharSpan source_extent(const PaperManifest& m, std::string_view source, bool* found) {
  if (const auto* s = m.sentence(source)) {
    *found = true;
    return s->flat;
  }
  if (const auto* e = m.equation(source)) {
    *found = true;
    return e->flat;
  }
  *found = false;
  return {};
}

bool source_mentions(const PaperManifest& m, const Entity& e, std::string_view source) {
  for (const auto& o : e.occurrences)
    if (o.sentence == source || o.equation == source) return true;
  (void)m;
  return false;
}

void check_boxes(const std::vector<BoundingBox>& boxes, const std::string& owner,
                 std::vector<std::string>& out) {
  for (std::size_t k = 0; k < boxes.size(); ++k)
    if (!boxes[k].valid()) out.push_back("invalid box " + std::to_string(k) + " on " + owner);
}

}  // namespace

std::vector<std::string> validate(const PaperManifest& m) {
  std::vector<std::string> out;
  if (m.version < 1 || m.version > kSchemaVersion)
    out.push_back("unsupported schema version " + std::to_string(m.version));

  std::set<std::string> ids;
  auto unique = [&](const std::string& id, const char* what) {
    if (id.empty()) out.push_back(std::string("empty ") + what + " id");
    else if (!ids.insert(id).second) out.push_back(std::string("duplicate ") + what + " id " + id);
  };
  for (const auto& s : m.sentences) unique(s.id, "sentence");
  for (const auto& e : m.equations) unique(e.id, "equation");
  for (const auto& e : m.entities) {
    unique(e.id, "entity");
    for (const auto& o : e.occurrences) unique(o.id, "occurrence");
  }

  for (const auto& s : m.sentences) {
    check_boxes(s.boxes, "sentence " + s.id, out);
    for (const auto& ph : s.math)
      if (!m.equation(ph.equation))
        out.push_back("sentence " + s.id + " references missing equation " + ph.equation);
  }
  for (const auto& e : m.equations) {
    check_boxes(e.boxes, "equation " + e.id, out);
    if (!e.sentence.empty() && !m.sentence(e.sentence))
      out.push_back("equation " + e.id + " references missing sentence " + e.sentence);
    for (const auto& s : e.symbols) {
      const Occurrence* o = m.occurrence(s);
      if (!o) out.push_back("equation " + e.id + " references missing occurrence " + s);
      else if (o->equation != e.id)
        out.push_back("occurrence " + s + " listed by equation " + e.id + " belongs elsewhere");
    }
  }
  for (const auto& e : m.entities) {
    for (const auto& o : e.occurrences) {
      const std::string who = "occurrence " + o.id;
      check_boxes(o.boxes, who, out);
      if (!o.sentence.empty() && !m.sentence(o.sentence))
        out.push_back(who + " references missing sentence " + o.sentence);
      if (!o.equation.empty() && !m.equation(o.equation))
        out.push_back(who + " references missing equation " + o.equation);
      if (o.parent) {
        const Occurrence* p = m.occurrence(*o.parent);
        if (!p) out.push_back(who + " references missing parent " + *o.parent);
        else if (std::find(p->children.begin(), p->children.end(), o.id) == p->children.end())
          out.push_back(who + " is not a child of its parent " + *o.parent);
      }
      for (const auto& c : o.children) {
        const Occurrence* child = m.occurrence(c);
        if (!child) out.push_back(who + " references missing child " + c);
        else if (child->parent != o.id) out.push_back(who + " lists " + c + " which has another parent");
      }
    }
  }

  for (const auto& [eid, defs] : m.definitions) {
    const Entity* e = m.entity(eid);
    if (!e) out.push_back("definitions reference missing entity " + eid);
    std::set<std::pair<DefinitionKind, std::string>> seen;
    for (std::size_t k = 0; k < defs.size(); ++k) {
      const auto& d = defs[k];
      const std::string who = "definition " + std::to_string(k) + " of " + eid;
      if (d.definiendum != eid) out.push_back(who + " names definiendum " + d.definiendum);
      if (d.definiens.empty()) out.push_back(who + " has an empty definiens");
      bool found = false;
      CharSpan extent = source_extent(m, d.source, &found);
      if (!found) {
        out.push_back(who + " references missing source " + d.source);
      } else {
        if (extent.start != d.position)
          out.push_back(who + " position " + std::to_string(d.position) + " does not match source " +
                        d.source);
        if (e && !source_mentions(m, *e, d.source))
          out.push_back(who + " source " + d.source + " has no occurrence of the entity");
      }
      if (!seen.insert({d.kind, d.source}).second) out.push_back(who + " duplicates kind and source");
      if (k > 0 && definition_order(d, defs[k - 1])) out.push_back(who + " is out of order");
    }
  }

  for (const auto& [eid, sents] : m.usages) {
    if (!m.entity(eid)) out.push_back("usages reference missing entity " + eid);
    std::size_t prev = 0;
    for (std::size_t k = 0; k < sents.size(); ++k) {
      std::size_t at = m.sentence_index(sents[k]);
      if (at == std::string::npos) {
        out.push_back("usages of " + eid + " reference missing sentence " + sents[k]);
        continue;
      }
      if (k > 0 && at <= prev) out.push_back("usages of " + eid + " are unsorted or repeated");
      prev = at;
    }
  }
  return out;
}

PaperManifest build_manifest(std::string paper, std::vector<Entity> entities,
                             std::vector<SentenceRecord> sentences,
                             std::vector<EquationRecord> equations,
                             std::vector<DefinitionRecord> definitions, UsageIndex usages) {
  PaperManifest m;
  m.paper = std::move(paper);
  m.entities = std::move(entities);
  m.sentences = std::move(sentences);
  m.equations = std::move(equations);
  defextract::normalize_definitions(definitions);
  for (auto& d : definitions) m.definitions[d.definiendum].push_back(std::move(d));
  m.usages = std::move(usages);
  m.reindex();
  auto problems = validate(m);
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return m;
}

bool localized(const Entity& e) {
  return std::any_of(e.occurrences.begin(), e.occurrences.end(),
                     [](const Occurrence& o) { return !o.boxes.empty(); });
}

bool multi_box(const Entity& e) {
  return std::any_of(e.occurrences.begin(), e.occurrences.end(),
                     [](const Occurrence& o) { return o.boxes.size() > 1; });
}

std::string count_report(const PaperManifest& m) {
  std::size_t symbols = 0, terms = 0, located = 0;
  for (const auto& e : m.entities) {
    (e.kind == EntityKind::symbol ? symbols : terms)++;
    located += localized(e);
  }
  std::map<DefinitionKind, std::size_t> kinds;
  for (const auto& [id, defs] : m.definitions)
    for (const auto& d : defs) kinds[d.kind]++;
  const double pct = m.entities.empty() ? 0.0 : 100.0 * static_cast<double>(located) /
                                                     static_cast<double>(m.entities.size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", pct);
  std::ostringstream out;
  out << "entities: " << m.entities.size() << " (" << symbols << " symbols, " << terms << " terms)\n"
      << "localized: " << buf << " (" << located << "/" << m.entities.size() << ")\n"
      << "sentences: " << m.sentences.size() << "\n"
      << "equations: " << m.equations.size() << "\n"
      << "definitions: prose " << kinds[DefinitionKind::prose] << ", formula "
      << kinds[DefinitionKind::formula] << ", abbreviation " << kinds[DefinitionKind::abbreviation]
      << "\n";
  return out.str();
}

// --- definitions -----------------------------------------------------------------------

std::string_view to_string(ViewStatus s) {
  switch (s) {
    case ViewStatus::definition: return "definition";
    case ViewStatus::defined_here: return "defined_here";
    case ViewStatus::none: return "none";
  }
  return "none";
}

ContextLink context_link(const PaperManifest& m, const DefinitionRecord& d) {
  ContextLink link;
  link.source = d.source;
  const std::vector<BoundingBox>* boxes = nullptr;
  if (const auto* s = m.sentence(d.source)) {
    link.sentence = s->id;
    boxes = &s->boxes;
  } else if (const auto* e = m.equation(d.source)) {
    link.sentence = e->sentence;
    boxes = &e->boxes;
  }
  if (boxes && !boxes->empty()) link.page = boxes->front().page;
  return link;
}

DefinitionView select_definition(const PaperManifest& m, std::string_view entity,
                                 std::size_t position) {
  if (!m.entity(entity)) throw UnknownEntity("unknown entity " + std::string(entity));
  const auto& defs = m.definitions_of(entity);
  DefinitionView v;
  for (const auto& d : defs) (d.kind == DefinitionKind::formula ? v.formulae : v.definitions)++;
  v.usages = m.usages_of(entity).size();

  // Inside a defining source. Definitions sharing a source are ordered by
  // priority, so the first hit is the preferred one.
  for (const auto& d : defs) {
    bool found = false;
    CharSpan extent = source_extent(m, d.source, &found);
    if (found && extent.contains(position)) {
      v.status = ViewStatus::defined_here;
      v.record = d;
      v.link = context_link(m, d);
      return v;
    }
  }

  const DefinitionRecord* best = nullptr;
  for (const auto& d : defs) {
    if (d.position >= position) break;
    if (!best || d.position > best->position) best = &d;
  }
  if (!best && !defs.empty()) {
    best = &defs.front();
    v.forward = true;
  }
  if (best) {
    v.status = ViewStatus::definition;
    v.record = *best;
    v.link = context_link(m, *best);
  }
  return v;
}

// --- reading aids ----------------------------------------------------------------------

std::set<std::pair<std::string, std::string>> scent_occurrences(const PaperManifest& m) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& e : m.entities) {
    const auto& defs = m.definitions_of(e.id);
    if (defs.empty()) continue;
    std::set<std::string_view> defining;
    for (const auto& d : defs) defining.insert(d.source);
    for (const auto& o : e.occurrences) {
      if (defining.count(o.sentence) || defining.count(o.equation)) continue;
      out.insert({e.id, o.id});
    }
  }
  return out;
}

Declutter declutter_regions(const PaperManifest& m, std::string_view entity) {
  const Entity* e = m.entity(entity);
  if (!e) throw UnknownEntity("unknown entity " + std::string(entity));
  Declutter out;
  out.occurrences = e->occurrences.size();
  out.sentences = m.usages_of(entity).size();
  out.localized = localized(*e);
  if (!out.localized) return out;

  std::map<int, std::vector<BoundingBox>> by_page;
  auto add = [&](const std::vector<BoundingBox>& boxes) {
    for (const auto& b : boxes) by_page[b.page].push_back(b);
  };
  std::set<std::string_view> display;
  for (const auto& o : e->occurrences) {
    add(o.boxes);
    if (!o.equation.empty())
      if (const auto* q = m.equation(o.equation); q && q->display) display.insert(q->id);
  }
  for (const auto& s : m.usages_of(entity))
    if (const auto* rec = m.sentence(s)) add(rec->boxes);
  for (auto q : display) add(m.equation(q)->boxes);

  auto key = [](const BoundingBox& b) { return std::tuple(b.top, b.left, b.width, b.height); };
  for (auto& [page, boxes] : by_page) {
    std::sort(boxes.begin(), boxes.end(),
              [&](const BoundingBox& a, const BoundingBox& b) { return key(a) < key(b); });
    boxes.erase(std::unique(boxes.begin(), boxes.end()), boxes.end());
    out.pages.push_back({page, std::move(boxes)});
  }
  return out;
}

std::vector<GlossaryEntry> build_glossary(const PaperManifest& m) {
  std::vector<GlossaryEntry> out;
  for (const auto& e : m.entities) {
    const auto& defs = m.definitions_of(e.id);
    if (defs.empty()) continue;
    GlossaryEntry g{e.id, e.tex, e.kind, std::string::npos, defs};
    for (const auto& o : e.occurrences) g.first_position = std::min(g.first_position, o.flat.start);
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const GlossaryEntry& a, const GlossaryEntry& b) {
    return std::tie(a.first_position, a.entity) < std::tie(b.first_position, b.entity);
  });
  return out;
}

// --- persistence -----------------------------------------------------------------------

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> k = {"version",   "paper",       "entities", "sentences",
                                          "equations", "definitions", "usages"};
  return k;
}

}  // namespace

json to_json(const PaperManifest& m) {
  json j = m.extra.is_object() ? m.extra : json::object();
  j["version"] = m.version;
  j["paper"] = m.paper;
  json ents = json::array();
  for (const auto& e : m.entities) {
    json je = e;
    je["localized"] = localized(e);
    je["multi_box"] = multi_box(e);
    ents.push_back(std::move(je));
  }
  j["entities"] = std::move(ents);
  j["sentences"] = m.sentences;
  j["equations"] = m.equations;
  json defs = json::object();
  for (const auto& [eid, list] : m.definitions) {
    json arr = json::array();
    for (const auto& d : list) {
      json jd = d;
      jd.erase("definiendum");
      arr.push_back(std::move(jd));
    }
    defs[eid] = std::move(arr);
  }
  j["definitions"] = std::move(defs);
  j["usages"] = m.usages;
  return j;
}

PaperManifest from_json(const json& j) {
  try {
    if (!j.is_object()) throw FormatError("manifest must be a JSON object");
    for (const auto& k : known_keys())
      if (!j.contains(k)) throw FormatError("manifest is missing \"" + k + "\"");
    PaperManifest m;
    j.at("version").get_to(m.version);
    if (m.version > kSchemaVersion)
      throw FormatError("manifest schema version " + std::to_string(m.version) + " is newer than " +
                        std::to_string(kSchemaVersion));
    j.at("paper").get_to(m.paper);
    j.at("entities").get_to(m.entities);
    j.at("sentences").get_to(m.sentences);
    j.at("equations").get_to(m.equations);
    for (const auto& [eid, arr] : j.at("definitions").items()) {
      auto& list = m.definitions[eid];
      for (json jd : arr) {
        jd["definiendum"] = eid;
        list.push_back(jd.get<DefinitionRecord>());
      }
    }
    j.at("usages").get_to(m.usages);
    for (const auto& [k, v] : j.items())
      if (!known_keys().count(k)) m.extra[k] = v;
    m.reindex();
    return m;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

void save_manifest(const PaperManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << dump(to_json(m));
  if (!out) throw Error("cannot write " + path.string());
}

PaperManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  PaperManifest m = from_json(j);
  auto problems = validate(m);
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return m;
}

}  // namespace noncekit::manifest
