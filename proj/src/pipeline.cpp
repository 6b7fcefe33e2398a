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

#include "noncekit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "noncekit/manifest.hpp"
#include "noncekit/serialize.hpp"

namespace noncekit::pipeline {

namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::scan: return "scan";
    case Stage::parse: return "parse";
    case Stage::locate: return "locate";
    case Stage::extract: return "extract";
    case Stage::manifest: return "manifest";
  }
  return "?";
}

std::vector<Stage> parse_stages(std::string_view csv) {
  const std::vector<Stage> order = {Stage::scan, Stage::parse, Stage::locate, Stage::extract,
                                    Stage::manifest};
  std::vector<Stage> out;
  std::size_t at = 0;
  while (at <= csv.size()) {
    std::size_t comma = csv.find(',', at);
    if (comma == std::string_view::npos) comma = csv.size();
    std::string_view name = csv.substr(at, comma - at);
    at = comma + 1;
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (name.empty()) continue;
    auto it = std::find_if(order.begin(), order.end(), [&](Stage s) { return to_string(s) == name; });
    if (it == order.end()) throw Error("unknown stage \"" + std::string(name) + "\"");
    out.push_back(*it);
  }
  if (out.empty()) throw Error("no stages selected");
  for (std::size_t k = 0; k < out.size(); ++k)
    if (out[k] != order[k])
      throw Error("stages must be a prefix of scan,parse,locate,extract,manifest");
  return out;
}

// --- scan ------------------------------------------------------------------------------

Analysis scan(const texscan::SourceDocument& doc, std::string paper) {
  Analysis a;
  a.paper = std::move(paper);
  a.main_file = doc.main_file();
  a.files = doc.files();
  auto r = texscan::scan_document(doc);
  a.sentences = std::move(r.sentences);
  for (const auto& eq : r.equations) {
    EquationRecord rec;
    rec.id = eq.id;
    rec.span = eq.body_span;
    rec.flat = eq.body_flat;
    rec.tex = eq.body;
    rec.display = eq.display;
    rec.sentence = eq.sentence.value_or("");
    try {
      locate::check_splice(a.files.at(eq.body_span.file), eq.body_span.chars());
    } catch (const locate::SpliceError&) {
      a.regions[eq.id] = eq.span;
    }
    a.equations.push_back(std::move(rec));
  }
  return a;
}

// --- parse -----------------------------------------------------------------------------

namespace {

void map_tree(mathparse::MathNode& n, const mathparse::Expansion& ex) {
  n.span = ex.map_back(n.span);
  for (auto& c : n.children) map_tree(c, ex);
}

CharSpan hull(const std::vector<CharSpan>& spans) {
  CharSpan h = spans.front();
  for (const auto& s : spans) {
    h.start = std::min(h.start, s.start);
    h.end = std::max(h.end, s.end);
  }
  return h;
}

// Sentence whose flat range holds pos, or "".
std::string sentence_at(const std::vector<SentenceRecord>& sentences, std::size_t pos) {
  auto it = std::upper_bound(sentences.begin(), sentences.end(), pos,
                             [](std::size_t p, const SentenceRecord& s) { return p < s.flat.start; });
  if (it == sentences.begin()) return "";
  --it;
  return it->flat.contains(pos) ? it->id : "";
}

void sort_entities(std::vector<Entity>& entities) {
  for (auto& e : entities)
    std::stable_sort(e.occurrences.begin(), e.occurrences.end(),
                     [](const Occurrence& x, const Occurrence& y) { return x.flat.start < y.flat.start; });
  std::sort(entities.begin(), entities.end(), [](const Entity& x, const Entity& y) {
    std::size_t px = x.occurrences.empty() ? std::string::npos : x.occurrences.front().flat.start;
    std::size_t py = y.occurrences.empty() ? std::string::npos : y.occurrences.front().flat.start;
    return std::tie(px, x.id) < std::tie(py, y.id);
  });
}

}  // namespace

void parse(Analysis& a, const texscan::SourceDocument& doc, bool expand_macros) {
  const auto macros = expand_macros ? mathparse::MacroTable::collect(doc.text()) : mathparse::MacroTable{};
  std::map<std::string, Entity> symbols;
  a.parsed.clear();

  for (auto& eq : a.equations) {
    defextract::ParsedEquation pe;
    pe.id = eq.id;
    pe.position = eq.flat.start;
    pe.tex = eq.tex;
    const auto ex = macros.expand(eq.tex);
    try {
      pe.tree = mathparse::parse_math_tree(ex.text);
      pe.symbols = mathparse::extract_symbols(pe.tree, eq.id + ".s");
    } catch (const ParseError& err) {
      a.warnings.push_back(eq.id + ": " + err.what());
      pe.tree = {};
      pe.tree.source = ex.text;
      pe.symbols.clear();
    }
    eq.tree = pe.tree.root;
    map_tree(eq.tree, ex);
    eq.symbols.clear();

    for (const auto& sym : pe.symbols) {
      if (sym.spans.empty()) continue;
      CharSpan local = ex.map_back(hull(sym.spans));
      Occurrence o;
      o.id = sym.id;
      o.flat = {eq.flat.start + local.start, eq.flat.start + local.end};
      try {
        o.span = doc.to_source(o.flat);
      } catch (const Error& err) {
        a.warnings.push_back(sym.id + ": " + err.what());
      }
      o.sentence = eq.sentence;
      o.equation = eq.id;
      o.parent = sym.parent;
      o.children = sym.children;
      const std::string eid = symbol_entity_id(sym.normalized_key);
      pe.entity_of[sym.id] = eid;
      auto [it, fresh] = symbols.try_emplace(eid);
      if (fresh) {
        it->second.id = eid;
        it->second.kind = EntityKind::symbol;
        it->second.key = sym.normalized_key;
        it->second.tex = sym.tex;
      }
      it->second.occurrences.push_back(std::move(o));
      eq.symbols.push_back(sym.id);
    }
    a.parsed.push_back(std::move(pe));
  }

  // Terms: abbreviation short forms, found wherever they appear in prose.
  std::set<std::string> shorts;
  for (const auto& s : a.sentences)
    for (const auto& ab : defextract::find_abbreviations(s.text)) shorts.insert(ab.short_form);
  const auto eqs = texscan::detect_equations(doc.text(), doc.body());
  const auto prose = texscan::prose_mask(doc.text(), eqs, doc.body());
  std::vector<Entity> terms;
  std::vector<std::pair<std::size_t, std::size_t>> order;  // (flat start, term index)
  for (const auto& sf : shorts) {
    Entity t{term_entity_id(sf), EntityKind::term, sf, sf, {}};
    for (const auto& hit : texscan::find_word(doc.text(), prose, sf, doc.body())) {
      Occurrence o;
      o.flat = hit;
      try {
        o.span = doc.to_source(hit);
      } catch (const Error& err) {
        a.warnings.push_back("term " + sf + ": " + err.what());
      }
      o.sentence = sentence_at(a.sentences, hit.start);
      t.occurrences.push_back(std::move(o));
    }
    terms.push_back(std::move(t));
  }
  // Term occurrence ids follow document order.
  std::vector<Occurrence*> all;
  for (auto& t : terms)
    for (auto& o : t.occurrences) all.push_back(&o);
  std::sort(all.begin(), all.end(), [](const Occurrence* x, const Occurrence* y) {
    return std::tie(x->flat.start, x->flat.end) < std::tie(y->flat.start, y->flat.end);
  });
  for (std::size_t k = 0; k < all.size(); ++k) all[k]->id = "term-" + std::to_string(k + 1);

  a.entities.clear();
  for (auto& [id, e] : symbols) a.entities.push_back(std::move(e));
  for (auto& t : terms) a.entities.push_back(std::move(t));
  sort_entities(a.entities);
}

// --- locate ----------------------------------------------------------------------------

namespace {

std::map<std::string, const mathparse::SymbolRecord*> symbol_records(const Analysis& a) {
  std::map<std::string, const mathparse::SymbolRecord*> out;
  for (const auto& pe : a.parsed)
    for (const auto& s : pe.symbols) out[s.id] = &s;
  return out;
}

bool is_leaf(const mathparse::SymbolRecord& s) {
  return s.kind == mathparse::SymbolKind::simple || s.kind == mathparse::SymbolKind::accent;
}

}  // namespace

std::vector<locate::Target> build_targets(const Analysis& a) {
  std::vector<locate::Target> out;
  for (const auto& s : a.sentences)
    if (!s.span.file.empty() && s.span.end > s.span.start) out.push_back({s.id, s.span});
  for (const auto& e : a.equations) {
    auto r = a.regions.find(e.id);
    const TexSpan& span = r == a.regions.end() ? e.span : r->second;
    if (!span.file.empty() && span.end > span.start) out.push_back({e.id, span});
  }
  const auto records = symbol_records(a);
  for (const auto& e : a.entities) {
    for (const auto& o : e.occurrences) {
      if (o.span.file.empty() || o.span.end <= o.span.start) continue;
      if (e.kind == EntityKind::symbol) {
        auto it = records.find(o.id);
        if (it == records.end() || !is_leaf(*it->second)) continue;
      }
      out.push_back({o.id, o.span});
    }
  }
  return out;
}

void apply_boxes(Analysis& a, const std::map<std::string, std::vector<BoundingBox>>& located) {
  auto get = [&](const std::string& id) {
    auto it = located.find(id);
    return it == located.end() ? std::vector<BoundingBox>{} : it->second;
  };
  for (auto& s : a.sentences) s.boxes = get(s.id);
  for (auto& e : a.equations) e.boxes = get(e.id);
  const auto records = symbol_records(a);
  for (auto& e : a.entities) {
    for (auto& o : e.occurrences) {
      auto it = records.find(o.id);
      if (e.kind == EntityKind::term || it == records.end() || is_leaf(*it->second)) {
        o.boxes = get(o.id);
        o.composed = false;
        continue;
      }
      o.composed = true;
      try {
        o.boxes = locate::compose_bounding_boxes(*it->second, records, located);
      } catch (const locate::MissingChildError& err) {
        o.boxes.clear();
        a.warnings.push_back(o.id + ": " + err.what());
      }
    }
  }
}

// --- extract ---------------------------------------------------------------------------

void extract(Analysis& a) {
  defextract::LoneSymbols lone;
  for (const auto& pe : a.parsed)
    if (auto id = defextract::lone_symbol(pe)) lone[pe.id] = *id;

  std::vector<DefinitionRecord> defs = defextract::extract_abbreviations(a.sentences);
  auto prose = defextract::extract_symbol_definitions(a.sentences, lone);
  auto formulae = defextract::extract_defining_formulae(a.parsed);
  defs.insert(defs.end(), prose.begin(), prose.end());
  defs.insert(defs.end(), formulae.begin(), formulae.end());

  std::map<std::string, const Entity*> by_id;
  for (const auto& e : a.entities) by_id[e.id] = &e;
  std::vector<DefinitionRecord> kept;
  for (auto& d : defs) {
    auto it = by_id.find(d.definiendum);
    bool ok = it != by_id.end() &&
              std::any_of(it->second->occurrences.begin(), it->second->occurrences.end(),
                          [&](const Occurrence& o) { return o.sentence == d.source || o.equation == d.source; });
    if (ok) kept.push_back(std::move(d));
    else a.warnings.push_back("dropped definition of " + d.definiendum + " in " + d.source);
  }
  defextract::normalize_definitions(kept);
  a.definitions = std::move(kept);
  a.usages = defextract::index_usages(a.entities, a.sentences);
}

// --- run -------------------------------------------------------------------------------

namespace {

void write_artifact(const fs::path& path, const json& j, RunSummary& summary) {
  std::ofstream out(path, std::ios::binary);
  out << dump(j);
  if (!out) throw Error("cannot write " + path.string());
  summary.artifacts.push_back(path.filename().string());
}

std::string input_hash(const Analysis& a, const std::vector<locate::Target>& targets,
                       const locate::LocateConfig& cfg) {
  std::string blob;
  for (const auto& [name, text] : a.files) blob += name + '\0' + text + '\0';
  for (const auto& t : targets)
    blob += t.id + '\0' + t.span.file + '\0' + std::to_string(t.span.start) + ',' +
            std::to_string(t.span.end) + '\0';
  blob += cfg.render.compiler_cmd + '\0' + cfg.render.rasterizer_cmd + '\0' +
          std::to_string(cfg.render.dpi) + ',' + std::to_string(cfg.capacity) + ',' +
          std::to_string(cfg.tolerance);
  return hex64(fnv1a(blob));
}

json boxes_json(const std::map<std::string, std::vector<BoundingBox>>& boxes) {
  json j = json::object();
  for (const auto& [id, list] : boxes) j[id] = list;
  return j;
}

}  // namespace

RunSummary run(const RunConfig& config) {
  RunSummary summary;
  Stage current = Stage::scan;
  try {
    fs::create_directories(config.out_dir);
    std::string paper = config.paper;
    if (paper.empty()) paper = fs::weakly_canonical(config.source_dir).filename().string();
    const auto doc = texscan::SourceDocument::load(config.source_dir, config.main_file);
    Analysis a;
    for (Stage stage : config.stages) {
      current = stage;
      switch (stage) {
        case Stage::scan: {
          a = scan(doc, paper);
          json regions = json::object();
          for (const auto& [id, span] : a.regions) regions[id] = span;
          write_artifact(config.out_dir / "equations.json",
                         {{"paper", a.paper},
                          {"main", a.main_file},
                          {"sentences", a.sentences},
                          {"equations", a.equations},
                          {"regions", regions}},
                         summary);
          break;
        }
        case Stage::parse: {
          parse(a, doc, config.expand_macros);
          json eqs = json::array();
          for (const auto& e : a.equations)
            eqs.push_back({{"id", e.id}, {"tree", e.tree}, {"symbols", e.symbols}});
          write_artifact(config.out_dir / "symbols.json",
                         {{"equations", eqs}, {"entities", a.entities}}, summary);
          break;
        }
        case Stage::locate: {
          const auto targets = build_targets(a);
          const std::string hash = input_hash(a, targets, config.locate);
          const fs::path path = config.out_dir / "boxes.json";
          locate::LocateReport report;
          bool reused = false;
          if (fs::exists(path)) {
            try {
              std::ifstream in(path, std::ios::binary);
              json prev = json::parse(in);
              if (prev.value("input_hash", "") == hash) {
                prev.at("boxes").get_to(report.boxes);
                prev.at("misses").get_to(report.misses);
                prev.at("warnings").get_to(report.warnings);
                report.batches = prev.at("batches").get<int>();
                report.compiles = prev.at("compiles").get<int>();
                report.unmatched_pixels = prev.at("unmatched_pixels").get<std::size_t>();
                reused = true;
              }
            } catch (const std::exception&) {
              reused = false;
            }
          }
          if (!reused)
            report = locate::locate_targets(config.locate, config.source_dir, config.main_file,
                                            a.files, targets);
          std::sort(report.misses.begin(), report.misses.end());
          std::sort(report.warnings.begin(), report.warnings.end());
          apply_boxes(a, report.boxes);
          write_artifact(path,
                         {{"input_hash", hash},
                          {"targets", targets.size()},
                          {"batches", report.batches},
                          {"compiles", report.compiles},
                          {"misses", report.misses},
                          {"unmatched_pixels", report.unmatched_pixels},
                          {"warnings", report.warnings},
                          {"boxes", boxes_json(report.boxes)}},
                         summary);
          summary.report = std::move(report);
          summary.reused_boxes = reused;
          break;
        }
        case Stage::extract: {
          extract(a);
          write_artifact(config.out_dir / "definitions.json",
                         {{"definitions", a.definitions}, {"usages", a.usages}}, summary);
          break;
        }
        case Stage::manifest: {
          auto m = manifest::build_manifest(a.paper, a.entities, a.sentences, a.equations,
                                            a.definitions, a.usages);
          manifest::save_manifest(m, config.out_dir / "manifest.json");
          summary.artifacts.push_back("manifest.json");
          break;
        }
      }
    }
    summary.entities = a.entities.size();
    summary.definitions = a.definitions.size();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(current, e.what());
  }
  return summary;
}

}  // namespace noncekit::pipeline
