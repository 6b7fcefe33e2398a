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

#include "noncekit/serve.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "httplib.h"
#include "noncekit/diagram.hpp"

namespace noncekit::serve {

namespace fs = std::filesystem;

// --- store -----------------------------------------------------------------------------

void PaperStore::add(std::string paper, fs::path manifest) {
  auto e = std::make_unique<Entry>();
  e->path = std::move(manifest);
  entries_[std::move(paper)] = std::move(e);
}

void PaperStore::add_directory(const fs::path& dir) {
  for (const auto& d : fs::directory_iterator(dir))
    if (d.is_directory() && fs::exists(d.path() / "manifest.json"))
      add(d.path().filename().string(), d.path() / "manifest.json");
}

bool PaperStore::has(std::string_view paper) const { return entries_.count(paper) > 0; }

std::vector<std::string> PaperStore::papers() const {
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

std::shared_ptr<const manifest::PaperManifest> PaperStore::get(std::string_view paper) const {
  auto it = entries_.find(paper);
  if (it == entries_.end()) return nullptr;
  Entry& e = *it->second;
  std::lock_guard<std::mutex> guard(e.lock);
  if (!e.loaded && e.error.empty()) {
    try {
      e.loaded = std::make_shared<const manifest::PaperManifest>(manifest::load_manifest(e.path));
    } catch (const std::exception& err) {
      e.error = err.what();
    }
  }
  if (!e.error.empty()) throw Error(e.error);
  return e.loaded;
}

// --- payloads --------------------------------------------------------------------------

json entities_json(const manifest::PaperManifest& m) {
  const auto scent = manifest::scent_occurrences(m);
  json arr = json::array();
  for (const auto& e : m.entities) {
    json occs = json::array();
    for (const auto& o : e.occurrences) {
      occs.push_back({{"id", o.id},
                      {"boxes", o.boxes},
                      {"sentence", o.sentence},
                      {"equation", o.equation},
                      {"parent", o.parent ? json(*o.parent) : json(nullptr)},
                      {"children", o.children},
                      {"composed", o.composed},
                      {"underline", scent.count({e.id, o.id}) > 0}});
    }
    arr.push_back({{"id", e.id},
                   {"kind", to_string(e.kind)},
                   {"key", e.key},
                   {"tex", e.tex},
                   {"localized", manifest::localized(e)},
                   {"multi_box", manifest::multi_box(e)},
                   {"defined", !m.definitions_of(e.id).empty()},
                   {"occurrences", std::move(occs)}});
  }
  return {{"paper", m.paper}, {"entities", std::move(arr)}};
}

namespace {

json link_json(const manifest::ContextLink& l) {
  return {{"source", l.source}, {"sentence", l.sentence}, {"page", l.page}};
}

}  // namespace

json definition_view_json(const manifest::DefinitionView& v) {
  json j = {{"status", to_string(v.status)},
            {"forward", v.forward},
            {"counts", {{"definitions", v.definitions}, {"formulae", v.formulae}, {"usages", v.usages}}}};
  j["definition"] = v.record ? json(*v.record) : json(nullptr);
  j["link"] = v.link ? link_json(*v.link) : json(nullptr);
  return j;
}

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

// Highlight ranges for an entity inside a sentence's plain text.
std::vector<CharSpan> sentence_highlights(const manifest::PaperManifest& m, const Entity& e,
                                          const SentenceRecord& s) {
  std::vector<CharSpan> out;
  if (e.kind == EntityKind::term) {
    for (std::size_t at = s.text.find(e.key); at != std::string::npos; at = s.text.find(e.key, at + 1)) {
      std::size_t end = at + e.key.size();
      bool inside_math = std::any_of(s.math.begin(), s.math.end(), [&](const auto& ph) {
        return at >= ph.offset && at < ph.offset + ph.length;
      });
      if (inside_math) continue;
      if (at > 0 && word_char(s.text[at - 1])) continue;
      if (end < s.text.size() && word_char(s.text[end])) continue;
      out.push_back({at, end});
    }
    return out;
  }
  for (const auto& o : e.occurrences) {
    if (o.sentence != s.id || o.equation.empty()) continue;
    const EquationRecord* q = m.equation(o.equation);
    if (!q) continue;
    for (const auto& ph : s.math) {
      if (ph.equation != q->id) continue;
      std::size_t start = ph.offset + 1 + (o.flat.start - q->flat.start);
      std::size_t end = start + o.flat.size();
      if (o.flat.start < q->flat.start || end > ph.offset + ph.length - 1)
        out.push_back({ph.offset, ph.offset + ph.length});
      else
        out.push_back({start, end});
    }
  }
  return out;
}

std::vector<CharSpan> equation_highlights(const Entity& e, const EquationRecord& q) {
  std::vector<CharSpan> out;
  for (const auto& o : e.occurrences)
    if (o.equation == q.id && o.flat.start >= q.flat.start)
      out.push_back({o.flat.start - q.flat.start, o.flat.end - q.flat.start});
  return out;
}

json source_item(const manifest::PaperManifest& m, const Entity& e, const std::string& source) {
  std::vector<CharSpan> marks;
  json item = {{"source", source}};
  int page = -1;
  if (const auto* s = m.sentence(source)) {
    item["sentence"] = s->id;
    item["text"] = s->text;
    marks = sentence_highlights(m, e, *s);
    if (!s->boxes.empty()) page = s->boxes.front().page;
  } else if (const auto* q = m.equation(source)) {
    item["sentence"] = q->sentence;
    item["text"] = q->tex;
    marks = equation_highlights(e, *q);
    if (!q->boxes.empty()) page = q->boxes.front().page;
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  item["highlights"] = marks;
  item["page"] = page;
  return item;
}

}  // namespace

json list_json(const manifest::PaperManifest& m, std::string_view entity, std::string_view kind) {
  const Entity* e = m.entity(entity);
  if (!e) throw manifest::UnknownEntity("unknown entity " + std::string(entity));
  json items = json::array();
  if (kind == "usages") {
    for (const auto& s : m.usages_of(entity)) items.push_back(source_item(m, *e, s));
  } else {
    const bool formulae = kind == "formulae";
    for (const auto& d : m.definitions_of(entity)) {
      if ((d.kind == DefinitionKind::formula) != formulae) continue;
      json item = source_item(m, *e, d.source);
      item["definiens"] = d.definiens;
      item["kind"] = to_string(d.kind);
      item["position"] = d.position;
      items.push_back(std::move(item));
    }
  }
  return {{"entity", e->id}, {"kind", kind}, {"items", std::move(items)}};
}

json glossary_json(const manifest::PaperManifest& m) {
  json arr = json::array();
  for (const auto& g : manifest::build_glossary(m))
    arr.push_back({{"entity", g.entity},
                   {"tex", g.tex},
                   {"kind", to_string(g.kind)},
                   {"first_position", g.first_position},
                   {"definitions", g.definitions}});
  return {{"paper", m.paper}, {"entries", std::move(arr)}};
}

json declutter_json(const manifest::Declutter& d, std::string_view entity) {
  json pages = json::array();
  for (const auto& p : d.pages) pages.push_back({{"page", p.page}, {"keep", p.keep}});
  return {{"entity", entity},
          {"localized", d.localized},
          {"occurrences", d.occurrences},
          {"sentences", d.sentences},
          {"pages", std::move(pages)}};
}

// --- routing ---------------------------------------------------------------------------

namespace {

Response reply(int status, const json& body) { return {status, dump(body)}; }

Response error(int status, const std::string& code, const std::string& message) {
  return reply(status, {{"code", code}, {"message", message}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (at < path.size()) {
    std::size_t slash = path.find('/', at);
    if (slash == std::string::npos) slash = path.size();
    if (slash > at) out.push_back(path.substr(at, slash - at));
    at = slash + 1;
  }
  return out;
}

}  // namespace

Response Service::handle(const Request& req) const {
  if (req.method != "GET") return error(405, "method_not_allowed", "only GET is supported");
  const auto seg = split_path(req.path);
  if (seg.size() < 2 || seg[0] != "v1" || seg[1] != "papers")
    return error(404, "not_found", "no route for " + req.path);
  if (seg.size() == 2) return reply(200, {{"papers", store_.papers()}});

  const std::string& paper = seg[2];
  std::shared_ptr<const manifest::PaperManifest> m;
  try {
    m = store_.get(paper);
  } catch (const std::exception& e) {
    return error(500, "manifest_unavailable", e.what());
  }
  if (!m) return error(404, "unknown_paper", "unknown paper " + paper);

  const std::size_t n = seg.size();
  try {
    if (n == 4 && seg[3] == "entities") return reply(200, entities_json(*m));
    if (n == 4 && seg[3] == "glossary") return reply(200, glossary_json(*m));
    if (n == 5 && seg[3] == "declutter")
      return reply(200, declutter_json(manifest::declutter_regions(*m, seg[4]), seg[4]));
    if (n == 6 && seg[3] == "entities" && seg[5] == "definition") {
      auto q = req.query.find("pos");
      if (q == req.query.end()) return error(400, "bad_request", "missing pos parameter");
      std::size_t pos = 0;
      const std::string& v = q->second;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), pos);
      if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        return error(400, "bad_request", "pos must be a non-negative integer");
      json body = definition_view_json(manifest::select_definition(*m, seg[4], pos));
      body["entity"] = seg[4];
      body["position"] = pos;
      return reply(200, body);
    }
    if (n == 7 && seg[3] == "entities" && seg[5] == "lists") {
      if (seg[6] != "definitions" && seg[6] != "formulae" && seg[6] != "usages")
        return error(404, "unknown_list", "unknown list kind " + seg[6]);
      return reply(200, list_json(*m, seg[4], seg[6]));
    }
    if (n == 6 && seg[3] == "equations" && seg[5] == "diagram")
      return reply(200, diagram::to_json(diagram::plan_diagram(*m, seg[4])));
  } catch (const manifest::UnknownEntity& e) {
    return error(404, "unknown_entity", e.what());
  } catch (const diagram::UnknownEquation& e) {
    return error(404, "unknown_equation", e.what());
  } catch (const diagram::UnlocalizedEquation& e) {
    return error(409, "unlocalized_equation", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
  return error(404, "not_found", "no route for " + req.path);
}

void serve_http(const Service& service, const std::string& host, int port) {
  httplib::Server server;
  server.Get(R"(/.*)", [&](const httplib::Request& hr, httplib::Response& hres) {
    Request req;
    req.method = hr.method;
    req.path = hr.path;
    for (const auto& [k, v] : hr.params) req.query[k] = v;
    Response r = service.handle(req);
    hres.status = r.status;
    hres.set_content(r.body, "application/json");
  });
  auto reject = [&](const httplib::Request& hr, httplib::Response& hres) {
    Request req;
    req.method = hr.method;
    req.path = hr.path;
    Response r = service.handle(req);
    hres.status = r.status;
    hres.set_content(r.body, "application/json");
  };
  server.Post(R"(/.*)", reject);
  server.Put(R"(/.*)", reject);
  server.Delete(R"(/.*)", reject);
  if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace noncekit::serve
