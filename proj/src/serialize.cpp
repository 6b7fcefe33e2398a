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

#include "noncekit/serialize.hpp"

namespace noncekit {

void to_json(json& j, const CharSpan& s) { j = json::array({s.start, s.end}); }
void from_json(const json& j, CharSpan& s) {
  if (!j.is_array() || j.size() != 2) throw json::type_error::create(302, "span must be [start, end]", &j);
  s.start = j[0].get<std::size_t>();
  s.end = j[1].get<std::size_t>();
}

void to_json(json& j, const TexSpan& s) { j = {{"file", s.file}, {"start", s.start}, {"end", s.end}}; }
void from_json(const json& j, TexSpan& s) {
  j.at("file").get_to(s.file);
  j.at("start").get_to(s.start);
  j.at("end").get_to(s.end);
}

void to_json(json& j, const BoundingBox& b) {
  j = {{"page", b.page}, {"left", b.left}, {"top", b.top}, {"width", b.width}, {"height", b.height}};
}
void from_json(const json& j, BoundingBox& b) {
  j.at("page").get_to(b.page);
  j.at("left").get_to(b.left);
  j.at("top").get_to(b.top);
  j.at("width").get_to(b.width);
  j.at("height").get_to(b.height);
}

void to_json(json& j, const Occurrence& o) {
  j = {{"id", o.id},         {"span", o.span},         {"flat", o.flat},
       {"sentence", o.sentence}, {"equation", o.equation}, {"children", o.children},
       {"composed", o.composed}, {"boxes", o.boxes}};
  j["parent"] = o.parent ? json(*o.parent) : json(nullptr);
}
void from_json(const json& j, Occurrence& o) {
  j.at("id").get_to(o.id);
  j.at("span").get_to(o.span);
  j.at("flat").get_to(o.flat);
  j.at("sentence").get_to(o.sentence);
  j.at("equation").get_to(o.equation);
  j.at("children").get_to(o.children);
  j.at("composed").get_to(o.composed);
  j.at("boxes").get_to(o.boxes);
  const auto& p = j.at("parent");
  o.parent = p.is_null() ? std::nullopt : std::optional<std::string>(p.get<std::string>());
}

void to_json(json& j, const Entity& e) {
  j = {{"id", e.id}, {"kind", to_string(e.kind)}, {"key", e.key}, {"tex", e.tex},
       {"occurrences", e.occurrences}};
}
void from_json(const json& j, Entity& e) {
  j.at("id").get_to(e.id);
  e.kind = entity_kind_from(j.at("kind").get<std::string>());
  j.at("key").get_to(e.key);
  j.at("tex").get_to(e.tex);
  j.at("occurrences").get_to(e.occurrences);
}

void to_json(json& j, const DefinitionRecord& d) {
  j = {{"definiendum", d.definiendum}, {"definiens", d.definiens}, {"kind", to_string(d.kind)},
       {"source", d.source},           {"position", d.position}};
}
void from_json(const json& j, DefinitionRecord& d) {
  j.at("definiendum").get_to(d.definiendum);
  j.at("definiens").get_to(d.definiens);
  d.kind = definition_kind_from(j.at("kind").get<std::string>());
  j.at("source").get_to(d.source);
  j.at("position").get_to(d.position);
}

void to_json(json& j, const EquationRecord& e) {
  j = {{"id", e.id},           {"span", e.span},       {"flat", e.flat},
       {"tex", e.tex},         {"display", e.display}, {"sentence", e.sentence},
       {"symbols", e.symbols}, {"tree", e.tree},       {"boxes", e.boxes}};
}
void from_json(const json& j, EquationRecord& e) {
  j.at("id").get_to(e.id);
  j.at("span").get_to(e.span);
  j.at("flat").get_to(e.flat);
  j.at("tex").get_to(e.tex);
  j.at("display").get_to(e.display);
  j.at("sentence").get_to(e.sentence);
  j.at("symbols").get_to(e.symbols);
  j.at("tree").get_to(e.tree);
  j.at("boxes").get_to(e.boxes);
}

namespace texscan {

void to_json(json& j, const MathPlaceholder& m) {
  j = {{"equation", m.equation}, {"offset", m.offset}, {"length", m.length}};
}
void from_json(const json& j, MathPlaceholder& m) {
  j.at("equation").get_to(m.equation);
  j.at("offset").get_to(m.offset);
  j.at("length").get_to(m.length);
}

void to_json(json& j, const SentenceRecord& s) {
  j = {{"id", s.id},     {"flat", s.flat}, {"span", s.span},
       {"text", s.text}, {"math", s.math}, {"boxes", s.boxes}};
}
void from_json(const json& j, SentenceRecord& s) {
  j.at("id").get_to(s.id);
  j.at("flat").get_to(s.flat);
  j.at("span").get_to(s.span);
  j.at("text").get_to(s.text);
  j.at("math").get_to(s.math);
  j.at("boxes").get_to(s.boxes);
}

}  // namespace texscan

namespace mathparse {

namespace {

template <typename E>
E enum_from(std::string_view s, E last) {
  for (int k = 0; k <= static_cast<int>(last); ++k)
    if (to_string(static_cast<E>(k)) == s) return static_cast<E>(k);
  throw Error("unknown enum value " + std::string(s));
}

}  // namespace

void to_json(json& j, const MathNode& n) {
  j = {{"kind", to_string(n.kind)}, {"role", to_string(n.role)}, {"span", n.span}};
  if (!n.text.empty()) j["text"] = n.text;
  if (!n.font.empty()) j["font"] = n.font;
  if (!n.children.empty()) j["children"] = n.children;
}
void from_json(const json& j, MathNode& n) {
  n.kind = enum_from(j.at("kind").get<std::string>(), NodeKind::row);
  n.role = enum_from(j.at("role").get<std::string>(), Role::close);
  j.at("span").get_to(n.span);
  n.text = j.value("text", "");
  n.font = j.value("font", "");
  n.children.clear();
  if (j.contains("children")) j.at("children").get_to(n.children);
}

}  // namespace mathparse

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace noncekit
