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

// JSON mappings for the shared records. Spans are [start, end] pairs.

#include "json.hpp"
#include "noncekit/model.hpp"

namespace noncekit {

using json = nlohmann::json;

void to_json(json& j, const CharSpan& s);
void from_json(const json& j, CharSpan& s);
void to_json(json& j, const TexSpan& s);
void from_json(const json& j, TexSpan& s);
void to_json(json& j, const BoundingBox& b);
void from_json(const json& j, BoundingBox& b);
void to_json(json& j, const Occurrence& o);
void from_json(const json& j, Occurrence& o);
void to_json(json& j, const Entity& e);
void from_json(const json& j, Entity& e);
void to_json(json& j, const DefinitionRecord& d);
void from_json(const json& j, DefinitionRecord& d);
void to_json(json& j, const EquationRecord& e);
void from_json(const json& j, EquationRecord& e);

namespace texscan {
void to_json(json& j, const MathPlaceholder& m);
void from_json(const json& j, MathPlaceholder& m);
void to_json(json& j, const SentenceRecord& s);
void from_json(const json& j, SentenceRecord& s);
}  // namespace texscan

namespace mathparse {
void to_json(json& j, const MathNode& n);
void from_json(const json& j, MathNode& n);
}  // namespace mathparse

// Pretty-printed with a trailing newline; key order is sorted so output is
// byte-stable.
std::string dump(const json& j);

}  // namespace noncekit
