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
#include <string_view>
#include <vector>

#include "noncekit/mathparse.hpp"
#include "noncekit/model.hpp"

namespace noncekit::defextract {

// --- abbreviations (Schwartz-Hearst) ----------------------------------------------

struct Abbreviation {
  std::string short_form;
  std::string long_form;
  std::size_t short_offset = 0;  // into the sentence text
  std::size_t long_offset = 0;
};

// Maximum long-form length in words for a short form: min(n + 5, 2n) where
// n counts the short form's letters and digits.
std::size_t long_form_window(std::string_view short_form);

// Whether a parenthesized string qualifies as a short form: 2-10 characters,
// at most two words, at least one letter, starting with a letter or digit.
bool is_short_form_candidate(std::string_view s);

// Right-to-left match of short_form against candidate. Every letter/digit of
// the short form must appear in order; its first character must start a
// word. Returns the offset in candidate where the long form begins.
std::optional<std::size_t> match_long_form(std::string_view candidate, std::string_view short_form);

// All "long form (SF)" pairs in a sentence's plain text. Parentheses inside
// $...$ math are ignored.
std::vector<Abbreviation> find_abbreviations(std::string_view text);

std::vector<DefinitionRecord> extract_abbreviations(const std::vector<SentenceRecord>& sentences);

// --- symbols -----------------------------------------------------------------------

// equation id -> entity id of the single symbol making up the whole equation.
using LoneSymbols = std::map<std::string, std::string>;

// Noun phrase right before a lone-symbol placeholder ("The encoder $E$"), and
// copula phrases after one ("$k$ is the number of components").
std::vector<DefinitionRecord> extract_symbol_definitions(const std::vector<SentenceRecord>& sentences,
                                                         const LoneSymbols& lone);

// An equation parsed for symbol extraction.
struct ParsedEquation {
  std::string id;
  std::size_t position = 0;
  std::string tex;
  mathparse::MathTree tree;
  std::vector<mathparse::SymbolRecord> symbols;
  std::map<std::string, std::string> entity_of;  // symbol record id -> entity id
};

// Parses tex and keys each symbol by symbol_entity_id(normalized_key).
ParsedEquation parse_equation(std::string id, std::size_t position, std::string_view tex);

// The entity whose single top-level symbol spans the entire equation.
std::optional<std::string> lone_symbol(const ParsedEquation& eq);

// Equations whose left-hand side (before a definition operator) is exactly
// one symbol define that symbol.
std::vector<DefinitionRecord> extract_defining_formulae(const std::vector<ParsedEquation>& equations);

// --- usages ------------------------------------------------------------------------

// Sentences containing each entity's occurrences, in document order.
UsageIndex index_usages(const std::vector<Entity>& entities,
                        const std::vector<SentenceRecord>& sentences);

// Sorts per definition_order and drops repeats of (definiendum, kind, source).
void normalize_definitions(std::vector<DefinitionRecord>& defs);

}  // namespace noncekit::defextract
