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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noncekit/common.hpp"

namespace noncekit::mathparse {

enum class NodeKind { identifier, op, number, group, script, accent, function, row };

// Position of a node relative to its parent.
enum class Role { none, base, sub, sup, mark, head, open, args, close };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Role role);

struct MathNode {
  NodeKind kind = NodeKind::row;
  Role role = Role::none;
  // Leaves: the token text ("x", "\alpha", "softmax", "+").
  // Accents: the accent command. Font groups: the font command name.
  std::string text;
  // Font applied to an identifier or group ("mathrm", "mathbf", ...), if any.
  std::string font;
  CharSpan span;
  std::vector<MathNode> children;

  bool is_leaf() const {
    return kind == NodeKind::identifier || kind == NodeKind::op || kind == NodeKind::number;
  }
  // Child with the given role, or nullptr.
  const MathNode* child(Role r) const;
  friend bool operator==(const MathNode&, const MathNode&) = default;
};

struct MathTree {
  MathNode root;
  std::string source;
  // Source-syntax spans that produced no leaf: group braces, script markers,
  // font/sizing/spacing command names.
  std::vector<CharSpan> syntax;
};

// Compact structural rendering, e.g. "script(id:x _id:i)". Spans omitted.
std::string describe(const MathNode& node);

// Leaves in document order.
std::vector<const MathNode*> leaves(const MathNode& node);

// Parses a TeX math fragment. Unknown commands become opaque operator leaves.
// Throws ParseError on unbalanced braces or dangling/double script markers.
MathTree parse_math_tree(std::string_view source);

enum class SymbolKind { simple, script, accent, function };
std::string_view to_string(SymbolKind kind);

struct SymbolRecord {
  std::string id;
  SymbolKind kind = SymbolKind::simple;
  std::string tex;
  std::vector<CharSpan> spans;
  std::string normalized_key;
  std::optional<std::string> parent;
  std::vector<std::string> children;
  // Snapshot of the subtree the symbol was read from. Merged words are
  // represented by a single synthetic identifier node.
  MathNode tree;
};

// Every simple and composite symbol in pre-order, parents before children.
// Ids are id_prefix followed by a running index.
std::vector<SymbolRecord> extract_symbols(const MathTree& tree, std::string_view id_prefix = "s");

// Canonical key: invariant under redundant grouping, whitespace and the
// order in which sub/superscripts were written.
std::string normalize_symbol(const SymbolRecord& record);
std::string canonical_key(const MathNode& node);

// Definition operators recognized at the top level of an equation.
bool is_definition_operator(std::string_view op);

// Splits a tree at top-level definition operators. Returns the atoms to the
// left of the first such operator on each line ("\\" separates lines);
// lines without an operator are skipped.
std::vector<std::vector<const MathNode*>> definition_lhs(const MathTree& tree);

// --- macro expansion pre-pass ------------------------------------------------

struct MacroDef {
  std::string name;  // without the backslash
  int nargs = 0;
  std::optional<std::string> default_arg;
  std::string body;
};

// Expanded text plus, for every output character, the span of source
// characters it came from. Characters produced by a macro body map to the
// whole invocation; characters passed through arguments keep their origin.
struct Expansion {
  std::string text;
  std::vector<CharSpan> origin;

  CharSpan map_back(CharSpan expanded) const;
};

class MacroTable {
 public:
  // Collects \newcommand/\renewcommand/\providecommand/\def/\DeclareMathOperator
  // definitions. Bodies using conditionals or \csname are skipped.
  static MacroTable collect(std::string_view document);

  void add(MacroDef def);
  bool empty() const { return defs_.empty(); }
  std::size_t size() const { return defs_.size(); }
  const MacroDef* find(std::string_view name) const;

  Expansion expand(std::string_view source, int max_depth = 8) const;

 private:
  std::vector<MacroDef> defs_;
};

}  // namespace noncekit::mathparse
