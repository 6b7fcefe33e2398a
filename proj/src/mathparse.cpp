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

#include "noncekit/mathparse.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

namespace noncekit::mathparse {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::identifier: return "identifier";
    case NodeKind::op: return "operator";
    case NodeKind::number: return "number";
    case NodeKind::group: return "group";
    case NodeKind::script: return "script";
    case NodeKind::accent: return "accent";
    case NodeKind::function: return "function";
    case NodeKind::row: return "row";
  }
  return "?";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::none: return "";
    case Role::base: return "base";
    case Role::sub: return "sub";
    case Role::sup: return "sup";
    case Role::mark: return "mark";
    case Role::head: return "head";
    case Role::open: return "open";
    case Role::args: return "args";
    case Role::close: return "close";
  }
  return "?";
}

std::string_view to_string(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::simple: return "simple";
    case SymbolKind::script: return "script";
    case SymbolKind::accent: return "accent";
    case SymbolKind::function: return "function";
  }
  return "?";
}

const MathNode* MathNode::child(Role r) const {
  for (const auto& c : children)
    if (c.role == r) return &c;
  return nullptr;
}

namespace {

const std::set<std::string, std::less<>> kIdentifierCommands = {
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta", "theta",
    "vartheta", "iota", "kappa", "varkappa", "lambda", "mu", "nu", "xi", "omicron", "pi",
    "varpi", "rho", "varrho", "sigma", "varsigma", "tau", "upsilon", "phi", "varphi", "chi",
    "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon",
    "Phi", "Psi", "Omega", "ell", "hbar", "imath", "jmath", "aleph", "wp"};

const std::map<std::string, std::string, std::less<>> kAccentCommands = {
    {"hat", "hat"},         {"widehat", "hat"},  {"bar", "bar"},
    {"overline", "bar"},    {"tilde", "tilde"},  {"widetilde", "tilde"},
    {"vec", "vec"},         {"overrightarrow", "vec"}, {"dot", "dot"},
    {"ddot", "ddot"},       {"check", "check"},  {"breve", "breve"},
    {"acute", "acute"},     {"grave", "grave"},  {"mathring", "mathring"}};

// Font commands and the font they normalize to.
const std::map<std::string, std::string, std::less<>> kFontCommands = {
    {"mathrm", "mathrm"},   {"operatorname", "mathrm"}, {"mathbf", "mathbf"},
    {"mathit", ""},         {"mathsf", "mathsf"},       {"mathtt", "mathtt"},
    {"mathcal", "mathcal"}, {"mathbb", "mathbb"},       {"mathfrak", "mathfrak"},
    {"mathscr", "mathscr"}, {"boldsymbol", "mathbf"},   {"bm", "mathbf"},
    {"text", "mathrm"},     {"textrm", "mathrm"},       {"textit", ""},
    {"textbf", "mathbf"},   {"mbox", "mathrm"},         {"textsf", "mathsf"}};

const std::set<std::string, std::less<>> kTextFonts = {"text", "textrm", "textit", "textbf",
                                                        "mbox", "textsf"};

// Commands that only affect sizing or spacing.
const std::set<std::string, std::less<>> kSyntaxCommands = {
    "left", "right", "middle", "big", "Big", "bigg", "Bigg", "bigl", "bigr", "Bigl", "Bigr",
    "biggl", "biggr", "Biggl", "Biggr", "displaystyle", "textstyle", "scriptstyle",
    "scriptscriptstyle", "limits", "nolimits", ",", ";", ":", "!", " ", "quad", "qquad",
    "nonumber", "notag", "allowbreak", "nobreak", "hfill", "hspace", "vspace"};

// Commands whose braced argument is skipped with them.
const std::set<std::string, std::less<>> kArgSyntaxCommands = {"label", "tag", "begin", "end",
                                                               "hspace", "vspace"};

struct Token {
  enum Type { letter, number, command, lbrace, rbrace, sub, sup, op, end } type = end;
  std::string text;
  CharSpan span;
};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::size_t utf8_len(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    std::size_t start = i;
    if (c == '\\') {
      if (i + 1 >= s.size()) throw ParseError("dangling backslash", i);
      if (is_alpha(s[i + 1])) {
        i += 1;
        while (i < s.size() && is_alpha(s[i])) ++i;
      } else {
        i += 2;
      }
      t.type = Token::command;
    } else if (c == '{') {
      t.type = Token::lbrace;
      ++i;
    } else if (c == '}') {
      t.type = Token::rbrace;
      ++i;
    } else if (c == '_') {
      t.type = Token::sub;
      ++i;
    } else if (c == '^') {
      t.type = Token::sup;
      ++i;
    } else if (is_alpha(c)) {
      t.type = Token::letter;
      ++i;
    } else if (is_digit(c)) {
      t.type = Token::number;
      while (i < s.size() && is_digit(s[i])) ++i;
      if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
        ++i;
        while (i < s.size() && is_digit(s[i])) ++i;
      }
    } else if (c == ':' && i + 1 < s.size() && s[i + 1] == '=') {
      t.type = Token::op;
      i += 2;
    } else {
      t.type = Token::op;
      i += std::min(utf8_len(static_cast<unsigned char>(c)), s.size() - i);
    }
    t.span = {start, i};
    t.text = std::string(s.substr(start, i - start));
    out.push_back(std::move(t));
  }
  Token e;
  e.type = Token::end;
  e.span = {s.size(), s.size()};
  out.push_back(e);
  return out;
}

MathNode leaf(NodeKind kind, const Token& t) {
  MathNode n;
  n.kind = kind;
  n.text = t.text;
  n.span = t.span;
  return n;
}

CharSpan hull(const std::vector<MathNode>& nodes, std::size_t fallback) {
  if (nodes.empty()) return {fallback, fallback};
  return {nodes.front().span.start, nodes.back().span.end};
}

bool is_op(const MathNode& n, std::string_view text) {
  return n.kind == NodeKind::op && n.text == text;
}

const MathNode& unwrap(const MathNode& n) {
  const MathNode* p = &n;
  while ((p->kind == NodeKind::group || p->kind == NodeKind::row) && p->font.empty() &&
         p->children.size() == 1)
    p = &p->children.front();
  return *p;
}

bool eligible_head(const MathNode& n) {
  const MathNode& u = unwrap(n);
  switch (u.kind) {
    case NodeKind::identifier:
    case NodeKind::accent:
      return true;
    case NodeKind::script: {
      const MathNode* base = u.child(Role::base);
      return base && eligible_head(*base) && unwrap(*base).kind != NodeKind::script;
    }
    default:
      return false;
  }
}

// Extent of a node including the font command wrapping it, so that the
// source of "\mathrm{softmax}(S)" begins at the backslash.
CharSpan outer_span(std::string_view src, const MathNode& n) {
  if (n.font.empty() || (n.kind != NodeKind::identifier && n.kind != NodeKind::group)) return n.span;
  std::size_t p = n.span.start;
  auto skip_space = [&] {
    while (p > 0 && std::isspace(static_cast<unsigned char>(src[p - 1]))) --p;
  };
  skip_space();
  bool braced = false;
  if (n.kind == NodeKind::identifier && p > 0 && src[p - 1] == '{') {
    --p;
    braced = true;
    skip_space();
  }
  const std::size_t name_end = p;
  while (p > 0 && std::isalpha(static_cast<unsigned char>(src[p - 1]))) --p;
  if (p == name_end || p == 0 || src[p - 1] != '\\') return n.span;
  std::size_t end = n.span.end;
  if (braced) {
    while (end < src.size() && std::isspace(static_cast<unsigned char>(src[end]))) ++end;
    if (end >= src.size() || src[end] != '}') return n.span;
    ++end;
  }
  return {p - 1, end};
}

// Wraps "head ( ... )" runs into function nodes.
std::vector<MathNode> form_functions(std::string_view src, std::vector<MathNode> atoms) {
  std::vector<MathNode> out;
  std::size_t i = 0;
  while (i < atoms.size()) {
    if (i + 1 < atoms.size() && eligible_head(atoms[i]) && is_op(atoms[i + 1], "(")) {
      int depth = 0;
      std::size_t close = atoms.size();
      for (std::size_t j = i + 1; j < atoms.size(); ++j) {
        if (is_op(atoms[j], "(")) ++depth;
        if (is_op(atoms[j], ")") && --depth == 0) {
          close = j;
          break;
        }
      }
      if (close < atoms.size()) {
        MathNode fn;
        fn.kind = NodeKind::function;
        fn.span = {outer_span(src, atoms[i]).start, atoms[close].span.end};
        MathNode head = std::move(atoms[i]);
        head.role = Role::head;
        MathNode open = std::move(atoms[i + 1]);
        open.role = Role::open;
        std::vector<MathNode> inner(std::make_move_iterator(atoms.begin() + i + 2),
                                    std::make_move_iterator(atoms.begin() + close));
        MathNode args;
        args.kind = NodeKind::row;
        args.role = Role::args;
        args.children = form_functions(src, std::move(inner));
        args.span = hull(args.children, open.span.end);
        MathNode closer = std::move(atoms[close]);
        closer.role = Role::close;
        fn.children.push_back(std::move(head));
        fn.children.push_back(std::move(open));
        fn.children.push_back(std::move(args));
        fn.children.push_back(std::move(closer));
        out.push_back(std::move(fn));
        i = close + 1;
        continue;
      }
    }
    out.push_back(std::move(atoms[i]));
    ++i;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), toks_(tokenize(src)) {}

  MathTree parse() {
    MathTree tree;
    tree.source = std::string(src_);
    auto atoms = parse_row(false, 0);
    if (atoms.size() == 1) {
      tree.root = std::move(atoms.front());
      tree.root.role = Role::none;
    } else {
      tree.root.kind = NodeKind::row;
      tree.root.span = hull(atoms, 0);
      tree.root.children = std::move(atoms);
    }
    std::sort(syntax_.begin(), syntax_.end());
    tree.syntax = std::move(syntax_);
    return tree;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  std::string_view command_name(const Token& t) const {
    return std::string_view(t.text).substr(1);
  }

  // Parses atoms until '}' (in_group) or end of input.
  std::vector<MathNode> parse_row(bool in_group, std::size_t open_offset) {
    std::vector<MathNode> atoms;
    while (true) {
      const Token& t = peek();
      if (t.type == Token::end) {
        if (in_group) throw ParseError("unbalanced brace", open_offset);
        break;
      }
      if (t.type == Token::rbrace) {
        if (!in_group) throw ParseError("unmatched closing brace", t.span.start);
        break;
      }
      if (t.type == Token::sub || t.type == Token::sup) {
        attach_script(atoms);
        continue;
      }
      if (auto atom = parse_primary()) atoms.push_back(std::move(*atom));
    }
    return form_functions(src_, std::move(atoms));
  }

  void attach_script(std::vector<MathNode>& atoms) {
    const Token& marker = next();
    syntax_.push_back(marker.span);
    Role role = marker.type == Token::sub ? Role::sub : Role::sup;

    std::size_t arg_end = 0;
    MathNode arg = parse_script_arg(marker, arg_end);
    arg.role = role;

    if (!atoms.empty() && atoms.back().kind == NodeKind::script) {
      MathNode& s = atoms.back();
      if (s.child(role))
        throw ParseError(role == Role::sub ? "double subscript" : "double superscript",
                         marker.span.start);
      s.span.end = arg_end;
      s.children.push_back(std::move(arg));
      return;
    }
    MathNode base;
    if (atoms.empty()) {
      base.kind = NodeKind::group;
      base.span = {marker.span.start, marker.span.start};
    } else {
      base = std::move(atoms.back());
      atoms.pop_back();
    }
    base.role = Role::base;
    MathNode s;
    s.kind = NodeKind::script;
    s.span = {outer_span(src_, base).start, arg_end};
    s.children.push_back(std::move(base));
    s.children.push_back(std::move(arg));
    atoms.push_back(std::move(s));
  }

  MathNode parse_script_arg(const Token& marker, std::size_t& outer_end) {
    const Token& t = peek();
    switch (t.type) {
      case Token::end:
      case Token::rbrace:
      case Token::sub:
      case Token::sup:
        throw ParseError("dangling script marker", marker.span.start);
      case Token::number:
        if (t.text.size() > 1) {
          MathNode d = split_digit();
          outer_end = d.span.end;
          return d;
        }
        break;
      default:
        break;
    }
    // Spacing commands between the marker and its argument are skipped.
    while (peek().type == Token::command && kSyntaxCommands.count(command_name(peek()))) {
      syntax_.push_back(next().span);
      if (peek().type == Token::end || peek().type == Token::rbrace)
        throw ParseError("dangling script marker", marker.span.start);
    }
    auto arg = parse_primary();
    if (!arg) throw ParseError("dangling script marker", marker.span.start);
    outer_end = arg->span.end;
    return single_or_group(std::move(*arg));
  }

  // TeX takes one digit as a script argument: x^23 is x^{2}3.
  MathNode split_digit() {
    Token& t = toks_[pos_];
    MathNode n;
    n.kind = NodeKind::number;
    n.text = t.text.substr(0, 1);
    n.span = {t.span.start, t.span.start + 1};
    t.text.erase(0, 1);
    t.span.start += 1;
    return n;
  }

  static MathNode single_or_group(MathNode n) {
    if (n.kind == NodeKind::group && n.font.empty() && n.children.size() == 1) {
      MathNode inner = std::move(n.children.front());
      return inner;
    }
    return n;
  }

  MathNode parse_group() {
    const Token& open = next();
    syntax_.push_back(open.span);
    MathNode g;
    g.kind = NodeKind::group;
    g.children = parse_row(true, open.span.start);
    const Token& close = next();
    syntax_.push_back(close.span);
    g.span = {open.span.start, close.span.end};
    return g;
  }

  // Skips a balanced braced argument, recording it as syntax.
  void skip_braced(const Token& cmd) {
    if (peek().type != Token::lbrace) return;
    std::size_t start = peek().span.start;
    int depth = 0;
    while (true) {
      const Token& t = next();
      if (t.type == Token::end) throw ParseError("unbalanced brace", cmd.span.start);
      if (t.type == Token::lbrace) ++depth;
      if (t.type == Token::rbrace && --depth == 0) {
        syntax_.push_back({start, t.span.end});
        return;
      }
    }
  }

  std::optional<MathNode> parse_primary() {
    const Token& t = peek();
    switch (t.type) {
      case Token::letter:
        return leaf(NodeKind::identifier, next());
      case Token::number:
        return leaf(NodeKind::number, next());
      case Token::op:
        if (t.text == "~") {
          syntax_.push_back(next().span);
          return std::nullopt;
        }
        return leaf(NodeKind::op, next());
      case Token::lbrace:
        return parse_group();
      case Token::command:
        return parse_command();
      default:
        throw ParseError("unexpected token", t.span.start);
    }
  }

  std::optional<MathNode> parse_command() {
    const Token cmd = next();
    std::string_view name = command_name(cmd);

    if (kIdentifierCommands.count(name)) return leaf(NodeKind::identifier, cmd);

    if (auto it = kAccentCommands.find(name); it != kAccentCommands.end()) {
      MathNode mark = leaf(NodeKind::op, cmd);
      mark.role = Role::mark;
      if (peek().type == Token::end || peek().type == Token::rbrace)
        throw ParseError("accent without argument", cmd.span.start);
      auto base = parse_primary();
      if (!base) throw ParseError("accent without argument", cmd.span.start);
      std::size_t end = base->span.end;
      MathNode b = single_or_group(std::move(*base));
      b.role = Role::base;
      MathNode acc;
      acc.kind = NodeKind::accent;
      acc.text = std::string("\\") + it->second;
      acc.span = {cmd.span.start, end};
      acc.children.push_back(std::move(mark));
      acc.children.push_back(std::move(b));
      return acc;
    }

    if (auto it = kFontCommands.find(name); it != kFontCommands.end()) {
      syntax_.push_back(cmd.span);
      if (peek().type == Token::op && peek().text == "*") syntax_.push_back(next().span);
      return parse_font_arg(cmd, it->second, kTextFonts.count(name) > 0);
    }

    if (kArgSyntaxCommands.count(name)) {
      syntax_.push_back(cmd.span);
      std::string env;
      if (peek().type == Token::lbrace && name == "begin") {
        for (std::size_t k = pos_ + 1; toks_[k].type == Token::letter; ++k) env += toks_[k].text;
      }
      skip_braced(cmd);
      if (env == "array" || env == "tabular") skip_braced(cmd);
      return std::nullopt;
    }

    if (kSyntaxCommands.count(name)) {
      syntax_.push_back(cmd.span);
      return std::nullopt;
    }

    return leaf(NodeKind::op, cmd);
  }

  std::optional<MathNode> parse_font_arg(const Token& cmd, const std::string& font, bool text_mode) {
    if (peek().type != Token::lbrace) {
      if (peek().type == Token::end || peek().type == Token::rbrace)
        throw ParseError("font command without argument", cmd.span.start);
      auto arg = parse_primary();
      if (arg && arg->kind == NodeKind::identifier) arg->font = font;
      return arg;
    }
    // Find the matching brace to decide between a plain word and a group.
    std::size_t k = pos_ + 1;
    bool letters_only = true;
    int depth = 1;
    for (; toks_[k].type != Token::end; ++k) {
      if (toks_[k].type == Token::lbrace) ++depth;
      if (toks_[k].type == Token::rbrace && --depth == 0) break;
      if (toks_[k].type != Token::letter && toks_[k].type != Token::number) letters_only = false;
      if (text_mode && toks_[k].type == Token::op && toks_[k].text != "*") letters_only = false;
    }
    if (toks_[k].type == Token::end) throw ParseError("unbalanced brace", peek().span.start);

    const std::size_t first = pos_ + 1;
    const bool nonempty = k > first;
    const bool has_letter =
        std::any_of(toks_.begin() + first, toks_.begin() + k,
                    [](const Token& t) { return t.type == Token::letter; });
    if (nonempty && (letters_only || text_mode) && has_letter && (letters_only || !has_command(first, k))) {
      syntax_.push_back(toks_[pos_].span);
      MathNode id;
      id.kind = NodeKind::identifier;
      id.font = font;
      id.span = {toks_[first].span.start, toks_[k - 1].span.end};
      for (std::size_t j = first; j < k; ++j) id.text += toks_[j].text;
      if (text_mode && !letters_only)
        id.text = std::string(src_.substr(id.span.start, id.span.size()));
      pos_ = k + 1;
      syntax_.push_back(toks_[k].span);
      return id;
    }
    MathNode g = parse_group();
    g.font = font;
    g.text = std::string(command_name(cmd));
    return g;
  }

  bool has_command(std::size_t from, std::size_t to) const {
    for (std::size_t j = from; j < to; ++j)
      if (toks_[j].type == Token::command || toks_[j].type == Token::lbrace) return true;
    return false;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<CharSpan> syntax_;
};

// --- symbol extraction ---------------------------------------------------

bool is_word_letter(const MathNode& n) {
  return n.kind == NodeKind::identifier && n.font.empty() && n.text.size() == 1 &&
         is_alpha(n.text[0]);
}

bool symbol_base(const MathNode& n) {
  const MathNode& u = unwrap(n);
  switch (u.kind) {
    case NodeKind::identifier:
    case NodeKind::accent:
    case NodeKind::script:
      return true;
    case NodeKind::group:
    case NodeKind::row:
      return !u.children.empty() &&
             std::all_of(u.children.begin(), u.children.end(), is_word_letter);
    default:
      return false;
  }
}

class SymbolCollector {
 public:
  SymbolCollector(const MathTree& tree, std::string_view prefix) : tree_(tree), prefix_(prefix) {}

  std::vector<SymbolRecord> run() {
    visit(tree_.root, std::nullopt);
    return std::move(out_);
  }

 private:
  std::size_t add(SymbolKind kind, const MathNode& node, std::optional<std::size_t> parent) {
    SymbolRecord r;
    r.id = prefix_ + std::to_string(out_.size());
    r.kind = kind;
    r.tree = node;
    r.tree.role = Role::none;
    r.spans = {node.span};
    const CharSpan shown = outer_span(tree_.source, node);
    r.tex = tree_.source.substr(shown.start, shown.size());
    if (parent) r.parent = out_[*parent].id;
    r.normalized_key = normalize_symbol(r);
    out_.push_back(std::move(r));
    return out_.size() - 1;
  }

  std::vector<std::size_t> visit_children(const std::vector<MathNode>& kids,
                                          std::optional<std::size_t> parent) {
    std::vector<std::size_t> found;
    std::size_t i = 0;
    while (i < kids.size()) {
      std::size_t j = i;
      while (j < kids.size() && is_word_letter(kids[j])) ++j;
      if (j - i >= 2) {
        MathNode word;
        word.kind = NodeKind::identifier;
        word.span = {kids[i].span.start, kids[j - 1].span.end};
        for (std::size_t k = i; k < j; ++k) word.text += kids[k].text;
        found.push_back(add(SymbolKind::simple, word, parent));
        i = j;
        continue;
      }
      auto sub = visit(kids[i], parent);
      found.insert(found.end(), sub.begin(), sub.end());
      ++i;
    }
    return found;
  }

  std::vector<std::size_t> visit_each(const std::vector<MathNode>& kids,
                                      std::optional<std::size_t> parent) {
    std::vector<std::size_t> found;
    for (const auto& c : kids) {
      auto sub = visit(c, parent);
      found.insert(found.end(), sub.begin(), sub.end());
    }
    return found;
  }

  std::vector<std::size_t> visit(const MathNode& n, std::optional<std::size_t> parent) {
    switch (n.kind) {
      case NodeKind::identifier:
        return {add(SymbolKind::simple, n, parent)};
      case NodeKind::op:
      case NodeKind::number:
        return {};
      case NodeKind::group:
      case NodeKind::row:
        return visit_children(n.children, parent);
      case NodeKind::script: {
        const MathNode* base = n.child(Role::base);
        if (base && symbol_base(*base)) return {composite(SymbolKind::script, n, parent)};
        return visit_each(n.children, parent);
      }
      case NodeKind::accent: {
        const MathNode* base = n.child(Role::base);
        if (base && symbol_base(*base)) return {composite(SymbolKind::accent, n, parent)};
        return visit_each(n.children, parent);
      }
      case NodeKind::function:
        return {composite(SymbolKind::function, n, parent)};
    }
    return {};
  }

  std::size_t composite(SymbolKind kind, const MathNode& n, std::optional<std::size_t> parent) {
    std::size_t me = add(kind, n, parent);
    // Each role is visited on its own: letters in base and script never merge.
    std::vector<std::size_t> kids;
    for (const auto& c : n.children) {
      auto sub = visit(c, me);
      kids.insert(kids.end(), sub.begin(), sub.end());
    }
    for (auto k : kids) out_[me].children.push_back(out_[k].id);
    return me;
  }

  const MathTree& tree_;
  std::string prefix_;
  std::vector<SymbolRecord> out_;
};

bool ends_with_command_letter(const std::string& s) {
  if (s.empty() || !is_alpha(s.back())) return false;
  auto slash = s.rfind('\\');
  if (slash == std::string::npos) return false;
  for (std::size_t i = slash + 1; i < s.size(); ++i)
    if (!is_alpha(s[i])) return false;
  return true;
}

std::string join_canonical(const std::vector<MathNode>& kids) {
  std::string out;
  for (const auto& k : kids) {
    std::string piece = canonical_key(k);
    if (!piece.empty() && ends_with_command_letter(out) && is_alpha(piece.front())) out += ' ';
    out += piece;
  }
  return out;
}

std::string braced_canonical(const MathNode& n) {
  return "{" + canonical_key(n) + "}";
}

}  // namespace

MathTree parse_math_tree(std::string_view source) { return Parser(source).parse(); }

std::string describe(const MathNode& n) {
  auto join = [](const std::vector<MathNode>& kids) {
    std::string out;
    for (const auto& k : kids) {
      if (!out.empty()) out += ' ';
      out += describe(k);
    }
    return out;
  };
  std::string font = n.font.empty() ? "" : "@" + n.font;
  switch (n.kind) {
    case NodeKind::identifier: return "id:" + n.text + font;
    case NodeKind::op: return "op:" + n.text;
    case NodeKind::number: return "num:" + n.text;
    case NodeKind::group: return "{" + join(n.children) + "}" + font;
    case NodeKind::row: return "[" + join(n.children) + "]";
    case NodeKind::script: {
      std::string out = "script(";
      if (auto* b = n.child(Role::base)) out += describe(*b);
      if (auto* s = n.child(Role::sub)) out += " _" + describe(*s);
      if (auto* s = n.child(Role::sup)) out += " ^" + describe(*s);
      return out + ")";
    }
    case NodeKind::accent: {
      std::string out = "accent(" + n.text;
      if (auto* b = n.child(Role::base)) out += " " + describe(*b);
      return out + ")";
    }
    case NodeKind::function: {
      std::string out = "fn(";
      if (auto* h = n.child(Role::head)) out += describe(*h);
      if (auto* a = n.child(Role::args)) out += " " + describe(*a);
      return out + ")";
    }
  }
  return "?";
}

namespace {
void collect_leaves(const MathNode& n, std::vector<const MathNode*>& out) {
  if (n.is_leaf()) {
    out.push_back(&n);
    return;
  }
  for (const auto& c : n.children) collect_leaves(c, out);
}
}  // namespace

std::vector<const MathNode*> leaves(const MathNode& node) {
  std::vector<const MathNode*> out;
  collect_leaves(node, out);
  return out;
}

std::vector<SymbolRecord> extract_symbols(const MathTree& tree, std::string_view id_prefix) {
  return SymbolCollector(tree, id_prefix).run();
}

std::string canonical_key(const MathNode& node) {
  switch (node.kind) {
    case NodeKind::identifier:
    case NodeKind::number:
    case NodeKind::op: {
      std::string text;
      for (char c : node.text)
        if (!std::isspace(static_cast<unsigned char>(c))) text += c;
      if (node.kind == NodeKind::op && text == "\\coloneqq") text = ":=";
      if (!node.font.empty()) return "\\" + node.font + "{" + text + "}";
      return text;
    }
    case NodeKind::group:
    case NodeKind::row: {
      std::string inner = join_canonical(node.children);
      if (!node.font.empty()) return "\\" + node.font + "{" + inner + "}";
      return inner;
    }
    case NodeKind::script: {
      std::string out;
      const MathNode* base = node.child(Role::base);
      if (base) {
        const MathNode& u = unwrap(*base);
        std::string b = canonical_key(u);
        bool compound = (u.kind == NodeKind::group || u.kind == NodeKind::row) &&
                        u.font.empty() && u.children.size() > 1;
        out += compound ? "{" + b + "}" : b;
      }
      if (const MathNode* s = node.child(Role::sub)) out += "_" + braced_canonical(*s);
      if (const MathNode* s = node.child(Role::sup)) out += "^" + braced_canonical(*s);
      return out;
    }
    case NodeKind::accent: {
      const MathNode* base = node.child(Role::base);
      return node.text + (base ? braced_canonical(*base) : std::string("{}"));
    }
    case NodeKind::function: {
      const MathNode* head = node.child(Role::head);
      const MathNode* args = node.child(Role::args);
      return (head ? canonical_key(*head) : std::string()) + "(" +
             (args ? canonical_key(*args) : std::string()) + ")";
    }
  }
  return {};
}

std::string normalize_symbol(const SymbolRecord& record) { return canonical_key(record.tree); }

bool is_definition_operator(std::string_view op) {
  static const std::array<std::string_view, 8> ops = {
      "=", ":=", "\\coloneqq", "\\equiv", "\\triangleq", "\\doteq", "\\leftarrow", "\\coloneq"};
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

std::vector<std::vector<const MathNode*>> definition_lhs(const MathTree& tree) {
  std::vector<const MathNode*> atoms;
  if (tree.root.kind == NodeKind::row && tree.root.font.empty()) {
    for (const auto& c : tree.root.children) atoms.push_back(&c);
  } else {
    atoms.push_back(&tree.root);
  }
  std::vector<std::vector<const MathNode*>> out;
  std::vector<const MathNode*> line;
  bool found = false;
  auto flush = [&] {
    line.clear();
    found = false;
  };
  for (const MathNode* a : atoms) {
    if (is_op(*a, "\\\\")) {
      flush();
      continue;
    }
    if (found) continue;
    if (a->kind == NodeKind::op && is_definition_operator(a->text)) {
      out.push_back(line);
      found = true;
      continue;
    }
    if (!is_op(*a, "&")) line.push_back(a);
  }
  return out;
}

// --- macros ------------------------------------------------------------------

namespace {

using Seq = std::vector<std::pair<char, CharSpan>>;

bool complex_body(std::string_view body) {
  for (std::string_view bad : {"\\if", "\\else", "\\fi", "\\csname", "\\expandafter",
                               "\\futurelet", "\\@"}) {
    if (body.find(bad) != std::string_view::npos) return true;
  }
  return false;
}

// Reads a balanced {...} group starting at s[i] == '{'; returns contents and
// advances i past the closing brace. Returns nullopt when unbalanced.
std::optional<std::string> read_braced(std::string_view s, std::size_t& i) {
  if (i >= s.size() || s[i] != '{') return std::nullopt;
  int depth = 0;
  std::size_t start = i + 1;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (s[j] == '\\') {
      ++j;
      continue;
    }
    if (s[j] == '{') ++depth;
    if (s[j] == '}' && --depth == 0) {
      i = j + 1;
      return std::string(s.substr(start, j - start));
    }
  }
  return std::nullopt;
}

void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

std::optional<std::string> read_command_name(std::string_view s, std::size_t& i) {
  if (i >= s.size() || s[i] != '\\') return std::nullopt;
  std::size_t j = i + 1;
  while (j < s.size() && is_alpha(s[j])) ++j;
  if (j == i + 1) return std::nullopt;
  std::string name(s.substr(i + 1, j - i - 1));
  i = j;
  return name;
}

}  // namespace

CharSpan Expansion::map_back(CharSpan expanded) const {
  if (origin.empty()) return expanded;
  if (expanded.empty()) {
    std::size_t at = std::min(expanded.start, origin.size() - 1);
    return {origin[at].start, origin[at].start};
  }
  CharSpan out = origin[expanded.start];
  for (std::size_t k = expanded.start; k < expanded.end && k < origin.size(); ++k) {
    out.start = std::min(out.start, origin[k].start);
    out.end = std::max(out.end, origin[k].end);
  }
  return out;
}

MacroTable MacroTable::collect(std::string_view doc) {
  MacroTable table;
  std::size_t i = 0;
  while ((i = doc.find('\\', i)) != std::string_view::npos) {
    std::size_t at = i;
    auto cmd = read_command_name(doc, i);
    if (!cmd) {
      i = at + 2;
      continue;
    }
    if (*cmd == "newcommand" || *cmd == "renewcommand" || *cmd == "providecommand") {
      if (i < doc.size() && doc[i] == '*') ++i;
      skip_ws(doc, i);
      std::optional<std::string> name;
      if (i < doc.size() && doc[i] == '{') {
        ++i;
        skip_ws(doc, i);
        name = read_command_name(doc, i);
        skip_ws(doc, i);
        if (i >= doc.size() || doc[i] != '}') continue;
        ++i;
      } else {
        name = read_command_name(doc, i);
      }
      if (!name) continue;
      MacroDef def;
      def.name = *name;
      skip_ws(doc, i);
      if (i < doc.size() && doc[i] == '[') {
        auto close = doc.find(']', i);
        if (close == std::string_view::npos) continue;
        def.nargs = std::atoi(std::string(doc.substr(i + 1, close - i - 1)).c_str());
        i = close + 1;
        skip_ws(doc, i);
        if (i < doc.size() && doc[i] == '[') {
          close = doc.find(']', i);
          if (close == std::string_view::npos) continue;
          def.default_arg = std::string(doc.substr(i + 1, close - i - 1));
          i = close + 1;
          skip_ws(doc, i);
        }
      }
      auto body = read_braced(doc, i);
      if (!body || complex_body(*body) || def.nargs < 0 || def.nargs > 9) continue;
      def.body = *body;
      table.add(std::move(def));
    } else if (*cmd == "def") {
      auto name = read_command_name(doc, i);
      if (!name) continue;
      MacroDef def;
      def.name = *name;
      while (i + 1 < doc.size() && doc[i] == '#' && is_digit(doc[i + 1])) {
        def.nargs = doc[i + 1] - '0';
        i += 2;
      }
      skip_ws(doc, i);
      auto body = read_braced(doc, i);
      if (!body || complex_body(*body)) continue;
      def.body = *body;
      table.add(std::move(def));
    } else if (*cmd == "DeclareMathOperator") {
      bool star = i < doc.size() && doc[i] == '*';
      if (star) ++i;
      skip_ws(doc, i);
      auto inner = read_braced(doc, i);
      if (!inner) continue;
      std::size_t k = 0;
      auto name = read_command_name(*inner, k);
      skip_ws(doc, i);
      auto text = read_braced(doc, i);
      if (!name || !text) continue;
      MacroDef def;
      def.name = *name;
      def.body = std::string("\\operatorname") + (star ? "*" : "") + "{" + *text + "}";
      table.add(std::move(def));
    }
  }
  return table;
}

void MacroTable::add(MacroDef def) {
  for (auto& d : defs_) {
    if (d.name == def.name) {
      d = std::move(def);
      return;
    }
  }
  defs_.push_back(std::move(def));
}

const MacroDef* MacroTable::find(std::string_view name) const {
  for (const auto& d : defs_)
    if (d.name == name) return &d;
  return nullptr;
}

namespace {

CharSpan seq_hull(const Seq& s, std::size_t from, std::size_t to) {
  CharSpan h = s[from].second;
  for (std::size_t k = from; k < to; ++k) {
    h.start = std::min(h.start, s[k].second.start);
    h.end = std::max(h.end, s[k].second.end);
  }
  return h;
}

void skip_ws(const Seq& s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i].first))) ++i;
}

// Reads one macro argument: a braced group (contents only) or one token.
Seq read_arg(const Seq& s, std::size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) return {};
  if (s[i].first == '{') {
    int depth = 0;
    std::size_t start = i + 1;
    for (std::size_t j = i; j < s.size(); ++j) {
      if (s[j].first == '\\') {
        ++j;
        continue;
      }
      if (s[j].first == '{') ++depth;
      if (s[j].first == '}' && --depth == 0) {
        i = j + 1;
        return Seq(s.begin() + start, s.begin() + j);
      }
    }
    Seq rest(s.begin() + start, s.end());
    i = s.size();
    return rest;
  }
  std::size_t start = i;
  if (s[i].first == '\\') {
    ++i;
    if (i < s.size() && is_alpha(s[i].first)) {
      while (i < s.size() && is_alpha(s[i].first)) ++i;
    } else if (i < s.size()) {
      ++i;
    }
  } else {
    ++i;
  }
  return Seq(s.begin() + start, s.begin() + i);
}

Seq expand_seq(const MacroTable& table, const Seq& in, int depth) {
  Seq out;
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i].first != '\\' || i + 1 >= in.size()) {
      out.push_back(in[i++]);
      continue;
    }
    if (!is_alpha(in[i + 1].first)) {
      out.push_back(in[i]);
      out.push_back(in[i + 1]);
      i += 2;
      continue;
    }
    std::size_t j = i + 1;
    std::string name;
    while (j < in.size() && is_alpha(in[j].first)) name += in[j++].first;
    const MacroDef* def = depth > 0 ? table.find(name) : nullptr;
    if (!def) {
      out.insert(out.end(), in.begin() + i, in.begin() + j);
      i = j;
      continue;
    }
    std::vector<Seq> args;
    std::size_t k = j;
    for (int a = 0; a < def->nargs; ++a) {
      if (a == 0 && def->default_arg) {
        std::size_t probe = k;
        skip_ws(in, probe);
        if (probe < in.size() && in[probe].first == '[') {
          std::size_t close = probe;
          while (close < in.size() && in[close].first != ']') ++close;
          args.emplace_back(in.begin() + probe + 1, in.begin() + std::min(close, in.size()));
          k = std::min(close + 1, in.size());
        } else {
          // Default-argument characters have no source origin; they inherit
          // the invocation span when substituted.
          args.emplace_back();
          for (char c : *def->default_arg) args.back().push_back({c, CharSpan{}});
        }
        continue;
      }
      args.push_back(read_arg(in, k));
    }
    CharSpan call = seq_hull(in, i, k);
    Seq body;
    const std::string& b = def->body;
    for (std::size_t p = 0; p < b.size(); ++p) {
      if (b[p] == '#' && p + 1 < b.size() && is_digit(b[p + 1])) {
        int idx = b[p + 1] - '1';
        if (idx >= 0 && idx < static_cast<int>(args.size())) {
          for (auto pr : args[idx]) {
            if (pr.second.empty()) pr.second = call;
            body.push_back(pr);
          }
        }
        ++p;
        continue;
      }
      if (b[p] == '#' && p + 1 < b.size() && b[p + 1] == '#') ++p;
      body.push_back({b[p], call});
    }
    // Keep a separator so "\foo x" does not fuse into "\barx".
    if (k < in.size() && is_alpha(in[k].first) && !body.empty() && is_alpha(body.back().first))
      body.push_back({' ', call});
    Seq expanded = expand_seq(table, body, depth - 1);
    out.insert(out.end(), expanded.begin(), expanded.end());
    i = k;
  }
  return out;
}

}  // namespace

Expansion MacroTable::expand(std::string_view source, int max_depth) const {
  Seq seq;
  seq.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) seq.push_back({source[i], {i, i + 1}});
  if (!defs_.empty()) seq = expand_seq(*this, seq, max_depth);
  Expansion e;
  e.text.reserve(seq.size());
  e.origin.reserve(seq.size());
  for (auto& [c, o] : seq) {
    e.text += c;
    e.origin.push_back(o);
  }
  return e;
}

}  // namespace noncekit::mathparse
