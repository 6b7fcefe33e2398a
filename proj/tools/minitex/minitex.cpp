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

#include "minitex.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace minitex {

namespace {

const std::vector<GlyphData> kGlyphs = {
#include "font_data.inc"
};

constexpr int kMarginLeft = 150;
constexpr int kTextWidth = kPageWidth - 2 * kMarginLeft;
constexpr int kMarginTop = 150;
constexpr int kBottomLimit = kPageHeight - 150;
constexpr int kSpace[2] = {6, 4};

struct Ch {
  char c;
  Origin o;
};
using Stream = std::vector<Ch>;

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw TexError("! LaTeX Error: File `" + p.string() + "' not found.");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- loading ---------------------------------------------------------------------

class Loader {
 public:
  Loader(std::filesystem::path dir, Document& doc) : dir_(std::move(dir)), doc_(doc) {}

  void load(const std::string& rel, Stream& out, int depth) {
    if (depth > 20) throw TexError("! TeX capacity exceeded (\\input nesting)");
    int file = static_cast<int>(doc_.files.size());
    doc_.files.push_back(rel);
    const std::string text = read_all(dir_ / rel);
    std::size_t i = 0;
    while (i < text.size()) {
      char c = text[i];
      if (c == '%') {
        while (i < text.size() && text[i] != '\n') ++i;
        ++i;
        continue;
      }
      if (c == '\\' && i + 1 < text.size() && is_letter(text[i + 1])) {
        std::size_t j = i + 1;
        while (j < text.size() && is_letter(text[j])) ++j;
        std::string name = text.substr(i + 1, j - i - 1);
        if ((name == "input" || name == "include") && j < text.size() && text[j] == '{') {
          std::size_t close = text.find('}', j);
          if (close == std::string::npos) throw TexError("! Runaway argument in \\input");
          std::string target = text.substr(j + 1, close - j - 1);
          if (std::filesystem::path(target).extension().empty()) target += ".tex";
          load(target, out, depth + 1);
          i = close + 1;
          continue;
        }
        for (std::size_t k = i; k < j; ++k) out.push_back({text[k], {file, int(k)}});
        i = j;
        continue;
      }
      if (c == '\\' && i + 1 < text.size()) {
        out.push_back({c, {file, int(i)}});
        out.push_back({text[i + 1], {file, int(i + 1)}});
        i += 2;
        continue;
      }
      out.push_back({c, {file, int(i)}});
      ++i;
    }
  }

 private:
  std::filesystem::path dir_;
  Document& doc_;
};

// --- stream helpers -----------------------------------------------------------------

std::size_t group_end(const Stream& s, std::size_t open, std::size_t end) {
  int depth = 0;
  for (std::size_t j = open; j < end; ++j) {
    char c = s[j].c;
    if (c == '\\') {
      ++j;
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}' && --depth == 0) return j;
  }
  throw TexError("! File ended while scanning use of a group (missing })");
}

std::string command_at(const Stream& s, std::size_t i, std::size_t end, std::size_t& next) {
  std::size_t j = i + 1;
  if (j >= end) {
    next = j;
    return "";
  }
  if (is_letter(s[j].c)) {
    while (j < end && is_letter(s[j].c)) ++j;
  } else {
    ++j;
  }
  std::string name;
  for (std::size_t k = i + 1; k < j; ++k) name += s[k].c;
  next = j;
  return name;
}

void skip_spaces(const Stream& s, std::size_t& i, std::size_t end) {
  while (i < end && is_space(s[i].c)) ++i;
}

bool skip_optional(const Stream& s, std::size_t& i, std::size_t end) {
  std::size_t j = i;
  skip_spaces(s, j, end);
  if (j >= end || s[j].c != '[') return false;
  for (std::size_t k = j; k < end; ++k) {
    if (s[k].c == ']') {
      i = k + 1;
      return true;
    }
  }
  throw TexError("! Runaway optional argument");
}

std::string plain(const Stream& s, std::size_t a, std::size_t b) {
  std::string out;
  for (std::size_t k = a; k < b; ++k) out += s[k].c;
  return out;
}

// Range of a mandatory argument: a group's interior or a single token.
std::pair<std::size_t, std::size_t> argument(const Stream& s, std::size_t& i, std::size_t end) {
  skip_spaces(s, i, end);
  if (i >= end) throw TexError("! Missing argument");
  if (s[i].c == '{') {
    std::size_t close = group_end(s, i, end);
    std::pair<std::size_t, std::size_t> r{i + 1, close};
    i = close + 1;
    return r;
  }
  if (s[i].c == '\\') {
    std::size_t next;
    command_at(s, i, end, next);
    std::pair<std::size_t, std::size_t> r{i, next};
    i = next;
    return r;
  }
  std::pair<std::size_t, std::size_t> r{i, i + 1};
  ++i;
  return r;
}

// --- macros ---------------------------------------------------------------------------

struct Macro {
  int nargs = 0;
  Stream body;
};

void collect_macros(const Stream& s, std::size_t end, std::map<std::string, Macro>& macros) {
  for (std::size_t i = 0; i < end;) {
    if (s[i].c != '\\') {
      ++i;
      continue;
    }
    std::size_t j;
    std::string cmd = command_at(s, i, end, j);
    if (cmd == "newcommand" || cmd == "renewcommand" || cmd == "providecommand") {
      if (j < end && s[j].c == '*') ++j;
      skip_spaces(s, j, end);
      std::string name;
      if (j < end && s[j].c == '{') {
        std::size_t close = group_end(s, j, end);
        name = plain(s, j + 1, close);
        j = close + 1;
      } else {
        std::size_t k;
        name = "\\" + command_at(s, j, end, k);
        j = k;
      }
      Macro m;
      skip_spaces(s, j, end);
      if (j < end && s[j].c == '[') {
        std::size_t close = j;
        while (close < end && s[close].c != ']') ++close;
        m.nargs = std::stoi(plain(s, j + 1, close));
        j = close + 1;
      }
      skip_optional(s, j, end);
      auto body = argument(s, j, end);
      m.body.assign(s.begin() + long(body.first), s.begin() + long(body.second));
      macros[name.substr(1)] = std::move(m);
      i = j;
      continue;
    }
    if (cmd == "def") {
      std::size_t k;
      std::string name = command_at(s, j, end, k);
      j = k;
      Macro m;
      while (j < end && s[j].c == '#') {
        ++m.nargs;
        j += 2;
      }
      auto body = argument(s, j, end);
      m.body.assign(s.begin() + long(body.first), s.begin() + long(body.second));
      macros[name] = std::move(m);
      i = j;
      continue;
    }
    if (cmd == "DeclareMathOperator") {
      if (j < end && s[j].c == '*') ++j;
      auto name = argument(s, j, end);
      auto text = argument(s, j, end);
      Macro m;
      Origin o = s[i].o;
      for (char c : std::string("\\operatorname{")) m.body.push_back({c, o});
      m.body.insert(m.body.end(), s.begin() + long(text.first), s.begin() + long(text.second));
      m.body.push_back({'}', o});
      std::string n = plain(s, name.first, name.second);
      macros[n.substr(1)] = std::move(m);
      i = j;
      continue;
    }
    i = j;
  }
}

// Expands macros in place. Expanded text takes the origin of the invocation.
void expand_macros(Stream& s, std::size_t from, const std::map<std::string, Macro>& macros) {
  int budget = 20000;
  std::size_t i = from;
  while (i < s.size()) {
    if (s[i].c != '\\') {
      ++i;
      continue;
    }
    std::size_t j;
    std::string name = command_at(s, i, s.size(), j);
    auto it = macros.find(name);
    if (it == macros.end()) {
      i = j;
      continue;
    }
    if (--budget < 0) throw TexError("! TeX capacity exceeded (macro recursion)");
    std::vector<Stream> args;
    for (int a = 0; a < it->second.nargs; ++a) {
      auto r = argument(s, j, s.size());
      args.emplace_back(s.begin() + long(r.first), s.begin() + long(r.second));
    }
    Stream out;
    const Origin o = s[i].o;
    const Stream& body = it->second.body;
    for (std::size_t k = 0; k < body.size(); ++k) {
      if (body[k].c == '#' && k + 1 < body.size() && std::isdigit(static_cast<unsigned char>(body[k + 1].c))) {
        int n = body[k + 1].c - '1';
        if (n >= 0 && n < int(args.size())) out.insert(out.end(), args[n].begin(), args[n].end());
        ++k;
        continue;
      }
      out.push_back({body[k].c, o});
    }
    s.erase(s.begin() + long(i), s.begin() + long(j));
    s.insert(s.begin() + long(i), out.begin(), out.end());
  }
}

// --- boxes ------------------------------------------------------------------------------

struct Glyph {
  const GlyphData* g;
  int x;
  int dy;  // baseline shift, positive is down
  std::uint32_t color;
  Origin o;
};

struct HBox {
  int width = 0, ascent = 0, descent = 0;
  std::vector<Glyph> glyphs;

  void append(const HBox& b, int dy = 0) {
    for (Glyph g : b.glyphs) {
      g.x += width;
      g.dy += dy;
      glyphs.push_back(g);
    }
    width += b.width;
    ascent = std::max(ascent, b.ascent - dy);
    descent = std::max(descent, b.descent + dy);
  }
  void pad(int w) { width += w; }
};

enum class ItemKind { box, space, par, line, display, vskip };

struct Item {
  ItemKind kind;
  HBox box;
  std::vector<HBox> rows;
  int amount = 0;
};

std::uint32_t decode_utf8(const Stream& s, std::size_t& i, std::size_t end) {
  unsigned char c = static_cast<unsigned char>(s[i].c);
  int extra = c < 0x80 ? 0 : (c >> 5) == 6 ? 1 : (c >> 4) == 14 ? 2 : (c >> 3) == 30 ? 3 : 0;
  std::uint32_t cp = extra == 0 ? c : extra == 1 ? (c & 0x1F) : extra == 2 ? (c & 0x0F) : (c & 0x07);
  ++i;
  for (int k = 0; k < extra && i < end; ++k, ++i)
    cp = (cp << 6) | (static_cast<unsigned char>(s[i].c) & 0x3F);
  return cp;
}

const std::map<std::string, std::uint32_t>& symbol_table() {
  static const std::map<std::string, std::uint32_t> t = [] {
    std::map<std::string, std::uint32_t> m;
    const char* greek[] = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
                           "iota", "kappa", "lambda", "mu", "nu", "xi", "omicron", "pi", "rho",
                           "", "sigma", "tau", "upsilon", "phi", "chi", "psi", "omega"};
    for (int k = 0; k < 25; ++k) {
      if (!*greek[k]) continue;
      m[greek[k]] = 0x3B1 + k;
      std::string cap = greek[k];
      cap[0] = static_cast<char>(std::toupper(cap[0]));
      m[cap] = 0x391 + k;
    }
    m["varepsilon"] = 0x3B5;
    m["varphi"] = 0x3C6;
    m["vartheta"] = 0x3B8;
    m["leq"] = m["le"] = 0x2264;
    m["geq"] = m["ge"] = 0x2265;
    m["neq"] = m["ne"] = 0x2260;
    m["in"] = 0x2208;
    m["notin"] = 0x2209;
    m["sum"] = 0x2211;
    m["prod"] = 0x220F;
    m["cdot"] = 0xB7;
    m["times"] = 0xD7;
    m["to"] = m["rightarrow"] = 0x2192;
    m["leftarrow"] = m["gets"] = 0x2190;
    m["leftrightarrow"] = 0x2194;
    m["Rightarrow"] = m["implies"] = 0x21D2;
    m["equiv"] = 0x2261;
    m["triangleq"] = 0x225C;
    m["doteq"] = 0x2250;
    m["infty"] = 0x221E;
    m["partial"] = 0x2202;
    m["nabla"] = 0x2207;
    m["approx"] = 0x2248;
    m["sim"] = 0x223C;
    m["pm"] = 0xB1;
    m["forall"] = 0x2200;
    m["exists"] = 0x2203;
    m["int"] = 0x222B;
    m["ldots"] = m["cdots"] = m["dots"] = 0x2026;
    m["cup"] = 0x222A;
    m["cap"] = 0x2229;
    m["subset"] = 0x2282;
    m["subseteq"] = 0x2286;
    m["emptyset"] = 0x2205;
    m["ell"] = 0x2113;
    m["prime"] = 0x2032;
    m["ast"] = 0x2217;
    m["circ"] = 0x2218;
    m["langle"] = 0x27E8;
    m["rangle"] = 0x27E9;
    m["Vert"] = m["|"] = 0x2016;
    m["mid"] = m["vert"] = m["lvert"] = m["rvert"] = '|';
    m["{"] = m["lbrace"] = '{';
    m["}"] = m["rbrace"] = '}';
    for (const char* e : {"%", "$", "#", "&", "_"}) m[e] = static_cast<unsigned char>(e[0]);
    return m;
  }();
  return t;
}

bool is_relation(std::uint32_t cp) {
  switch (cp) {
    case '=': case '<': case '>': case 0x2264: case 0x2265: case 0x2260: case 0x2208:
    case 0x2209: case 0x2192: case 0x2190: case 0x2194: case 0x21D2: case 0x2261: case 0x225C:
    case 0x2250: case 0x2248: case 0x223C: case 0x2282: case 0x2286:
      return true;
    default:
      return false;
  }
}

bool is_binary(std::uint32_t cp) {
  return cp == '+' || cp == '-' || cp == 0xB7 || cp == 0xD7 || cp == 0xB1 || cp == 0x222A ||
         cp == 0x2229;
}

// --- typesetter -------------------------------------------------------------------------

class Typesetter {
 public:
  Typesetter(const Stream& s, Document& doc) : s_(s), doc_(doc) {}

  void run(std::size_t start, std::size_t end) {
    colors_.push_back(0);
    text(start, end);
    layout();
  }

 private:
  std::uint32_t color() const { return colors_.back(); }

  HBox glyph_box(std::uint32_t cp, int size, Origin o) {
    HBox b;
    const GlyphData* g = find_glyph(cp, size);
    if (!g) g = find_glyph('?', size);
    b.width = g->advance;
    b.ascent = g->top;
    b.descent = std::max(0, g->height - g->top);
    b.glyphs.push_back({g, 0, 0, color(), o});
    return b;
  }

  HBox word_box(const std::string& w, int size, Origin o) {
    HBox b;
    for (char c : w) b.append(glyph_box(static_cast<unsigned char>(c), size, o));
    return b;
  }

  void push_box(HBox b) { items_.push_back({ItemKind::box, std::move(b), {}, 0}); }
  void push(ItemKind k, int amount = 0) { items_.push_back({k, {}, {}, amount}); }

  std::uint32_t parse_color(std::size_t& i, std::size_t end) {
    std::string model;
    skip_spaces(s_, i, end);
    if (i < end && s_[i].c == '[') {
      std::size_t close = i;
      while (close < end && s_[close].c != ']') ++close;
      model = plain(s_, i + 1, close);
      i = close + 1;
    }
    auto spec = argument(s_, i, end);
    std::string v = plain(s_, spec.first, spec.second);
    if (model == "RGB") {
      int r = 0, g = 0, b = 0;
      if (std::sscanf(v.c_str(), "%d,%d,%d", &r, &g, &b) != 3)
        throw TexError("! Package xcolor Error: bad RGB specification " + v);
      return std::uint32_t(r & 255) | (std::uint32_t(g & 255) << 8) | (std::uint32_t(b & 255) << 16);
    }
    if (v == "red") return 0x0000FF;
    if (v == "blue") return 0xFF0000;
    if (v == "green") return 0x008000;
    return 0;
  }

  // --- text mode ---
  void text(std::size_t i, std::size_t end) {
    while (i < end) {
      char c = s_[i].c;
      if (is_space(c)) {
        int newlines = 0;
        while (i < end && is_space(s_[i].c)) newlines += s_[i++].c == '\n';
        push(newlines >= 2 ? ItemKind::par : ItemKind::space);
        continue;
      }
      if (c == '$') {
        if (i + 1 < end && s_[i + 1].c == '$') {
          std::size_t close = find_seq(i + 2, end, "$$");
          display(i + 2, close);
          i = close + 2;
        } else {
          std::size_t close = find_seq(i + 1, end, "$");
          push_box(math_list(i + 1, close, 0, false));
          i = close + 1;
        }
        continue;
      }
      if (c == '{') {
        std::size_t close = group_end(s_, i, end);
        colors_.push_back(color());
        text(i + 1, close);
        colors_.pop_back();
        i = close + 1;
        continue;
      }
      if (c == '}') throw TexError("! Too many }'s.");
      if (c == '&') throw TexError("! Misplaced alignment tab character &.");
      if (c == '^' || c == '_') throw TexError("! Missing $ inserted.");
      if (c == '#') throw TexError("! You can't use `macro parameter character #' in horizontal mode.");
      if (c == '~') {
        HBox b;
        b.pad(kSpace[0]);
        push_box(b);
        ++i;
        continue;
      }
      if (c == '\\') {
        i = text_command(i, end);
        continue;
      }
      Origin o = s_[i].o;
      std::uint32_t cp = decode_utf8(s_, i, end);
      push_box(glyph_box(cp, 0, o));
    }
  }

  std::size_t find_seq(std::size_t from, std::size_t end, std::string_view seq) {
    for (std::size_t j = from; j + seq.size() <= end; ++j) {
      if (s_[j].c == '\\') {
        ++j;
        continue;
      }
      bool ok = true;
      for (std::size_t k = 0; k < seq.size() && ok; ++k) ok = s_[j + k].c == seq[k];
      if (ok) return j;
    }
    throw TexError("! Missing $ inserted (unterminated math)");
  }

  std::size_t find_end_env(std::size_t from, std::size_t end, const std::string& env) {
    const std::string marker = "\\end{" + env + "}";
    for (std::size_t j = from; j + marker.size() <= end; ++j) {
      bool ok = true;
      for (std::size_t k = 0; k < marker.size() && ok; ++k) ok = s_[j + k].c == marker[k];
      if (ok) return j;
    }
    throw TexError("! LaTeX Error: \\begin{" + env + "} ended by end of file.");
  }

  static bool math_env(const std::string& e) {
    static const char* envs[] = {"equation", "align", "gather", "multline", "eqnarray",
                                 "displaymath", "flalign", "alignat"};
    std::string base = e;
    if (!base.empty() && base.back() == '*') base.pop_back();
    for (const char* x : envs)
      if (base == x) return true;
    return false;
  }

  void heading(std::size_t& i, std::size_t end, int before, int after) {
    if (i < end && s_[i].c == '*') ++i;
    skip_optional(s_, i, end);
    auto r = argument(s_, i, end);
    push(ItemKind::vskip, before);
    colors_.push_back(color());
    text(r.first, r.second);
    colors_.pop_back();
    push(ItemKind::vskip, after);
  }

  std::size_t text_command(std::size_t i, std::size_t end) {
    std::size_t j;
    std::string name = command_at(s_, i, end, j);
    Origin o = s_[i].o;
    if (name == "(") {
      std::size_t close = find_seq(j, end, "\\)");
      push_box(math_list(j, close, 0, false));
      return close + 2;
    }
    if (name == "[") {
      std::size_t close = find_seq(j, end, "\\]");
      display(j, close);
      return close + 2;
    }
    if (name == "\\") {
      skip_optional(s_, j, end);
      push(ItemKind::line);
      return j;
    }
    if (name.size() == 1 && !is_letter(name[0])) {
      auto& t = symbol_table();
      auto it = t.find(name);
      if (it != t.end()) {
        push_box(glyph_box(it->second, 0, o));
      } else if (name == " " || name == ",") {
        push(ItemKind::space);
      }
      return j;
    }
    if (name == "begin" || name == "end") {
      auto r = argument(s_, j, end);
      std::string env = plain(s_, r.first, r.second);
      if (name == "begin" && math_env(env)) {
        if (env.rfind("alignat", 0) == 0) argument(s_, j, end);
        std::size_t close = find_end_env(j, end, env);
        display(j, close);
        return close + env.size() + 6;
      }
      if (name == "begin" && env == "math") {
        std::size_t close = find_end_env(j, end, env);
        push_box(math_list(j, close, 0, false));
        return close + env.size() + 6;
      }
      if (name == "begin" && env == "verbatim") return find_end_env(j, end, env) + env.size() + 6;
      if (name == "begin") skip_optional(s_, j, end);
      push(ItemKind::par);
      return j;
    }
    if (name == "section" || name == "title") {
      heading(j, end, 24, 8);
      return j;
    }
    if (name == "subsection" || name == "subsubsection" || name == "paragraph" ||
        name == "author" || name == "date" || name == "chapter" || name == "part") {
      heading(j, end, 16, 6);
      return j;
    }
    if (name == "caption") {
      skip_optional(s_, j, end);
      auto r = argument(s_, j, end);
      push(ItemKind::par);
      colors_.push_back(color());
      text(r.first, r.second);
      colors_.pop_back();
      push(ItemKind::par);
      return j;
    }
    if (name == "cite" || name == "citep" || name == "citet" || name == "ref" ||
        name == "eqref" || name == "autoref" || name == "cref") {
      skip_optional(s_, j, end);
      skip_optional(s_, j, end);
      argument(s_, j, end);
      std::string shown = name.rfind("cite", 0) == 0 ? "[1]" : name == "eqref" ? "(1)" : "1";
      push_box(word_box(shown, 0, o));
      return j;
    }
    if (name == "label" || name == "vspace" || name == "hspace" || name == "usepackage" ||
        name == "documentclass" || name == "bibliographystyle" || name == "bibliography" ||
        name == "includegraphics" || name == "url" || name == "thanks") {
      if (j < end && s_[j].c == '*') ++j;
      skip_optional(s_, j, end);
      argument(s_, j, end);
      return j;
    }
    if (name == "textbf" || name == "emph" || name == "textit" || name == "textsc" ||
        name == "textrm" || name == "textsf" || name == "underline" || name == "mbox" ||
        name == "text" || name == "footnote") {
      auto r = argument(s_, j, end);
      colors_.push_back(color());
      text(r.first, r.second);
      colors_.pop_back();
      return j;
    }
    if (name == "color") {
      colors_.back() = parse_color(j, end);
      return j;
    }
    if (name == "textcolor") {
      std::uint32_t c = parse_color(j, end);
      auto r = argument(s_, j, end);
      colors_.push_back(c);
      text(r.first, r.second);
      colors_.pop_back();
      return j;
    }
    if (name == "item") {
      skip_optional(s_, j, end);
      push(ItemKind::par);
      HBox indent;
      indent.pad(20);
      push_box(indent);
      push(ItemKind::space);
      return j;
    }
    if (name == "par") {
      push(ItemKind::par);
      return j;
    }
    if (name == "newline" || name == "linebreak") {
      push(ItemKind::line);
      return j;
    }
    if (name == "medskip" || name == "bigskip" || name == "smallskip") {
      push(ItemKind::vskip, name == "bigskip" ? 24 : name == "medskip" ? 12 : 6);
      return j;
    }
    if (name == "LaTeX" || name == "TeX") {
      push_box(word_box(name, 0, o));
      return j;
    }
    auto& t = symbol_table();
    if (auto it = t.find(name); it != t.end()) {
      push_box(glyph_box(it->second, 0, o));
      return j;
    }
    return j;  // layout-neutral or unsupported
  }

  void display(std::size_t start, std::size_t end) {
    Item item{ItemKind::display, {}, {}, 0};
    std::size_t row = start;
    int depth = 0;
    for (std::size_t k = start; k < end; ++k) {
      char c = s_[k].c;
      if (c == '{') ++depth;
      if (c == '}') --depth;
      if (c != '\\') continue;
      if (k + 1 < end && s_[k + 1].c == '\\' && depth == 0) {
        item.rows.push_back(math_list(row, k, 0, false));
        row = k + 2;
      }
      ++k;
    }
    item.rows.push_back(math_list(row, end, 0, false));
    items_.push_back(std::move(item));
  }

  // --- math mode ---
  HBox math_list(std::size_t i, std::size_t end, int size, bool keep_spaces) {
    HBox out;
    while (i < end) {
      if (is_space(s_[i].c)) {
        if (keep_spaces) out.pad(kSpace[size]);
        while (i < end && is_space(s_[i].c)) ++i;
        continue;
      }
      char c = s_[i].c;
      if (c == '}') throw TexError("! Too many }'s.");
      if (c == '$') throw TexError("! Display math should end with $$.");
      if (c == '#') throw TexError("! You can't use `macro parameter character #' in math mode.");
      HBox atom;
      if (c != '_' && c != '^') atom = math_atom(i, end, size, keep_spaces);
      // Scripts.
      std::optional<HBox> sub, sup;
      while (true) {
        std::size_t k = i;
        skip_spaces(s_, k, end);
        if (k >= end || (s_[k].c != '_' && s_[k].c != '^')) break;
        bool is_sub = s_[k].c == '_';
        ++k;
        if ((is_sub && sub) || (!is_sub && sup))
          throw TexError(is_sub ? "! Double subscript." : "! Double superscript.");
        HBox arg = math_arg(k, end, 1);
        (is_sub ? sub : sup) = std::move(arg);
        i = k;
      }
      if (sub || sup) {
        int up = size == 0 ? 8 : 5, down = size == 0 ? 6 : 4;
        HBox scripts;
        int base_w = atom.width;
        HBox combined = atom;
        int w = 0;
        if (sup) {
          HBox t;
          t.pad(base_w);
          t.append(*sup, -up);
          for (auto& g : t.glyphs) combined.glyphs.push_back(g);
          combined.ascent = std::max(combined.ascent, sup->ascent + up);
          w = std::max(w, sup->width);
        }
        if (sub) {
          HBox t;
          t.pad(base_w);
          t.append(*sub, down);
          for (auto& g : t.glyphs) combined.glyphs.push_back(g);
          combined.descent = std::max(combined.descent, sub->descent + down);
          w = std::max(w, sub->width);
        }
        combined.width = base_w + w + 1;
        atom = std::move(combined);
      }
      out.append(atom);
    }
    return out;
  }

  HBox math_arg(std::size_t& i, std::size_t end, int size) {
    skip_spaces(s_, i, end);
    if (i >= end) throw TexError("! Missing { inserted.");
    if (s_[i].c == '{') return math_atom(i, end, size, false);
    if (s_[i].c == '\\') return math_atom(i, end, size, false);
    Origin o = s_[i].o;
    std::uint32_t cp = decode_utf8(s_, i, end);
    return glyph_box(cp, size, o);
  }

  HBox spaced(HBox b, int before, int after) {
    HBox out;
    out.pad(before);
    out.append(b);
    out.pad(after);
    return out;
  }

  HBox math_atom(std::size_t& i, std::size_t end, int size, bool keep_spaces) {
    char c = s_[i].c;
    Origin o = s_[i].o;
    if (c == '{') {
      std::size_t close = group_end(s_, i, end);
      colors_.push_back(color());
      HBox b = math_list(i + 1, close, size, keep_spaces);
      colors_.pop_back();
      i = close + 1;
      return b;
    }
    if (c == '\\') return math_command(i, end, size, keep_spaces);
    if (c == '&') {
      ++i;
      HBox b;
      b.pad(8);
      return b;
    }
    if (c == '\'') {
      ++i;
      return glyph_box(0x2032, 1, o);
    }
    std::uint32_t cp = decode_utf8(s_, i, end);
    HBox b = glyph_box(cp, size, o);
    int unit = size == 0 ? 5 : 3;
    if (is_relation(cp)) return spaced(b, unit, unit);
    if (is_binary(cp)) return spaced(b, unit - 1, unit - 1);
    if (cp == ',' || cp == ';') return spaced(b, 0, unit - 2);
    return b;
  }

  HBox math_command(std::size_t& i, std::size_t end, int size, bool keep_spaces) {
    std::size_t j;
    Origin o = s_[i].o;
    std::string name = command_at(s_, i, end, j);
    i = j;
    HBox empty;
    int unit = size == 0 ? 5 : 3;
    if (name == "color") {
      colors_.back() = parse_color(i, end);
      return empty;
    }
    if (name == "," || name == ":" || name == ";" || name == " " || name == "quad" ||
        name == "qquad" || name == "!") {
      static const std::map<std::string, int> widths = {
          {",", 3}, {":", 4}, {";", 5}, {" ", 5}, {"quad", 18}, {"qquad", 36}, {"!", 0}};
      empty.pad(widths.at(name));
      return empty;
    }
    if (name == "\\") return empty;  // row break outside a display: ignored
    static const std::map<std::string, std::uint32_t> accents = {
        {"hat", 0x2C6}, {"widehat", 0x2C6}, {"check", 0x2C6}, {"breve", 0x2C6},
        {"acute", 0x2C6}, {"grave", 0x2C6}, {"bar", 0xAF},   {"overline", 0xAF},
        {"tilde", 0x2DC}, {"widetilde", 0x2DC}, {"vec", 0x2192}, {"dot", 0xB7},
        {"ddot", 0xB7}};
    if (auto a = accents.find(name); a != accents.end()) {
      HBox arg = math_arg(i, end, size);
      const GlyphData* g = find_glyph(a->second, 1);
      HBox out = arg;
      int dy = -arg.ascent - 2 + g->top - g->height;
      int x = std::max(0, (arg.width - g->advance) / 2);
      out.glyphs.push_back({g, x, dy, color(), o});
      out.ascent = arg.ascent + 2 + g->height;
      out.width = std::max(arg.width, g->advance);
      return out;
    }
    if (name == "mathrm" || name == "mathbf" || name == "mathit" || name == "mathsf" ||
        name == "mathtt" || name == "mathcal" || name == "mathbb" || name == "mathfrak" ||
        name == "boldsymbol" || name == "bm") {
      return math_arg(i, end, size);
    }
    if (name == "text" || name == "mbox" || name == "textrm" || name == "textit" ||
        name == "textbf" || name == "operatorname") {
      auto r = argument(s_, i, end);
      colors_.push_back(color());
      HBox b = math_list(r.first, r.second, size, name != "operatorname");
      colors_.pop_back();
      return b;
    }
    if (name == "frac" || name == "dfrac" || name == "tfrac") {
      HBox num = math_arg(i, end, 1);
      HBox den = math_arg(i, end, 1);
      HBox out;
      int w = std::max(num.width, den.width) + 4;
      HBox n;
      n.pad((w - num.width) / 2);
      n.append(num, -9);
      HBox d;
      d.pad((w - den.width) / 2);
      d.append(den, 12);
      for (auto& g : n.glyphs) out.glyphs.push_back(g);
      for (auto& g : d.glyphs) out.glyphs.push_back(g);
      out.width = w;
      out.ascent = std::max(n.ascent, 10);
      out.descent = std::max(d.descent, 0);
      return spaced(out, 1, 1);
    }
    if (name == "sqrt") {
      skip_optional(s_, i, end);
      HBox arg = math_arg(i, end, size);
      HBox out = glyph_box(0x221A, size, o);
      out.append(arg);
      return out;
    }
    if (name == "left" || name == "right" || name == "middle" || name == "bigl" ||
        name == "bigr" || name == "Bigl" || name == "Bigr" || name == "big" || name == "Big" ||
        name == "bigg" || name == "Bigg" || name == "biggl" || name == "biggr") {
      std::size_t k = i;
      skip_spaces(s_, k, end);
      if (k < end && s_[k].c == '.') i = k + 1;
      return empty;
    }
    if (name == "label" || name == "tag") {
      argument(s_, i, end);
      return empty;
    }
    if (name == "coloneqq" || name == "coloneq") {
      HBox b = glyph_box(':', size, o);
      b.append(glyph_box('=', size, o));
      return spaced(b, unit, unit);
    }
    static const char* named_ops[] = {"log", "ln",  "sin", "cos", "tan", "exp", "min", "max",
                                      "lim", "arg", "det", "dim", "ker", "Pr",  "sup", "inf",
                                      "argmax", "argmin"};
    for (const char* op : named_ops)
      if (name == op) return spaced(word_box(name, size, o), 0, 2);
    auto& t = symbol_table();
    if (auto it = t.find(name); it != t.end()) {
      HBox b = glyph_box(it->second, size, o);
      if (is_relation(it->second)) return spaced(b, unit, unit);
      if (is_binary(it->second)) return spaced(b, unit - 1, unit - 1);
      return b;
    }
    return empty;  // displaystyle, nonumber and anything unsupported
  }

  // --- page layout ---
  struct Line {
    std::vector<std::pair<int, HBox>> parts;
    int width = 0;
  };

  void layout() {
    page_ = 0;
    y_ = kMarginTop;
    Line line;
    HBox word;
    bool word_open = false, pending_space = false;

    auto commit_word = [&] {
      if (!word_open) return;
      int gap = line.parts.empty() ? 0 : (pending_space ? kSpace[0] : 0);
      if (!line.parts.empty() && line.width + gap + word.width > kTextWidth) {
        place(line, false);
        line = Line{};
        gap = 0;
      }
      line.parts.emplace_back(line.width + gap, word);
      line.width += gap + word.width;
      word = HBox{};
      word_open = false;
      pending_space = false;
    };
    auto flush = [&] {
      commit_word();
      if (!line.parts.empty()) place(line, false);
      line = Line{};
      pending_space = false;
    };

    for (const Item& it : items_) {
      switch (it.kind) {
        case ItemKind::box:
          word.append(it.box);
          word_open = true;
          break;
        case ItemKind::space:
          commit_word();
          if (!line.parts.empty()) pending_space = true;
          break;
        case ItemKind::par:
          flush();
          y_ += 10;
          break;
        case ItemKind::line:
          flush();
          break;
        case ItemKind::vskip:
          flush();
          y_ += it.amount;
          break;
        case ItemKind::display:
          flush();
          y_ += 6;
          for (const HBox& row : it.rows) {
            Line l;
            l.parts.emplace_back(0, row);
            l.width = row.width;
            place(l, true);
          }
          y_ += 6;
          break;
      }
    }
    flush();
    doc_.pages = page_ + 1;
  }

  void place(const Line& line, bool center) {
    int ascent = 20, descent = 8;
    for (const auto& [x, b] : line.parts) {
      ascent = std::max(ascent, b.ascent);
      descent = std::max(descent, b.descent);
    }
    int baseline = y_ + ascent;
    if (baseline + descent > kBottomLimit && y_ > kMarginTop) {
      ++page_;
      y_ = kMarginTop;
      baseline = y_ + ascent;
    }
    int x0 = kMarginLeft + (center ? std::max(0, (kTextWidth - line.width) / 2) : 0);
    for (const auto& [x, b] : line.parts) {
      for (const Glyph& g : b.glyphs) {
        PlacedGlyph pg;
        pg.page = page_;
        pg.x = x0 + x + g.x + g.g->left;
        pg.y = baseline + g.dy - g.g->top;
        pg.glyph = g.g;
        pg.color = g.color;
        pg.origin = g.o;
        doc_.glyphs.push_back(pg);
      }
    }
    y_ = baseline + descent + 2;
  }

  const Stream& s_;
  Document& doc_;
  std::vector<std::uint32_t> colors_;
  std::vector<Item> items_;
  int page_ = 0;
  int y_ = 0;
};

}  // namespace

const GlyphData* find_glyph(std::uint32_t code, int size) {
  static const std::unordered_map<std::uint64_t, const GlyphData*> index = [] {
    std::unordered_map<std::uint64_t, const GlyphData*> m;
    for (const auto& g : kGlyphs) m[(std::uint64_t(g.size) << 32) | g.code] = &g;
    return m;
  }();
  auto it = index.find((std::uint64_t(size) << 32) | code);
  return it == index.end() ? nullptr : it->second;
}

Document typeset(const std::filesystem::path& dir, const std::string& main_file) {
  Document doc;
  Stream s;
  Loader(dir, doc).load(main_file, s, 0);
  const std::string begin = "\\begin{document}";
  const std::string finish = "\\end{document}";
  auto find = [&](const std::string& m, std::size_t from) -> std::size_t {
    for (std::size_t j = from; j + m.size() <= s.size(); ++j) {
      bool ok = true;
      for (std::size_t k = 0; k < m.size() && ok; ++k) ok = s[j + k].c == m[k];
      if (ok) return j;
    }
    return std::string::npos;
  };
  std::size_t b = find(begin, 0);
  if (b == std::string::npos) throw TexError("! LaTeX Error: Missing \\begin{document}.");
  std::map<std::string, Macro> macros;
  collect_macros(s, b, macros);
  std::size_t body = b + begin.size();
  expand_macros(s, body, macros);
  std::size_t e = find(finish, body);
  if (e == std::string::npos) throw TexError("! Emergency stop (missing \\end{document}).");
  Typesetter(s, doc).run(body, e);
  return doc;
}

std::vector<std::vector<std::uint32_t>> render(const Document& doc) {
  const std::uint32_t white = 0xFFFFFF;
  std::vector<std::vector<std::uint32_t>> pages(
      doc.pages, std::vector<std::uint32_t>(std::size_t(kPageWidth) * kPageHeight, white));
  for (const auto& pg : doc.glyphs) {
    auto& px = pages[pg.page];
    for (int r = 0; r < pg.glyph->height; ++r) {
      const char* row = pg.glyph->rows[r];
      for (int c = 0; c < pg.glyph->width; ++c) {
        if (row[c] != '1') continue;
        int x = pg.x + c, y = pg.y + r;
        if (x < 0 || y < 0 || x >= kPageWidth || y >= kPageHeight) continue;
        px[std::size_t(y) * kPageWidth + x] = pg.color;
      }
    }
  }
  return pages;
}

void write_pdf(const std::filesystem::path& path,
               const std::vector<std::vector<std::uint32_t>>& pages) {
  std::string out = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
  std::vector<std::size_t> offsets;
  auto begin_obj = [&](int n) {
    offsets.resize(std::max<std::size_t>(offsets.size(), n + 1));
    offsets[n] = out.size();
    out += std::to_string(n) + " 0 obj\n";
  };
  const int n = static_cast<int>(pages.size());
  begin_obj(1);
  out += "<< /Type /Catalog /Pages 2 0 R >>\nendobj\n";
  begin_obj(2);
  out += "<< /Type /Pages /Kids [";
  for (int p = 0; p < n; ++p) out += std::to_string(3 + 3 * p) + " 0 R ";
  out += "] /Count " + std::to_string(n) + " >>\nendobj\n";
  const std::string content = "q 612 0 0 792 0 0 cm /Im0 Do Q\n";
  for (int p = 0; p < n; ++p) {
    int page = 3 + 3 * p, cont = page + 1, img = page + 2;
    begin_obj(page);
    out += "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Resources << /XObject << /Im0 " +
           std::to_string(img) + " 0 R >> >> /Contents " + std::to_string(cont) +
           " 0 R >>\nendobj\n";
    begin_obj(cont);
    out += "<< /Length " + std::to_string(content.size()) + " >>\nstream\n" + content +
           "endstream\nendobj\n";
    std::vector<unsigned char> raw(pages[p].size() * 3);
    for (std::size_t i = 0; i < pages[p].size(); ++i) {
      raw[3 * i] = pages[p][i] & 0xFF;
      raw[3 * i + 1] = (pages[p][i] >> 8) & 0xFF;
      raw[3 * i + 2] = (pages[p][i] >> 16) & 0xFF;
    }
    uLongf len = compressBound(raw.size());
    std::vector<unsigned char> z(len);
    if (compress2(z.data(), &len, raw.data(), raw.size(), 6) != Z_OK)
      throw TexError("! compression failed");
    begin_obj(img);
    out += "<< /Type /XObject /Subtype /Image /Width " + std::to_string(kPageWidth) +
           " /Height " + std::to_string(kPageHeight) +
           " /ColorSpace /DeviceRGB /BitsPerComponent 8 /Filter /FlateDecode /Length " +
           std::to_string(len) + " >>\nstream\n";
    out.append(reinterpret_cast<const char*>(z.data()), len);
    out += "\nendstream\nendobj\n";
  }
  std::size_t xref = out.size();
  out += "xref\n0 " + std::to_string(offsets.size()) + "\n0000000000 65535 f \n";
  for (std::size_t k = 1; k < offsets.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%010zu 00000 n \n", offsets[k]);
    out += buf;
  }
  out += "trailer\n<< /Size " + std::to_string(offsets.size()) + " /Root 1 0 R >>\nstartxref\n" +
         std::to_string(xref) + "\n%%EOF\n";
  std::ofstream f(path, std::ios::binary);
  f << out;
  if (!f) throw TexError("! I can't write on file " + path.string());
}

std::vector<PdfImage> read_pdf_images(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  if (data.rfind("%PDF", 0) != 0) throw TexError("not a PDF file");
  std::vector<PdfImage> out;
  auto int_after = [&](std::size_t from, std::size_t to, const std::string& key) {
    std::size_t k = data.find(key, from);
    if (k == std::string::npos || k > to) throw TexError("image dictionary lacks " + key);
    return std::stol(data.substr(k + key.size(), 24));
  };
  for (std::size_t pos = 0; (pos = data.find("/Subtype /Image", pos)) != std::string::npos;) {
    std::size_t dict = data.rfind("<<", pos);
    std::size_t dict_end = data.find(">>", pos);
    std::size_t stream = data.find("stream\n", dict_end);
    if (dict == std::string::npos || dict_end == std::string::npos || stream == std::string::npos)
      throw TexError("malformed image object");
    PdfImage img;
    img.width = static_cast<int>(int_after(dict, dict_end, "/Width "));
    img.height = static_cast<int>(int_after(dict, dict_end, "/Height "));
    long len = int_after(dict, dict_end, "/Length ");
    std::size_t start = stream + 7;
    if (start + len > data.size()) throw TexError("truncated image stream");
    img.rgb.resize(std::size_t(img.width) * img.height * 3);
    uLongf dest = img.rgb.size();
    if (uncompress(img.rgb.data(), &dest, reinterpret_cast<const Bytef*>(data.data() + start),
                   static_cast<uLong>(len)) != Z_OK ||
        dest != img.rgb.size())
      throw TexError("corrupt image stream");
    out.push_back(std::move(img));
    pos = start + len;
  }
  return out;
}

}  // namespace minitex
