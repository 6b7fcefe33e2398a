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

#include "noncekit/texscan.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace noncekit::texscan {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reads "\name" at s[i] (s[i] == '\\'); returns the name ("" for a lone
// backslash, one character for control symbols) and advances i.
std::string read_command(std::string_view s, std::size_t& i) {
  std::size_t j = i + 1;
  if (j >= s.size()) {
    i = j;
    return "";
  }
  if (is_alpha(s[j])) {
    while (j < s.size() && is_alpha(s[j])) ++j;
  } else {
    ++j;
  }
  std::string name(s.substr(i + 1, j - i - 1));
  i = j;
  return name;
}

void skip_spaces(std::string_view s, std::size_t& i, std::size_t end) {
  while (i < end && is_space(s[i])) ++i;
}

// Skips a balanced {...} at s[i] (after optional spaces); returns the
// content range, or nullopt when there is no group.
std::optional<CharSpan> skip_group(std::string_view s, std::size_t& i, std::size_t end,
                                   char open = '{', char close = '}') {
  std::size_t k = i;
  skip_spaces(s, k, end);
  if (k >= end || s[k] != open) return std::nullopt;
  int depth = 0;
  for (std::size_t j = k; j < end; ++j) {
    if (s[j] == '\\') {
      ++j;
      continue;
    }
    if (s[j] == open) ++depth;
    if (s[j] == close && --depth == 0) {
      i = j + 1;
      return CharSpan{k + 1, j};
    }
  }
  return std::nullopt;
}

const std::set<std::string, std::less<>> kHeadings = {
    "part", "chapter", "section", "subsection", "subsubsection", "paragraph", "subparagraph",
    "title", "author", "date"};

const std::set<std::string, std::less<>> kCaptions = {"caption", "footnote", "thanks"};

// Commands that end the running sentence and contribute no text.
const std::set<std::string, std::less<>> kBreaks = {
    "item", "par", "maketitle", "newpage", "clearpage", "bibliography", "bibliographystyle",
    "tableofcontents", "appendix", "medskip", "bigskip", "smallskip", "noindent", "centering",
    "includegraphics", "newline", "linebreak", "hline", "toprule", "midrule", "bottomrule"};

// Commands whose arguments are not prose.
const std::set<std::string, std::less<>> kCite = {"cite", "citep", "citet", "citealp",
                                                  "citeauthor", "citeyear", "nocite"};
const std::set<std::string, std::less<>> kRef = {"ref", "eqref", "autoref", "cref", "Cref",
                                                 "pageref", "nameref"};
const std::set<std::string, std::less<>> kSilentArg = {
    "label", "url", "href", "includegraphics", "bibliography", "bibliographystyle", "vspace",
    "hspace", "usepackage", "documentclass", "input", "include", "newcommand", "renewcommand",
    "color", "definecolor"};

const std::set<std::string, std::less<>> kAbbreviations = {
    "e.g", "i.e", "et al", "al", "fig", "figs", "eq", "eqs", "eqn", "eqns", "sec", "secs",
    "tab", "vs", "cf", "resp", "approx", "no", "nos", "dr", "mr", "mrs", "ms", "prof", "st",
    "jr", "sr", "inc", "ltd", "co", "corp", "vol", "pp", "ch", "ref", "refs", "def", "thm",
    "lem", "prop", "alg", "app", "viz", "ca", "w.r.t", "a.k.a", "etc.al", "c.f", "ibid",
    "sect", "figure", "equation"};

const std::set<std::string, std::less<>> kTextStyle = {"textbf", "emph", "textit", "textsc",
                                                       "textrm", "textsf", "underline"};

}  // namespace

// --- SourceDocument ------------------------------------------------------------

SourceDocument SourceDocument::load(const std::filesystem::path& dir,
                                    const std::string& main_file) {
  SourceDocument doc;
  doc.main_file_ = main_file;
  doc.append_file(dir, main_file, 0);
  doc.locate_body();
  return doc;
}

SourceDocument SourceDocument::from_string(std::string text, std::string file_name) {
  SourceDocument doc;
  doc.main_file_ = file_name;
  doc.files_[file_name] = text;
  // Same comment handling as load(), without include resolution.
  std::size_t i = 0, run = 0;
  auto flush = [&](std::size_t upto) {
    if (upto > run) {
      doc.segments_.push_back({doc.text_.size(), upto - run, file_name, run});
      doc.text_.append(text, run, upto - run);
    }
  };
  while (i < text.size()) {
    if (text[i] == '\\') {
      i += 2;
      continue;
    }
    if (text[i] == '%') {
      flush(i);
      auto nl = text.find('\n', i);
      i = nl == std::string::npos ? text.size() : nl + 1;
      run = i;
      continue;
    }
    ++i;
  }
  flush(std::min(i, text.size()));
  doc.locate_body();
  return doc;
}

void SourceDocument::append_file(const std::filesystem::path& dir, const std::string& rel,
                                 int depth) {
  if (depth > 16) throw Error("include nesting too deep at " + rel);
  std::string content = read_file(dir / rel);
  files_[rel] = content;
  const std::string_view s = files_[rel];

  std::size_t i = 0, run = 0;
  auto flush = [&](std::size_t upto) {
    if (upto > run) {
      segments_.push_back({text_.size(), upto - run, rel, run});
      text_.append(s.substr(run, upto - run));
    }
  };
  while (i < s.size()) {
    if (s[i] == '%') {
      flush(i);
      auto nl = s.find('\n', i);
      i = nl == std::string::npos ? s.size() : nl + 1;
      run = i;
      continue;
    }
    if (s[i] != '\\') {
      ++i;
      continue;
    }
    std::size_t at = i;
    std::string name = read_command(s, i);
    if (name != "input" && name != "include") continue;
    std::size_t after = i;
    auto arg = skip_group(s, after, s.size());
    if (!arg) continue;
    std::string target(s.substr(arg->start, arg->size()));
    while (!target.empty() && is_space(target.back())) target.pop_back();
    if (std::filesystem::path(target).extension().empty()) target += ".tex";
    if (!std::filesystem::exists(dir / target)) continue;
    flush(at);
    append_file(dir, target, depth + 1);
    i = after;
    run = after;
  }
  flush(s.size());
}

void SourceDocument::locate_body() {
  const std::string begin = "\\begin{document}";
  auto b = text_.find(begin);
  auto e = text_.rfind("\\end{document}");
  std::size_t start = b == std::string::npos ? 0 : b + begin.size();
  std::size_t end = (e == std::string::npos || e < start) ? text_.size() : e;
  body_ = {start, end};
}

std::pair<const SourceDocument::Segment*, std::size_t> SourceDocument::find(std::size_t flat,
                                                                           bool is_end) const {
  std::size_t probe = is_end ? flat - 1 : flat;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), probe,
                             [](std::size_t v, const Segment& seg) { return v < seg.flat_start; });
  if (it == segments_.begin()) throw Error("offset outside document");
  --it;
  if (probe >= it->flat_start + it->length) throw Error("offset outside document");
  std::size_t off = it->file_start + (probe - it->flat_start) + (is_end ? 1 : 0);
  return {&*it, off};
}

TexSpan SourceDocument::to_source(CharSpan flat) const {
  if (segments_.empty()) throw Error("empty document");
  if (flat.empty()) {
    if (flat.start >= text_.size()) {
      const Segment& last = segments_.back();
      return {last.file, last.file_start + last.length, last.file_start + last.length};
    }
    auto [seg, off] = find(flat.start, false);
    return {seg->file, off, off};
  }
  auto [s_seg, s_off] = find(flat.start, false);
  auto [e_seg, e_off] = find(flat.end, true);
  if (s_seg->file != e_seg->file || e_off < s_off)
    throw Error("span crosses source files");
  return {s_seg->file, s_off, e_off};
}

// --- equations -------------------------------------------------------------------

const std::vector<std::string>& display_environments() {
  static const std::vector<std::string> envs = {
      "equation", "equation*", "align",      "align*",     "gather",     "gather*",
      "multline", "multline*", "eqnarray",   "eqnarray*",  "displaymath", "flalign",
      "flalign*", "alignat",   "alignat*"};
  return envs;
}

namespace {

std::size_t find_unescaped(std::string_view s, std::string_view what, std::size_t from,
                           std::size_t end) {
  for (std::size_t j = from; j + what.size() <= end; ++j) {
    if (s[j] == '\\' && what[0] != '\\') {
      ++j;
      continue;
    }
    if (s.compare(j, what.size(), what) == 0) return j;
  }
  return std::string_view::npos;
}

}  // namespace

std::vector<EquationSpan> detect_equations(std::string_view text, CharSpan range) {
  std::vector<EquationSpan> out;
  const auto& envs = display_environments();
  auto push = [&](std::size_t start, std::size_t body_start, std::size_t body_end,
                  std::size_t end, bool display, std::string env) {
    EquationSpan eq;
    eq.id = "eq-" + std::to_string(out.size() + 1);
    eq.flat = {start, end};
    eq.body_flat = {body_start, body_end};
    eq.body = std::string(text.substr(body_start, body_end - body_start));
    eq.display = display;
    eq.environment = std::move(env);
    out.push_back(std::move(eq));
  };

  std::size_t i = range.start;
  const std::size_t end = range.end;
  while (i < end) {
    char c = text[i];
    if (c == '\\') {
      if (i + 1 >= end) break;
      char n = text[i + 1];
      if (n == '(' || n == '[') {
        std::string_view closer = n == '(' ? "\\)" : "\\]";
        std::size_t close = text.find(closer, i + 2);
        if (close == std::string_view::npos || close + 2 > end)
          throw UnbalancedDelimiter(n == '(' ? "unclosed \\(" : "unclosed \\[", i);
        push(i, i + 2, close, close + 2, n == '[', n == '(' ? "\\(" : "\\[");
        i = close + 2;
        continue;
      }
      if (!is_alpha(n)) {
        i += 2;
        continue;
      }
      std::size_t at = i;
      std::string name = read_command(text, i);
      if (name != "begin") continue;
      std::size_t after = i;
      auto arg = skip_group(text, after, end);
      if (!arg) continue;
      std::string env(text.substr(arg->start, arg->size()));
      bool display = std::find(envs.begin(), envs.end(), env) != envs.end();
      bool verbatim = env == "verbatim" || env == "lstlisting" || env == "comment";
      if (!display && env != "math" && !verbatim) continue;
      std::string closer = "\\end{" + env + "}";
      std::size_t close = text.find(closer, after);
      if (close == std::string_view::npos || close + closer.size() > end)
        throw UnbalancedDelimiter("unclosed environment " + env, at);
      if (!verbatim) push(at, after, close, close + closer.size(), display, env);
      i = close + closer.size();
      continue;
    }
    if (c == '$') {
      bool dbl = i + 1 < end && text[i + 1] == '$';
      if (dbl) {
        std::size_t close = find_unescaped(text, "$$", i + 2, end);
        if (close == std::string_view::npos) throw UnbalancedDelimiter("unclosed $$", i);
        push(i, i + 2, close, close + 2, true, "$$");
        i = close + 2;
      } else {
        std::size_t close = find_unescaped(text, "$", i + 1, end);
        if (close == std::string_view::npos) throw UnbalancedDelimiter("unclosed $", i);
        push(i, i + 1, close, close + 1, false, "$");
        i = close + 1;
      }
      continue;
    }
    ++i;
  }
  return out;
}

// --- sentences ---------------------------------------------------------------------

namespace {

class Segmenter {
 public:
  Segmenter(std::string_view text, std::vector<EquationSpan>& eqs, CharSpan range)
      : s_(text), eqs_(eqs), range_(range) {}

  std::vector<CharSpan> run() {
    std::size_t i = range_.start;
    std::size_t e = first_eq_at_or_after(i);
    while (i < range_.end) {
      while (!forced_.empty() && forced_.back() <= i) {
        close();
        forced_.pop_back();
      }
      if (e < eqs_.size() && eqs_[e].flat.start == i) {
        const EquationSpan& eq = eqs_[e];
        open(i);
        has_content_ = true;
        cur_end_ = eq.flat.end;
        i = eq.flat.end;
        ++e;
        if (eq.display && (close_after_display_ || ends_with_period(eq.body)) &&
            starts_sentence(i))
          close();
        close_after_display_ = false;
        continue;
      }
      if (e < eqs_.size() && eqs_[e].flat.start < i) {
        e = first_eq_at_or_after(i);
        continue;
      }
      char c = s_[i];
      if (is_space(c)) {
        if (c == '\n' && blank_line_after(i)) close();
        ++i;
        continue;
      }
      if (c == '\\') {
        i = command(i, e);
        continue;
      }
      if (c == '.' || c == '?' || c == '!') {
        open(i);
        has_content_ = true;
        std::size_t j = i + 1;
        while (j < range_.end && (s_[j] == ')' || s_[j] == '"' || s_[j] == '\'')) ++j;
        while (j < range_.end && s_[j] == '}' && depth_ > 0) {
          --depth_;
          ++j;
        }
        cur_end_ = j;
        if (boundary(i, j, e)) close();
        i = j;
        continue;
      }
      if (c == '{') {
        open(i);
        ++depth_;
        cur_end_ = i + 1;
        ++i;
        continue;
      }
      if (c == '}') {
        if (depth_ == 0) {
          close();
        } else {
          --depth_;
          cur_end_ = i + 1;
        }
        ++i;
        continue;
      }
      open(i);
      if (is_alnum(c) || static_cast<unsigned char>(c) >= 0x80) has_content_ = true;
      cur_end_ = i + 1;
      ++i;
    }
    close();
    return std::move(spans_);
  }

 private:
  std::size_t first_eq_at_or_after(std::size_t pos) const {
    auto it = std::lower_bound(eqs_.begin(), eqs_.end(), pos,
                               [](const EquationSpan& q, std::size_t p) { return q.flat.start < p; });
    return static_cast<std::size_t>(it - eqs_.begin());
  }

  const EquationSpan* eq_at(std::size_t pos) const {
    std::size_t k = first_eq_at_or_after(pos);
    return (k < eqs_.size() && eqs_[k].flat.start == pos) ? &eqs_[k] : nullptr;
  }

  void open(std::size_t pos) {
    if (!cur_start_) {
      cur_start_ = pos;
      depth_ = 0;
    }
  }

  void close() {
    if (cur_start_ && has_content_ && cur_end_ > *cur_start_)
      spans_.push_back({*cur_start_, cur_end_});
    cur_start_.reset();
    has_content_ = false;
    depth_ = 0;
    close_after_display_ = false;
  }

  bool blank_line_after(std::size_t nl) const {
    for (std::size_t k = nl + 1; k < range_.end; ++k) {
      if (s_[k] == '\n') return true;
      if (!is_space(s_[k])) return false;
    }
    return true;
  }

  static bool ends_with_period(std::string_view body) {
    std::size_t k = body.size();
    while (k > 0) {
      char c = body[k - 1];
      if (is_space(c)) {
        --k;
        continue;
      }
      if (k >= 2 && body[k - 2] == '\\' && (c == ',' || c == ';' || c == '!' || c == ':')) {
        k -= 2;
        continue;
      }
      if (c == '}' ) {
        --k;
        continue;
      }
      return c == '.';
    }
    return false;
  }

  std::string word_before(std::size_t p) const {
    std::size_t k = p;
    while (k > range_.start && (is_alpha(s_[k - 1]) || s_[k - 1] == '.')) --k;
    // "et al." is two tokens.
    std::string w(s_.substr(k, p - k));
    if (w == "al" && k >= 4 && s_.substr(k - 3, 3) == "et ") w = "et al";
    return w;
  }

  // Looks at the first token at or after k.
  bool starts_sentence(std::size_t k) const {
    while (k < range_.end && is_space(s_[k])) {
      if (s_[k] == '\n' && blank_line_after(k)) return true;
      ++k;
    }
    if (k >= range_.end) return true;
    char c = s_[k];
    if (is_upper(c) || std::isdigit(static_cast<unsigned char>(c))) return true;
    if (c == '$' || eq_at(k)) return true;
    if (c == '`' || c == '"') return k + 1 < range_.end && !is_lower(s_[k + 1]);
    if (c == '\\') {
      std::size_t j = k;
      std::string name = read_command(s_, j);
      if (kCite.count(name) || kRef.count(name)) return false;
      if (kTextStyle.count(name)) {
        std::size_t g = j;
        skip_spaces(s_, g, range_.end);
        return g + 1 < range_.end && s_[g] == '{' && !is_lower(s_[g + 1]);
      }
      return name != "," && name != "ldots" && name != "dots";
    }
    return false;
  }

  bool boundary(std::size_t p, std::size_t after, std::size_t /*next_eq*/) {
    if (s_[p] == '.') {
      std::string w = word_before(p);
      std::string lw;
      for (char ch : w) lw += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      while (!lw.empty() && lw.back() == '.') lw.pop_back();
      if (kAbbreviations.count(lw)) return false;
      if (w.size() == 1 && is_upper(w[0])) return false;
      if (p > range_.start && s_[p - 1] == '.') return false;  // ellipsis
    }
    if (after < range_.end && !is_space(s_[after]) && s_[after] != '\\') return false;
    std::size_t k = after;
    skip_spaces(s_, k, range_.end);
    if (const EquationSpan* d = eq_at(k); d && d->display) {
      // Decide who owns a display that follows terminal punctuation.
      if (!starts_sentence(d->flat.end)) return true;
      close_after_display_ = true;
      return false;
    }
    return starts_sentence(after);
  }

  std::size_t command(std::size_t i, std::size_t& e) {
    std::size_t start = i;
    std::string name = read_command(s_, i);
    if (name.size() == 1 && !is_alpha(name[0])) {
      if (name == "\\") return i;  // forced line break, acts as space
      open(start);
      if (name != "," && name != ";" && name != " ") has_content_ = true;
      cur_end_ = i;
      return i;
    }
    if (i < range_.end && s_[i] == '*') ++i;
    if (kHeadings.count(name)) {
      close();
      std::size_t k = i;
      skip_group(s_, k, range_.end, '[', ']');
      if (auto arg = skip_group(s_, k, range_.end)) {
        CharSpan t = trim(*arg);
        if (!t.empty()) {
          spans_.push_back(t);
        }
        e = first_eq_at_or_after(k);
        return k;
      }
      return i;
    }
    if (name == "begin" || name == "end") {
      close();
      std::size_t k = i;
      skip_group(s_, k, range_.end);
      if (name == "begin") {
        skip_group(s_, k, range_.end, '[', ']');
      }
      return k;
    }
    if (kCaptions.count(name)) {
      close();
      std::size_t k = i;
      skip_group(s_, k, range_.end, '[', ']');
      std::size_t g = k;
      if (auto arg = skip_group(s_, g, range_.end)) {
        forced_.push_back(arg->end);
        std::sort(forced_.rbegin(), forced_.rend());
        return arg->start;
      }
      return k;
    }
    if (kBreaks.count(name)) {
      close();
      std::size_t k = i;
      skip_group(s_, k, range_.end, '[', ']');
      if (name == "includegraphics" || name == "bibliography" || name == "bibliographystyle")
        skip_group(s_, k, range_.end);
      return k;
    }
    if (kSilentArg.count(name)) {
      std::size_t k = i;
      skip_group(s_, k, range_.end, '[', ']');
      skip_group(s_, k, range_.end);
      if (name == "href" || name == "definecolor") skip_group(s_, k, range_.end);
      if (cur_start_) cur_end_ = k;
      return k;
    }
    if (kCite.count(name) || kRef.count(name)) {
      open(start);
      has_content_ = true;
      std::size_t k = i;
      skip_group(s_, k, range_.end, '[', ']');
      skip_group(s_, k, range_.end, '[', ']');
      skip_group(s_, k, range_.end);
      cur_end_ = k;
      return k;
    }
    open(start);
    cur_end_ = i;
    return i;
  }

  CharSpan trim(CharSpan sp) const {
    while (sp.start < sp.end && is_space(s_[sp.start])) ++sp.start;
    while (sp.end > sp.start && is_space(s_[sp.end - 1])) --sp.end;
    return sp;
  }

  std::string_view s_;
  std::vector<EquationSpan>& eqs_;
  CharSpan range_;
  std::optional<std::size_t> cur_start_;
  std::size_t cur_end_ = 0;
  bool has_content_ = false;
  bool close_after_display_ = false;
  int depth_ = 0;
  std::vector<std::size_t> forced_;
  std::vector<CharSpan> spans_;
};

// Plain-text rendering of a TeX range; math bodies are kept as $...$.
class Detexer {
 public:
  Detexer(std::string_view text, const std::vector<EquationSpan>& eqs) : s_(text), eqs_(eqs) {}

  void run(SentenceRecord& rec) {
    out_.clear();
    math_.clear();
    std::size_t i = rec.flat.start;
    auto it = std::lower_bound(eqs_.begin(), eqs_.end(), i, [](const EquationSpan& q, std::size_t p) {
      return q.flat.start < p;
    });
    while (i < rec.flat.end) {
      if (it != eqs_.end() && it->flat.start == i) {
        MathPlaceholder ph;
        ph.equation = it->id;
        ph.offset = out_.size();
        out_ += '$';
        out_ += it->body;
        out_ += '$';
        ph.length = out_.size() - ph.offset;
        math_.push_back(ph);
        i = it->flat.end;
        ++it;
        continue;
      }
      if (it != eqs_.end() && it->flat.start < i) {
        ++it;
        continue;
      }
      char c = s_[i];
      if (c == '\\') {
        i = command(i, rec.flat.end);
        continue;
      }
      if (c == '{' || c == '}') {
        ++i;
        continue;
      }
      if (c == '~' || is_space(c)) {
        space();
        ++i;
        continue;
      }
      if ((c == '`' || c == '\'') && i + 1 < rec.flat.end && s_[i + 1] == c) {
        out_ += '"';
        i += 2;
        continue;
      }
      if (c == '`') c = '\'';
      out_ += c;
      ++i;
    }
    while (!out_.empty() && out_.back() == ' ') out_.pop_back();
    rec.text = out_;
    rec.math = math_;
  }

 private:
  void space() {
    if (!out_.empty() && out_.back() != ' ') out_ += ' ';
  }

  std::size_t command(std::size_t i, std::size_t end) {
    std::string name = read_command(s_, i);
    if (name.size() == 1 && !is_alpha(name[0])) {
      switch (name[0]) {
        case '%': case '&': case '$': case '_': case '#': case '{': case '}':
          out_ += name[0];
          break;
        default:
          space();
      }
      return i;
    }
    if (i < end && s_[i] == '*') ++i;
    if (kCite.count(name) || kRef.count(name)) {
      skip_group(s_, i, end, '[', ']');
      skip_group(s_, i, end, '[', ']');
      skip_group(s_, i, end);
      out_ += kCite.count(name) ? "[cite]" : "[ref]";
      return i;
    }
    if (kSilentArg.count(name)) {
      skip_group(s_, i, end, '[', ']');
      skip_group(s_, i, end);
      if (name == "href" || name == "definecolor") skip_group(s_, i, end);
      return i;
    }
    if (name == "ldots" || name == "dots") out_ += "...";
    return i;
  }

  std::string_view s_;
  const std::vector<EquationSpan>& eqs_;
  std::string out_;
  std::vector<MathPlaceholder> math_;
};

}  // namespace

std::vector<SentenceRecord> segment_sentences(std::string_view text,
                                              std::vector<EquationSpan>& equations,
                                              CharSpan range) {
  std::sort(equations.begin(), equations.end(),
            [](const EquationSpan& a, const EquationSpan& b) { return a.flat.start < b.flat.start; });
  auto spans = Segmenter(text, equations, range).run();
  std::sort(spans.begin(), spans.end());

  std::vector<SentenceRecord> out;
  Detexer detex(text, equations);
  for (const auto& sp : spans) {
    SentenceRecord rec;
    rec.id = "sent-" + std::to_string(out.size() + 1);
    rec.flat = sp;
    detex.run(rec);
    if (rec.text.empty()) continue;
    out.push_back(std::move(rec));
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].id = "sent-" + std::to_string(k + 1);

  for (auto& eq : equations) {
    eq.sentence.reset();
    const SentenceRecord* best = nullptr;
    for (const auto& s : out) {
      if (s.flat.contains(eq.flat)) {
        best = &s;
        break;
      }
      if (s.flat.start <= eq.flat.start) best = &s;
    }
    if (!best && !out.empty()) best = &out.front();
    if (best) eq.sentence = best->id;
  }
  return out;
}

std::vector<bool> prose_mask(std::string_view text, const std::vector<EquationSpan>& equations,
                             CharSpan range) {
  std::vector<bool> mask(text.size(), false);
  for (std::size_t k = range.start; k < range.end; ++k) mask[k] = true;
  for (const auto& eq : equations)
    for (std::size_t k = eq.flat.start; k < eq.flat.end && k < mask.size(); ++k) mask[k] = false;
  std::size_t i = range.start;
  while (i < range.end) {
    if (!mask[i] || text[i] != '\\') {
      if (text[i] == '{' || text[i] == '}') mask[i] = false;
      ++i;
      continue;
    }
    std::size_t start = i;
    std::string name = read_command(text, i);
    for (std::size_t k = start; k < i && k < mask.size(); ++k) mask[k] = false;
    if (kCite.count(name) || kRef.count(name) || kSilentArg.count(name) || name == "begin" ||
        name == "end") {
      std::size_t k = i;
      skip_group(text, k, range.end, '[', ']');
      skip_group(text, k, range.end);
      for (std::size_t m = i; m < k; ++m) mask[m] = false;
      i = k;
    }
  }
  return mask;
}

std::vector<CharSpan> find_word(std::string_view text, const std::vector<bool>& prose,
                                std::string_view word, CharSpan range) {
  std::vector<CharSpan> out;
  if (word.empty()) return out;
  std::size_t pos = range.start;
  while ((pos = text.find(word, pos)) != std::string_view::npos && pos + word.size() <= range.end) {
    std::size_t end = pos + word.size();
    bool ok = (pos == 0 || !is_alnum(text[pos - 1])) && (end >= text.size() || !is_alnum(text[end]));
    for (std::size_t k = pos; ok && k < end; ++k) ok = prose[k];
    if (ok && pos > 0 && text[pos - 1] == '\\') ok = false;
    if (ok) out.push_back({pos, end});
    pos = end;
  }
  return out;
}

ScanResult scan_document(const SourceDocument& doc) {
  ScanResult r;
  r.equations = detect_equations(doc.text(), doc.body());
  r.sentences = segment_sentences(doc.text(), r.equations, doc.body());
  for (auto& eq : r.equations) {
    eq.span = doc.to_source(eq.flat);
    eq.body_span = doc.to_source(eq.body_flat);
  }
  for (auto& s : r.sentences) {
    try {
      s.span = doc.to_source(s.flat);
    } catch (const Error&) {
      s.span = {};
    }
  }
  return r;
}

}  // namespace noncekit::texscan
