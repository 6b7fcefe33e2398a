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

#include "noncekit/defextract.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace noncekit::defextract {

namespace {

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lowered(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower(c);
  return out;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && space(s[a])) ++a;
  while (b > a && space(s[b - 1])) --b;
  return std::string(s.substr(a, b - a));
}

// Offsets of $...$ placeholders in sentence text.
std::vector<CharSpan> math_ranges(std::string_view text) {
  std::vector<CharSpan> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\') {
      ++i;
      continue;
    }
    if (text[i] != '$') continue;
    std::size_t j = i + 1;
    while (j < text.size() && text[j] != '$') {
      if (text[j] == '\\') ++j;
      ++j;
    }
    out.push_back({i, std::min(j + 1, text.size())});
    i = j;
  }
  return out;
}

bool inside(const std::vector<CharSpan>& ranges, std::size_t pos) {
  for (const auto& r : ranges)
    if (r.contains(pos)) return true;
  return false;
}

}  // namespace

// --- abbreviations ---------------------------------------------------------------------

std::size_t long_form_window(std::string_view short_form) {
  std::size_t n = 0;
  for (char c : short_form) n += alnum(c);
  return std::min(n + 5, 2 * n);
}

bool is_short_form_candidate(std::string_view s) {
  if (s.size() < 2 || s.size() > 10) return false;
  if (!alnum(s.front())) return false;
  if (std::none_of(s.begin(), s.end(), alpha)) return false;
  int words = 1;
  for (char c : s) words += c == ' ';
  return words <= 2;
}

std::optional<std::size_t> match_long_form(std::string_view cand, std::string_view sf) {
  long s = static_cast<long>(sf.size()) - 1;
  long l = static_cast<long>(cand.size()) - 1;
  for (; s >= 0; --s) {
    char c = lower(sf[s]);
    if (!alnum(c)) continue;
    while ((l >= 0 && lower(cand[l]) != c) || (s == 0 && l > 0 && alnum(cand[l - 1]))) --l;
    if (l < 0) return std::nullopt;
    --l;
  }
  std::size_t start = 0;
  for (long k = l; k >= 0; --k) {
    if (cand[k] == ' ') {
      start = static_cast<std::size_t>(k) + 1;
      break;
    }
  }
  return start;
}

std::vector<Abbreviation> find_abbreviations(std::string_view text) {
  std::vector<Abbreviation> out;
  const auto math = math_ranges(text);
  for (std::size_t open = 0; open < text.size(); ++open) {
    if (text[open] != '(' || inside(math, open)) continue;
    std::size_t close = text.find(')', open + 1);
    if (close == std::string_view::npos || inside(math, close)) continue;
    std::string_view inner = text.substr(open + 1, close - open - 1);
    if (inner.find('(') != std::string_view::npos) continue;
    std::size_t cut = inner.find_first_of(",;");
    std::string sf = trim(inner.substr(0, cut));
    if (!is_short_form_candidate(sf)) continue;

    // Window: the last n words before the parenthesis, not reaching back
    // past math.
    std::size_t end = open;
    while (end > 0 && space(text[end - 1])) --end;
    std::size_t floor = 0;
    for (const auto& r : math)
      if (r.end <= end) floor = std::max(floor, r.end);
    std::size_t words = long_form_window(sf);
    std::size_t begin = end;
    std::size_t seen = 0;
    while (begin > floor) {
      std::size_t k = begin;
      while (k > floor && space(text[k - 1])) --k;
      if (k == floor) break;
      std::size_t w = k;
      while (w > floor && !space(text[w - 1])) --w;
      if (++seen > words) break;
      begin = w;
    }
    std::string_view cand = text.substr(begin, end - begin);
    if (cand.empty()) continue;
    auto start = match_long_form(cand, sf);
    if (!start) continue;
    std::string lf(cand.substr(*start));
    if (lf.size() < sf.size()) continue;
    if (lf.find(sf + " ") != std::string::npos) continue;
    if (lf.size() >= sf.size() && lf.compare(lf.size() - sf.size(), sf.size(), sf) == 0) continue;
    out.push_back({sf, lf, open + 1 + inner.find(sf), begin + *start});
    open = close;
  }
  return out;
}

std::vector<DefinitionRecord> extract_abbreviations(const std::vector<SentenceRecord>& sentences) {
  std::vector<DefinitionRecord> out;
  for (const auto& s : sentences) {
    for (const auto& a : find_abbreviations(s.text)) {
      out.push_back({term_entity_id(a.short_form), a.long_form, DefinitionKind::abbreviation, s.id,
                     s.flat.start});
    }
  }
  return out;
}

// --- symbol prose ---------------------------------------------------------------------

namespace {

const std::set<std::string, std::less<>>& determiners() {
  static const std::set<std::string, std::less<>> s = {
      "a", "an", "the", "this", "that", "these", "those", "each", "every", "some", "any", "all",
      "our", "its", "their", "his", "her", "my", "your", "no", "another", "such"};
  return s;
}

const std::set<std::string, std::less<>>& stop_words() {
  static const std::set<std::string, std::less<>> s = {
      // pronouns
      "we", "i", "you", "it", "they", "he", "she", "one", "us", "them",
      // prepositions
      "of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "over", "under",
      "between", "as", "via", "than", "about", "across", "within", "without", "per", "after",
      "before", "through", "among", "using", "against", "onto", "upon",
      // conjunctions and relatives
      "and", "or", "but", "nor", "so", "yet", "if", "then", "where", "when", "while", "whereas",
      "since", "because", "which", "whose", "whom", "who", "how", "what", "whether",
      // verbs and auxiliaries
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do",
      "does", "did", "let", "set", "use", "uses", "used", "define", "defines", "defined",
      "denote", "denotes", "denoted", "represent", "represents", "represented", "call",
      "called", "compute", "computes", "computed", "given", "give", "gives", "take", "takes",
      "assume", "consider", "write", "obtain", "get", "see", "note", "show", "shows", "fix",
      "choose", "can", "may", "must", "will", "would", "should", "could", "follows", "holds",
      "apply", "applies", "maps", "map", "yields", "becomes", "equals", "means",
      // adverbs and fillers
      "not", "also", "only", "thus", "hence", "therefore", "here", "there", "now", "both",
      "either", "neither", "more", "less", "most", "very", "just", "e.g.", "i.e.", "etc.",
      "respectively", "finally", "then", "again"};
  return s;
}

// Adjectives that cannot end a noun phrase.
const std::set<std::string, std::less<>>& adjectives() {
  static const std::set<std::string, std::less<>> s = {
      "larger", "smaller", "higher", "lower", "greater", "bigger", "better", "worse", "best",
      "worst", "new", "same", "different", "large", "small", "fixed", "final", "last", "next",
      "previous", "other", "optimal", "corresponding", "respective", "single", "following",
      "above", "below", "entire", "whole", "resulting", "current", "initial", "overall", "first"};
  return s;
}

struct Token {
  enum Kind { word, math, punct } kind;
  std::string text;
  std::string equation;  // math tokens
};

std::vector<Token> tokenize(const SentenceRecord& s) {
  std::vector<Token> out;
  const std::string& t = s.text;
  std::size_t i = 0;
  auto ph = s.math.begin();
  while (i < t.size()) {
    while (ph != s.math.end() && ph->offset < i) ++ph;
    if (ph != s.math.end() && ph->offset == i) {
      out.push_back({Token::math, t.substr(i, ph->length), ph->equation});
      i += ph->length;
      ++ph;
      continue;
    }
    char c = t[i];
    if (space(c)) {
      ++i;
      continue;
    }
    if (alpha(c)) {
      std::size_t j = i;
      while (j < t.size() && (alnum(t[j]) || ((t[j] == '-' || t[j] == '\'') && j + 1 < t.size() &&
                                              alpha(t[j + 1]))))
        ++j;
      // Keep trailing dots of "e.g." / "i.e." with the word.
      std::string w = t.substr(i, j - i);
      if ((w == "e" || w == "i") && j + 2 < t.size() && t[j] == '.' && alpha(t[j + 1]) &&
          t[j + 2] == '.') {
        w += t.substr(j, 3);
        j += 3;
      }
      out.push_back({Token::word, w, ""});
      i = j;
      continue;
    }
    out.push_back({Token::punct, std::string(1, c), ""});
    ++i;
  }
  return out;
}

bool content_word(const Token& t) {
  if (t.kind != Token::word) return false;
  std::string w = lowered(t.text);
  if (determiners().count(w) || stop_words().count(w)) return false;
  return std::any_of(w.begin(), w.end(), alpha);
}

bool looks_adverb(const std::string& w) { return w.size() > 4 && w.ends_with("ly"); }

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

std::vector<DefinitionRecord> extract_symbol_definitions(const std::vector<SentenceRecord>& sentences,
                                                         const LoneSymbols& lone) {
  std::vector<DefinitionRecord> out;
  for (const auto& s : sentences) {
    const auto toks = tokenize(s);
    for (std::size_t k = 0; k < toks.size(); ++k) {
      if (toks[k].kind != Token::math) continue;
      auto entity = lone.find(toks[k].equation);
      if (entity == lone.end()) continue;

      // (b) copula after the symbol. It names the symbol more fully than
      // (a), so (a) is only tried when it does not apply.
      bool copula = false;
      if (k + 1 < toks.size() && toks[k + 1].kind == Token::word) {
        std::string verb = lowered(toks[k + 1].text);
        std::size_t j = k + 2;
        bool ok = false;
        if (verb == "is" || (verb == "be" && k > 0 && toks[k - 1].kind == Token::word &&
                             lowered(toks[k - 1].text) == "let")) {
          ok = j < toks.size() && toks[j].kind == Token::word &&
               (lowered(toks[j].text) == "a" || lowered(toks[j].text) == "an" ||
                lowered(toks[j].text) == "the");
          ++j;
        } else if (verb == "denotes" || verb == "represents") {
          ok = true;
          if (j < toks.size() && toks[j].kind == Token::word && determiners().count(lowered(toks[j].text)))
            ++j;
        }
        if (ok) {
          std::vector<std::string> phrase;
          for (; j < toks.size() && phrase.size() < 6; ++j) {
            const Token& t = toks[j];
            if (t.kind == Token::word && lowered(t.text) == "of" && !phrase.empty()) {
              phrase.push_back("of");
              continue;
            }
            if (t.kind == Token::word && !phrase.empty() && phrase.back() == "of" &&
                determiners().count(lowered(t.text))) {
              phrase.push_back(lowered(t.text));
              continue;
            }
            if (t.kind == Token::math && !phrase.empty() && lone.count(t.equation)) {
              phrase.push_back(t.text);
              continue;
            }
            if (!content_word(t)) break;
            phrase.push_back(t.text);
          }
          while (!phrase.empty() && phrase.back().front() != '$' &&
                 !content_word({Token::word, phrase.back(), ""}))
            phrase.pop_back();
          if (!phrase.empty()) {
            out.push_back({entity->second, join(phrase), DefinitionKind::prose, s.id, s.flat.start});
            copula = true;
          }
        }
      }

      // (a) noun phrase immediately before the symbol, opened by a
      // determiner or the start of the sentence.
      std::vector<std::string> np;
      std::size_t j = k;
      for (; j > 0 && np.size() < 4; --j) {
        const Token& t = toks[j - 1];
        if (!content_word(t)) break;
        np.insert(np.begin(), t.text);
      }
      const bool opened = j == 0 || (toks[j - 1].kind == Token::word &&
                                     determiners().count(lowered(toks[j - 1].text)));
      if (!copula && !np.empty() && opened && !looks_adverb(lowered(np.back())) &&
          !adjectives().count(lowered(np.back()))) {
        // Sentence-initial capitals are folded; acronyms are kept.
        std::string& first = np.front();
        if (first.size() > 1 && std::islower(static_cast<unsigned char>(first[1])))
          first[0] = lower(first[0]);
        out.push_back({entity->second, join(np), DefinitionKind::prose, s.id, s.flat.start});
      }

    }
  }
  return out;
}

// --- formulae --------------------------------------------------------------------------

namespace {

CharSpan trimmed(std::string_view s, CharSpan sp) {
  while (sp.start < sp.end && space(s[sp.start])) ++sp.start;
  while (sp.end > sp.start && space(s[sp.end - 1])) --sp.end;
  return sp;
}

// Drops whitespace and braces that wrap the whole span.
CharSpan strip_grouping(std::string_view s, CharSpan sp) {
  for (;;) {
    sp = trimmed(s, sp);
    if (sp.size() < 2 || s[sp.start] != '{' || s[sp.end - 1] != '}') return sp;
    int depth = 0;
    for (std::size_t i = sp.start; i < sp.end; ++i) {
      if (s[i] == '\\') {
        ++i;
        continue;
      }
      if (s[i] == '{') ++depth;
      if (s[i] == '}' && --depth == 0 && i + 1 != sp.end) return sp;
    }
    sp = {sp.start + 1, sp.end - 1};
  }
}

const mathparse::SymbolRecord* symbol_with_span(const ParsedEquation& eq, CharSpan sp) {
  for (const auto& sym : eq.symbols)
    if (!sym.spans.empty() && strip_grouping(eq.tree.source, sym.spans.front()) == sp) return &sym;
  return nullptr;
}

}  // namespace

ParsedEquation parse_equation(std::string id, std::size_t position, std::string_view tex) {
  ParsedEquation eq;
  eq.id = std::move(id);
  eq.position = position;
  eq.tex = std::string(tex);
  eq.tree = mathparse::parse_math_tree(tex);
  eq.symbols = mathparse::extract_symbols(eq.tree, eq.id + ".s");
  for (const auto& s : eq.symbols) eq.entity_of[s.id] = symbol_entity_id(s.normalized_key);
  return eq;
}

std::optional<std::string> lone_symbol(const ParsedEquation& eq) {
  const std::string& src = eq.tree.source;
  CharSpan all = strip_grouping(src, {0, src.size()});
  if (all.empty()) return std::nullopt;
  const auto* sym = symbol_with_span(eq, all);
  if (!sym || sym->parent) return std::nullopt;
  auto it = eq.entity_of.find(sym->id);
  if (it == eq.entity_of.end()) return std::nullopt;
  return it->second;
}

std::vector<DefinitionRecord> extract_defining_formulae(const std::vector<ParsedEquation>& equations) {
  std::vector<DefinitionRecord> out;
  for (const auto& eq : equations) {
    for (const auto& atoms : mathparse::definition_lhs(eq.tree)) {
      if (atoms.empty()) continue;
      CharSpan sp{atoms.front()->span.start, atoms.front()->span.end};
      for (const auto* a : atoms) {
        sp.start = std::min(sp.start, a->span.start);
        sp.end = std::max(sp.end, a->span.end);
      }
      const auto* sym = symbol_with_span(eq, strip_grouping(eq.tree.source, sp));
      if (!sym) continue;
      auto it = eq.entity_of.find(sym->id);
      if (it == eq.entity_of.end()) continue;
      out.push_back({it->second, trim(eq.tex), DefinitionKind::formula, eq.id, eq.position});
    }
  }
  return out;
}

// --- usages ----------------------------------------------------------------------------

UsageIndex index_usages(const std::vector<Entity>& entities,
                        const std::vector<SentenceRecord>& sentences) {
  std::map<std::string, std::size_t> order;
  for (std::size_t k = 0; k < sentences.size(); ++k) order[sentences[k].id] = k;
  UsageIndex out;
  for (const auto& e : entities) {
    std::set<std::size_t> hits;
    for (const auto& o : e.occurrences) {
      auto it = order.find(o.sentence);
      if (it != order.end()) hits.insert(it->second);
    }
    auto& list = out[e.id];
    for (std::size_t k : hits) list.push_back(sentences[k].id);
  }
  return out;
}

void normalize_definitions(std::vector<DefinitionRecord>& defs) {
  std::stable_sort(defs.begin(), defs.end(), [](const DefinitionRecord& a, const DefinitionRecord& b) {
    if (a.definiendum != b.definiendum) return a.definiendum < b.definiendum;
    return definition_order(a, b);
  });
  std::set<std::tuple<std::string, DefinitionKind, std::string>> seen;
  std::vector<DefinitionRecord> out;
  for (auto& d : defs) {
    if (d.definiens.empty()) continue;
    if (!seen.insert({d.definiendum, d.kind, d.source}).second) continue;
    out.push_back(std::move(d));
  }
  defs = std::move(out);
}

}  // namespace noncekit::defextract
