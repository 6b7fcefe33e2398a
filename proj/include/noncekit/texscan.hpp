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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noncekit/common.hpp"

namespace noncekit::texscan {

// The paper's TeX flattened into one string: \input/\include resolved and
// comments removed. Every flattened character maps back to one character of
// an original file.
class SourceDocument {
 public:
  // Loads main_file (relative to dir) and everything it includes.
  static SourceDocument load(const std::filesystem::path& dir, const std::string& main_file);
  // Single in-memory file; used by tests and by tools that already hold text.
  static SourceDocument from_string(std::string text, std::string file_name = "main.tex");

  const std::string& text() const { return text_; }
  const std::string& main_file() const { return main_file_; }
  // Original (unstripped) contents keyed by path relative to the source dir.
  const std::map<std::string, std::string>& files() const { return files_; }

  // Maps a flattened range back to its original file. Throws Error when the
  // range straddles two files.
  TexSpan to_source(CharSpan flat) const;

  // Range between \begin{document} and \end{document}, or the whole text.
  CharSpan body() const { return body_; }

 private:
  struct Segment {
    std::size_t flat_start;
    std::size_t length;
    std::string file;
    std::size_t file_start;
  };
  void append_file(const std::filesystem::path& dir, const std::string& rel, int depth);
  void locate_body();
  std::pair<const Segment*, std::size_t> find(std::size_t flat, bool is_end) const;

  std::string text_;
  std::string main_file_;
  std::vector<Segment> segments_;
  std::map<std::string, std::string> files_;
  CharSpan body_;
};

// Math environments recognized as display equations.
const std::vector<std::string>& display_environments();

struct EquationSpan {
  std::string id;
  CharSpan flat;       // whole region including delimiters
  CharSpan body_flat;  // between the delimiters
  TexSpan span;        // original-file location of the whole region
  TexSpan body_span;   // original-file location of the body
  std::string body;
  bool display = false;
  std::string environment;  // "$", "$$", "\(", "\[", or the environment name
  std::optional<std::string> sentence;  // owning sentence, set by segmentation
};

// Finds inline and display math regions in document order. Escaped dollars
// are skipped. Throws UnbalancedDelimiter for an opener without a closer.
std::vector<EquationSpan> detect_equations(std::string_view text, CharSpan range);
inline std::vector<EquationSpan> detect_equations(std::string_view text) {
  return detect_equations(text, {0, text.size()});
}

struct MathPlaceholder {
  std::string equation;
  std::size_t offset = 0;  // into SentenceRecord::text
  std::size_t length = 0;
  friend bool operator==(const MathPlaceholder&, const MathPlaceholder&) = default;
};

struct SentenceRecord {
  std::string id;
  CharSpan flat;
  TexSpan span;
  std::string text;  // detexed, math kept verbatim as $...$
  std::vector<MathPlaceholder> math;
  std::vector<BoundingBox> boxes;
  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

// Splits body text into sentences. Math regions are atomic; display math is
// attached to the sentence it continues (or the preceding one). Sets
// EquationSpan::sentence on every equation that falls inside a sentence.
std::vector<SentenceRecord> segment_sentences(std::string_view text,
                                              std::vector<EquationSpan>& equations,
                                              CharSpan range);
inline std::vector<SentenceRecord> segment_sentences(std::string_view text,
                                                     std::vector<EquationSpan>& equations) {
  return segment_sentences(text, equations, {0, text.size()});
}

// True for characters of running prose: outside math, command names and the
// arguments of reference-like commands (\cite, \ref, \label, ...).
std::vector<bool> prose_mask(std::string_view text, const std::vector<EquationSpan>& equations,
                             CharSpan range);

// Whole-word, case-sensitive occurrences of word within prose characters.
std::vector<CharSpan> find_word(std::string_view text, const std::vector<bool>& prose,
                                std::string_view word, CharSpan range);

struct ScanResult {
  std::vector<EquationSpan> equations;
  std::vector<SentenceRecord> sentences;
};

// detect_equations + segment_sentences over the document body, with every
// span mapped back to its original file.
ScanResult scan_document(const SourceDocument& doc);

}  // namespace noncekit::texscan
