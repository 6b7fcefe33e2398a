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
#include <string>
#include <vector>

#include "noncekit/defextract.hpp"
#include "noncekit/locate.hpp"
#include "noncekit/model.hpp"
#include "noncekit/texscan.hpp"

namespace noncekit::pipeline {

enum class Stage { scan, parse, locate, extract, manifest };
std::string_view to_string(Stage s);

// "scan,parse" -> stages. Must name a prefix of the stage order.
std::vector<Stage> parse_stages(std::string_view csv);

class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& cause)
      : Error(std::string(to_string(stage)) + ": " + cause), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

// Everything known about one paper, filled in stage by stage.
struct Analysis {
  std::string paper;
  std::string main_file;
  std::map<std::string, std::string> files;
  std::vector<SentenceRecord> sentences;
  std::vector<EquationRecord> equations;
  // Whole-region location of equations whose body cannot be wrapped in a
  // group on its own (alignment tabs, row breaks).
  std::map<std::string, TexSpan> regions;
  std::vector<Entity> entities;
  std::vector<DefinitionRecord> definitions;
  UsageIndex usages;
  std::vector<std::string> warnings;

  // Parse-stage state, not persisted.
  std::vector<defextract::ParsedEquation> parsed;
};

Analysis scan(const texscan::SourceDocument& doc, std::string paper);

// Parses equations into symbol entities and spots abbreviation terms.
void parse(Analysis& a, const texscan::SourceDocument& doc, bool expand_macros = true);

// Sentences, equations, leaf symbols and term occurrences to color.
std::vector<locate::Target> build_targets(const Analysis& a);

// Attaches located boxes; composite symbols get the union of their parts.
void apply_boxes(Analysis& a, const std::map<std::string, std::vector<BoundingBox>>& located);

// Definitions and the usage index. Definitions whose source holds no
// occurrence of the definiendum are dropped with a warning.
void extract(Analysis& a);

struct RunConfig {
  std::filesystem::path source_dir;
  std::string main_file = "main.tex";
  std::filesystem::path out_dir;
  std::vector<Stage> stages = {Stage::scan, Stage::parse, Stage::locate, Stage::extract,
                               Stage::manifest};
  locate::LocateConfig locate;
  bool expand_macros = true;
  std::string paper;  // defaults to the source directory name
};

struct RunSummary {
  std::vector<std::string> artifacts;
  locate::LocateReport report;
  bool reused_boxes = false;
  std::size_t entities = 0;
  std::size_t definitions = 0;
};

// Runs the selected stages and writes one JSON artifact per stage. The
// locate stage reuses boxes.json when its inputs are unchanged.
RunSummary run(const RunConfig& config);

}  // namespace noncekit::pipeline
