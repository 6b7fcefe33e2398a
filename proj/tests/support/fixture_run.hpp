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
#include <fstream>
#include <iterator>
#include <string>

#include "noncekit/pipeline.hpp"

// Full pipeline runs over the bundled fixture papers, rendered with the
// in-tree typesetter. The including target defines NONCEKIT_MINITEX,
// NONCEKIT_MINITEX_RASTER and NONCEKIT_FIXTURES.
namespace noncekit::testing {

inline std::filesystem::path fixture_dir(const std::string& name) {
  return std::filesystem::path(NONCEKIT_FIXTURES) / name;
}

inline const char* const kFixtures[] = {"mixture", "srl", "attention", "multifile", "notation"};

inline pipeline::RunConfig fixture_config(const std::string& name, const std::filesystem::path& out) {
  pipeline::RunConfig c;
  c.source_dir = fixture_dir(name);
  c.out_dir = out;
  c.paper = name;
  c.locate.render.compiler_cmd = std::string(NONCEKIT_MINITEX) + " {main} {outdir}";
  c.locate.render.rasterizer_cmd = std::string(NONCEKIT_MINITEX_RASTER) + " -r {dpi} {pdf} {prefix}";
  return c;
}

// Scratch directory removed on destruction.
struct ScratchDir {
  std::filesystem::path path;
  explicit ScratchDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("noncekit_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~ScratchDir() { std::filesystem::remove_all(path); }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace noncekit::testing
