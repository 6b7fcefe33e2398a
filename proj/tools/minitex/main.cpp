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

// minitex: typesets a LaTeX subset into a PDF of page images.
//   minitex <main.tex> <outdir>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "minitex.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: minitex <main.tex> <outdir>\n";
    return 2;
  }
  namespace fs = std::filesystem;
  fs::path main_path = argv[1];
  fs::path outdir = argv[2];
  const std::string stem = main_path.stem().string();
  std::ofstream log(outdir / (stem + ".log"));
  try {
    fs::path dir = fs::current_path();
    fs::path rel = main_path.is_absolute() ? fs::relative(main_path, dir) : main_path;
    auto doc = minitex::typeset(dir, rel.string());
    minitex::write_pdf(outdir / (stem + ".pdf"), minitex::render(doc));
    std::cout << "Output written on " << (outdir / (stem + ".pdf")).string() << " (" << doc.pages
              << " pages).\n";
    log << "pages " << doc.pages << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cout << e.what() << "\n";
    log << e.what() << "\n";
    return 1;
  }
}
