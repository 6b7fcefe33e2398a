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

// noncekit: runs the analysis pipeline, validates manifests and serves them.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "noncekit/diagram.hpp"
#include "noncekit/manifest.hpp"
#include "noncekit/pipeline.hpp"
#include "noncekit/serve.hpp"

namespace fs = std::filesystem;
using namespace noncekit;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

int cmd_run(const pipeline::RunConfig& cfg, bool serve_after, const std::string& host, int port) {
  pipeline::RunSummary summary;
  try {
    summary = pipeline::run(cfg);
  } catch (const pipeline::StageError& e) {
    std::cerr << "error in stage " << e.what() << "\n";
    return 1;
  }
  for (const auto& a : summary.artifacts) std::cout << "wrote " << (cfg.out_dir / a).string() << "\n";
  const auto& r = summary.report;
  if (r.batches || summary.reused_boxes)
    std::cout << "locate: " << r.batches << " batches, " << r.compiles << " compiles, "
              << r.misses.size() << " misses" << (summary.reused_boxes ? " (reused)" : "") << "\n";
  for (const auto& m : r.misses) std::cout << "  miss " << m << "\n";
  std::cout << "entities: " << summary.entities << ", definitions: " << summary.definitions << "\n";
  if (!serve_after) return 0;
  serve::PaperStore store;
  std::string paper = cfg.paper.empty() ? fs::weakly_canonical(cfg.source_dir).filename().string() : cfg.paper;
  store.add(paper, cfg.out_dir / "manifest.json");
  serve::Service service(store);
  std::cout << "serving " << paper << " on http://" << host << ":" << port << "/v1/papers/" << paper
            << "/entities\n"
            << std::flush;
  serve::serve_http(service, host, port);
  return 0;
}

int cmd_validate(const fs::path& path) {
  try {
    auto m = manifest::load_manifest(path);
    std::cout << "OK\n" << manifest::count_report(m);
    return 0;
  } catch (const manifest::ValidationError& e) {
    std::cout << "INVALID: " << e.problems().size() << " problem(s)\n";
    for (const auto& p : e.problems()) std::cout << "  " << p << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cout << "INVALID: " << e.what() << "\n";
    return 1;
  }
}

int cmd_diagram(const fs::path& path, const std::string& equation) {
  try {
    auto m = manifest::load_manifest(path);
    std::cout << dump(diagram::to_json(diagram::plan_diagram(m, equation)));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locate, define and serve nonce words in TeX papers"};
  app.require_subcommand(1);

  pipeline::RunConfig cfg;
  cfg.locate.render.compiler_cmd = env_or("NONCEKIT_COMPILER_CMD", cfg.locate.render.compiler_cmd);
  cfg.locate.render.rasterizer_cmd = env_or("NONCEKIT_RASTERIZER_CMD", cfg.locate.render.rasterizer_cmd);
  std::string stages = "scan,parse,locate,extract,manifest";
  bool no_macros = false, serve_after = false;
  std::string host = "127.0.0.1";
  int port = 8080;

  auto* run = app.add_subcommand("run", "Run pipeline stages over a TeX source directory");
  run->add_option("--source", cfg.source_dir, "Directory holding the TeX sources")->required();
  run->add_option("--main", cfg.main_file, "Main TeX file")->capture_default_str();
  run->add_option("--out", cfg.out_dir, "Artifact directory")->required();
  run->add_option("--stages", stages, "Comma-separated prefix of scan,parse,locate,extract,manifest")
      ->capture_default_str();
  run->add_option("--dpi", cfg.locate.render.dpi, "Raster resolution")->capture_default_str();
  run->add_option("--colors", cfg.locate.capacity, "Colors per compile")->capture_default_str();
  run->add_option("--workers", cfg.locate.workers, "Parallel compiles")->capture_default_str();
  run->add_option("--tolerance", cfg.locate.tolerance, "Per-channel color tolerance")->capture_default_str();
  run->add_flag("--no-macro-expand", no_macros, "Parse equations without expanding user macros");
  run->add_option("--compiler-cmd", cfg.locate.render.compiler_cmd,
                  "Compile command template ({main} {outdir} {jobname})");
  run->add_option("--rasterizer-cmd", cfg.locate.render.rasterizer_cmd,
                  "Rasterize command template ({dpi} {pdf} {prefix})");
  run->add_option("--paper", cfg.paper, "Paper id (default: source directory name)");
  run->add_flag("--serve", serve_after, "Serve the manifest after building it");
  run->add_option("--host", host)->capture_default_str();
  run->add_option("--port", port)->capture_default_str();

  fs::path manifest_path;
  auto* validate = app.add_subcommand("validate", "Check a manifest and print counts");
  validate->add_option("manifest", manifest_path, "manifest.json")->required();

  fs::path diagram_manifest;
  std::string diagram_equation;
  auto* diagram_cmd = app.add_subcommand("diagram", "Print the label layout for one equation");
  diagram_cmd->add_option("manifest", diagram_manifest, "manifest.json")->required();
  diagram_cmd->add_option("equation", diagram_equation, "equation id")->required();

  std::vector<std::string> papers;
  fs::path papers_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Serve manifests over HTTP");
  serve_cmd->add_option("--paper", papers, "id=path/to/manifest.json (repeatable)");
  serve_cmd->add_option("--dir", papers_dir, "Directory of <id>/manifest.json");
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    try {
      cfg.stages = pipeline::parse_stages(stages);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    cfg.expand_macros = !no_macros;
    if (serve_after && cfg.stages.back() != pipeline::Stage::manifest) {
      std::cerr << "error: --serve needs the manifest stage\n";
      return 2;
    }
    return cmd_run(cfg, serve_after, host, port);
  }
  if (*validate) return cmd_validate(manifest_path);
  if (*diagram_cmd) return cmd_diagram(diagram_manifest, diagram_equation);
  if (*serve_cmd) {
    serve::PaperStore store;
    for (const auto& p : papers) {
      auto eq = p.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --paper expects id=path\n";
        return 2;
      }
      store.add(p.substr(0, eq), p.substr(eq + 1));
    }
    if (!papers_dir.empty()) store.add_directory(papers_dir);
    if (store.papers().empty()) {
      std::cerr << "error: no papers to serve\n";
      return 2;
    }
    serve::Service service(store);
    std::cout << "serving " << store.papers().size() << " paper(s) on http://" << host << ":" << port
              << "/v1/papers\n"
              << std::flush;
    try {
      serve::serve_http(service, host, port);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
