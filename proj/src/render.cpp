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

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "noncekit/kernels.hpp"
#include "noncekit/locate.hpp"

extern char** environ;

namespace noncekit::locate {

namespace fs = std::filesystem;

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::string fill(std::string tmpl, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string marker = "{" + key + "}";
    for (std::size_t pos = 0; (pos = tmpl.find(marker, pos)) != std::string::npos;) {
      std::string q = shell_quote(value);
      tmpl.replace(pos, marker.size(), q);
      pos += q.size();
    }
  }
  return tmpl;
}

// Runs cmd through /bin/sh in cwd with stdout and stderr appended to log.
int run_shell(const std::string& cmd, const fs::path& cwd, const fs::path& log) {
  const std::string full = "cd " + shell_quote(cwd.string()) + " && " + cmd;
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&fa, 1, log.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&fa, 1, 2);
  const char* argv[] = {"/bin/sh", "-c", full.c_str(), nullptr};
  pid_t pid = 0;
  int rc = posix_spawn(&pid, "/bin/sh", &fa, nullptr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) return -1;
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

std::string tail_of(const fs::path& p, std::size_t n = 2000) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  return s.size() > n ? s.substr(s.size() - n) : s;
}

class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (fs::temp_directory_path() / "noncekit-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw Error("cannot create scratch directory");
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

RasterPage read_ppm(const fs::path& path, int index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RasterError("cannot open " + path.string());
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t += c;
    }
    return t;
  };
  if (token() != "P6") throw RasterError(path.string() + ": not a binary PPM");
  RasterPage page;
  page.index = index;
  try {
    page.width = std::stoi(token());
    page.height = std::stoi(token());
    if (std::stoi(token()) != 255) throw RasterError(path.string() + ": maxval must be 255");
  } catch (const std::logic_error&) {
    throw RasterError(path.string() + ": bad PPM header");
  }
  if (page.width <= 0 || page.height <= 0) throw RasterError(path.string() + ": empty image");
  std::size_t n = static_cast<std::size_t>(page.width) * page.height;
  std::vector<unsigned char> raw(n * 3);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw RasterError(path.string() + ": truncated pixel data");
  page.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    page.pixels[i] = kernels::pack_rgb(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
  return page;
}

void write_ppm(const fs::path& path, const RasterPage& page) {
  std::ofstream out(path, std::ios::binary);
  out << "P6\n" << page.width << " " << page.height << "\n255\n";
  std::vector<unsigned char> raw(page.pixels.size() * 3);
  for (std::size_t i = 0; i < page.pixels.size(); ++i) {
    raw[3 * i] = page.pixels[i] & 0xFF;
    raw[3 * i + 1] = (page.pixels[i] >> 8) & 0xFF;
    raw[3 * i + 2] = (page.pixels[i] >> 16) & 0xFF;
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw RasterError("cannot write " + path.string());
}

std::vector<RasterPage> render_document(const RenderConfig& config, const fs::path& source_dir,
                                        const std::string& main_file,
                                        const std::map<std::string, std::string>& overrides) {
  ScratchDir scratch;
  const fs::path src = scratch.path() / "src";
  const fs::path out = scratch.path() / "out";
  fs::copy(source_dir, src, fs::copy_options::recursive);
  fs::create_directories(out);
  for (const auto& [rel, text] : overrides) {
    std::ofstream f(src / rel, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw CompileError("cannot write instrumented " + rel, "");
  }
  const fs::path log = scratch.path() / "render.log";
  const std::string stem = fs::path(main_file).stem().string();
  const fs::path pdf = out / (stem + ".pdf");

  std::string compile = fill(config.compiler_cmd, {{"main", (src / main_file).string()},
                                                   {"outdir", out.string()},
                                                   {"jobname", stem}});
  int rc = run_shell(compile, src, log);
  if (rc != 0 || !fs::exists(pdf))
    throw CompileError("compiler exited with status " + std::to_string(rc), tail_of(log));

  const fs::path prefix = out / "page";
  std::string raster = fill(config.rasterizer_cmd, {{"dpi", std::to_string(config.dpi)},
                                                    {"pdf", pdf.string()},
                                                    {"prefix", prefix.string()}});
  rc = run_shell(raster, src, log);
  if (rc != 0) throw RasterError("rasterizer exited with status " + std::to_string(rc) + ": " +
                                 tail_of(log, 500));

  static const std::regex name(R"(page-(\d+)\.ppm)");
  std::vector<std::pair<int, fs::path>> images;
  for (const auto& entry : fs::directory_iterator(out)) {
    std::smatch m;
    std::string fname = entry.path().filename().string();
    if (std::regex_match(fname, m, name)) images.emplace_back(std::stoi(m[1]), entry.path());
  }
  if (images.empty()) throw RasterError("rasterizer produced no pages");
  std::sort(images.begin(), images.end());
  std::vector<RasterPage> pages;
  for (std::size_t i = 0; i < images.size(); ++i)
    pages.push_back(read_ppm(images[i].second, static_cast<int>(i)));
  return pages;
}

}  // namespace noncekit::locate
