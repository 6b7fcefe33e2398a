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
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "noncekit/manifest.hpp"

namespace noncekit::serve {

// Manifests by paper id, loaded on first use and then shared read-only.
class PaperStore {
 public:
  void add(std::string paper, std::filesystem::path manifest);
  // Registers every <dir>/<paper>/manifest.json.
  void add_directory(const std::filesystem::path& dir);
  bool has(std::string_view paper) const;
  std::vector<std::string> papers() const;
  // nullptr for unknown papers. Load failures are rethrown on every call.
  std::shared_ptr<const manifest::PaperManifest> get(std::string_view paper) const;

 private:
  struct Entry {
    std::filesystem::path path;
    mutable std::mutex lock;
    mutable std::shared_ptr<const manifest::PaperManifest> loaded;
    mutable std::string error;
  };
  std::map<std::string, std::unique_ptr<Entry>, std::less<>> entries_;
};

struct Request {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
};

struct Response {
  int status = 200;
  std::string body;
};

// Routes /v1/papers/... requests. Bodies are JSON; errors are
// {"code": ..., "message": ...}.
class Service {
 public:
  explicit Service(const PaperStore& store) : store_(store) {}
  Response handle(const Request& request) const;

 private:
  const PaperStore& store_;
};

// Response payloads, exposed for tests.
json entities_json(const manifest::PaperManifest& m);
json definition_view_json(const manifest::DefinitionView& v);
json list_json(const manifest::PaperManifest& m, std::string_view entity, std::string_view kind);
json glossary_json(const manifest::PaperManifest& m);
json declutter_json(const manifest::Declutter& d, std::string_view entity);

// Blocks serving HTTP until the process is stopped.
void serve_http(const Service& service, const std::string& host, int port);

}  // namespace noncekit::serve
