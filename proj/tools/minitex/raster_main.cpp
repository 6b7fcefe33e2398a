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

// minitex-raster: writes each page image of a minitex PDF as a PPM.
//   minitex-raster -r <dpi> <file.pdf> <prefix>
// Files are named prefix-N.ppm with N zero-padded to the digits of the page
// count.

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include "minitex.hpp"

int main(int argc, char** argv) {
  int dpi = minitex::kDpi;
  std::string pdf, prefix;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "-r") == 0 && i + 1 < argc) {
      dpi = std::atoi(argv[++i]);
    } else if (pdf.empty()) {
      pdf = argv[i];
    } else {
      prefix = argv[i];
    }
  }
  if (pdf.empty() || prefix.empty() || dpi <= 0) {
    std::cerr << "usage: minitex-raster -r <dpi> <file.pdf> <prefix>\n";
    return 2;
  }
  try {
    auto images = minitex::read_pdf_images(pdf);
    const int digits = static_cast<int>(std::to_string(images.size()).size());
    for (std::size_t p = 0; p < images.size(); ++p) {
      const auto& img = images[p];
      const int w = static_cast<int>(std::lround(img.width * double(dpi) / minitex::kDpi));
      const int h = static_cast<int>(std::lround(img.height * double(dpi) / minitex::kDpi));
      std::string num = std::to_string(p + 1);
      num.insert(0, digits - num.size(), '0');
      std::ofstream out(prefix + "-" + num + ".ppm", std::ios::binary);
      out << "P6\n" << w << " " << h << "\n255\n";
      std::string row(std::size_t(w) * 3, '\0');
      for (int y = 0; y < h; ++y) {
        int sy = std::min(img.height - 1, int(std::floor((y + 0.5) * img.height / h)));
        for (int x = 0; x < w; ++x) {
          int sx = std::min(img.width - 1, int(std::floor((x + 0.5) * img.width / w)));
          std::memcpy(&row[3 * x], &img.rgb[(std::size_t(sy) * img.width + sx) * 3], 3);
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
      }
      if (!out) throw std::runtime_error("cannot write page " + num);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "minitex-raster: " << e.what() << "\n";
    return 1;
  }
}
