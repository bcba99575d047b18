// Copyright 2026 The pipesim Authors
//
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

#include "pipesim/render.hpp"

#include <algorithm>
#include <string>

namespace pipesim {

namespace {

std::string cell_label(const task& t) {
  if (t.is_idle()) return "";
  if (t.is_backward()) return "B" + std::to_string(t.mini);
  std::string label = std::to_string(t.mini);
  if (t.micro > 0) label += static_cast<char>('A' + (t.micro - 1) % 26);
  return label;
}

std::string cell_color(const task& t) {
  if (t.is_idle()) return "#ffffff";
  if (t.is_backward()) return "#41ab5d";               // green
  return t.mini % 2 == 1 ? "#9ecae1" : "#2171b5";      // light / dark blue
}

}  // namespace

std::string render_ascii(const schedule_grid& grid) {
  int width = 2;
  for (int w = 1; w <= grid.workers(); ++w)
    for (int t = 1; t <= grid.horizon(); ++t)
      width = std::max(width,
                       static_cast<int>(cell_label(grid.at(w, t)).size()));

  std::string out;
  for (int w = 1; w <= grid.workers(); ++w) {
    std::string line;
    for (int t = 1; t <= grid.horizon(); ++t) {
      std::string label = cell_label(grid.at(w, t));
      label.resize(width, ' ');
      if (t > 1) line += ' ';
      line += label;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

std::string render_svg(const schedule_grid& grid) {
  const int cw = 30;   // cell width
  const int ch = 24;   // cell height
  const int pad = 4;
  const int width = pad * 2 + grid.horizon() * cw;
  const int height = pad * 2 + grid.workers() * ch;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  for (int w = 1; w <= grid.workers(); ++w) {
    for (int t = 1; t <= grid.horizon(); ++t) {
      const task& cell = grid.at(w, t);
      int x = pad + (t - 1) * cw;
      int y = pad + (w - 1) * ch;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" +
             std::to_string(y) + "\" width=\"" + std::to_string(cw) +
             "\" height=\"" + std::to_string(ch) + "\" fill=\"" +
             cell_color(cell) + "\" stroke=\"#555555\" stroke-width=\"1\"/>\n";
      if (!cell.is_idle()) {
        bool dark = cell.is_forward() && cell.mini % 2 == 0;
        svg += "<text x=\"" + std::to_string(x + cw / 2) + "\" y=\"" +
               std::to_string(y + ch / 2 + 4) +
               "\" font-family=\"monospace\" font-size=\"11\" "
               "text-anchor=\"middle\" fill=\"" +
               (dark ? "#ffffff" : "#000000") + "\">" + cell_label(cell) +
               "</text>\n";
      }
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace pipesim
