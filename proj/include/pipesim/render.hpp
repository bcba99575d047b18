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

#ifndef PIPESIM_RENDER_HPP_
#define PIPESIM_RENDER_HPP_

#include <string>

#include "pipesim/schedule.hpp"

namespace pipesim {

// One row per worker, one fixed-width column per slot. Forward cells read
// "1A", "2B", ... (micro letter omitted on pipedream grids), backward cells
// "B1", idle cells blank.
std::string render_ascii(const schedule_grid& grid);

// Same layout as SVG: light blue for odd-mini forwards, dark blue for even,
// green backwards, white idle.
std::string render_svg(const schedule_grid& grid);

}  // namespace pipesim

#endif  // PIPESIM_RENDER_HPP_
