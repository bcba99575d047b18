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

#ifndef PIPESIM_CONFIG_HPP_
#define PIPESIM_CONFIG_HPP_

#include <cstdint>

#include "pipesim/errors.hpp"

namespace pipesim {

// Scheduling discipline of a simulated run.
enum class schedule_mode {
  timeprest,  // nF1B: N micro-batch forwards per mini-batch, one backward
  pipedream,  // 1F1B baseline: whole mini-batches, alternating F/B
};

const char* to_string(schedule_mode mode);

struct sim_config {
  int workers = 2;              // W, pipeline stages
  int micro_batches = 2;        // N, micro-batches per mini-batch
  int mini_batches = 1;         // M, mini-batches per epoch
  double backward_cost_factor = 2.0;  // wall-time of a backward slot relative
                                      // to a forward slot of the same grid
  int samples_per_mini_batch = 64;
  std::uint64_t seed = 0;
};

// Throws domain_error naming the offending field. W and N have lower bound 2;
// M has lower bound 1; the cost factor may not drop below 1.
inline void validate(const sim_config& cfg) {
  if (cfg.workers < 2)
    throw domain_error("workers", "workers: W must satisfy W >= 2 (got " +
                                       std::to_string(cfg.workers) + ")");
  if (cfg.micro_batches < 2)
    throw domain_error("micro_batches",
                       "micro_batches: N must satisfy N >= 2 (got " +
                           std::to_string(cfg.micro_batches) + ")");
  if (cfg.mini_batches < 1)
    throw domain_error("mini_batches",
                       "mini_batches: M must satisfy M >= 1 (got " +
                           std::to_string(cfg.mini_batches) + ")");
  if (cfg.backward_cost_factor < 1.0)
    throw domain_error("backward_cost_factor",
                       "backward_cost_factor must be >= 1");
  if (cfg.samples_per_mini_batch < 1)
    throw domain_error("samples_per_mini_batch",
                       "samples_per_mini_batch must be >= 1");
}

inline const char* to_string(schedule_mode mode) {
  return mode == schedule_mode::timeprest ? "timeprest" : "pipedream";
}

}  // namespace pipesim

#endif  // PIPESIM_CONFIG_HPP_
