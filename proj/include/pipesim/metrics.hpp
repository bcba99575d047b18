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

#ifndef PIPESIM_METRICS_HPP_
#define PIPESIM_METRICS_HPP_

#include <string>
#include <vector>

#include "pipesim/ledger.hpp"
#include "pipesim/schedule.hpp"

namespace pipesim {

// Wall-time model for discrete slots. Slots are globally synchronous: a
// slot's duration is the largest task cost inside it. Forward cost scales
// with the samples a slot processes (a micro-batch under nF1B, a whole
// mini-batch under 1F1B), so both disciplines push equal sample totals
// through an epoch. Backward slots cost backward_cost_factor times a forward
// slot of the same grid. Communication is a surcharge folded into the cost
// of the task that sends it, proportional to payload bytes.
struct cost_model {
  double forward_cost_per_sample = 1.0;
  double backward_cost_factor = 2.0;
  double comm_cost_per_byte = 0.01;
  int activation_width = 8;             // bytes per sample crossing a boundary
  int parameter_count_per_stage = 1000;

  double forward_slot_cost(double samples) const {
    return forward_cost_per_sample * samples;
  }
  double backward_slot_cost(double samples) const {
    return backward_cost_factor * forward_slot_cost(samples);
  }
  double comm_cost(double bytes) const { return comm_cost_per_byte * bytes; }
};

struct metrics_report {
  double makespan = 0.0;        // wall-time of one epoch
  double idle_fraction = 0.0;   // idle worker-slots / total worker-slots
  long comm_forward_events = 0;
  long comm_backward_events = 0;
  std::vector<int> peak_retained_versions;   // per stage
  std::vector<double> memory_footprint;      // per stage
  std::vector<int> peak_stashed_samples;     // per stage, activation stash

  double throughput() const { return 1.0 / makespan; }
};

metrics_report epoch_metrics(const schedule_grid& grid,
                             const version_ledger& ledger,
                             const cost_model& cost);

struct sweep_row {
  int workers = 0;
  int micro_batches = 0;
  std::string mode;
  int closed_form = 0;    // 0 when not applicable (pipedream)
  int measured = 0;       // 0 when not applicable
  int mini_batches = 0;
  metrics_report metrics;
};

struct sweep_result {
  std::vector<sweep_row> rows;
  std::vector<std::string> skipped;  // diagnostics for invalid cells
};

// One row per (W, N, mode), W and N ascending, modes in the given order.
// M defaults to 2(W+N) per cell so steady-state measurements are valid.
// Invalid cells are reported in `skipped` and do not abort the sweep.
sweep_result sweep(int workers_lo, int workers_hi, int micro_lo, int micro_hi,
                   const std::vector<schedule_mode>& modes,
                   const cost_model& cost, int mini_batches = 0);

}  // namespace pipesim

#endif  // PIPESIM_METRICS_HPP_
