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

#include "pipesim/metrics.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "pipesim/errors.hpp"

namespace pipesim {

metrics_report epoch_metrics(const schedule_grid& grid,
                             const version_ledger& ledger,
                             const cost_model& cost) {
  if (grid.mode() != ledger.mode ||
      grid.config().mini_batches != ledger.cfg.mini_batches)
    throw structural_error("ledger does not match grid");

  const sim_config& cfg = grid.config();
  const int w = cfg.workers;
  const bool nf1b = grid.mode() == schedule_mode::timeprest;
  const double slot_samples =
      nf1b ? static_cast<double>(cfg.samples_per_mini_batch) /
                 cfg.micro_batches
           : static_cast<double>(cfg.samples_per_mini_batch);
  const double backward_payload =
      static_cast<double>(cfg.samples_per_mini_batch) * cost.activation_width;
  const double forward_payload = slot_samples * cost.activation_width;

  metrics_report report;
  int idle = 0;
  for (int t = 1; t <= grid.horizon(); ++t) {
    double slot_cost = 0.0;
    for (int s = 1; s <= w; ++s) {
      const task& cell = grid.at(s, t);
      if (cell.is_idle()) {
        ++idle;
        continue;
      }
      double c = 0.0;
      if (cell.is_forward()) {
        c = cost.forward_slot_cost(slot_samples);
        if (s < w) {
          c += cost.comm_cost(forward_payload);
          ++report.comm_forward_events;
        }
      } else {
        c = cost.backward_slot_cost(slot_samples);
        if (s > 1) {
          c += cost.comm_cost(backward_payload);
          ++report.comm_backward_events;
        }
      }
      slot_cost = std::max(slot_cost, c);
    }
    report.makespan += slot_cost;
  }
  report.idle_fraction =
      static_cast<double>(idle) / (static_cast<double>(w) * grid.horizon());

  retention_timeline retention = build_retention_timeline(ledger, grid);
  report.peak_retained_versions = retention.peak_concurrent;

  // Activation stash: per stage, samples held between a unit's forward visit
  // and its mini-batch's backward visit.
  const int units = nf1b ? cfg.micro_batches : 1;
  const double unit_samples = slot_samples;
  report.peak_stashed_samples.assign(w, 0);
  for (int s = 1; s <= w; ++s) {
    for (int t = 1; t <= grid.horizon(); ++t) {
      double stashed = 0.0;
      for (int k = 1; k <= cfg.mini_batches; ++k) {
        int bslot = grid.backward_slot(k, s);
        for (int j = 1; j <= units; ++j) {
          int f = grid.forward_slot(k, nf1b ? j : 0, s);
          if (f <= t && t <= bslot) stashed += unit_samples;
        }
      }
      report.peak_stashed_samples[s - 1] = std::max(
          report.peak_stashed_samples[s - 1], static_cast<int>(stashed));
    }
  }
  for (int s = 1; s <= w; ++s)
    report.memory_footprint.push_back(
        static_cast<double>(report.peak_retained_versions[s - 1]) *
            cost.parameter_count_per_stage +
        static_cast<double>(report.peak_stashed_samples[s - 1]) *
            cost.activation_width);
  return report;
}

sweep_result sweep(int workers_lo, int workers_hi, int micro_lo, int micro_hi,
                   const std::vector<schedule_mode>& modes,
                   const cost_model& cost, int mini_batches) {
  if (workers_lo > workers_hi || micro_lo > micro_hi)
    throw domain_error("range", "empty sweep range");
  sweep_result result;
  for (int w = workers_lo; w <= workers_hi; ++w) {
    for (int n = micro_lo; n <= micro_hi; ++n) {
      for (schedule_mode mode : modes) {
        sim_config cfg;
        cfg.workers = w;
        cfg.micro_batches = n;
        cfg.mini_batches =
            mini_batches > 0 ? mini_batches : 2 * (w + n);
        cfg.backward_cost_factor = cost.backward_cost_factor;
        try {
          validate(cfg);
          schedule_grid grid = mode == schedule_mode::timeprest
                                   ? build_nf1b_schedule(cfg)
                                   : build_1f1b_schedule(cfg);
          version_ledger ledger = assign_versions(grid, cfg);
          sweep_row row;
          row.workers = w;
          row.micro_batches = n;
          row.mode = to_string(mode);
          row.mini_batches = cfg.mini_batches;
          if (mode == schedule_mode::timeprest) {
            row.closed_form = closed_form_v(w, n);
            row.measured = measure_version_difference(
                ledger, /*strict=*/mini_batches == 0);
          }
          row.metrics = epoch_metrics(grid, ledger, cost);
          result.rows.push_back(std::move(row));
        } catch (const std::exception& e) {
          result.skipped.push_back("W=" + std::to_string(w) +
                                   " N=" + std::to_string(n) + " mode=" +
                                   to_string(mode) + ": " + e.what());
        }
      }
    }
  }
  return result;
}

}  // namespace pipesim
