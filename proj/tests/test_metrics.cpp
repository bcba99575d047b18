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

#include <cmath>

#include "doctest.h"
#include "pipesim/export.hpp"
#include "pipesim/metrics.hpp"

using namespace pipesim;

namespace {

sim_config make_config(int w, int n, int m, int samples = 64) {
  sim_config cfg;
  cfg.workers = w;
  cfg.micro_batches = n;
  cfg.mini_batches = m;
  cfg.samples_per_mini_batch = samples;
  return cfg;
}

metrics_report metrics_for(const sim_config& cfg, schedule_mode mode,
                           const cost_model& cost) {
  schedule_grid grid = mode == schedule_mode::timeprest
                           ? build_nf1b_schedule(cfg)
                           : build_1f1b_schedule(cfg);
  return epoch_metrics(grid, assign_versions(grid, cfg), cost);
}

cost_model unit_costs(int slot_samples) {
  cost_model cost;
  cost.forward_cost_per_sample = 1.0 / slot_samples;
  cost.backward_cost_factor = 1.0;
  cost.comm_cost_per_byte = 0.0;
  return cost;
}

}  // namespace

TEST_CASE("comm events: (4,2,7) counts 42 forward and 21 backward crossings") {
  metrics_report r =
      metrics_for(make_config(4, 2, 7), schedule_mode::timeprest, cost_model{});
  CHECK(r.comm_forward_events == 7 * 2 * 3);
  CHECK(r.comm_backward_events == 7 * 3);
  CHECK(r.comm_forward_events + r.comm_backward_events == 63);
}

TEST_CASE("comm events scale as MN(W-1) forward and M(W-1) backward") {
  for (int w : {2, 5})
    for (int n : {2, 4}) {
      int m = 2 * (w + n);
      metrics_report r = metrics_for(make_config(w, n, m),
                                     schedule_mode::timeprest, cost_model{});
      CHECK(r.comm_forward_events == static_cast<long>(m) * n * (w - 1));
      CHECK(r.comm_backward_events == static_cast<long>(m) * (w - 1));
    }
}

TEST_CASE("makespan with unit slot costs equals the horizon") {
  sim_config cfg = make_config(2, 2, 1, 2);  // micro slot = 1 sample
  metrics_report r =
      metrics_for(cfg, schedule_mode::timeprest, unit_costs(1));
  CHECK(r.makespan == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("throughput is exactly the reciprocal of makespan") {
  metrics_report r = metrics_for(make_config(4, 4, 8),
                                 schedule_mode::timeprest, cost_model{});
  CHECK(r.throughput() == 1.0 / r.makespan);
  CHECK(r.makespan * r.throughput() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("makespan: nf1b beats the 1f1b baseline at (4,4,16), hand-traced "
          "prefix pinned") {
  // M = 2 prefix, backward factor 2, 64 samples, no comm surcharge:
  // nf1b horizon 16 = 8 backward slots (cost 2*16) + 8 micro slots (16);
  // 1f1b horizon 10 = 6 backward slots (cost 2*64) + 4 forward slots (64).
  cost_model cost;
  cost.comm_cost_per_byte = 0.0;
  metrics_report nf2 =
      metrics_for(make_config(4, 4, 2), schedule_mode::timeprest, cost);
  metrics_report pd2 =
      metrics_for(make_config(4, 4, 2), schedule_mode::pipedream, cost);
  CHECK(nf2.makespan == doctest::Approx(8 * 32 + 8 * 16).epsilon(1e-12));
  CHECK(pd2.makespan == doctest::Approx(6 * 128 + 4 * 64).epsilon(1e-12));

  cost_model defaults;
  metrics_report nf =
      metrics_for(make_config(4, 4, 16), schedule_mode::timeprest, defaults);
  metrics_report pd =
      metrics_for(make_config(4, 4, 16), schedule_mode::pipedream, defaults);
  CHECK(nf.makespan < pd.makespan);
}

TEST_CASE("idle fraction: more micro-batches fill more bubbles at (4, M=8)") {
  metrics_report n2 = metrics_for(make_config(4, 2, 8),
                                  schedule_mode::timeprest, cost_model{});
  metrics_report n4 = metrics_for(make_config(4, 4, 8),
                                  schedule_mode::timeprest, cost_model{});
  CHECK(n2.idle_fraction >= 0.0);
  CHECK(n2.idle_fraction <= 1.0);
  CHECK(n4.idle_fraction < n2.idle_fraction);
}

TEST_CASE("makespan is monotone non-increasing in N for fixed W, M, samples") {
  cost_model cost;
  double previous = 0.0;
  for (int n : {2, 4, 8}) {
    metrics_report r = metrics_for(make_config(4, n, 8, 64),
                                   schedule_mode::timeprest, cost);
    if (previous > 0.0) CHECK(r.makespan <= previous);
    previous = r.makespan;
  }
}

TEST_CASE("memory footprint per stage does not exceed the 1f1b baseline") {
  cost_model cost;
  for (int w : {2, 4}) {
    sim_config cfg = make_config(w, 2, 8);
    metrics_report nf = metrics_for(cfg, schedule_mode::timeprest, cost);
    metrics_report pd = metrics_for(cfg, schedule_mode::pipedream, cost);
    for (int s = 0; s < w; ++s) {
      CHECK(nf.peak_retained_versions[s] <= pd.peak_retained_versions[s]);
      CHECK(nf.memory_footprint[s] <= pd.memory_footprint[s]);
    }
  }
}

TEST_CASE("sweep: 49 deterministic rows over the full grid") {
  sweep_result result =
      sweep(2, 8, 2, 8, {schedule_mode::timeprest}, cost_model{});
  CHECK(result.rows.size() == 49);
  CHECK(result.skipped.empty());
  int agree = 0;
  for (const auto& row : result.rows)
    if (row.measured == row.closed_form) ++agree;
  CHECK(agree == 46);  // (6,2), (8,2), (8,3) diverge; see the sweep CSV
}

TEST_CASE("sweep: a single cell matches a direct epoch_metrics call") {
  cost_model cost;
  sweep_result result = sweep(4, 4, 2, 2, {schedule_mode::timeprest}, cost);
  REQUIRE(result.rows.size() == 1);
  sim_config cfg = make_config(4, 2, 2 * (4 + 2));
  cfg.backward_cost_factor = cost.backward_cost_factor;
  metrics_report direct = metrics_for(cfg, schedule_mode::timeprest, cost);
  CHECK(result.rows[0].metrics.makespan == direct.makespan);
  CHECK(result.rows[0].metrics.idle_fraction == direct.idle_fraction);
  CHECK(result.rows[0].measured == 2);
  CHECK(result.rows[0].closed_form == 2);
}

TEST_CASE("sweep rejects empty ranges") {
  CHECK_THROWS_AS(sweep(5, 4, 2, 2, {schedule_mode::timeprest}, cost_model{}),
                  domain_error);
}

TEST_CASE("sweep csv is byte-stable and carries the schema line") {
  sweep_result result =
      sweep(2, 3, 2, 3, {schedule_mode::timeprest, schedule_mode::pipedream},
            cost_model{});
  std::string a = sweep_csv(result);
  std::string b = sweep_csv(result);
  CHECK(a == b);
  CHECK(a.rfind("# pipesim-sweep 1\n", 0) == 0);
  CHECK(a.find("workers,micro_batches,mode,") != std::string::npos);
}
