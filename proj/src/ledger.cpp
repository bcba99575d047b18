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

#include "pipesim/ledger.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "pipesim/errors.hpp"

namespace pipesim {

namespace {

void check_domain(int workers, int micro_batches) {
  if (workers < 2)
    throw domain_error("workers", "workers: W must satisfy W >= 2");
  if (micro_batches < 2)
    throw domain_error("micro_batches",
                       "micro_batches: N must satisfy N >= 2");
}

// Latest version whose stage-1 commit lies strictly before `slot`.
int latest_full_commit_before(const std::vector<int>& full_commit_slot,
                              int slot) {
  int v = 0;
  for (int k = 1; k < static_cast<int>(full_commit_slot.size()); ++k)
    if (full_commit_slot[k] < slot) v = k;
  return v;
}

}  // namespace

int version_ledger::pinned_version(int mini, int micro) const {
  for (const auto& p : pins)
    if (p.mini == mini && p.micro == micro) return p.version;
  throw structural_error("no pin recorded for mini " + std::to_string(mini) +
                         " micro " + std::to_string(micro));
}

version_ledger assign_versions(const schedule_grid& grid,
                               const sim_config& cfg) {
  validate(cfg);
  if (grid.workers() != cfg.workers ||
      grid.config().mini_batches != cfg.mini_batches)
    throw structural_error("grid does not match config");
  {
    validation_report report = validate_schedule(grid, cfg);
    if (!report.valid())
      throw structural_error("invalid grid: " +
                             report.violations.front().message);
  }

  const int w = cfg.workers;
  const int m = cfg.mini_batches;
  const bool nf1b = grid.mode() == schedule_mode::timeprest;
  const int units = nf1b ? cfg.micro_batches : 1;

  version_ledger ledger;
  ledger.cfg = cfg;
  ledger.mode = grid.mode();
  ledger.full_commit_slot.assign(m + 1, 0);
  ledger.update_source.assign(m, 0);

  for (int k = 1; k <= m; ++k) {
    for (int s = w; s >= 1; --s)
      ledger.commits.push_back({k, k, s, grid.backward_slot(k, s)});
    ledger.full_commit_slot[k] = grid.backward_slot(k, 1);
  }
  std::stable_sort(ledger.commits.begin(), ledger.commits.end(),
                   [](const commit_event& a, const commit_event& b) {
                     return a.slot < b.slot;
                   });

  for (int k = 1; k <= m; ++k)
    for (int j = 1; j <= units; ++j) {
      int micro = nf1b ? j : 0;
      int inj = grid.forward_slot(k, micro, 1);
      ledger.pins.push_back(
          {k, micro, inj,
           latest_full_commit_before(ledger.full_commit_slot, inj)});
    }

  for (int k = 1; k <= m; ++k) {
    int release = grid.backward_slot(k, w);
    if (nf1b) {
      ledger.update_source[k - 1] =
          latest_full_commit_before(ledger.full_commit_slot, release);
      for (int s = w; s >= 1; --s) {
        int arrival = grid.backward_slot(k, s);
        // Latest version committed on this stage strictly before arrival.
        int used = 0;
        for (int v = 1; v < k; ++v)
          if (grid.backward_slot(v, s) < arrival) used = v;
        ledger.consumptions.push_back({k, s, arrival, used});
      }
    } else {
      int stashed = ledger.pinned_version(k, 0);
      ledger.update_source[k - 1] = stashed;
      for (int s = w; s >= 1; --s)
        ledger.consumptions.push_back(
            {k, s, grid.backward_slot(k, s), stashed});
    }
  }
  return ledger;
}

int measure_version_difference(const version_ledger& ledger, bool strict) {
  const int m = ledger.cfg.mini_batches;
  const int steady_floor =
      2 * (ledger.cfg.workers + ledger.cfg.micro_batches);
  if (strict && m < steady_floor)
    throw insufficient_horizon_error(
        "M = " + std::to_string(m) + " is below the steady-state horizon " +
        std::to_string(steady_floor) + " = 2(W+N)");
  if (m < 2)
    throw insufficient_horizon_error("at least two mini-batches required");

  int v = 0;
  for (int k = m / 2 + 1; k <= m; ++k) {
    int gap = k - ledger.update_source[k - 1];
    if (v == 0) v = gap;
    if (gap != v)
      throw insufficient_horizon_error(
          "version-difference not steady: gap " + std::to_string(gap) +
          " at mini-batch " + std::to_string(k) + " vs " + std::to_string(v));
  }
  return v;
}

int closed_form_v(int workers, int micro_batches) {
  check_domain(workers, micro_batches);
  return (workers + micro_batches - 2) / micro_batches;
}

int forward_span(int workers, int micro_batches, int mini_ordinal) {
  check_domain(workers, micro_batches);
  if (mini_ordinal < 1)
    throw domain_error("mini_ordinal", "mini-batch ordinal must be >= 1");
  return workers + micro_batches - 2 + mini_ordinal;
}

int backward_span(int workers) {
  if (workers < 2)
    throw domain_error("workers", "workers: W must satisfy W >= 2");
  return workers;
}

bool overlap_condition(int workers, int micro_batches) {
  check_domain(workers, micro_batches);
  return workers > micro_batches + 1;
}

sequence_decomposition decompose_sequences(const version_ledger& ledger,
                                           int mini_batches) {
  const int m = mini_batches;
  if (m > ledger.cfg.mini_batches)
    throw structural_error("ledger covers fewer mini-batches than requested");

  // successor[i]: the mini-batch whose backward consumed version i.
  std::map<int, int> successor;
  for (int k = 1; k <= m; ++k) {
    int src = ledger.update_source[k - 1];
    if (src == 0) continue;  // fed by the initialization, starts a chain
    if (successor.count(src))
      throw structural_error("version " + std::to_string(src) +
                             " consumed by two backwards");
    successor[src] = k;
  }

  sequence_decomposition out;
  std::vector<bool> chained(m + 1, false);
  for (int k = 1; k <= m; ++k) {
    if (chained[k] || ledger.update_source[k - 1] != 0) continue;
    std::vector<int> chain;
    for (int cur = k; cur != 0 && cur <= m;) {
      chain.push_back(cur);
      chained[cur] = true;
      auto it = successor.find(cur);
      cur = it == successor.end() ? 0 : it->second;
    }
    out.sequences.push_back(std::move(chain));
  }
  // Any mini-batch not reached from a version-0 chain head starts its own.
  for (int k = 1; k <= m; ++k) {
    if (chained[k]) continue;
    std::vector<int> chain;
    for (int cur = k; cur != 0 && cur <= m;) {
      if (chained[cur]) break;
      chain.push_back(cur);
      chained[cur] = true;
      auto it = successor.find(cur);
      cur = it == successor.end() ? 0 : it->second;
    }
    out.sequences.push_back(std::move(chain));
  }
  std::sort(out.sequences.begin(), out.sequences.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  out.version_difference_measured =
      measure_version_difference(ledger, /*strict=*/false);
  return out;
}

int retention_timeline::retained_count(int stage, int slot) const {
  int count = 0;
  for (const auto& iv : per_stage[stage - 1])
    if (iv.retained_from_slot <= slot && slot < iv.freed_at_slot) ++count;
  return count;
}

retention_timeline build_retention_timeline(const version_ledger& ledger,
                                            const schedule_grid& grid) {
  if (grid.mode() != ledger.mode ||
      grid.config().mini_batches != ledger.cfg.mini_batches)
    throw structural_error("ledger does not match grid");

  const int w = ledger.cfg.workers;
  const int m = ledger.cfg.mini_batches;
  const bool nf1b = ledger.mode == schedule_mode::timeprest;

  retention_timeline timeline;
  timeline.horizon = grid.horizon();
  timeline.per_stage.resize(w);
  timeline.peak_concurrent.assign(w, 0);

  // pinned_by[v]: mini/micro pairs whose forward runs on version v.
  std::vector<std::vector<std::pair<int, int>>> pinned_by(m + 1);
  for (const auto& p : ledger.pins)
    pinned_by[p.version].push_back({p.mini, p.micro});

  for (int s = 1; s <= w; ++s) {
    auto stage_commit = [&](int v) {
      return v == 0 ? 0 : grid.backward_slot(v, s);
    };
    for (int v = 0; v <= m; ++v) {
      // Held from the slot its backward produces it on this stage until the
      // slot after both a newer version exists here and the last forward
      // pinned to it has passed. The final version is held to the horizon.
      int until = v < m ? stage_commit(v + 1) : grid.horizon();
      for (auto [mini, micro] : pinned_by[v]) {
        until = std::max(until, grid.forward_slot(mini, micro, s));
        if (!nf1b) until = std::max(until, grid.backward_slot(mini, s));
      }
      timeline.per_stage[s - 1].push_back({v, stage_commit(v), until + 1});
    }
    for (int t = 1; t <= grid.horizon(); ++t)
      timeline.peak_concurrent[s - 1] = std::max(
          timeline.peak_concurrent[s - 1], timeline.retained_count(s, t));
  }
  return timeline;
}

bool staleness_report_t::all_zero() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const staleness_entry& e) { return e.staleness == 0; });
}

int staleness_report_t::steady_state_staleness(int first_steady_mini) const {
  int value = 0;
  for (const auto& e : entries)
    if (e.mini >= first_steady_mini) value = std::max(value, e.staleness);
  return value;
}

staleness_report_t staleness_report(const version_ledger& ledger) {
  // Latest stage-local commit strictly before each backward's arrival.
  std::map<std::pair<int, int>, int> commit_slot;  // (version, stage) -> slot
  for (const auto& c : ledger.commits) commit_slot[{c.version, c.stage}] = c.slot;

  staleness_report_t report;
  for (const auto& use : ledger.consumptions) {
    int latest = 0;
    for (int v = 1; v <= ledger.cfg.mini_batches; ++v) {
      auto it = commit_slot.find({v, use.stage});
      if (it != commit_slot.end() && it->second < use.slot) latest = v;
    }
    report.entries.push_back({use.mini, use.stage, latest - use.version});
  }
  return report;
}

}  // namespace pipesim
