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

#include "pipesim/export.hpp"

#include <algorithm>
#include <string>

#include "json.hpp"
#include "pipesim/text.hpp"

namespace pipesim {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json config_json(const sim_config& cfg, schedule_mode mode) {
  ordered_json j;
  j["workers"] = cfg.workers;
  j["micro_batches"] = cfg.micro_batches;
  j["mini_batches"] = cfg.mini_batches;
  j["mode"] = to_string(mode);
  j["backward_cost_factor"] = cfg.backward_cost_factor;
  j["samples_per_mini_batch"] = cfg.samples_per_mini_batch;
  j["seed"] = cfg.seed;
  return j;
}

ordered_json analysis_json(const schedule_grid& grid,
                           const version_ledger& ledger) {
  const sim_config& cfg = grid.config();
  bool nf1b = grid.mode() == schedule_mode::timeprest;
  ordered_json analysis;
  // Mini-batch 1's forward span: W+N-1 micro slots under nF1B, one forward
  // unit per stage under the baseline.
  analysis["f1"] =
      nf1b ? cfg.workers + cfg.micro_batches - 1 : cfg.workers;
  analysis["b"] = cfg.workers;
  if (nf1b) {
    analysis["v_closed_form"] = closed_form_v(cfg.workers, cfg.micro_batches);
    try {
      analysis["v_measured"] =
          measure_version_difference(ledger, /*strict=*/false);
    } catch (const insufficient_horizon_error&) {
      analysis["v_measured"] = nullptr;
    }
    ordered_json sequences = ordered_json::array();
    try {
      for (const auto& seq :
           decompose_sequences(ledger, cfg.mini_batches).sequences)
        sequences.push_back(seq);
    } catch (const insufficient_horizon_error&) {
      sequences = ordered_json::array();
    }
    analysis["sequences"] = sequences;
  } else {
    analysis["v_closed_form"] = nullptr;
    analysis["v_measured"] = nullptr;
    analysis["sequences"] = ordered_json::array();
  }
  return analysis;
}

}  // namespace

std::string schedule_document_json(const schedule_grid& grid,
                                   const version_ledger& ledger) {
  ordered_json doc;
  doc["schema_version"] = kDocumentSchemaVersion;
  doc["config"] = config_json(grid.config(), grid.mode());

  ordered_json cells = ordered_json::array();
  for (int w = 1; w <= grid.workers(); ++w)
    for (int t = 1; t <= grid.horizon(); ++t) {
      const task& cell = grid.at(w, t);
      if (cell.is_idle()) continue;
      ordered_json c;
      c["worker"] = w;
      c["slot"] = t;
      c["kind"] = cell.is_forward() ? "forward" : "backward";
      c["mini"] = cell.mini;
      if (cell.is_forward() && cell.micro > 0)
        c["micro"] = cell.micro;
      else
        c["micro"] = nullptr;
      cells.push_back(c);
    }
  doc["cells"] = cells;

  ordered_json commits = ordered_json::array();
  for (const auto& e : ledger.commits) {
    ordered_json c;
    c["version"] = e.version;
    c["mini"] = e.mini;
    c["stage"] = e.stage;
    c["slot"] = e.slot;
    commits.push_back(c);
  }
  ordered_json consumptions = ordered_json::array();
  for (const auto& e : ledger.consumptions) {
    ordered_json c;
    c["mini"] = e.mini;
    c["stage"] = e.stage;
    c["slot"] = e.slot;
    c["version"] = e.version;
    consumptions.push_back(c);
  }
  ordered_json pins = ordered_json::array();
  for (const auto& e : ledger.pins) {
    ordered_json c;
    c["mini"] = e.mini;
    if (e.micro > 0)
      c["micro"] = e.micro;
    else
      c["micro"] = nullptr;
    c["slot"] = e.slot;
    c["version"] = e.version;
    pins.push_back(c);
  }
  ordered_json ledger_json;
  ledger_json["commits"] = commits;
  ledger_json["consumptions"] = consumptions;
  ledger_json["pins"] = pins;
  doc["ledger"] = ledger_json;
  doc["analysis"] = analysis_json(grid, ledger);
  return doc.dump(2) + "\n";
}

std::string schedule_document_csv(const schedule_grid& grid,
                                  const version_ledger& ledger) {
  std::string out = "worker,slot,kind,mini,micro,version\n";
  for (int w = 1; w <= grid.workers(); ++w)
    for (int t = 1; t <= grid.horizon(); ++t) {
      const task& cell = grid.at(w, t);
      if (cell.is_idle()) continue;
      out += std::to_string(w) + "," + std::to_string(t) + ",";
      if (cell.is_forward()) {
        out += "forward," + std::to_string(cell.mini) + ",";
        out += cell.micro > 0 ? std::to_string(cell.micro) : "";
        out += "," +
               std::to_string(ledger.pinned_version(
                   cell.mini, cell.micro > 0 ? cell.micro : 0));
      } else {
        out += "backward," + std::to_string(cell.mini) + ",,";
        out += std::to_string(ledger.update_source[cell.mini - 1]);
      }
      out += "\n";
    }
  return out;
}

std::string sweep_csv(const sweep_result& result) {
  std::string out = "# pipesim-sweep 1\n";
  out +=
      "workers,micro_batches,mode,mini_batches,closed_form_v,measured_v,"
      "makespan,throughput,idle_fraction,comm_forward_events,"
      "comm_backward_events,peak_retained_versions,peak_memory_footprint\n";
  for (const auto& row : result.rows) {
    int peak_versions = 0;
    double peak_memory = 0.0;
    for (int v : row.metrics.peak_retained_versions)
      peak_versions = std::max(peak_versions, v);
    for (double mval : row.metrics.memory_footprint)
      peak_memory = std::max(peak_memory, mval);
    out += std::to_string(row.workers) + "," +
           std::to_string(row.micro_batches) + "," + row.mode + "," +
           std::to_string(row.mini_batches) + ",";
    if (row.mode == "timeprest") {
      out += std::to_string(row.closed_form) + "," +
             std::to_string(row.measured);
    } else {
      out += ",";
    }
    out += "," + format_double(row.metrics.makespan) + "," +
           format_double(row.metrics.throughput()) + "," +
           format_double(row.metrics.idle_fraction) + "," +
           std::to_string(row.metrics.comm_forward_events) + "," +
           std::to_string(row.metrics.comm_backward_events) + "," +
           std::to_string(peak_versions) + "," + format_double(peak_memory) +
           "\n";
  }
  return out;
}

}  // namespace pipesim
