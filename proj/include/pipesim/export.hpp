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

#ifndef PIPESIM_EXPORT_HPP_
#define PIPESIM_EXPORT_HPP_

#include <string>

#include "pipesim/ledger.hpp"
#include "pipesim/metrics.hpp"
#include "pipesim/schedule.hpp"

namespace pipesim {

inline constexpr int kDocumentSchemaVersion = 1;

// Fixed-key-order JSON document:
// {schema_version, config, cells: [{worker, slot, kind, mini, micro}],
//  ledger: {commits, consumptions, pins},
//  analysis: {f1, b, v_measured, v_closed_form, sequences}}
// v fields are null on pipedream grids and when the horizon is too short to
// measure. Byte-identical output for identical inputs.
std::string schedule_document_json(const schedule_grid& grid,
                                   const version_ledger& ledger);

// Cells table: header row, comma separated, no locale. The version column
// carries the forward pin or the backward's update source.
std::string schedule_document_csv(const schedule_grid& grid,
                                  const version_ledger& ledger);

// Sweep table with a schema comment line followed by a header row; one row
// per (W, N, mode) in deterministic order.
std::string sweep_csv(const sweep_result& result);

}  // namespace pipesim

#endif  // PIPESIM_EXPORT_HPP_
