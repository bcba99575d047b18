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

#ifndef PIPESIM_CHECKPOINT_HPP_
#define PIPESIM_CHECKPOINT_HPP_

#include <string>

#include "pipesim/trainer.hpp"

namespace pipesim {

// Self-describing per-stage text checkpoint: a header (format version,
// epoch, stage id, committed version, layer dimensions, activation and loss
// tags, FNV-1a digest of the payload) followed by the current-version
// parameters as shortest-round-trip decimals, one per line. Written only at
// epoch boundaries, one file per stage, no cross-stage coordination.
void checkpoint_stage(const stage_model& stage, loss_kind loss, int epoch,
                      const std::string& path);

struct restored_stage {
  stage_model stage;  // version_store holds the committed version only
  loss_kind loss = loss_kind::mse;
  int epoch = 0;
};

// Parses and verifies a checkpoint. Truncated or tampered files raise
// integrity_error carrying the stage id and epoch; the restore never
// installs a partial state.
restored_stage restore_stage(const std::string& path, int expected_stage = 0,
                             int expected_epoch = 0);

std::string checkpoint_filename(int stage_id, int epoch);

}  // namespace pipesim

#endif  // PIPESIM_CHECKPOINT_HPP_
