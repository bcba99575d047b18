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

#ifndef PIPESIM_LEDGER_HPP_
#define PIPESIM_LEDGER_HPP_

#include <vector>

#include "pipesim/schedule.hpp"

namespace pipesim {

// Version k is the parameter snapshot produced by mini-batch k's backward;
// version 0 is the initialization, present on every stage from slot 0.
// Commits happen per stage as the backward passes; a version is *fully*
// committed once its backward has passed stage 1.

struct commit_event {
  int version;
  int mini;
  int stage;
  int slot;
};

struct pin_record {
  int mini;
  int micro;    // 0 on pipedream grids
  int slot;     // stage-1 injection slot
  int version;  // latest fully-committed version at injection
};

struct consume_record {
  int mini;     // backward's mini-batch
  int stage;
  int slot;
  int version;  // version whose weights the backward uses at this stage
};

struct version_ledger {
  sim_config cfg;
  schedule_mode mode = schedule_mode::timeprest;
  std::vector<commit_event> commits;        // ordered by slot
  std::vector<pin_record> pins;
  std::vector<consume_record> consumptions;
  // update_source[k-1]: version whose committed weights feed mini-batch k's
  // weight update, whole-network view. For nF1B this is the latest fully
  // committed version when the backward is released; for the 1F1B baseline
  // it is the stashed (pinned) version.
  std::vector<int> update_source;
  std::vector<int> full_commit_slot;        // [version] -> stage-1 slot

  int pinned_version(int mini, int micro) const;
};

// Derives the complete ledger for a generated grid. Pins each micro-batch at
// stage-1 injection to the latest fully-committed version; records per-stage
// backward consumptions (latest stage-local commit for nF1B, the stashed pin
// for 1F1B); commits one version per backward per stage.
version_ledger assign_versions(const schedule_grid& grid,
                               const sim_config& cfg);

// Steady-state gap between a mini-batch id and the id of the mini-batch
// whose committed version its backward consumes. With strict=true, requires
// M >= 2(W+N); otherwise only that the trailing half of the run shows a
// uniform gap.
int measure_version_difference(const version_ledger& ledger,
                               bool strict = true);

// Closed-form version difference floor((W+N-2)/N).
int closed_form_v(int workers, int micro_batches);

// Slot count of mini-batch k's forward pass on an uncontended prefix:
// W + N - 2 + k.
int forward_span(int workers, int micro_batches, int mini_ordinal);

// Slot count of any backward pass: W.
int backward_span(int workers);

// True iff backward passes of consecutive mini-batches overlap, i.e. v > 1,
// which holds exactly when W > N + 1.
bool overlap_condition(int workers, int micro_batches);

struct sequence_decomposition {
  std::vector<std::vector<int>> sequences;  // partition of {1..M}
  int version_difference_measured = 0;
};

// Chains mini-batches by "backward of j consumed the version committed by
// i", starting each chain at the earliest unchained mini-batch.
sequence_decomposition decompose_sequences(const version_ledger& ledger,
                                           int mini_batches);

struct retention_interval {
  int version;
  int retained_from_slot;  // version live during [from, freed)
  int freed_at_slot;
};

struct retention_timeline {
  // per_stage[s-1]: intervals for stage s, ascending by version.
  std::vector<std::vector<retention_interval>> per_stage;
  std::vector<int> peak_concurrent;  // per stage
  int horizon = 0;

  int retained_count(int stage, int slot) const;
};

// Version lifetimes per stage. nF1B frees a version once a newer one is
// committed on the stage and no in-flight forward pinned to it still has to
// visit the stage; the 1F1B baseline additionally holds it until the
// backward of every mini-batch that forwarded with it has passed the stage.
retention_timeline build_retention_timeline(const version_ledger& ledger,
                                            const schedule_grid& grid);

struct staleness_entry {
  int mini;
  int stage;
  int staleness;  // latest committed version at arrival minus version used
};

struct staleness_report_t {
  std::vector<staleness_entry> entries;
  bool all_zero() const;
  // Largest staleness among backwards of mini-batches >= first_steady_mini.
  int steady_state_staleness(int first_steady_mini) const;
};

staleness_report_t staleness_report(const version_ledger& ledger);

}  // namespace pipesim

#endif  // PIPESIM_LEDGER_HPP_
