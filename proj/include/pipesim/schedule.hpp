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

#ifndef PIPESIM_SCHEDULE_HPP_
#define PIPESIM_SCHEDULE_HPP_

#include <string>
#include <vector>

#include "pipesim/config.hpp"

namespace pipesim {

enum class task_kind {
  idle,
  forward_micro,   // forward pass of one micro-batch at one stage
  backward_mini,   // backward pass of one mini-batch at one stage
};

// One cell of the worker x slot grid. mini/micro are 1-based ids; micro is 0
// for backward tasks and for pipedream grids (whole mini-batches).
struct task {
  task_kind kind = task_kind::idle;
  int mini = 0;
  int micro = 0;

  bool is_idle() const { return kind == task_kind::idle; }
  bool is_forward() const { return kind == task_kind::forward_micro; }
  bool is_backward() const { return kind == task_kind::backward_mini; }

  friend bool operator==(const task&, const task&) = default;
};

// Discrete-slot schedule: one task per (worker, slot), workers and slots
// 1-based. Built by the generators below; immutable afterwards except in
// validator tests, which mutate copies to construct negative cases.
class schedule_grid {
 public:
  schedule_grid(sim_config cfg, schedule_mode mode)
      : cfg_(cfg), mode_(mode) {}

  const sim_config& config() const { return cfg_; }
  schedule_mode mode() const { return mode_; }
  int workers() const { return cfg_.workers; }
  int horizon() const { return horizon_; }

  const task& at(int worker, int slot) const;
  void put(int worker, int slot, task t);
  void clear(int worker, int slot);

  // Slot lookups; 0 when the task is absent.
  int forward_slot(int mini, int micro, int stage) const;
  int backward_slot(int mini, int stage) const;

  friend bool operator==(const schedule_grid& a, const schedule_grid& b);

 private:
  void grow(int slot);

  sim_config cfg_;
  schedule_mode mode_;
  int horizon_ = 0;
  // rows_[worker-1][slot-1]
  std::vector<std::vector<task>> rows_;
};

// nF1B generator. Micro-batches enter stage 1 in strict FIFO order, one per
// slot whenever stage 1 is not running a backward. A forward advances one
// stage per slot and waits only while the next stage is occupied; the
// backward of a mini-batch is released on stage W in the slot after its last
// micro-batch leaves stage W and then claims one slot per stage, W down to 1.
// Backwards win every contended slot.
schedule_grid build_nf1b_schedule(const sim_config& cfg);

// 1F1B baseline at mini-batch granularity: one forward unit per mini-batch,
// at most W mini-batches admitted concurrently, otherwise the same movement
// and priority rules as above. N is ignored.
schedule_grid build_1f1b_schedule(const sim_config& cfg);

enum class violation_kind {
  task_invariant,
  stage_continuity,
  completeness,
  backward_priority,
};

struct violation {
  violation_kind kind;
  std::string message;
};

struct validation_report {
  std::vector<violation> violations;
  bool valid() const { return violations.empty(); }
};

// Structural validation of an arbitrary grid against the expected task set
// for its config: completeness, stage-order continuity (a forward may only
// wait on slots that are actually occupied), backward span/release, and
// backward priority. Violations are data, not errors.
validation_report validate_schedule(const schedule_grid& grid,
                                    const sim_config& cfg);

}  // namespace pipesim

#endif  // PIPESIM_SCHEDULE_HPP_
