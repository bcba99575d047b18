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

#ifndef PIPESIM_ERRORS_HPP_
#define PIPESIM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pipesim {

// Configuration outside the admissible domain (W >= 2, N >= 2, M >= 1, ...).
// The message names the offending field and its bound.
class domain_error : public std::runtime_error {
 public:
  domain_error(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Structurally inconsistent inputs (mismatched grid/ledger pairs, malformed
// schedules handed to downstream analyses).
class structural_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Horizon too short to observe steady-state behaviour.
class insufficient_horizon_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corrupt or incomplete persisted state (checkpoints).
class integrity_error : public std::runtime_error {
 public:
  integrity_error(const std::string& message, int stage_id, int epoch)
      : std::runtime_error(message), stage_id_(stage_id), epoch_(epoch) {}
  int stage_id() const { return stage_id_; }
  int epoch() const { return epoch_; }

 private:
  int stage_id_;
  int epoch_;
};

// Filesystem failures surfaced by the CLI as exit code 1.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pipesim

#endif  // PIPESIM_ERRORS_HPP_
