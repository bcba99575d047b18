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

#ifndef PIPESIM_TRAINER_HPP_
#define PIPESIM_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pipesim/config.hpp"

namespace pipesim {

enum class activation_kind { linear, relu, tanh, sigmoid };
enum class loss_kind { mse, softmax_cross_entropy };

const char* to_string(activation_kind a);
const char* to_string(loss_kind l);
activation_kind activation_from_string(const std::string& s);
loss_kind loss_from_string(const std::string& s);

// Row-major, rows = samples.
struct matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  matrix() = default;
  matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}
  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
};

struct layer_spec {
  int in = 0;
  int out = 0;
  activation_kind act = activation_kind::linear;
  int param_count() const { return out * in + out; }
};

// widths[0] is the input width; layer l maps widths[l] -> widths[l+1].
struct network_spec {
  std::vector<int> widths;
  std::vector<activation_kind> activations;  // one per layer
  loss_kind loss = loss_kind::mse;

  int layer_count() const { return static_cast<int>(widths.size()) - 1; }
  layer_spec layer(int index) const;
  int param_count() const;
};

// One pipeline stage: a contiguous layer range plus its versioned parameter
// store. Version 0 is the initialization; version k the snapshot committed
// by mini-batch k's backward. The store holds exactly the versions the
// retention rule keeps live during a replay.
struct stage_model {
  int stage_id = 0;     // 1-based
  int first_layer = 0;  // 0-based index into the network's layer list
  std::vector<layer_spec> layers;
  std::map<int, std::vector<double>> version_store;
  int current_version = 0;

  int param_count() const;
  const std::vector<double>& params(int version) const;
  const std::vector<double>& current_params() const {
    return params(current_version);
  }
};

// Contiguous layer ranges balanced by parameter count: layers are appended
// to a stage until it reaches total/W, while leaving at least one layer for
// every remaining stage. Parameters are not populated here.
std::vector<stage_model> partition_model(const network_spec& spec,
                                         int workers);

// Seeded uniform init in (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases included,
// laid out layer by layer (weights row-major, then bias).
std::vector<double> init_network_params(const network_spec& spec,
                                        std::uint64_t seed);

// Installs a whole-network flat parameter vector as version `version` of
// each stage (replacing all stored versions).
void load_network_params(std::vector<stage_model>& stages,
                         const std::vector<double>& flat, int version);

std::vector<double> gather_network_params(
    const std::vector<stage_model>& stages);

// FNV-1a over the shortest-round-trip decimal forms of all parameters.
std::string params_digest(const std::vector<stage_model>& stages);

struct dataset {
  matrix x;
  matrix y;  // targets: raw values for mse, one-hot rows for cross-entropy
};

// The fixed desk-scale task: `samples` points in [-1,1]^2, two linearly
// separable classes (margin 0.1 around the separating line), one-hot labels.
dataset make_synthetic_task(int samples, std::uint64_t seed);

struct train_config {
  network_spec net;
  int workers = 2;
  int micro_batches = 2;   // N
  int mini_batch_size = 20;  // samples per mini-batch, divisible by N
  int mini_batches = 10;   // M per epoch; data holds M * mini_batch_size rows
  int epochs = 1;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
};

enum class train_mode { timeprest, sequential, pipedream };

const char* to_string(train_mode m);
train_mode train_mode_from_string(const std::string& s);

struct mini_log {
  int mini = 0;
  double loss = 0.0;          // loss of this mini-batch before its update
  std::vector<int> pinned;    // forward version(s): per micro-batch
  int consumed = 0;           // version feeding the weight update
  std::string checksum;       // parameter digest after the update
};

struct epoch_log {
  int epoch = 0;
  std::vector<mini_log> minis;
  std::string final_checksum;

  std::string to_text() const;  // deterministic, one line per mini-batch
};

// Called after every simulated slot with the stage states; used to audit the
// version stores against the retention timeline.
using slot_observer =
    std::function<void(int slot, const std::vector<stage_model>&)>;

// Runs one epoch in place. timeprest replays the nF1B schedule (pinned
// forward versions, backward on the latest per-stage weights over stored
// activations, one commit per mini-batch); pipedream replays the 1F1B grid
// with Eq-style stashed versions in both passes; sequential is plain
// mini-batch SGD. Deterministic for fixed inputs.
epoch_log train_epoch(std::vector<stage_model>& stages, const dataset& data,
                      const train_config& cfg, train_mode mode, int epoch,
                      const slot_observer& observer = {});

// Central finite differences (step 1e-6) against the analytic gradient on
// the mean loss; returns the max relative error over all parameters.
double gradient_check(const network_spec& spec,
                      const std::vector<double>& params, const dataset& data);

// Whole-network helpers (also used by tests as an independent route).
double network_loss(const network_spec& spec, const std::vector<double>& params,
                    const dataset& data);
std::vector<double> network_gradient(const network_spec& spec,
                                     const std::vector<double>& params,
                                     const dataset& data);

struct train_run_result {
  std::vector<epoch_log> logs;  // epochs executed by this invocation
  int first_epoch = 1;
  std::string final_checksum;
};

// Full training entry point with per-epoch per-stage checkpoints under
// `checkpoint_dir` (empty: no checkpointing). With resume=true, restores the
// newest complete epoch's checkpoints and continues after it; a partially
// written epoch (missing or corrupt stage files) raises integrity_error.
train_run_result run_training(const train_config& cfg, train_mode mode,
                              const dataset& data,
                              const std::string& checkpoint_dir,
                              bool resume);

}  // namespace pipesim

#endif  // PIPESIM_TRAINER_HPP_
