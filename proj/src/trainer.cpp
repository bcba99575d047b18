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

#include "pipesim/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pipesim/checkpoint.hpp"
#include "pipesim/errors.hpp"
#include "pipesim/ledger.hpp"
#include "pipesim/schedule.hpp"
#include "pipesim/text.hpp"

namespace pipesim {

const char* to_string(activation_kind a) {
  switch (a) {
    case activation_kind::linear: return "linear";
    case activation_kind::relu: return "relu";
    case activation_kind::tanh: return "tanh";
    case activation_kind::sigmoid: return "sigmoid";
  }
  return "linear";
}

const char* to_string(loss_kind l) {
  return l == loss_kind::mse ? "mse" : "softmax_cross_entropy";
}

activation_kind activation_from_string(const std::string& s) {
  if (s == "linear") return activation_kind::linear;
  if (s == "relu") return activation_kind::relu;
  if (s == "tanh") return activation_kind::tanh;
  if (s == "sigmoid") return activation_kind::sigmoid;
  throw domain_error("activation", "unknown activation tag: " + s);
}

loss_kind loss_from_string(const std::string& s) {
  if (s == "mse") return loss_kind::mse;
  if (s == "softmax_cross_entropy") return loss_kind::softmax_cross_entropy;
  throw domain_error("loss", "unknown loss tag: " + s);
}

const char* to_string(train_mode m) {
  switch (m) {
    case train_mode::timeprest: return "timeprest";
    case train_mode::sequential: return "sequential";
    case train_mode::pipedream: return "pipedream";
  }
  return "sequential";
}

train_mode train_mode_from_string(const std::string& s) {
  if (s == "timeprest") return train_mode::timeprest;
  if (s == "sequential") return train_mode::sequential;
  if (s == "pipedream") return train_mode::pipedream;
  throw domain_error("mode", "unknown training mode: " + s);
}

layer_spec network_spec::layer(int index) const {
  return {widths[index], widths[index + 1], activations[index]};
}

int network_spec::param_count() const {
  int total = 0;
  for (int l = 0; l < layer_count(); ++l) total += layer(l).param_count();
  return total;
}

int stage_model::param_count() const {
  int total = 0;
  for (const auto& l : layers) total += l.param_count();
  return total;
}

const std::vector<double>& stage_model::params(int version) const {
  auto it = version_store.find(version);
  if (it == version_store.end())
    throw structural_error("stage " + std::to_string(stage_id) +
                           " does not hold version " +
                           std::to_string(version));
  return it->second;
}

std::vector<stage_model> partition_model(const network_spec& spec,
                                         int workers) {
  const int layers = spec.layer_count();
  if (workers < 1) throw domain_error("workers", "workers must be >= 1");
  if (layers < workers)
    throw domain_error("layers", "cannot split " + std::to_string(layers) +
                                     " layers across " +
                                     std::to_string(workers) + " stages");
  if (static_cast<int>(spec.activations.size()) != layers)
    throw structural_error("one activation tag per layer required");

  const double target =
      static_cast<double>(spec.param_count()) / workers;
  std::vector<stage_model> stages;
  int next = 0;
  for (int s = 1; s <= workers; ++s) {
    stage_model stage;
    stage.stage_id = s;
    stage.first_layer = next;
    int remaining_stages = workers - s;
    double stage_params = 0.0;
    while (next < layers - remaining_stages) {
      if (s < workers && stage_params >= target) break;
      stage.layers.push_back(spec.layer(next));
      stage_params += spec.layer(next).param_count();
      ++next;
      if (s < workers && stage_params >= target) break;
    }
    stages.push_back(std::move(stage));
  }
  return stages;
}

namespace {

// Deterministic uniform in [0, 1) from explicit mt19937_64 output words;
// uniform_real_distribution is not bit-portable across standard libraries.
double next_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double activate(double z, activation_kind a) {
  switch (a) {
    case activation_kind::linear: return z;
    case activation_kind::relu: return z > 0.0 ? z : 0.0;
    case activation_kind::tanh: return std::tanh(z);
    case activation_kind::sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

double activate_deriv(double z, activation_kind a) {
  switch (a) {
    case activation_kind::linear: return 1.0;
    case activation_kind::relu: return z > 0.0 ? 1.0 : 0.0;
    case activation_kind::tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case activation_kind::sigmoid: {
      double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

struct forward_cache {
  matrix input;
  std::vector<matrix> z;  // per layer
  std::vector<matrix> a;  // per layer, post-activation
  const matrix& output() const { return a.back(); }
};

// params layout per layer: W (out x in, row-major) then b (out).
forward_cache stage_forward(const std::vector<layer_spec>& layers,
                            const std::vector<double>& params,
                            const matrix& input) {
  forward_cache cache;
  cache.input = input;
  const matrix* x = &cache.input;
  size_t offset = 0;
  for (const auto& layer : layers) {
    matrix z(x->rows, layer.out);
    const double* w = params.data() + offset;
    const double* b = w + static_cast<size_t>(layer.out) * layer.in;
    for (int r = 0; r < x->rows; ++r)
      for (int o = 0; o < layer.out; ++o) {
        double acc = b[o];
        for (int i = 0; i < layer.in; ++i)
          acc += w[static_cast<size_t>(o) * layer.in + i] * x->at(r, i);
        z.at(r, o) = acc;
      }
    matrix a(z.rows, z.cols);
    for (size_t i = 0; i < z.data.size(); ++i)
      a.data[i] = activate(z.data[i], layer.act);
    cache.z.push_back(std::move(z));
    cache.a.push_back(std::move(a));
    x = &cache.a.back();
    offset += layer.param_count();
  }
  return cache;
}

struct backward_result {
  std::vector<double> grad;  // aligned with the stage's param layout
  matrix input_delta;        // dL/d(stage input)
};

// delta: dL/d(stage output), post-activation. prop_params supplies the
// weight matrices the deltas travel through and the point the gradient is
// taken at; activations come from the cache.
backward_result stage_backward(const std::vector<layer_spec>& layers,
                               const std::vector<double>& prop_params,
                               const forward_cache& cache,
                               const matrix& delta_out) {
  backward_result result;
  result.grad.assign(prop_params.size(), 0.0);

  std::vector<size_t> offsets(layers.size());
  size_t offset = 0;
  for (size_t l = 0; l < layers.size(); ++l) {
    offsets[l] = offset;
    offset += layers[l].param_count();
  }

  matrix delta = delta_out;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const layer_spec& layer = layers[l];
    const matrix& z = cache.z[l];
    const matrix& x = l == 0 ? cache.input : cache.a[l - 1];
    const double* w = prop_params.data() + offsets[l];
    double* gw = result.grad.data() + offsets[l];
    double* gb = gw + static_cast<size_t>(layer.out) * layer.in;

    matrix dz(delta.rows, layer.out);
    for (int r = 0; r < delta.rows; ++r)
      for (int o = 0; o < layer.out; ++o)
        dz.at(r, o) = delta.at(r, o) * activate_deriv(z.at(r, o), layer.act);

    for (int o = 0; o < layer.out; ++o) {
      for (int i = 0; i < layer.in; ++i) {
        double acc = 0.0;
        for (int r = 0; r < dz.rows; ++r) acc += dz.at(r, o) * x.at(r, i);
        gw[static_cast<size_t>(o) * layer.in + i] += acc;
      }
      double acc = 0.0;
      for (int r = 0; r < dz.rows; ++r) acc += dz.at(r, o);
      gb[o] += acc;
    }

    matrix prev(delta.rows, layer.in);
    for (int r = 0; r < dz.rows; ++r)
      for (int i = 0; i < layer.in; ++i) {
        double acc = 0.0;
        for (int o = 0; o < layer.out; ++o)
          acc += dz.at(r, o) * w[static_cast<size_t>(o) * layer.in + i];
        prev.at(r, i) = acc;
      }
    delta = std::move(prev);
  }
  result.input_delta = std::move(delta);
  return result;
}

// Mean loss over the rows of `y`.
double loss_mean(const matrix& y, const matrix& t, loss_kind kind) {
  double total = 0.0;
  if (kind == loss_kind::mse) {
    for (size_t i = 0; i < y.data.size(); ++i) {
      double d = y.data[i] - t.data[i];
      total += d * d;
    }
  } else {
    for (int r = 0; r < y.rows; ++r) {
      double zmax = y.at(r, 0);
      for (int c = 1; c < y.cols; ++c) zmax = std::max(zmax, y.at(r, c));
      double denom = 0.0;
      for (int c = 0; c < y.cols; ++c) denom += std::exp(y.at(r, c) - zmax);
      for (int c = 0; c < y.cols; ++c)
        if (t.at(r, c) > 0.5)
          total += -(y.at(r, c) - zmax - std::log(denom)) * t.at(r, c);
    }
  }
  return total / y.rows;
}

// d(sum of per-sample losses)/dy divided by `denom` (the sample count the
// final mean runs over, so micro-batch contributions add up to the
// mini-batch mean-loss gradient).
matrix loss_grad(const matrix& y, const matrix& t, loss_kind kind,
                 double denom) {
  matrix g(y.rows, y.cols);
  if (kind == loss_kind::mse) {
    for (size_t i = 0; i < y.data.size(); ++i)
      g.data[i] = 2.0 * (y.data[i] - t.data[i]) / denom;
  } else {
    for (int r = 0; r < y.rows; ++r) {
      double zmax = y.at(r, 0);
      for (int c = 1; c < y.cols; ++c) zmax = std::max(zmax, y.at(r, c));
      double sum = 0.0;
      for (int c = 0; c < y.cols; ++c) sum += std::exp(y.at(r, c) - zmax);
      for (int c = 0; c < y.cols; ++c)
        g.at(r, c) =
            (std::exp(y.at(r, c) - zmax) / sum - t.at(r, c)) / denom;
    }
  }
  return g;
}

matrix slice_rows(const matrix& m, int first, int count) {
  matrix out(count, m.cols);
  for (int r = 0; r < count; ++r)
    for (int c = 0; c < m.cols; ++c) out.at(r, c) = m.at(first + r, c);
  return out;
}

matrix concat_rows(const std::vector<const matrix*>& parts) {
  matrix out;
  out.cols = parts.front()->cols;
  for (const matrix* p : parts) out.rows += p->rows;
  out.data.reserve(static_cast<size_t>(out.rows) * out.cols);
  for (const matrix* p : parts)
    out.data.insert(out.data.end(), p->data.begin(), p->data.end());
  return out;
}

// Row-stacks per-micro caches in micro order so the mini-batch gradient is
// reduced over samples in the same order as an unpipelined pass; this keeps
// first-update equality with the sequential mode bit-exact.
forward_cache concat_caches(const std::vector<const forward_cache*>& parts) {
  forward_cache out;
  std::vector<const matrix*> inputs;
  for (const forward_cache* p : parts) inputs.push_back(&p->input);
  out.input = concat_rows(inputs);
  for (size_t l = 0; l < parts.front()->z.size(); ++l) {
    std::vector<const matrix*> zs, as;
    for (const forward_cache* p : parts) {
      zs.push_back(&p->z[l]);
      as.push_back(&p->a[l]);
    }
    out.z.push_back(concat_rows(zs));
    out.a.push_back(concat_rows(as));
  }
  return out;
}

void check_train_config(const train_config& cfg, const dataset& data) {
  if (cfg.mini_batch_size < 1 || cfg.mini_batches < 1)
    throw domain_error("mini_batches", "mini-batch count/size must be >= 1");
  if (cfg.micro_batches < 1)
    throw domain_error("micro_batches", "micro-batch count must be >= 1");
  if (cfg.mini_batch_size % cfg.micro_batches != 0)
    throw domain_error(
        "mini_batch_size",
        "mini-batch size " + std::to_string(cfg.mini_batch_size) +
            " is not divisible by micro-batch count " +
            std::to_string(cfg.micro_batches));
  if (data.x.rows != cfg.mini_batches * cfg.mini_batch_size)
    throw structural_error("dataset holds " + std::to_string(data.x.rows) +
                           " rows, expected M*Ms = " +
                           std::to_string(cfg.mini_batches *
                                          cfg.mini_batch_size));
  if (data.x.cols != cfg.net.widths.front() ||
      data.y.cols != cfg.net.widths.back())
    throw structural_error("dataset width does not match the network");
}

void rebase_versions(std::vector<stage_model>& stages) {
  for (auto& stage : stages) {
    std::vector<double> current = stage.current_params();
    stage.version_store.clear();
    stage.version_store[0] = std::move(current);
    stage.current_version = 0;
  }
}

std::string digest_after_update(const std::vector<stage_model>& stages) {
  return params_digest(stages);
}

// Replays a generated grid slot by slot. Shared by the nF1B and 1F1B modes;
// `stashed` selects whether backwards propagate through the pinned version
// (1F1B horizontal stashing) or the latest committed stage weights (nF1B).
epoch_log replay_grid(std::vector<stage_model>& stages, const dataset& data,
                      const train_config& cfg, bool stashed, int epoch,
                      const slot_observer& observer) {
  const int w = cfg.workers;
  const int n = stashed ? 1 : cfg.micro_batches;
  const int micro_rows = cfg.mini_batch_size / n;

  sim_config sc;
  sc.workers = w;
  sc.micro_batches = cfg.micro_batches;
  sc.mini_batches = cfg.mini_batches;
  sc.samples_per_mini_batch = cfg.mini_batch_size;
  sc.seed = cfg.seed;
  schedule_grid grid =
      stashed ? build_1f1b_schedule(sc) : build_nf1b_schedule(sc);
  version_ledger ledger = assign_versions(grid, sc);
  retention_timeline retention = build_retention_timeline(ledger, grid);

  std::map<std::pair<int, int>, int> pin;  // (mini, micro) -> version
  for (const auto& p : ledger.pins) pin[{p.mini, p.micro}] = p.version;

  // (mini, micro, stage) -> forward cache; (mini, stage) -> stacked delta
  std::map<std::tuple<int, int, int>, forward_cache> fwd;
  std::map<std::pair<int, int>, matrix> deltas;
  std::map<int, double> mini_loss;

  epoch_log log;
  log.epoch = epoch;

  for (int t = 1; t <= grid.horizon(); ++t) {
    // Retention-driven eviction happens on slot entry so that the stores
    // mirror the timeline's live set for slot t once the slot has run.
    for (auto& stage : stages) {
      auto& intervals = retention.per_stage[stage.stage_id - 1];
      for (auto it = stage.version_store.begin();
           it != stage.version_store.end();) {
        int freed = 0;
        for (const auto& iv : intervals)
          if (iv.version == it->first) freed = iv.freed_at_slot;
        it = freed != 0 && freed <= t ? stage.version_store.erase(it) : ++it;
      }
    }

    for (int s = 1; s <= w; ++s) {
      const task& cell = grid.at(s, t);
      stage_model& stage = stages[s - 1];
      if (cell.is_idle()) continue;
      if (cell.is_forward()) {
        int k = cell.mini;
        int j = cell.micro;  // 0 on 1F1B grids
        int version = pin.at({k, j});
        matrix input;
        if (s == 1) {
          int first = (k - 1) * cfg.mini_batch_size +
                      (j > 0 ? (j - 1) * micro_rows : 0);
          input = slice_rows(data.x, first, micro_rows);
        } else {
          input = fwd.at({k, j, s - 1}).output();
        }
        // Stashed activations stay until the mini-batch's backward consumes
        // them at this stage.
        fwd[{k, j, s}] =
            stage_forward(stage.layers, stage.params(version), input);
      } else {
        int k = cell.mini;
        // Micro rows are contiguous, so stacking the per-micro caches in
        // order reproduces the whole mini-batch in data order.
        std::vector<const forward_cache*> parts;
        for (int j = 1; j <= n; ++j)
          parts.push_back(&fwd.at({k, stashed ? 0 : j, s}));
        forward_cache stacked = concat_caches(parts);

        matrix delta;
        if (s == w) {
          double total = 0.0;
          for (int j = 1; j <= n; ++j) {
            int first = (k - 1) * cfg.mini_batch_size + (j - 1) * micro_rows;
            total += loss_mean(parts[j - 1]->output(),
                               slice_rows(data.y, first, micro_rows),
                               cfg.net.loss);
          }
          mini_loss[k] = total / n;  // average of the micro-batch losses
          matrix target = slice_rows(data.y, (k - 1) * cfg.mini_batch_size,
                                     cfg.mini_batch_size);
          delta = loss_grad(stacked.output(), target, cfg.net.loss,
                            cfg.mini_batch_size);
        } else {
          delta = std::move(deltas.at({k, s}));
          deltas.erase({k, s});
        }

        const std::vector<double>& prop =
            stashed ? stage.params(pin.at({k, 0})) : stage.current_params();
        backward_result r = stage_backward(stage.layers, prop, stacked, delta);
        for (int j = 1; j <= n; ++j) fwd.erase({k, stashed ? 0 : j, s});

        std::vector<double> updated = stage.current_params();
        for (size_t i = 0; i < updated.size(); ++i)
          updated[i] -= cfg.learning_rate * r.grad[i];
        stage.version_store[k] = std::move(updated);
        stage.current_version = k;

        if (s > 1) {
          deltas[{k, s - 1}] = std::move(r.input_delta);
        } else {
          mini_log entry;
          entry.mini = k;
          entry.loss = mini_loss.at(k);
          for (int j = 1; j <= n; ++j)
            entry.pinned.push_back(pin.at({k, stashed ? 0 : j}));
          entry.consumed = ledger.update_source[k - 1];
          entry.checksum = digest_after_update(stages);
          log.minis.push_back(std::move(entry));
        }
      }
    }
    if (observer) observer(t, stages);
  }
  log.final_checksum = params_digest(stages);
  return log;
}

epoch_log sequential_epoch(std::vector<stage_model>& stages,
                           const dataset& data, const train_config& cfg,
                           int epoch) {
  epoch_log log;
  log.epoch = epoch;
  const int w = static_cast<int>(stages.size());
  for (int k = 1; k <= cfg.mini_batches; ++k) {
    matrix input = slice_rows(data.x, (k - 1) * cfg.mini_batch_size,
                              cfg.mini_batch_size);
    matrix target = slice_rows(data.y, (k - 1) * cfg.mini_batch_size,
                               cfg.mini_batch_size);
    std::vector<forward_cache> caches;
    const matrix* x = &input;
    for (auto& stage : stages) {
      caches.push_back(
          stage_forward(stage.layers, stage.current_params(), *x));
      x = &caches.back().output();
    }
    double loss = loss_mean(caches.back().output(), target, cfg.net.loss);
    matrix delta = loss_grad(caches.back().output(), target, cfg.net.loss,
                             cfg.mini_batch_size);
    for (int s = w; s >= 1; --s) {
      stage_model& stage = stages[s - 1];
      backward_result r = stage_backward(stage.layers, stage.current_params(),
                                         caches[s - 1], delta);
      std::vector<double> updated = stage.current_params();
      for (size_t i = 0; i < updated.size(); ++i)
        updated[i] -= cfg.learning_rate * r.grad[i];
      stage.version_store[k] = std::move(updated);
      stage.version_store.erase(k - 1);  // consistent single version
      stage.current_version = k;
      delta = std::move(r.input_delta);
    }
    mini_log entry;
    entry.mini = k;
    entry.loss = loss;
    entry.pinned.push_back(k - 1);
    entry.consumed = k - 1;
    entry.checksum = digest_after_update(stages);
    log.minis.push_back(std::move(entry));
  }
  log.final_checksum = params_digest(stages);
  return log;
}

}  // namespace

std::vector<double> init_network_params(const network_spec& spec,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> params;
  params.reserve(spec.param_count());
  for (int l = 0; l < spec.layer_count(); ++l) {
    layer_spec layer = spec.layer(l);
    double scale = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (int i = 0; i < layer.param_count(); ++i)
      params.push_back((2.0 * next_uniform(rng) - 1.0) * scale);
  }
  return params;
}

void load_network_params(std::vector<stage_model>& stages,
                         const std::vector<double>& flat, int version) {
  size_t offset = 0;
  for (auto& stage : stages) {
    size_t count = stage.param_count();
    if (offset + count > flat.size())
      throw structural_error("parameter vector shorter than the network");
    stage.version_store.clear();
    stage.version_store[version] =
        std::vector<double>(flat.begin() + offset,
                            flat.begin() + offset + count);
    stage.current_version = version;
    offset += count;
  }
  if (offset != flat.size())
    throw structural_error("parameter vector longer than the network");
}

std::vector<double> gather_network_params(
    const std::vector<stage_model>& stages) {
  std::vector<double> flat;
  for (const auto& stage : stages) {
    const auto& p = stage.current_params();
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return flat;
}

std::string params_digest(const std::vector<stage_model>& stages) {
  std::string text;
  for (const auto& stage : stages)
    for (double v : stage.current_params()) {
      text += format_double(v);
      text += '\n';
    }
  return fnv1a64_hex(text);
}

dataset make_synthetic_task(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  dataset data;
  data.x = matrix(samples, 2);
  data.y = matrix(samples, 2);
  for (int i = 0; i < samples; ++i) {
    double x0 = 0.0, x1 = 0.0, m = 0.0;
    do {
      x0 = 2.0 * next_uniform(rng) - 1.0;
      x1 = 2.0 * next_uniform(rng) - 1.0;
      m = 0.8 * x0 - 0.6 * x1;
    } while (std::abs(m) < 0.1);
    data.x.at(i, 0) = x0;
    data.x.at(i, 1) = x1;
    data.y.at(i, m > 0.0 ? 0 : 1) = 1.0;
  }
  return data;
}

std::string epoch_log::to_text() const {
  std::string out;
  for (const auto& m : minis) {
    out += "epoch " + std::to_string(epoch) + " mini " + std::to_string(m.mini) +
           " loss " + format_double(m.loss) + " pinned";
    for (int p : m.pinned) out += " " + std::to_string(p);
    out += " consumed " + std::to_string(m.consumed) + " checksum " +
           m.checksum + "\n";
  }
  out += "epoch " + std::to_string(epoch) + " final checksum " +
         final_checksum + "\n";
  return out;
}

epoch_log train_epoch(std::vector<stage_model>& stages, const dataset& data,
                      const train_config& cfg, train_mode mode, int epoch,
                      const slot_observer& observer) {
  check_train_config(cfg, data);
  if (static_cast<int>(stages.size()) != cfg.workers)
    throw structural_error("stage count does not match workers");
  rebase_versions(stages);
  switch (mode) {
    case train_mode::sequential:
      return sequential_epoch(stages, data, cfg, epoch);
    case train_mode::timeprest:
      return replay_grid(stages, data, cfg, /*stashed=*/false, epoch,
                         observer);
    case train_mode::pipedream:
      return replay_grid(stages, data, cfg, /*stashed=*/true, epoch,
                         observer);
  }
  throw structural_error("unreachable");
}

double network_loss(const network_spec& spec,
                    const std::vector<double>& params, const dataset& data) {
  std::vector<layer_spec> layers;
  for (int l = 0; l < spec.layer_count(); ++l) layers.push_back(spec.layer(l));
  forward_cache cache = stage_forward(layers, params, data.x);
  return loss_mean(cache.output(), data.y, spec.loss);
}

std::vector<double> network_gradient(const network_spec& spec,
                                     const std::vector<double>& params,
                                     const dataset& data) {
  std::vector<layer_spec> layers;
  for (int l = 0; l < spec.layer_count(); ++l) layers.push_back(spec.layer(l));
  forward_cache cache = stage_forward(layers, params, data.x);
  matrix delta =
      loss_grad(cache.output(), data.y, spec.loss, data.x.rows);
  return stage_backward(layers, params, cache, delta).grad;
}

double gradient_check(const network_spec& spec,
                      const std::vector<double>& params, const dataset& data) {
  const double h = 1e-6;
  std::vector<double> analytic = network_gradient(spec, params, data);
  std::vector<double> probe = params;
  double worst = 0.0;
  for (size_t i = 0; i < probe.size(); ++i) {
    double saved = probe[i];
    probe[i] = saved + h;
    double up = network_loss(spec, probe, data);
    probe[i] = saved - h;
    double down = network_loss(spec, probe, data);
    probe[i] = saved;
    double numeric = (up - down) / (2.0 * h);
    // Guarded relative error: the unit floor keeps finite-difference noise
    // (~1e-10 at this step size) from swamping near-zero components.
    double rel = std::abs(analytic[i] - numeric) /
                 std::max({std::abs(analytic[i]), std::abs(numeric), 1.0});
    worst = std::max(worst, rel);
  }
  return worst;
}

train_run_result run_training(const train_config& cfg, train_mode mode,
                              const dataset& data,
                              const std::string& checkpoint_dir,
                              bool resume) {
  namespace fs = std::filesystem;
  check_train_config(cfg, data);

  std::vector<stage_model> stages = partition_model(cfg.net, cfg.workers);
  load_network_params(stages, init_network_params(cfg.net, cfg.seed), 0);

  train_run_result result;
  result.first_epoch = 1;

  if (resume && !checkpoint_dir.empty()) {
    int newest = 0;
    for (int e = cfg.epochs; e >= 1 && newest == 0; --e)
      for (int s = 1; s <= cfg.workers; ++s)
        if (fs::exists(fs::path(checkpoint_dir) / checkpoint_filename(s, e))) {
          newest = e;
          break;
        }
    if (newest > 0) {
      for (int s = 1; s <= cfg.workers; ++s) {
        fs::path path =
            fs::path(checkpoint_dir) / checkpoint_filename(s, newest);
        if (!fs::exists(path))
          throw integrity_error("resume refused: checkpoint for stage " +
                                    std::to_string(s) + " epoch " +
                                    std::to_string(newest) + " is missing",
                                s, newest);
        restored_stage restored = restore_stage(path.string(), s, newest);
        stages[s - 1].version_store.clear();
        stages[s - 1].version_store[0] =
            restored.stage.current_params();
        stages[s - 1].current_version = 0;
      }
      result.first_epoch = newest + 1;
    }
  }

  for (int e = result.first_epoch; e <= cfg.epochs; ++e) {
    result.logs.push_back(train_epoch(stages, data, cfg, mode, e));
    if (!checkpoint_dir.empty()) {
      std::error_code ec;
      fs::create_directories(checkpoint_dir, ec);
      for (const auto& stage : stages)
        checkpoint_stage(stage, cfg.net.loss, e,
                         (fs::path(checkpoint_dir) /
                          checkpoint_filename(stage.stage_id, e))
                             .string());
    }
  }
  result.final_checksum = params_digest(stages);
  return result;
}

}  // namespace pipesim
