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

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pipesim/checkpoint.hpp"
#include "pipesim/errors.hpp"
#include "pipesim/export.hpp"
#include "pipesim/ledger.hpp"
#include "pipesim/metrics.hpp"
#include "pipesim/render.hpp"
#include "pipesim/schedule.hpp"
#include "pipesim/text.hpp"
#include "pipesim/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using clock_type = std::chrono::steady_clock;

constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 0 success, 1 I/O, 2 domain/usage, 3 integrity.
constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitDomain = 2;
constexpr int kExitIntegrity = 3;

std::string resolve_out(const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return path;
  const char* base = std::getenv("PIPESIM_OUT_DIR");
  if (base == nullptr || *base == '\0') return path;
  return (fs::path(base) / p).string();
}

void write_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw pipesim::io_error("cannot open for write: " + path);
  out << content;
  out.flush();
  if (!out) throw pipesim::io_error("write failed: " + path);
}

struct manifest_builder {
  ordered_json j;
  clock_type::time_point start = clock_type::now();

  explicit manifest_builder(const std::string& command) {
    j["schema_version"] = 1;
    j["tool"] = "pipesim";
    j["tool_version"] = kToolVersion;
    j["command"] = command;
  }
  void emit() {
    j["status"] = "ok";
    j["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            clock_type::now() - start)
            .count();
    std::cout << j.dump(2) << "\n";
  }
};

// Inclusive "a..b"; a bare "a" means a..a.
std::pair<int, int> parse_range(const std::string& text) {
  auto sep = text.find("..");
  try {
    if (sep == std::string::npos) {
      int v = std::stoi(text);
      return {v, v};
    }
    int lo = std::stoi(text.substr(0, sep));
    int hi = std::stoi(text.substr(sep + 2));
    if (lo > hi)
      throw pipesim::domain_error("range", "empty range: " + text);
    return {lo, hi};
  } catch (const pipesim::domain_error&) {
    throw;
  } catch (const std::exception&) {
    throw pipesim::domain_error("range", "malformed range: " + text);
  }
}

ordered_json sim_config_json(const pipesim::sim_config& cfg,
                             const std::string& mode) {
  ordered_json c;
  c["workers"] = cfg.workers;
  c["micro_batches"] = cfg.micro_batches;
  c["mini_batches"] = cfg.mini_batches;
  c["mode"] = mode;
  c["backward_cost_factor"] = cfg.backward_cost_factor;
  c["samples_per_mini_batch"] = cfg.samples_per_mini_batch;
  c["seed"] = cfg.seed;
  return c;
}

int cmd_simulate(const pipesim::sim_config& cfg, const std::string& mode,
                 const std::string& out, const std::string& format) {
  using namespace pipesim;
  manifest_builder manifest("simulate");
  schedule_mode m = mode == "pipedream" ? schedule_mode::pipedream
                                        : schedule_mode::timeprest;
  schedule_grid grid = m == schedule_mode::timeprest
                           ? build_nf1b_schedule(cfg)
                           : build_1f1b_schedule(cfg);
  version_ledger ledger = assign_versions(grid, cfg);
  std::string document = format == "csv"
                             ? schedule_document_csv(grid, ledger)
                             : schedule_document_json(grid, ledger);
  std::string path = resolve_out(out);
  write_file(path, document);
  manifest.j["config"] = sim_config_json(cfg, mode);
  manifest.j["outputs"] = {path};
  manifest.emit();
  return kExitOk;
}

int cmd_analyze(int workers, int micro, int minibatches) {
  using namespace pipesim;
  manifest_builder manifest("analyze");
  sim_config cfg;
  cfg.workers = workers;
  cfg.micro_batches = micro;
  cfg.mini_batches = minibatches > 0 ? minibatches : 2 * (workers + micro);
  validate(cfg);

  ordered_json analysis;
  analysis["f1"] = forward_span(workers, micro, 1);
  analysis["f2"] = forward_span(workers, micro, 2);
  analysis["b"] = backward_span(workers);
  analysis["overlap"] = overlap_condition(workers, micro);
  analysis["v_closed_form"] = closed_form_v(workers, micro);

  schedule_grid grid = build_nf1b_schedule(cfg);
  version_ledger ledger = assign_versions(grid, cfg);
  analysis["v_measured"] =
      measure_version_difference(ledger, /*strict=*/minibatches == 0);
  ordered_json sequences = ordered_json::array();
  for (const auto& seq :
       decompose_sequences(ledger, cfg.mini_batches).sequences)
    sequences.push_back(seq);
  analysis["sequences"] = sequences;

  manifest.j["config"] = sim_config_json(cfg, "timeprest");
  manifest.j["outputs"] = ordered_json::array();
  manifest.j["analysis"] = analysis;
  manifest.emit();
  return kExitOk;
}

int cmd_sweep(const std::string& workers_range, const std::string& micro_range,
              const std::vector<std::string>& modes, int minibatches,
              const std::string& out) {
  using namespace pipesim;
  manifest_builder manifest("sweep");
  auto [wlo, whi] = parse_range(workers_range);
  auto [nlo, nhi] = parse_range(micro_range);
  std::vector<schedule_mode> mode_list;
  for (const auto& m : modes) {
    if (m == "timeprest")
      mode_list.push_back(schedule_mode::timeprest);
    else if (m == "pipedream")
      mode_list.push_back(schedule_mode::pipedream);
    else
      throw domain_error("mode", "unknown mode: " + m);
  }
  if (mode_list.empty()) mode_list.push_back(schedule_mode::timeprest);

  cost_model cost;
  sweep_result result = sweep(wlo, whi, nlo, nhi, mode_list, cost, minibatches);
  for (const auto& s : result.skipped)
    std::cerr << "skipped: " << s << "\n";

  std::string path = resolve_out(out);
  write_file(path, sweep_csv(result));
  manifest.j["config"] = {{"workers", workers_range},
                          {"micro", micro_range},
                          {"rows", result.rows.size()},
                          {"skipped", result.skipped.size()}};
  manifest.j["outputs"] = {path};
  manifest.emit();
  return kExitOk;
}

int cmd_render(const pipesim::sim_config& cfg, const std::string& format,
               const std::string& out) {
  using namespace pipesim;
  schedule_grid grid = build_nf1b_schedule(cfg);
  std::string text = format == "svg" ? render_svg(grid) : render_ascii(grid);
  if (out.empty()) {
    std::cout << text;
    return kExitOk;
  }
  manifest_builder manifest("render");
  std::string path = resolve_out(out);
  write_file(path, text);
  manifest.j["config"] = sim_config_json(cfg, "timeprest");
  manifest.j["format"] = format;
  manifest.j["outputs"] = {path};
  manifest.emit();
  return kExitOk;
}

int cmd_train_demo(int workers, int micro, int minibatch_size, int epochs,
                   std::uint64_t seed, const std::string& mode, double eta,
                   const std::string& checkpoint_dir, bool resume) {
  using namespace pipesim;
  manifest_builder manifest("train-demo");

  constexpr int kTaskSamples = 200;
  if (minibatch_size < 1 || kTaskSamples % minibatch_size != 0)
    throw domain_error("minibatch_size",
                       "minibatch-size must divide the task size " +
                           std::to_string(kTaskSamples));

  train_config cfg;
  cfg.net.widths = {2, 8, 2};
  cfg.net.activations = {activation_kind::tanh, activation_kind::linear};
  cfg.net.loss = loss_kind::softmax_cross_entropy;
  cfg.workers = workers;
  cfg.micro_batches = micro;
  cfg.mini_batch_size = minibatch_size;
  cfg.mini_batches = kTaskSamples / minibatch_size;
  cfg.epochs = epochs;
  cfg.learning_rate = eta;
  cfg.seed = seed;

  dataset data = make_synthetic_task(kTaskSamples, seed);
  train_mode tm = train_mode_from_string(mode);
  std::string dir = checkpoint_dir.empty() ? "" : resolve_out(checkpoint_dir);
  train_run_result result = run_training(cfg, tm, data, dir, resume);

  std::string log_text;
  for (const auto& log : result.logs) log_text += log.to_text();
  log_text += "final digest " + result.final_checksum + "\n";
  std::string log_path = dir.empty()
                             ? resolve_out("train_log.txt")
                             : (fs::path(dir) / "train_log.txt").string();
  write_file(log_path, log_text);

  ordered_json config;
  config["workers"] = workers;
  config["micro_batches"] = micro;
  config["mini_batch_size"] = minibatch_size;
  config["mini_batches"] = cfg.mini_batches;
  config["epochs"] = epochs;
  config["eta"] = eta;
  config["mode"] = mode;
  config["seed"] = seed;
  config["resume"] = resume;
  config["first_epoch_run"] = result.first_epoch;
  manifest.j["config"] = config;
  manifest.j["outputs"] = {log_path};
  manifest.j["final_digest"] = result.final_checksum;
  manifest.emit();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pipesim: discrete-slot simulator, analyzer and training demo for "
      "nF1B (timeprest) and 1F1B (pipedream) pipeline schedules"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand(
      "simulate", "Generate a schedule + version ledger document");
  int s_workers = 4, s_micro = 2, s_mini = 7;
  std::uint64_t s_seed = 0;
  std::string s_mode = "timeprest", s_out = "schedule.json", s_format = "json";
  simulate->add_option("-w,--workers", s_workers, "pipeline stages W (>= 2)");
  simulate->add_option("-n,--micro", s_micro,
                       "micro-batches per mini-batch N (>= 2)");
  simulate->add_option("-m,--minibatches", s_mini,
                       "mini-batches per epoch M (>= 1)");
  simulate->add_option("--mode", s_mode, "timeprest|pipedream")
      ->check(CLI::IsMember({"timeprest", "pipedream"}));
  simulate->add_option("-o,--out", s_out, "output document path");
  simulate->add_option("--format", s_format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("--seed", s_seed, "seed recorded in the document");

  auto* analyze = app.add_subcommand(
      "analyze", "Print timing formulas and the measured version difference");
  int a_workers = 4, a_micro = 2, a_mini = 0;
  analyze->add_option("-w,--workers", a_workers, "pipeline stages W (>= 2)");
  analyze->add_option("-n,--micro", a_micro, "micro-batches N (>= 2)");
  analyze->add_option("-m,--minibatches", a_mini,
                      "simulation horizon (default 2(W+N))");

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Metrics/version-difference table over W x N ranges");
  std::string sw_workers = "2..8", sw_micro = "2..8", sw_out = "sweep.csv";
  std::vector<std::string> sw_modes;
  int sw_mini = 0;
  sweep_cmd->add_option("-w,--workers", sw_workers,
                        "worker range a..b (inclusive) or single value");
  sweep_cmd->add_option("-n,--micro", sw_micro,
                        "micro-batch range a..b (inclusive) or single value");
  sweep_cmd->add_option("--mode", sw_modes,
                        "modes to sweep (timeprest, pipedream); repeatable");
  sweep_cmd->add_option("-m,--minibatches", sw_mini,
                        "override M (default 2(W+N) per cell)");
  sweep_cmd->add_option("-o,--out", sw_out, "output CSV path");

  auto* render =
      app.add_subcommand("render", "Render an nF1B timeline as ASCII or SVG");
  int r_workers = 4, r_micro = 2, r_mini = 7;
  std::string r_format = "ascii", r_out;
  render->add_option("-w,--workers", r_workers, "pipeline stages W (>= 2)");
  render->add_option("-n,--micro", r_micro, "micro-batches N (>= 2)");
  render->add_option("-m,--minibatches", r_mini, "mini-batches M (>= 1)");
  render->add_option("--format", r_format, "ascii|svg")
      ->check(CLI::IsMember({"ascii", "svg"}));
  render->add_option("-o,--out", r_out,
                     "output path (omit to print to standard output)");

  auto* train = app.add_subcommand(
      "train-demo", "Train the fixed synthetic task with pipelined updates");
  int t_workers = 2, t_micro = 2, t_msize = 20, t_epochs = 4;
  std::uint64_t t_seed = 1;
  double t_eta = 0.05;
  std::string t_mode = "timeprest", t_dir;
  bool t_resume = false;
  train->add_option("-w,--workers", t_workers, "pipeline stages W");
  train->add_option("-n,--micro", t_micro, "micro-batches N");
  train->add_option("--minibatch-size", t_msize,
                    "samples per mini-batch (divides 200, divisible by N)");
  train->add_option("-e,--epochs", t_epochs, "epochs to run");
  train->add_option("--seed", t_seed, "init/data seed");
  train->add_option("--eta", t_eta, "learning rate");
  train->add_option("--mode", t_mode, "timeprest|sequential|pipedream")
      ->check(CLI::IsMember({"timeprest", "sequential", "pipedream"}));
  train->add_option("--checkpoint-dir", t_dir,
                    "per-stage checkpoint directory (enables checkpointing)");
  train->add_flag("--resume", t_resume,
                  "continue from the newest complete epoch checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitDomain;
  }

  try {
    if (simulate->parsed()) {
      pipesim::sim_config cfg;
      cfg.workers = s_workers;
      cfg.micro_batches = s_micro;
      cfg.mini_batches = s_mini;
      cfg.seed = s_seed;
      pipesim::validate(cfg);
      return cmd_simulate(cfg, s_mode, s_out, s_format);
    }
    if (analyze->parsed()) return cmd_analyze(a_workers, a_micro, a_mini);
    if (sweep_cmd->parsed())
      return cmd_sweep(sw_workers, sw_micro, sw_modes, sw_mini, sw_out);
    if (render->parsed()) {
      pipesim::sim_config cfg;
      cfg.workers = r_workers;
      cfg.micro_batches = r_micro;
      cfg.mini_batches = r_mini;
      pipesim::validate(cfg);
      return cmd_render(cfg, r_format, r_out);
    }
    if (train->parsed())
      return cmd_train_demo(t_workers, t_micro, t_msize, t_epochs, t_seed,
                            t_mode, t_eta, t_dir, t_resume);
  } catch (const pipesim::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const pipesim::insufficient_horizon_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const pipesim::integrity_error& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const pipesim::io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitDomain;
}
