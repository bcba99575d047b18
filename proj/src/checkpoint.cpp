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

#include "pipesim/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pipesim/errors.hpp"
#include "pipesim/text.hpp"

namespace pipesim {

namespace {

constexpr const char* kMagic = "pipesim-checkpoint";
constexpr int kFormatVersion = 1;

}  // namespace

std::string checkpoint_filename(int stage_id, int epoch) {
  return "stage-" + std::to_string(stage_id) + "-epoch-" +
         std::to_string(epoch) + ".ckpt";
}

void checkpoint_stage(const stage_model& stage, loss_kind loss, int epoch,
                      const std::string& path) {
  std::string payload;
  for (double v : stage.current_params()) {
    payload += format_double(v);
    payload += '\n';
  }

  std::ostringstream header;
  header << kMagic << ' ' << kFormatVersion << '\n'
         << "epoch " << epoch << '\n'
         << "stage " << stage.stage_id << '\n'
         << "first_layer " << stage.first_layer << '\n'
         << "version " << stage.current_version << '\n'
         << "loss " << to_string(loss) << '\n'
         << "layers " << stage.layers.size() << '\n';
  for (const auto& layer : stage.layers)
    header << "layer " << layer.in << ' ' << layer.out << ' '
           << to_string(layer.act) << '\n';
  header << "values " << stage.current_params().size() << '\n'
         << "digest " << fnv1a64_hex(payload) << '\n'
         << "---\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open checkpoint file for write: " + path);
  out << header.str() << payload;
  out.flush();
  if (!out) throw io_error("write failed: " + path);
}

restored_stage restore_stage(const std::string& path, int expected_stage,
                             int expected_epoch) {
  auto fail = [&](const std::string& why) -> integrity_error {
    return integrity_error("checkpoint integrity failure (stage " +
                               std::to_string(expected_stage) + ", epoch " +
                               std::to_string(expected_epoch) + "): " + why +
                               " [" + path + "]",
                           expected_stage, expected_epoch);
  };

  std::ifstream in(path, std::ios::binary);
  if (!in) throw fail("file missing or unreadable");

  std::string line;
  auto next_line = [&](const std::string& what) {
    if (!std::getline(in, line)) throw fail("truncated before " + what);
    return line;
  };
  auto field = [&](const std::string& key) {
    next_line(key);
    if (line.rfind(key + ' ', 0) != 0) throw fail("expected '" + key + "'");
    return line.substr(key.size() + 1);
  };

  {
    std::istringstream magic(next_line("magic"));
    std::string name;
    int version = 0;
    magic >> name >> version;
    if (name != kMagic) throw fail("not a checkpoint file");
    if (version != kFormatVersion)
      throw fail("unsupported format version " + std::to_string(version));
  }

  restored_stage result;
  result.epoch = std::stoi(field("epoch"));
  result.stage.stage_id = std::stoi(field("stage"));
  result.stage.first_layer = std::stoi(field("first_layer"));
  int committed = std::stoi(field("version"));
  result.loss = loss_from_string(field("loss"));
  int layer_count = std::stoi(field("layers"));
  if (layer_count < 1) throw fail("no layers");
  for (int l = 0; l < layer_count; ++l) {
    std::istringstream ls(field("layer"));
    layer_spec layer;
    std::string act;
    ls >> layer.in >> layer.out >> act;
    if (!ls || layer.in < 1 || layer.out < 1) throw fail("bad layer line");
    layer.act = activation_from_string(act);
    result.stage.layers.push_back(layer);
  }
  size_t values = static_cast<size_t>(std::stol(field("values")));
  std::string digest = field("digest");
  next_line("separator");
  if (line != "---") throw fail("missing payload separator");

  std::string payload;
  std::vector<double> params;
  params.reserve(values);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    payload += line;
    payload += '\n';
    try {
      params.push_back(parse_double(line));
    } catch (const io_error&) {
      throw fail("malformed parameter value");
    }
  }
  if (params.size() != values)
    throw fail("expected " + std::to_string(values) + " values, found " +
               std::to_string(params.size()));
  if (fnv1a64_hex(payload) != digest) throw fail("payload digest mismatch");
  if (static_cast<size_t>(result.stage.param_count()) != values)
    throw fail("layer dimensions do not match value count");
  if (expected_stage != 0 && result.stage.stage_id != expected_stage)
    throw fail("file describes stage " +
               std::to_string(result.stage.stage_id));
  if (expected_epoch != 0 && result.epoch != expected_epoch)
    throw fail("file describes epoch " + std::to_string(result.epoch));

  result.stage.version_store[committed] = std::move(params);
  result.stage.current_version = committed;
  return result;
}

}  // namespace pipesim
