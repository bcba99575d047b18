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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct cli_result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("pipesim-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

cli_result run_cli(const std::string& args, const std::string& tag) {
  fs::path dir = fs::temp_directory_path();
  fs::path out = dir / ("pipesim-out-" + tag + ".txt");
  fs::path err = dir / ("pipesim-err-" + tag + ".txt");
  std::string command = std::string("\"") + PIPESIM_CLI_PATH + "\" " + args +
                        " > " + out.string() + " 2> " + err.string();
  int status = std::system(command.c_str());
  cli_result result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

}  // namespace

TEST_CASE("simulate: figure (4,2,7) document reports v = 2") {
  fs::path dir = scratch_dir("sim427");
  fs::path doc = dir / "doc.json";
  cli_result r = run_cli(
      "simulate --workers 4 --micro 2 --minibatches 7 --out " + doc.string(),
      "sim427");
  REQUIRE(r.code == 0);
  json manifest = json::parse(r.out);
  CHECK(manifest["schema_version"] == 1);
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["outputs"][0] == doc.string());
  json document = json::parse(slurp(doc));
  CHECK(document["schema_version"] == 1);
  CHECK(document["analysis"]["v_measured"] == 2);
  CHECK(document["analysis"]["v_closed_form"] == 2);
  CHECK(document["analysis"]["sequences"].size() == 2);
  CHECK(document["ledger"]["commits"].size() == 7 * 4);
}

TEST_CASE("simulate: W = 1 exits 2 citing the domain bound") {
  cli_result r = run_cli("simulate --workers 1 --micro 2 --minibatches 3",
                         "simw1");
  CHECK(r.code == 2);
  CHECK(r.err.find("W >= 2") != std::string::npos);
}

TEST_CASE("simulate: (4,4,4) document holds a single sequence") {
  fs::path dir = scratch_dir("sim444");
  fs::path doc = dir / "doc.json";
  cli_result r = run_cli(
      "simulate --workers 4 --micro 4 --minibatches 4 --out " + doc.string(),
      "sim444");
  REQUIRE(r.code == 0);
  json document = json::parse(slurp(doc));
  REQUIRE(document["analysis"]["sequences"].size() == 1);
  CHECK(document["analysis"]["sequences"][0] == json({1, 2, 3, 4}));
}

TEST_CASE("simulate: csv format carries the cells header") {
  fs::path dir = scratch_dir("simcsv");
  fs::path doc = dir / "doc.csv";
  cli_result r = run_cli("simulate -w 4 -n 2 -m 3 --format csv --out " +
                             doc.string(),
                         "simcsv");
  REQUIRE(r.code == 0);
  std::string text = slurp(doc);
  CHECK(text.rfind("worker,slot,kind,mini,micro,version\n", 0) == 0);
}

TEST_CASE("analyze: figure configurations") {
  cli_result a = run_cli("analyze -w 5 -n 3", "an53");
  REQUIRE(a.code == 0);
  json m = json::parse(a.out);
  CHECK(m["analysis"]["v_measured"] == 2);
  CHECK(m["analysis"]["overlap"] == true);

  cli_result b = run_cli("analyze -w 3 -n 2", "an32");
  REQUIRE(b.code == 0);
  json mb = json::parse(b.out);
  CHECK(mb["analysis"]["v_measured"] == 1);
  CHECK(mb["analysis"]["overlap"] == false);

  cli_result c = run_cli("analyze -w 2 -n 2", "an22");
  REQUIRE(c.code == 0);
  json mc = json::parse(c.out);
  CHECK(mc["analysis"]["f1"] == 3);
  CHECK(mc["analysis"]["b"] == 2);
  CHECK(mc["analysis"]["v_measured"] == 1);
}

TEST_CASE("sweep: deterministic bytes, 49 rows, empty range refused") {
  fs::path dir = scratch_dir("sweep");
  fs::path out1 = dir / "a.csv";
  fs::path out2 = dir / "b.csv";
  cli_result r1 = run_cli(
      "sweep --workers 2..8 --micro 2..8 --out " + out1.string(), "sw1");
  cli_result r2 = run_cli(
      "sweep --workers 2..8 --micro 2..8 --out " + out2.string(), "sw2");
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  std::string a = slurp(out1);
  CHECK(a == slurp(out2));
  size_t rows = 0;
  for (char ch : a) rows += ch == '\n';
  CHECK(rows == 49 + 2);  // schema comment + header + data

  cli_result bad = run_cli("sweep --workers 5..4 --micro 2..2", "swbad");
  CHECK(bad.code == 2);
}

TEST_CASE("sweep: a single cell agrees with analyze") {
  fs::path dir = scratch_dir("sweep1");
  fs::path out = dir / "cell.csv";
  cli_result r =
      run_cli("sweep --workers 5 --micro 3 --out " + out.string(), "swcell");
  REQUIRE(r.code == 0);
  std::string csv = slurp(out);
  CHECK(csv.find("\n5,3,timeprest,16,2,2,") != std::string::npos);
}

TEST_CASE("render: golden ascii timelines") {
  struct golden_case {
    int w, n, m;
    const char* file;
  };
  for (const golden_case& g :
       {golden_case{4, 2, 7, "timeline-4-2-7.txt"},
        golden_case{4, 4, 4, "timeline-4-4-4.txt"},
        golden_case{3, 2, 6, "timeline-3-2-6.txt"},
        golden_case{5, 2, 6, "timeline-5-2-6.txt"},
        golden_case{5, 3, 6, "timeline-5-3-6.txt"}}) {
    fs::path dir = scratch_dir(std::string("render-") + g.file);
    fs::path out = dir / "timeline.txt";
    cli_result r = run_cli("render -w " + std::to_string(g.w) + " -n " +
                               std::to_string(g.n) + " -m " +
                               std::to_string(g.m) + " --out " + out.string(),
                           std::string("render") + g.file);
    REQUIRE(r.code == 0);
    std::string expected = slurp(fs::path(PIPESIM_GOLDEN_DIR) / g.file);
    REQUIRE_FALSE(expected.empty());
    CHECK(slurp(out) == expected);
  }
}

TEST_CASE("document schemas are pinned by golden files") {
  fs::path dir = scratch_dir("goldens");
  fs::path doc = dir / "doc.json";
  cli_result r1 =
      run_cli("simulate -w 3 -n 2 -m 2 --out " + doc.string(), "gold-doc");
  REQUIRE(r1.code == 0);
  CHECK(slurp(doc) ==
        slurp(fs::path(PIPESIM_GOLDEN_DIR) / "document-3-2-2.json"));

  fs::path csv = dir / "sweep.csv";
  cli_result r2 = run_cli(
      "sweep -w 2..3 -n 2..3 --mode timeprest --mode pipedream --out " +
          csv.string(),
      "gold-sweep");
  REQUIRE(r2.code == 0);
  CHECK(slurp(csv) == slurp(fs::path(PIPESIM_GOLDEN_DIR) / "sweep-2-3.csv"));
}

TEST_CASE("unwritable output path exits 1") {
  cli_result r = run_cli(
      "simulate -w 2 -n 2 -m 1 --out /proc/nonexistent/sched.json", "io1");
  CHECK(r.code == 1);
}

TEST_CASE("PIPESIM_OUT_DIR anchors relative output paths") {
  fs::path dir = scratch_dir("envdir");
  fs::path out = fs::temp_directory_path() / "pipesim-out-env.txt";
  fs::path err = fs::temp_directory_path() / "pipesim-err-env.txt";
  std::string command = "PIPESIM_OUT_DIR=" + dir.string() + " \"" +
                        PIPESIM_CLI_PATH +
                        "\" render -w 3 -n 2 -m 2 --out t.txt > " +
                        out.string() + " 2> " + err.string();
  REQUIRE(std::system(command.c_str()) == 0);
  CHECK(fs::exists(dir / "t.txt"));
  CHECK_FALSE(slurp(dir / "t.txt").empty());
}

TEST_CASE("render: svg output is well formed") {
  fs::path dir = scratch_dir("rendersvg");
  fs::path out = dir / "timeline.svg";
  cli_result r =
      run_cli("render -w 4 -n 4 -m 4 --format svg --out " + out.string(),
              "rsvg");
  REQUIRE(r.code == 0);
  std::string svg = slurp(out);
  CHECK(svg.rfind("<svg xmlns=", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("#9ecae1") != std::string::npos);
  CHECK(svg.find("#2171b5") != std::string::npos);
  CHECK(svg.find("#41ab5d") != std::string::npos);
}

TEST_CASE("train-demo: identical flags give identical loss tables") {
  fs::path d1 = scratch_dir("train-a");
  fs::path d2 = scratch_dir("train-b");
  std::string flags =
      "train-demo -w 2 -n 2 --minibatch-size 20 -e 3 --seed 5 "
      "--mode timeprest --checkpoint-dir ";
  cli_result r1 = run_cli(flags + d1.string(), "tr1");
  cli_result r2 = run_cli(flags + d2.string(), "tr2");
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(slurp(d1 / "train_log.txt") == slurp(d2 / "train_log.txt"));
  CHECK_FALSE(slurp(d1 / "train_log.txt").empty());
}

TEST_CASE("train-demo: single mini-batch matches across modes") {
  fs::path d1 = scratch_dir("train-m1-t");
  fs::path d2 = scratch_dir("train-m1-s");
  cli_result r1 = run_cli(
      "train-demo -w 2 -n 2 --minibatch-size 200 -e 1 --seed 9 "
      "--mode timeprest --checkpoint-dir " + d1.string(), "tm1");
  cli_result r2 = run_cli(
      "train-demo -w 2 -n 2 --minibatch-size 200 -e 1 --seed 9 "
      "--mode sequential --checkpoint-dir " + d2.string(), "tm2");
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  json m1 = json::parse(r1.out);
  json m2 = json::parse(r2.out);
  CHECK(m1["final_digest"] == m2["final_digest"]);
}

TEST_CASE("train-demo: resume reproduces the uninterrupted digest") {
  fs::path full = scratch_dir("train-full");
  fs::path part = scratch_dir("train-part");
  cli_result rf = run_cli(
      "train-demo -w 2 -n 2 --minibatch-size 20 -e 4 --seed 3 "
      "--checkpoint-dir " + full.string(), "trf");
  REQUIRE(rf.code == 0);
  cli_result rp1 = run_cli(
      "train-demo -w 2 -n 2 --minibatch-size 20 -e 2 --seed 3 "
      "--checkpoint-dir " + part.string(), "trp1");
  REQUIRE(rp1.code == 0);
  cli_result rp2 = run_cli(
      "train-demo -w 2 -n 2 --minibatch-size 20 -e 4 --seed 3 --resume "
      "--checkpoint-dir " + part.string(), "trp2");
  REQUIRE(rp2.code == 0);
  json mf = json::parse(rf.out);
  json mp = json::parse(rp2.out);
  CHECK(mp["config"]["first_epoch_run"] == 3);
  CHECK(mf["final_digest"] == mp["final_digest"]);
}

TEST_CASE("train-demo: corrupt checkpoint exits 3 naming stage and epoch") {
  fs::path dir = scratch_dir("train-corrupt");
  cli_result seed_run = run_cli(
      "train-demo -w 2 -n 2 --minibatch-size 20 -e 2 --seed 3 "
      "--checkpoint-dir " + dir.string(), "trc1");
  REQUIRE(seed_run.code == 0);
  fs::path victim = dir / "stage-2-epoch-2.ckpt";
  std::string content = slurp(victim);
  {
    std::ofstream out(victim, std::ios::binary | std::ios::trunc);
    out << content.substr(0, content.size() - 8);
  }
  cli_result r = run_cli(
      "train-demo -w 2 -n 2 --minibatch-size 20 -e 4 --seed 3 --resume "
      "--checkpoint-dir " + dir.string(), "trc2");
  CHECK(r.code == 3);
  CHECK(r.err.find("stage 2") != std::string::npos);
  CHECK(r.err.find("epoch 2") != std::string::npos);
}
