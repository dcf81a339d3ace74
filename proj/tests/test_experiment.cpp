// Copyright 2026 The outage-alloc Authors.
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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "outage/errors.hpp"
#include "outage/experiment.hpp"

namespace outage {
namespace {

namespace fs = std::filesystem;

const char* kTinyConfig = R"({
  "seed": 3,
  "sim": {"n_taps": 64, "k": 8, "l": 4, "resource_count": 4},
  "dataset": {"n_windows": 256},
  "train": {"loss_kind": "all", "epochs": 1, "batch_size": 64,
            "replicate_count": 1, "hidden": 4, "dense": 2},
  "eval": {"n_episodes": 4000, "resource_count": 4, "q_th": 0.3},
  "grid": {"q_th": [0.0, 0.5, 1.0], "gamma_th": [0.5, 0.6], "l": [10, 20, 30, 40]}
})";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "outage_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string config_error(const std::string& text) {
  try {
    parse_experiment_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ExperimentConfig, ParsesSections) {
  const ExperimentConfig cfg = parse_experiment_config(kTinyConfig);
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.sim.n_taps, 64u);
  EXPECT_EQ(cfg.loss_kinds.size(), 4u);
  EXPECT_EQ(cfg.train.resource_count, 4u);
  EXPECT_EQ(cfg.eval_q_th, 0.3);
  EXPECT_EQ(cfg.l_grid.size(), 4u);
  EXPECT_EQ(cfg.eval_sim().resource_count, 4u);
}

TEST(ExperimentConfig, DefaultsFromEmptyDocument) {
  const ExperimentConfig cfg = parse_experiment_config("{}");
  EXPECT_EQ(cfg.sim.n_taps, 1024u);
  EXPECT_EQ(cfg.sim.k, 100u);
  EXPECT_EQ(cfg.train.alpha, 10.0);
  EXPECT_EQ(cfg.train.q_th_train, 0.5);
  EXPECT_EQ(cfg.train.batch_size, 256u);
  EXPECT_EQ(cfg.q_th_grid.size(), 11u);
}

TEST(ExperimentConfig, UnknownKeysAreErrors) {
  EXPECT_NE(config_error(R"({"sim": {"n_tapz": 64}})").find("sim.n_tapz"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"bogus": 1})").find("bogus"), std::string::npos);
}

TEST(ExperimentConfig, InvalidValuesNameTheField) {
  EXPECT_NE(config_error(R"({"sim": {"resource_count": 0}})").find("resource_count"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"train": {"loss_kind": "hinge"}})").find("train.loss_kind"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"sim": {"k": "ten"}})").find("sim.k"), std::string::npos);
  EXPECT_NE(config_error(R"({"grid": {"q_th": []}})").find("q_th"), std::string::npos);
}

TEST(ExperimentConfig, SyntaxErrorReportsLine) {
  const std::string msg = config_error("{\n  \"seed\": 1,\n  \"sim\": {,}\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Sweep, QthEndpointsMatchSingleResource) {
  const fs::path out = fresh_dir("sweep_qth");
  const ExperimentConfig cfg = parse_experiment_config(kTinyConfig);
  std::ostringstream log;
  ASSERT_EQ(cmd_generate(cfg, out, log), kExitOk);
  ASSERT_EQ(cmd_train(cfg, out, log), kExitOk);
  EXPECT_EQ(std::distance(fs::directory_iterator(out / "params"),
                          fs::directory_iterator{}),
            4);
  ASSERT_EQ(cmd_sweep(cfg, SweepAxis::kQth, out, log), kExitOk);
  const auto rows = read_csv(out / "sweep_q_th.csv");
  ASSERT_EQ(rows.size(), 1u + 3u * 4u);
  EXPECT_EQ(rows[0].back(), "theorem1_plugin");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), rows[0].size());
    const double axis = std::stod(rows[i][0]);
    if (axis != 0.0 && axis != 1.0) continue;
    const double mean = std::stod(rows[i][2]);
    const double se = std::stod(rows[i][3]);
    const double p1 = std::stod(rows[i][8]);
    const double n = std::stod(rows[i][6]);
    const double se_p1 = std::sqrt(p1 * (1 - p1) / n);
    EXPECT_LT(std::abs(mean - p1), 3.0 * std::hypot(se, se_p1)) << axis;
  }
}

TEST(Sweep, LAxisShape) {
  const fs::path out = fresh_dir("sweep_l");
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig);
  cfg.n_episodes = 200;
  std::ostringstream log;
  ASSERT_EQ(cmd_sweep(cfg, SweepAxis::kL, out, log), kExitOk);
  const auto rows = read_csv(out / "sweep_l.csv");
  ASSERT_EQ(rows.size(), 1u + 4u * 4u);
  EXPECT_EQ(rows[0].size(), 9u);
}

TEST(Commands, MissingArtifactsAreIoErrors) {
  const fs::path out = fresh_dir("missing");
  const ExperimentConfig cfg = parse_experiment_config(kTinyConfig);
  std::ostringstream log;
  EXPECT_THROW(cmd_train(cfg, out, log), IoError);
  EXPECT_THROW(cmd_sweep(cfg, SweepAxis::kQth, out, log), IoError);
}

#ifdef OUTAGE_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(OUTAGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("cli");
  const fs::path good = dir / "good.json";
  std::ofstream(good) << kTinyConfig;
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"sim": {"resource_count": 128, "n_taps": 64}})";
  const fs::path out = dir / "out";

  EXPECT_EQ(run_cli("generate --config " + good.string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "dataset.bin"));
  EXPECT_EQ(run_cli("generate --config " + bad.string() + " --out " + out.string()), 2);
  EXPECT_EQ(run_cli("generate --config " + (dir / "none.json").string()), 4);
  EXPECT_EQ(run_cli("train --config " + good.string() + " --out " + (dir / "empty").string()), 4);
  EXPECT_EQ(run_cli("sweep --axis nope --config " + good.string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
}
#endif

}  // namespace
}  // namespace outage
