// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "attndrop/kernel_table.hpp"
#include "attndrop/theory.hpp"

namespace attndrop {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(ATTNDROP_CLI_PATH) + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  while (const auto n = fread(buf, 1, sizeof buf, pipe)) o.out.append(buf, n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("attndrop_cli_" +
                                          std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& text) {
    const auto p = dir_ / "config.json";
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

constexpr const char* kTinyConfig = R"({
  "task": {"train_size": 64, "val_size": 16},
  "optim": {"epochs": 2, "batch_size": 16},
  "eval": {"probe_batches": 2},
  "drop": {"variant": "HardMask"}
})";

TEST_F(Cli, TheoryWorkedExample) {
  const auto o = run("theory --H 1 --n 1 --sigma 1 --N 1000 --delta 0.05 --emp-risk 0");
  ASSERT_EQ(o.code, 0);
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_NEAR(j["kl"].get<double>(), kGaussianKlConstant, 1e-12);
  EXPECT_GT(j["radicand"].get<double>(), 0.0);
  EXPECT_TRUE(j.contains("bound"));
}

TEST_F(Cli, TheoryNegativeRadicandExitsTwo) {
  const auto o = run("theory --H 4 --n 16 --sigma 1e6 --N 1000 --delta 0.05");
  EXPECT_EQ(o.code, 2);
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j["error"]["kind"], "domain");
  EXPECT_LT(j["error"]["value"].get<double>(), 0.0);
}

TEST_F(Cli, UsageAndValidationErrorsExitOne) {
  EXPECT_EQ(run("theory --H 1").code, 1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("theory --H 1 --n 1 --sigma 1 --N 1 --delta 0.05").code, 1);
  const auto cfg = write_config(R"({"drop": {"lamda": 0.5}})");
  EXPECT_EQ(run("train --config " + cfg.string() + " --out " + dir_.string()).code, 1);
}

TEST_F(Cli, MissingFilesExitThree) {
  EXPECT_EQ(run("train --config " + (dir_ / "missing.json").string()).code, 3);
  const auto cfg = write_config(kTinyConfig);
  EXPECT_EQ(run("train --config " + cfg.string() + " --out /proc/attndrop_no_such_dir").code, 3);
}

TEST_F(Cli, PrecomputeKernelsIsIdempotent) {
  const auto a = dir_ / "a.json", b = dir_ / "b.json";
  ASSERT_EQ(run("precompute-kernels --w 5 --sigma-max 0.5 --steps 50 --out " + a.string()).code, 0);
  ASSERT_EQ(run("precompute-kernels --w 5 --sigma-max 0.5 --steps 50 --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(GaussianKernelTable::load(a), GaussianKernelTable::build(5, 0.5, 50));
  EXPECT_EQ(run("precompute-kernels --w 4 --out " + a.string()).code, 1);
}

TEST_F(Cli, TrainIsByteReproducible) {
  const auto cfg = write_config(kTinyConfig);
  const auto out = (dir_ / "r").string();
  ASSERT_EQ(run("train --quiet --config " + cfg.string() + " --out " + out).code, 0);
  const auto csv = slurp(dir_ / "r" / "run.csv"), json = slurp(dir_ / "r" / "run.json");
  ASSERT_EQ(run("train --quiet --config " + cfg.string() + " --out " + out).code, 0);
  EXPECT_EQ(csv, slurp(dir_ / "r" / "run.csv"));
  EXPECT_EQ(json, slurp(dir_ / "r" / "run.json"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,task_loss,cons_loss,train_acc,val_acc,ece,grad_var,wall_ms");
  ASSERT_EQ(run("train --quiet --seed 9 --config " + cfg.string() + " --out " + (dir_ / "r3").string()).code, 0);
  EXPECT_NE(csv, slurp(dir_ / "r3" / "run.csv"));
}

TEST_F(Cli, TrainWithPrecomputedKernels) {
  const auto k = dir_ / "k.json";
  ASSERT_EQ(run("precompute-kernels --sigma-max 0.3 --out " + k.string()).code, 0);
  const auto cfg = write_config(R"({"task": {"train_size": 64, "val_size": 16}, "optim": {"epochs": 1, "batch_size": 16},
    "eval": {"probe_batches": 2}, "drop": {"variant": "BlurSmooth", "sigma_max": 0.3},
    "kernel_table": ")" + k.string() + R"("})");
  EXPECT_EQ(run("train --quiet --config " + cfg.string() + " --out " + dir_.string()).code, 0);
}

TEST_F(Cli, AblateDefaultHardMaskGrid) {
  const auto cfg = write_config(kTinyConfig);
  const auto out = dir_ / "abl";
  ASSERT_EQ(run("ablate --family hardmask --jobs 2 --config " + cfg.string() + " --out " + out.string()).code, 0);
  std::ifstream in(out / "summary.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 10u);
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(out)) csvs += e.path().extension() == ".csv";
  EXPECT_EQ(csvs, 10u);
}

}  // namespace
}  // namespace attndrop
