// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "attndrop/errors.hpp"
#include "attndrop/run_io.hpp"

namespace attndrop {
namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_config_error(const std::string& text, const std::string& fragment) {
  try {
    parse_run_config(text);
    FAIL() << "accepted: " << text;
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(RunConfigJson, EmptyObjectGivesDefaults) {
  const auto c = parse_run_config("{}");
  EXPECT_EQ(c.task.train_size, 2000u);
  EXPECT_EQ(c.drop.variant, DropVariant::kNone);
  EXPECT_FALSE(c.record_wall_time);
}

TEST(RunConfigJson, ParsesEverySection) {
  const auto c = parse_run_config(R"({
    "task": {"kind": "CopyFirstToken", "num_classes": 3, "label_noise": 0.1, "seed": 18446744073709551615},
    "model": {"layers": 2, "heads": 4},
    "optim": {"lr": 0.001, "epochs": 3},
    "drop": {"variant": "BlurSmooth", "sigma_max": 0.3, "blur_mode": "separable2d", "consistency": true},
    "eval": {"ece_bins": 10},
    "output": {"dir": "out", "name": "x"},
    "record_wall_time": true
  })");
  EXPECT_EQ(c.task.kind, TaskKind::kCopyFirstToken);
  EXPECT_EQ(c.task.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.model.heads, 4u);
  EXPECT_EQ(c.optim.epochs, 3u);
  EXPECT_EQ(c.drop.blur_mode, BlurMode::kSeparable2D);
  EXPECT_TRUE(c.drop.consistency);
  EXPECT_EQ(c.eval.ece_bins, 10u);
  EXPECT_EQ(c.output.name, "x");
  EXPECT_TRUE(c.record_wall_time);
}

TEST(RunConfigJson, RejectsUnknownKeysWithPath) {
  expect_config_error(R"({"drop": {"lamda": 0.5}})", "drop.lamda");
  expect_config_error(R"({"epochs": 3})", "epochs");
  expect_config_error(R"({"model": {"vocab": 8}})", "model.vocab");
}

TEST(RunConfigJson, RejectsBadTypesAndValues) {
  expect_config_error("[1,2]", "object");
  expect_config_error("{", "JSON");
  expect_config_error(R"({"task": 3})", "task");
  expect_config_error(R"({"optim": {"epochs": -1}})", "optim.epochs");
  expect_config_error(R"({"optim": {"epochs": 2.5}})", "optim.epochs");
  expect_config_error(R"({"drop": {"p": "0.1"}})", "drop.p");
  expect_config_error(R"({"drop": {"variant": "Dropout"}})", "drop.variant");
  expect_config_error(R"({"drop": {"variant": "HardMask", "p": 2}})", "drop.p");
  expect_config_error(R"({"model": {"model_dim": 15}})", "model_dim");
}

TEST(RunConfigJson, RoundTrip) {
  RunConfig c;
  c.drop.variant = DropVariant::kHardMask;
  c.drop.p = 0.1;
  c.optim.lr = 0.1 + 0.2;
  c.kernel_table_path = "k.json";
  const auto text = run_config_to_json(c);
  EXPECT_EQ(run_config_to_json(parse_run_config(text)), text);
  EXPECT_EQ(parse_run_config(text).optim.lr, 0.1 + 0.2);
}

TEST(RunConfigJson, LoadMissingFileIsIoError) {
  EXPECT_THROW(load_run_config("/nonexistent/attndrop.json"), IoError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(RunRecordIo, CsvAndJsonLayout) {
  RunRecord r;
  r.parameter_count = 7;
  r.epochs.push_back({1, 0.5, 0.0, 0.75, 0.8, 0.05, 1e-3, 0.0});
  r.epochs.push_back({2, 0.25, 0.0, 0.9, 0.95, 0.02, 5e-4, 0.0});
  r.final_variance.var_ad = 5e-4;
  const auto csv = run_record_csv(r);
  EXPECT_EQ(csv, std::string(kRunCsvHeader) + "\n1,0.5,0,0.75,0.8,0.05,0.001,0\n2,0.25,0,0.9,0.95,0.02,5e-04,0\n");
  const auto j = nlohmann::json::parse(run_record_json(r));
  EXPECT_EQ(j["parameter_count"], 7);
  EXPECT_EQ(j["epochs"].size(), 2u);
  EXPECT_EQ(j["final_variance"]["var_ad"], 5e-4);
  EXPECT_TRUE(j["config"].contains("drop"));
  EXPECT_TRUE(j["seeds"].contains("drop"));

  const auto dir = std::filesystem::temp_directory_path() / "attndrop_run_io_test";
  std::filesystem::remove_all(dir);
  write_run_record(r, dir, "r");
  EXPECT_EQ(read_file(dir / "r.csv"), csv);
  EXPECT_TRUE(std::filesystem::exists(dir / "r.json"));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(write_text_file("/nonexistent/dir/x.csv", "x"), IoError);
}

}  // namespace
}  // namespace attndrop
