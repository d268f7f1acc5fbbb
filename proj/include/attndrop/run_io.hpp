// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "attndrop/trainer.hpp"

namespace attndrop {

/// Header of the per-epoch CSV.
inline constexpr const char* kRunCsvHeader = "epoch,task_loss,cons_loss,train_acc,val_acc,ece,grad_var,wall_ms";

/// Parses a run config. Every section and key is optional (defaults apply),
/// but unknown keys anywhere are rejected with a ConfigError that names the
/// offending path, e.g. "drop.lamda". The result is validated.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Full config as JSON text; parse_run_config(run_config_to_json(c)) == c.
std::string run_config_to_json(const RunConfig& cfg);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

std::string run_record_csv(const RunRecord& record);
/// Config, seeds, parameter count, per-epoch rows and final VarianceReport.
std::string run_record_json(const RunRecord& record);
std::string variance_report_json(const VarianceReport& report);

/// Writes <dir>/<name>.csv and <dir>/<name>.json; throws IoError.
void write_run_record(const RunRecord& record, const std::filesystem::path& dir, const std::string& name);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace attndrop
