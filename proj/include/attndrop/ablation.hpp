// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "attndrop/trainer.hpp"

namespace attndrop {

enum class AblationFamily { kHardMask, kBlur, kConsistency };

std::string to_string(AblationFamily f);
AblationFamily ablation_family_from_string(const std::string& s);

/// Hyperparameter search space. Defaults are the standard grid: 9 hard-mask
/// cells, 2 blur cells, and every one of those crossed with each lambda for
/// the consistency family.
struct AblationGrid {
  std::vector<double> p{0.05, 0.1, 0.2};
  std::vector<std::size_t> k{3, 5, 10};
  std::vector<double> sigma_max{0.3, 0.5};
  std::size_t w = 5;
  std::vector<double> lambda{0.2, 0.5};
  std::vector<AblationFamily> families{AblationFamily::kHardMask, AblationFamily::kBlur,
                                       AblationFamily::kConsistency};

  std::size_t cardinality() const;
};

struct AblationCell {
  std::size_t index = 0;
  AblationFamily family = AblationFamily::kHardMask;
  std::string name;  // also the output file stem
  RunConfig config;
};

/// Cells in a fixed order (hard mask, blur, consistency). Cell i runs with
/// drop.seed = base.drop.seed + i; everything else is taken from `base`.
std::vector<AblationCell> ablation_cells(const RunConfig& base, const AblationGrid& grid);

struct AblationResult {
  AblationCell cell;
  bool ok = false;
  std::string error;
  double val_acc = 0.0;
  double ece = 0.0;
  double grad_var = 0.0;
};

inline constexpr const char* kAblationSummaryHeader =
    "cell,name,family,variant,p,k,sigma_max,w,lambda,consistency,seed,status,val_acc,ece,grad_var,error";

/// Runs every cell on up to `jobs` threads, writing <out>/<name>.csv/.json per
/// cell and <out>/summary.csv. A failing cell is reported in its summary row;
/// the others still run. Results come back in cell order.
std::vector<AblationResult> run_ablation(const RunConfig& base, const AblationGrid& grid,
                                         const std::filesystem::path& out_dir, std::size_t jobs = 1);

std::string ablation_summary_csv(const std::vector<AblationResult>& results);

}  // namespace attndrop
