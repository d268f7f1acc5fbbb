// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "attndrop/errors.hpp"

namespace attndrop {

double expected_calibration_error(std::span<const Prediction> preds, std::size_t bins) {
  if (preds.empty()) throw ParameterError("ece: no predictions");
  if (bins == 0) throw ParameterError("ece: bins must be >= 1");
  std::vector<double> conf_sum(bins, 0.0), correct(bins, 0.0), count(bins, 0.0);
  for (const auto& p : preds) {
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
      throw ParameterError("ece: confidence " + std::to_string(p.confidence) + " outside [0,1]");
    }
    const auto b = std::min(static_cast<std::size_t>(p.confidence * static_cast<double>(bins)), bins - 1);
    conf_sum[b] += p.confidence;
    correct[b] += p.correct ? 1.0 : 0.0;
    count[b] += 1.0;
  }
  const double total = static_cast<double>(preds.size());
  double ece = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0.0) continue;
    ece += count[b] / total * std::abs(correct[b] / count[b] - conf_sum[b] / count[b]);
  }
  return ece;
}

std::vector<Prediction> predictions_from_logits(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw DimensionError("predictions_from_logits: logits " + shape_to_string(logits.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
  }
  const auto batch = logits.dim(0), classes = logits.dim(1);
  const auto x = logits.data();
  std::vector<Prediction> out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = x.data() + b * classes;
    const auto best = static_cast<std::size_t>(std::max_element(row, row + classes) - row);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - row[best]);
    out.push_back({1.0 / z, best == labels[b]});
  }
  return out;
}

double accuracy(std::span<const Prediction> preds) {
  if (preds.empty()) return 0.0;
  const auto hits = std::count_if(preds.begin(), preds.end(), [](const Prediction& p) { return p.correct; });
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace attndrop
