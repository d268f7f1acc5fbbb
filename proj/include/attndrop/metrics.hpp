// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "attndrop/tensor.hpp"

namespace attndrop {

struct Prediction {
  double confidence;  // probability of the predicted class
  bool correct;
};

/// Expected calibration error with `bins` equal-width confidence bins on
/// [0,1]; bin b holds confidences in [b/bins, (b+1)/bins), and 1.0 falls in
/// the last bin. ECE = sum_b |B_b|/n * |acc(B_b) - conf(B_b)|.
double expected_calibration_error(std::span<const Prediction> preds, std::size_t bins = 15);

/// Argmax prediction and its softmax probability for each row of [B,C] logits.
std::vector<Prediction> predictions_from_logits(const Tensor& logits, std::span<const std::size_t> labels);

double accuracy(std::span<const Prediction> preds);

}  // namespace attndrop
