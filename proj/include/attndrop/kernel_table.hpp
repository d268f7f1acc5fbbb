// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace attndrop {

/// Below this standard deviation the Gaussian kernel is replaced by the delta
/// kernel (its sigma -> 0 limit); the formula itself divides by sigma.
inline constexpr double kSigmaFloor = 1e-3;

/// Normalized Gaussian weights exp(-(j - c)^2 / (2 sigma^2)), c the center tap.
/// Constructed mirror-symmetric, so kernel[j] == kernel[w-1-j] exactly.
/// Throws ParameterError for even or zero width, or negative sigma.
std::vector<double> gaussian_kernel_1d(std::size_t width, double sigma);

/// Kernels for `steps` sigmas evenly spaced on [0, sigma_max], precomputed so
/// the training loop never evaluates exp().
class GaussianKernelTable {
 public:
  GaussianKernelTable() = default;

  static GaussianKernelTable build(std::size_t width, double sigma_max, std::size_t steps = 50);

  std::size_t width() const { return width_; }
  double sigma_max() const { return sigma_max_; }
  std::size_t steps() const { return sigmas_.size(); }
  const std::vector<double>& sigmas() const { return sigmas_; }
  std::span<const double> kernel(std::size_t row) const;

  /// Row whose sigma is closest to `sigma` (clamped to the table range).
  std::size_t nearest_row(double sigma) const;

  /// {"w", "sigma_max", "steps", "sigmas", "kernels"}; doubles are written with
  /// round-trip precision so a reload is bit-identical.
  std::string to_json() const;
  static GaussianKernelTable from_json(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static GaussianKernelTable load(const std::filesystem::path& path);

  friend bool operator==(const GaussianKernelTable&, const GaussianKernelTable&) = default;

 private:
  void validate() const;

  std::size_t width_ = 1;
  double sigma_max_ = 0.0;
  std::vector<double> sigmas_;
  std::vector<std::vector<double>> kernels_;
};

}  // namespace attndrop
