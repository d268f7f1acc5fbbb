// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/kernel_table.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "attndrop/errors.hpp"

namespace attndrop {

std::vector<double> gaussian_kernel_1d(std::size_t width, double sigma) {
  if (width == 0 || width % 2 == 0) {
    throw ParameterError("gaussian_kernel_1d: width must be odd and positive, got " + std::to_string(width));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("gaussian_kernel_1d: sigma must be finite and >= 0");
  }
  const std::size_t center = width / 2;
  std::vector<double> k(width, 0.0);
  if (sigma < kSigmaFloor) {
    k[center] = 1.0;
    return k;
  }
  k[center] = 1.0;
  for (std::size_t j = 0; j < center; ++j) {
    const double x = (static_cast<double>(center) - static_cast<double>(j)) / sigma;
    k[j] = k[width - 1 - j] = std::exp(-0.5 * x * x);
  }
  // Sum symmetric pairs from the tails inward, so summation order is independent of side.
  double total = k[center];
  for (std::size_t j = 0; j < center; ++j) total += 2.0 * k[j];
  for (auto& v : k) v /= total;
  return k;
}

GaussianKernelTable GaussianKernelTable::build(std::size_t width, double sigma_max, std::size_t steps) {
  if (width == 0 || width % 2 == 0) {
    throw ParameterError("kernel table: width must be odd and positive, got " + std::to_string(width));
  }
  if (!(sigma_max > 0.0) || !std::isfinite(sigma_max)) throw ParameterError("kernel table: sigma_max must be > 0");
  if (steps == 0) throw ParameterError("kernel table: steps must be >= 1");
  GaussianKernelTable t;
  t.width_ = width;
  t.sigma_max_ = sigma_max;
  // Same grid as numpy.linspace(0, sigma_max, steps).
  t.sigmas_.resize(steps);
  if (steps == 1) {
    t.sigmas_[0] = 0.0;
  } else {
    const double step = sigma_max / static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i) t.sigmas_[i] = static_cast<double>(i) * step;
    t.sigmas_.back() = sigma_max;
  }
  t.kernels_.reserve(steps);
  for (double s : t.sigmas_) t.kernels_.push_back(gaussian_kernel_1d(width, s));
  return t;
}

std::span<const double> GaussianKernelTable::kernel(std::size_t row) const {
  if (row >= kernels_.size()) throw ParameterError("kernel table: row " + std::to_string(row) + " out of range");
  return kernels_[row];
}

std::size_t GaussianKernelTable::nearest_row(double sigma) const {
  if (sigmas_.size() <= 1) return 0;
  const double pos = sigma / sigma_max_ * static_cast<double>(sigmas_.size() - 1);
  if (!(pos > 0.0)) return 0;
  const auto idx = static_cast<std::size_t>(std::llround(pos));
  return std::min(idx, sigmas_.size() - 1);
}

void GaussianKernelTable::validate() const {
  if (width_ == 0 || width_ % 2 == 0) throw ParameterError("kernel table: width must be odd");
  if (!(sigma_max_ > 0.0)) throw ParameterError("kernel table: sigma_max must be > 0");
  if (sigmas_.empty() || kernels_.size() != sigmas_.size()) {
    throw ParameterError("kernel table: need one kernel per sigma");
  }
  for (std::size_t i = 0; i < kernels_.size(); ++i) {
    if (kernels_[i].size() != width_) throw ParameterError("kernel table: row " + std::to_string(i) + " has wrong width");
    if (i > 0 && !(sigmas_[i] > sigmas_[i - 1])) throw ParameterError("kernel table: sigmas must increase");
  }
}

std::string GaussianKernelTable::to_json() const {
  nlohmann::ordered_json j;
  j["w"] = width_;
  j["sigma_max"] = sigma_max_;
  j["steps"] = sigmas_.size();
  j["sigmas"] = sigmas_;
  j["kernels"] = kernels_;
  return j.dump(2) + "\n";
}

GaussianKernelTable GaussianKernelTable::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("kernel table: invalid JSON: ") + e.what());
  }
  GaussianKernelTable t;
  try {
    for (const auto& [key, _] : j.items()) {
      if (key != "w" && key != "sigma_max" && key != "steps" && key != "sigmas" && key != "kernels") {
        throw ConfigError("kernel table: unknown key '" + key + "'");
      }
    }
    t.width_ = j.at("w").get<std::size_t>();
    t.sigma_max_ = j.at("sigma_max").get<double>();
    t.sigmas_ = j.at("sigmas").get<std::vector<double>>();
    t.kernels_ = j.at("kernels").get<std::vector<std::vector<double>>>();
    if (j.at("steps").get<std::size_t>() != t.sigmas_.size()) {
      throw ConfigError("kernel table: 'steps' disagrees with number of sigmas");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("kernel table: ") + e.what());
  }
  t.validate();
  return t;
}

void GaussianKernelTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_json();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

GaussianKernelTable GaussianKernelTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace attndrop
