// Copyright 2026 The iscsim Authors
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

#ifndef ISCSIM_PROBABILITY_MODEL_HPP
#define ISCSIM_PROBABILITY_MODEL_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "iscsim/point.hpp"
#include "iscsim/random_stream.hpp"

namespace iscsim {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/**
 * A density, optionally paired with a seeded sampler.
 *
 * log_density returns the natural log and may return -inf outside the support.
 * sample(stream, i) must be a pure function of its arguments.
 */
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;

  [[nodiscard]] virtual std::size_t dim() const = 0;
  [[nodiscard]] virtual double log_density(const Point& y) const = 0;
  [[nodiscard]] virtual bool has_sampler() const { return false; }
  [[nodiscard]] virtual Point sample(const RandomStream& stream, std::uint64_t i) const;
};

/// Scalar normal N(mean, variance).
class GaussianModel final : public ProbabilityModel {
 public:
  GaussianModel(double mean, double variance);

  [[nodiscard]] std::size_t dim() const override { return 1; }
  [[nodiscard]] double log_density(const Point& y) const override { return log_pdf(y[0]); }
  [[nodiscard]] bool has_sampler() const override { return true; }
  [[nodiscard]] Point sample(const RandomStream& stream, std::uint64_t i) const override;

  [[nodiscard]] double log_pdf(double x) const noexcept {
    const double z = x - mean_;
    return log_norm_ - 0.5 * z * z / variance_;
  }
  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double quantile(double p) const;
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const noexcept { return variance_; }

 private:
  double mean_;
  double variance_;
  double log_norm_;
};

/// k independent normal coordinates with per-coordinate means and a shared variance.
class ProductGaussianModel final : public ProbabilityModel {
 public:
  ProductGaussianModel(Point means, double variance);

  [[nodiscard]] std::size_t dim() const override { return means_.dim(); }
  [[nodiscard]] double log_density(const Point& y) const override;
  [[nodiscard]] bool has_sampler() const override { return true; }
  [[nodiscard]] Point sample(const RandomStream& stream, std::uint64_t i) const override;

 private:
  Point means_;
  double variance_;
  double log_norm_;
};

/// Distribution over the symbols 0, 1, ..., n-1 (stored as doubles).
class CategoricalModel final : public ProbabilityModel {
 public:
  explicit CategoricalModel(std::vector<double> probabilities);

  [[nodiscard]] std::size_t dim() const override { return 1; }
  [[nodiscard]] double log_density(const Point& y) const override;
  [[nodiscard]] bool has_sampler() const override { return true; }
  [[nodiscard]] Point sample(const RandomStream& stream, std::uint64_t i) const override;

  [[nodiscard]] std::size_t size() const noexcept { return probabilities_.size(); }
  [[nodiscard]] double probability(std::size_t symbol) const { return probabilities_.at(symbol); }
  [[nodiscard]] const std::vector<double>& probabilities() const noexcept { return probabilities_; }

 private:
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

/// Density-only model backed by a callable; for pluggable targets such as
/// learned log-ratio estimators.
class DensityModel final : public ProbabilityModel {
 public:
  using LogDensityFn = std::function<double(const Point&)>;
  DensityModel(std::size_t dim, LogDensityFn fn) : dim_{dim}, fn_{std::move(fn)} {}

  [[nodiscard]] std::size_t dim() const override { return dim_; }
  [[nodiscard]] double log_density(const Point& y) const override { return fn_(y); }

 private:
  std::size_t dim_;
  LogDensityFn fn_;
};

}  // namespace iscsim

#endif  // ISCSIM_PROBABILITY_MODEL_HPP
