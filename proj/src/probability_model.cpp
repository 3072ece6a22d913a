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

#include "iscsim/probability_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace iscsim {

Point ProbabilityModel::sample(const RandomStream& /*stream*/, std::uint64_t /*i*/) const {
  throw std::logic_error("model has no sampler");
}

GaussianModel::GaussianModel(double mean, double variance)
    : mean_{mean}, variance_{variance}, log_norm_{-0.5 * std::log(2.0 * std::numbers::pi * variance)} {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("GaussianModel: variance must be positive and finite");
  }
}

Point GaussianModel::sample(const RandomStream& stream, std::uint64_t i) const {
  return Point::scalar(mean_ + std::sqrt(variance_) * stream.normal(i));
}

double GaussianModel::cdf(double x) const {
  return boost::math::cdf(boost::math::normal_distribution<double>(mean_, std::sqrt(variance_)), x);
}

double GaussianModel::quantile(double p) const {
  return boost::math::quantile(boost::math::normal_distribution<double>(mean_, std::sqrt(variance_)), p);
}

ProductGaussianModel::ProductGaussianModel(Point means, double variance)
    : means_{means},
      variance_{variance},
      log_norm_{-0.5 * static_cast<double>(means.dim()) * std::log(2.0 * std::numbers::pi * variance)} {
  if (!(variance > 0.0)) throw std::invalid_argument("ProductGaussianModel: variance must be positive");
  if (means.dim() == 0) throw std::invalid_argument("ProductGaussianModel: empty dimension");
}

double ProductGaussianModel::log_density(const Point& y) const {
  double sq = 0.0;
  for (std::size_t j = 0; j < means_.dim(); ++j) {
    const double z = y[j] - means_[j];
    sq += z * z;
  }
  return log_norm_ - 0.5 * sq / variance_;
}

Point ProductGaussianModel::sample(const RandomStream& stream, std::uint64_t i) const {
  Point out(means_.dim());
  const double sd = std::sqrt(variance_);
  for (std::size_t j = 0; j < means_.dim(); ++j) {
    out[j] = means_[j] + sd * stream.normal(i, static_cast<std::uint32_t>(j));
  }
  return out;
}

CategoricalModel::CategoricalModel(std::vector<double> probabilities) : probabilities_{std::move(probabilities)} {
  if (probabilities_.empty()) throw std::invalid_argument("CategoricalModel: empty alphabet");
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0)) throw std::invalid_argument("CategoricalModel: negative probability");
    total += p;
  }
  if (!(total > 0.0)) throw std::invalid_argument("CategoricalModel: zero total mass");
  for (double& p : probabilities_) p /= total;
  cumulative_.resize(probabilities_.size());
  std::partial_sum(probabilities_.begin(), probabilities_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

double CategoricalModel::log_density(const Point& y) const {
  const double s = y[0];
  if (s < 0.0 || s != std::floor(s) || s >= static_cast<double>(probabilities_.size())) return kNegInf;
  const double p = probabilities_[static_cast<std::size_t>(s)];
  return p > 0.0 ? std::log(p) : kNegInf;
}

Point CategoricalModel::sample(const RandomStream& stream, std::uint64_t i) const {
  const double u = stream.uniform(i);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto symbol = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                            probabilities_.size() - 1);
  return Point::scalar(static_cast<double>(symbol));
}

}  // namespace iscsim
