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

#ifndef ISCSIM_GAUSSIAN_MODELS_HPP
#define ISCSIM_GAUSSIAN_MODELS_HPP

#include <cstddef>
#include <cstdint>
#include <memory>

#include "iscsim/point.hpp"
#include "iscsim/probability_model.hpp"
#include "iscsim/random_stream.hpp"

namespace iscsim {

struct GaussianParams {
  double mean = 0.0;
  double variance = 1.0;
};

/// ln N(x; mean, variance).
double gaussian_log_pdf(double x, double mean, double variance) noexcept;

/**
 * Scalar Gaussian chain T - V - W used coordinate-wise in `dim` dimensions.
 *
 * V ~ N(0, s_v), T = V + N(0, s_tv), W = V + N(0, s_wv). A zero s_tv means
 * perfect side information.
 */
class GaussianWZ {
 public:
  GaussianWZ(double var_v, double var_t_given_v, double var_w_given_v, std::size_t dim = 1);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] double var_v() const noexcept { return var_v_; }
  [[nodiscard]] double var_t_given_v() const noexcept { return var_tv_; }
  [[nodiscard]] double var_w_given_v() const noexcept { return var_wv_; }
  [[nodiscard]] double var_t() const noexcept { return var_v_ + var_tv_; }
  [[nodiscard]] double var_w() const noexcept { return var_v_ + var_wv_; }

  /// p_{W|T}(.|t) = N((s_v/s_t) t, s_w - s_v^2/s_t).
  [[nodiscard]] GaussianParams posterior_w_given_t(double t) const noexcept;
  /// p_{V|T}(.|t) = N((s_v/s_t) t, (1 - s_v/s_t) s_v).
  [[nodiscard]] GaussianParams posterior_v_given_t(double t) const noexcept;

  /// log2 p_{W|V}(w|v) - log2 p_{W|T}(w|t), summed over coordinates.
  [[nodiscard]] double info_density_bits(double w, double v, double t) const noexcept;
  [[nodiscard]] double info_density_bits(const Point& w, const Point& v, const Point& t) const noexcept;
  /// Per-coordinate I(W;V|T) = 1/2 log2(var(W|T) / s_wv).
  [[nodiscard]] double conditional_mutual_information_bits() const noexcept;

  /// Inverse-variance fusion of W (variance s_wv) with the posterior mean of V given T.
  [[nodiscard]] double ivw_fuse(double w, double t) const noexcept;
  [[nodiscard]] Point ivw_fuse(const Point& w, const Point& t) const noexcept;

  /// ln p_{W|V}(w|v) - ln p_W(w) and ln p_{W|T}(w|t) - ln p_W(w), summed over coordinates.
  [[nodiscard]] double encoder_log_weight(const Point& w, const Point& v) const noexcept;
  [[nodiscard]] double decoder_log_weight(const Point& w, const Point& t) const noexcept;

  /// Marginal p_W as a product model with a sampler.
  [[nodiscard]] std::shared_ptr<const ProbabilityModel> marginal_w() const;

  /// Joint draw of (V, T) for trial i; coordinates use separate lanes.
  void sample_source(const RandomStream& stream, std::uint64_t i, Point& v, Point& t) const;
  /// W ~ p_{W|V}(.|v) for trial i.
  [[nodiscard]] Point sample_w_given_v(const RandomStream& stream, std::uint64_t i, const Point& v) const;

 private:
  double var_v_;
  double var_tv_;
  double var_wv_;
  std::size_t dim_;
};

/// Equal-weight two-component scalar Gaussian mixture with a sampler.
class GaussianMixtureModel final : public ProbabilityModel {
 public:
  GaussianMixtureModel(GaussianParams first, GaussianParams second);

  [[nodiscard]] std::size_t dim() const override { return 1; }
  [[nodiscard]] double log_density(const Point& y) const override { return log_pdf(y[0]); }
  [[nodiscard]] bool has_sampler() const override { return true; }
  [[nodiscard]] Point sample(const RandomStream& stream, std::uint64_t i) const override;
  [[nodiscard]] double log_pdf(double y) const noexcept;

 private:
  GaussianParams first_;
  GaussianParams second_;
};

/**
 * Source X ~ 1/2 N(m, 1) + 1/2 N(-m, 1), channel Y | X = x ~ N(x, D), so that
 * p_Y = 1/2 N(m, 1+D) + 1/2 N(-m, 1+D).
 */
class GaussMix {
 public:
  GaussMix(double offset, double noise_variance);

  [[nodiscard]] double offset() const noexcept { return m_; }
  [[nodiscard]] double noise_variance() const noexcept { return d_; }

  [[nodiscard]] double log_p_x(double x) const noexcept;
  [[nodiscard]] double log_p_y(double y) const noexcept;
  [[nodiscard]] double log_p1(double y) const noexcept;
  [[nodiscard]] double log_p2(double y) const noexcept;
  [[nodiscard]] double log_p_y_given_x(double y, double x) const noexcept;

  [[nodiscard]] std::shared_ptr<const GaussianModel> component1() const;
  [[nodiscard]] std::shared_ptr<const GaussianModel> component2() const;
  [[nodiscard]] std::shared_ptr<const GaussianMixtureModel> marginal_y() const;
  [[nodiscard]] std::shared_ptr<const GaussianModel> conditional(double x) const;

  [[nodiscard]] double sample_x(const RandomStream& stream, std::uint64_t i) const;

 private:
  double m_;
  double d_;
};

}  // namespace iscsim

#endif  // ISCSIM_GAUSSIAN_MODELS_HPP
