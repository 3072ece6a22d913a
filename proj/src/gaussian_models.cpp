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

#include "iscsim/gaussian_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace iscsim {

double gaussian_log_pdf(double x, double mean, double variance) noexcept {
  const double z = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * z * z / variance;
}

namespace {

double log_add(double a, double b) noexcept {
  const double hi = std::max(a, b);
  if (hi == kNegInf) return kNegInf;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

GaussianWZ::GaussianWZ(double var_v, double var_t_given_v, double var_w_given_v, std::size_t dim)
    : var_v_{var_v}, var_tv_{var_t_given_v}, var_wv_{var_w_given_v}, dim_{dim} {
  if (!(var_v > 0.0)) throw std::invalid_argument("GaussianWZ: var_v must be positive");
  if (!(var_t_given_v >= 0.0)) throw std::invalid_argument("GaussianWZ: var_t_given_v must be nonnegative");
  if (!(var_w_given_v > 0.0)) throw std::invalid_argument("GaussianWZ: var_w_given_v must be positive");
  if (dim == 0 || dim > Point::kMaxDim) throw std::invalid_argument("GaussianWZ: unsupported dimension");
}

GaussianParams GaussianWZ::posterior_w_given_t(double t) const noexcept {
  const double a = var_v_ / var_t();
  // s_w - s_v^2/s_t written as s_wv + s_v * s_tv / s_t to avoid cancellation.
  return {a * t, var_wv_ + var_v_ * var_tv_ / var_t()};
}

GaussianParams GaussianWZ::posterior_v_given_t(double t) const noexcept {
  const double a = var_v_ / var_t();
  return {a * t, var_v_ * var_tv_ / var_t()};
}

double GaussianWZ::info_density_bits(double w, double v, double t) const noexcept {
  const GaussianParams post = posterior_w_given_t(t);
  return (gaussian_log_pdf(w, v, var_wv_) - gaussian_log_pdf(w, post.mean, post.variance)) * std::numbers::log2e;
}

double GaussianWZ::info_density_bits(const Point& w, const Point& v, const Point& t) const noexcept {
  double sum = 0.0;
  for (std::size_t j = 0; j < w.dim(); ++j) sum += info_density_bits(w[j], v[j], t[j]);
  return sum;
}

double GaussianWZ::conditional_mutual_information_bits() const noexcept {
  return 0.5 * std::log2(posterior_w_given_t(0.0).variance / var_wv_);
}

double GaussianWZ::ivw_fuse(double w, double t) const noexcept {
  const GaussianParams post = posterior_v_given_t(t);
  if (post.variance == 0.0) return post.mean;
  return (w / var_wv_ + post.mean / post.variance) / (1.0 / var_wv_ + 1.0 / post.variance);
}

Point GaussianWZ::ivw_fuse(const Point& w, const Point& t) const noexcept {
  Point out(w.dim());
  for (std::size_t j = 0; j < w.dim(); ++j) out[j] = ivw_fuse(w[j], t[j]);
  return out;
}

double GaussianWZ::encoder_log_weight(const Point& w, const Point& v) const noexcept {
  double sum = 0.0;
  for (std::size_t j = 0; j < w.dim(); ++j) {
    sum += gaussian_log_pdf(w[j], v[j], var_wv_) - gaussian_log_pdf(w[j], 0.0, var_w());
  }
  return sum;
}

double GaussianWZ::decoder_log_weight(const Point& w, const Point& t) const noexcept {
  double sum = 0.0;
  for (std::size_t j = 0; j < w.dim(); ++j) {
    const GaussianParams post = posterior_w_given_t(t[j]);
    sum += gaussian_log_pdf(w[j], post.mean, post.variance) - gaussian_log_pdf(w[j], 0.0, var_w());
  }
  return sum;
}

std::shared_ptr<const ProbabilityModel> GaussianWZ::marginal_w() const {
  if (dim_ == 1) return std::make_shared<GaussianModel>(0.0, var_w());
  return std::make_shared<ProductGaussianModel>(Point(dim_), var_w());
}

void GaussianWZ::sample_source(const RandomStream& stream, std::uint64_t i, Point& v, Point& t) const {
  v = Point(dim_);
  t = Point(dim_);
  const double sv = std::sqrt(var_v_);
  const double st = std::sqrt(var_tv_);
  for (std::size_t j = 0; j < dim_; ++j) {
    const auto lane = static_cast<std::uint32_t>(2 * j);
    v[j] = sv * stream.normal(i, lane);
    t[j] = v[j] + st * stream.normal(i, lane + 1);
  }
}

Point GaussianWZ::sample_w_given_v(const RandomStream& stream, std::uint64_t i, const Point& v) const {
  Point w(v.dim());
  const double s = std::sqrt(var_wv_);
  for (std::size_t j = 0; j < v.dim(); ++j) w[j] = v[j] + s * stream.normal(i, static_cast<std::uint32_t>(j));
  return w;
}

GaussianMixtureModel::GaussianMixtureModel(GaussianParams first, GaussianParams second)
    : first_{first}, second_{second} {
  if (!(first.variance > 0.0) || !(second.variance > 0.0)) {
    throw std::invalid_argument("GaussianMixtureModel: variances must be positive");
  }
}

double GaussianMixtureModel::log_pdf(double y) const noexcept {
  return log_add(gaussian_log_pdf(y, first_.mean, first_.variance),
                 gaussian_log_pdf(y, second_.mean, second_.variance)) -
         std::numbers::ln2;
}

Point GaussianMixtureModel::sample(const RandomStream& stream, std::uint64_t i) const {
  const GaussianParams& c = stream.uniform(i, 1) < 0.5 ? first_ : second_;
  return Point::scalar(c.mean + std::sqrt(c.variance) * stream.normal(i, 0));
}

GaussMix::GaussMix(double offset, double noise_variance) : m_{offset}, d_{noise_variance} {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("GaussMix: noise variance must be positive");
}

double GaussMix::log_p_x(double x) const noexcept {
  return log_add(gaussian_log_pdf(x, m_, 1.0), gaussian_log_pdf(x, -m_, 1.0)) - std::numbers::ln2;
}

double GaussMix::log_p_y(double y) const noexcept { return log_add(log_p1(y), log_p2(y)) - std::numbers::ln2; }

double GaussMix::log_p1(double y) const noexcept { return gaussian_log_pdf(y, m_, 1.0 + d_); }

double GaussMix::log_p2(double y) const noexcept { return gaussian_log_pdf(y, -m_, 1.0 + d_); }

double GaussMix::log_p_y_given_x(double y, double x) const noexcept { return gaussian_log_pdf(y, x, d_); }

std::shared_ptr<const GaussianModel> GaussMix::component1() const {
  return std::make_shared<GaussianModel>(m_, 1.0 + d_);
}

std::shared_ptr<const GaussianModel> GaussMix::component2() const {
  return std::make_shared<GaussianModel>(-m_, 1.0 + d_);
}

std::shared_ptr<const GaussianMixtureModel> GaussMix::marginal_y() const {
  return std::make_shared<GaussianMixtureModel>(GaussianParams{m_, 1.0 + d_}, GaussianParams{-m_, 1.0 + d_});
}

std::shared_ptr<const GaussianModel> GaussMix::conditional(double x) const {
  return std::make_shared<GaussianModel>(x, d_);
}

double GaussMix::sample_x(const RandomStream& stream, std::uint64_t i) const {
  const double mode = stream.uniform(i, 1) < 0.5 ? m_ : -m_;
  return mode + stream.normal(i, 0);
}

}  // namespace iscsim
