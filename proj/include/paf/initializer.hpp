// Copyright 2026 The paf-retrieval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "paf/measurements.hpp"
#include "paf/rng.hpp"
#include "paf/signal.hpp"

namespace paf {

inline double default_gamma(Field field) { return field == Field::complex ? 0.5 : 1.0 / std::sqrt(3.0); }

struct InitConfig {
  std::size_t power_iterations = 50;
  std::optional<double> gamma;  // defaults to default_gamma(field)
  std::uint64_t seed = 0;
};

/// lambda = sqrt((1/m) sum_j b_j^2).
inline double lambda_estimate(const PhaselessData& data) {
  if (data.size() == 0) throw std::invalid_argument("lambda_estimate: empty data");
  const double ms = data.b.squaredNorm() / static_cast<double>(data.size());
  if (ms == 0.0) throw std::invalid_argument("lambda_estimate: all measurements are zero");
  return std::sqrt(ms);
}

/// Y v with Y = (1/m) sum_j (gamma - exp(-b_j^2 / lambda^2)) a_j a_j^*, never
/// materialising Y.
inline CVector init_matrix_apply(const MeasurementOperator& op, const PhaselessData& data, double gamma,
                                 double lambda, const CVector& v) {
  if (!(lambda > 0.0)) throw std::invalid_argument("init_matrix_apply: lambda must be > 0");
  if (data.size() != op.m()) throw std::invalid_argument("init_matrix_apply: dimension mismatch");
  CVector av = op.apply(v);
  const double inv_l2 = 1.0 / (lambda * lambda);
  for (Eigen::Index j = 0; j < av.size(); ++j) av[j] *= gamma - std::exp(-data.b[j] * data.b[j] * inv_l2);
  return op.adjoint(av) / static_cast<double>(op.m());
}

inline Signal init_matrix_apply(const MeasurementOperator& op, const PhaselessData& data, double gamma,
                                double lambda, const Signal& v) {
  CVector out = init_matrix_apply(op, data, gamma, lambda, v.values());
  if (v.field() == Field::real && op.field() == Field::real) return Signal(out.real().cast<cplx>(), Field::real);
  return Signal(std::move(out), Field::complex);
}

/// Spectral initial guess: leading eigenvector of Y by power iteration on the
/// shifted matrix Y + |gamma| I, scaled to the estimated signal norm.
///
/// For the Gaussian ensemble the returned norm is exactly lambda. Operators
/// with gram_scale() != 1 (unitary-DFT coded diffraction) scale it to
/// lambda / sqrt(gram_scale()), the corresponding estimate of ||x||.
/// If `rayleigh` is non-null it receives the shifted Rayleigh quotient after
/// every iteration.
inline Signal spectral_init(const MeasurementOperator& op, const PhaselessData& data, const InitConfig& cfg,
                            std::vector<double>* rayleigh = nullptr) {
  if (cfg.power_iterations < 1) throw std::invalid_argument("spectral_init: power_iterations must be >= 1");
  const double lambda = lambda_estimate(data);
  const double gamma = cfg.gamma.value_or(default_gamma(op.field()));
  const double shift = std::abs(gamma);

  Rng rng(cfg.seed);
  CVector v = rng.unit_vector(op.n(), op.field());
  for (std::size_t it = 0; it < cfg.power_iterations; ++it) {
    CVector w = init_matrix_apply(op, data, gamma, lambda, v) + shift * v;
    const double nw = w.norm();
    if (nw == 0.0) break;
    v = w / nw;
    if (rayleigh != nullptr) {
      const CVector yv = init_matrix_apply(op, data, gamma, lambda, v) + shift * v;
      rayleigh->push_back(v.dot(yv).real());
    }
  }
  if (op.field() == Field::real) v = v.real().cast<cplx>();
  v /= v.norm();
  const double scale = lambda / std::sqrt(op.gram_scale());
  return Signal(scale * v, op.field());
}

}  // namespace paf
