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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "paf/measurements.hpp"
#include "paf/signal.hpp"

namespace paf {

/// How the perturbation vector eps is derived from the data.
struct EpsilonPolicy {
  enum class Mode { scaled_b, explicit_values };

  Mode mode = Mode::scaled_b;
  double alpha = 1.0;                       // eps = sqrt(alpha) * |b| in scaled_b mode
  std::optional<RVector> values;            // used in explicit_values mode

  static EpsilonPolicy scaled(double alpha) { return {Mode::scaled_b, alpha, std::nullopt}; }
  static EpsilonPolicy fixed(RVector eps) { return {Mode::explicit_values, 0.0, std::move(eps)}; }
};

/// Resolves eps for the given data and enforces eps_j != 0 whenever b_j != 0
/// (alpha = 0 is the unperturbed amplitude model and is exempt).
inline RVector resolve_epsilon(const EpsilonPolicy& policy, const PhaselessData& data) {
  if (policy.mode == EpsilonPolicy::Mode::scaled_b) {
    if (!(policy.alpha >= 0.0)) throw std::invalid_argument("resolve_epsilon: alpha must be >= 0");
    return std::sqrt(policy.alpha) * data.b.cwiseAbs();
  }
  if (!policy.values) throw std::invalid_argument("resolve_epsilon: explicit mode without values");
  const RVector& eps = *policy.values;
  if (eps.size() != data.b.size())
    throw std::invalid_argument("resolve_epsilon: expected " + std::to_string(data.b.size()) + " values, got " +
                                std::to_string(eps.size()));
  for (Eigen::Index j = 0; j < eps.size(); ++j) {
    if (eps[j] == 0.0 && data.b[j] != 0.0)
      throw std::invalid_argument("resolve_epsilon: eps[" + std::to_string(j) + "] is zero while b[" +
                                  std::to_string(j) + "] is not");
  }
  return eps;
}

namespace detail {

inline void require_lengths(const MeasurementOperator& op, const PhaselessData& data, const RVector* eps,
                            const Signal& z, const char* what) {
  if (data.size() != op.m() || (eps != nullptr && static_cast<std::size_t>(eps->size()) != op.m()) ||
      z.size() != op.n())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

/// 1 - sqrt(b^2 + eps^2) / sqrt(|Az|^2 + eps^2), zero for degenerate terms.
inline RVector amplitude_weights(const CVector& az, const RVector& b, const RVector& eps) {
  RVector w(az.size());
  for (Eigen::Index j = 0; j < az.size(); ++j) {
    const double e2 = eps[j] * eps[j];
    const double denom = std::sqrt(std::norm(az[j]) + e2);
    // Degenerate summands (a_j^* z = eps_j = 0) contribute nothing.
    w[j] = denom == 0.0 ? 0.0 : 1.0 - std::sqrt(b[j] * b[j] + e2) / denom;
  }
  return w;
}

inline Signal finish_gradient(const MeasurementOperator& op, const Signal& z, CVector v) {
  Signal g = adjoint(op, v);
  CVector vals = g.values() / static_cast<double>(op.m());
  const Field f = (z.field() == Field::real && g.field() == Field::real) ? Field::real : Field::complex;
  return Signal(std::move(vals), f);
}

}  // namespace detail

/// Per-measurement gradient weights w_j at z.
inline RVector paf_weights(const MeasurementOperator& op, const PhaselessData& data, const RVector& eps,
                           const Signal& z) {
  detail::require_lengths(op, data, &eps, z, "paf_weights");
  return detail::amplitude_weights(apply(op, z), data.b, eps);
}

/// f_eps(z) = (1/m) sum_j (sqrt(|a_j^* z|^2 + eps_j^2) - sqrt(b_j^2 + eps_j^2))^2.
inline double paf_loss(const MeasurementOperator& op, const PhaselessData& data, const RVector& eps,
                       const Signal& z) {
  detail::require_lengths(op, data, &eps, z, "paf_loss");
  const CVector az = apply(op, z);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < az.size(); ++j) {
    const double e2 = eps[j] * eps[j];
    const double r = std::sqrt(std::norm(az[j]) + e2) - std::sqrt(data.b[j] * data.b[j] + e2);
    acc += r * r;
  }
  return acc / static_cast<double>(op.m());
}

/// Unperturbed amplitude loss (1/(2m)) sum_j (|a_j^* z| - b_j)^2.
inline double amplitude_loss(const MeasurementOperator& op, const PhaselessData& data, const Signal& z) {
  detail::require_lengths(op, data, nullptr, z, "amplitude_loss");
  const CVector az = apply(op, z);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < az.size(); ++j) {
    const double r = std::abs(az[j]) - data.b[j];
    acc += r * r;
  }
  return acc / (2.0 * static_cast<double>(op.m()));
}

/// Wirtinger gradient (d f_eps / d conj z):
/// (1/m) sum_j w_j a_j a_j^* z. The gradient with respect to the stacked
/// real and imaginary parts is twice this vector.
inline Signal paf_gradient(const MeasurementOperator& op, const PhaselessData& data, const RVector& eps,
                           const Signal& z) {
  detail::require_lengths(op, data, &eps, z, "paf_gradient");
  const CVector az = apply(op, z);
  const RVector w = detail::amplitude_weights(az, data.b, eps);
  return detail::finish_gradient(op, z, w.cast<cplx>().cwiseProduct(az));
}

/// Loss and gradient from a single forward application.
struct LossAndGradient {
  double loss = 0.0;
  Signal gradient;
};

inline LossAndGradient paf_evaluate(const MeasurementOperator& op, const PhaselessData& data, const RVector& eps,
                                    const Signal& z) {
  detail::require_lengths(op, data, &eps, z, "paf_evaluate");
  const CVector az = apply(op, z);
  double acc = 0.0;
  CVector v(az.size());
  for (Eigen::Index j = 0; j < az.size(); ++j) {
    const double e2 = eps[j] * eps[j];
    const double denom = std::sqrt(std::norm(az[j]) + e2);
    const double target = std::sqrt(data.b[j] * data.b[j] + e2);
    acc += (denom - target) * (denom - target);
    v[j] = denom == 0.0 ? cplx{} : (1.0 - target / denom) * az[j];
  }
  return {acc / static_cast<double>(op.m()), detail::finish_gradient(op, z, std::move(v))};
}

/// Intensity loss (1/(4m)) sum_j (|a_j^* z|^2 - b_j^2)^2.
inline double wf_loss(const MeasurementOperator& op, const PhaselessData& data, const Signal& z) {
  detail::require_lengths(op, data, nullptr, z, "wf_loss");
  const CVector az = apply(op, z);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < az.size(); ++j) {
    const double r = std::norm(az[j]) - data.b[j] * data.b[j];
    acc += r * r;
  }
  return acc / (4.0 * static_cast<double>(op.m()));
}

/// (1/m) sum_j (|a_j^* z|^2 - b_j^2) a_j a_j^* z; equals the gradient of
/// wf_loss over the stacked real and imaginary parts.
inline Signal wf_gradient(const MeasurementOperator& op, const PhaselessData& data, const Signal& z) {
  detail::require_lengths(op, data, nullptr, z, "wf_gradient");
  CVector az = apply(op, z);
  for (Eigen::Index j = 0; j < az.size(); ++j) az[j] *= std::norm(az[j]) - data.b[j] * data.b[j];
  return detail::finish_gradient(op, z, std::move(az));
}

/// Weight of a_j a_j^* in the curvature matrix
/// 1 - sqrt(b^2 + eps^2) (|a^* z|^2 / 2 + eps^2) / (|a^* z|^2 + eps^2)^{3/2}.
inline RVector hessian_weights(const MeasurementOperator& op, const PhaselessData& data, const RVector& eps,
                               const Signal& z) {
  detail::require_lengths(op, data, &eps, z, "hessian_weights");
  const CVector az = apply(op, z);
  RVector c(az.size());
  for (Eigen::Index j = 0; j < az.size(); ++j) {
    const double t = std::norm(az[j]);
    const double e2 = eps[j] * eps[j];
    const double s = t + e2;
    const double top = std::sqrt(data.b[j] * data.b[j] + e2);
    if (s == 0.0) {
      if (top != 0.0)
        throw std::invalid_argument("hessian_weights: term " + std::to_string(j) +
                                    " is singular (a_j^* z = eps_j = 0, b_j != 0)");
      c[j] = 1.0;
      continue;
    }
    c[j] = 1.0 - top * (0.5 * t + e2) / (s * std::sqrt(s));
  }
  return c;
}

/// Applies (1/m) sum_j c_j a_j a_j^* to y, with c_j from hessian_weights.
inline Signal hessian_apply(const MeasurementOperator& op, const PhaselessData& data, const RVector& eps,
                            const Signal& z, const Signal& y) {
  if (y.size() != op.n()) throw std::invalid_argument("hessian_apply: dimension mismatch");
  const RVector c = hessian_weights(op, data, eps, z);
  return detail::finish_gradient(op, y, c.cast<cplx>().cwiseProduct(apply(op, y)));
}

}  // namespace paf
