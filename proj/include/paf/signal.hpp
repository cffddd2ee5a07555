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
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace paf {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Scalar field a signal lives in. Real signals share the complex container
/// and keep every imaginary part at exactly zero.
enum class Field { real, complex };

inline std::string_view to_string(Field f) { return f == Field::real ? "real" : "complex"; }

inline Field field_from_string(std::string_view s) {
  if (s == "real") return Field::real;
  if (s == "complex") return Field::complex;
  throw std::invalid_argument("unknown field '" + std::string(s) + "' (expected real|complex)");
}

/// A length-n vector over the real or complex field.
class Signal {
 public:
  Signal() = default;

  Signal(CVector values, Field field) : values_(std::move(values)), field_(field) {
    if (values_.size() < 1) throw std::invalid_argument("Signal: length must be >= 1");
    if (field_ == Field::real) {
      for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (values_[i].imag() != 0.0)
          throw std::invalid_argument("Signal: real-field entry " + std::to_string(i) +
                                      " has nonzero imaginary part");
      }
    }
  }

  static Signal zeros(std::size_t n, Field field) {
    return Signal(CVector::Zero(static_cast<Eigen::Index>(n)), field);
  }

  static Signal from_real(const RVector& v) { return Signal(v.cast<cplx>(), Field::real); }

  /// Standard basis vector e_k.
  static Signal basis(std::size_t n, std::size_t k, Field field) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(n));
    v[static_cast<Eigen::Index>(k)] = 1.0;
    return Signal(std::move(v), field);
  }

  [[nodiscard]] const CVector& values() const noexcept { return values_; }
  [[nodiscard]] Field field() const noexcept { return field_; }
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  [[nodiscard]] double norm() const { return values_.norm(); }
  [[nodiscard]] cplx operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  /// Scales by c. Real signals accept only real c.
  [[nodiscard]] Signal scaled(cplx c) const {
    if (field_ == Field::real && c.imag() != 0.0)
      throw std::invalid_argument("Signal::scaled: complex factor on a real-field signal");
    return Signal(values_ * c, field_);
  }

  friend bool operator==(const Signal& a, const Signal& b) {
    return a.field_ == b.field_ && a.values_ == b.values_;
  }

 private:
  CVector values_;
  Field field_ = Field::complex;
};

/// Optimal global phase together with the resulting distance.
struct AlignedPair {
  cplx phase{1.0, 0.0};
  double distance = 0.0;
};

namespace detail {

inline void require_compatible(const Signal& z, const Signal& x, const char* what) {
  if (z.size() != x.size())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(z.size()) +
                                " vs " + std::to_string(x.size()) + ")");
  if (z.field() != x.field())
    throw std::invalid_argument(std::string(what) + ": field mismatch");
}

inline cplx phase_of(const CVector& z, const CVector& x, Field field) {
  // x^* z; the maximiser of Re(e^{-i phi} x^* z).
  const cplx inner = x.dot(z);
  const double mag = std::abs(inner);
  if (mag == 0.0) return {1.0, 0.0};
  if (field == Field::real) return {inner.real() >= 0.0 ? 1.0 : -1.0, 0.0};
  return inner / mag;
}

}  // namespace detail

/// Unit-modulus c minimising ||z - c x||. Returns 1 when x^* z = 0.
inline cplx phase_align(const Signal& z, const Signal& x) {
  detail::require_compatible(z, x, "phase_align");
  return detail::phase_of(z.values(), x.values(), z.field());
}

inline AlignedPair align(const Signal& z, const Signal& x) {
  detail::require_compatible(z, x, "align");
  AlignedPair out;
  out.phase = detail::phase_of(z.values(), x.values(), z.field());
  out.distance = (z.values() - out.phase * x.values()).norm();
  return out;
}

/// Phase-invariant distance min_phi ||z - e^{i phi} x||.
inline double dist(const Signal& z, const Signal& x) { return align(z, x).distance; }

/// dist(z, x) / ||x||.
inline double relative_error(const Signal& z, const Signal& x) {
  const double nx = x.norm();
  if (nx == 0.0) throw std::invalid_argument("relative_error: reference signal has zero norm");
  return dist(z, x) / nx;
}

}  // namespace paf
