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
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "paf/fft.hpp"
#include "paf/rng.hpp"
#include "paf/signal.hpp"

namespace paf {

enum class OperatorKind { gaussian_dense, coded_diffraction };

inline std::string_view to_string(OperatorKind k) {
  return k == OperatorKind::gaussian_dense ? "gaussian-dense" : "coded-diffraction";
}

/// Observed magnitudes b_j, possibly perturbed by additive noise.
struct PhaselessData {
  RVector b;
  std::optional<double> noise_sigma;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(b.size()); }
};

/// Linear measurement map z -> (a_j^* z)_j with its exact adjoint.
///
/// Two realisations: a dense m x n matrix whose rows are a_j^*, and the coded
/// diffraction model z -> [F D_1 z; ...; F D_L z] with F the unitary DFT
/// (1-D, or 2-D over a rows x cols grid for images). Immutable after
/// construction, so apply/adjoint may run concurrently.
class MeasurementOperator {
 public:
  /// Dense operator from explicit rows a_j^*. Not regenerable from a descriptor.
  static MeasurementOperator dense(Eigen::MatrixXcd rows, Field field) {
    if (rows.rows() < 1 || rows.cols() < 1) throw std::invalid_argument("dense operator: empty matrix");
    if (field == Field::real && rows.imag().cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("dense operator: real field with complex entries");
    MeasurementOperator op;
    op.kind_ = OperatorKind::gaussian_dense;
    op.field_ = field;
    op.n_ = static_cast<std::size_t>(rows.cols());
    op.m_ = static_cast<std::size_t>(rows.rows());
    op.rows_ = std::move(rows);
    return op;
  }

  static MeasurementOperator coded_diffraction(std::vector<CVector> masks, std::size_t grid_rows,
                                               std::size_t grid_cols) {
    if (masks.empty()) throw std::invalid_argument("coded diffraction: need at least one mask");
    const std::size_t n = grid_rows * grid_cols;
    for (const auto& d : masks)
      if (static_cast<std::size_t>(d.size()) != n)
        throw std::invalid_argument("coded diffraction: mask length does not match grid");
    MeasurementOperator op;
    op.kind_ = OperatorKind::coded_diffraction;
    op.field_ = Field::complex;
    op.n_ = n;
    op.m_ = n * masks.size();
    op.masks_ = std::move(masks);
    op.dft_.emplace(grid_rows, grid_cols);
    return op;
  }

  [[nodiscard]] OperatorKind kind() const noexcept { return kind_; }
  [[nodiscard]] Field field() const noexcept { return field_; }
  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::size_t m() const noexcept { return m_; }
  [[nodiscard]] std::size_t num_masks() const noexcept { return masks_.size(); }
  [[nodiscard]] const std::vector<CVector>& masks() const noexcept { return masks_; }
  [[nodiscard]] const Eigen::MatrixXcd& rows() const noexcept { return rows_; }
  [[nodiscard]] std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  [[nodiscard]] std::pair<std::size_t, std::size_t> grid() const noexcept {
    return dft_ ? std::pair{dft_->rows(), dft_->cols()} : std::pair{n_, std::size_t{1}};
  }

  /// c with E[(1/m) A^* A] = c I: 1 for the Gaussian ensemble, 1/n for
  /// unit-power masks behind a unitary DFT.
  [[nodiscard]] double gram_scale() const noexcept {
    return kind_ == OperatorKind::gaussian_dense ? 1.0 : 1.0 / static_cast<double>(n_);
  }

  [[nodiscard]] CVector apply(const CVector& z) const {
    if (static_cast<std::size_t>(z.size()) != n_)
      throw std::invalid_argument("apply: expected length " + std::to_string(n_) + ", got " +
                                  std::to_string(z.size()));
    if (kind_ == OperatorKind::gaussian_dense) return rows_ * z;
    CVector out(static_cast<Eigen::Index>(m_));
    CVector tmp(static_cast<Eigen::Index>(n_));
    for (std::size_t l = 0; l < masks_.size(); ++l) {
      tmp = masks_[l].cwiseProduct(z);
      dft_->forward(tmp.data(), out.data() + l * n_);
    }
    return out;
  }

  [[nodiscard]] CVector adjoint(const CVector& v) const {
    if (static_cast<std::size_t>(v.size()) != m_)
      throw std::invalid_argument("adjoint: expected length " + std::to_string(m_) + ", got " +
                                  std::to_string(v.size()));
    if (kind_ == OperatorKind::gaussian_dense) return rows_.adjoint() * v;
    CVector out = CVector::Zero(static_cast<Eigen::Index>(n_));
    CVector tmp(static_cast<Eigen::Index>(n_));
    for (std::size_t l = 0; l < masks_.size(); ++l) {
      dft_->inverse(v.data() + l * n_, tmp.data());
      out += masks_[l].conjugate().cwiseProduct(tmp);
    }
    return out;
  }

  /// JSON descriptor {kind, n, m | L, seed, field}; enough to regenerate a
  /// sampled operator exactly.
  [[nodiscard]] nlohmann::json descriptor() const {
    nlohmann::json j;
    j["kind"] = std::string(to_string(kind_));
    j["n"] = n_;
    j["field"] = std::string(to_string(field_));
    if (seed_) j["seed"] = *seed_; else j["seed"] = nullptr;
    if (kind_ == OperatorKind::gaussian_dense) {
      j["m"] = m_;
    } else {
      j["L"] = masks_.size();
      j["shape"] = {dft_->rows(), dft_->cols()};
    }
    return j;
  }

  static MeasurementOperator from_descriptor(const nlohmann::json& j);

 private:
  friend MeasurementOperator sample_gaussian(std::size_t, std::size_t, Field, std::uint64_t);
  friend MeasurementOperator sample_octanary_masks(std::size_t, std::size_t, std::size_t, std::uint64_t);

  OperatorKind kind_ = OperatorKind::gaussian_dense;
  Field field_ = Field::complex;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::optional<std::uint64_t> seed_;
  Eigen::MatrixXcd rows_;
  std::vector<CVector> masks_;
  std::optional<UnitaryDft> dft_;
};

/// m i.i.d. rows: N(0, I) for the real field, N(0, I/2) + i N(0, I/2) for the
/// complex field. Entries are drawn row by row, real part before imaginary.
inline MeasurementOperator sample_gaussian(std::size_t m, std::size_t n, Field field, std::uint64_t seed) {
  if (m == 0 || n == 0) throw std::invalid_argument("sample_gaussian: m and n must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXcd rows(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < rows.rows(); ++j)
    for (Eigen::Index k = 0; k < rows.cols(); ++k) rows(j, k) = std::conj(rng.gaussian(field));
  auto op = MeasurementOperator::dense(std::move(rows), field);
  op.seed_ = seed;
  return op;
}

/// One octanary mask entry g1 * g2: g1 uniform on {1, -1, -i, i}; g2 is
/// sqrt(2)/2 with probability 4/5 and sqrt(3) with probability 1/5.
inline cplx sample_octanary_entry(Rng& rng) {
  static constexpr cplx kUnits[4] = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, -1.0}, {0.0, 1.0}};
  const cplx g1 = kUnits[rng.below(4)];
  const double g2 = rng.uniform() < 0.8 ? std::sqrt(2.0) / 2.0 : std::sqrt(3.0);
  return g1 * g2;
}

/// L octanary masks over a rows x cols grid (cols = 1 for 1-D signals).
inline MeasurementOperator sample_octanary_masks(std::size_t grid_rows, std::size_t grid_cols, std::size_t L,
                                                 std::uint64_t seed) {
  if (grid_rows == 0 || grid_cols == 0 || L == 0)
    throw std::invalid_argument("sample_octanary_masks: n and L must be >= 1");
  Rng rng(seed);
  const std::size_t n = grid_rows * grid_cols;
  std::vector<CVector> masks(L, CVector(static_cast<Eigen::Index>(n)));
  for (auto& d : masks)
    for (auto& e : d) e = sample_octanary_entry(rng);
  auto op = MeasurementOperator::coded_diffraction(std::move(masks), grid_rows, grid_cols);
  op.seed_ = seed;
  return op;
}

inline MeasurementOperator sample_octanary_masks(std::size_t n, std::size_t L, std::uint64_t seed) {
  return sample_octanary_masks(n, 1, L, seed);
}

inline MeasurementOperator MeasurementOperator::from_descriptor(const nlohmann::json& j) {
  if (!j.contains("seed") || j["seed"].is_null())
    throw std::invalid_argument("operator descriptor has no seed; explicit operators are not regenerable");
  const auto kind = j.at("kind").get<std::string>();
  const auto seed = j.at("seed").get<std::uint64_t>();
  if (kind == "gaussian-dense")
    return sample_gaussian(j.at("m").get<std::size_t>(), j.at("n").get<std::size_t>(),
                           field_from_string(j.at("field").get<std::string>()), seed);
  if (kind == "coded-diffraction") {
    std::size_t r = j.at("n").get<std::size_t>(), c = 1;
    if (j.contains("shape")) {
      r = j["shape"].at(0).get<std::size_t>();
      c = j["shape"].at(1).get<std::size_t>();
    }
    return sample_octanary_masks(r, c, j.at("L").get<std::size_t>(), seed);
  }
  throw std::invalid_argument("unknown operator kind '" + kind + "'");
}

inline CVector apply(const MeasurementOperator& op, const Signal& z) { return op.apply(z.values()); }

inline Signal adjoint(const MeasurementOperator& op, const CVector& v) {
  CVector out = op.adjoint(v);
  Field f = Field::complex;
  if (op.field() == Field::real && v.imag().cwiseAbs().maxCoeff() == 0.0) {
    out = out.real().cast<cplx>();
    f = Field::real;
  }
  return Signal(std::move(out), f);
}

/// b_j = |(A x)_j|.
inline PhaselessData magnitudes(const MeasurementOperator& op, const Signal& x) {
  return PhaselessData{apply(op, x).cwiseAbs(), std::nullopt};
}

/// b + w with w_j ~ N(0, sigma^2); negative results are kept.
inline PhaselessData add_noise(const PhaselessData& data, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_noise: sigma must be >= 0");
  PhaselessData out = data;
  out.noise_sigma = sigma;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (auto& v : out.b) v += rng.normal(sigma);
  return out;
}

}  // namespace paf
