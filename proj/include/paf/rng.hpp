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
#include <limits>
#include <random>
#include <string_view>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "paf/signal.hpp"

namespace paf {

// Sampling uses std::mt19937_64 (fully specified by the standard) with the
// Boost.Random distributions, whose algorithms are fixed in source. The pair
// gives bit-identical streams across compilers and standard libraries, which
// std::normal_distribution does not.

/// SplitMix64 finaliser; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a, used to turn role tags into stream keys.
constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double normal(double stddev = 1.0) { return stddev * normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  /// Uniform integer in [0, k).
  std::uint64_t below(std::uint64_t k) {
    // Rejection sampling on the raw engine output keeps this platform-independent.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % k;
    std::uint64_t r;
    do { r = engine_(); } while (r >= limit);
    return r % k;
  }

  /// Gaussian scalar with unit total variance: N(0,1) for the real field,
  /// N(0,1/2) + i N(0,1/2) for the complex field.
  cplx gaussian(Field field) {
    if (field == Field::real) return {normal(), 0.0};
    const double s = std::sqrt(0.5);
    const double re = normal(s);
    const double im = normal(s);
    return {re, im};
  }

  CVector gaussian_vector(std::size_t n, Field field) {
    CVector v(static_cast<Eigen::Index>(n));
    for (auto& e : v) e = gaussian(field);
    return v;
  }

  /// Uniform on the unit sphere of the given field.
  CVector unit_vector(std::size_t n, Field field) {
    CVector v;
    double nrm = 0.0;
    do {
      v = gaussian_vector(n, field);
      nrm = v.norm();
    } while (nrm == 0.0);
    return v / nrm;
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_;
};

}  // namespace paf

namespace paf {

/// Seed for stream `index` of kind `tag` under `master`. For a fixed master
/// and tag the map index -> seed is injective (mix64 is a bijection).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::string_view tag) noexcept {
  return mix64(mix64(master ^ hash_tag(tag)) + index);
}

}  // namespace paf
