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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "paf/signal.hpp"

namespace paf {

namespace detail {

// FFTW's planner is not thread-safe; execution with new-array execute is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

}  // namespace detail

/// Unitary DFT on a rows x cols grid stored row-major (cols = 1 is a 1-D
/// transform of length rows). Forward uses exp(-2 pi i k j / N) and both
/// directions carry the 1/sqrt(N) factor, so the transform preserves norms.
class UnitaryDft {
 public:
  UnitaryDft(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("UnitaryDft: empty shape");
    plans_ = std::make_shared<Plans>(rows, cols);
  }

  [[nodiscard]] std::size_t size() const noexcept { return rows_ * cols_; }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  void forward(const cplx* in, cplx* out) const { run(plans_->fwd, in, out); }
  void inverse(const cplx* in, cplx* out) const { run(plans_->inv, in, out); }

 private:
  struct Plans {
    Plans(std::size_t r, std::size_t c) {
      detail::FftwBuffer a(r * c), b(r * c);
      std::lock_guard lock(detail::fftw_planner_mutex());
      const int ir = static_cast<int>(r), ic = static_cast<int>(c);
      if (c == 1) {
        fwd = fftw_plan_dft_1d(ir, a.ptr, b.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_1d(ir, a.ptr, b.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
      } else {
        fwd = fftw_plan_dft_2d(ir, ic, a.ptr, b.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_2d(ir, ic, a.ptr, b.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
      }
      if (fwd == nullptr || inv == nullptr) throw std::runtime_error("UnitaryDft: FFTW planning failed");
    }
    ~Plans() {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(fwd);
      fftw_destroy_plan(inv);
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
  };

  void run(fftw_plan plan, const cplx* in, cplx* out) const {
    const std::size_t n = size();
    // Plans were made on aligned scratch; route through aligned buffers so
    // new-array execution sees the same alignment.
    detail::FftwBuffer a(n), b(n);
    auto* ac = reinterpret_cast<cplx*>(a.ptr);
    std::copy(in, in + n, ac);
    fftw_execute_dft(plan, a.ptr, b.ptr);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const auto* bc = reinterpret_cast<const cplx*>(b.ptr);
    for (std::size_t i = 0; i < n; ++i) out[i] = bc[i] * scale;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace paf
