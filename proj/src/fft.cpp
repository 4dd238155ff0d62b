// Copyright 2026 The JoPEQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "jopeq/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <utility>

#include "jopeq/errors.hpp"

namespace jopeq {

namespace {
// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  std::size_t n_real = 0;
  std::size_t n_complex = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
  }
};

RealFft::RealFft(std::vector<int> shape) : shape_(std::move(shape)), impl_(new Impl) {
  if (shape_.empty() || shape_.size() > 2) throw ConfigError("FFT rank must be 1 or 2");
  impl_->n_real = 1;
  for (int s : shape_) {
    if (s < 2) throw ConfigError("FFT extent must be at least 2");
    impl_->n_real *= static_cast<std::size_t>(s);
  }
  impl_->n_complex = impl_->n_real / static_cast<std::size_t>(shape_.back()) *
                     (static_cast<std::size_t>(shape_.back()) / 2 + 1);
  impl_->real = fftw_alloc_real(impl_->n_real);
  impl_->spec = fftw_alloc_complex(impl_->n_complex);
  if (!impl_->real || !impl_->spec) throw NumericError("FFT buffer allocation failed");
  const int rank = static_cast<int>(shape_.size());
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->fwd = fftw_plan_dft_r2c(rank, shape_.data(), impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r(rank, shape_.data(), impl_->spec, impl_->real, FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->inv) throw NumericError("FFTW planning failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

std::span<double> RealFft::real() { return {impl_->real, impl_->n_real}; }

std::span<std::complex<double>> RealFft::spectrum() {
  return {reinterpret_cast<std::complex<double>*>(impl_->spec), impl_->n_complex};
}

void RealFft::forward() { fftw_execute(impl_->fwd); }

void RealFft::inverse() {
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(impl_->n_real);
  for (std::size_t i = 0; i < impl_->n_real; ++i) impl_->real[i] *= scale;
}

std::size_t next_fast_fft_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best *= 2;
  for (std::size_t p5 = 1; p5 < best; p5 *= 5) {
    for (std::size_t p35 = p5; p35 < best; p35 *= 3) {
      std::size_t v = p35;
      while (v < n) v *= 2;
      if (v < best) best = v;
    }
  }
  return best;
}

}  // namespace jopeq
