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

#ifndef JOPEQ_FFT_HPP_
#define JOPEQ_FFT_HPP_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace jopeq {

/// Real-to-complex FFT on a 1-D or row-major 2-D array, backed by FFTW.
/// Owns its buffers; not thread-safe to construct concurrently.
class RealFft {
 public:
  explicit RealFft(std::vector<int> shape);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  const std::vector<int>& shape() const { return shape_; }
  std::span<double> real();
  // Half spectrum: last axis has shape.back()/2 + 1 entries.
  std::span<std::complex<double>> spectrum();

  void forward();
  // Inverse transform normalised so inverse(forward(x)) == x. Clobbers the
  // spectrum.
  void inverse();

 private:
  struct Impl;
  std::vector<int> shape_;
  std::unique_ptr<Impl> impl_;
};

// Smallest 2^a 3^b 5^c >= n.
std::size_t next_fast_fft_size(std::size_t n);

}  // namespace jopeq

#endif  // JOPEQ_FFT_HPP_
