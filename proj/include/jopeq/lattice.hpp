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

#ifndef JOPEQ_LATTICE_HPP_
#define JOPEQ_LATTICE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "jopeq/random.hpp"

namespace jopeq {

inline constexpr int kMaxLatticeDim = 2;

// Fixed-capacity vector for lattice-dimension quantities; entries beyond the
// lattice dimension are zero.
using LatticeVector = std::array<double, kMaxLatticeDim>;
using IntegerVector = std::array<std::int64_t, kMaxLatticeDim>;
// Row-major L x L generator; columns are basis vectors.
using Generator = std::array<std::array<double, kMaxLatticeDim>, kMaxLatticeDim>;

enum class LatticeFamily { kScalar, kSquare, kHexagonal };

std::string to_string(LatticeFamily family);
LatticeFamily lattice_family_from_string(const std::string& name);

// Serializable description of a lattice quantizer.
struct LatticeSpec {
  int dimension = 1;
  LatticeFamily family = LatticeFamily::kScalar;
  double support_radius = 1.0;
  int rate_bits = 1;

  std::map<std::string, std::string> to_record() const;
  static LatticeSpec from_record(const std::map<std::string, std::string>& kv);
};

struct LatticePoint {
  LatticeVector point{};
  IntegerVector coords{};
};

struct ClippedQuantization {
  LatticeVector point{};
  std::uint32_t index = 0;
  bool overloaded = false;
};

// A sample e with Q(e) = 0, i.e. inside the basic cell.
struct CellSample {
  LatticeVector e{};
};

/// Lattice quantizer of dimension 1 or 2 restricted to a sphere of radius
/// gamma. Immutable after construction.
class Lattice {
 public:
  // L = 1, spacing 2*gamma/2^R, codebook = mid-tread levels in [-gamma, gamma].
  static Lattice scalar_uniform(double gamma, int rate_bits);

  // Builds the lattice described by `spec`. For L = 2 the generator is the
  // family's unit basis scaled to the smallest factor whose codebook holds at
  // most 2^(2R) points.
  static Lattice from_spec(const LatticeSpec& spec);

  // Arbitrary full-rank generator (L <= 2). Throws ConfigError when singular.
  static Lattice from_generator(int dimension, const Generator& generator,
                                double support_radius);

  int dimension() const { return dim_; }
  const Generator& generator() const { return g_; }
  double support_radius() const { return gamma_; }
  LatticeFamily family() const { return family_; }
  int nominal_rate_bits() const { return nominal_rate_; }
  LatticeSpec spec() const;

  // Scalar step Delta_Q (L = 1 only; for L = 2 returns the basis scale).
  double spacing() const { return spacing_; }

  std::span<const LatticeVector> codebook() const { return codebook_; }
  const LatticeVector& codeword(std::uint32_t index) const;
  std::size_t codebook_size() const { return codebook_.size(); }
  // log2(|codebook|) / L.
  double rate() const;
  // Fixed index width ceil(log2 |codebook|).
  int index_bits() const;
  std::uint32_t zero_index() const { return zero_index_; }

  double cell_volume() const;
  // Per-coordinate second moment of the uniform distribution over the cell.
  double cell_second_moment() const { return second_moment_; }
  // Vertices of the basic cell, counter-clockwise (L = 2), or {-D/2, D/2}.
  const std::vector<LatticeVector>& cell_vertices() const { return cell_; }
  // Smallest |t| at which the cell characteristic function vanishes.
  double first_cf_zero_radius() const { return cf_zero_radius_; }

  // Unrestricted nearest lattice point. For L = 1 this is
  // Delta*floor(x/Delta + 1/2); for L = 2 ties go to the lexicographically
  // smallest integer coordinates.
  LatticePoint nearest_point(const LatticeVector& x) const;

  // Nearest codebook point; overloaded iff the unrestricted nearest point is
  // not in the codebook.
  ClippedQuantization quantize_clipped(const LatticeVector& x) const;

  LatticeVector apply(const IntegerVector& l) const;
  // Index of lattice coordinates l in the codebook, or -1.
  std::int64_t index_of(const IntegerVector& l) const;

 private:
  Lattice() = default;
  void build_codebook();
  void build_cell();

  int dim_ = 1;
  LatticeFamily family_ = LatticeFamily::kScalar;
  int nominal_rate_ = 0;
  Generator g_{};
  Generator g_inv_{};
  double gamma_ = 0.0;
  double spacing_ = 0.0;
  std::vector<LatticeVector> codebook_;
  std::vector<IntegerVector> coords_;
  std::uint32_t zero_index_ = 0;
  // Dense lookup from coordinates to codebook index over the bounding box.
  std::int64_t box_min_[kMaxLatticeDim] = {0, 0};
  std::int64_t box_extent_[kMaxLatticeDim] = {1, 1};
  std::vector<std::int32_t> lookup_;
  std::vector<LatticeVector> cell_;
  double second_moment_ = 0.0;
  double cf_zero_radius_ = 0.0;
};

// Uniform sample over the basic cell: u uniform on G[0,1)^L reduced modulo
// the lattice.
CellSample sample_cell_uniform(const Lattice& lattice, CounterStream& stream);

// Characteristic function of the cell-uniform error, integral over the cell of
// cos(t.e)/|P0|. Closed form for L = 1, Gauss-Legendre quadrature for L = 2.
double cell_cf(const Lattice& lattice, const LatticeVector& t);

// Number of lattice points G*l with ||G*l|| <= radius.
std::size_t count_points_within(int dimension, const Generator& generator,
                                double radius);

}  // namespace jopeq

#endif  // JOPEQ_LATTICE_HPP_
