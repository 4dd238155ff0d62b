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

#include "jopeq/lattice.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "jopeq/errors.hpp"

namespace jopeq {
namespace {

constexpr double kRadiusTol = 1e-12;
constexpr int kSearchWindow = 2;
constexpr double kCfTol = 1e-12;
constexpr int kMaxCfRefinements = 6;

double norm2(const LatticeVector& v, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += v[i] * v[i];
  return s;
}

LatticeVector mul(const Generator& g, const IntegerVector& l, int dim) {
  LatticeVector out{};
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) out[r] += g[r][c] * static_cast<double>(l[c]);
  }
  return out;
}

double determinant(const Generator& g, int dim) {
  if (dim == 1) return g[0][0];
  return g[0][0] * g[1][1] - g[0][1] * g[1][0];
}

// Smallest singular value of G (closed form for 2x2).
double min_singular_value(const Generator& g, int dim) {
  if (dim == 1) return std::abs(g[0][0]);
  const double a = g[0][0], b = g[0][1], c = g[1][0], d = g[1][1];
  const double s1 = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  const double disc = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det));
  return std::sqrt(std::max(0.0, 0.5 * (s1 - disc)));
}

std::int64_t enumeration_bound(const Generator& g, int dim, double radius) {
  const double smin = min_singular_value(g, dim);
  return static_cast<std::int64_t>(std::floor(radius * (1.0 + kRadiusTol) / smin)) + 1;
}

bool lex_less(const IntegerVector& a, const IntegerVector& b, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Sutherland-Hodgman clip of a convex polygon by {x : x.n <= c}.
std::vector<LatticeVector> clip(const std::vector<LatticeVector>& poly,
                                const LatticeVector& n, double c) {
  std::vector<LatticeVector> out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const LatticeVector& p = poly[i];
    const LatticeVector& q = poly[(i + 1) % m];
    const double fp = p[0] * n[0] + p[1] * n[1] - c;
    const double fq = q[0] * n[0] + q[1] * n[1] - c;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double s = fp / (fp - fq);
      out.push_back({p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])});
    }
  }
  return out;
}

double triangle_cos_integral(const LatticeVector& a, const LatticeVector& b,
                             const LatticeVector& c, const LatticeVector& t) {
  using boost::math::quadrature::gauss;
  const double jac = std::abs((b[0] - a[0]) * (c[1] - b[1]) -
                              (b[1] - a[1]) * (c[0] - b[0]));
  // Duffy map of the unit square onto the triangle.
  auto outer = [&](double u) {
    auto inner = [&](double v) {
      const double x = a[0] + u * (b[0] - a[0]) + u * v * (c[0] - b[0]);
      const double y = a[1] + u * (b[1] - a[1]) + u * v * (c[1] - b[1]);
      return std::cos(t[0] * x + t[1] * y);
    };
    return u * gauss<double, 10>::integrate(inner, 0.0, 1.0);
  };
  return jac * gauss<double, 10>::integrate(outer, 0.0, 1.0);
}

double refined_triangle(const LatticeVector& a, const LatticeVector& b,
                        const LatticeVector& c, const LatticeVector& t,
                        int level) {
  if (level == 0) return triangle_cos_integral(a, b, c, t);
  const LatticeVector ab{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
  const LatticeVector bc{0.5 * (b[0] + c[0]), 0.5 * (b[1] + c[1])};
  const LatticeVector ca{0.5 * (c[0] + a[0]), 0.5 * (c[1] + a[1])};
  return refined_triangle(a, ab, ca, t, level - 1) +
         refined_triangle(ab, b, bc, t, level - 1) +
         refined_triangle(ca, bc, c, t, level - 1) +
         refined_triangle(ab, bc, ca, t, level - 1);
}

double polygon_cos_integral(const std::vector<LatticeVector>& poly,
                            const LatticeVector& t, int level) {
  const LatticeVector origin{0.0, 0.0};
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    s += refined_triangle(origin, poly[i], poly[(i + 1) % poly.size()], t, level);
  }
  return s;
}

Generator unit_basis(LatticeFamily family) {
  Generator g{};
  switch (family) {
    case LatticeFamily::kSquare:
      g[0] = {1.0, 0.0};
      g[1] = {0.0, 1.0};
      break;
    case LatticeFamily::kHexagonal:
      g[0] = {1.0, 0.5};
      g[1] = {0.0, std::sqrt(3.0) / 2.0};
      break;
    case LatticeFamily::kScalar:
      throw ConfigError("scalar family has no two-dimensional basis");
  }
  return g;
}

Generator scaled(const Generator& g, double a) {
  Generator out = g;
  for (auto& row : out) {
    for (auto& v : row) v *= a;
  }
  return out;
}

}  // namespace

std::string to_string(LatticeFamily family) {
  switch (family) {
    case LatticeFamily::kScalar:
      return "scalar";
    case LatticeFamily::kSquare:
      return "square";
    case LatticeFamily::kHexagonal:
      return "hexagonal";
  }
  return "unknown";
}

LatticeFamily lattice_family_from_string(const std::string& name) {
  if (name == "scalar") return LatticeFamily::kScalar;
  if (name == "square") return LatticeFamily::kSquare;
  if (name == "hexagonal" || name == "hex") return LatticeFamily::kHexagonal;
  throw ConfigError("unknown lattice family: " + name);
}

std::map<std::string, std::string> LatticeSpec::to_record() const {
  std::ostringstream gamma;
  gamma.precision(17);
  gamma << support_radius;
  return {{"dimension", std::to_string(dimension)},
          {"family", to_string(family)},
          {"gamma", gamma.str()},
          {"rate", std::to_string(rate_bits)}};
}

LatticeSpec LatticeSpec::from_record(
    const std::map<std::string, std::string>& kv) {
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(std::string("lattice record missing ") + key);
    return it->second;
  };
  LatticeSpec spec;
  try {
    spec.dimension = std::stoi(get("dimension"));
    spec.family = lattice_family_from_string(get("family"));
    spec.support_radius = std::stod(get("gamma"));
    spec.rate_bits = std::stoi(get("rate"));
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(std::string("malformed lattice record: ") + e.what());
  }
  return spec;
}

std::size_t count_points_within(int dimension, const Generator& generator,
                                double radius) {
  const std::int64_t b = enumeration_bound(generator, dimension, radius);
  const double r2 = radius * radius * (1.0 + kRadiusTol);
  std::size_t n = 0;
  if (dimension == 1) {
    for (std::int64_t i = -b; i <= b; ++i) {
      const double p = generator[0][0] * static_cast<double>(i);
      if (p * p <= r2) ++n;
    }
    return n;
  }
  for (std::int64_t i = -b; i <= b; ++i) {
    for (std::int64_t j = -b; j <= b; ++j) {
      if (norm2(mul(generator, {i, j}, 2), 2) <= r2) ++n;
    }
  }
  return n;
}

Lattice Lattice::scalar_uniform(double gamma, int rate_bits) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("support radius must be positive and finite");
  }
  if (rate_bits < 1 || rate_bits > 24) {
    throw ConfigError("rate must be an integer in [1, 24]");
  }
  Lattice lat;
  lat.dim_ = 1;
  lat.family_ = LatticeFamily::kScalar;
  lat.nominal_rate_ = rate_bits;
  lat.gamma_ = gamma;
  lat.spacing_ = 2.0 * gamma / std::ldexp(1.0, rate_bits);
  lat.g_[0][0] = lat.spacing_;
  lat.g_inv_[0][0] = 1.0 / lat.spacing_;
  lat.build_codebook();
  lat.build_cell();
  return lat;
}

Lattice Lattice::from_generator(int dimension, const Generator& generator,
                                double support_radius) {
  if (dimension < 1 || dimension > kMaxLatticeDim) {
    throw ConfigError("lattice dimension must be 1 or 2");
  }
  if (!(support_radius > 0.0) || !std::isfinite(support_radius)) {
    throw ConfigError("support radius must be positive and finite");
  }
  const double det = determinant(generator, dimension);
  if (!std::isfinite(det) || std::abs(det) < 1e-300) {
    throw ConfigError("singular lattice generator");
  }
  Lattice lat;
  lat.dim_ = dimension;
  lat.family_ = dimension == 1 ? LatticeFamily::kScalar : LatticeFamily::kSquare;
  lat.gamma_ = support_radius;
  for (int r = 0; r < dimension; ++r) {
    for (int c = 0; c < dimension; ++c) lat.g_[r][c] = generator[r][c];
  }
  if (dimension == 1) {
    lat.g_inv_[0][0] = 1.0 / det;
    lat.spacing_ = std::abs(det);
  } else {
    lat.g_inv_[0] = {generator[1][1] / det, -generator[0][1] / det};
    lat.g_inv_[1] = {-generator[1][0] / det, generator[0][0] / det};
    lat.spacing_ = std::sqrt(std::abs(det));
  }
  lat.build_codebook();
  lat.nominal_rate_ = static_cast<int>(std::ceil(lat.rate() - 1e-12));
  lat.build_cell();
  return lat;
}

Lattice Lattice::from_spec(const LatticeSpec& spec) {
  if (spec.dimension == 1) {
    if (spec.family != LatticeFamily::kScalar) {
      throw ConfigError("one-dimensional lattices must use the scalar family");
    }
    return scalar_uniform(spec.support_radius, spec.rate_bits);
  }
  if (spec.dimension != 2) throw ConfigError("lattice dimension must be 1 or 2");
  if (spec.rate_bits < 1 || spec.rate_bits > 12) {
    throw ConfigError("two-dimensional rate must be an integer in [1, 12]");
  }
  if (!(spec.support_radius > 0.0) || !std::isfinite(spec.support_radius)) {
    throw ConfigError("support radius must be positive and finite");
  }
  const Generator basis = unit_basis(spec.family);
  const double cap = std::ldexp(1.0, 2 * spec.rate_bits);
  const double gamma = spec.support_radius;
  auto fits = [&](double a) {
    return static_cast<double>(count_points_within(2, scaled(basis, a), gamma)) <= cap;
  };
  // Point count is non-increasing in the scale.
  double hi = 2.0 * gamma;
  double lo = gamma / std::sqrt(cap);
  while (fits(lo)) lo *= 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? hi : lo) = mid;
  }
  Lattice lat = from_generator(2, scaled(basis, hi), gamma);
  lat.family_ = spec.family;
  lat.nominal_rate_ = spec.rate_bits;
  lat.spacing_ = hi;
  return lat;
}

LatticeSpec Lattice::spec() const {
  return LatticeSpec{dim_, family_, gamma_, nominal_rate_};
}

void Lattice::build_codebook() {
  const std::int64_t b = enumeration_bound(g_, dim_, gamma_);
  const double r2 = gamma_ * gamma_ * (1.0 + kRadiusTol);
  codebook_.clear();
  coords_.clear();
  for (int i = 0; i < kMaxLatticeDim; ++i) {
    box_min_[i] = i < dim_ ? -b : 0;
    box_extent_[i] = i < dim_ ? 2 * b + 1 : 1;
  }
  lookup_.assign(static_cast<std::size_t>(box_extent_[0] * box_extent_[1]), -1);
  const std::int64_t jb = dim_ == 2 ? b : 0;
  for (std::int64_t i = -b; i <= b; ++i) {
    for (std::int64_t j = -jb; j <= jb; ++j) {
      const IntegerVector l{i, j};
      const LatticeVector p = mul(g_, l, dim_);
      if (norm2(p, dim_) > r2) continue;
      const auto slot = (i - box_min_[0]) * box_extent_[1] + (j - box_min_[1]);
      lookup_[static_cast<std::size_t>(slot)] = static_cast<std::int32_t>(codebook_.size());
      if (i == 0 && j == 0) zero_index_ = static_cast<std::uint32_t>(codebook_.size());
      codebook_.push_back(p);
      coords_.push_back(l);
    }
  }
  if (codebook_.empty()) throw ConfigError("empty codebook");
}

void Lattice::build_cell() {
  if (dim_ == 1) {
    const double d = std::abs(g_[0][0]);
    cell_ = {{-0.5 * d, 0.0}, {0.5 * d, 0.0}};
    second_moment_ = d * d / 12.0;
    cf_zero_radius_ = 2.0 * std::numbers::pi / d;
    return;
  }
  double extent = 0.0;
  for (int c = 0; c < 2; ++c) extent += std::hypot(g_[0][c], g_[1][c]);
  std::vector<LatticeVector> poly = {
      {-extent, -extent}, {extent, -extent}, {extent, extent}, {-extent, extent}};
  for (std::int64_t i = -kSearchWindow; i <= kSearchWindow; ++i) {
    for (std::int64_t j = -kSearchWindow; j <= kSearchWindow; ++j) {
      if (i == 0 && j == 0) continue;
      const LatticeVector v = mul(g_, {i, j}, 2);
      poly = clip(poly, v, 0.5 * norm2(v, 2));
    }
  }
  // Drop near-duplicate vertices left by clipping through existing corners.
  std::vector<LatticeVector> clean;
  const double eps = 1e-12 * extent;
  for (const auto& p : poly) {
    if (clean.empty() || std::hypot(p[0] - clean.back()[0], p[1] - clean.back()[1]) > eps) {
      clean.push_back(p);
    }
  }
  while (clean.size() > 1 &&
         std::hypot(clean.front()[0] - clean.back()[0], clean.front()[1] - clean.back()[1]) <= eps) {
    clean.pop_back();
  }
  cell_ = clean;

  double area2 = 0.0, ixx = 0.0, iyy = 0.0;
  for (std::size_t k = 0; k < cell_.size(); ++k) {
    const auto& p = cell_[k];
    const auto& q = cell_[(k + 1) % cell_.size()];
    const double cr = p[0] * q[1] - q[0] * p[1];
    area2 += cr;
    ixx += cr * (p[0] * p[0] + p[0] * q[0] + q[0] * q[0]);
    iyy += cr * (p[1] * p[1] + p[1] * q[1] + q[1] * q[1]);
  }
  const double area = 0.5 * area2;
  second_moment_ = (ixx + iyy) / 12.0 / (2.0 * area);

  // First zero of the cell CF: scan rays, bisect the first sign change.
  constexpr int kDirections = 36;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kDirections; ++k) {
    const double th = std::numbers::pi * k / kDirections;
    const LatticeVector u{std::cos(th), std::sin(th)};
    double width = 0.0;
    for (const auto& p : cell_) width = std::max(width, 2.0 * (p[0] * u[0] + p[1] * u[1]));
    const double h = 2.0 * std::numbers::pi / width / 32.0;
    double prev_r = 0.0;
    for (int s = 1; s <= 256; ++s) {
      const double r = h * s;
      if (r >= best) break;
      if (cell_cf(*this, {r * u[0], r * u[1]}) <= 0.0) {
        double lo = prev_r, hi = r;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          (cell_cf(*this, {mid * u[0], mid * u[1]}) > 0.0 ? lo : hi) = mid;
        }
        best = std::min(best, 0.5 * (lo + hi));
        break;
      }
      prev_r = r;
    }
  }
  if (!std::isfinite(best)) throw NumericError("cell CF has no zero on the scanned rays");
  cf_zero_radius_ = best;
}

const LatticeVector& Lattice::codeword(std::uint32_t index) const {
  if (index >= codebook_.size()) throw CorruptPayload("codebook index out of range");
  return codebook_[index];
}

double Lattice::rate() const {
  return std::log2(static_cast<double>(codebook_.size())) / dim_;
}

int Lattice::index_bits() const {
  int bits = 0;
  while ((std::size_t{1} << bits) < codebook_.size()) ++bits;
  return bits;
}

double Lattice::cell_volume() const { return std::abs(determinant(g_, dim_)); }

LatticeVector Lattice::apply(const IntegerVector& l) const { return mul(g_, l, dim_); }

std::int64_t Lattice::index_of(const IntegerVector& l) const {
  std::int64_t slot = 0;
  for (int i = 0; i < kMaxLatticeDim; ++i) {
    const std::int64_t v = (i < dim_ ? l[i] : 0) - box_min_[i];
    if (v < 0 || v >= box_extent_[i]) return -1;
    slot = slot * box_extent_[i] + v;
  }
  return lookup_[static_cast<std::size_t>(slot)];
}

LatticePoint Lattice::nearest_point(const LatticeVector& x) const {
  LatticePoint out;
  if (dim_ == 1) {
    const double k = std::floor(x[0] * g_inv_[0][0] + 0.5);
    out.coords[0] = static_cast<std::int64_t>(k);
    out.point[0] = g_[0][0] * k;
    return out;
  }
  // Babai rounding followed by exhaustive search in a small window.
  IntegerVector base{};
  for (int r = 0; r < 2; ++r) {
    base[r] = static_cast<std::int64_t>(
        std::nearbyint(g_inv_[r][0] * x[0] + g_inv_[r][1] * x[1]));
  }
  double best = std::numeric_limits<double>::infinity();
  const double tol = 1e-12 * (norm2(x, 2) + spacing_ * spacing_);
  for (std::int64_t i = -kSearchWindow; i <= kSearchWindow; ++i) {
    for (std::int64_t j = -kSearchWindow; j <= kSearchWindow; ++j) {
      const IntegerVector l{base[0] + i, base[1] + j};
      const LatticeVector p = mul(g_, l, 2);
      const double d = norm2({x[0] - p[0], x[1] - p[1]}, 2);
      if (d < best - tol || (d <= best + tol && lex_less(l, out.coords, 2))) {
        best = std::min(best, d);
        out.coords = l;
        out.point = p;
      }
    }
  }
  return out;
}

ClippedQuantization Lattice::quantize_clipped(const LatticeVector& x) const {
  ClippedQuantization q;
  if (dim_ == 1) {
    const std::int64_t kmax = static_cast<std::int64_t>(codebook_.size() / 2);
    std::int64_t k = static_cast<std::int64_t>(std::floor(x[0] * g_inv_[0][0] + 0.5));
    if (k > kmax || k < -kmax) {
      q.overloaded = true;
      k = std::clamp(k, -kmax, kmax);
    }
    q.index = static_cast<std::uint32_t>(k + kmax);
    q.point = codebook_[q.index];
    return q;
  }
  const LatticePoint p = nearest_point(x);
  const std::int64_t idx = index_of(p.coords);
  if (idx >= 0) {
    q.index = static_cast<std::uint32_t>(idx);
    q.point = p.point;
    return q;
  }
  q.overloaded = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < codebook_.size(); ++i) {
    const auto& c = codebook_[i];
    const double d = norm2({x[0] - c[0], x[1] - c[1]}, 2);
    if (d < best) {
      best = d;
      q.index = static_cast<std::uint32_t>(i);
    }
  }
  q.point = codebook_[q.index];
  return q;
}

CellSample sample_cell_uniform(const Lattice& lattice, CounterStream& stream) {
  const int dim = lattice.dimension();
  const Generator& g = lattice.generator();
  double u[kMaxLatticeDim] = {0.0, 0.0};
  for (int i = 0; i < dim; ++i) u[i] = stream.uniform();
  LatticeVector x{};
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) x[r] += g[r][c] * u[c];
  }
  const LatticePoint p = lattice.nearest_point(x);
  CellSample s;
  for (int i = 0; i < dim; ++i) s.e[i] = x[i] - p.point[i];
  return s;
}

double cell_cf(const Lattice& lattice, const LatticeVector& t) {
  if (lattice.dimension() == 1) {
    const double z = 0.5 * t[0] * lattice.spacing();
    if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
    return std::sin(z) / z;
  }
  if (t[0] == 0.0 && t[1] == 0.0) return 1.0;
  const auto& poly = lattice.cell_vertices();
  const double area = lattice.cell_volume();
  double prev = polygon_cos_integral(poly, t, 0);
  for (int level = 1; level <= kMaxCfRefinements; ++level) {
    const double cur = polygon_cos_integral(poly, t, level);
    if (std::abs(cur - prev) <= kCfTol * area) return cur / area;
    prev = cur;
  }
  std::ostringstream msg;
  msg << "cell CF quadrature did not converge at t=(" << t[0] << ", " << t[1]
      << "), last change " << std::abs(prev) / area;
  throw NumericError(msg.str());
}

}  // namespace jopeq
