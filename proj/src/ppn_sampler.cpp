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

#include "jopeq/ppn_sampler.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "jopeq/errors.hpp"
#include "jopeq/fft.hpp"

namespace jopeq {

struct PpnSampler::Table {
  MechanismSpec spec;
  int dim = 1;
  bool degenerate = false;
  int n = 0;
  double h = 0.0;
  double half_width = 0.0;
  std::vector<double> mass;
  // 1-D inverse CDF.
  std::vector<double> cdf;
  // 2-D alias table.
  std::vector<double> alias_prob;
  std::vector<std::uint32_t> alias_idx;
  ValidityReport report;
};

namespace {

constexpr double kRatioFloor = 1e-14;

double laplace_cdf(double x, double b) {
  return x < 0.0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
}

// Integral of the tent max(0, h - |y|) from -inf to y.
double tent_antiderivative(double y, double h) {
  if (y <= -h) return 0.0;
  if (y <= 0.0) return 0.5 * (y + h) * (y + h);
  if (y <= h) return h * h - 0.5 * (h - y) * (h - y);
  return h * h;
}

double taper(double r, double r0) {
  if (r <= 0.5 * r0) return 1.0;
  if (r >= 0.9 * r0) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (r - 0.5 * r0) / (0.4 * r0)));
}

bool inside_convex(const std::vector<LatticeVector>& poly, double x, double y) {
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto& p = poly[k];
    const auto& q = poly[(k + 1) % poly.size()];
    if ((q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]) < 0.0) return false;
  }
  return true;
}

// Linear convolution on an N^L grid through a zero-padded P^L FFT.
class Convolver {
 public:
  Convolver(int dim, int n, int p, const std::vector<double>& kernel)
      : dim_(dim), n_(n), p_(p), fft_(dim == 1 ? std::vector<int>{p} : std::vector<int>{p, p}) {
    std::copy(kernel.begin(), kernel.end(), fft_.real().begin());
    fft_.forward();
    kspec_.assign(fft_.spectrum().begin(), fft_.spectrum().end());
  }

  const std::vector<std::complex<double>>& kernel_spectrum() const { return kspec_; }
  RealFft& fft() { return fft_; }
  int padded() const { return p_; }

  void load(const std::vector<double>& in) {
    auto r = fft_.real();
    std::fill(r.begin(), r.end(), 0.0);
    if (dim_ == 1) {
      std::copy(in.begin(), in.end(), r.begin());
    } else {
      for (int i = 0; i < n_; ++i) {
        std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(i) * n_, n_,
                    r.begin() + static_cast<std::ptrdiff_t>(i) * p_);
      }
    }
  }

  void store(std::vector<double>& out) {
    auto r = fft_.real();
    out.resize(static_cast<std::size_t>(dim_ == 1 ? n_ : n_ * n_));
    if (dim_ == 1) {
      std::copy_n(r.begin(), n_, out.begin());
    } else {
      for (int i = 0; i < n_; ++i) {
        std::copy_n(r.begin() + static_cast<std::ptrdiff_t>(i) * p_, n_,
                    out.begin() + static_cast<std::ptrdiff_t>(i) * n_);
      }
    }
  }

  // out = K * in, or the adjoint (correlation) when `adjoint` is set.
  void apply(const std::vector<double>& in, std::vector<double>& out, bool adjoint) {
    load(in);
    fft_.forward();
    auto s = fft_.spectrum();
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] *= adjoint ? std::conj(kspec_[k]) : kspec_[k];
    }
    fft_.inverse();
    store(out);
  }

 private:
  int dim_;
  int n_;
  int p_;
  RealFft fft_;
  std::vector<std::complex<double>> kspec_;
};

void build_alias(const std::vector<double>& w, std::vector<double>& prob,
                 std::vector<std::uint32_t>& alias) {
  const std::size_t n = w.size();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  prob.assign(n, 0.0);
  alias.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = w[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    prob[s] = scaled[s];
    alias[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) prob[i] = 1.0, alias[i] = i;
  for (auto i : small) prob[i] = 1.0, alias[i] = i;
}

std::vector<double> target_masses(const MechanismSpec& spec, int dim, int n,
                                  double w, double h) {
  std::vector<double> axis(static_cast<std::size_t>(n));
  auto centre = [&](int j) { return -w + (j + 0.5) * h; };
  if (spec.kind == MechanismKind::kLaplace) {
    const double b = spec.laplace_scale();
    for (int j = 0; j < n; ++j) {
      axis[j] = laplace_cdf(centre(j) + 0.5 * h, b) - laplace_cdf(centre(j) - 0.5 * h, b);
    }
    if (dim == 1) return axis;
    std::vector<double> t(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(i) * n + j] = axis[i] * axis[j];
    }
    return t;
  }
  const double s = std::sqrt(spec.scale_sq);
  const double nu = spec.nu;
  if (dim == 1) {
    boost::math::students_t_distribution<double> dist(nu);
    for (int j = 0; j < n; ++j) {
      axis[j] = boost::math::cdf(dist, (centre(j) + 0.5 * h) / s) -
                boost::math::cdf(dist, (centre(j) - 0.5 * h) / s);
    }
    return axis;
  }
  // Bivariate t density at bin centres.
  const double logc = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) -
                      std::log(nu * std::numbers::pi * spec.scale_sq);
  std::vector<double> t(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double r2 = centre(i) * centre(i) + centre(j) * centre(j);
      t[static_cast<std::size_t>(i) * n + j] =
          h * h * std::exp(logc - 0.5 * (nu + 2.0) * std::log1p(r2 / (nu * spec.scale_sq)));
    }
  }
  return t;
}

// Distribution of (bin-uniform x) + (cell-uniform e) over bin offsets,
// placed circularly on a P^L array.
std::vector<double> cell_kernel(const Lattice& lat, double h, int p, int& radius) {
  const int dim = lat.dimension();
  std::vector<double> k(static_cast<std::size_t>(dim == 1 ? p : p * p), 0.0);
  auto wrap = [p](int m) { return ((m % p) + p) % p; };
  if (dim == 1) {
    const double delta = lat.spacing();
    radius = static_cast<int>(std::ceil(0.5 * delta / h)) + 1;
    for (int m = -radius; m <= radius; ++m) {
      const double v = (tent_antiderivative(0.5 * delta - m * h, h) -
                        tent_antiderivative(-0.5 * delta - m * h, h)) /
                       (h * delta);
      k[wrap(m)] += v;
    }
    return k;
  }
  const auto& poly = lat.cell_vertices();
  double rho = 0.0;
  for (const auto& v : poly) rho = std::max(rho, std::hypot(v[0], v[1]));
  radius = static_cast<int>(std::ceil(rho / h)) + 2;
  const double delta = std::min(h / 8.0, rho / 64.0);
  const int m = static_cast<int>(std::ceil(rho / delta));
  double total = 0.0;
  for (int a = -m; a < m; ++a) {
    const double x = (a + 0.5) * delta;
    for (int b = -m; b < m; ++b) {
      const double y = (b + 0.5) * delta;
      if (!inside_convex(poly, x, y)) continue;
      const double ux = x / h, uy = y / h;
      const int ix = static_cast<int>(std::floor(ux));
      const int iy = static_cast<int>(std::floor(uy));
      const double fx = ux - ix, fy = uy - iy;
      k[static_cast<std::size_t>(wrap(ix)) * p + wrap(iy)] += (1 - fx) * (1 - fy);
      k[static_cast<std::size_t>(wrap(ix + 1)) * p + wrap(iy)] += fx * (1 - fy);
      k[static_cast<std::size_t>(wrap(ix)) * p + wrap(iy + 1)] += (1 - fx) * fy;
      k[static_cast<std::size_t>(wrap(ix + 1)) * p + wrap(iy + 1)] += fx * fy;
      total += 1.0;
    }
  }
  for (auto& v : k) v /= total;
  return k;
}

void normalise(std::vector<double>& v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("PPN density lost all mass");
  for (auto& x : v) x /= s;
}

}  // namespace

std::map<std::string, std::string> ValidityReport::to_record() const {
  auto f = [](double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
  };
  return {{"degenerate", degenerate ? "true" : "false"},
          {"target_variance", f(target_variance)},
          {"cell_variance", f(cell_variance)},
          {"required_variance", f(required_variance)},
          {"achieved_variance", f(achieved_variance)},
          {"min_density_before_clip", f(min_density_before_clip)},
          {"clipped_mass", f(clipped_mass)},
          {"truncated_mass", f(truncated_mass)},
          {"l1_residual", f(l1_residual)},
          {"cdf_residual", f(cdf_residual)},
          {"points_per_axis", std::to_string(points_per_axis)},
          {"step", f(step)},
          {"half_width", f(half_width)},
          {"iterations", std::to_string(iterations)}};
}

std::string ValidityReport::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : to_record()) os << k << " = " << v << "\n";
  return os.str();
}

PpnSampler PpnSampler::build(const MechanismSpec& spec, const Lattice& lattice,
                             const SamplerOptions& options) {
  spec.validate();
  if (spec.dimension != lattice.dimension()) {
    throw ConfigError("mechanism and lattice dimensions differ");
  }
  auto table = std::make_shared<Table>();
  table->spec = spec;
  table->dim = lattice.dimension();
  ValidityReport& rep = table->report;
  rep.target_variance = spec.per_coordinate_variance();
  rep.cell_variance = lattice.cell_second_moment();
  rep.required_variance = rep.target_variance - rep.cell_variance;

  if (rep.required_variance <= 1e-12 * rep.target_variance) {
    if (!options.allow_degenerate) {
      std::ostringstream msg;
      msg << "quantization error alone exceeds the target mechanism: target variance "
          << rep.target_variance << " <= cell second moment " << rep.cell_variance;
      throw MechanismInfeasible(msg.str());
    }
    table->degenerate = true;
    rep.degenerate = true;
    rep.achieved_variance = 0.0;
    rep.l1_residual = std::nan("");
    rep.cdf_residual = std::nan("");
    return PpnSampler(std::move(table));
  }

  const int dim = table->dim;
  const int n = dim == 1 ? options.grid_points_1d : options.grid_points_2d;
  if (n < 16) throw ConfigError("PPN grid needs at least 16 points per axis");
  double rho = 0.0;
  for (const auto& v : lattice.cell_vertices()) rho = std::max(rho, std::hypot(v[0], v[1]));
  const double w = options.support_sigmas * std::sqrt(rep.target_variance) + 2.0 * rho;
  const double h = 2.0 * w / n;
  table->n = n;
  table->h = h;
  table->half_width = w;
  rep.points_per_axis = n;
  rep.step = h;
  rep.half_width = w;

  std::vector<double> target = target_masses(spec, dim, n, w, h);
  const double covered = std::accumulate(target.begin(), target.end(), 0.0);
  rep.truncated_mass = std::max(0.0, 1.0 - covered);
  normalise(target);

  // Kernel radius first at a provisional padding, then at the final size.
  int radius = 0;
  cell_kernel(lattice, h, 2 * n, radius);
  const int p = static_cast<int>(next_fast_fft_size(static_cast<std::size_t>(n + radius + 1)));
  Convolver conv(dim, n, p, cell_kernel(lattice, h, p, radius));

  // Tapered Fourier inversion as the starting point.
  const double r0 = lattice.first_cf_zero_radius();
  conv.load(target);
  conv.fft().forward();
  {
    auto s = conv.fft().spectrum();
    const auto& ks = conv.kernel_spectrum();
    const int last = p / 2 + 1;
    const double dw = 2.0 * std::numbers::pi / (p * h);
    for (std::size_t k = 0; k < s.size(); ++k) {
      double r;
      if (dim == 1) {
        r = dw * static_cast<double>(k);
      } else {
        const int a = static_cast<int>(k) / last;
        const int b = static_cast<int>(k) % last;
        const int sa = a <= p / 2 ? a : a - p;
        r = dw * std::hypot(static_cast<double>(sa), static_cast<double>(b));
      }
      const double wt = taper(r, r0);
      s[k] = (wt > 0.0 && std::abs(ks[k]) > 1e-8) ? s[k] * wt / ks[k] : 0.0;
    }
  }
  conv.fft().inverse();
  std::vector<double> est;
  conv.store(est);
  double pos = 0.0, neg = 0.0, mn = 0.0;
  for (double v : est) {
    (v > 0.0 ? pos : neg) += std::abs(v);
    mn = std::min(mn, v);
  }
  rep.min_density_before_clip = mn / std::pow(h, dim);
  rep.clipped_mass = pos > 0.0 ? neg / pos : 1.0;
  if (pos > 0.0) {
    for (auto& v : est) v = std::max(v, 0.0);
  } else {
    est = target;
  }
  normalise(est);

  // Richardson-Lucy refinement against the truncated kernel.
  std::vector<double> ones(target.size(), 1.0), norm, q, ratio, corr;
  conv.apply(ones, norm, true);
  const double tmax = *std::max_element(target.begin(), target.end());
  const double floor_q = kRatioFloor * tmax;
  for (int it = 0; it < options.refinement_iterations; ++it) {
    conv.apply(est, q, false);
    ratio.resize(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) ratio[j] = target[j] / std::max(q[j], floor_q);
    conv.apply(ratio, corr, true);
    for (std::size_t j = 0; j < est.size(); ++j) {
      const double v = norm[j] > 1e-12 ? est[j] * corr[j] / norm[j] : 0.0;
      est[j] = std::isfinite(v) && v > 0.0 ? v : 0.0;
    }
    normalise(est);
  }
  rep.iterations = options.refinement_iterations;

  conv.apply(est, q, false);
  double l1 = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) l1 += std::abs(q[j] - target[j]);
  rep.l1_residual = l1;
  {
    double fq = 0.0, ft = 0.0, gap = 0.0;
    const int stride = dim == 1 ? 1 : n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < stride; ++j) {
        fq += q[static_cast<std::size_t>(i) * stride + j];
        ft += target[static_cast<std::size_t>(i) * stride + j];
      }
      gap = std::max(gap, std::abs(fq - ft));
    }
    rep.cdf_residual = gap;
  }
  {
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double c = -w + (i + 0.5) * h;
      double row = 0.0;
      if (dim == 1) {
        row = est[i];
      } else {
        for (int j = 0; j < n; ++j) row += est[static_cast<std::size_t>(i) * n + j];
      }
      var += row * c * c;
    }
    if (dim == 2) {
      double var2 = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double c = -w + (j + 0.5) * h;
          var2 += est[static_cast<std::size_t>(i) * n + j] * c * c;
        }
      }
      var = 0.5 * (var + var2);
    }
    rep.achieved_variance = var + h * h / 12.0;
  }

  table->mass = est;
  if (dim == 1) {
    table->cdf.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = 0; j < n; ++j) table->cdf[j + 1] = table->cdf[j] + est[j];
  } else {
    build_alias(est, table->alias_prob, table->alias_idx);
  }
  return PpnSampler(std::move(table));
}

int PpnSampler::dimension() const { return table_->dim; }
bool PpnSampler::degenerate() const { return table_->degenerate; }
const MechanismSpec& PpnSampler::mechanism() const { return table_->spec; }
const ValidityReport& PpnSampler::report() const { return table_->report; }
int PpnSampler::points_per_axis() const { return table_->n; }
double PpnSampler::step() const { return table_->h; }
double PpnSampler::half_width() const { return table_->half_width; }
std::span<const double> PpnSampler::masses() const { return table_->mass; }

LatticeVector PpnSampler::sample(CounterStream& stream) const {
  const Table& t = *table_;
  LatticeVector out{};
  if (t.degenerate) return out;
  if (t.dim == 1) {
    const double u = stream.uniform() * t.cdf.back();
    auto it = std::upper_bound(t.cdf.begin() + 1, t.cdf.end(), u);
    const int j = std::min(static_cast<int>(it - (t.cdf.begin() + 1)), t.n - 1);
    const double m = t.mass[j];
    const double frac = m > 0.0 ? std::clamp((u - t.cdf[j]) / m, 0.0, 1.0) : 0.5;
    out[0] = -t.half_width + (j + frac) * t.h;
    return out;
  }
  const std::size_t cells = t.alias_prob.size();
  const double u = stream.uniform() * static_cast<double>(cells);
  std::size_t k = std::min(static_cast<std::size_t>(u), cells - 1);
  if (stream.uniform() >= t.alias_prob[k]) k = t.alias_idx[k];
  const int i = static_cast<int>(k / static_cast<std::size_t>(t.n));
  const int j = static_cast<int>(k % static_cast<std::size_t>(t.n));
  out[0] = -t.half_width + (i + stream.uniform()) * t.h;
  out[1] = -t.half_width + (j + stream.uniform()) * t.h;
  return out;
}

}  // namespace jopeq
