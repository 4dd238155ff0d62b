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

#include "jopeq/privacy.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "jopeq/errors.hpp"

namespace jopeq {
namespace {

constexpr double kSolveLower = 1e-6;
constexpr double kSolveUpper = 1e6;

double exponent_value(double nu, int d, TExponent e) {
  return e == TExponent::kAsPrinted ? (nu + d) * (nu + d) : 0.5 * (nu + d);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(MechanismKind kind) {
  return kind == MechanismKind::kLaplace ? "laplace" : "t";
}

MechanismKind mechanism_kind_from_string(const std::string& name) {
  if (name == "laplace") return MechanismKind::kLaplace;
  if (name == "t" || name == "multivariate_t") return MechanismKind::kMultivariateT;
  throw ConfigError("unknown mechanism: " + name);
}

MechanismSpec MechanismSpec::laplace(double epsilon, int dimension) {
  MechanismSpec s;
  s.kind = MechanismKind::kLaplace;
  s.epsilon = epsilon;
  s.dimension = dimension;
  s.validate();
  return s;
}

MechanismSpec MechanismSpec::multivariate_t(double epsilon, int dimension,
                                            double nu, TExponent exponent,
                                            double sensitivity) {
  MechanismSpec s;
  s.kind = MechanismKind::kMultivariateT;
  s.epsilon = epsilon;
  s.dimension = dimension;
  s.nu = nu;
  s.exponent = exponent;
  s.sensitivity = sensitivity;
  s.scale_sq = solve_t_params(epsilon, dimension, sensitivity, nu, exponent);
  s.validate();
  return s;
}

double MechanismSpec::variance() const {
  if (kind == MechanismKind::kLaplace) {
    const double b = laplace_scale();
    return 2.0 * b * b * dimension;
  }
  return nu * scale_sq * dimension / (nu - 2.0);
}

void MechanismSpec::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("privacy budget must be positive");
  }
  if (dimension < 1 || dimension > kMaxLatticeDim) {
    throw ConfigError("mechanism dimension must be 1 or 2");
  }
  if (kind == MechanismKind::kMultivariateT) {
    if (!(nu > 2.0)) throw ConfigError("t mechanism needs nu > 2");
    if (!(scale_sq > 0.0)) throw ConfigError("t mechanism needs a positive scale");
  }
}

std::map<std::string, std::string> MechanismSpec::to_record() const {
  std::map<std::string, std::string> kv{{"kind", to_string(kind)},
                                        {"epsilon", format_double(epsilon)},
                                        {"dimension", std::to_string(dimension)}};
  if (kind == MechanismKind::kMultivariateT) {
    kv["nu"] = format_double(nu);
    kv["scale_sq"] = format_double(scale_sq);
    kv["sensitivity"] = format_double(sensitivity);
    kv["exponent"] = exponent == TExponent::kAsPrinted ? "as_printed" : "half";
  }
  return kv;
}

MechanismSpec MechanismSpec::from_record(
    const std::map<std::string, std::string>& kv) {
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(std::string("mechanism record missing ") + key);
    return it->second;
  };
  MechanismSpec s;
  try {
    s.kind = mechanism_kind_from_string(get("kind"));
    s.epsilon = std::stod(get("epsilon"));
    s.dimension = std::stoi(get("dimension"));
    if (s.kind == MechanismKind::kMultivariateT) {
      s.nu = std::stod(get("nu"));
      s.scale_sq = std::stod(get("scale_sq"));
      s.sensitivity = std::stod(get("sensitivity"));
      const std::string& e = get("exponent");
      if (e == "as_printed") {
        s.exponent = TExponent::kAsPrinted;
      } else if (e == "half") {
        s.exponent = TExponent::kHalf;
      } else {
        throw ConfigError("unknown exponent: " + e);
      }
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(std::string("malformed mechanism record: ") + e.what());
  }
  s.validate();
  return s;
}

double t_mech_epsilon(double nu, double whitened_delta, int d, TExponent exponent) {
  const double delta = whitened_delta;
  const double c = 0.5 * (delta + std::sqrt(delta * delta + 4.0 * nu));
  // (nu + c^2) / (nu + (c - delta)^2) = 1 + delta (2c - delta) / (nu + (c - delta)^2)
  const double log_ratio = std::log1p(delta * (2.0 * c - delta) / (nu + (c - delta) * (c - delta)));
  return exponent_value(nu, d, exponent) * log_ratio;
}

double whitened_sensitivity(const Eigen::MatrixXd& sigma, double delta) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) throw ConfigError("Sigma must be positive definite");
  return delta / std::sqrt(lmin);
}

double solve_t_params(double epsilon, int d, double delta, double nu,
                      TExponent exponent) {
  if (!(epsilon > 0.0)) throw ConfigError("privacy budget must be positive");
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  // Work in log s: the budget decreases monotonically in s.
  auto f = [&](double log_s) {
    return t_mech_epsilon(nu, delta / std::exp(log_s), d, exponent) - epsilon;
  };
  const double a = std::log(kSolveLower), b = std::log(kSolveUpper);
  const double fa = f(a), fb = f(b);
  if (!(fa > 0.0 && fb < 0.0)) {
    std::ostringstream msg;
    msg << "no scale in [1e-6, 1e6] reaches epsilon=" << epsilon
        << " (budget at bracket ends " << fa + epsilon << ", " << fb + epsilon << ")";
    throw InfeasibleParameters(msg.str());
  }
  std::uintmax_t max_iter = 200;
  auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::max(1.0, std::abs(x)); };
  const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
  const double s = std::exp(0.5 * (r.first + r.second));
  const double achieved = t_mech_epsilon(nu, delta / s, d, exponent);
  if (std::abs(achieved - epsilon) > 1e-9 * epsilon) {
    throw NumericError("t-mechanism scale solve did not reach relative 1e-9");
  }
  return s * s;
}

double laplace_epsilon_for_budget(double sensitivity, double b) {
  if (!(b > 0.0)) throw ConfigError("Laplace scale must be positive");
  return sensitivity / b;
}

double laplace_cf(const LatticeVector& t, double epsilon, int dimension) {
  double p = 1.0;
  for (int l = 0; l < dimension; ++l) {
    const double z = 2.0 * t[l] / epsilon;
    p /= 1.0 + z * z;
  }
  return p;
}

double t_cf(const LatticeVector& t, const MechanismSpec& spec) {
  double tn2 = 0.0;
  for (int l = 0; l < spec.dimension; ++l) tn2 += t[l] * t[l];
  const double x = std::sqrt(spec.nu * spec.scale_sq * tn2);
  if (x < 1e-12) return 1.0;
  const double h = 0.5 * spec.nu;
  // x^h K_h(x) / (2^(h-1) Gamma(h)), evaluated in logs.
  const double k = std::cyl_bessel_k(h, x);
  if (k == 0.0) return 0.0;
  return std::exp(h * std::log(x) + std::log(k) - (h - 1.0) * std::log(2.0) -
                  std::lgamma(h));
}

double mechanism_cf(const LatticeVector& t, const MechanismSpec& spec) {
  return spec.kind == MechanismKind::kLaplace
             ? laplace_cf(t, spec.epsilon, spec.dimension)
             : t_cf(t, spec);
}

double laplace_ppn_cf(const LatticeVector& t, double epsilon, const Lattice& lattice) {
  return laplace_cf(t, epsilon, lattice.dimension()) / cell_cf(lattice, t);
}

double t_ppn_cf(const LatticeVector& t, const MechanismSpec& spec, const Lattice& lattice) {
  return t_cf(t, spec) / cell_cf(lattice, t);
}

bool pq_tradeoff_check(double gamma, double epsilon, int rate_bits) {
  const double ratio = gamma * epsilon / std::ldexp(1.0, rate_bits);
  return ratio >= std::sqrt(24.0) * (1.0 - 1e-12);
}

double laplace_required_ppn_variance(double epsilon, double delta_q) {
  const double b = 2.0 / epsilon;
  return 2.0 * b * b - delta_q * delta_q / 12.0;
}

LatticeVector sample_mechanism(const MechanismSpec& spec, CounterStream& stream) {
  LatticeVector out{};
  if (spec.kind == MechanismKind::kLaplace) {
    const double b = spec.laplace_scale();
    for (int l = 0; l < spec.dimension; ++l) {
      const double u = stream.uniform() - 0.5 + 0x1p-54;
      out[l] = -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    }
    return out;
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(spec.scale_sq));
  std::chi_squared_distribution<double> chi2(spec.nu);
  for (int l = 0; l < spec.dimension; ++l) out[l] = normal(stream);
  const double q = chi2(stream);
  const double w = std::sqrt(spec.nu / q);
  for (int l = 0; l < spec.dimension; ++l) out[l] *= w;
  return out;
}

}  // namespace jopeq
