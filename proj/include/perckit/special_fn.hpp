#pragma once

// The f_k / g_k family: f_k is the decreasing solution on [0,1] of
//   f^k - f^{k+1} = x^k - x^{k+1},
// and g_k(z) = -log f_k(e^{-z}).

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "perckit/error.hpp"

namespace perckit {

/// A solution of the functional equation carried in three forms, so callers
/// can pick whichever one is accurate in their regime (1 - f near x = 0,
/// log f near x = 1).
struct FkValue {
  double f;
  double one_minus_f;
  double log_f;
};

struct QuadratureResult {
  double value;
  double error_estimate;  // quadrature error plus head/tail model error
  double residual;        // |value - lambda_k|
};

/// pi^2 / (3k(k+1)).
inline double lambda_k(int k) {
  if (k < 1) throw std::domain_error("lambda_k: k must be >= 1");
  return std::numbers::pi * std::numbers::pi / (3.0 * k * (k + 1.0));
}

namespace detail {

// Safeguarded Newton on an increasing function phi with phi(lo) <= 0 <=
// phi(hi). Iterates to machine precision; the caller checks residuals.
template <class Phi, class DPhi>
double solve_increasing(Phi phi, DPhi dphi, double lo, double hi) {
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double v = phi(x);
    if (v == 0.0) return x;
    if (v < 0.0) lo = x; else hi = x;
    const double d = dphi(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - v / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double scale = std::max(std::abs(next), std::numeric_limits<double>::min());
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * scale ||
        hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * scale) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace detail

/// Evaluator of f_k, g_k and the auxiliary families for one fixed k.
/// Immutable after construction; every member is const and thread-safe.
class FkEvaluator {
 public:
  explicit FkEvaluator(int k, double tol = 1e-14) : k_(k), tol_(tol) {
    if (k < 1) throw std::domain_error("FkEvaluator: k must be >= 1");
    if (!(tol > 0.0)) throw std::domain_error("FkEvaluator: tol must be > 0");
    // Taylor coefficients of h_k about the fixed point; c_1 vanishes.
    const double xs = fixed_point();
    coeff_.assign(static_cast<std::size_t>(k) + 2, 0.0);
    for (int m = 2; m <= k + 1; ++m) {
      coeff_[m] = binom(k, m) * std::pow(xs, k - m) * (1.0 - xs) -
                  binom(k, m - 1) * std::pow(xs, k - m + 1);
    }
  }

  int k() const noexcept { return k_; }
  double tol() const noexcept { return tol_; }

  /// The fixed point k/(k+1), where f_k(x) = x and h_k peaks.
  double fixed_point() const noexcept { return k_ / (k_ + 1.0); }

  /// h_k(y) = y^k - y^{k+1}.
  double h(double y) const noexcept { return std::pow(y, k_) * (1.0 - y); }

  FkValue solve(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("f_k: x must lie in [0,1]");
    if (x == 0.0) return {1.0, 0.0, 0.0};
    if (x == 1.0) return {0.0, 1.0, -std::numeric_limits<double>::infinity()};
    const double xs = fixed_point();
    if (x == xs) return {xs, 1.0 - xs, std::log(xs)};
    if (near_fixed_point(x - xs)) {
      const FkValue r = solve_near(x - xs).value;
      check_residual(x, r.f);
      return r;
    }
    FkValue r = x < xs ? solve_upper(std::pow(x, k_) * (1.0 - x))
                       : solve_lower(k_ * std::log(x) + std::log1p(-x));
    check_residual(x, r.f);
    return r;
  }

  double f(double x) const { return solve(x).f; }

  /// g_k(z) = -log f_k(e^{-z}); evaluated without forming e^{-z} near z = 0
  /// so it stays accurate down to the smallest positive doubles.
  double g(double z) const { return -log_f_at(z).log_f; }

  /// f_k(e^{-z}) in all three forms.
  FkValue log_f_at(double z) const {
    if (!(z > 0.0)) throw std::domain_error("g_k: z must be > 0");
    if (std::isinf(z)) return {1.0, 0.0, 0.0};
    const double d = fixed_point() * std::expm1(switch_z() - z);
    if (near_fixed_point(d)) return solve_near(d).value;
    if (z >= switch_z()) {
      // e^{-kz}(1 - e^{-z}), computed in log space to avoid underflow.
      const double log_c = -k_ * z + std::log(-std::expm1(-z));
      return solve_upper(std::exp(log_c));
    }
    return solve_lower(-k_ * z + std::log(-std::expm1(-z)));
  }

  /// f_k'(x) via implicit differentiation of the functional equation.
  double f_derivative(double x) const {
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("f_k': x must lie in [0,1)");
    if (x == 0.0) return k_ == 1 ? -1.0 : 0.0;
    const double d = x - fixed_point();
    if (d == 0.0) return -1.0;
    if (near_fixed_point(d)) {
      const NearSolution n = solve_near(d);
      return n.value.f * n.value.one_minus_f * d / (x * (1.0 - x) * n.e);
    }
    const FkValue v = solve(x);
    const double num = k_ - (k_ + 1.0) * x;
    const double den = k_ - (k_ + 1.0) * v.f;
    // f'/f = (1-f)(k-(k+1)x) / (x(1-x)(k-(k+1)f)), using f^k = x^k(1-x)/(1-f).
    return v.f * v.one_minus_f * num / (x * (1.0 - x) * den);
  }

  /// g_k'(z) = (1-f)(k-(k+1)x) / ((1-x)(k-(k+1)f)) with x = e^{-z}.
  double g_derivative(double z) const {
    if (!(z > 0.0)) throw std::domain_error("g_k': z must be > 0");
    const double one_minus_x = -std::expm1(-z);
    const double d = fixed_point() * std::expm1(switch_z() - z);
    if (d == 0.0) return -1.0;
    if (near_fixed_point(d)) {
      // Both factors of the ratio vanish at the fixed point; use the offsets directly.
      const NearSolution n = solve_near(d);
      return n.value.one_minus_f * d / (one_minus_x * n.e);
    }
    const FkValue v = log_f_at(z);
    const double num = (k_ + 1.0) * one_minus_x - 1.0;
    const double den = z >= switch_z() ? (k_ + 1.0) * v.one_minus_f - 1.0
                                       : k_ - (k_ + 1.0) * v.f;
    return v.one_minus_f * num / (one_minus_x * den);
  }

  /// T_j(y) = (1-y) y^{j-1} / f_k(y)^j for 1 <= j <= k and 0 <= y < 1.
  double T(int j, double y) const {
    check_j(j);
    if (!(y >= 0.0 && y < 1.0)) throw std::domain_error("T_j: y must lie in [0,1)");
    const double fy = f(y);
    return (1.0 - y) * std::pow(y, j - 1) / std::pow(fy, j);
  }

  /// D_j(y) = T_1(y) + ... + T_j(y).
  double D(int j, double y) const {
    check_j(j);
    if (!(y >= 0.0 && y < 1.0)) throw std::domain_error("D_j: y must lie in [0,1)");
    const double fy = f(y);
    double sum = 0.0;
    double term = (1.0 - y) / fy;
    for (int i = 1; i <= j; ++i) {
      sum += term;
      term *= y / fy;
    }
    return sum;
  }

  /// H_k(y_1..y_k) = sum_i (1-y_i) y_{i+1}..y_k f(y_1)..f(y_{i-1})
  ///                 - f(y_1)..f(y_k).
  double H(std::span<const double> y) const {
    if (y.size() != static_cast<std::size_t>(k_)) {
      throw std::invalid_argument("H_k: expected " + std::to_string(k_) + " arguments");
    }
    std::vector<double> fy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) fy[i] = checked_f(y[i]);
    double suffix = 1.0;  // y_{i+1} ... y_k
    std::vector<double> tail(y.size());
    for (std::size_t i = y.size(); i-- > 0;) {
      tail[i] = suffix;
      suffix *= y[i];
    }
    double sum = 0.0;
    double prefix = 1.0;  // f(y_1) ... f(y_{i-1})
    for (std::size_t i = 0; i < y.size(); ++i) {
      sum += (1.0 - y[i]) * tail[i] * prefix;
      prefix *= fy[i];
    }
    return sum - prefix;
  }

  /// The decoupled variant on 2k-1 arguments: the polynomial weights use
  /// y_k..y_{2k-1} while f is applied to y_1..y_{k-1}.
  double H_tilde(std::span<const double> y) const {
    const std::size_t n = 2 * static_cast<std::size_t>(k_) - 1;
    if (y.size() != n) {
      throw std::invalid_argument("H~_k: expected " + std::to_string(n) + " arguments");
    }
    const std::size_t k = static_cast<std::size_t>(k_);
    std::vector<double> fy(k);
    for (std::size_t i = 0; i < k; ++i) fy[i] = checked_f(y[i]);
    for (std::size_t i = k; i < n; ++i) {
      if (!(y[i] >= 0.0 && y[i] <= 1.0)) throw std::domain_error("H~_k: arguments must lie in [0,1]");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      // (1 - y_{k+i}) y_{k+i+1} ... y_{2k-1} f(y_1) ... f(y_i), 1-based.
      double term = 1.0 - y[k + i - 1];
      for (std::size_t j = k + i; j < n; ++j) term *= y[j];
      for (std::size_t j = 0; j < i; ++j) term *= fy[j];
      sum += term;
    }
    double all = 1.0;
    for (double v : fy) all *= v;
    return sum - all;
  }

  /// Integral of g_k over (0, inf): Gauss-Kronrod on [eps, Z] in the
  /// variable u = log z, plus closed-form head and tail pieces from the
  /// z -> 0 and z -> inf asymptotics.
  QuadratureResult integrate_g(double tol = 1e-8) const {
    if (!(tol > 0.0)) throw std::domain_error("integrate_g: tol must be > 0");
    const double eps = 1e-8;
    const double zmax = std::max(50.0 / k_, 30.0);
    auto integrand = [this](double u) {
      const double z = std::exp(u);
      return g(z) * z;
    };
    double quad_err = 0.0;
    const double body = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, std::log(eps), std::log(zmax), 20, 1e-13, &quad_err);
    // g ~ (1/k) log(1/z) - z^{1/k}/k near zero, g ~ e^{-kz} at infinity.
    const double head = (eps / k_) * (std::log(1.0 / eps) + 1.0) -
                        std::pow(eps, 1.0 + 1.0 / k_) / (k_ + 1.0);
    const double head_err = std::pow(eps, 1.0 + 2.0 / k_) + eps * eps;
    const double tail = std::exp(-k_ * zmax) / k_;
    const double value = head + body + tail;
    QuadratureResult r{value, quad_err + head_err + tail, std::abs(value - lambda_k(k_))};
    if (r.error_estimate > tol) {
      throw convergence_error("integrate_g: error estimate " + std::to_string(r.error_estimate) +
                              " exceeds tolerance");
    }
    return r;
  }

 private:
  struct NearSolution {
    FkValue value;
    double e;  // f - x*
  };

  static double binom(int n, int m) {
    if (m < 0 || m > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= m; ++i) r = r * (n - m + i) / i;
    return r;
  }

  // h_k is flat at the fixed point, so solving h(f) = h(x) there loses half
  // the digits. Close to it we solve (h(x*+e) - h(x*+d)) / (e - d) = 0 for e
  // instead, which is a well conditioned polynomial in e.
  bool near_fixed_point(double d) const noexcept {
    return std::abs(d) <= 0.05 / (k_ + 1.0);
  }

  NearSolution solve_near(double d) const {
    const double xs = fixed_point();
    if (d == 0.0) return {{xs, 1.0 - xs, std::log(xs)}, 0.0};
    // -sum_m c_m (e^m - d^m)/(e - d) and its derivative; increasing in e on the bracket.
    auto eval = [this, d](double e, double* deriv) {
      double s = 1.0, ds = 0.0, dpow = d, val = 0.0, dval = 0.0;
      for (int m = 2; m <= k_ + 1; ++m) {
        ds = s + e * ds;
        s = e * s + dpow;
        dpow *= d;
        val += coeff_[m] * s;
        dval += coeff_[m] * ds;
      }
      if (deriv) *deriv = -dval;
      return -val;
    };
    auto phi = [&eval](double e) { return eval(e, nullptr); };
    auto dphi = [&eval](double e) {
      double r = 0.0;
      eval(e, &r);
      return r;
    };
    const double e = d > 0.0 ? detail::solve_increasing(phi, dphi, -xs, 0.0)
                             : detail::solve_increasing(phi, dphi, 0.0, 1.0 - xs);
    return {{xs + e, (1.0 - xs) - e, std::log(xs) + std::log1p(e / xs)}, e};
  }

  // z at which e^{-z} equals the fixed point.
  double switch_z() const noexcept { return std::log1p(1.0 / k_); }

  void check_j(int j) const {
    if (j < 1 || j > k_) throw std::domain_error("j must lie in [1,k]");
  }

  double checked_f(double y) const {
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("H_k: arguments must lie in [0,1]");
    return f(y);
  }

  // Branch f >= k/(k+1): unknown w = 1 - f solving w (1-w)^k = c.
  FkValue solve_upper(double c) const {
    if (c <= 0.0) return {1.0, 0.0, 0.0};
    const double wmax = 1.0 / (k_ + 1.0);
    auto phi = [this, c](double w) { return w * std::pow(1.0 - w, k_) - c; };
    auto dphi = [this](double w) {
      return std::pow(1.0 - w, k_ - 1) * (1.0 - (k_ + 1.0) * w);
    };
    double lo = std::min(c, wmax);  // w (1-w)^k <= w, so w >= c
    if (phi(lo) > 0.0) lo = 0.0;
    const double w = detail::solve_increasing(phi, dphi, lo, wmax);
    return {1.0 - w, w, std::log1p(-w)};
  }

  // Branch f <= k/(k+1): unknown t = log f solving k t + log(1 - e^t) = rhs.
  FkValue solve_lower(double rhs) const {
    const double tmax = std::log(fixed_point());
    auto psi = [this, rhs](double t) { return k_ * t + std::log(-std::expm1(t)) - rhs; };
    auto dpsi = [this](double t) { return k_ - std::exp(t) / (-std::expm1(t)); };
    const double lo = rhs / k_;  // psi(lo) <= 0 since log(1-e^t) <= 0
    const double t = lo >= tmax ? tmax : detail::solve_increasing(psi, dpsi, lo, tmax);
    return {std::exp(t), -std::expm1(t), t};
  }

  void check_residual(double x, double f) const {
    const double res = std::abs(h(f) - h(x));
    if (res > tol_) {
      throw convergence_error("f_k: residual " + std::to_string(res) + " exceeds tolerance");
    }
  }

  int k_;
  double tol_;
  std::vector<double> coeff_;
};

inline double fk_eval(int k, double x, double tol = 1e-14) {
  return FkEvaluator(k, tol).f(x);
}

inline double gk_eval(int k, double z) { return FkEvaluator(k).g(z); }

inline double gk_derivative(int k, double z) { return FkEvaluator(k).g_derivative(z); }

inline QuadratureResult integrate_gk(int k, double tol = 1e-8) {
  return FkEvaluator(k).integrate_g(tol);
}

inline double tj_eval(int k, int j, double y) { return FkEvaluator(k).T(j, y); }

inline double dj_eval(int k, int j, double y) { return FkEvaluator(k).D(j, y); }

inline double hk_eval(int k, std::span<const double> y) { return FkEvaluator(k).H(y); }

inline double hk_tilde_eval(int k, std::span<const double> y) {
  return FkEvaluator(k).H_tilde(y);
}

}  // namespace perckit
