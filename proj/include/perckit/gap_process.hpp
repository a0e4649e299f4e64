#pragma once

// Sequences of independent events with occurrence probabilities u_1, u_2, ...
// and the probability rho_n that the first n of them contain no run of k
// consecutive non-occurrences (a "k-gap").

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "perckit/error.hpp"
#include "perckit/rng.hpp"
#include "perckit/special_fn.hpp"

namespace perckit {

enum class Monotonicity { kConstant, kIncreasing, kDecreasing, kNeither };

inline const char* to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::kConstant: return "constant";
    case Monotonicity::kIncreasing: return "increasing";
    case Monotonicity::kDecreasing: return "decreasing";
    case Monotonicity::kNeither: return "neither";
  }
  return "?";
}

/// Monotonicity of a finite sequence by exact comparison. Equal neighbours
/// never break monotonicity.
inline Monotonicity classify(const double* first, const double* last) {
  bool up = false, down = false;
  for (const double* p = first; p + 1 < last; ++p) {
    if (p[1] > p[0]) up = true;
    if (p[1] < p[0]) down = true;
  }
  if (up && down) return Monotonicity::kNeither;
  if (up) return Monotonicity::kIncreasing;
  if (down) return Monotonicity::kDecreasing;
  return Monotonicity::kConstant;
}

class GapProcess {
 public:
  /// Finite list u_1..u_n.
  static GapProcess explicit_probabilities(int k, std::vector<double> u) {
    check_k(k);
    for (double v : u) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("GapProcess: probabilities must lie in [0,1]");
    }
    GapProcess p(k);
    p.u_ = std::move(u);
    p.mono_ = classify(p.u_.data(), p.u_.data() + p.u_.size());
    return p;
  }

  /// The infinite family u_i = 1 - e^{-is}.
  static GapProcess exponential(int k, double s) {
    check_k(k);
    if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("GapProcess: s must be positive and finite");
    GapProcess p(k);
    p.s_ = s;
    p.mono_ = Monotonicity::kIncreasing;
    return p;
  }

  int k() const noexcept { return k_; }
  bool parametric() const noexcept { return s_.has_value(); }
  double s() const { return s_.value(); }

  /// Number of available probabilities; empty for the infinite family.
  std::optional<std::size_t> length() const {
    if (parametric()) return std::nullopt;
    return u_.size();
  }

  bool has(std::size_t n) const { return parametric() || n <= u_.size(); }

  /// Monotonicity of the whole sequence.
  Monotonicity monotonicity() const noexcept { return mono_; }

  /// Monotonicity of the prefix u_1..u_n.
  Monotonicity monotonicity(std::size_t n) const {
    if (parametric()) return n <= 1 ? Monotonicity::kConstant : Monotonicity::kIncreasing;
    require(n);
    return classify(u_.data(), u_.data() + n);
  }

  // Accessors are 1-based, matching the event labels.
  double u(std::size_t i) const {
    if (parametric()) return -std::expm1(-static_cast<double>(i) * *s_);
    return u_[i - 1];
  }
  double log_u(std::size_t i) const {
    if (parametric()) return std::log(-std::expm1(-static_cast<double>(i) * *s_));
    return std::log(u_[i - 1]);
  }
  double log_one_minus_u(std::size_t i) const {
    if (parametric()) return -static_cast<double>(i) * *s_;
    return std::log1p(-u_[i - 1]);
  }
  /// log f_k(1 - u_i), exact in the parametric case where 1 - u_i = e^{-is}.
  double log_f_complement(const FkEvaluator& fk, std::size_t i) const {
    if (parametric()) return -fk.g(static_cast<double>(i) * *s_);
    return fk.solve(1.0 - u_[i - 1]).log_f;
  }

  void require(std::size_t n) const {
    if (!has(n)) {
      throw std::invalid_argument("GapProcess: " + std::to_string(n) + " probabilities requested, only " +
                                  std::to_string(u_.size()) + " available");
    }
  }

 private:
  explicit GapProcess(int k) : k_(k) {}

  static void check_k(int k) {
    if (k < 1) throw std::domain_error("GapProcess: k must be >= 1");
  }

  int k_;
  std::vector<double> u_;
  std::optional<double> s_;
  Monotonicity mono_ = Monotonicity::kConstant;
};

struct RhoTrace {
  std::vector<double> values;      // rho_0 .. rho_n
  std::vector<double> log_values;  // the same, in log space
};

namespace detail {

inline double log_sum_exp(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// Runs the k-term recurrence forward, keeping only the last k values in a
// ring buffer (linear and log space side by side).
class RhoStepper {
 public:
  explicit RhoStepper(const GapProcess& p)
      : p_(p), k_(static_cast<std::size_t>(p.k())), lin_(k_, 1.0), log_(k_, 0.0), terms_(k_) {}

  std::size_t index() const noexcept { return m_; }
  double value() const noexcept { return cur_lin_; }
  double log_value() const noexcept { return cur_log_; }

  void step() {
    const std::size_t m = ++m_;
    if (m < k_) {
      cur_lin_ = 1.0;
      cur_log_ = 0.0;
    } else {
      // rho_m = sum_i rho_{m-i} u_{m-i+1} prod_{j=m-i+2}^{m} (1-u_j)
      double lin = 0.0, prod = 1.0, log_prod = 0.0;
      for (std::size_t i = 1; i <= k_; ++i) {
        const std::size_t a = m - i + 1;
        const std::size_t slot = (m - i) % k_;
        lin += lin_[slot] * p_.u(a) * prod;
        terms_[i - 1] = log_[slot] + p_.log_u(a) + log_prod;
        prod *= 1.0 - p_.u(a);
        log_prod += p_.log_one_minus_u(a);
      }
      cur_lin_ = lin;
      cur_log_ = log_sum_exp(terms_.data(), k_);
    }
    lin_[m % k_] = cur_lin_;
    log_[m % k_] = cur_log_;
  }

 private:
  const GapProcess& p_;
  std::size_t k_;
  std::vector<double> lin_, log_, terms_;
  std::size_t m_ = 0;
  double cur_lin_ = 1.0, cur_log_ = 0.0;
};

}  // namespace detail

/// rho_0..rho_n by the exact recurrence.
inline RhoTrace rho_exact(const GapProcess& process, std::size_t n) {
  process.require(n);
  RhoTrace t;
  t.values.reserve(n + 1);
  t.log_values.reserve(n + 1);
  t.values.push_back(1.0);
  t.log_values.push_back(0.0);
  detail::RhoStepper st(process);
  for (std::size_t m = 1; m <= n; ++m) {
    st.step();
    t.values.push_back(st.value());
    t.log_values.push_back(st.log_value());
  }
  return t;
}

struct SandwichBounds {
  double lower;
  double upper;
  double log_lower;
  double log_upper;
};

namespace detail {

inline SandwichBounds product_bounds(const GapProcess& p, std::size_t n) {
  const FkEvaluator fk(p.k());
  double log_lower = 0.0, log_upper = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double lf = p.log_f_complement(fk, i);
    log_lower += lf;
    if (i >= static_cast<std::size_t>(p.k())) log_upper += lf;
  }
  return {std::exp(log_lower), std::exp(log_upper), log_lower, log_upper};
}

}  // namespace detail

/// (prod_{i=1}^n f_k(1-u_i), prod_{i=k}^n f_k(1-u_i)). Both bounds need a
/// nondecreasing sequence; a nonincreasing one keeps only the lower bound,
/// which rho_lower_bound exposes.
inline SandwichBounds rho_sandwich(const GapProcess& process, std::size_t n) {
  process.require(n);
  switch (process.monotonicity(n)) {
    case Monotonicity::kConstant:
    case Monotonicity::kIncreasing:
      break;
    case Monotonicity::kDecreasing:
      throw monotonicity_error(false, true,
                               "rho_sandwich: upper bound invalid for a decreasing sequence "
                               "(the lower bound still holds, see rho_lower_bound)");
    case Monotonicity::kNeither:
      throw monotonicity_error(true, true,
                               "rho_sandwich: lower and upper bounds both invalid for a "
                               "non-monotone sequence");
  }
  return detail::product_bounds(process, n);
}

/// prod_{i=1}^n f_k(1-u_i) <= rho_n, valid for increasing or decreasing u.
inline SandwichBounds rho_lower_bound(const GapProcess& process, std::size_t n) {
  process.require(n);
  if (process.monotonicity(n) == Monotonicity::kNeither) {
    throw monotonicity_error(true, true, "rho_lower_bound: lower bound invalid for a non-monotone sequence");
  }
  SandwichBounds b = detail::product_bounds(process, n);
  b.upper = 1.0;
  b.log_upper = 0.0;
  return b;
}

struct PakResult {
  double value;        // midpoint of the bracket (0 if it underflows)
  double log_value;    // log of the midpoint
  double error_bound;  // half-width of the bracket
  double log_lower;
  double log_upper;
  std::size_t terms;   // N, the number of recurrence steps
};

namespace detail {

// g_k(z) <= 2 e^{-kz} for z >= 1 underpins the truncation rule; it is
// confirmed on a grid every time before use.
inline void check_tail_constant(const FkEvaluator& fk) {
  for (double z = 1.0; z <= 40.0; z += 0.25) {
    const double g = fk.g(z);
    if (g > 0.0 && std::log(g) > std::log(2.0) - fk.k() * z) {
      throw convergence_error("prob_ak: tail bound g_k(z) <= 2 exp(-kz) fails at z = " + std::to_string(z));
    }
  }
}

}  // namespace detail

/// P(A_k) = lim rho_n for u_i = 1 - e^{-is}.
///
/// rho_N is an upper bound. Since "no k-gap" events are increasing, Harris'
/// inequality splits off every window reaching past N, and the product lower
/// bound on the events from N-k+2 on gives
///   P(A_k) >= rho_N exp(-sum_{j >= N-k+2} g_k(js)).
/// N is the smallest index for which that tail sum is provably <= tol, so
/// the half-width is <= tol both absolutely and relative to the value.
inline PakResult prob_ak(int k, double s, double tol = 1e-12, std::size_t max_terms = 50'000'000) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("prob_ak: s must be positive and finite");
  if (!(tol > 0.0)) throw std::domain_error("prob_ak: tol must be > 0");
  const GapProcess p = GapProcess::exponential(k, s);
  detail::check_tail_constant(FkEvaluator(k));

  // Tail from index M on: sum_{j>=M} 2 e^{-kjs} = 2 e^{-kMs} / (1 - e^{-ks}), needs Ms >= 1.
  const double denom = -std::expm1(-k * s);
  const double m_tail = std::log(2.0 / (tol * denom)) / (k * s);
  const double m_real = std::max({std::ceil(1.0 / s), std::ceil(m_tail), 1.0});
  if (m_real + k > static_cast<double>(max_terms)) {
    throw convergence_error("prob_ak: tolerance needs more than " + std::to_string(max_terms) + " terms");
  }
  const auto m = static_cast<std::size_t>(m_real);
  const std::size_t n = m + static_cast<std::size_t>(k) - 2;
  const double tail = 2.0 * std::exp(-k * s * static_cast<double>(m)) / denom;

  detail::RhoStepper st(p);
  for (std::size_t i = 0; i < n; ++i) st.step();
  const double log_upper = st.log_value();
  const double log_lower = log_upper - tail;
  // midpoint = upper (1 + e^{-T}) / 2, half-width = upper (1 - e^{-T}) / 2
  const double log_mid = log_upper + std::log1p(std::expm1(-tail) / 2.0);
  const double half = std::exp(log_upper) * (-std::expm1(-tail)) / 2.0;
  return {std::exp(log_mid), log_mid, half, log_lower, log_upper, n};
}

struct PakBounds {
  double lower;
  double upper;
  double log_lower;
  double log_upper;
};

/// (exp(-lambda_k/s), s^{-(2k-1)/(2k)} exp(-lambda_k/s)).
inline PakBounds prob_ak_bounds(int k, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("prob_ak_bounds: s must lie in (0,1)");
  const double lam = lambda_k(k);
  const double log_lower = -lam / s;
  const double log_upper = log_lower - (2.0 * k - 1.0) / (2.0 * k) * std::log(s);
  return {std::exp(log_lower), std::exp(log_upper), log_lower, log_upper};
}

struct McEstimate {
  std::uint64_t successes;
  std::uint64_t trials;
  double estimate;
  double std_error;
};

inline McEstimate make_estimate(std::uint64_t successes, std::uint64_t trials) {
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return {successes, trials, p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

/// Default worker count: one per hardware thread.
inline unsigned default_workers() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : h;
}

/// Splits [0, trials) into contiguous blocks, one per worker, and sums the
/// per-block counts. body(first, last) must return the success count.
template <class Body>
std::uint64_t parallel_count(std::uint64_t trials, unsigned workers, Body body) {
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(trials, 1)));
  if (workers <= 1) return body(std::uint64_t{0}, trials);
  std::vector<std::uint64_t> counts(workers, 0);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t first = trials * w / workers;
      const std::uint64_t last = trials * (w + 1) / workers;
      pool.emplace_back([&counts, &body, w, first, last] { counts[w] = body(first, last); });
    }
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

/// Fraction of simulated sequences u_1..u_n without a k-gap. Trial t draws
/// from its own stream derive_seed(seed, t), so the result is the same for
/// any worker count.
inline McEstimate rho_montecarlo(const GapProcess& process, std::size_t n, std::uint64_t trials,
                                 std::uint64_t seed, unsigned workers = 0) {
  if (trials < 1) throw std::invalid_argument("rho_montecarlo: trials must be >= 1");
  process.require(n);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = process.u(i + 1);
  const auto k = static_cast<std::size_t>(process.k());
  const std::uint64_t ok = parallel_count(trials, workers, [&](std::uint64_t first, std::uint64_t last) {
    std::uint64_t count = 0;
    for (std::uint64_t t = first; t < last; ++t) {
      CounterRng rng(derive_seed(seed, t));
      std::size_t run = 0;
      bool good = true;
      for (std::size_t i = 0; i < n && good; ++i) {
        if (rng.uniform() < u[i]) {
          run = 0;
        } else if (++run >= k) {
          good = false;
        }
      }
      count += good ? 1 : 0;
    }
    return count;
  });
  return make_estimate(ok, trials);
}

struct LowerBoundFuzzReport {
  std::size_t cases = 0;
  std::size_t violations = 0;
  double worst_log_margin = std::numeric_limits<double>::infinity();  // min log(rho_n) - log(lower)
  std::vector<double> worst_u;
};

/// Probes whether prod f_k(1-u_i) <= rho_n survives for unordered u. This
/// is only conjectured, so the report is informational.
inline LowerBoundFuzzReport fuzz_lower_bound(int k, std::size_t n, std::size_t cases, std::uint64_t seed) {
  LowerBoundFuzzReport r;
  const FkEvaluator fk(k);
  for (std::size_t c = 0; c < cases; ++c) {
    CounterRng rng(derive_seed(seed, c));
    std::vector<double> u(n);
    for (auto& v : u) v = rng.uniform();
    const GapProcess p = GapProcess::explicit_probabilities(k, u);
    double log_lower = 0.0;
    for (std::size_t i = 1; i <= n; ++i) log_lower += p.log_f_complement(fk, i);
    const double log_rho = rho_exact(p, n).log_values.back();
    const double margin = log_rho - log_lower;
    ++r.cases;
    if (margin < -1e-10) ++r.violations;
    if (margin < r.worst_log_margin) {
      r.worst_log_margin = margin;
      r.worst_u = u;
    }
  }
  return r;
}

}  // namespace perckit
