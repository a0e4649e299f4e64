#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>
#include "perckit/error.hpp"
#include "perckit/gap_process.hpp"
#include "perckit/lattice.hpp"
#include "perckit/qseries.hpp"
#include "perckit/rng.hpp"
#include "perckit/special_fn.hpp"

namespace perckit {

enum class OutputFormat { kCsv, kJson };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "json") return OutputFormat::kJson;
  throw std::invalid_argument("unknown output format '" + s + "' (csv|json)");
}

/// Default window for trend checks: L = ceil(8/s).
inline int default_l_rule(double s) {
  if (!(s > 0.0)) throw std::domain_error("default_l_rule: s must be > 0");
  return static_cast<int>(std::ceil(8.0 / s));
}

inline double s_from_q(double q) { return q <= 0.0 ? std::numeric_limits<double>::infinity() : -std::log(q); }

struct ExperimentConfig {
  ModelVariant variant = ModelVariant::kLocalK;
  std::vector<int> k_values{2};
  // Exactly one of q_values / s_values is used; q = e^{-s}.
  std::vector<double> q_values;
  std::vector<double> s_values;
  // Empty means L = ceil(8/s) per point.
  std::vector<int> l_values;
  std::uint64_t trials = 1;
  std::optional<std::uint64_t> seed;
  // Shared trial streams across all points, for coupled comparisons.
  bool common_random_numbers = false;
  unsigned workers = 0;
  std::string output;
  OutputFormat format = OutputFormat::kCsv;

  std::vector<double> q_grid() const {
    if (!q_values.empty()) return q_values;
    std::vector<double> q;
    for (double s : s_values) q.push_back(std::exp(-s));
    return q;
  }

  void validate() const {
    if (k_values.empty()) throw std::invalid_argument("config: k grid is empty");
    if (q_values.empty() == s_values.empty()) throw std::invalid_argument("config: give exactly one of q or s grid");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (!seed) throw std::invalid_argument("config: seed is required");
    for (double q : q_values) {
      if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("config: q values must lie in [0,1]");
    }
    for (double s : s_values) {
      if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("config: s values must be positive");
    }
    for (int L : l_values) {
      if (L < 1) throw std::invalid_argument("config: L values must be >= 1");
    }
    if (l_values.empty()) {
      for (double q : q_grid()) {
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("config: the default L rule needs 0 < q < 1");
      }
    }
    for (int k : k_values) ModelSpec::make(variant, k, 0.5);
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("model")) c.variant = parse_variant(j.at("model").get<std::string>());
    if (j.contains("k")) {
      const auto& v = j.at("k");
      c.k_values = v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()};
    }
    if (j.contains("q")) c.q_values = j.at("q").get<std::vector<double>>();
    if (j.contains("s")) c.s_values = j.at("s").get<std::vector<double>>();
    if (j.contains("L")) c.l_values = j.at("L").get<std::vector<int>>();
    if (j.contains("trials")) c.trials = j.at("trials").get<std::uint64_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("common_random_numbers")) c.common_random_numbers = j.at("common_random_numbers").get<bool>();
    if (j.contains("workers")) c.workers = j.at("workers").get<unsigned>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("format")) c.format = parse_format(j.at("format").get<std::string>());
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
    return from_json(j);
  }
};

struct MCResult {
  int k = 0;
  ModelVariant variant = ModelVariant::kLocalK;
  double q = 0.0;
  double s = 0.0;
  int L = 0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t seed = 0;  // per-point seed
  double wall_time = 0.0;  // seconds

  double estimate() const { return static_cast<double>(successes) / static_cast<double>(trials); }
  double std_error() const { return make_estimate(successes, trials).std_error; }
};

/// Fraction of localized L x L lattices (origin at the centre) whose
/// fixpoint reaches the boundary. Trial t uses derive_seed(point_seed, t).
inline MCResult simulate_point(const ModelSpec& spec, int L, std::uint64_t trials, std::uint64_t point_seed,
                               unsigned workers = 0) {
  spec.validate();
  if (L < 1) throw std::invalid_argument("simulate_point: L must be >= 1");
  if (trials < 1) throw std::invalid_argument("simulate_point: trials must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t ok = parallel_count(trials, workers, [&](std::uint64_t first, std::uint64_t last) {
    std::uint64_t count = 0;
    for (std::uint64_t t = first; t < last; ++t) {
      const auto r = run_to_fixpoint(sample_initial(spec, L, L, derive_seed(point_seed, t), true), spec);
      if (reaches_boundary(r, spec)) ++count;
    }
    return count;
  });
  MCResult m;
  m.k = spec.k;
  m.variant = spec.variant;
  m.q = spec.q;
  m.s = s_from_q(spec.q);
  m.L = L;
  m.trials = trials;
  m.successes = ok;
  m.seed = point_seed;
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

/// One row per (k, q, L) in grid order.
inline std::vector<MCResult> scan_threshold(const ExperimentConfig& c) {
  c.validate();
  std::vector<MCResult> rows;
  std::uint64_t index = 0;
  for (int k : c.k_values) {
    for (double q : c.q_grid()) {
      std::vector<int> ls = c.l_values;
      if (ls.empty()) ls.push_back(default_l_rule(s_from_q(q)));
      for (int L : ls) {
        const std::uint64_t seed = derive_seed(*c.seed, c.common_random_numbers ? 0 : index);
        rows.push_back(simulate_point(ModelSpec::make(c.variant, k, q), L, c.trials, seed, c.workers));
        ++index;
      }
    }
  }
  return rows;
}

namespace detail {

inline std::string fmt_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "k,model,q,s,L,trials,successes,estimate,stderr,seed";

/// wall_time is left out so reruns are byte-identical.
inline void write_csv(std::ostream& os, const std::vector<MCResult>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.k << ',' << to_string(r.variant) << ',' << detail::fmt_real(r.q) << ',' << detail::fmt_real(r.s) << ','
       << r.L << ',' << r.trials << ',' << r.successes << ',' << detail::fmt_real(r.estimate()) << ','
       << detail::fmt_real(r.std_error()) << ',' << r.seed << '\n';
  }
}

inline nlohmann::json to_json(const MCResult& r) {
  return {{"k", r.k},
          {"model", to_string(r.variant)},
          {"q", r.q},
          {"s", std::isfinite(r.s) ? nlohmann::json(r.s) : nlohmann::json(nullptr)},
          {"L", r.L},
          {"trials", r.trials},
          {"successes", r.successes},
          {"estimate", r.estimate()},
          {"stderr", r.std_error()},
          {"seed", r.seed},
          {"wall_time", r.wall_time}};
}

inline void write_json(std::ostream& os, const std::vector<MCResult>& rows, std::uint64_t master_seed) {
  nlohmann::json j;
  j["master_seed"] = master_seed;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) j["rows"].push_back(to_json(r));
  os << j.dump(2) << '\n';
}

/// Writes to c.output, or to `fallback` when no path is set.
inline void write_results(const ExperimentConfig& c, const std::vector<MCResult>& rows, std::ostream& fallback) {
  auto emit = [&](std::ostream& os) {
    if (c.format == OutputFormat::kCsv) {
      write_csv(os, rows);
    } else {
      write_json(os, rows, c.seed.value_or(0));
    }
  };
  if (c.output.empty()) {
    emit(fallback);
    return;
  }
  std::ofstream out(c.output, std::ios::binary);
  if (!out) throw io_error("cannot open output file " + c.output);
  emit(out);
  if (!out) throw io_error("write failed for " + c.output);
}

// ---------------------------------------------------------------------------
// Trend check of the growth probability against exp(-2 lambda_k / s).

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("least_squares: x values are all equal");
  const double b = sxy / sxx;
  return {b, my - b * mx};
}

/// s^{-1/2} log(1/s)^{5/2}; the log power is 2 for the Frobose model.
inline double residual_envelope(double s, bool frobose = false) {
  return std::pow(s, -0.5) * std::pow(std::log(1.0 / s), frobose ? 2.0 : 2.5);
}

struct TrendReport {
  int k = 0;
  ModelVariant variant = ModelVariant::kLocalK;
  double lambda = 0.0;
  std::vector<MCResult> points;
  LinearFit fit;                       // log P against 1/s
  double slope_lo = 0.0, slope_hi = 0.0;  // [-4 lambda, -lambda]
  bool slope_ok = false;
  std::vector<double> residuals;       // log P + 2 lambda / s
  std::vector<double> scaled_residuals;  // residual * s^{1/2}
  double residual_exponent = 0.0;      // growth of |residual| in log(1/s)
  double envelope_exponent = 0.0;      // same fit for the envelope
  bool residual_ok = false;
  bool ok() const { return slope_ok && residual_ok; }
};

/// Simulates each s (strictly decreasing), fits log P against 1/s, and
/// compares the growth of |log P + 2 lambda_k/s| in 1/s with the envelope.
/// Constants are never asserted.
inline TrendReport trend_check_theorem1(int k, const std::vector<double>& s_grid, std::uint64_t trials,
                                        std::uint64_t seed, std::optional<ModelVariant> variant = std::nullopt,
                                        int (*l_rule)(double) = default_l_rule, unsigned workers = 0) {
  if (s_grid.size() < 2) throw std::invalid_argument("trend_check: need at least two s values");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 0.0 && s_grid[i] < 1.0)) throw std::invalid_argument("trend_check: s must lie in (0,1)");
    if (i > 0 && !(s_grid[i] < s_grid[i - 1])) throw std::invalid_argument("trend_check: s grid must decrease");
  }
  const ModelVariant v = variant.value_or(k == 1 ? ModelVariant::kLocalModified : ModelVariant::kLocalK);
  TrendReport r;
  r.k = k;
  r.variant = v;
  r.lambda = lambda_k(k);
  r.slope_lo = -4.0 * r.lambda;
  r.slope_hi = -r.lambda;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    r.points.push_back(
        simulate_point(ModelSpec::make(v, k, std::exp(-s)), l_rule(s), trials, derive_seed(seed, i), workers));
  }
  bool all_one = true;
  for (const auto& p : r.points) {
    if (p.successes == 0) {
      throw degenerate_fit_error("trend_check: zero successes at s = " + detail::fmt_real(p.s) +
                                 "; raise trials or use larger s");
    }
    all_one = all_one && p.successes == p.trials;
  }
  if (all_one) throw degenerate_fit_error("trend_check: every estimate is 1");

  std::vector<double> inv_s, logp, log_inv_s, log_abs_r, log_env;
  const bool frobose = v == ModelVariant::kLocalFrobose;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    const double lp = std::log(r.points[i].estimate());
    const double res = lp + 2.0 * r.lambda / s;
    inv_s.push_back(1.0 / s);
    logp.push_back(lp);
    r.residuals.push_back(res);
    r.scaled_residuals.push_back(res * std::sqrt(s));
    log_inv_s.push_back(std::log(1.0 / s));
    log_abs_r.push_back(std::log(std::max(std::abs(res), std::numeric_limits<double>::min())));
    log_env.push_back(std::log(residual_envelope(s, frobose)));
  }
  r.fit = least_squares(inv_s, logp);
  r.slope_ok = r.fit.slope >= r.slope_lo && r.fit.slope <= r.slope_hi;
  r.residual_exponent = least_squares(log_inv_s, log_abs_r).slope;
  r.envelope_exponent = least_squares(log_inv_s, log_env).slope;
  r.residual_ok = r.residual_exponent <= r.envelope_exponent;
  return r;
}

inline nlohmann::json to_json(const TrendReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    auto p = to_json(r.points[i]);
    p["residual"] = r.residuals[i];
    p["scaled_residual"] = r.scaled_residuals[i];
    pts.push_back(p);
  }
  return {{"k", r.k},
          {"model", to_string(r.variant)},
          {"lambda", r.lambda},
          {"slope", r.fit.slope},
          {"intercept", r.fit.intercept},
          {"slope_range", {r.slope_lo, r.slope_hi}},
          {"slope_ok", r.slope_ok},
          {"residual_exponent", r.residual_exponent},
          {"envelope_exponent", r.envelope_exponent},
          {"residual_ok", r.residual_ok},
          {"ok", r.ok()},
          {"points", pts}};
}

/// k = 1 at equal (s, L) for the modified and Frobose rules, with shared
/// trial streams so the comparison is paired.
struct ModelComparison {
  MCResult modified;
  MCResult frobose;
  std::uint64_t frobose_only = 0;  // trials where only the Frobose run reached the boundary
  bool ok() const { return frobose.estimate() <= modified.estimate() + 4.0 * modified.std_error(); }
};

inline ModelComparison compare_k1_models(double s, int L, std::uint64_t trials, std::uint64_t seed,
                                         unsigned workers = 0) {
  const double q = std::exp(-s);
  const ModelSpec mod = ModelSpec::modified(q), fro = ModelSpec::frobose(q);
  ModelComparison c;
  c.modified = simulate_point(mod, L, trials, seed, workers);
  c.frobose = simulate_point(fro, L, trials, seed, workers);
  c.frobose_only = parallel_count(trials, workers, [&](std::uint64_t first, std::uint64_t last) {
    std::uint64_t n = 0;
    for (std::uint64_t t = first; t < last; ++t) {
      const std::uint64_t ts = derive_seed(seed, t);
      const bool f = reaches_boundary(run_to_fixpoint(sample_initial(fro, L, L, ts, true), fro), fro);
      if (!f) continue;
      if (!reaches_boundary(run_to_fixpoint(sample_initial(mod, L, L, ts, true), mod), mod)) ++n;
    }
    return n;
  });
  return c;
}

// ---------------------------------------------------------------------------
// P(A_k) against its two-sided bounds.

/// prod_{i>=1} (1 - e^{-is}) summed in log space until the terms drop below tol.
inline double euler_product(double s, double tol = 1e-17) {
  if (!(s > 0.0)) throw std::domain_error("euler_product: s must be > 0");
  double log_sum = 0.0;
  for (long i = 1;; ++i) {
    const double e = std::exp(-static_cast<double>(i) * s);
    log_sum += std::log1p(-e);
    if (e < tol) break;
  }
  return std::exp(log_sum);
}

struct PakSweepRow {
  int k = 0;
  double s = 0.0;
  PakResult pak;
  PakBounds bounds;
  bool inside = false;        // bracket lower end >= exp(-lambda/s)
  double ratio_to_upper = 0;  // value / upper
  std::optional<double> product;  // k = 1 only
  std::optional<double> product_rel_diff;
};

inline std::vector<PakSweepRow> sweep_pak_bounds(const std::vector<int>& k_list, const std::vector<double>& s_list,
                                                 double tol = 1e-12) {
  std::vector<PakSweepRow> rows;
  for (int k : k_list) {
    for (double s : s_list) {
      if (!(s > 0.0 && s < 1.0)) throw std::domain_error("sweep_pak_bounds: s must lie in (0,1)");
      PakSweepRow r;
      r.k = k;
      r.s = s;
      r.pak = prob_ak(k, s, tol);
      r.bounds = prob_ak_bounds(k, s);
      r.inside = r.pak.log_lower >= r.bounds.log_lower;
      r.ratio_to_upper = std::exp(r.pak.log_value - r.bounds.log_upper);
      if (k == 1) {
        r.product = euler_product(s);
        r.product_rel_diff = std::abs(r.pak.value - *r.product) / *r.product;
      }
      rows.push_back(r);
    }
  }
  return rows;
}

inline nlohmann::json to_json(const PakSweepRow& r) {
  nlohmann::json j{{"k", r.k},
                   {"s", r.s},
                   {"value", r.pak.value},
                   {"log_value", r.pak.log_value},
                   {"error_bound", r.pak.error_bound},
                   {"lower", r.bounds.lower},
                   {"upper", r.bounds.upper},
                   {"log_lower", r.bounds.log_lower},
                   {"log_upper", r.bounds.log_upper},
                   {"inside", r.inside},
                   {"ratio_to_upper", r.ratio_to_upper}};
  if (r.product) {
    j["product"] = *r.product;
    j["product_rel_diff"] = *r.product_rel_diff;
  }
  return j;
}

/// P(A_k) from the partition side: (q;q)_inf times the generating function
/// of partitions without k-sequences, truncated at q^N and summed at q = e^{-s}.
inline double pak_from_series(int k, double s, std::size_t N) {
  if (!(s > 0.0)) throw std::domain_error("pak_from_series: s must be > 0");
  const auto euler = q_pochhammer(PochSign::kMinus, 1, 1, std::nullopt, N);
  const auto g = partition_no_ksequences(k, N).series();
  return static_cast<double>(evaluate(euler * g, std::exp(-static_cast<long double>(s))));
}

// ---------------------------------------------------------------------------
// Rectangle k-gap bound over a grid.

inline std::vector<RectangleKgapCheck> rectangle_kgap_grid(int k_max, int ab_max, const std::vector<double>& s_list,
                                                           std::uint64_t trials, std::uint64_t seed,
                                                           unsigned workers = 0) {
  std::vector<RectangleKgapCheck> out;
  std::uint64_t index = 0;
  for (int k = 1; k <= k_max; ++k) {
    for (double s : s_list) {
      for (int a = 1; a <= ab_max; ++a) {
        for (int b = 1; b <= ab_max; ++b) {
          out.push_back(check_rectangle_kgap_bound(k, a, b, s, trials, derive_seed(seed, index++), workers));
        }
      }
    }
  }
  return out;
}

}  // namespace perckit
