// Runs the twelve acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria (capped at 125).
//   acceptance [N ...]   run only the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "perckit/perckit.hpp"

using namespace perckit;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds; 0 means none stated
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> sorted_uniform(CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform();
  std::sort(v.begin(), v.end());
  return v;
}

// 1 ------------------------------------------------------------------------
Outcome fk_identities() {
  double worst_res = 0, worst_long = 0, worst_closed = 0;
  for (int k = 1; k <= 8; ++k) {
    const FkEvaluator e(k);
    for (int i = 0; i <= 10000; ++i) {
      const double x = i / 10000.0;
      const double f = e.f(x);
      worst_res = std::max(worst_res, std::abs(std::pow(f, k) - std::pow(f, k + 1) - (std::pow(x, k) - std::pow(x, k + 1))));
      double rhs = 0;
      for (int j = 0; j < k; ++j) rhs += std::pow(f, k - 1 - j) * std::pow(x, j);
      worst_long = std::max(worst_long, std::abs(std::pow(f, k) - (1 - x) * rhs));
      if (k == 1) worst_closed = std::max(worst_closed, std::abs(f - (1 - x)));
      if (k == 2) worst_closed = std::max(worst_closed, std::abs(f - (1 - x + std::sqrt((1 - x) * (1 + 3 * x))) / 2));
    }
  }
  return {worst_res <= 1e-12 && worst_long <= 1e-10 && worst_closed <= 1e-12,
          "residual " + fmt("%.2e", worst_res) + ", long form " + fmt("%.2e", worst_long) + ", closed forms " +
              fmt("%.2e", worst_closed)};
}

// 2 ------------------------------------------------------------------------
Outcome gk_integrals() {
  double worst = 0;
  for (int k = 1; k <= 6; ++k) worst = std::max(worst, std::abs(integrate_gk(k).value - lambda_k(k)));
  return {worst <= 1e-8, "max |int g_k - lambda_k| = " + fmt("%.2e", worst)};
}

// 3 ------------------------------------------------------------------------
Outcome gk_asymptotics() {
  double b = 0, c = 0;
  std::string fails;
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    const double z1 = 8.0 / k, z0 = 1e-6;
    const double a = std::abs(e.g(z1) / std::exp(-k * z1) - 1);
    if (a > 0.05) fails += " k=" + std::to_string(k) + ":" + fmt("%.3f", a);
    b = std::max(b, std::abs(k * e.g(z0) / std::log(1 / z0) - 1));
    c = std::max(c, std::abs(k * z0 * e.g_derivative(z0) + 1));
  }
  return {fails.empty() && b <= 0.05 && c <= 0.05,
          "k<=6: large-z " + (fails.empty() ? std::string("ok") : "exceeds 0.05 at" + fails) + "; log " +
              fmt("%.3f", b) + ", derivative " + fmt("%.3f", c)};
}

// 4 ------------------------------------------------------------------------
double brute_force_rho(int k, const std::vector<double>& u) {
  double total = 0;
  const std::size_t n = u.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double p = 1;
    int run = 0;
    bool good = true;
    for (std::size_t i = 0; i < n; ++i) {
      const bool occ = (mask >> i) & 1u;
      p *= occ ? u[i] : 1 - u[i];
      run = occ ? 0 : run + 1;
      good = good && run < k;
    }
    if (good) total += p;
  }
  return total;
}

Outcome rho_enumeration() {
  double worst = 0;
  std::size_t cases = 0;
  for (int k = 1; k <= 4; ++k) {
    for (int t = 0; t < 100; ++t) {
      CounterRng rng(derive_seed(4000 + k, t));
      const std::size_t n = 1 + rng.next() % 16;
      std::vector<double> u(n);
      for (auto& v : u) v = rng.uniform();
      const double r = rho_exact(GapProcess::explicit_probabilities(k, u), n).values.back();
      worst = std::max(worst, std::abs(r - brute_force_rho(k, u)));
      ++cases;
    }
  }
  return {worst <= 1e-12, std::to_string(cases) + " vectors, max error " + fmt("%.2e", worst)};
}

// 5 ------------------------------------------------------------------------
Outcome sandwich() {
  std::size_t bad = 0, cases = 0;
  for (int k = 1; k <= 5; ++k) {
    for (int t = 0; t < 200; ++t) {
      CounterRng rng(derive_seed(5000 + k, t));
      const std::size_t n = 1 + rng.next() % 1000;
      auto u = sorted_uniform(rng, n);
      const auto p = GapProcess::explicit_probabilities(k, u);
      const double r = rho_exact(p, n).values.back();
      const auto b = rho_sandwich(p, n);
      if (b.lower > r + 1e-10 || r > b.upper + 1e-10) ++bad;
      std::reverse(u.begin(), u.end());
      const auto d = GapProcess::explicit_probabilities(k, u);
      if (rho_lower_bound(d, n).lower > rho_exact(d, n).values.back() + 1e-10) ++bad;
      cases += 2;
    }
  }
  return {bad == 0, std::to_string(cases) + " increasing/decreasing cases, " + std::to_string(bad) + " violations"};
}

// 6 ------------------------------------------------------------------------
Outcome hk_signs() {
  double min_h = 1e300, max_ht = -1e300;
  bool mono = true;
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    CounterRng rng(derive_seed(6000, k));
    for (int t = 0; t < 10000; ++t) {
      min_h = std::min(min_h, e.H(sorted_uniform(rng, k)));
      max_ht = std::max(max_ht, e.H_tilde(sorted_uniform(rng, 2 * k - 1)));
    }
    for (int j = 1; j <= k; ++j) {
      double prev = 1e300;
      for (int i = 0; i < 1000; ++i) {
        const double d = e.D(j, i / 1000.0);
        mono = mono && d <= prev + 1e-12;
        prev = d;
      }
    }
    double t1p = 1e300, tkp = -1e300;
    for (int i = 0; i < 1000; ++i) {
      const double y = i / 1000.0;
      const double t1 = e.T(1, y), tk = e.T(k, y);
      mono = mono && t1 <= t1p + 1e-12 && tk >= tkp - 1e-12;
      t1p = t1;
      tkp = tk;
    }
  }
  return {min_h >= -1e-10 && max_ht <= 1e-10 && mono,
          "min H " + fmt("%.2e", min_h) + ", max H~ " + fmt("%.2e", max_ht) + (mono ? ", D/T monotone" : ", D/T NOT monotone")};
}

// 7 ------------------------------------------------------------------------
Outcome pak_bounds() {
  bool lower_ok = true, ratio_ok = true;
  std::ostringstream d;
  d << "ratio to upper at s=0.1/0.05/0.02:";
  for (int k = 1; k <= 4; ++k) {
    d << " k=" << k;
    for (double s : {0.1, 0.05, 0.02}) {
      const auto r = prob_ak(k, s, 1e-12);
      const auto b = prob_ak_bounds(k, s);
      lower_ok = lower_ok && r.log_lower >= b.log_lower;
      const double ratio = std::exp(r.log_value - b.log_upper);
      d << (s == 0.1 ? " " : "/") << fmt("%.3f", ratio);
      if (s == 0.02) ratio_ok = ratio_ok && ratio < 1.0;
    }
  }
  d << (lower_ok ? "; lower bound holds" : "; LOWER BOUND VIOLATED");
  return {lower_ok && ratio_ok, d.str()};
}

// 8 ------------------------------------------------------------------------
Outcome partition_identities() {
  bool ok = true;
  for (int k = 1; k <= 4; ++k) ok = ok && andrews_gk_series(k, 200) == partition_no_ksequences(k, 200).series();
  const bool chi = chi_product_g2(200) == partition_no_ksequences(2, 200).series();
  return {ok && chi, std::string("double series k<=4 ") + (ok ? "exact" : "MISMATCH") + ", mock theta product " +
                         (chi ? "exact" : "MISMATCH")};
}

// 9 ------------------------------------------------------------------------
Lattice random_lattice(CounterRng& rng, int w, int h, bool occupied) {
  const double pa = 0.05 + 0.4 * rng.uniform();
  const double po = occupied ? 0.6 * rng.uniform() : 0.0;
  Lattice l(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r = rng.uniform();
      if (r < pa) {
        l.set(x, y, CellState::kActive);
      } else if (r < pa + po) {
        l.set(x, y, CellState::kOccupied);
      }
    }
  }
  return l;
}

bool hand_fixpoints() {
  Lattice block(4, 4);
  block.set(0, 0, CellState::kActive);
  block.set(1, 1, CellState::kActive);
  const bool b = to_text(run_to_fixpoint(block, ModelSpec::global(2, 0.5)).lattice) == "AA..\nAA..\n....\n....\n";

  Lattice corner(3, 3);
  corner.set(1, 0, CellState::kActive);
  corner.set(0, 1, CellState::kActive);
  const bool f_no = run_to_fixpoint(corner, ModelSpec::frobose(0.5)).steps == 0;
  corner.set(0, 0, CellState::kActive);
  const auto fc = run_to_fixpoint(corner, ModelSpec::frobose(0.5)).lattice;
  const bool f_yes = fc.active(1, 1) && fc.count(CellState::kActive) == 4;

  Lattice diag(3, 3);
  diag.set(0, 0, CellState::kActive);
  diag.set(1, 1, CellState::kOccupied);
  diag.set(2, 2, CellState::kOccupied);
  const auto m = run_to_fixpoint(diag, ModelSpec::modified(0.5)).lattice;
  const bool mod = m.stamp(1, 1) == 1 && m.stamp(2, 2) == 2;
  const bool fro = run_to_fixpoint(diag, ModelSpec::frobose(0.5)).steps == 0;
  return b && f_no && f_yes && mod && fro;
}

Outcome packed_vs_naive() {
  const bool hand = hand_fixpoints();
  const std::vector<ModelSpec> models{ModelSpec::global(2, 0.5), ModelSpec::global(3, 0.5), ModelSpec::local(2, 0.5),
                                      ModelSpec::local(3, 0.5),  ModelSpec::local(4, 0.5),  ModelSpec::modified(0.5),
                                      ModelSpec::frobose(0.5)};
  std::size_t mismatches = 0, total = 0;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const auto& spec = models[mi];
    const std::uint64_t bad = parallel_count(10000, 0, [&](std::uint64_t first, std::uint64_t last) {
      std::uint64_t n = 0;
      for (std::uint64_t t = first; t < last; ++t) {
        CounterRng rng(derive_seed(9000 + mi, t));
        Lattice fast = random_lattice(rng, 32, 32, spec.is_local());
        Lattice slow = fast;
        bool same = true;
        for (;;) {
          const bool a = step(fast, spec);
          const bool b = reference::step(slow, spec);
          if (a != b || !fast.same_cells(slow)) {
            same = false;
            break;
          }
          if (!a) break;
        }
        for (int y = 0; y < 32 && same; ++y) {
          for (int x = 0; x < 32; ++x) same = same && fast.stamp(x, y) == slow.stamp(x, y);
        }
        n += same ? 0 : 1;
      }
      return n;
    });
    mismatches += bad;
    total += 10000;
  }
  return {hand && mismatches == 0, std::string("hand fixpoints ") + (hand ? "exact" : "WRONG") + ", " +
                                       std::to_string(mismatches) + "/" + std::to_string(total) +
                                       " packed/naive mismatches over 7 models"};
}

// 10 -----------------------------------------------------------------------
Outcome growth_guarantee() {
  std::uint64_t violations = 0, trials = 0;
  std::ostringstream d;
  auto run = [&](int k, std::optional<ModelVariant> v, const char* tag) {
    const auto r = verify_growth_guarantee(k, 500, 10000 + k, v);
    violations += r.violations();
    trials += r.dk_trials + r.jk_trials + r.chain_trials;
    d << ' ' << tag << '=' << r.violations();
  };
  run(1, std::nullopt, "k1");
  run(1, ModelVariant::kLocalFrobose, "k1frobose");
  run(2, std::nullopt, "k2");
  run(3, std::nullopt, "k3");
  return {violations == 0, std::to_string(trials) + " D/J/E checks, violations:" + d.str()};
}

// 11 -----------------------------------------------------------------------
Outcome kgap_rectangles() {
  const auto grid = rectangle_kgap_grid(3, 12, {0.1, 0.25, 0.5}, 10000, 11000);
  std::size_t bad = 0;
  double worst = -1e300;
  for (const auto& c : grid) {
    if (!c.holds) ++bad;
    if (c.stderr_at_bound > 0) worst = std::max(worst, (c.mc.estimate - c.bound) / c.stderr_at_bound);
  }
  return {bad == 0, std::to_string(grid.size()) + " (k,a,b,s) points at 1e4 trials, " + std::to_string(bad) +
                        " above bound + 4 stderr; worst excess " + fmt("%.2f", worst) + " stderr"};
}

// 12 -----------------------------------------------------------------------
Outcome trend() {
  const auto r = trend_check_theorem1(2, {0.25, 0.2, 0.167, 0.143}, 100000, 12000);
  std::ostringstream d;
  d << "slope " << fmt("%.3f", r.fit.slope) << " in [" << fmt("%.3f", r.slope_lo) << ", " << fmt("%.3f", r.slope_hi)
    << "]: " << (r.slope_ok ? "yes" : "NO") << "; residual exponent " << fmt("%.2f", r.residual_exponent)
    << " <= envelope " << fmt("%.2f", r.envelope_exponent) << ": " << (r.residual_ok ? "yes" : "NO")
    << "; estimates";
  for (const auto& p : r.points) d << ' ' << fmt("%.4g", p.estimate());
  return {r.ok(), d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "f_k functional equation", 5, fk_identities},
      {2, "integral of g_k", 10, gk_integrals},
      {3, "g_k asymptotics", 0, gk_asymptotics},
      {4, "rho_exact vs enumeration", 60, rho_enumeration},
      {5, "sandwich bounds", 0, sandwich},
      {6, "H_k signs, D_j and T_j monotone", 0, hk_signs},
      {7, "P(A_k) bounds", 0, pak_bounds},
      {8, "partition identities", 30, partition_identities},
      {9, "lattice rules", 0, packed_vs_naive},
      {10, "growth guarantees", 300, growth_guarantee},
      {11, "rectangle k-gap bound", 0, kgap_rectangles},
      {12, "growth trend", 1800, trend},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0 && secs >= c.time_limit) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.time_limit) + " s budget";
    }
    std::printf("[%s] %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return std::min(failed, 125);
}
