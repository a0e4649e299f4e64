#pragma once

// Explicit growth events built from stair-step and skew families of rows and
// columns: their exact probabilities, conditioned samplers, and simulation
// checks of the growth they guarantee.
//
// Event coordinates are 1-based with the origin cell at (1,1): column C_i is
// x = i, row R_i is y = i, and every line starts at the x or y axis, so a
// line is fully described by its index and length. R(a,b) is the rectangle
// [1,a] x [1,b]. Lattice cell (x-1, y-1) holds event cell (x, y).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perckit/gap_process.hpp"
#include "perckit/lattice.hpp"
#include "perckit/rng.hpp"
#include "perckit/special_fn.hpp"

namespace perckit {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class LineKind { kColumn, kRow };

/// Column C_index = {(index, 1..length)} or row R_index = {(1..length, index)}.
struct Line {
  LineKind kind = LineKind::kColumn;
  int index = 0;
  int length = 0;

  Cell cell(int j) const { return kind == LineKind::kColumn ? Cell{index, j} : Cell{j, index}; }
  std::vector<Cell> cells() const {
    std::vector<Cell> out;
    for (int j = 1; j <= length; ++j) out.push_back(cell(j));
    return out;
  }
  std::string label() const { return (kind == LineKind::kColumn ? "C" : "R") + std::to_string(index); }
  friend bool operator==(const Line&, const Line&) = default;
};

/// Stair-step lines C_i, R_i of length i - k for a < i <= b.
struct StairGeometry {
  int k = 1;
  int a = 1;
  int b = 2;

  StairGeometry(int k_, int a_, int b_) : k(k_), a(a_), b(b_) {
    if (k < 1) throw std::invalid_argument("StairGeometry: k must be >= 1");
    if (a < k) throw std::invalid_argument("StairGeometry: need a >= k");
    if (b <= a) throw std::invalid_argument("StairGeometry: need b > a");
  }

  std::vector<Line> columns() const { return lines(LineKind::kColumn); }
  std::vector<Line> rows() const { return lines(LineKind::kRow); }

 private:
  std::vector<Line> lines(LineKind kind) const {
    std::vector<Line> out;
    for (int i = a + 1; i <= b; ++i) out.push_back({kind, i, i - k});
    return out;
  }
};

/// Horizontally skew event geometry for b - a >= k + 2.
struct SkewGeometry {
  int k = 1;
  int a = 1;
  int b = 4;

  SkewGeometry(int k_, int a_, int b_) : k(k_), a(a_), b(b_) {
    if (k < 1) throw std::invalid_argument("SkewGeometry: k must be >= 1");
    if (a < k) throw std::invalid_argument("SkewGeometry: need a >= k");
    if (b - a < k + 2) throw std::invalid_argument("SkewGeometry: need b - a >= k + 2");
  }

  int column_height(int i) const {
    if (i <= a || i > b) throw std::out_of_range("SkewGeometry: column outside (a, b]");
    return i <= a + k ? i - k : a + 1;
  }
  int row_width(int i) const {
    if (i <= a || i > b) throw std::out_of_range("SkewGeometry: row outside (a, b]");
    if (i == a + 1) return a - k + 1;
    return i <= a + k + 1 ? b - 1 : b;
  }
  Line column(int i) const { return {LineKind::kColumn, i, column_height(i)}; }
  Line row(int i) const { return {LineKind::kRow, i, row_width(i)}; }

  /// R_{a+1}, C_{a+1}, R_b, C_b.
  std::vector<Line> nonempty_lines() const { return {row(a + 1), column(a + 1), row(b), column(b)}; }
  /// R_{a+2} .. R_{a+k+1}.
  std::vector<Line> empty_rows() const {
    std::vector<Line> out;
    for (int i = a + 2; i <= a + k + 1; ++i) out.push_back(row(i));
    return out;
  }
  Cell occupied_cell() const { return {b, a + k + 1}; }
  /// C_{a+2} .. C_{b-1}.
  std::vector<Line> gap_columns() const {
    std::vector<Line> out;
    for (int i = a + 2; i <= b - 1; ++i) out.push_back(column(i));
    return out;
  }
  /// R_{a+k+2} .. R_{b-1}.
  std::vector<Line> gap_rows() const {
    std::vector<Line> out;
    for (int i = a + k + 2; i <= b - 1; ++i) out.push_back(row(i));
    return out;
  }
};

/// Parameters k <= a_1 <= b_1 <= ... <= a_m <= b_m < L with b_i - a_i >= k + 2.
/// b_m = L is excluded: row L and column L of the last skew event would
/// then contain the two cells required next to the axes.
struct EventChain {
  int k = 1;
  int L = 2;
  std::vector<std::pair<int, int>> segments;  // (a_i, b_i)

  EventChain(int k_, int L_, std::vector<std::pair<int, int>> segs) : k(k_), L(L_), segments(std::move(segs)) {
    if (k < 1) throw std::invalid_argument("EventChain: k must be >= 1");
    if (L < k + 1) throw std::invalid_argument("EventChain: need L >= k + 1");
    int prev = k;
    for (const auto& [a, b] : segments) {
      if (a < prev) throw std::invalid_argument("EventChain: parameters must be nondecreasing from k");
      if (b - a < k + 2) throw std::invalid_argument("EventChain: need b_i - a_i >= k + 2");
      prev = b;
    }
    if (prev > L - 1) throw std::invalid_argument("EventChain: need b_m <= L - 1");
  }

  /// Stair events D_k(k, a_1), D_k(b_i, a_{i+1}), D_k(b_m, L-1); empty ranges are dropped.
  std::vector<StairGeometry> stairs() const {
    std::vector<StairGeometry> out;
    int from = k;
    for (const auto& [a, b] : segments) {
      if (a > from) out.emplace_back(k, from, a);
      from = b;
    }
    if (L - 1 > from) out.emplace_back(k, from, L - 1);
    return out;
  }
  std::vector<SkewGeometry> skews() const {
    std::vector<SkewGeometry> out;
    for (const auto& [a, b] : segments) out.emplace_back(k, a, b);
    return out;
  }
  /// Cells required nonempty besides the lines: the k x k corner square
  /// and one cell each in row L and column L next to the axes.
  std::vector<Cell> corner_cells() const {
    std::vector<Cell> out;
    for (int y = 1; y <= k; ++y) {
      for (int x = 1; x <= k; ++x) out.push_back({x, y});
    }
    out.push_back({2, L});
    out.push_back({L, 2});
    return out;
  }
  friend bool operator==(const EventChain& x, const EventChain& y) {
    return x.k == y.k && x.L == y.L && x.segments == y.segments;
  }
};

// ---- probabilities ---------------------------------------------------------

/// P(no k consecutive empty lines) for independent lines, cells Empty w.p. q.
inline double family_no_kgaps_probability(int k, const std::vector<Line>& lines, double q) {
  if (lines.empty()) return 1.0;
  std::vector<double> u;
  u.reserve(lines.size());
  for (const auto& l : lines) u.push_back(-std::expm1(l.length * std::log(q)));
  const auto trace = rho_exact(GapProcess::explicit_probabilities(k, std::move(u)), lines.size());
  return trace.values.back();
}

namespace detail {
inline void check_q_open(double q, const char* who) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error(std::string(who) + ": q must lie in (0,1)");
}
inline double nonempty_probability(const Line& l, double q) { return -std::expm1(l.length * std::log(q)); }
}  // namespace detail

inline double prob_dk(const StairGeometry& g, double q) {
  detail::check_q_open(q, "prob_dk");
  return family_no_kgaps_probability(g.k, g.columns(), q) * family_no_kgaps_probability(g.k, g.rows(), q);
}

/// exp(-2 sum_{i=a-(k-1)}^{b-k} g_k(is)) with q = e^{-s}.
inline double prob_dk_lower_bound(const StairGeometry& g, double s) {
  const FkEvaluator fk(g.k);
  double sum = 0.0;
  for (int i = g.a - (g.k - 1); i <= g.b - g.k; ++i) sum += fk.g(i * s);
  return std::exp(-2.0 * sum);
}

inline double prob_jk(const SkewGeometry& g, double q) {
  detail::check_q_open(q, "prob_jk");
  double p = 1.0;
  for (const auto& l : g.nonempty_lines()) p *= detail::nonempty_probability(l, q);
  long cells = 0;
  for (const auto& l : g.empty_rows()) cells += l.length;
  p *= std::pow(q, static_cast<double>(cells));
  p *= 1.0 - q;
  p *= family_no_kgaps_probability(g.k, g.gap_columns(), q);
  p *= family_no_kgaps_probability(g.k, g.gap_rows(), q);
  return p;
}

/// Product lower bound q^{k(b-1)} (1-q) (1-q^{a-k+1})^2 (1-q^{a+1}) (1-q^b)
/// exp(-sum_{i=2}^{k} g_k((a-k+i)s) - (b-a-k-1) g_k((a+1)s) - (b-a-k-2) g_k(bs)).
inline double prob_jk_product_bound(const SkewGeometry& g, double s) {
  const int k = g.k, a = g.a, b = g.b;
  const double q = std::exp(-s);
  const FkEvaluator fk(k);
  double e = 0.0;
  for (int i = 2; i <= k; ++i) e += fk.g((a - k + i) * s);
  e += (b - a - k - 1) * fk.g((a + 1) * s);
  e += (b - a - k - 2) * fk.g(b * s);
  const double one_minus = -std::expm1(-(a - k + 1) * s);
  return std::pow(q, static_cast<double>(k) * (b - 1)) * (-std::expm1(-s)) * one_minus * one_minus *
         (-std::expm1(-(a + 1) * s)) * (-std::expm1(-b * s)) * std::exp(-e);
}

inline double prob_chain(const EventChain& c, double q) {
  detail::check_q_open(q, "prob_chain");
  double p = std::pow(1.0 - q, static_cast<double>(c.k * c.k + 2));
  for (const auto& d : c.stairs()) p *= prob_dk(d, q);
  for (const auto& j : c.skews()) p *= prob_jk(j, q);
  return p;
}

// ---- validators ------------------------------------------------------------

namespace detail {
inline bool cell_nonempty(const Lattice& l, Cell c) { return l.nonempty(c.x - 1, c.y - 1); }
}  // namespace detail

inline bool line_nonempty(const Lattice& l, const Line& line) {
  for (int j = 1; j <= line.length; ++j) {
    if (detail::cell_nonempty(l, line.cell(j))) return true;
  }
  return false;
}

inline bool family_has_no_kgaps(const Lattice& l, int k, const std::vector<Line>& lines) {
  int run = 0;
  for (const auto& line : lines) {
    run = line_nonempty(l, line) ? 0 : run + 1;
    if (run >= k) return false;
  }
  return true;
}

inline bool dk_occurs(const Lattice& l, const StairGeometry& g) {
  return family_has_no_kgaps(l, g.k, g.columns()) && family_has_no_kgaps(l, g.k, g.rows());
}

inline bool jk_occurs(const Lattice& l, const SkewGeometry& g) {
  for (const auto& line : g.nonempty_lines()) {
    if (!line_nonempty(l, line)) return false;
  }
  for (const auto& line : g.empty_rows()) {
    if (line_nonempty(l, line)) return false;
  }
  return detail::cell_nonempty(l, g.occupied_cell()) && family_has_no_kgaps(l, g.k, g.gap_columns()) &&
         family_has_no_kgaps(l, g.k, g.gap_rows());
}

/// Names of the failed conditions of the chain event; empty if it occurs.
inline std::vector<std::string> chain_failures(const Lattice& l, const EventChain& c) {
  std::vector<std::string> out;
  for (const auto& cell : c.corner_cells()) {
    if (!detail::cell_nonempty(l, cell)) {
      out.push_back("cell (" + std::to_string(cell.x) + "," + std::to_string(cell.y) + ") empty");
    }
  }
  for (const auto& d : c.stairs()) {
    if (!dk_occurs(l, d)) out.push_back("D(" + std::to_string(d.a) + "," + std::to_string(d.b) + ")");
  }
  for (const auto& j : c.skews()) {
    if (!jk_occurs(l, j)) out.push_back("J(" + std::to_string(j.a) + "," + std::to_string(j.b) + ")");
  }
  return out;
}

inline bool chain_occurs(const Lattice& l, const EventChain& c) { return chain_failures(l, c).empty(); }

// ---- conditioned sampling --------------------------------------------------

namespace detail {

inline void put(Lattice& l, Cell c, CellState s) {
  if (l.in_bounds(c.x - 1, c.y - 1)) l.set(c.x - 1, c.y - 1, s);
}

// Draws cell states with a conditioned law, writing Occupied or Empty.
class EventSampler {
 public:
  EventSampler(Lattice& l, double q, std::uint64_t seed) : l_(l), q_(q), rng_(seed) {}

  void empty_line(const Line& line) {
    for (int j = 1; j <= line.length; ++j) put(l_, line.cell(j), CellState::kEmpty);
  }

  /// Cells given at least one is nonempty: cell j is the first nonempty one
  /// with probability (1-q)/(1-q^{n-j+1}) given none before it.
  void nonempty_line(const Line& line) {
    bool found = false;
    for (int j = 1; j <= line.length; ++j) {
      if (found) {
        put(l_, line.cell(j), draw_cell());
        continue;
      }
      const int rest = line.length - j + 1;
      const double p = (1.0 - q_) / -std::expm1(rest * std::log(q_));
      if (rng_.uniform() < p) {
        put(l_, line.cell(j), CellState::kOccupied);
        found = true;
      } else {
        put(l_, line.cell(j), CellState::kEmpty);
      }
    }
  }

  /// Lines conditioned on no k consecutive empty lines. The nonempty
  /// indicators are drawn forward using the backward completion
  /// probabilities W_i(r), r = current run of empty lines.
  void family(int k, const std::vector<Line>& lines) {
    const std::size_t n = lines.size();
    if (n == 0) return;
    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::vector<double>> w(n + 1, std::vector<double>(kk, 1.0));
    for (std::size_t i = n; i-- > 0;) {
      const double u = nonempty_probability(lines[i], q_);
      double mx = 0.0;
      for (std::size_t r = 0; r < kk; ++r) {
        const double stay = r + 1 < kk ? (1.0 - u) * w[i + 1][r + 1] : 0.0;
        w[i][r] = u * w[i + 1][0] + stay;
        mx = std::max(mx, w[i][r]);
      }
      for (auto& v : w[i]) v /= mx;  // only ratios within a level are used
    }
    std::size_t run = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = nonempty_probability(lines[i], q_);
      const double yes = u * w[i + 1][0];
      const double no = run + 1 < kk ? (1.0 - u) * w[i + 1][run + 1] : 0.0;
      if (rng_.uniform() * (yes + no) < yes) {
        nonempty_line(lines[i]);
        run = 0;
      } else {
        empty_line(lines[i]);
        ++run;
      }
    }
  }

  CellState draw_cell() { return rng_.uniform() < q_ ? CellState::kEmpty : CellState::kOccupied; }

  Lattice& lattice() { return l_; }

 private:
  Lattice& l_;
  double q_;
  CounterRng rng_;
};

inline void sample_stair(EventSampler& s, const StairGeometry& g) {
  s.family(g.k, g.columns());
  s.family(g.k, g.rows());
}

inline void sample_skew(EventSampler& s, const SkewGeometry& g) {
  for (const auto& line : g.nonempty_lines()) s.nonempty_line(line);
  for (const auto& line : g.empty_rows()) s.empty_line(line);
  put(s.lattice(), g.occupied_cell(), CellState::kOccupied);
  s.family(g.k, g.gap_columns());
  s.family(g.k, g.gap_rows());
}

}  // namespace detail

/// Localized configuration on the window [1,W]^2 (W = L by default) drawn
/// from the conditional law given the chain event. The event's factors
/// involve disjoint cells, so each is sampled exactly and independently;
/// all other cells are unconditioned. The origin is Active.
inline Lattice sample_conditioned(const EventChain& c, double q, std::uint64_t seed,
                                  std::optional<int> window = std::nullopt) {
  detail::check_q_open(q, "sample_conditioned");
  const int w = window.value_or(c.L);
  if (w < c.L) throw std::invalid_argument("sample_conditioned: window smaller than L");
  Lattice l(w, w, Point{0, 0});
  detail::EventSampler s(l, q, seed);
  for (int y = 0; y < w; ++y) {
    for (int x = 0; x < w; ++x) l.set(x, y, s.draw_cell());
  }
  for (const auto& cell : c.corner_cells()) detail::put(l, cell, CellState::kOccupied);
  for (const auto& d : c.stairs()) detail::sample_stair(s, d);
  for (const auto& j : c.skews()) detail::sample_skew(s, j);
  l.set(0, 0, CellState::kActive);
  return l;
}

/// Configuration on [1,W]^2 conditioned on D_k(a,b) (stair) or J_k(a,b)
/// (skew) alone; other cells unconditioned, origin Active.
inline Lattice sample_conditioned_dk(const StairGeometry& g, double q, std::uint64_t seed, int window) {
  detail::check_q_open(q, "sample_conditioned_dk");
  if (window < g.b) throw std::invalid_argument("sample_conditioned_dk: window smaller than b");
  Lattice l(window, window, Point{0, 0});
  detail::EventSampler s(l, q, seed);
  for (int y = 0; y < window; ++y) {
    for (int x = 0; x < window; ++x) l.set(x, y, s.draw_cell());
  }
  detail::sample_stair(s, g);
  l.set(0, 0, CellState::kActive);
  return l;
}

inline Lattice sample_conditioned_jk(const SkewGeometry& g, double q, std::uint64_t seed, int window) {
  detail::check_q_open(q, "sample_conditioned_jk");
  if (window < g.b) throw std::invalid_argument("sample_conditioned_jk: window smaller than b");
  Lattice l(window, window, Point{0, 0});
  detail::EventSampler s(l, q, seed);
  for (int y = 0; y < window; ++y) {
    for (int x = 0; x < window; ++x) l.set(x, y, s.draw_cell());
  }
  detail::sample_skew(s, g);
  l.set(0, 0, CellState::kActive);
  return l;
}

/// Direct Monte Carlo of the event over its own cells (every cell of the
/// window drawn independently), for checking the exact probabilities.
template <class Occurs>
McEstimate event_montecarlo(int window, double q, std::uint64_t trials, std::uint64_t seed, Occurs occurs) {
  std::uint64_t hits = 0;
  Lattice l(window, window, Point{0, 0});
  for (std::uint64_t t = 0; t < trials; ++t) {
    CounterRng rng(derive_seed(seed, t));
    for (int y = 0; y < window; ++y) {
      for (int x = 0; x < window; ++x) l.set(x, y, rng.uniform() < q ? CellState::kEmpty : CellState::kOccupied);
    }
    hits += occurs(l) ? 1 : 0;
  }
  return make_estimate(hits, trials);
}

// ---- growth guarantees -----------------------------------------------------

/// Whether [1,w] x [1,h] is entirely Active.
inline bool rectangle_active(const Lattice& l, int w, int h) {
  if (w > l.width() || h > l.height()) return false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!l.active(x, y)) return false;
    }
  }
  return true;
}

/// Rule used to simulate growth for a given k: local k-percolation for
/// k >= 2, the modified rule for k = 1 unless another k = 1 variant is given.
inline ModelSpec growth_model(int k, double q, std::optional<ModelVariant> variant = std::nullopt) {
  if (k == 1) return ModelSpec::make(variant.value_or(ModelVariant::kLocalModified), 1, q);
  if (variant && *variant != ModelVariant::kLocalK) {
    throw std::invalid_argument("growth_model: only the local rule is defined for k >= 2");
  }
  return ModelSpec::local(k, q);
}

struct GrowthViolation {
  std::string event;  // "D", "J" or "E"
  std::string params;
  std::uint64_t trial = 0;
  double q = 0.0;
  std::string snapshot;  // initial configuration, text format
};

struct GrowthReport {
  int k = 0;
  ModelVariant variant = ModelVariant::kLocalK;
  std::uint64_t dk_trials = 0, dk_violations = 0;
  std::uint64_t jk_trials = 0, jk_violations = 0;
  std::uint64_t chain_trials = 0, chain_violations = 0;
  std::vector<GrowthViolation> counterexamples;

  std::uint64_t violations() const { return dk_violations + jk_violations + chain_violations; }
  bool ok() const { return violations() == 0; }
};

namespace detail {

inline constexpr std::size_t kMaxCounterexamples = 5;

inline void record(GrowthReport& r, GrowthViolation v) {
  if (r.counterexamples.size() < kMaxCounterexamples) r.counterexamples.push_back(std::move(v));
}

inline int uniform_int(CounterRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline std::string ab(int a, int b) { return "a=" + std::to_string(a) + " b=" + std::to_string(b); }

}  // namespace detail

/// R(a,a) forced Active and D_k(a,b) conditioned: some R(b-s, b-t) with
/// 0 <= s,t <= k-1 must become Active, i.e. R(b-k+1, b-k+1) must.
inline bool check_dk_growth(const StairGeometry& g, const ModelSpec& spec, double q, std::uint64_t seed,
                            std::string* snapshot = nullptr) {
  Lattice l = sample_conditioned_dk(g, q, seed, g.b + 1);
  for (int y = 0; y < g.a; ++y) {
    for (int x = 0; x < g.a; ++x) l.set(x, y, CellState::kActive);
  }
  const auto fp = run_to_fixpoint(l, spec);
  const bool ok = fp.converged && rectangle_active(fp.lattice, g.b - g.k + 1, g.b - g.k + 1);
  if (!ok && snapshot) *snapshot = to_text(l);
  return ok;
}

/// Smallest a for which every seed rectangle R(a-s, a-t), 0 <= s,t <= k-1,
/// has both sides >= k-1. With a shorter side the rows between the seed and
/// row a+1 cannot collect k active cells in their cross, and growth can stop
/// (e.g. k = 3, a = 3, seed R(3,1) with every free cell empty).
inline int skew_min_a(int k) { return std::max(k, 2 * k - 2); }

/// R(a-s, a-t) forced Active and J_k(a,b) conditioned: R(b,b) must become Active.
inline bool check_jk_growth(const SkewGeometry& g, const ModelSpec& spec, double q, int s, int t,
                            std::uint64_t seed, std::string* snapshot = nullptr) {
  if (s < 0 || t < 0 || s >= g.k || t >= g.k) throw std::invalid_argument("check_jk_growth: need 0 <= s,t <= k-1");
  Lattice l = sample_conditioned_jk(g, q, seed, g.b + 1);
  for (int y = 0; y < g.a - t; ++y) {
    for (int x = 0; x < g.a - s; ++x) l.set(x, y, CellState::kActive);
  }
  const auto fp = run_to_fixpoint(l, spec);
  const bool ok = fp.converged && rectangle_active(fp.lattice, g.b, g.b);
  if (!ok && snapshot) *snapshot = to_text(l);
  return ok;
}

/// Chain event conditioned (origin Active, nothing forced): R(L,L) must
/// become Active.
inline bool check_chain_growth(const EventChain& c, const ModelSpec& spec, double q, std::uint64_t seed,
                               std::string* snapshot = nullptr) {
  const Lattice l = sample_conditioned(c, q, seed);
  const auto fp = run_to_fixpoint(l, spec);
  const bool ok = fp.converged && rectangle_active(fp.lattice, c.L, c.L);
  if (!ok && snapshot) *snapshot = to_text(l);
  return ok;
}

/// A random valid chain with the given k and L, at most max_segments
/// skew segments.
inline EventChain random_chain(int k, int L, CounterRng& rng, int max_segments = 3) {
  std::vector<std::pair<int, int>> segs;
  int from = k;
  const int m = detail::uniform_int(rng, 0, max_segments);
  for (int i = 0; i < m; ++i) {
    const int room = L - 1 - from - (k + 2);
    if (room < 0) break;
    const int a = from + detail::uniform_int(rng, 0, std::min(room, 6));
    const int b = a + k + 2 + detail::uniform_int(rng, 0, std::min(L - 1 - a - (k + 2), 8));
    segs.emplace_back(a, b);
    from = b;
  }
  return EventChain(k, L, std::move(segs));
}

/// Random-parameter check of both stair and skew growth guarantees and the
/// chain guarantee. Per trial: q uniform in [0.5, 0.95];
///   stair: a in [k, k+10], b in [a+1, a+14];
///   skew:  a in [a0, a0+10] with a0 = max(k, 2k-2), b in [a+k+2, a+k+14],
///          seed rectangle R(a-s, a-t) with s, t uniform in [0, k-1];
///   chain: L in [k+2, k+40], up to three skew segments.
inline GrowthReport verify_growth_guarantee(int k, std::uint64_t trials, std::uint64_t seed,
                                            std::optional<ModelVariant> variant = std::nullopt) {
  if (trials < 1) throw std::invalid_argument("verify_growth_guarantee: trials must be >= 1");
  GrowthReport r;
  r.k = k;
  r.variant = growth_model(k, 0.5, variant).variant;
  for (std::uint64_t t = 0; t < trials; ++t) {
    CounterRng rng(derive_seed(seed, t));
    const double q = 0.5 + 0.45 * rng.uniform();
    const ModelSpec spec = growth_model(k, q, variant);
    std::string snap;

    const int da = detail::uniform_int(rng, k, k + 10);
    const int db = detail::uniform_int(rng, da + 1, da + 14);
    ++r.dk_trials;
    if (!check_dk_growth(StairGeometry(k, da, db), spec, q, rng.next(), &snap)) {
      ++r.dk_violations;
      detail::record(r, {"D", detail::ab(da, db), t, q, snap});
    }

    // Below a0 a seed rectangle with a side shorter than k-1 can stall
    // (see skew_min_a); the guarantee is checked where it applies.
    const int ja = detail::uniform_int(rng, skew_min_a(k), skew_min_a(k) + 10);
    const int jb = detail::uniform_int(rng, ja + k + 2, ja + k + 14);
    const int s = detail::uniform_int(rng, 0, k - 1);
    const int tt = detail::uniform_int(rng, 0, k - 1);
    ++r.jk_trials;
    if (!check_jk_growth(SkewGeometry(k, ja, jb), spec, q, s, tt, rng.next(), &snap)) {
      ++r.jk_violations;
      detail::record(r, {"J", detail::ab(ja, jb) + " s=" + std::to_string(s) + " t=" + std::to_string(tt), t, q,
                         snap});
    }

    const int L = detail::uniform_int(rng, k + 2, k + 40);
    const EventChain chain = random_chain(k, L, rng);
    ++r.chain_trials;
    if (!check_chain_growth(chain, spec, q, rng.next(), &snap)) {
      ++r.chain_violations;
      std::ostringstream p;
      p << "L=" << L;
      for (const auto& [a, b] : chain.segments) p << " (" << a << "," << b << ")";
      detail::record(r, {"E", p.str(), t, q, snap});
    }
  }
  return r;
}

/// Fixed-geometry versions: every trial uses the same (a, b) with q and
/// the seed rectangle offsets drawn per trial as above.
inline GrowthReport verify_dk_case(int k, int a, int b, std::uint64_t trials, std::uint64_t seed,
                                   std::optional<ModelVariant> variant = std::nullopt) {
  const StairGeometry g(k, a, b);
  GrowthReport r;
  r.k = k;
  r.variant = growth_model(k, 0.5, variant).variant;
  for (std::uint64_t t = 0; t < trials; ++t) {
    CounterRng rng(derive_seed(seed, t));
    const double q = 0.5 + 0.45 * rng.uniform();
    std::string snap;
    ++r.dk_trials;
    if (!check_dk_growth(g, growth_model(k, q, variant), q, rng.next(), &snap)) {
      ++r.dk_violations;
      detail::record(r, {"D", detail::ab(a, b), t, q, snap});
    }
  }
  return r;
}

inline GrowthReport verify_jk_case(int k, int a, int b, std::uint64_t trials, std::uint64_t seed,
                                   std::optional<ModelVariant> variant = std::nullopt) {
  const SkewGeometry g(k, a, b);
  GrowthReport r;
  r.k = k;
  r.variant = growth_model(k, 0.5, variant).variant;
  for (std::uint64_t t = 0; t < trials; ++t) {
    CounterRng rng(derive_seed(seed, t));
    const double q = 0.5 + 0.45 * rng.uniform();
    const int s = detail::uniform_int(rng, 0, k - 1);
    const int tt = detail::uniform_int(rng, 0, k - 1);
    std::string snap;
    ++r.jk_trials;
    if (!check_jk_growth(g, growth_model(k, q, variant), q, s, tt, rng.next(), &snap)) {
      ++r.jk_violations;
      detail::record(r, {"J", detail::ab(a, b) + " s=" + std::to_string(s) + " t=" + std::to_string(tt), t, q,
                         snap});
    }
  }
  return r;
}

// ---- golden cell lists -----------------------------------------------------

/// One line per condition: "<label> <kind> x,y x,y ...", in the order the
/// event lists its conditions.
inline std::string describe_cells(const StairGeometry& g) {
  std::ostringstream o;
  auto emit = [&o](const std::string& what, const Line& l) {
    o << l.label() << ' ' << what;
    for (const auto& c : l.cells()) o << ' ' << c.x << ',' << c.y;
    o << '\n';
  };
  for (const auto& l : g.columns()) emit("nokgap-columns", l);
  for (const auto& l : g.rows()) emit("nokgap-rows", l);
  return o.str();
}

inline std::string describe_cells(const SkewGeometry& g) {
  std::ostringstream o;
  auto emit = [&o](const std::string& what, const Line& l) {
    o << l.label() << ' ' << what;
    for (const auto& c : l.cells()) o << ' ' << c.x << ',' << c.y;
    o << '\n';
  };
  for (const auto& l : g.nonempty_lines()) emit("nonempty", l);
  for (const auto& l : g.empty_rows()) emit("empty", l);
  const Cell c = g.occupied_cell();
  o << "cell occupied " << c.x << ',' << c.y << '\n';
  for (const auto& l : g.gap_columns()) emit("nokgap-columns", l);
  for (const auto& l : g.gap_rows()) emit("nokgap-rows", l);
  return o.str();
}

}  // namespace perckit
