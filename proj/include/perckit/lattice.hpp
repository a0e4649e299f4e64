#pragma once

// Finite-window cellular automata for k-percolation and its local variants.
//
// Cells are Empty, Occupied or Active. Storage is two bit planes (active,
// occupied) of 64-cell words, so each cell costs two bits; cells outside the
// window are permanently Empty.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "perckit/gap_process.hpp"
#include "perckit/rng.hpp"
#include "perckit/special_fn.hpp"

namespace perckit {

enum class CellState : std::uint8_t { kEmpty = 0, kOccupied = 1, kActive = 2 };

enum class ModelVariant { kGlobalK, kLocalK, kLocalModified, kLocalFrobose };

inline constexpr int kMaxK = 16;

inline const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::kGlobalK: return "global";
    case ModelVariant::kLocalK: return "local";
    case ModelVariant::kLocalModified: return "modified";
    case ModelVariant::kLocalFrobose: return "frobose";
  }
  return "?";
}

inline ModelVariant parse_variant(std::string_view s) {
  if (s == "global") return ModelVariant::kGlobalK;
  if (s == "local") return ModelVariant::kLocalK;
  if (s == "modified") return ModelVariant::kLocalModified;
  if (s == "frobose") return ModelVariant::kLocalFrobose;
  throw std::invalid_argument("unknown model '" + std::string(s) + "' (global|local|modified|frobose)");
}

struct ModelSpec {
  ModelVariant variant = ModelVariant::kLocalK;
  int k = 2;
  double q = 0.5;  // probability that a cell is Empty

  static ModelSpec global(int k, double q) { return checked({ModelVariant::kGlobalK, k, q}); }
  static ModelSpec local(int k, double q) { return checked({ModelVariant::kLocalK, k, q}); }
  static ModelSpec modified(double q) { return checked({ModelVariant::kLocalModified, 1, q}); }
  static ModelSpec frobose(double q) { return checked({ModelVariant::kLocalFrobose, 1, q}); }

  /// Builds a spec from a variant name; the k = 1 variants ignore k.
  static ModelSpec make(ModelVariant v, int k, double q) {
    if (v == ModelVariant::kLocalModified || v == ModelVariant::kLocalFrobose) k = 1;
    return checked({v, k, q});
  }

  bool is_local() const noexcept { return variant != ModelVariant::kGlobalK; }

  void validate() const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("ModelSpec: q must lie in [0,1]");
    switch (variant) {
      case ModelVariant::kGlobalK:
      case ModelVariant::kLocalK:
        if (k < 2 || k > kMaxK) {
          throw std::domain_error("ModelSpec: global and local k-percolation need 2 <= k <= " +
                                  std::to_string(kMaxK));
        }
        break;
      case ModelVariant::kLocalModified:
      case ModelVariant::kLocalFrobose:
        if (k != 1) throw std::domain_error("ModelSpec: modified and Frobose models have k = 1");
        break;
    }
  }

 private:
  static ModelSpec checked(ModelSpec s) {
    s.validate();
    return s;
  }
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Inclusive cell rectangle [x0,x1] x [y0,y1].
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const noexcept { return x1 - x0 + 1; }
  int height() const noexcept { return y1 - y0 + 1; }
  bool contains(Point p) const noexcept { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  bool contains(const Rect& r) const noexcept {
    return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

class Lattice {
 public:
  static constexpr std::uint32_t kNever = std::numeric_limits<std::uint32_t>::max();

  Lattice(int width, int height) : Lattice(width, height, Point{width / 2, height / 2}) {}

  Lattice(int width, int height, Point origin)
      : w_(width), h_(height), origin_(origin) {
    if (width < 1 || height < 1) throw std::invalid_argument("Lattice: dimensions must be >= 1");
    if (!in_bounds(origin.x, origin.y)) throw std::invalid_argument("Lattice: origin outside the window");
    wpr_ = (w_ + 63) / 64;
    active_.assign(static_cast<std::size_t>(wpr_) * h_, 0);
    occupied_.assign(active_.size(), 0);
    stamps_.assign(static_cast<std::size_t>(w_) * h_, kNever);
    const int tail = w_ % 64;
    last_mask_ = tail == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << tail) - 1;
  }

  int width() const noexcept { return w_; }
  int height() const noexcept { return h_; }
  Point origin() const noexcept { return origin_; }
  std::uint32_t generation() const noexcept { return generation_; }
  int words_per_row() const noexcept { return wpr_; }

  bool in_bounds(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < w_ && y < h_; }

  CellState at(int x, int y) const {
    check(x, y);
    const std::size_t i = word(x, y);
    const std::uint64_t b = bit(x);
    if (active_[i] & b) return CellState::kActive;
    if (occupied_[i] & b) return CellState::kOccupied;
    return CellState::kEmpty;
  }

  /// Sets a cell; Active cells are stamped with the current generation.
  void set(int x, int y, CellState s) {
    check(x, y);
    const std::size_t i = word(x, y);
    const std::uint64_t b = bit(x);
    active_[i] &= ~b;
    occupied_[i] &= ~b;
    if (s == CellState::kActive) active_[i] |= b;
    if (s == CellState::kOccupied) occupied_[i] |= b;
    stamps_[cell(x, y)] = s == CellState::kActive ? generation_ : kNever;
  }

  bool active(int x, int y) const noexcept {
    return in_bounds(x, y) && (active_[word(x, y)] & bit(x));
  }
  bool nonempty(int x, int y) const noexcept {
    return in_bounds(x, y) && ((active_[word(x, y)] | occupied_[word(x, y)]) & bit(x));
  }

  /// Generation at which the cell became Active, or kNever.
  std::uint32_t stamp(int x, int y) const {
    check(x, y);
    return stamps_[cell(x, y)];
  }

  std::size_t count(CellState s) const noexcept {
    std::size_t a = 0, o = 0;
    for (auto v : active_) a += static_cast<std::size_t>(std::popcount(v));
    for (auto v : occupied_) o += static_cast<std::size_t>(std::popcount(v));
    if (s == CellState::kActive) return a;
    if (s == CellState::kOccupied) return o;
    return static_cast<std::size_t>(w_) * h_ - a - o;
  }

  /// Same window, origin and cell states (stamps and generation ignored).
  bool same_cells(const Lattice& o) const noexcept {
    return w_ == o.w_ && h_ == o.h_ && origin_ == o.origin_ && active_ == o.active_ &&
           occupied_ == o.occupied_;
  }

  // Raw planes for the packed update.
  const std::vector<std::uint64_t>& active_plane() const noexcept { return active_; }
  const std::vector<std::uint64_t>& occupied_plane() const noexcept { return occupied_; }
  std::uint64_t word_mask(int w) const noexcept { return w == wpr_ - 1 ? last_mask_ : ~std::uint64_t{0}; }

  /// Turns the given cells Active at generation()+1 and advances the generation.
  void apply_activations(const std::vector<std::uint64_t>& fresh) {
    ++generation_;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      std::uint64_t m = fresh[i];
      if (!m) continue;
      active_[i] |= m;
      occupied_[i] &= ~m;
      const int y = static_cast<int>(i / wpr_);
      const int base = static_cast<int>(i % wpr_) * 64;
      while (m) {
        const int b = std::countr_zero(m);
        stamps_[cell(base + b, y)] = generation_;
        m &= m - 1;
      }
    }
  }

  void bump_generation() noexcept { ++generation_; }

 private:
  void check(int x, int y) const {
    if (!in_bounds(x, y)) throw std::out_of_range("Lattice: cell outside the window");
  }
  std::size_t word(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * wpr_ + static_cast<std::size_t>(x / 64);
  }
  static std::uint64_t bit(int x) noexcept { return std::uint64_t{1} << (x % 64); }
  std::size_t cell(int x, int y) const noexcept { return static_cast<std::size_t>(y) * w_ + x; }

  int w_, h_;
  Point origin_;
  int wpr_ = 0;
  std::uint64_t last_mask_ = 0;
  std::uint32_t generation_ = 0;
  std::vector<std::uint64_t> active_, occupied_;
  std::vector<std::uint32_t> stamps_;
};

/// Initial configuration. Localized: the origin is Active and every other
/// cell Occupied, each independently with probability 1-q, else Empty.
/// Otherwise every cell is Active with probability 1-q. Cells are drawn in
/// row-major order from one stream, so configurations at different q with
/// the same seed are monotonically coupled.
inline Lattice sample_initial(const ModelSpec& spec, int width, int height, std::uint64_t seed,
                              bool localized, std::optional<Point> origin = std::nullopt) {
  spec.validate();
  if (localized && !spec.is_local()) {
    throw std::invalid_argument("sample_initial: localized sampling needs a local model");
  }
  Lattice l = origin ? Lattice(width, height, *origin) : Lattice(width, height);
  const std::uint64_t thr = u32_threshold(spec.q);
  CounterRng rng(seed);
  const Point o = l.origin();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool empty = (rng.next() >> 32) < thr;
      if (empty) continue;
      if (!localized || (x == o.x && y == o.y)) {
        l.set(x, y, CellState::kActive);
      } else {
        l.set(x, y, CellState::kOccupied);
      }
    }
  }
  return l;
}

namespace detail {

// Bit x of the result is bit x+dx of the row (0 outside the window).
inline std::uint64_t hword(const std::uint64_t* row, int w, int wpr, int dx) noexcept {
  if (!row) return 0;
  if (dx == 0) return row[w];
  if (dx > 0) {
    const std::uint64_t lo = row[w] >> dx;
    const std::uint64_t hi = w + 1 < wpr ? row[w + 1] << (64 - dx) : 0;
    return lo | hi;
  }
  const int d = -dx;
  const std::uint64_t lo = row[w] << d;
  const std::uint64_t hi = w > 0 ? row[w - 1] >> (64 - d) : 0;
  return lo | hi;
}

inline void check_model_lattice(const Lattice& l, const ModelSpec& spec) {
  spec.validate();
  if (!spec.is_local() && l.count(CellState::kOccupied) != 0) {
    throw std::invalid_argument("global k-percolation lattices may not contain Occupied cells");
  }
}

// Packed computation of the cells that activate in one synchronous step.
// Returns whether any cell activates.
inline bool compute_activations(const Lattice& l, const ModelSpec& spec, std::vector<std::uint64_t>& out) {
  const int wpr = l.words_per_row();
  const int h = l.height();
  const auto& A = l.active_plane();
  const auto& O = l.occupied_plane();
  out.assign(A.size(), 0);
  auto arow = [&](int y) -> const std::uint64_t* {
    return (y >= 0 && y < h) ? A.data() + static_cast<std::size_t>(y) * wpr : nullptr;
  };
  const int k = spec.k;
  const bool global = spec.variant == ModelVariant::kGlobalK;
  const int bits = std::bit_width(static_cast<unsigned>(4 * std::max(k - 1, 1)));
  std::uint64_t cnt[8];
  bool any = false;

  for (int y = 0; y < h; ++y) {
    const std::uint64_t* r0 = arow(y);
    for (int w = 0; w < wpr; ++w) {
      const std::size_t i = static_cast<std::size_t>(y) * wpr + w;
      const std::uint64_t mask = l.word_mask(w);
      const std::uint64_t act = A[i];
      // In the global model every non-active cell follows the threshold rule.
      const std::uint64_t occ = global ? 0 : O[i];
      const std::uint64_t emp = ~act & ~occ & mask;
      std::uint64_t fresh = 0;

      switch (spec.variant) {
        case ModelVariant::kGlobalK:
        case ModelVariant::kLocalK: {
          if (emp) {
            // Bit-sliced count of Active cells in the (k-1)-cross, then >= k.
            std::fill(cnt, cnt + bits, 0);
            auto add = [&](std::uint64_t x) {
              for (int b = 0; b < bits && x; ++b) {
                const std::uint64_t c = cnt[b] & x;
                cnt[b] ^= x;
                x = c;
              }
            };
            for (int v = 1; v < k; ++v) {
              add(hword(r0, w, wpr, v));
              add(hword(r0, w, wpr, -v));
              if (const auto* r = arow(y + v)) add(r[w]);
              if (const auto* r = arow(y - v)) add(r[w]);
            }
            std::uint64_t gt = 0, eq = ~std::uint64_t{0};
            for (int b = bits - 1; b >= 0; --b) {
              if ((k >> b) & 1) {
                eq &= cnt[b];
              } else {
                gt |= eq & cnt[b];
                eq &= ~cnt[b];
              }
            }
            if (k >> bits) gt = eq = 0;  // k exceeds the largest possible count
            fresh |= emp & (gt | eq);
          }
          if (occ) {
            // Any Active cell within l1-distance k.
            std::uint64_t near = 0;
            for (int dy = -k; dy <= k && (occ & ~near) != 0; ++dy) {
              const auto* r = arow(y + dy);
              if (!r) continue;
              const int reach = k - std::abs(dy);
              for (int dx = -reach; dx <= reach; ++dx) near |= hword(r, w, wpr, dx);
            }
            fresh |= occ & near;
          }
          break;
        }
        case ModelVariant::kLocalModified: {
          const auto* up = arow(y + 1);
          const auto* dn = arow(y - 1);
          const std::uint64_t vert = (up ? up[w] : 0) | (dn ? dn[w] : 0);
          const std::uint64_t horz = hword(r0, w, wpr, 1) | hword(r0, w, wpr, -1);
          fresh |= emp & vert & horz;
          std::uint64_t near = 0;
          for (int dy = -1; dy <= 1; ++dy) {
            const auto* r = arow(y + dy);
            for (int dx = -1; dx <= 1; ++dx) near |= hword(r, w, wpr, dx);
          }
          fresh |= occ & near;
          break;
        }
        case ModelVariant::kLocalFrobose: {
          std::uint64_t corner = 0;
          for (int sy : {-1, 1}) {
            const auto* r = arow(y + sy);
            if (!r) continue;
            for (int sx : {-1, 1}) {
              corner |= r[w] & hword(r0, w, wpr, sx) & hword(r, w, wpr, sx);
            }
          }
          fresh |= emp & corner;
          const auto* up = arow(y + 1);
          const auto* dn = arow(y - 1);
          const std::uint64_t near = (up ? up[w] : 0) | (dn ? dn[w] : 0) | hword(r0, w, wpr, 1) |
                                     hword(r0, w, wpr, -1);
          fresh |= occ & near;
          break;
        }
      }
      fresh &= mask & ~act;
      out[i] = fresh;
      any = any || fresh != 0;
    }
  }
  return any;
}

}  // namespace detail

/// One synchronous generation. Returns whether any cell activated.
inline bool step(Lattice& l, const ModelSpec& spec) {
  detail::check_model_lattice(l, spec);
  std::vector<std::uint64_t> fresh;
  if (!detail::compute_activations(l, spec, fresh)) return false;
  l.apply_activations(fresh);
  return true;
}

struct FixpointResult {
  Lattice lattice;
  std::size_t steps = 0;  // productive generations
  bool converged = false;
};

/// Iterates step until nothing changes or max_steps productive steps have
/// been taken. Each productive step activates at least one cell, so the
/// default budget of width*height always suffices.
inline FixpointResult run_to_fixpoint(Lattice l, const ModelSpec& spec,
                                      std::optional<std::size_t> max_steps = std::nullopt) {
  detail::check_model_lattice(l, spec);
  const std::size_t budget =
      max_steps.value_or(static_cast<std::size_t>(l.width()) * static_cast<std::size_t>(l.height()));
  std::vector<std::uint64_t> fresh;
  std::size_t steps = 0;
  for (;;) {
    if (!detail::compute_activations(l, spec, fresh)) return {std::move(l), steps, true};
    if (steps >= budget) return {std::move(l), steps, false};
    l.apply_activations(fresh);
    ++steps;
  }
}

namespace reference {

// Direct per-cell transcription of the rules, for differential testing.
inline bool activates(const Lattice& l, const ModelSpec& spec, int x, int y) {
  const CellState c = l.at(x, y);
  if (c == CellState::kActive) return false;
  const int k = spec.k;
  const bool occupied = c == CellState::kOccupied && spec.is_local();
  switch (spec.variant) {
    case ModelVariant::kGlobalK:
    case ModelVariant::kLocalK: {
      if (occupied) {
        for (int dy = -k; dy <= k; ++dy) {
          for (int dx = -k; dx <= k; ++dx) {
            if (std::abs(dx) + std::abs(dy) <= k && l.active(x + dx, y + dy)) return true;
          }
        }
        return false;
      }
      int n = 0;
      for (int v = 1; v < k; ++v) {
        n += l.active(x + v, y) + l.active(x - v, y) + l.active(x, y + v) + l.active(x, y - v);
      }
      return n >= k;
    }
    case ModelVariant::kLocalModified: {
      if (occupied) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (l.active(x + dx, y + dy)) return true;
          }
        }
        return false;
      }
      return (l.active(x, y + 1) || l.active(x, y - 1)) && (l.active(x + 1, y) || l.active(x - 1, y));
    }
    case ModelVariant::kLocalFrobose: {
      if (occupied) {
        return l.active(x + 1, y) || l.active(x - 1, y) || l.active(x, y + 1) || l.active(x, y - 1);
      }
      for (int sy : {-1, 1}) {
        for (int sx : {-1, 1}) {
          if (l.active(x, y + sy) && l.active(x + sx, y) && l.active(x + sx, y + sy)) return true;
        }
      }
      return false;
    }
  }
  return false;
}

inline bool step(Lattice& l, const ModelSpec& spec) {
  std::vector<Point> fresh;
  for (int y = 0; y < l.height(); ++y) {
    for (int x = 0; x < l.width(); ++x) {
      if (activates(l, spec, x, y)) fresh.push_back({x, y});
    }
  }
  if (fresh.empty()) return false;
  l.bump_generation();
  for (auto p : fresh) l.set(p.x, p.y, CellState::kActive);
  return true;
}

enum class SweepOrder { kRowMajor, kColumnMajor };

/// Asynchronous closure: cells are updated in place in the given sweep
/// order until a full sweep changes nothing.
inline void closure_in_place(Lattice& l, const ModelSpec& spec, SweepOrder order) {
  bool changed = true;
  while (changed) {
    changed = false;
    const int outer = order == SweepOrder::kRowMajor ? l.height() : l.width();
    const int inner = order == SweepOrder::kRowMajor ? l.width() : l.height();
    for (int a = 0; a < outer; ++a) {
      for (int b = 0; b < inner; ++b) {
        const int x = order == SweepOrder::kRowMajor ? b : a;
        const int y = order == SweepOrder::kRowMajor ? a : b;
        if (activates(l, spec, x, y)) {
          l.set(x, y, CellState::kActive);
          changed = true;
        }
      }
    }
  }
}

}  // namespace reference

/// Every cell Active.
inline bool spans(const FixpointResult& r) {
  if (!r.converged) throw std::logic_error("spans: lattice has not reached its fixpoint");
  return r.lattice.count(CellState::kActive) ==
         static_cast<std::size_t>(r.lattice.width()) * static_cast<std::size_t>(r.lattice.height());
}

/// Window edges that do not pass through the origin.
struct FarEdges {
  bool left, right, bottom, top;
};

inline FarEdges far_edges(const Lattice& l) {
  const Point o = l.origin();
  return {o.x != 0, o.x != l.width() - 1, o.y != 0, o.y != l.height() - 1};
}

inline bool on_far_edge(const Lattice& l, const FarEdges& e, int x, int y) {
  return (e.left && x == 0) || (e.right && x == l.width() - 1) || (e.bottom && y == 0) ||
         (e.top && y == l.height() - 1);
}

/// Whether activity spreading from the origin reaches a far edge of the
/// window. The search follows Active cells within the model's interaction
/// range whose activation stamps do not decrease, so only cells whose
/// activation the origin's cluster could have caused are followed.
inline bool reaches_boundary(const FixpointResult& r, const ModelSpec& spec) {
  if (!r.converged) throw std::logic_error("reaches_boundary: lattice has not reached its fixpoint");
  const Lattice& l = r.lattice;
  const Point o = l.origin();
  if (!l.active(o.x, o.y)) return false;
  const FarEdges e = far_edges(l);
  bool any = false;
  for (int y = 0; y < l.height() && !any; ++y) {
    for (int x = 0; x < l.width() && !any; ++x) {
      if (on_far_edge(l, e, x, y) && l.active(x, y)) any = true;
    }
  }
  if (!any) return false;

  std::vector<Point> offsets;
  const int k = spec.k;
  switch (spec.variant) {
    case ModelVariant::kGlobalK:
      for (int v = 1; v < k; ++v) offsets.insert(offsets.end(), {{v, 0}, {-v, 0}, {0, v}, {0, -v}});
      break;
    case ModelVariant::kLocalK:
      for (int dy = -k; dy <= k; ++dy) {
        for (int dx = -k; dx <= k; ++dx) {
          if ((dx || dy) && std::abs(dx) + std::abs(dy) <= k) offsets.push_back({dx, dy});
        }
      }
      break;
    case ModelVariant::kLocalModified:
    case ModelVariant::kLocalFrobose:
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx || dy) offsets.push_back({dx, dy});
        }
      }
      break;
  }
  std::vector<char> seen(static_cast<std::size_t>(l.width()) * l.height(), 0);
  auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * l.width() + x; };
  std::deque<Point> queue{o};
  seen[idx(o.x, o.y)] = 1;
  while (!queue.empty()) {
    const Point c = queue.front();
    queue.pop_front();
    if (on_far_edge(l, e, c.x, c.y)) return true;
    const std::uint32_t sc = l.stamp(c.x, c.y);
    for (const Point d : offsets) {
      const int x = c.x + d.x, y = c.y + d.y;
      if (!l.active(x, y) || seen[idx(x, y)] || l.stamp(x, y) < sc) continue;
      seen[idx(x, y)] = 1;
      queue.push_back({x, y});
    }
  }
  return false;
}

namespace detail {

// Nonempty-cell prefix sums along rows and columns, for O(1) segment tests.
class NonemptyIndex {
 public:
  explicit NonemptyIndex(const Lattice& l) : w_(l.width()), h_(l.height()) {
    rows_.assign(static_cast<std::size_t>(h_) * (w_ + 1), 0);
    cols_.assign(static_cast<std::size_t>(w_) * (h_ + 1), 0);
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        const int v = l.nonempty(x, y) ? 1 : 0;
        rows_[row_at(y, x + 1)] = rows_[row_at(y, x)] + v;
        cols_[col_at(x, y + 1)] = cols_[col_at(x, y)] + v;
      }
    }
  }
  // Cells (x0..x1, y) contain a nonempty cell.
  bool row_nonempty(int y, int x0, int x1) const { return rows_[row_at(y, x1 + 1)] > rows_[row_at(y, x0)]; }
  bool col_nonempty(int x, int y0, int y1) const { return cols_[col_at(x, y1 + 1)] > cols_[col_at(x, y0)]; }

 private:
  std::size_t row_at(int y, int x) const { return static_cast<std::size_t>(y) * (w_ + 1) + x; }
  std::size_t col_at(int x, int y) const { return static_cast<std::size_t>(x) * (h_ + 1) + y; }
  int w_, h_;
  std::vector<int> rows_, cols_;
};

// r extends a rectangle that has no k-gaps by the flagged sides. Lines of
// the old rectangle only gain cells, so only runs of empty lines starting
// at a new side can reach length k.
inline bool extension_valid(const NonemptyIndex& idx, const Rect& r, int k, bool l, bool rt, bool b, bool t) {
  auto run = [k](auto empty_at) {
    int n = 0;
    while (n < k && empty_at(n)) ++n;
    return n < k;
  };
  if (t && !run([&](int i) { return r.y1 - i >= r.y0 && !idx.row_nonempty(r.y1 - i, r.x0, r.x1); })) return false;
  if (b && !run([&](int i) { return r.y0 + i <= r.y1 && !idx.row_nonempty(r.y0 + i, r.x0, r.x1); })) return false;
  if (rt && !run([&](int i) { return r.x1 - i >= r.x0 && !idx.col_nonempty(r.x1 - i, r.y0, r.y1); })) return false;
  if (l && !run([&](int i) { return r.x0 + i <= r.x1 && !idx.col_nonempty(r.x0 + i, r.y0, r.y1); })) return false;
  return true;
}

}  // namespace detail

/// Maximal rectangle growth sequence of an initial configuration, restricted
/// to the window. Each step takes the span of every valid shell extension.
/// Empty if the origin is not Active.
inline std::vector<Rect> extract_growth_sequence(const Lattice& initial, const ModelSpec& spec) {
  spec.validate();
  if (!spec.is_local()) throw std::invalid_argument("extract_growth_sequence: needs a local model");
  const Point o = initial.origin();
  std::vector<Rect> seq;
  if (!initial.active(o.x, o.y)) return seq;
  const detail::NonemptyIndex idx(initial);
  Rect r{o.x, o.y, o.x, o.y};
  seq.push_back(r);
  for (;;) {
    bool jl = false, jr = false, jb = false, jt = false;
    for (int combo = 1; combo < 16; ++combo) {
      const bool l = combo & 1, rt = combo & 2, b = combo & 4, t = combo & 8;
      const Rect n{r.x0 - l, r.y0 - b, r.x1 + rt, r.y1 + t};
      if (n.x0 < 0 || n.y0 < 0 || n.x1 >= initial.width() || n.y1 >= initial.height()) continue;
      if ((l && jl) + (rt && jr) + (b && jb) + (t && jt) == l + rt + b + t) continue;  // nothing new
      if (detail::extension_valid(idx, n, spec.k, l, rt, b, t)) {
        jl |= l;
        jr |= rt;
        jb |= b;
        jt |= t;
      }
    }
    if (!(jl || jr || jb || jt)) break;
    r = Rect{r.x0 - jl, r.y0 - jb, r.x1 + jr, r.y1 + jt};
    seq.push_back(r);
  }
  return seq;
}

/// Finite-window proxy for a good configuration: the maximal growth
/// sequence reaches a far edge of the window.
inline bool is_good_configuration(const Lattice& initial, const ModelSpec& spec) {
  const auto seq = extract_growth_sequence(initial, spec);
  if (seq.empty()) return false;
  const Rect& r = seq.back();
  const FarEdges e = far_edges(initial);
  return (e.left && r.x0 == 0) || (e.right && r.x1 == initial.width() - 1) || (e.bottom && r.y0 == 0) ||
         (e.top && r.y1 == initial.height() - 1);
}

// Snapshots. Text: one line per row starting with row 0, 'A' Active,
// 'o' Occupied, '.' Empty. Binary: "PKL1", u32 width, u32 height (little
// endian), then 2-bit cells row-major, four per byte, low bits first.

inline std::string to_text(const Lattice& l) {
  std::string s;
  s.reserve(static_cast<std::size_t>(l.width() + 1) * l.height());
  for (int y = 0; y < l.height(); ++y) {
    for (int x = 0; x < l.width(); ++x) {
      const CellState c = l.at(x, y);
      s.push_back(c == CellState::kActive ? 'A' : c == CellState::kOccupied ? 'o' : '.');
    }
    s.push_back('\n');
  }
  return s;
}

inline Lattice from_text(std::string_view text, std::optional<Point> origin = std::nullopt) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw std::invalid_argument("from_text: empty grid");
  const int w = static_cast<int>(rows[0].size());
  const int h = static_cast<int>(rows.size());
  Lattice l = origin ? Lattice(w, h, *origin) : Lattice(w, h);
  for (int y = 0; y < h; ++y) {
    if (static_cast<int>(rows[y].size()) != w) throw std::invalid_argument("from_text: ragged grid");
    for (int x = 0; x < w; ++x) {
      switch (rows[y][x]) {
        case 'A': l.set(x, y, CellState::kActive); break;
        case 'o': l.set(x, y, CellState::kOccupied); break;
        case '.': break;
        default: throw std::invalid_argument("from_text: unknown cell character");
      }
    }
  }
  return l;
}

inline void write_binary(std::ostream& os, const Lattice& l) {
  auto put32 = [&os](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  os.write("PKL1", 4);
  put32(static_cast<std::uint32_t>(l.width()));
  put32(static_cast<std::uint32_t>(l.height()));
  std::uint8_t byte = 0;
  int fill = 0;
  for (int y = 0; y < l.height(); ++y) {
    for (int x = 0; x < l.width(); ++x) {
      byte |= static_cast<std::uint8_t>(static_cast<unsigned>(l.at(x, y)) << (2 * fill));
      if (++fill == 4) {
        os.put(static_cast<char>(byte));
        byte = 0;
        fill = 0;
      }
    }
  }
  if (fill) os.put(static_cast<char>(byte));
}

inline Lattice read_binary(std::istream& is, std::optional<Point> origin = std::nullopt) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "PKL1", 4) != 0) {
    throw std::invalid_argument("read_binary: bad magic");
  }
  auto get32 = [&is]() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const int c = is.get();
      if (c == EOF) throw std::invalid_argument("read_binary: truncated header");
      v |= static_cast<std::uint32_t>(c & 0xff) << (8 * i);
    }
    return v;
  };
  const auto w = static_cast<int>(get32());
  const auto h = static_cast<int>(get32());
  Lattice l = origin ? Lattice(w, h, *origin) : Lattice(w, h);
  int fill = 4;
  int byte = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (fill == 4) {
        byte = is.get();
        if (byte == EOF) throw std::invalid_argument("read_binary: truncated cells");
        fill = 0;
      }
      const int v = (byte >> (2 * fill++)) & 3;
      if (v > 2) throw std::invalid_argument("read_binary: invalid cell code");
      if (v) l.set(x, y, static_cast<CellState>(v));
    }
  }
  return l;
}

/// exp(-(a-(k-1)) g_k(bs)) for a <= b, and the transposed form otherwise:
/// upper bound on the chance that an a x b rectangle has no k consecutive
/// empty columns and no k consecutive empty rows.
inline double rectangle_no_kgaps_bound(int k, int a, int b, double s) {
  const int lo = std::min(a, b), hi = std::max(a, b);
  if (lo - (k - 1) <= 0) return 1.0;
  return std::exp(-(lo - (k - 1)) * FkEvaluator(k).g(hi * s));
}

/// Monte Carlo frequency of that event, cells Empty with probability q.
inline McEstimate rectangle_no_kgaps_mc(int k, int a, int b, double q, std::uint64_t trials, std::uint64_t seed,
                                        unsigned workers = 0) {
  if (k < 1 || a < 1 || b < 1 || a > 64 || b > 64) {
    throw std::invalid_argument("rectangle_no_kgaps_mc: need k >= 1 and 1 <= a, b <= 64");
  }
  if (trials < 1) throw std::invalid_argument("rectangle_no_kgaps_mc: trials must be >= 1");
  const std::uint64_t thr = u32_threshold(q);
  const std::uint64_t full = a == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << a) - 1;
  auto has_run = [k](std::uint64_t m) {
    for (int i = 1; i < k && m; ++i) m &= m >> 1;
    return m != 0;
  };
  const std::uint64_t ok = parallel_count(trials, workers, [&](std::uint64_t first, std::uint64_t last) {
    std::uint64_t count = 0;
    for (std::uint64_t t = first; t < last; ++t) {
      CounterRng rng(derive_seed(seed, t));
      std::uint64_t col_empty = full, row_empty = 0, word = 0;
      int avail = 0;
      for (int y = 0; y < b; ++y) {
        std::uint64_t empty = 0;
        for (int x = 0; x < a; ++x) {
          if (avail == 0) {
            word = rng.next();
            avail = 2;
          }
          const std::uint64_t u = avail == 2 ? word >> 32 : word & 0xffffffffULL;
          --avail;
          if (u < thr) empty |= std::uint64_t{1} << x;
        }
        col_empty &= empty;
        if (empty == full) row_empty |= std::uint64_t{1} << y;
      }
      if (!has_run(col_empty) && !has_run(row_empty)) ++count;
    }
    return count;
  });
  return make_estimate(ok, trials);
}

struct RectangleKgapCheck {
  int k = 0, a = 0, b = 0;
  double s = 0.0;
  double bound = 0.0;
  McEstimate mc;
  double stderr_at_bound = 0.0;
  bool holds = false;
};

/// One-sided z-test of the rectangle bound: the estimate may exceed the
/// bound by at most 4 binomial standard errors evaluated at the bound
/// itself. The sample standard error vanishes when every trial succeeds,
/// which happens routinely when the bound is within 1e-4 of one.
inline RectangleKgapCheck check_rectangle_kgap_bound(int k, int a, int b, double s, std::uint64_t trials,
                                                     std::uint64_t seed, unsigned workers = 0) {
  RectangleKgapCheck c{k, a, b, s, rectangle_no_kgaps_bound(k, a, b, s), {}, 0.0, false};
  c.mc = rectangle_no_kgaps_mc(k, a, b, std::exp(-s), trials, seed, workers);
  c.stderr_at_bound = std::sqrt(c.bound * (1.0 - c.bound) / static_cast<double>(trials));
  c.holds = c.mc.estimate <= c.bound + 4.0 * c.stderr_at_bound;
  return c;
}

}  // namespace perckit
