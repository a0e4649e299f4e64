#pragma once

// Truncated power series in q with exact integer coefficients, and the
// partition generating functions built from them.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace perckit {

using BigInt = boost::multiprecision::cpp_int;

/// a_0 + a_1 q + ... + a_N q^N, all arithmetic modulo q^{N+1}.
class IntSeries {
 public:
  explicit IntSeries(std::size_t order) : c_(order + 1) {}

  IntSeries(std::size_t order, std::vector<BigInt> coeffs) : c_(std::move(coeffs)) {
    c_.resize(order + 1);
  }

  static IntSeries one(std::size_t order) { return monomial(order, 0); }

  /// coeff * q^e, or zero if e exceeds the order.
  static IntSeries monomial(std::size_t order, std::size_t e, const BigInt& coeff = 1) {
    IntSeries s(order);
    if (e <= order) s.c_[e] = coeff;
    return s;
  }

  std::size_t order() const noexcept { return c_.size() - 1; }
  const BigInt& operator[](std::size_t n) const { return c_.at(n); }
  BigInt& operator[](std::size_t n) { return c_.at(n); }
  const std::vector<BigInt>& coefficients() const noexcept { return c_; }

  IntSeries& operator+=(const IntSeries& o) {
    same_order(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  IntSeries& operator-=(const IntSeries& o) {
    same_order(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  IntSeries operator-() const {
    IntSeries r(*this);
    for (auto& v : r.c_) v = -v;
    return r;
  }
  friend IntSeries operator+(IntSeries a, const IntSeries& b) { return a += b; }
  friend IntSeries operator-(IntSeries a, const IntSeries& b) { return a -= b; }

  friend IntSeries operator*(const IntSeries& a, const IntSeries& b) {
    a.same_order(b);
    const std::size_t n = a.order();
    IntSeries r(n);
    for (std::size_t i = 0; i <= n; ++i) {
      if (a.c_[i].is_zero()) continue;
      for (std::size_t j = 0; i + j <= n; ++j) {
        if (!b.c_[j].is_zero()) r.c_[i + j] += a.c_[i] * b.c_[j];
      }
    }
    return r;
  }
  IntSeries& operator*=(const IntSeries& o) { return *this = *this * o; }

  friend bool operator==(const IntSeries& a, const IntSeries& b) { return a.c_ == b.c_; }

  /// Multiplicative inverse; the constant term must be +1 or -1.
  IntSeries inverse() const {
    const BigInt& a0 = c_[0];
    if (a0 != 1 && a0 != -1) {
      throw std::domain_error("IntSeries::inverse: constant term must be a unit (+1 or -1)");
    }
    IntSeries b(order());
    b.c_[0] = a0;
    for (std::size_t n = 1; n < c_.size(); ++n) {
      BigInt acc = 0;
      for (std::size_t i = 1; i <= n; ++i) {
        if (!c_[i].is_zero()) acc += c_[i] * b.c_[n - i];
      }
      b.c_[n] = -a0 * acc;
    }
    return b;
  }

  /// *this *= (1 + sign q^m), sign = +1 or -1, m >= 1.
  IntSeries& mul_binomial(std::size_t m, int sign) {
    check_binomial(m, sign);
    for (std::size_t i = c_.size(); i-- > m;) {
      if (sign > 0) c_[i] += c_[i - m]; else c_[i] -= c_[i - m];
    }
    return *this;
  }

  /// *this /= (1 + sign q^m), sign = +1 or -1, m >= 1.
  IntSeries& div_binomial(std::size_t m, int sign) {
    check_binomial(m, sign);
    for (std::size_t i = m; i < c_.size(); ++i) {
      if (sign > 0) c_[i] -= c_[i - m]; else c_[i] += c_[i - m];
    }
    return *this;
  }

  /// Multiplies by q^e, dropping what falls past the order.
  IntSeries shifted(std::size_t e) const {
    IntSeries r(order());
    for (std::size_t i = 0; i + e < c_.size(); ++i) r.c_[i + e] = c_[i];
    return r;
  }

 private:
  void same_order(const IntSeries& o) const {
    if (o.c_.size() != c_.size()) throw std::invalid_argument("IntSeries: truncation orders differ");
  }
  static void check_binomial(std::size_t m, int sign) {
    if (m < 1) throw std::domain_error("IntSeries: binomial factor needs m >= 1");
    if (sign != 1 && sign != -1) throw std::domain_error("IntSeries: sign must be +1 or -1");
  }

  std::vector<BigInt> c_;
};

/// p_k(0..N); k = 0 stands for the unrestricted partition numbers.
struct PartitionTable {
  int k;
  std::vector<BigInt> values;

  const BigInt& operator[](std::size_t n) const { return values.at(n); }
  std::size_t order() const noexcept { return values.size() - 1; }
  IntSeries series() const { return IntSeries(order(), values); }
};

/// p(0..N).
inline PartitionTable partition_count(std::size_t N) {
  std::vector<BigInt> p(N + 1);
  p[0] = 1;
  for (std::size_t v = 1; v <= N; ++v) {
    for (std::size_t n = v; n <= N; ++n) p[n] += p[n - v];
  }
  return {0, std::move(p)};
}

/// Number of partitions of n = 0..N with no k consecutive integers among
/// the parts.
///
/// Parts are added value by value. State r is the length of the run of
/// consecutive values ending at the current one (0 if the current value is
/// unused); runs may never reach k.
inline PartitionTable partition_no_ksequences(int k, std::size_t N) {
  if (k < 1) throw std::domain_error("partition_no_ksequences: k must be >= 1");
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::vector<BigInt>> dp(kk, std::vector<BigInt>(N + 1));
  dp[0][0] = 1;
  std::vector<std::vector<BigInt>> next(kk, std::vector<BigInt>(N + 1));
  std::vector<BigInt> used(N + 1);
  for (std::size_t v = 1; v <= N; ++v) {
    for (auto& row : next) std::fill(row.begin(), row.end(), BigInt(0));
    for (std::size_t r = 0; r < kk; ++r) {
      for (std::size_t n = 0; n <= N; ++n) next[0][n] += dp[r][n];
      if (r + 1 >= kk) continue;
      // used[n] = sum_{m >= 1} dp[r][n - m v]: v taken with multiplicity m.
      std::fill(used.begin(), used.end(), BigInt(0));
      for (std::size_t n = v; n <= N; ++n) {
        used[n] = dp[r][n - v] + used[n - v];
        next[r + 1][n] += used[n];
      }
    }
    std::swap(dp, next);
  }
  std::vector<BigInt> out(N + 1);
  for (std::size_t r = 0; r < kk; ++r) {
    for (std::size_t n = 0; n <= N; ++n) out[n] += dp[r][n];
  }
  return {k, std::move(out)};
}

enum class PochSign { kMinus, kPlus };

/// (a; q^step)_terms with a = -q^base or +q^base according to sign:
/// prod_{j=0}^{terms-1} (1 -/+ q^{base + j*step}) to order N. An empty
/// `terms` means the infinite product.
inline IntSeries q_pochhammer(PochSign sign, std::size_t base, std::size_t step,
                              std::optional<std::size_t> terms, std::size_t N) {
  if (base < 1) throw std::domain_error("q_pochhammer: base exponent must be >= 1");
  if (step < 1) throw std::domain_error("q_pochhammer: step must be >= 1");
  IntSeries r = IntSeries::one(N);
  const int sg = sign == PochSign::kMinus ? -1 : 1;
  for (std::size_t j = 0; !terms || j < *terms; ++j) {
    const std::size_t e = base + j * step;
    if (e > N) break;
    r.mul_binomial(e, sg);
  }
  return r;
}

/// G_k(q) = (1/(q;q)_inf) sum_{r,s>=0} (-1)^s q^{C(k+1,2)(s+r)^2 + (k+1)C(r+1,2)}
///          / ((q^k;q^k)_s (q^{k+1};q^{k+1})_r), to order N.
inline IntSeries andrews_gk_series(int k, std::size_t N) {
  if (k < 1) throw std::domain_error("andrews_gk_series: k must be >= 1");
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t tri = kk * (kk + 1) / 2;
  IntSeries total(N);
  IntSeries inv_r = IntSeries::one(N);  // 1/(q^{k+1};q^{k+1})_r
  for (std::size_t r = 0; tri * r * r <= N; ++r) {
    if (r > 0) inv_r.div_binomial((kk + 1) * r, -1);
    IntSeries inner(N);
    IntSeries inv_s = IntSeries::one(N);  // 1/(q^k;q^k)_s
    for (std::size_t s = 0; tri * (s + r) * (s + r) <= N; ++s) {
      if (s > 0) inv_s.div_binomial(kk * s, -1);
      const std::size_t e = tri * (s + r) * (s + r) + (kk + 1) * r * (r + 1) / 2;
      if (e > N) continue;
      if (s % 2 == 0) inner += inv_s.shifted(e); else inner -= inv_s.shifted(e);
    }
    total += inner * inv_r;
  }
  for (std::size_t m = 1; m <= N; ++m) total.div_binomial(m, -1);
  return total;
}

/// chi(q) = 1 + sum_{n>=1} q^{n^2} / prod_{j=1}^n (1 - q^j + q^{2j}), to order N.
inline IntSeries mock_theta_chi(std::size_t N) {
  IntSeries total = IntSeries::one(N);
  std::vector<BigInt> d(N + 1);  // 1 / prod_{j<=n} (1 - q^j + q^{2j})
  d[0] = 1;
  for (std::size_t n = 1; n * n <= N; ++n) {
    for (std::size_t i = n; i <= N; ++i) {
      d[i] += d[i - n];
      if (i >= 2 * n) d[i] -= d[i - 2 * n];
    }
    for (std::size_t i = 0; i + n * n <= N; ++i) total[i + n * n] += d[i];
  }
  return total;
}

/// (-q^3;q^3)_inf / (q^2;q^2)_inf * chi(q), which should reproduce G_2.
inline IntSeries chi_product_g2(std::size_t N) {
  IntSeries r = mock_theta_chi(N) * q_pochhammer(PochSign::kPlus, 3, 3, std::nullopt, N);
  for (std::size_t m = 2; m <= N; m += 2) r.div_binomial(m, -1);
  return r;
}

/// Truncated sum of the series at a numeric q, in long double.
inline long double evaluate(const IntSeries& s, long double q) {
  long double acc = 0.0L;
  for (std::size_t i = s.order() + 1; i-- > 0;) acc = acc * q + s[i].convert_to<long double>();
  return acc;
}

}  // namespace perckit
