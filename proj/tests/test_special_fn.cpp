#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "perckit/special_fn.hpp"

using perckit::FkEvaluator;

namespace {

// Closed forms for the two explicitly solvable cases.
double f1_closed(double x) { return 1.0 - x; }
double f2_closed(double x) { return (1.0 - x + std::sqrt((1.0 - x) * (1.0 + 3.0 * x))) / 2.0; }

// -log f_2(e^{-z}) without cancellation: 1 - f_2 = 2x^2 / (1 + x + sqrt((1-x)(1+3x))).
double g2_closed(double z) {
  const double x = std::exp(-z);
  const double one_minus = 2.0 * x * x / (1.0 + x + std::sqrt((1.0 - x) * (1.0 + 3.0 * x)));
  return -std::log1p(-one_minus);
}

std::vector<double> sorted_uniform(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(FkEval, Examples) {
  EXPECT_NEAR(perckit::fk_eval(1, 0.3), 0.7, 1e-15);
  EXPECT_EQ(perckit::fk_eval(5, 0.0), 1.0);
  EXPECT_EQ(perckit::fk_eval(5, 1.0), 0.0);
  EXPECT_NEAR(perckit::fk_eval(2, 0.5), f2_closed(0.5), 1e-14);
  EXPECT_NEAR(perckit::fk_eval(2, 0.5), 0.8090169943749474, 1e-14);
}

TEST(FkEval, FixedPointIsExact) {
  for (int k = 1; k <= 8; ++k) {
    const double xs = k / (k + 1.0);
    EXPECT_EQ(perckit::fk_eval(k, xs), xs);
  }
}

TEST(FkEval, DomainErrors) {
  EXPECT_THROW(perckit::fk_eval(2, -0.1), std::domain_error);
  EXPECT_THROW(perckit::fk_eval(2, 1.5), std::domain_error);
  EXPECT_THROW(perckit::fk_eval(2, 0.5, 0.0), std::domain_error);
  EXPECT_THROW(FkEvaluator(0), std::domain_error);
}

TEST(FkEval, MatchesClosedForms) {
  const FkEvaluator e1(1), e2(2);
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    ASSERT_NEAR(e1.f(x), f1_closed(x), 1e-12) << x;
    ASSERT_NEAR(e2.f(x), f2_closed(x), 1e-12) << x;
  }
}

TEST(FkEval, FunctionalEquationResidualAndLongForm) {
  for (int k = 1; k <= 8; ++k) {
    const FkEvaluator e(k);
    for (int i = 0; i <= 10000; ++i) {
      const double x = i / 10000.0;
      const double f = e.f(x);
      ASSERT_GE(f, 0.0);
      ASSERT_LE(f, 1.0);
      const double res = std::pow(f, k) - std::pow(f, k + 1) - (std::pow(x, k) - std::pow(x, k + 1));
      ASSERT_LE(std::abs(res), 1e-12) << "k=" << k << " x=" << x;
      double rhs = 0.0;
      for (int j = 0; j < k; ++j) rhs += std::pow(f, k - 1 - j) * std::pow(x, j);
      ASSERT_NEAR(std::pow(f, k), (1.0 - x) * rhs, 1e-10) << "k=" << k << " x=" << x;
    }
  }
}

TEST(FkEval, IsDecreasingInvolution) {
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    double prev = 2.0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = i / 1000.0;
      const double f = e.f(x);
      ASSERT_LE(f, prev);
      prev = f;
      // f is flat to order x^k near 0, so only check the involution where it is well conditioned.
      if (x >= 0.05 && x <= 0.95) {
        EXPECT_NEAR(e.f(f), x, 1e-9) << "k=" << k << " x=" << x;
      }
    }
  }
}

TEST(GkEval, Examples) {
  EXPECT_NEAR(perckit::gk_eval(1, 1.0), -std::log(1.0 - std::exp(-1.0)), 1e-14);
  EXPECT_NEAR(perckit::gk_eval(1, 1.0), 0.45867514538708193, 1e-14);
  EXPECT_NEAR(perckit::gk_eval(2, 10.0) / std::exp(-20.0), 1.0, 0.05);
  EXPECT_NEAR(perckit::gk_eval(3, 1e-6) / (std::log(1e6) / 3.0), 1.0, 0.05);
  EXPECT_THROW(perckit::gk_eval(2, 0.0), std::domain_error);
  EXPECT_THROW(perckit::gk_eval(2, -1.0), std::domain_error);
}

TEST(GkEval, ClosedFormK1K2AcrossScales) {
  const FkEvaluator e1(1), e2(2);
  for (double z : {1e-300, 1e-100, 1e-12, 1e-6, 1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 30.0}) {
    const double g1 = z < 1.0 ? -std::log(-std::expm1(-z)) : -std::log1p(-std::exp(-z));
    EXPECT_NEAR(e1.g(z) / g1, 1.0, 1e-13) << z;
    if (z > 1e-6) {
      EXPECT_NEAR(e2.g(z) / g2_closed(z), 1.0, 1e-9) << z;
    }
  }
}

TEST(GkEval, DecreasingAndConvex) {
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    for (double z1 = 1e-4; z1 < 20.0; z1 *= 1.3) {
      const double z3 = z1 * 1.5;
      const double z2 = 0.5 * (z1 + z3);
      const double g1 = e.g(z1), g2 = e.g(z2), g3 = e.g(z3);
      ASSERT_GE(g1, 0.0);
      ASSERT_LE(g2, g1 + 1e-10);
      ASSERT_LE(g2, 0.5 * (g1 + g3) + 1e-10);
    }
  }
}

TEST(GkDerivative, Examples) {
  const double e = std::exp(-1.0);
  EXPECT_NEAR(perckit::gk_derivative(1, 1.0), -e / (1.0 - e), 1e-14);
  EXPECT_NEAR(perckit::gk_derivative(1, 1.0), -0.5819767068693265, 1e-14);
  EXPECT_NEAR(perckit::gk_derivative(2, 0.001) / (-1.0 / (2.0 * 0.001)), 1.0, 0.05);
}

TEST(GkDerivative, NegativeAndMatchesFiniteDifferences) {
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    for (double z = 1e-3; z < 20.0; z *= 1.17) {
      const double d = e.g_derivative(z);
      ASSERT_LT(d, 0.0);
      const double h = 1e-5 * z;
      const double fd = (e.g(z + h) - e.g(z - h)) / (2.0 * h);
      ASSERT_NEAR(d, fd, std::max(1e-6, 1e-4 * std::abs(d))) << "k=" << k << " z=" << z;
    }
    // Across the branch switch at the fixed point.
    const double zs = std::log1p(1.0 / k);
    EXPECT_NEAR(e.g_derivative(zs), -1.0, 1e-7);
    EXPECT_NEAR(e.g_derivative(zs * (1 + 1e-6)), -1.0, 1e-4);
    for (double off : {1e-12, 1e-9, 1e-6, 1e-3}) {
      const double z = zs * (1 + off);
      const double h = 1e-4 * zs;
      const double fd = (e.g(z + h) - e.g(z - h)) / (2.0 * h);
      EXPECT_NEAR(e.g_derivative(z), fd, 1e-6) << "k=" << k << " off=" << off;
    }
  }
}

TEST(Lambda, Values) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_DOUBLE_EQ(perckit::lambda_k(1), pi2 / 6.0);
  EXPECT_DOUBLE_EQ(perckit::lambda_k(2), pi2 / 18.0);
  for (int k = 1; k < 50; ++k) EXPECT_GT(perckit::lambda_k(k), perckit::lambda_k(k + 1));
  EXPECT_GT(perckit::lambda_k(1000), 0.0);
  EXPECT_THROW(perckit::lambda_k(0), std::domain_error);
}

TEST(IntegrateGk, EqualsLambda) {
  EXPECT_NEAR(perckit::integrate_gk(1).value, 1.6449340668482264, 1e-8);
  EXPECT_NEAR(perckit::integrate_gk(2).value, 0.5483113556160755, 1e-8);
  for (int k = 1; k <= 6; ++k) {
    const auto r = perckit::integrate_gk(k);
    EXPECT_LE(r.residual, 1e-8) << k;
    EXPECT_NEAR(r.value, perckit::lambda_k(k), 1e-8) << k;
  }
}

TEST(IntegrateGk, ImpossibleToleranceIsReported) {
  EXPECT_THROW(perckit::integrate_gk(2, 1e-30), perckit::convergence_error);
}

TEST(AuxiliaryFunctions, TjExamplesAndMonotonicity) {
  EXPECT_DOUBLE_EQ(perckit::tj_eval(2, 1, 0.0), 1.0);
  EXPECT_THROW(perckit::tj_eval(2, 1, 1.0), std::domain_error);
  EXPECT_THROW(perckit::tj_eval(2, 3, 0.5), std::domain_error);
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    double t1_prev = 1e300, tk_prev = -1.0;
    for (int i = 0; i < 1000; ++i) {
      const double y = i / 1000.0;
      const double t1 = e.T(1, y), tk = e.T(k, y);
      ASSERT_LE(t1, t1_prev + 1e-12) << "k=" << k << " y=" << y;
      ASSERT_GE(tk, tk_prev - 1e-12) << "k=" << k << " y=" << y;
      t1_prev = t1;
      tk_prev = tk;
    }
  }
}

TEST(AuxiliaryFunctions, DjDecreasingAndDkIsOne) {
  EXPECT_NEAR(perckit::dj_eval(3, 3, 0.4), 1.0, 1e-10);
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    EXPECT_DOUBLE_EQ(e.D(1, 0.0), 1.0);
    for (int j = 1; j <= k; ++j) {
      double prev = 1e300;
      for (int i = 0; i < 1000; ++i) {
        const double y = i / 1000.0;
        const double d = e.D(j, y);
        ASSERT_LE(d, prev + 1e-12) << "k=" << k << " j=" << j << " y=" << y;
        prev = d;
        if (j == k) {
          ASSERT_NEAR(d, 1.0, 1e-10);
        }
      }
    }
  }
}

TEST(AuxiliaryFunctions, FkRatioAndLogDerivativeInequalities) {
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    double prev = -1.0;
    for (int i = 0; i < 1000; ++i) {
      const double y = i / 1000.0;
      const double ratio = y / e.f(y);
      ASSERT_GE(ratio, prev);
      prev = ratio;
      ASSERT_GE(e.f_derivative(y) / e.f(y), -1.0 / (1.0 - y) - 1e-9) << "k=" << k << " y=" << y;
    }
  }
}

// The intermediate T_j (2 <= j <= k-1) are claimed, without proof, to rise
// then fall. Checked on a grid only for the k values exercised here.
TEST(AuxiliaryFunctions, IntermediateTjUnimodalExploratory) {
  for (int k = 3; k <= 6; ++k) {
    const FkEvaluator e(k);
    for (int j = 2; j < k; ++j) {
      int turns = 0;
      bool rising = true;
      double prev = e.T(j, 0.0);
      for (int i = 1; i < 1000; ++i) {
        const double t = e.T(j, i / 1000.0);
        if (rising && t < prev - 1e-13) {
          rising = false;
          ++turns;
        } else if (!rising && t > prev + 1e-13) {
          ++turns;
        }
        prev = t;
      }
      EXPECT_EQ(turns, 1) << "k=" << k << " j=" << j;
    }
  }
}

TEST(AuxiliaryFunctions, HkExamples) {
  const std::vector<double> same{0.5, 0.5, 0.5};
  EXPECT_NEAR(perckit::hk_eval(3, same), 0.0, 1e-12);
  const std::vector<double> one{0.37};
  EXPECT_NEAR(perckit::hk_eval(1, one), 0.0, 1e-15);
  EXPECT_NEAR(perckit::hk_tilde_eval(1, one), 0.0, 1e-15);
  const std::vector<double> three{0.3, 0.3, 0.3};
  EXPECT_NEAR(perckit::hk_tilde_eval(2, three), 0.0, 1e-12);
  EXPECT_THROW(perckit::hk_eval(3, one), std::invalid_argument);
  EXPECT_THROW(perckit::hk_tilde_eval(3, three), std::invalid_argument);
}

TEST(AuxiliaryFunctions, HkSignsOnSortedTuples) {
  std::mt19937_64 gen(20240611);
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    for (int trial = 0; trial < 2000; ++trial) {
      const auto y = sorted_uniform(gen, static_cast<std::size_t>(k));
      ASSERT_GE(e.H(y), -1e-10);
      const auto yt = sorted_uniform(gen, static_cast<std::size_t>(2 * k - 1));
      ASSERT_LE(e.H_tilde(yt), 1e-10);
    }
  }
}

TEST(AuxiliaryFunctions, HkEqualArgumentsVanish) {
  for (int k = 1; k <= 6; ++k) {
    const FkEvaluator e(k);
    for (double y : {0.0, 0.1, 0.5, 0.9, 0.999}) {
      const std::vector<double> a(static_cast<std::size_t>(k), y);
      const std::vector<double> b(static_cast<std::size_t>(2 * k - 1), y);
      EXPECT_NEAR(e.H(a), 0.0, 1e-12);
      EXPECT_NEAR(e.H_tilde(b), 0.0, 1e-12);
    }
  }
}
