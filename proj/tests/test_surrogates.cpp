#include "uavmec/scenario.hpp"
#include "uavmec/surrogates.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace uavmec;

namespace {

constexpr int kPoints = 2000;
constexpr double kV0 = 4.03;

struct Draw {
  std::mt19937_64 eng{12345};
  double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  Eigen::Vector2d vec(double r) { return {(*this)(-r, r), (*this)(-r, r)}; }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Surrogates, BilinearHandValue) {
  EXPECT_NEAR(bilinear_surrogate(1, 1, 0.5, 0.5), 1.25, 1e-12);
  EXPECT_NEAR(bilinear_surrogate(0.3, 0.7, 0.3, 0.7), 0.21, 1e-12);
}

TEST(Surrogates, BilinearMajorizesOnUnitBox) {
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const double a = r(0, 1), b = r(0, 1), aj = r(0, 1), bj = r(0, 1);
    EXPECT_GE(bilinear_surrogate(a, b, aj, bj) + 1e-12, a * b);
    EXPECT_NEAR(bilinear_surrogate(aj, bj, aj, bj), aj * bj, 1e-9);
  }
}

TEST(Surrogates, ScaledBilinearMajorizesFrequencyProducts) {
  // x times 1/f or f^2 over wide ranges and arbitrary scales.
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const double x = r(0, 1), xj = r(0, 1);
    const double b = r(1e-3, 1e3), bj = r(1e-3, 1e3), s = std::exp(r(-4, 4));
    const double v = bilinear_surrogate(x, b, xj, bj, s);
    EXPECT_GE(v + 1e-9 * std::max(1.0, std::abs(v)), x * b);
    EXPECT_LE(rel(bilinear_surrogate(xj, bj, xj, bj, s), xj * bj), 1e-9);
  }
}

TEST(Surrogates, DurationTimesSlackMajorizes) {
  // Products of a duration and the induced-power slack.
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const double t = r(1e-4, 3), u = r(1e-4, 3), tj = r(1e-4, 3), uj = r(1e-4, 3);
    EXPECT_GE(bilinear_surrogate(t, u, tj, uj) + 1e-12, t * u);
    EXPECT_NEAR(bilinear_surrogate(tj, uj, tj, uj), tj * uj, 1e-9);
  }
}

TEST(Surrogates, QuarticSlackMinorizes) {
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const double d = r(0, 40), u = r(0, 3), uj = r(1e-3, 3);
    const double k = d * d / (kV0 * kV0);
    const double exact = std::pow(u, 4) + k * u * u;
    EXPECT_LE(quartic_slack_lin(u, d, uj, kV0), exact + 1e-9 * std::max(1.0, exact));
    const double at = std::pow(uj, 4) + k * uj * uj;
    EXPECT_LE(rel(quartic_slack_lin(uj, d, uj, kV0), at), 1e-9);
  }
}

TEST(Surrogates, SeparationMinorizes) {
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const auto qa = r.vec(200), qb = r.vec(200), qaj = r.vec(200), qbj = r.vec(200);
    EXPECT_LE(separation_lin(qa, qb, qaj, qbj), (qa - qb).squaredNorm() + 1e-7);
    EXPECT_LE(rel(separation_lin(qaj, qbj, qaj, qbj), (qaj - qbj).squaredNorm()), 1e-9);
  }
}

TEST(Surrogates, SquaredNormMinorizes) {
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const auto p = r.vec(50), pj = r.vec(50);
    EXPECT_LE(sqnorm_lin(p, pj), p.squaredNorm() + 1e-9);
    EXPECT_LE(rel(sqnorm_lin(pj, pj), pj.squaredNorm()), 1e-9);
  }
}

TEST(Surrogates, LogRateMinorizes) {
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const double alpha = std::exp(r(-3, 8)), y = r(1e-2, 1e3), yj = r(1e-2, 1e3);
    const double exact = std::log2(1 + alpha / y);
    EXPECT_LE(log_rate_lin(y, yj, alpha), exact + 1e-9 * std::max(1.0, exact));
    EXPECT_LE(rel(log_rate_lin(yj, yj, alpha), std::log2(1 + alpha / yj)), 1e-9);
  }
}

TEST(Surrogates, SpeedSlackMinorizes) {
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const double u = r(0, 3), v = r(0, 40), uj = r(0, 3), vj = r(0, 40);
    const double exact = u * u + v * v / (kV0 * kV0);
    EXPECT_LE(speed_slack_lin(u, v, uj, vj, kV0), exact + 1e-9 * std::max(1.0, exact));
    EXPECT_LE(rel(speed_slack_lin(uj, vj, uj, vj, kV0), uj * uj + vj * vj / (kV0 * kV0)), 1e-9);
  }
}

TEST(Surrogates, InducedRadicandMinorizes) {
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const double u = r(0, 3), uj = r(0, 3);
    const auto dq = r.vec(20), dqj = r.vec(20);
    const double dlin = sqnorm_lin(dq, dqj);
    const double exact = u * u + dq.squaredNorm() / (kV0 * kV0);
    EXPECT_LE(induced_rhs_lin(u, uj, dlin, kV0), exact + 1e-9 * std::max(1.0, exact));
    const double at = uj * uj + dqj.squaredNorm() / (kV0 * kV0);
    EXPECT_LE(rel(induced_rhs_lin(uj, uj, sqnorm_lin(dqj, dqj), kV0), at), 1e-9);
  }
}

TEST(Surrogates, InducedSlackMatchesPropulsionModel) {
  // Pi * u over a unit of duration tau covering distance d equals the induced
  // part of the exact power times tau.
  Propulsion p;
  Draw r;
  for (int i = 0; i < kPoints; ++i) {
    const double tau = r(1e-3, 3), v = r(0, 35), d = v * tau;
    const double u = induced_slack_exact(tau, d, p.induced_velocity);
    const double k = d * d / (p.induced_velocity * p.induced_velocity);
    EXPECT_LE(rel(std::pow(u, 4) + k * u * u, std::pow(tau, 4)), 1e-9);
    const double vv = v * v / (2 * p.induced_velocity * p.induced_velocity);
    const double induced = p.induced_power_w * std::sqrt(std::sqrt(1 + vv * vv) - vv);
    EXPECT_LE(rel(p.induced_power_w * u, induced * tau), 1e-9);
  }
  EXPECT_EQ(induced_slack_exact(0, 0, p.induced_velocity), 0.0);
  EXPECT_NEAR(induced_slack_exact(2, 0, p.induced_velocity), 2.0, 1e-12);
  EXPECT_THROW(induced_slack_exact(-1, 0, p.induced_velocity), std::invalid_argument);
}

TEST(Surrogates, InducedBoundIsSound) {
  // Smallest u with tau^4/u^2 <= 2 uj u - uj^2 + Dlin/v0^2 never undercuts the
  // exact slack, and matches it at the expansion point.
  Draw r;
  auto min_u = [](double tau, double uj, double dlin) {
    auto ok = [&](double u) { return std::pow(tau, 4) / (u * u) <= induced_rhs_lin(u, uj, dlin, kV0); };
    double lo = 1e-12, hi = 1e3;
    if (!ok(hi)) return std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? hi : lo) = mid;
    }
    return hi;
  };
  for (int i = 0; i < kPoints; ++i) {
    const double tau = r(0.05, 2);
    const auto dq = r.vec(15), dqj = r.vec(15);
    const double tj = r(0.05, 2);
    const double uj = induced_slack_exact(tj, dqj.norm(), kV0);
    const double u = min_u(tau, uj, sqnorm_lin(dq, dqj));
    EXPECT_GE(u * (1 + 1e-9), induced_slack_exact(tau, dq.norm(), kV0));
    const double ut = min_u(tj, uj, dqj.squaredNorm());
    EXPECT_LE(rel(ut, uj), 1e-8);
  }
}

TEST(Surrogates, ProgramFormMatchesScalarForm) {
  Draw r;
  for (int i = 0; i < 200; ++i) {
    ConvexProgram P;
    const Var a = P.add_variable("a"), b = P.add_variable("b");
    const double aj = r(0, 1), bj = r(0, 5), s = std::exp(r(-2, 2));
    const Affine e = add_bilinear_surrogate(P, a, b, aj, bj, s);
    const double av = r(0, 1), bv = r(0, 5);
    std::vector<double> vals(static_cast<size_t>(P.num_variables()), 0.0);
    vals[static_cast<size_t>(a.id)] = av;
    vals[static_cast<size_t>(b.id)] = bv;
    const double w = 0.5 * std::pow(s * av + bv / s, 2);
    for (int k = 0; k < P.num_variables(); ++k)
      if (P.name(Var{k}) == "bilin") vals[static_cast<size_t>(k)] = w;
    EXPECT_NEAR(e.evaluate(vals), bilinear_surrogate(av, bv, aj, bj, s), 1e-9);
  }
}

TEST(Surrogates, BilinearSurrogateMinimisedInProgram) {
  // min (ab)_appro + penalty keeps the epigraph tight, so the optimum value
  // equals the scalar surrogate at the returned point.
  ConvexProgram P;
  const Var a = P.add_variable("a", 0.2, 1), b = P.add_variable("b", 0.5, 2);
  const Affine e = add_bilinear_surrogate(P, a, b, 0.6, 1.0);
  P.minimize(e + 0.3 * Affine(b) - 0.1 * Affine(a));
  const auto sol = P.solve();
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.value(e), bilinear_surrogate(sol[a], sol[b], 0.6, 1.0), 1e-6);
}
