#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "citk/boolfn.hpp"
#include "citk/coupling.hpp"
#include "citk/errors.hpp"
#include "citk/exponents.hpp"

using namespace citk;

namespace {

// Plackett: d/dr Lambda_r(a, b) is the bivariate normal density at the quantiles
double copula_plackett(double rho, double a, double b) {
  double h1 = norm_quantile(a), k = norm_quantile(b);
  auto dens = [&](double r) {
    return std::exp(-(h1 * h1 - 2 * r * h1 * k + k * k) / (2 * (1 - r * r))) / (2 * M_PI * std::sqrt(1 - r * r));
  };
  const int n = 2000;
  double s = dens(0) + dens(rho);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * dens(rho * i / n);
  return a * b + s * rho / (3 * n);
}

// lower convex hull by monotone chain, evaluated at the nodes
std::vector<double> hull_oracle(const std::vector<double>& x, const std::vector<double>& f) {
  std::vector<int> H;
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    while (H.size() >= 2) {
      int a = H[H.size() - 2], b = H.back();
      double cr = (x[b] - x[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (x[i] - x[a]);
      if (cr <= 0)
        H.pop_back();
      else
        break;
    }
    H.push_back(i);
  }
  std::vector<double> e(x.size());
  for (std::size_t k = 0; k + 1 < H.size(); ++k)
    for (int i = H[k]; i <= H[k + 1]; ++i)
      e[i] = f[H[k]] + (f[H[k + 1]] - f[H[k]]) * (x[i] - x[H[k]]) / (x[H[k + 1]] - x[H[k]]);
  return e;
}

std::vector<double> lin(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

TEST(GaussianCopula, Identities) {
  for (double a : {0.1, 0.5, 0.8})
    for (double b : {0.2, 0.6}) EXPECT_NEAR(gaussian_copula(0, a, b), a * b, 1e-12);
  for (double rho : {0.3, 0.5, 0.9, -0.4})
    EXPECT_NEAR(gaussian_copula(rho, 0.5, 0.5), 0.25 + std::asin(rho) / (2 * M_PI), 1e-9) << rho;
  EXPECT_NEAR(gaussian_copula(0.5, 0.5, 0.5), 1.0 / 3, 1e-9);
  EXPECT_NEAR(gaussian_copula(0.7, 1 - 1e-12, 0.3), 0.3, 1e-9);
  EXPECT_THROW(gaussian_copula(1.0, 0.5, 0.5), DomainError);
}

TEST(GaussianCopula, MatchesPlackettIntegral) {
  for (double rho : {-0.6, 0.2, 0.8})
    for (double a : {0.05, 0.3, 0.7})
      for (double b : {0.1, 0.55}) EXPECT_NEAR(gaussian_copula(rho, a, b), copula_plackett(rho, a, b), 1e-8);
}

TEST(GaussianStability, ReducesToCopula) {
  for (double rho : {0.2, 0.6, 0.95})
    for (double a : {0.1, 0.5, 0.9}) {
      EXPECT_NEAR(gaussian_q_stability(rho, 1, a), a, 1e-9);
      // two independent looks through a rho-channel are rho^2-correlated
      EXPECT_NEAR(gaussian_q_stability(rho, 2, a), gaussian_copula(rho * rho, a, a), 1e-8);
    }
  EXPECT_NEAR(gaussian_q_stability(0, 3, 0.4), std::pow(0.4, 3), 1e-15);
}

TEST(BinaryMinRelEntropy, StationaryPointIsOptimal) {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> w{u(g), u(g), u(g), u(g)};
    double s = w[0] + w[1] + w[2] + w[3];
    for (double& x : w) x /= s;
    JointPmf pi(2, 2, w);
    double a = u(g), b = u(g), p = 0;
    double v = binary_min_rel_entropy(pi, a, b, &p);
    auto r = min_relative_entropy(std::vector<double>{1 - a, a}, std::vector<double>{1 - b, b}, pi);
    EXPECT_NEAR(v, r.value, 1e-8);
    EXPECT_NEAR(p, r.argmin(1, 1), 1e-6);
  }
  // DSBS form of the root
  double rho = 0.6, a = 0.3, b = 0.45;
  double p = dsbs_p_star(rho, a, b), kappa = std::pow(1.6 / 0.4, 2);
  EXPECT_NEAR(p * (1 + p - a - b), kappa * (a - p) * (b - p), 1e-14);
  EXPECT_NEAR(dsbs_p_star(0, a, b), a * b, 1e-15);
  // zero cells pin the coupling
  JointPmf tri(2, 2, {0.5, 0.25, 0.0, 0.25});
  EXPECT_TRUE(std::isinf(binary_min_rel_entropy(tri, 0.5, 0.2)));
  EXPECT_NEAR(binary_min_rel_entropy(tri, 0.25, 0.5), 0.0, 1e-15);
}

TEST(LdExponents, DsbsClosedFormAgainstNumeric) {
  double rho = 0.8;
  auto pi = DsbsParams::from_rho(rho).to_joint();
  EXPECT_NEAR(nicd_ld_exponents(pi, 0, 0, Side::forward), 0.0, 1e-12);
  EXPECT_NEAR(nicd_ld_exponent_dsbs(rho, 0, 0, Side::forward), 0.0, 1e-12);
  double cf = nicd_ld_exponent_dsbs(rho, 0.3, 0.3, Side::forward);
  EXPECT_NEAR(nicd_ld_exponents(pi, 0.3, 0.3, Side::forward), cf, 1e-5);
  for (auto [a, b] : {std::pair{0.1, 0.5}, {0.4, 0.2}, {0.9, 0.9}}) {
    EXPECT_NEAR(nicd_ld_exponents(pi, a, b, Side::forward), nicd_ld_exponent_dsbs(rho, a, b, Side::forward), 1e-5);
    EXPECT_NEAR(nicd_ld_exponents(pi, a, b, Side::reverse), nicd_ld_exponent_dsbs(rho, a, b, Side::reverse), 1e-5);
  }
  EXPECT_THROW(nicd_ld_exponents(pi, 1.2, 0.1, Side::forward), DomainError);
}

TEST(LdExponents, ForwardSurfaceMonotone) {
  auto al = lin(0, 1, 20);
  auto s = nicd_ld_surface_dsbs(0.5, al, al, Side::forward);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      EXPECT_GE(s(i, j), 0.0);
      if (i > 0) EXPECT_GE(s(i, j), s(i - 1, j) - 1e-12);
      if (j > 0) EXPECT_GE(s(i, j), s(i, j - 1) - 1e-12);
    }
  // numeric path on a coarse grid
  auto pi = DsbsParams::from_rho(0.5).to_joint();
  LdOptions o;
  o.grid = 60;
  double prev = -1;
  for (double a : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    double v = nicd_ld_exponents(pi, a, 0.3, Side::forward, o);
    EXPECT_GE(v, prev - 1e-9);
    prev = v;
  }
}

TEST(LdExponents, GeneralAlphabetCertificates) {
  auto pi = JointPmf::from_rows({{0.2, 0.05, 0.05}, {0.05, 0.2, 0.05}, {0.05, 0.05, 0.3}});
  LdOptions o;
  o.restarts = 8;
  EXPECT_NEAR(nicd_ld_exponents(pi, 0, 0, Side::forward, o), 0.0, 1e-6);
  double v = nicd_ld_exponents(pi, 0.2, 0.2, Side::forward, o);
  EXPECT_GT(v, 0.2 - 1e-6);  // D(Q_XY) >= D(Q_X)
  // any feasible pair is an upper-bound certificate
  std::vector<double> qx{0.05, 0.05, 0.9}, qy{0.05, 0.05, 0.9};
  double dx = renyi_divergence(qx, pi.marginal_x().probs(), 1.0);
  ASSERT_GE(dx, 0.2);
  EXPECT_LE(v, min_relative_entropy(qx, qy, pi).value + 1e-6);
}

TEST(MdExponents, ClosedFormClauses) {
  double rho = 0.5;
  EXPECT_NEAR(nicd_md_exponents(rho, 1.0, 0.2, Side::forward), 1.0, 1e-15);
  EXPECT_NEAR(nicd_md_exponents(rho, 0.2, 1.0, Side::forward), 1.0, 1e-15);
  EXPECT_NEAR(nicd_md_exponents(rho, 0.7, 0.7, Side::forward), 2 * 0.7 / (1 + rho), 1e-15);
  for (double a : {0.3, 1.0, 2.0})
    for (double b : {0.1, 0.5, 1.7}) {
      double f = nicd_md_exponents(rho, a, b, Side::forward), r = nicd_md_exponents(rho, a, b, Side::reverse);
      EXPECT_GE(r, f - 1e-15);
      EXPECT_NEAR(nicd_md_exponents(rho, 3 * a, 3 * b, Side::forward), 3 * f, 1e-12);
      EXPECT_NEAR(nicd_md_exponents(rho, 3 * a, 3 * b, Side::reverse), 3 * r, 1e-12);
    }
}

TEST(MdExponents, MatchesChiSquareProgram) {
  // forward minimizes the chi-square form over lambda >= sqrt(a)/2, mu >= sqrt(b)/2; reverse maximizes inside
  double rho = 0.6;
  auto pi = DsbsParams::from_rho(rho).to_joint();
  for (double a : {0.2, 1.0})
    for (double b : {0.05, 0.6, 3.0}) {
      double best = kInf, rev = -kInf;
      for (int i = 0; i <= 400; ++i)
        for (int j = 0; j <= 400; ++j) {
          double l = std::sqrt(a) / 2 * (1 + 2.0 * i / 400), m = std::sqrt(b) / 2 * (1 + 2.0 * j / 400);
          auto c = min_chi_square(SignedPerturbation({-l, l}), SignedPerturbation({-m, m}), pi);
          best = std::min(best, c.value);
          double lr = -std::sqrt(a) / 2 * i / 400, mr = std::sqrt(b) / 2 * j / 400;
          auto cr = min_chi_square(SignedPerturbation({-lr, lr}), SignedPerturbation({-mr, mr}), pi);
          rev = std::max(rev, cr.value);
        }
      EXPECT_NEAR(nicd_md_exponents(rho, a, b, Side::forward), best, 1e-3 * (a + b)) << a << " " << b;
      EXPECT_NEAR(nicd_md_exponents(rho, a, b, Side::reverse), rev, 1e-9) << a << " " << b;
    }
}

TEST(MdExponents, LdScalingLimit) {
  const double eps = 1e-3, rho = 0.5;
  for (auto [a, b] : {std::pair{1.0, 1.0}, {1.0, 0.5}, {0.3, 1.0}}) {
    EXPECT_NEAR(nicd_ld_exponent_dsbs(rho, eps * a, eps * b, Side::forward) / eps,
                nicd_md_exponents(rho, a, b, Side::forward), 2e-2);
    EXPECT_NEAR(nicd_ld_exponent_dsbs(rho, eps * a, eps * b, Side::reverse) / eps,
                nicd_md_exponents(rho, a, b, Side::reverse), 2e-2);
  }
}

TEST(Envelope, OneDimensional) {
  auto x = lin(-1, 1, 201);
  std::vector<double> aff(x.size()), vee(x.size()), bump(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    aff[i] = 2 * x[i] - 0.3;
    vee[i] = std::max(std::abs(x[i]), 0.5);
    bump[i] = x[i] * x[i] + 0.3 * std::exp(-40 * x[i] * x[i]);
  }
  auto e = envelope1d(x, aff, EnvelopeMode::convex);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(e.envelope[i], aff[i], 1e-12);
  e = envelope1d(x, vee, EnvelopeMode::convex);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(e.envelope[i], vee[i], 1e-12);
  e = envelope1d(x, bump, EnvelopeMode::convex);
  auto h = hull_oracle(x, bump);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_LE(e.envelope[i], bump[i] + 1e-15);
    EXPECT_NEAR(e.envelope[i], h[i], 1e-12);
  }
  std::vector<double> neg(bump.size());
  for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -bump[i];
  auto c = envelope1d(x, neg, EnvelopeMode::concave);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(c.envelope[i], -h[i], 1e-12);
  EXPECT_THROW(envelope1d({0, 1}, {0, 1}, EnvelopeMode::convex), GridTooCoarse);
}

TEST(Envelope, InfiniteCellsExcluded) {
  auto x = lin(0, 1, 11);
  std::vector<double> f(11);
  for (int i = 0; i < 11; ++i) f[i] = i < 8 ? std::sin(5 * x[i]) : kInf;
  auto e = envelope1d(x, f, EnvelopeMode::convex);
  std::vector<double> xf(x.begin(), x.begin() + 8), ff(f.begin(), f.begin() + 8);
  auto h = hull_oracle(xf, ff);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(e.envelope[i], h[i], 1e-12);
  for (int i = 8; i < 11; ++i) EXPECT_TRUE(std::isinf(e.envelope[i]));
}

TEST(Envelope, TwoDimensional) {
  ExponentSurface s{lin(0, 1, 41), lin(0, 1, 41), {}};
  for (double a : s.alpha)
    for (double b : s.beta) s.values.push_back(0.5 * a - 0.2 * b + 1);
  auto e = envelope2d(s, EnvelopeMode::convex);
  for (std::size_t k = 0; k < s.values.size(); ++k) EXPECT_NEAR(e.envelope[k], s.values[k], 1e-12);
  // a nonconvex surface: below the original and midpoint convex along both axes
  s.values.clear();
  for (double a : s.alpha)
    for (double b : s.beta) s.values.push_back(std::cos(6 * a) + b * b + 0.5 * std::sin(7 * b));
  e = envelope2d(s, EnvelopeMode::convex);
  const int n = 41;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      EXPECT_LE(e.envelope[i * n + j], s(i, j) + 1e-12);
      if (i > 0 && i + 1 < n)
        EXPECT_LE(e.envelope[i * n + j], 0.5 * (e.envelope[(i - 1) * n + j] + e.envelope[(i + 1) * n + j]) + 1e-12);
      if (j > 0 && j + 1 < n)
        EXPECT_LE(e.envelope[i * n + j], 0.5 * (e.envelope[i * n + j - 1] + e.envelope[i * n + j + 1]) + 1e-12);
    }
}

TEST(Envelope, DsbsForwardSurfaceIsNearlyConvex) {
  auto al = lin(0.02, 0.98, 41);
  auto s = nicd_ld_surface_dsbs(0.9, al, al, Side::forward);
  auto e = envelope2d(s, EnvelopeMode::convex);
  double gap = 0;
  for (std::size_t k = 0; k < s.values.size(); ++k) gap = std::max(gap, s.values[k] - e.envelope[k]);
  RecordProperty("max_envelope_gap", std::to_string(gap));
  EXPECT_LT(gap, 1e-3);
}

TEST(StrongSse, FiniteBlocksAboveLdEnvelope) {
  const double rho = 0.5;
  // grid holding every finite-n rate exactly, padded with a uniform sweep
  std::vector<double> g = lin(0, 1, 41);
  for (int n = 1; n <= 3; ++n)
    for (int k = 1; k <= (1 << n); ++k) g.push_back(-std::log2(double(k) / (1 << n)) / n);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(), [](double u, double v) { return std::abs(u - v) < 1e-12; }), g.end());
  auto s = nicd_ld_surface_dsbs(rho, g, g, Side::forward);
  auto e = envelope2d(s, EnvelopeMode::convex);
  auto idx = [&](double v) {
    return static_cast<int>(std::min_element(g.begin(), g.end(), [&](double u, double w) {
                              return std::abs(u - v) < std::abs(w - v);
                            }) - g.begin());
  };
  for (int n = 1; n <= 3; ++n) {
    const int N = 1 << n;
    for (int A = 1; A < N; ++A)
      for (int B = 1; B < N; ++B) {
        double v = nicd_bruteforce(n, double(A) / N, double(B) / N, rho, NicdMode::max).value;
        double an = -std::log2(double(A) / N) / n, bn = -std::log2(double(B) / N) / n;
        EXPECT_GE(-std::log2(v) / n, e.envelope[idx(an) * g.size() + idx(bn)] - 1e-9) << n << " " << A << " " << B;
      }
  }
}

TEST(QStability, MdClosedForm) {
  EXPECT_NEAR(q_stability_md_exponent(0.9, 2, 1), 1 / 1.81, 1e-15);
  EXPECT_NEAR(q_stability_exponents(0.9, 2, 1, Regime::MD), 0.552486, 1e-6);
  EXPECT_EQ(q_stability_md_exponent(0.9, 2, 0), 0.0);
  EXPECT_TRUE(std::isinf(q_stability_md_exponent(0.9, 1 - 1 / 0.81 - 1e-9, 1)));
  EXPECT_THROW(q_stability_md_exponent(0.9, 0, 1), DomainError);
}

TEST(QStability, LdAtQOneIsIdentity) {
  // Q_Y free makes the coupling term collapse to D(Q_X||pi_X)
  auto pi = DsbsParams::from_rho(0.7).to_joint();
  for (double s : {0.0, 0.1, 0.5, 0.9}) EXPECT_NEAR(q_stability_phi(pi, 1, s), s, 1e-9);
  EXPECT_NEAR(q_stability_exponents(0.7, 1, 0.4, Regime::LD), 0.4, 1e-6);
  EXPECT_EQ(q_stability_exponents(0.7, 3, 0, Regime::LD), 0.0);
}

TEST(QStability, LdScalingLimit) {
  const double eps = 1e-3;
  double ld = q_stability_exponents(0.9, 2, eps, Regime::LD) / eps;
  EXPECT_NEAR(ld, q_stability_md_exponent(0.9, 2, 1), 2e-2);
}

TEST(QStability, FiniteBlocksAboveLdExponent) {
  // -(1/n) log ||T 1_A||_q against the envelope exponent at the set's own rate
  const double rho = 0.6, q = 2;
  auto pi = DsbsParams::from_rho(rho).to_joint();
  auto c = q_stability_ld_curve(pi, q, 101, 200);
  auto at = [&](double a) {
    std::size_t i = std::lower_bound(c.alpha.begin(), c.alpha.end(), a) - c.alpha.begin();
    if (i == 0) return c.exponent[0];
    double t = (a - c.alpha[i - 1]) / (c.alpha[i] - c.alpha[i - 1]);
    return (1 - t) * c.exponent[i - 1] + t * c.exponent[i];
  };
  for (int n = 1; n <= 3; ++n) {
    const int N = 1 << n;
    for (std::uint64_t m = 1; m < (1ull << N); ++m) {
      auto f = BooleanFunction::from_mask(n, m);
      double an = -std::log2(f.mean()) / n;
      double lhs = -std::log2(std::pow(q_stability(f, rho, q), 1 / q)) / n;
      EXPECT_GE(lhs, at(an) - 1e-6) << n << " " << m;
    }
  }
}

TEST(QStability, ReverseRegimeConcave) {
  auto pi = DsbsParams::from_rho(0.5).to_joint();
  for (double q : {0.5, -0.5}) {
    auto c = q_stability_ld_curve(pi, q, 41, 200);
    for (std::size_t i = 1; i < c.alpha.size(); ++i) EXPECT_GE(c.exponent[i], c.exponent[i - 1] - 1e-12) << q;
    for (std::size_t i = 0; i < c.alpha.size(); ++i) EXPECT_GE(c.exponent[i], -1e-9) << q;
  }
}

TEST(GaussianCk, MatchesSimpsonAndPeaksAtHalf) {
  auto hb = [](double x) { return x <= 0 || x >= 1 ? 0.0 : -x * std::log2(x) - (1 - x) * std::log2(1 - x); };
  for (double rho : {0.3, 0.7, 0.9}) {
    for (double a : {0.05, 0.2, 0.5}) {
      double k = norm_quantile(a), sr = std::sqrt(1 - rho * rho);
      const int n = 40000;
      const double lo = -12, hi = 12, dx = (hi - lo) / n;
      double s = 0;
      for (int i = 0; i <= n; ++i) {
        double y = lo + i * dx;
        double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        s += w * std::exp(-y * y / 2) / std::sqrt(2 * M_PI) * hb(norm_cdf((k - rho * y) / sr));
      }
      EXPECT_NEAR(gaussian_ck_mi(a, rho), hb(a) - s * dx / 3, 1e-8) << rho << " " << a;
    }
    double best = -1, arg = -1;
    for (int i = 1; i <= 50; ++i) {
      double a = 0.5 * i / 50, v = gaussian_ck_mi(a, rho);
      if (v > best) best = v, arg = a;
    }
    EXPECT_EQ(arg, 0.5);
  }
  EXPECT_EQ(gaussian_ck_mi(0.3, 0), 0);
}
