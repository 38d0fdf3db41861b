#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "citk/common_info.hpp"
#include "citk/errors.hpp"
#include "citk/synthesis.hpp"

using namespace citk;

namespace {

double median_tv(const SimResult& r) {
  std::vector<double> v;
  for (const auto& t : r.trials) v.push_back(t.tv);
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

void expect_boundary(const RegionFamily& f, const RateCurve& c) {
  double prev = kInf;
  for (const auto& pt : c.points) {
    double r = f.rate(pt.param), s = f.sum(pt.param);
    EXPECT_GE(pt.R, r - 1e-12);
    EXPECT_GE(pt.R + pt.R0, s - 1e-12);
    EXPECT_TRUE(std::abs(pt.R - r) < 1e-9 || std::abs(pt.R + pt.R0 - s) < 1e-9) << pt.R0;
    EXPECT_LE(pt.R, prev + 1e-12);
    prev = pt.R;
  }
}

}  // namespace

TEST(ApproxRegion, DsbsEndpoints) {
  auto d = DsbsParams::from_p(0.2);
  auto c = approx_region(d, 51);
  EXPECT_NEAR(c.points.front().R, wyner_ci_closed(d), 1e-9);
  EXPECT_NEAR(c.points.back().R0, h(0.2), 1e-15);
  EXPECT_NEAR(c.points.back().R, 1 - h(0.2), 1e-9);
  EXPECT_NEAR(required_common_rate(approx_family(d), 1 - h(0.2)), h(0.2), 1e-9);
  auto far = approx_region(d, 3, 5.0);
  EXPECT_NEAR(far.points.back().R, 1 - h(0.2), 1e-9);
  expect_boundary(approx_family(d), c);
}

TEST(ApproxRegion, SbesAndGaussianEndpoints) {
  for (double p : {0.3, 0.7}) {
    SbesParams s{p};
    auto c = approx_region(s, 31);
    EXPECT_NEAR(c.points.front().R, wyner_ci_closed(s), 1e-9) << p;
    EXPECT_NEAR(c.points.back().R, 1 - p, 1e-9) << p;
    expect_boundary(approx_family(s), c);
  }
  GaussianPair g{0.5};
  auto c = approx_region(g, 31);
  EXPECT_NEAR(c.points.front().R, wyner_ci_closed(g), 1e-9);
  expect_boundary(approx_family(g), c);
}

TEST(ApproxRegion, SbesSweepEnd) {
  EXPECT_NEAR(sbes_r_star(0.3), 1.0, 1e-15);
  EXPECT_NEAR(sbes_r_star(0.7), 0.6, 1e-15);
  // at the sweep end the sum bound collapses to C_W
  auto f = approx_family(SbesParams{0.7});
  EXPECT_NEAR(f.sum(f.hi), h(0.7), 1e-12);
}

TEST(ExactRegion, DsbsEndpointsAndDominance) {
  auto d = DsbsParams::from_p(0.2);
  auto ex = exact_family(d), ap = approx_family(d);
  EXPECT_NEAR(boundary_rate(ex, 0), exact_ci_dsbs(d.a).value, 1e-9);
  EXPECT_NEAR(required_common_rate(ex, 1 - h(0.2)), h(0.2), 1e-9);
  for (int i = 1; i < 20; ++i) {
    double a = 0.2 * i / 20;
    EXPECT_GT(ex.sum(a), ap.sum(a)) << a;
  }
  auto ce = exact_region(d, 41), ca = approx_region(d, 41);
  for (size_t i = 0; i < ce.points.size(); ++i) {
    EXPECT_GE(ce.points[i].R, ca.points[i].R - 1e-12);
    if (ce.points[i].R0 < h(0.2) - 1e-3) EXPECT_GT(ce.points[i].R, ca.points[i].R + 1e-9) << i;
  }
  expect_boundary(ex, ce);
}

TEST(ExactRegion, SbesEqualsApprox) {
  SbesParams s{0.3};
  auto a = approx_region(s, 41), e = exact_region(s, 41);
  for (size_t i = 0; i < a.points.size(); ++i) EXPECT_NEAR(a.points[i].R, e.points[i].R, 1e-9);
}

TEST(ExactRegion, GaussianInnerBoundAboveApprox) {
  GaussianPair g{0.5};
  auto a = approx_region(g, 21), e = exact_region(g, 21);
  for (size_t i = 0; i < a.points.size(); ++i) EXPECT_GE(e.points[i].R, a.points[i].R - 1e-12);
  // the inner bound at R0 = 0 sits below the exact-CI upper bound
  EXPECT_LE(e.points.front().R, gaussian_exact_ci_bounds(0.5).upper + 1e-9);
}

TEST(GaussianRegion, CommonRateBlowsUpNearMutualInformation) {
  GaussianPair g{0.5};
  double I = 0.5 * std::log2(1 / (1 - 0.25));
  auto f = approx_family(g);
  double prev = 0;
  for (double e : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    double r0 = required_common_rate(f, I + e);
    EXPECT_GT(r0, prev + 0.5) << e;
    prev = r0;
  }
  EXPECT_TRUE(std::isinf(required_common_rate(f, I - 1e-3)));
}

TEST(SoftCovering, FullMixtureIsExact) {
  auto d = DsbsParams::from_p(0.2);
  for (int n : {1, 4, 8}) {
    auto t = synthesize_dsbs(d, full_mixture_codebook(n));
    EXPECT_NEAR(t.tv, 0.0, 1e-12);
    EXPECT_NEAR(t.kl, 0.0, 1e-12);
    EXPECT_NEAR(t.dinf, 0.0, 1e-12);
  }
}

TEST(SoftCovering, SingleCodewordAgainstDirectLaw) {
  // one codeword w = 0 at n = 1: P(x, y) = P(x|0) P(y|0)
  auto d = DsbsParams::from_p(0.2);
  Codebook cb;
  cb.n = 1;
  cb.entries = {0};
  auto t = synthesize_dsbs(d, cb);
  double a = d.a, ab = 1 - a;
  double P[4] = {ab * ab, a * ab, a * ab, a * a};
  double pi[4] = {d.alpha, d.beta, d.beta, d.alpha};
  double tv = 0, kl = 0;
  for (int k = 0; k < 4; ++k) {
    tv += 0.5 * std::abs(P[k] - pi[k]);
    kl += P[k] * std::log2(P[k] / pi[k]);
  }
  EXPECT_NEAR(t.tv, tv, 1e-14);
  EXPECT_NEAR(t.kl, kl, 1e-14);
  EXPECT_NEAR(t.dinf, std::log2(ab * ab / d.alpha), 1e-14);
}

TEST(SoftCovering, PinskerAndOneShotScale) {
  auto d = DsbsParams::from_p(0.2);
  auto r = soft_covering_sim(d, wyner_ci_closed(d) + 0.3, 6, 31, 1);
  double mean_one = 0;
  for (const auto& t : r.trials) {
    EXPECT_LE(t.tv * t.tv, std::log(2.0) / 2 * t.kl + 1e-12);
    EXPECT_GE(t.moment_one, 1 - 1e-12);
    mean_one += t.moment_one / r.trials.size();
  }
  // sample mean against the one-shot bound on the expectation, with slack for sampling
  EXPECT_LE(mean_one, 1.05 * r.one_shot_one);
  EXPECT_GT(r.one_shot_half, 1.0);
}

TEST(SoftCovering, PhaseTransitionTrend) {
  auto d = DsbsParams::from_p(0.2);
  double cw = wyner_ci_closed(d);
  double up = kInf, down = -kInf;
  for (int n : {4, 6, 8}) {
    double a = median_tv(soft_covering_sim(d, cw + 0.3, n, 31, 7));
    double b = median_tv(soft_covering_sim(d, cw - 0.3, n, 31, 7));
    EXPECT_LT(a, up) << n;
    EXPECT_GT(b, down) << n;
    up = a;
    down = b;
  }
}

TEST(SoftCovering, Guards) {
  EXPECT_THROW(random_codebook(13, 0.5, 0), SizeGuard);
  EXPECT_THROW(random_codebook(12, 2.5, 0), SizeGuard);
  EXPECT_EQ(random_codebook(4, 1.0, 3).entries.size(), 16u);
  EXPECT_EQ(random_codebook(4, 1.0, 3).entries, random_codebook(4, 1.0, 3).entries);
  EXPECT_NEAR(dsbs_conditional_renyi(DsbsParams::from_p(0.2), 1e-6), wyner_ci_closed(DsbsParams::from_p(0.2)),
              1e-4);
}
