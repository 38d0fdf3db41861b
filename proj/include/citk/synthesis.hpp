#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "citk/prob.hpp"

namespace citk {

// one-parameter family of regions {R >= rate(t), R + R0 >= sum(t)}
struct RegionFamily {
  std::string param;
  double lo = 0, hi = 0;
  std::function<double(double)> rate, sum;
};

RegionFamily approx_family(const DsbsParams& d);
RegionFamily approx_family(const SbesParams& s);
RegionFamily approx_family(const GaussianPair& g);
RegionFamily exact_family(const DsbsParams& d);
RegionFamily exact_family(const SbesParams& s);
// inner bound only for the Gaussian source
RegionFamily exact_family(const GaussianPair& g);

// SBES sweep end, min{2(1-p), 1}
double sbes_r_star(double p);

struct RatePoint {
  double param = 0, R = 0, R0 = 0;
};

struct RateCurve {
  std::string param;
  std::vector<RatePoint> points;  // R0 increasing
};

// min over t of max{rate(t), sum(t) - R0}; argmin written to *t
double boundary_rate(const RegionFamily& f, double r0, double* t = nullptr);
// smallest R0 with (R, R0) in the region, +inf if none
double required_common_rate(const RegionFamily& f, double R);

// boundary on R0 in [0, r0_max]; r0_max < 0 picks H(Y|X) for the binary sources and 4 bits for Gaussian
RateCurve region_curve(const RegionFamily& f, int grid, double r0_max);

RateCurve approx_region(const DsbsParams& d, int grid = 101, double r0_max = -1);
RateCurve approx_region(const SbesParams& s, int grid = 101, double r0_max = -1);
RateCurve approx_region(const GaussianPair& g, int grid = 101, double r0_max = -1);
RateCurve exact_region(const DsbsParams& d, int grid = 101, double r0_max = -1);
RateCurve exact_region(const SbesParams& s, int grid = 101, double r0_max = -1);
RateCurve exact_region(const GaussianPair& g, int grid = 101, double r0_max = -1);

struct Codebook {
  int n = 0;
  double rate = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> entries;  // bit i is w_i
  std::vector<double> weights;         // empty means uniform
};

// floor(2^{nR}) codewords i.i.d. Bern(1/2)^n
Codebook random_codebook(int n, double rate, std::uint64_t seed);
// every w^n once with weight 2^{-n}
Codebook full_mixture_codebook(int n);

struct SimTrial {
  double tv = 0, kl = 0, dinf = 0;  // kl, dinf in bits
  double moment_half = 0, moment_one = 0;  // sum P^{1+s} pi^{-s} at s = 1/2, 1
};

// exact synthesized law of (X^n, Y^n) for the optimal Wyner decomposition of the DSBS
SimTrial synthesize_dsbs(const DsbsParams& d, const Codebook& cb);

struct SimResult {
  int n = 0;
  double rate = 0;
  std::vector<SimTrial> trials;
  double one_shot_half = 0, one_shot_one = 0;  // one-shot bound on E[moment] at s = 1/2, 1
};

SimResult soft_covering_sim(const DsbsParams& d, double rate, int n, int trials, std::uint64_t seed);

// single-letter D_{1+s}(P_{X|W} P_{Y|W} || pi | P_W) for the optimal DSBS decomposition, bits
double dsbs_conditional_renyi(const DsbsParams& d, double s);

}  // namespace citk
