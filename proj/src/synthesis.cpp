#include "citk/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "citk/common_info.hpp"
#include "citk/errors.hpp"
#include "citk/parallel.hpp"
#include "numutil.hpp"

namespace citk {

namespace {

double dsbs_crossover(const DsbsParams& d) {
  if (!(d.p >= 0 && d.p <= 1)) throw DomainError("p outside [0,1]");
  return std::min(d.p, 1 - d.p);
}

double partner(double p, double a) {
  double den = 1 - 2 * a;
  return std::abs(den) < 1e-15 ? 0.5 : std::clamp((p - a) / den, 0.0, 0.5);
}

double checked_rho(const GaussianPair& g) {
  if (!(g.rho > 0 && g.rho < 1)) throw DomainError("rho outside (0,1)");
  return g.rho;
}

// 0.5 log2(1 / x), +inf at x <= 0
double half_log_inv(double x) { return x <= 0 ? kInf : -0.5 * std::log2(x); }

double golden_on(const std::function<double(double)>& f, double lo, double hi, double* arg) {
  if (hi - lo <= 0) {
    if (arg) *arg = lo;
    return f(lo);
  }
  return detail::golden_min(f, lo, hi, 1e-13 * std::max(1.0, hi - lo), arg);
}

// dense grid then golden refinement on the neighbouring cells
double grid_golden_min(const std::function<double(double)>& f, double lo, double hi, double* arg) {
  const int N = 2000;
  if (hi <= lo) {
    if (arg) *arg = lo;
    return f(lo);
  }
  int best = 0;
  double bv = kInf;
  for (int i = 0; i <= N; ++i) {
    double v = f(lo + (hi - lo) * i / N);
    if (v < bv) {
      bv = v;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / N;
  double b = lo + (hi - lo) * std::min(N, best + 1) / N;
  double t = 0;
  double v = golden_on(f, a, b, &t);
  if (v <= bv) {
    if (arg) *arg = t;
    return v;
  }
  if (arg) *arg = lo + (hi - lo) * best / N;
  return bv;
}

}  // namespace

double sbes_r_star(double p) { return std::min(2 * (1 - p), 1.0); }

RegionFamily approx_family(const DsbsParams& d) {
  double p = dsbs_crossover(d);
  RegionFamily f;
  f.param = "a";
  f.lo = 0;
  f.hi = p;
  f.rate = [](double a) { return 1 - h(a); };
  f.sum = [p](double a) { return 1 + h(p) - h(a) - h(partner(p, a)); };
  return f;
}

RegionFamily exact_family(const DsbsParams& d) {
  double p = dsbs_crossover(d);
  RegionFamily f = approx_family(d);
  f.sum = [p](double a) {
    double b = partner(p, a);
    double tilt = p > 0 ? (a + b) * std::log2((1 - p) / p) : 0.0;
    return std::log2(2 / (1 - p)) + tilt - h(a) - h(b);
  };
  return f;
}

RegionFamily approx_family(const SbesParams& s) {
  double p = s.p;
  if (!(p >= 0 && p <= 1)) throw DomainError("p outside [0,1]");
  RegionFamily f;
  f.param = "r";
  f.lo = 1 - p;
  f.hi = std::max(f.lo, sbes_r_star(p));
  f.rate = [](double r) { return r; };
  f.sum = [p](double r) { return r > 0 ? h(p) + r * (1 - h(std::min(1.0, (1 - p) / r))) : h(p); };
  return f;
}

RegionFamily exact_family(const SbesParams& s) { return approx_family(s); }

RegionFamily approx_family(const GaussianPair& g) {
  double rho = checked_rho(g);
  RegionFamily f;
  f.param = "alpha";
  f.lo = rho;
  f.hi = 1;
  f.rate = [](double al) { return half_log_inv(1 - al * al); };
  f.sum = [rho](double al) {
    double be = rho / al;
    double den = (1 - al * al) * (1 - be * be);
    return den <= 0 ? kInf : 0.5 * std::log2((1 - rho * rho) / den);
  };
  return f;
}

RegionFamily exact_family(const GaussianPair& g) {
  double rho = checked_rho(g);
  RegionFamily f = approx_family(g);
  auto base = f.sum;
  f.sum = [rho, base](double al) {
    double be = rho / al;
    double den = (1 - al * al) * (1 - be * be);
    return base(al) + rho * std::sqrt(std::max(0.0, den)) / (1 - rho * rho) * std::log2(std::exp(1.0));
  };
  return f;
}

double boundary_rate(const RegionFamily& f, double r0, double* t) {
  auto obj = [&](double x) { return std::max(f.rate(x), f.sum(x) - r0); };
  return grid_golden_min(obj, f.lo, f.hi, t);
}

double required_common_rate(const RegionFamily& f, double R) {
  // rate is monotone in the parameter for every family here
  bool inc = f.rate(f.hi) >= f.rate(f.lo);
  double lo = f.lo, hi = f.hi;
  auto ok = [&](double x) { return f.rate(x) <= R; };
  double a = lo, b = hi;
  if (inc) {
    if (!ok(lo)) return kInf;
    if (!ok(hi)) {
      double l = lo, u = hi;
      for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (l + u);
        (ok(m) ? l : u) = m;
      }
      b = l;
    }
  } else {
    if (!ok(hi)) return kInf;
    if (!ok(lo)) {
      double l = lo, u = hi;
      for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (l + u);
        (ok(m) ? u : l) = m;
      }
      a = u;
    }
  }
  double v = grid_golden_min([&](double x) { return f.sum(x); }, a, b, nullptr);
  return std::max(0.0, v - R);
}

RateCurve region_curve(const RegionFamily& f, int grid, double r0_max) {
  if (grid < 2) throw DomainError("grid needs at least two points");
  if (!(r0_max >= 0)) throw DomainError("negative common-randomness range");
  RateCurve c;
  c.param = f.param;
  c.points.resize(grid);
  parallel_for(grid, [&](int i) {
    RatePoint& pt = c.points[i];
    pt.R0 = r0_max * i / (grid - 1);
    pt.R = boundary_rate(f, pt.R0, &pt.param);
  });
  return c;
}

namespace {

double binary_r0_max(double r0_max, double cond) { return r0_max < 0 ? cond : r0_max; }

}  // namespace

RateCurve approx_region(const DsbsParams& d, int grid, double r0_max) {
  return region_curve(approx_family(d), grid, binary_r0_max(r0_max, h(dsbs_crossover(d))));
}
RateCurve approx_region(const SbesParams& s, int grid, double r0_max) {
  return region_curve(approx_family(s), grid, binary_r0_max(r0_max, h(s.p)));
}
RateCurve approx_region(const GaussianPair& g, int grid, double r0_max) {
  return region_curve(approx_family(g), grid, r0_max < 0 ? 4.0 : r0_max);
}
RateCurve exact_region(const DsbsParams& d, int grid, double r0_max) {
  return region_curve(exact_family(d), grid, binary_r0_max(r0_max, h(dsbs_crossover(d))));
}
RateCurve exact_region(const SbesParams& s, int grid, double r0_max) {
  return region_curve(exact_family(s), grid, binary_r0_max(r0_max, h(s.p)));
}
RateCurve exact_region(const GaussianPair& g, int grid, double r0_max) {
  return region_curve(exact_family(g), grid, r0_max < 0 ? 4.0 : r0_max);
}

Codebook random_codebook(int n, double rate, std::uint64_t seed) {
  if (n < 1 || n > 12) throw SizeGuard("blocklength must be in [1,12]");
  if (!(rate >= 0) || rate * n > 24) throw SizeGuard("codebook larger than 2^24");
  Codebook cb;
  cb.n = n;
  cb.rate = rate;
  cb.seed = seed;
  auto M = static_cast<std::size_t>(std::max(1.0, std::floor(std::exp2(n * rate) + 1e-9)));
  auto g = make_rng(seed, 0);
  const std::uint32_t mask = (1u << n) - 1;
  cb.entries.resize(M);
  for (auto& e : cb.entries) e = static_cast<std::uint32_t>(g()) & mask;
  return cb;
}

Codebook full_mixture_codebook(int n) {
  if (n < 1 || n > 12) throw SizeGuard("blocklength must be in [1,12]");
  Codebook cb;
  cb.n = n;
  cb.rate = 1;
  cb.entries.resize(std::size_t{1} << n);
  for (std::size_t i = 0; i < cb.entries.size(); ++i) cb.entries[i] = static_cast<std::uint32_t>(i);
  cb.weights.assign(cb.entries.size(), std::ldexp(1.0, -n));
  return cb;
}

SimTrial synthesize_dsbs(const DsbsParams& d, const Codebook& cb) {
  if (!(d.p >= 0 && d.p <= 0.5)) throw DomainError("simulation needs p in [0,1/2]");
  const int n = cb.n;
  const std::size_t M = cb.entries.size();
  if (M == 0) throw DomainError("empty codebook");
  const double a = d.a, ab = 1 - a;
  const double al = d.alpha, be = d.beta;
  // per-letter likelihood ratio on agreeing coordinates, by whether w matches x
  const double r_match = 2 * ab * ab / (a * a + ab * ab);
  const double r_miss = 2 * a * a / (a * a + ab * ab);
  std::vector<double> w(M);
  for (std::size_t m = 0; m < M; ++m) w[m] = cb.weights.empty() ? 1.0 / M : cb.weights[m];

  // buffers per depth; a disagreeing coordinate leaves the products unchanged
  std::vector<std::vector<double>> buf(n + 1, std::vector<double>(M));
  buf[0] = w;
  SimTrial out;
  double dinf = -kInf;
  auto leaf = [&](const std::vector<double>& prod, int agree) {
    double ratio = 0;
    for (double v : prod) ratio += v;
    double mass = std::ldexp(std::pow(al, agree) * std::pow(be, n - agree), n - agree);
    if (mass <= 0) return;
    out.tv += 0.5 * mass * std::abs(ratio - 1);
    if (ratio > 0) {
      out.kl += mass * ratio * std::log2(ratio);
      dinf = std::max(dinf, std::log2(ratio));
    }
    out.moment_half += mass * std::pow(ratio, 1.5);
    out.moment_one += mass * ratio * ratio;
  };
  std::function<void(int, int, int)> dfs = [&](int i, int src, int agree) {
    if (i == n) {
      leaf(buf[src], agree);
      return;
    }
    if (be > 0) dfs(i + 1, src, agree);
    if (al <= 0) return;
    const std::vector<double>& in = buf[src];
    std::vector<double>& o = buf[i + 1];
    for (int x = 0; x < 2; ++x) {
      for (std::size_t m = 0; m < M; ++m) {
        int bit = (cb.entries[m] >> i) & 1;
        o[m] = in[m] * (bit == x ? r_match : r_miss);
      }
      dfs(i + 1, i + 1, agree + 1);
    }
  };
  dfs(0, 0, 0);
  out.dinf = dinf;
  return out;
}

double dsbs_conditional_renyi(const DsbsParams& d, double s) {
  if (!(s > 0)) throw DomainError("s must be positive");
  const double a = d.a, ab = 1 - a;
  const double al = d.alpha, be = d.beta;
  double m = std::pow(ab * ab, 1 + s) * std::pow(al, -s) + std::pow(a * a, 1 + s) * std::pow(al, -s);
  if (be > 0) m += 2 * std::pow(a * ab, 1 + s) * std::pow(be, -s);
  return std::log2(m) / s;
}

SimResult soft_covering_sim(const DsbsParams& d, double rate, int n, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("need at least one trial");
  SimResult res;
  res.n = n;
  res.rate = rate;
  res.trials.resize(trials);
  std::vector<Codebook> books(trials);
  for (int t = 0; t < trials; ++t) books[t] = random_codebook(n, rate, stream_seed(seed, t));
  parallel_for(trials, [&](int t) { res.trials[t] = synthesize_dsbs(d, books[t]); });
  double logM = std::log2(static_cast<double>(books[0].entries.size()));
  // the decomposition reproduces pi exactly, so the second term is 1
  for (double s : {0.5, 1.0}) {
    double v = std::exp2(s * (n * dsbs_conditional_renyi(d, s) - logM)) + 1;
    (s == 0.5 ? res.one_shot_half : res.one_shot_one) = v;
  }
  return res;
}

}  // namespace citk
