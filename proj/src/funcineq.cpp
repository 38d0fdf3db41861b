#include "citk/funcineq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/tools/roots.hpp>

#include "citk/coupling.hpp"
#include "citk/errors.hpp"
#include "citk/exponents.hpp"
#include "citk/parallel.hpp"
#include "numutil.hpp"

namespace citk {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double inv(double p) { return std::isinf(p) ? 0.0 : 1 / p; }

std::vector<double> softmax(const double* z, int n) {
  std::vector<double> v(n);
  double m = *std::max_element(z, z + n), s = 0;
  for (int i = 0; i < n; ++i) s += (v[i] = std::exp(z[i] - m));
  for (double& x : v) x /= s;
  return v;
}

double kl_nats(const std::vector<double>& q, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0) continue;
    if (p[i] <= 0) return kInf;
    s += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(0.0, s);
}

// D(Q_X, Q_Y || pi) in nats
double min_rel_nats(const JointPmf& pi, const std::vector<double>& qx, const std::vector<double>& qy) {
  if (pi.nx() == 2 && pi.ny() == 2) return binary_min_rel_entropy(pi, qx[1], qy[1]) * kLn2;
  auto r = min_relative_entropy(qx, qy, pi, 100000, 1e-13);
  return r.infinite ? kInf : r.value * kLn2;
}

// Q = pi + t d for a tangent direction d, pulled back into the simplex
std::vector<double> along(const std::vector<double>& base, const std::vector<double>& d, double t) {
  double tmax = kInf;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] < 0) tmax = std::min(tmax, base[i] / -d[i]);
  t = std::min(t, tmax);
  std::vector<double> q(base.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::max(0.0, base[i] + t * d[i]);
  double s = 0;
  for (double v : q) s += v;
  for (double& v : q) v /= s;
  return q;
}

std::vector<double> tangent(std::mt19937_64& g, int n) {
  std::normal_distribution<double> nd;
  std::vector<double> d(n);
  double m = 0, s = 0;
  for (double& v : d) m += (v = nd(g));
  m /= n;
  for (double& v : d) {
    v -= m;
    s += v * v;
  }
  s = std::sqrt(s);
  for (double& v : d) v /= s;
  return d;
}

std::vector<double> log_radii(double lo, double hi, int k) {
  std::vector<double> r(k);
  for (int i = 0; i < k; ++i) r[i] = lo * std::pow(hi / lo, double(i) / (k - 1));
  return r;
}

}  // namespace

bool hc_membership_dsbs(double rho, double p, double q, HcRegion region) {
  if (!(rho > -1 && rho < 1)) throw DomainError("rho outside (-1,1)");
  if (std::isnan(p) || std::isnan(q)) throw DomainError("p, q must be numbers");
  if (region == HcRegion::forward) {
    if (p < 1 || q < 1) throw DomainError("forward region needs p, q >= 1");
    if (std::isinf(p) || std::isinf(q)) return true;
  } else {
    if (p > 1 || q > 1) throw DomainError("reverse region needs p, q <= 1");
    if (std::isinf(p) || std::isinf(q)) return true;
  }
  return (p - 1) * (q - 1) >= rho * rho;
}

HcCertificate hc_membership_general(const JointPmf& pi, double p, double q, HcRegion region, int grid,
                                    std::uint64_t seed) {
  if (std::isnan(p) || std::isnan(q)) throw DomainError("p, q must be numbers");
  if (grid < 4) throw GridTooCoarse("grid needs at least 4 directions");
  const bool fwd = region == HcRegion::forward;
  if (fwd && (p < 1 || q < 1)) throw DomainError("forward region needs p, q >= 1");
  if (!fwd && (p > 1 || q > 1)) throw DomainError("reverse region needs p, q <= 1");
  HcCertificate out;
  if (!fwd && p <= 0 && q <= 0) return out;
  if (!fwd && (p == 0 || q == 0)) throw DomainError("p = 0 or q = 0 only in the (-,-) quadrant");
  // (-,+) is the transpose of (+,-)
  if (!fwd && p < 0) {
    auto c = hc_membership_general(pi.transpose(), q, p, region, grid, seed);
    std::swap(c.qx, c.qy);
    return c;
  }
  const auto mx = pi.marginal_x().probs(), my = pi.marginal_y().probs();
  const int nx = pi.nx(), ny = pi.ny();
  const double ip = inv(p), iq = inv(q);
  const double tol = 1e-7;
  const bool mixed = !fwd && q < 0;

  // inner min over Q_Y of D(Q_X,Q_Y) + |1/q| D(Q_Y)
  auto inner = [&](const std::vector<double>& qx, std::vector<double>* arg) {
    auto f = [&](const std::vector<double>& qy) { return min_rel_nats(pi, qx, qy) - iq * kl_nats(qy, my); };
    if (ny == 2) {
      double b = 0;
      double v = detail::golden_min([&](double t) { return f({1 - t, t}); }, 0, 1, 1e-12, &b);
      double v0 = f(my);
      if (v0 < v) {
        v = v0;
        b = my[1];
      }
      if (arg) *arg = {1 - b, b};
      return v;
    }
    std::vector<double> z(ny);
    for (int j = 0; j < ny; ++j) z[j] = std::log(std::max(my[j], 1e-300));
    auto obj = [&](const std::vector<double>& zz) { return f(softmax(zz.data(), ny)); };
    double v = kInf;
    for (int rep = 0; rep < 3; ++rep) v = detail::nelder_mead(obj, z, 0.5, 400);
    if (arg) *arg = softmax(z.data(), ny);
    return v;
  };

  // normalized violation, positive when the inequality fails
  auto violation = [&](const std::vector<double>& qx, const std::vector<double>& qy, std::vector<double>* qy_out) {
    double dx = kl_nats(qx, mx);
    // below this scale the ratio is rounding noise
    const double floor = 1e-9;
    if (mixed) {
      if (dx < floor) return 0.0;
      double v = inner(qx, qy_out);
      return (v - ip * dx) / dx;
    }
    double dy = kl_nats(qy, my), d = min_rel_nats(pi, qx, qy);
    double den = dx + dy;
    if (den < floor || !std::isfinite(den)) return 0.0;
    if (qy_out) *qy_out = qy;
    if (fwd) return std::isinf(d) ? 0.0 : (ip * dx + iq * dy - d) / den;
    return std::isinf(d) ? kInf : (d - ip * dx - iq * dy) / den;
  };

  struct Cand {
    double v;
    std::vector<double> qx, qy;
  };
  std::vector<Cand> cands;
  auto radii = log_radii(nx == 2 && ny == 2 ? 1e-4 : 1e-2, 1.0, 24);
  if (mixed) {
    // only Q_X is searched; Q_Y is optimized inside
    std::vector<std::vector<double>> dirs;
    if (nx == 2) dirs = {{-1, 1}, {1, -1}};
    else {
      auto g = make_rng(seed, 0);
      for (int k = 0; k < grid; ++k) dirs.push_back(tangent(g, nx));
    }
    std::vector<Cand> found(dirs.size() * radii.size());
    parallel_for(static_cast<int>(found.size()), [&](int k) {
      auto qx = along(mx, dirs[k / radii.size()], radii[k % radii.size()]);
      std::vector<double> qy;
      found[k] = {violation(qx, {}, &qy), qx, qy};
    });
    cands = std::move(found);
  } else {
    std::vector<std::pair<std::vector<double>, std::vector<double>>> dirs;
    if (nx == 2 && ny == 2) {
      for (int k = 0; k < grid; ++k) {
        double th = 2 * M_PI * k / grid;
        dirs.push_back({{-std::cos(th), std::cos(th)}, {-std::sin(th), std::sin(th)}});
      }
    } else {
      auto g = make_rng(seed, 0);
      for (int k = 0; k < grid; ++k) {
        auto dx = tangent(g, nx), dy = tangent(g, ny);
        std::uniform_real_distribution<double> u(0, 2 * M_PI);
        double th = u(g);
        for (double& v : dx) v *= std::cos(th);
        for (double& v : dy) v *= std::sin(th);
        dirs.push_back({dx, dy});
      }
    }
    std::vector<Cand> found(dirs.size() * radii.size());
    parallel_for(static_cast<int>(found.size()), [&](int k) {
      const auto& [dx, dy] = dirs[k / radii.size()];
      double t = radii[k % radii.size()];
      auto qx = along(mx, dx, t), qy = along(my, dy, t);
      found[k] = {violation(qx, qy, nullptr), qx, qy};
    });
    cands = std::move(found);
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.v > b.v; });
  out.worst = cands.empty() ? 0 : cands[0].v;
  // polish the leading candidates when the search has not already certified a violation
  if (out.worst <= tol) {
    const int polish = std::min<int>(4, static_cast<int>(cands.size()));
    for (int k = 0; k < polish; ++k) {
      std::vector<double> z;
      for (double v : cands[k].qx) z.push_back(std::log(std::max(v, 1e-300)));
      if (!mixed)
        for (double v : cands[k].qy) z.push_back(std::log(std::max(v, 1e-300)));
      auto obj = [&](const std::vector<double>& zz) {
        auto qx = softmax(zz.data(), nx);
        auto qy = mixed ? std::vector<double>{} : softmax(zz.data() + nx, ny);
        double v = violation(qx, qy, nullptr);
        return std::isfinite(v) ? -v : -1e6;
      };
      double v = -detail::nelder_mead(obj, z, 0.05, 300);
      if (v > out.worst) {
        out.worst = v;
        cands[0].qx = softmax(z.data(), nx);
        if (mixed) inner(cands[0].qx, &cands[0].qy);
        else cands[0].qy = softmax(z.data() + nx, ny);
      }
    }
  }
  if (out.worst > tol) {
    out.member = false;
    out.certified = true;
    out.qx = cands[0].qx;
    out.qy = cands[0].qy;
  }
  return out;
}

double bl_theta(const JointPmf& pi, const std::vector<double>& qx, const std::vector<double>& qy, double p,
                double q) {
  if (p == 0 || q == 0) throw DomainError("p, q must be nonzero");
  double d = min_rel_nats(pi, qx, qy);
  double dx = kl_nats(qx, pi.marginal_x().probs()), dy = kl_nats(qy, pi.marginal_y().probs());
  if (std::isinf(d)) return kInf;
  return d - inv(p) * dx - inv(q) * dy;
}

namespace {

// binary inf / sup of theta over [0,1]^2: grid then coordinate golden refinement
double theta_extreme_binary(const JointPmf& pi, double p, double q, double sg, int grid) {
  auto th = [&](double a, double b) { return sg * bl_theta(pi, {1 - a, a}, {1 - b, b}, p, q); };
  std::vector<double> vals(grid * grid);
  parallel_for(grid, [&](int i) {
    for (int j = 0; j < grid; ++j) vals[i * grid + j] = th(double(i) / (grid - 1), double(j) / (grid - 1));
  });
  int k = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  double best = vals[k], a = double(k / grid) / (grid - 1), b = double(k % grid) / (grid - 1);
  const double h = 1.0 / (grid - 1);
  const double alo = std::max(0.0, a - h), ahi = std::min(1.0, a + h), blo = std::max(0.0, b - h),
               bhi = std::min(1.0, b + h);
  for (int round = 0; round < 60; ++round) {
    double prev = best, t = a;
    double v = detail::golden_min([&](double x) { return th(x, b); }, alo, ahi, 1e-12, &t);
    if (v < best) best = v, a = t;
    v = detail::golden_min([&](double y) { return th(a, y); }, blo, bhi, 1e-12, &t);
    if (v < best) best = v, b = t;
    if (prev - best < 1e-15) break;
  }
  return sg * best;
}

// sup over Q_X of inf over Q_Y of theta, binary
double theta_supinf_binary(const JointPmf& pi, double p, double q, int grid) {
  auto in = [&](double a) {
    auto f = [&](double b) { return bl_theta(pi, {1 - a, a}, {1 - b, b}, p, q); };
    double v = detail::golden_min(f, 0, 1, 1e-12);
    return std::min({v, f(0), f(1)});
  };
  std::vector<double> vals(grid);
  parallel_for(grid, [&](int i) { vals[i] = in(double(i) / (grid - 1)); });
  int k = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  const double h = 1.0 / (grid - 1), a = double(k) / (grid - 1);
  double v = -detail::golden_min([&](double x) { return -in(x); }, std::max(0.0, a - h), std::min(1.0, a + h), 1e-12);
  return std::max(v, vals[k]);
}

double theta_extreme_general(const JointPmf& pi, double p, double q, double sg, std::uint64_t seed) {
  const int nx = pi.nx(), ny = pi.ny();
  auto obj = [&](const std::vector<double>& z) {
    double v = sg * bl_theta(pi, softmax(z.data(), nx), softmax(z.data() + nx, ny), p, q);
    return std::isfinite(v) ? v : 1e6;
  };
  const int restarts = 12;
  std::vector<double> res(restarts);
  parallel_for(restarts, [&](int k) {
    auto g = make_rng(seed, k);
    std::normal_distribution<double> nd(0, 2);
    std::vector<double> z(nx + ny);
    for (double& v : z) v = k == 0 ? 0 : nd(g);
    double v = 0;
    for (int rep = 0; rep < 4; ++rep) v = detail::nelder_mead(obj, z, 0.5, 500);
    res[k] = v;
  });
  return sg * *std::min_element(res.begin(), res.end());
}

double theta_supinf_general(const JointPmf& pi, double p, double q, std::uint64_t seed) {
  const int nx = pi.nx(), ny = pi.ny();
  // the inner problem is convex in Q_Y, so each restart warm-starts it from the last argmin
  auto in = [&](const std::vector<double>& qx, std::vector<double>& z) {
    auto f = [&](const std::vector<double>& zz) {
      double v = bl_theta(pi, qx, softmax(zz.data(), ny), p, q);
      return std::isfinite(v) ? v : 1e6;
    };
    double v = detail::nelder_mead(f, z, 0.5, 200);
    return std::min(v, detail::nelder_mead(f, z, 0.1, 100));
  };
  const int restarts = 4;
  std::vector<double> res(restarts);
  parallel_for(restarts, [&](int k) {
    auto g = make_rng(seed, k);
    std::normal_distribution<double> nd(0, 2);
    std::vector<double> z(nx), zin(ny, 0.0);
    for (double& v : z) v = k == 0 ? 0 : nd(g);
    auto obj = [&](const std::vector<double>& zz) { return -in(softmax(zz.data(), nx), zin); };
    res[k] = detail::nelder_mead(obj, z, 0.5, 200);
  });
  return -*std::min_element(res.begin(), res.end());
}

}  // namespace

BlExponents bl_exponents(const JointPmf& pi, double p, double q, int grid, std::uint64_t seed) {
  if (p == 0 || q == 0 || std::isnan(p) || std::isnan(q)) throw DomainError("p, q must be nonzero");
  if (grid < 3) throw GridTooCoarse("grid needs at least 3 points");
  const bool bin = pi.nx() == 2 && pi.ny() == 2;
  BlExponents r;
  if (p > 0 && q > 0) {
    r.lower_nats = bin ? theta_extreme_binary(pi, p, q, 1, grid) : theta_extreme_general(pi, p, q, 1, seed);
    r.upper_nats = bin ? theta_extreme_binary(pi, p, q, -1, grid) : theta_extreme_general(pi, p, q, -1, seed);
  } else {
    r.lower_nats = -kInf;
    r.lower_minus_infinity = true;
    if (p < 0 && q < 0) r.upper_nats = 0;
    else if (q < 0)
      r.upper_nats = bin ? theta_supinf_binary(pi, p, q, grid) : theta_supinf_general(pi, p, q, seed);
    else {
      auto t = pi.transpose();
      r.upper_nats = bin ? theta_supinf_binary(t, q, p, grid) : theta_supinf_general(t, q, p, seed);
    }
  }
  r.lower_bits = r.lower_nats / kLn2;
  r.upper_bits = r.upper_nats / kLn2;
  return r;
}

double pseudo_norm(const std::vector<double>& f, const std::vector<double>& pi, double p) {
  if (f.size() != pi.size()) throw AlphabetMismatch("function and measure differ in size");
  for (double v : f)
    if (!(v >= 0)) throw DomainError("pseudo-norms need nonnegative functions");
  bool zero = false;
  double mx = 0, mn = kInf;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (pi[i] <= 0) continue;
    zero = zero || f[i] == 0;
    mx = std::max(mx, f[i]);
    mn = std::min(mn, f[i]);
  }
  if (p == kInf) return mx;
  if (p == -kInf) return mn;
  if (p < 0 && zero) return 0;
  if (p == 0) {
    if (zero) return 0;
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (pi[i] > 0) s += pi[i] * std::log(f[i]);
    return std::exp(s);
  }
  // scale by the max to keep large exponents finite
  if (mx == 0) return 0;
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (pi[i] > 0 && f[i] > 0) s += pi[i] * std::pow(f[i] / mx, p);
  return mx * std::pow(s, 1 / p);
}

double pseudo_norm(const RealCubeFunction& f, double p) {
  return pseudo_norm(f.table(), std::vector<double>(f.size(), 1.0 / f.size()), p);
}

double bl_functional(const JointPmf& pi, const std::vector<double>& f, const std::vector<double>& g, double p,
                     double q) {
  if (static_cast<int>(f.size()) != pi.nx() || static_cast<int>(g.size()) != pi.ny())
    throw AlphabetMismatch("function sizes must match the alphabets");
  double ip = 0;
  for (int x = 0; x < pi.nx(); ++x)
    for (int y = 0; y < pi.ny(); ++y) ip += pi(x, y) * f[x] * g[y];
  double nf = pseudo_norm(f, pi.marginal_x().probs(), p), ng = pseudo_norm(g, pi.marginal_y().probs(), q);
  return -std::log(ip / (nf * ng));
}

double h_nats_inv(double v) {
  if (!(v >= -1e-15 && v <= kLn2 + 1e-15)) throw DomainError("value outside [0, ln 2]");
  v = std::clamp(v, 0.0, kLn2);
  return std::clamp(0.5 - [&] {
    // delta with ln 2 - h(1/2 - delta) = ln 2 - v, evaluated stably near 1/2
    const double t = kLn2 - v;
    auto F = [](double d) { return 0.5 * ((1 + 2 * d) * std::log1p(2 * d) + (1 - 2 * d) * std::log1p(-2 * d)); };
    if (t <= 0) return 0.0;
    if (t >= kLn2) return 0.5;
    double lo = 0, hi = 0.5;
    for (int i = 0; i < 200 && hi - lo > 0; ++i) {
      double m = 0.5 * (lo + hi);
      if (m == lo || m == hi) break;
      (F(m) < t ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
  }(), 0.0, 0.5);
}

namespace {

// delta = 1/2 - y(t), computed directly so that 1 - 2y keeps full precision
double lsi_delta(double t) { return 0.5 - h_nats_inv(kLn2 - t); }

void check_t(double t) {
  if (!(t >= -1e-15 && t <= kLn2 + 1e-15)) throw DomainError("t outside [0, ln 2]");
}

}  // namespace

double lsi_g(double t) {
  check_t(t);
  t = std::clamp(t, 0.0, kLn2);
  if (t < 1e-13) return 2.0;
  double d = lsi_delta(t), y = 0.5 - d;
  // 2 - 4 sqrt(y(1-y)) = 2 (1-2y)^2 / (1 + 2 sqrt(y(1-y)))
  return 8 * d * d / ((1 + 2 * std::sqrt(y * (1 - y))) * t);
}

double lsi_b(double p, double t) {
  if (p == 0 || std::isnan(p)) throw DomainError("p must be nonzero");
  check_t(t);
  t = std::clamp(t, 0.0, kLn2);
  double d = lsi_delta(t), y = 0.5 - d, yb = 0.5 + d;
  if (p == 1) return y > 0 ? d * std::log(yb / y) : kInf;
  const double a = 1 / p, c = 1 - 1 / p;
  double s = std::pow(y, a) * std::pow(yb, c) + std::pow(y, c) * std::pow(yb, a);
  return (p > 1 ? 0.5 : -0.5) * (1 - s);
}

LsiValues lsi_functions(double p, double t) {
  check_t(t);
  LsiValues v;
  v.y = h_nats_inv(kLn2 - std::clamp(t, 0.0, kLn2));
  v.b = lsi_b(p, t);
  v.g = lsi_g(t);
  return v;
}

double lsi_xi(double p, double s) {
  if (!(s >= -1e-15)) throw DomainError("s must be nonnegative");
  s = std::max(s, 0.0);
  double top = lsi_b(p, kLn2);
  if (s > top + 1e-15) throw DomainError("s above b_p(ln 2)");
  double lo = 0, hi = kLn2;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    double m = 0.5 * (lo + hi);
    (lsi_b(p, m) < s ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

LsiCurve lsi_curve(double p, int points) {
  if (points < 2) throw GridTooCoarse("curve needs at least 2 points");
  LsiCurve c;
  for (int i = 0; i < points; ++i) {
    double t = kLn2 * i / (points - 1);
    c.t.push_back(t);
    c.b.push_back(lsi_b(p, t));
    c.g.push_back(lsi_g(t));
  }
  return c;
}

double dirichlet_form(const RealCubeFunction& f, const RealCubeFunction& g) {
  if (f.n() != g.n()) throw DomainError("dimension mismatch");
  const int n = f.n();
  const std::size_t N = f.size();
  double s = 0;
  for (int k = 0; k < n; ++k)
    for (std::uint32_t x = 0; x < N; ++x)
      if (!((x >> k) & 1)) {
        std::uint32_t y = x | (1u << k);
        s += (f(x) - f(y)) * (g(x) - g(y));
      }
  // each coordinate pair carries weight 2^{-(n-1)} / 4
  return s / 4 / static_cast<double>(N >> 1);
}

double normalized_entropy(const RealCubeFunction& f) {
  double m = f.mean();
  if (m <= 0) return 0;
  double s = 0;
  for (double v : f.table())
    if (v > 0) s += v / m * std::log(v / m);
  return std::max(0.0, s / f.size());
}

double p_entropy(const RealCubeFunction& f, double p) {
  if (p == 1) return normalized_entropy(f);
  if (p == 0 || std::isnan(p)) throw DomainError("p must be nonzero");
  return p / (p - 1) * std::log(pseudo_norm(f, p) / pseudo_norm(f, 1));
}

namespace {

RealCubeFunction map_table(const RealCubeFunction& f, double (*op)(double, double), double a) {
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = op(f(static_cast<std::uint32_t>(i)), a);
  return RealCubeFunction(f.n(), t);
}

}  // namespace

LsiCheck nonlinear_lsi_check(const RealCubeFunction& f, double p) {
  if (p == 0 || std::isnan(p)) throw DomainError("p must be nonzero");
  bool pos = true;
  for (double v : f.table()) {
    if (!(v >= 0)) throw DomainError("f must be nonnegative");
    pos = pos && v > 0;
  }
  if (p <= 1 && !pos) throw DomainError("f must be positive for p <= 1");
  const double n = f.n();
  LsiCheck c;
  if (f.mean() == 0) return c;
  double t = 0;
  if (p == 1) {
    auto lf = map_table(f, [](double v, double) { return std::log(v); }, 0);
    double e = dirichlet_form(f, lf) / f.mean();
    c.lhs = n > 0 ? e / n : 0;
    t = n > 0 ? std::min(kLn2, normalized_entropy(f) / n) : 0;
  } else {
    auto fp = map_table(f, [](double v, double e) { return std::pow(v, e); }, p);
    auto fp1 = map_table(f, [](double v, double e) { return v == 0 ? 0.0 : std::pow(v, e); }, p - 1);
    double e = dirichlet_form(f, fp1) / fp.mean();
    c.lhs = n > 0 ? (p > 1 ? e : -e) / n : 0;
    t = n > 0 ? std::min(kLn2, normalized_entropy(fp) / n) : 0;
  }
  c.rhs = lsi_b(p, t);
  c.holds = c.lhs >= c.rhs - 1e-12 * (1 + std::abs(c.rhs));
  // b_p is steep near ln 2, so near-ties are compared on the entropy axis
  if (!c.holds && c.lhs >= 0 && c.lhs <= lsi_b(p, kLn2)) c.holds = lsi_xi(p, c.lhs) >= t - 1e-12;
  return c;
}

double classic_hc_q(double p, double t) { return 1 + (p - 1) * std::exp(2 * t); }

namespace {

double ode_final(double p, double alpha, double t_max, double h, std::vector<double>* grid_u,
                 const std::vector<double>& sample_t) {
  const double ipp = (p - 1) / p;  // 1 / p'
  auto rhs = [&](double u) {
    double x = std::min(kLn2, alpha * ipp * (1 + std::exp(-u)));
    return lsi_g(x);
  };
  double u = std::log(p - 1), t = 0;
  std::size_t si = 0;
  const long steps = std::lround(std::ceil(t_max / h - 1e-9));
  const double dt = steps > 0 ? t_max / steps : 0;
  auto record = [&]() {
    while (grid_u && si < sample_t.size() && sample_t[si] <= t + 0.5 * dt + 1e-15) {
      // cubic-free linear fill is enough at this step size
      grid_u->push_back(u);
      ++si;
    }
  };
  record();
  for (long s = 0; s < steps; ++s) {
    double k1 = rhs(u), k2 = rhs(u + 0.5 * dt * k1), k3 = rhs(u + 0.5 * dt * k2), k4 = rhs(u + dt * k3);
    u += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += dt;
    if (!std::isfinite(u)) throw OdeStepFailure("non-finite state");
    record();
  }
  while (grid_u && grid_u->size() < sample_t.size()) grid_u->push_back(u);
  return u;
}

}  // namespace

OdeCurve strengthened_hc_ode(double p, double alpha, double t_max, double step, int samples) {
  if (!(p > 1) || std::isinf(p)) throw DomainError("p must be in (1, inf)");
  if (!(alpha >= 0 && alpha <= kLn2 + 1e-15)) throw DomainError("alpha outside [0, ln 2]");
  if (!(t_max >= 0) || !(step > 0)) throw DomainError("need t_max >= 0 and step > 0");
  if (samples < 2) throw GridTooCoarse("need at least 2 samples");
  OdeCurve c;
  for (int i = 0; i < samples; ++i) c.t.push_back(t_max * i / (samples - 1));
  std::vector<double> u;
  double uf = ode_final(p, alpha, t_max, step, &u, c.t);
  // step-halving validation on the endpoint
  double uh = ode_final(p, alpha, t_max, step / 2, nullptr, {});
  if (std::abs(uf - uh) > 1e-8 * (1 + std::abs(uf))) throw OdeStepFailure("step halving disagrees");
  for (double v : u) c.q.push_back(1 + std::exp(v));
  return c;
}

double rho1_function(double r) {
  return (1 + r * r) * std::log2((1 + r) / 2) - (1 - r) * (1 - r) * std::log2((1 - r) / 2);
}

double rho1_root() {
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t it = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(rho1_function, 0.4, 0.5, tol, it);
  return 0.5 * (lo + hi);
}

DualityResult duality_beta(const std::vector<std::vector<double>>& P, const std::vector<double>& s,
                           const std::vector<double>& c) {
  if (P.empty() || P.size() != s.size()) throw DomainError("need one weight per distribution");
  const std::size_t n = c.size();
  double ss = 0;
  for (double v : s) {
    if (v == 0) throw DomainError("weights must be nonzero");
    ss += v;
  }
  if (std::abs(ss - 1) > 1e-9) throw DomainError("weights must sum to 1");
  for (const auto& p : P)
    if (p.size() != n) throw AlphabetMismatch("distributions and cost differ in size");
  // log2 of each term; a zero under a positive weight kills the term, 0 * inf = 0
  std::vector<double> lt(n);
  bool inf_term = false;
  for (std::size_t x = 0; x < n; ++x) {
    double l = -c[x];
    bool zero = false, blow = false;
    for (std::size_t i = 0; i < P.size(); ++i) {
      if (P[i][x] == 0) (s[i] > 0 ? zero : blow) = true;
      else l += s[i] * std::log2(P[i][x]);
    }
    lt[x] = zero ? -kInf : (blow ? kInf : l);
    inf_term = inf_term || lt[x] == kInf;
  }
  DualityResult r;
  if (inf_term) {
    r.neg_log_beta = -kInf;
    return r;
  }
  double m = *std::max_element(lt.begin(), lt.end());
  if (m == -kInf) {
    r.neg_log_beta = kInf;
    return r;
  }
  double sum = 0;
  for (double v : lt) sum += std::exp2(v - m);
  r.neg_log_beta = -(m + std::log2(sum));
  r.q_star.resize(n);
  for (std::size_t x = 0; x < n; ++x) r.q_star[x] = std::exp2(lt[x] - m) / sum;
  return r;
}

double duality_objective(const std::vector<double>& Q, const std::vector<std::vector<double>>& P,
                         const std::vector<double>& s, const std::vector<double>& c) {
  double v = 0;
  for (std::size_t x = 0; x < Q.size(); ++x) {
    if (Q[x] <= 0) continue;
    v += Q[x] * c[x];
    for (std::size_t i = 0; i < P.size(); ++i) {
      if (P[i][x] <= 0) return kInf;
      v += s[i] * Q[x] * std::log2(Q[x] / P[i][x]);
    }
  }
  return v;
}

}  // namespace citk
