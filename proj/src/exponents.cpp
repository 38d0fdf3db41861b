#include "citk/exponents.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "citk/coupling.hpp"
#include "citk/errors.hpp"
#include "citk/parallel.hpp"
#include "numutil.hpp"

namespace citk {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_quantile(double p) {
  if (!(p >= 0 && p <= 1)) throw DomainError("probability outside [0,1]");
  if (p == 0) return -kInf;
  if (p == 1) return kInf;
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

namespace {

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); }

// probabilists' Gauss-Hermite rule: E[F(V)] ~ sum w_i F(x_i)
struct HermiteRule {
  std::vector<double> x, w;
  explicit HermiteRule(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      x[i] = es.eigenvalues()(i);
      double v = es.eigenvectors()(0, i);
      w[i] = v * v;
    }
  }
};

const HermiteRule& hermite(int n) {
  static const HermiteRule r96(96), r192(192);
  return n <= 96 ? r96 : r192;
}

template <class F>
double gk_integrate(F f, double lo, double hi) {
  double err = 0;
  double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-14, &err);
  if (!(err <= 1e-9) || !std::isfinite(v)) throw QuadratureFailure("adaptive quadrature did not converge");
  return v;
}

}  // namespace

double gaussian_copula(double rho, double a, double b) {
  if (!(rho > -1 && rho < 1)) throw DomainError("rho outside (-1,1)");
  if (!(a >= 0 && a <= 1 && b >= 0 && b <= 1)) throw DomainError("a, b outside [0,1]");
  if (a == 0 || b == 0) return 0;
  if (a == 1) return b;
  if (b == 1) return a;
  if (rho == 0) return a * b;
  const double ka = norm_quantile(a), kb = norm_quantile(b), sr = std::sqrt(1 - rho * rho);
  // condition on V and integrate the conditional tail of U
  auto g = [&](double v) { return norm_pdf(v) * norm_cdf((ka - rho * v) / sr); };
  return std::clamp(gk_integrate(g, -kInf, kb), 0.0, std::min(a, b));
}

double gaussian_q_stability(double rho, double q, double a) {
  if (!(rho > -1 && rho < 1)) throw DomainError("rho outside (-1,1)");
  if (!(q > 0)) throw DomainError("q must be positive");
  if (!(a >= 0 && a <= 1)) throw DomainError("a outside [0,1]");
  if (a == 0) return 0;
  if (a == 1) return 1;
  if (rho == 0) return std::pow(a, q);
  const double ka = norm_quantile(a), sr = std::sqrt(1 - rho * rho);
  auto F = [&](double v) { return std::pow(norm_cdf((ka - rho * v) / sr), q); };
  auto rule = [&](int n) {
    const auto& r = hermite(n);
    double s = 0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * F(r.x[i]);
    return s;
  };
  double s1 = rule(96), s2 = rule(192);
  if (std::abs(s1 - s2) <= 1e-10) return s2;
  // sharp transitions near |rho| = 1: split at the step and integrate adaptively
  double v0 = ka / rho;
  auto g = [&](double v) { return norm_pdf(v) * F(v); };
  return gk_integrate(g, -kInf, v0) + gk_integrate(g, v0, kInf);
}

double gaussian_ck_mi(double a, double rho) {
  if (!(rho > -1 && rho < 1)) throw DomainError("rho outside (-1,1)");
  if (!(a >= 0 && a <= 1)) throw DomainError("a outside [0,1]");
  if (a == 0 || a == 1) return 0;
  if (rho == 0) return 0;
  const double ka = norm_quantile(a), sr = std::sqrt(1 - rho * rho);
  auto g = [&](double v) { return norm_pdf(v) * h(norm_cdf((ka - rho * v) / sr)); };
  double v0 = ka / rho;
  return std::max(0.0, h(a) - gk_integrate(g, -kInf, v0) - gk_integrate(g, v0, kInf));
}

double nicd_cl_exponent(double rho, double alpha, double beta, Side side) {
  if (!(alpha >= 0 && beta >= 0)) throw DomainError("exponents must be nonnegative");
  double r = side == Side::forward ? rho : -rho;
  return -std::log2(gaussian_copula(r, std::exp2(-alpha), std::exp2(-beta)));
}

namespace {

void require_binary(const JointPmf& pi) {
  if (pi.nx() != 2 || pi.ny() != 2) throw AlphabetMismatch("binary alphabets required");
}

double cell_kl(double q, double p) {
  if (q <= 0) return 0;
  if (p <= 0) return kInf;
  return q * std::log2(q / p);
}

// root of (kappa-1) p^2 - ((kappa-1)(a+b)+1) p + kappa a b = 0 on the coupling interval
double stationary_p(double kappa, double a, double b) {
  double B = (kappa - 1) * (a + b) + 1;
  double disc = std::max(0.0, B * B - 4 * kappa * (kappa - 1) * a * b);
  double den = B + std::sqrt(disc);
  if (den <= 0) return 0;
  return 2 * kappa * a * b / den;
}

}  // namespace

double dsbs_p_star(double rho, double a, double b) {
  if (!(rho > -1 && rho < 1)) throw DomainError("rho outside (-1,1)");
  if (!(a >= 0 && a <= 1 && b >= 0 && b <= 1)) throw DomainError("a, b outside [0,1]");
  double kappa = std::pow((1 + rho) / (1 - rho), 2);
  double lo = std::max(0.0, a + b - 1), hi = std::min(a, b);
  return std::clamp(stationary_p(kappa, a, b), lo, hi);
}

double binary_min_rel_entropy(const JointPmf& pi, double a, double b, double* p_star) {
  require_binary(pi);
  if (!(a >= 0 && a <= 1 && b >= 0 && b <= 1)) throw DomainError("a, b outside [0,1]");
  const double lo = std::max(0.0, a + b - 1), hi = std::min(a, b);
  const double p00 = pi(0, 0), p01 = pi(0, 1), p10 = pi(1, 0), p11 = pi(1, 1);
  auto value = [&](double p) {
    return cell_kl(1 + p - a - b, p00) + cell_kl(b - p, p01) + cell_kl(a - p, p10) + cell_kl(p, p11);
  };
  double p = 0;
  // each zero cell pins the free coordinate
  std::vector<double> pins;
  if (p00 == 0) pins.push_back(a + b - 1);
  if (p01 == 0) pins.push_back(b);
  if (p10 == 0) pins.push_back(a);
  if (p11 == 0) pins.push_back(0);
  if (!pins.empty()) {
    p = pins[0];
    for (double v : pins)
      if (std::abs(v - p) > 1e-12) return kInf;
    if (p < lo - 1e-12 || p > hi + 1e-12) return kInf;
    p = std::clamp(p, lo, hi);
  } else {
    p = std::clamp(stationary_p(p00 * p11 / (p01 * p10), a, b), lo, hi);
  }
  if (p_star) *p_star = p;
  return std::max(0.0, value(p));
}

double alpha_max(const Pmf& p) {
  double m = kInf;
  for (double v : p.probs())
    if (v > 0) m = std::min(m, v);
  return -std::log2(m);
}

namespace {

// [lo, hi] with D(Bern(t) || Bern(c)) <= s; D is decreasing on [0, c], increasing on [c, 1]
std::pair<double, double> kl_ball(double c, double s) {
  auto kl = [c](double t) { return binary_kl(t, c); };
  auto root = [&](double l, double r, bool decreasing) {
    for (int i = 0; i < 200 && r - l > 1e-16; ++i) {
      double m = 0.5 * (l + r);
      bool inside = kl(m) <= s;
      if (decreasing == inside)
        r = m;
      else
        l = m;
    }
    return 0.5 * (l + r);
  };
  double lo = kl(0) <= s ? 0.0 : root(0, c, true);
  double hi = kl(1) <= s ? 1.0 : root(c, 1, false);
  return {lo, hi};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

// admissible intervals for Q(1) under D >= s (outside) or D <= s (inside)
std::vector<std::pair<double, double>> pieces(double c, double s, bool outside) {
  auto [lo, hi] = kl_ball(c, s);
  if (!outside) return {{lo, hi}};
  std::vector<std::pair<double, double>> r;
  if (s <= 0) return {{0.0, 1.0}};
  if (binary_kl(0, c) >= s) r.push_back({0.0, lo});
  if (binary_kl(1, c) >= s) r.push_back({hi, 1.0});
  return r;
}

std::vector<std::pair<double, int>> grid_on(const std::vector<std::pair<double, double>>& ps, int n) {
  std::vector<std::pair<double, int>> v;
  int per = std::max(2, n / std::max<int>(1, ps.size()));
  for (int k = 0; k < static_cast<int>(ps.size()); ++k)
    for (double t : linspace(ps[k].first, ps[k].second, per)) v.push_back({t, k});
  return v;
}

double ld_binary(const JointPmf& pi, double alpha, double beta, Side side, int grid) {
  const double cx = pi.marginal_x()[1], cy = pi.marginal_y()[1];
  const bool out = side == Side::forward;
  // reverse side maximizes
  const double sg = out ? 1 : -1;
  auto px = pieces(cx, alpha, out), py = pieces(cy, beta, out);
  if (px.empty() || py.empty()) return kInf;
  auto gx = grid_on(px, grid), gy = grid_on(py, grid);
  auto D = [&](double a, double b) {
    auto r = min_relative_entropy(std::vector<double>{1 - a, a}, std::vector<double>{1 - b, b}, pi);
    return r.infinite ? kInf : r.value;
  };
  const int nx = static_cast<int>(gx.size()), ny = static_cast<int>(gy.size());
  std::vector<double> vals(nx * ny);
  parallel_for(nx, [&](int i) {
    for (int j = 0; j < ny; ++j) vals[i * ny + j] = sg * D(gx[i].first, gy[j].first);
  });
  int bi = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  double best = vals[bi];
  if (!std::isfinite(best)) return sg * kInf;
  int i = bi / ny, j = bi % ny;
  // coordinate refinement inside the neighbouring grid cells of the same piece
  double a = gx[i].first, b = gy[j].first;
  auto bracket = [](const std::vector<std::pair<double, int>>& g, const std::vector<std::pair<double, double>>& ps,
                    int k) {
    double lo = k > 0 && g[k - 1].second == g[k].second ? g[k - 1].first : ps[g[k].second].first;
    double hi = k + 1 < static_cast<int>(g.size()) && g[k + 1].second == g[k].second ? g[k + 1].first
                                                                                      : ps[g[k].second].second;
    return std::pair<double, double>{lo, hi};
  };
  auto [alo, ahi] = bracket(gx, px, i);
  auto [blo, bhi] = bracket(gy, py, j);
  for (int round = 0; round < 60; ++round) {
    const double prev = best;
    double t = a;
    double v = detail::golden_min([&](double x) { return sg * D(x, b); }, alo, ahi, 1e-13, &t);
    if (v < best) {
      best = v;
      a = t;
    }
    v = detail::golden_min([&](double y) { return sg * D(a, y); }, blo, bhi, 1e-13, &t);
    if (v < best) {
      best = v;
      b = t;
    }
    if (prev - best < 1e-15) break;
  }
  return sg * best;
}

std::vector<double> softmax(const double* z, int n) {
  std::vector<double> v(n);
  double m = *std::max_element(z, z + n), s = 0;
  for (int i = 0; i < n; ++i) s += (v[i] = std::exp(z[i] - m));
  for (double& x : v) x /= s;
  return v;
}

double ld_general(const JointPmf& pi, double alpha, double beta, Side side, const LdOptions& opt) {
  const int nx = pi.nx(), ny = pi.ny();
  const auto mx = pi.marginal_x(), my = pi.marginal_y();
  const bool fwd = side == Side::forward;
  auto violation = [&](const std::vector<double>& qx, const std::vector<double>& qy) {
    double dx = renyi_divergence(qx, mx.probs(), 1.0), dy = renyi_divergence(qy, my.probs(), 1.0);
    double v = fwd ? std::max(0.0, alpha - dx) + std::max(0.0, beta - dy)
                   : std::max(0.0, dx - alpha) + std::max(0.0, dy - beta);
    return std::isfinite(v) ? v : 1e6;
  };
  auto split = [&](const std::vector<double>& z) {
    return std::pair{softmax(z.data(), nx), softmax(z.data() + nx, ny)};
  };
  auto obj = [&](const std::vector<double>& z) {
    auto [qx, qy] = split(z);
    auto r = min_relative_entropy(qx, qy, pi);
    double v = violation(qx, qy);
    if (r.infinite) return fwd ? 1e6 + v : -1e6 + v;
    // exact penalty keeps minimizers on the constraint surface
    return (fwd ? r.value : -r.value) + 100 * v + 1e4 * v * v;
  };
  std::vector<double> res(opt.restarts, kInf);
  parallel_for(opt.restarts, [&](int k) {
    auto g = make_rng(opt.seed, k);
    std::normal_distribution<double> nd(0, 2);
    std::vector<double> z(nx + ny);
    for (int i = 0; i < nx; ++i) z[i] = std::log(std::max(mx[i], 1e-300)) + (k == 0 ? 0 : nd(g));
    for (int j = 0; j < ny; ++j) z[nx + j] = std::log(std::max(my[j], 1e-300)) + (k == 0 ? 0 : nd(g));
    for (int rep = 0; rep < 4; ++rep) detail::nelder_mead(obj, z, 0.5, 600);
    auto [qx, qy] = split(z);
    if (violation(qx, qy) > 1e-6) return;
    auto r = min_relative_entropy(qx, qy, pi);
    res[k] = r.infinite ? kInf : r.value;
    if (!fwd) res[k] = -res[k];
  });
  double best = *std::min_element(res.begin(), res.end());
  return fwd ? best : -best;
}

}  // namespace

double nicd_ld_exponents(const JointPmf& pi, double alpha, double beta, Side side, const LdOptions& opt) {
  if (!(alpha >= 0 && beta >= 0)) throw DomainError("exponents must be nonnegative");
  if (alpha > alpha_max(pi.marginal_x()) + 1e-12 || beta > alpha_max(pi.marginal_y()) + 1e-12)
    throw DomainError("exponent above the atomic maximum");
  if (opt.grid < 3) throw GridTooCoarse("grid needs at least 3 points");
  if (pi.nx() == 2 && pi.ny() == 2) return ld_binary(pi, alpha, beta, side, opt.grid);
  return ld_general(pi, alpha, beta, side, opt);
}

double nicd_ld_exponent_dsbs(double rho, double alpha, double beta, Side side) {
  if (!(alpha >= 0 && alpha <= 1 && beta >= 0 && beta <= 1)) throw DomainError("exponents outside [0,1]");
  double a = h_inv(1 - alpha), b = h_inv(1 - beta);
  auto pi = DsbsParams::from_rho(rho).to_joint();
  if (side == Side::reverse) b = 1 - b;
  else {
    // a slack constraint leaves the other marginal at its conditional optimum
    const double p = pi(0, 1) * 2;
    if (conv(a, p) <= b) return alpha;
    if (conv(b, p) <= a) return beta;
  }
  double p = dsbs_p_star(rho, a, b);
  return cell_kl(1 + p - a - b, pi(0, 0)) + cell_kl(b - p, pi(0, 1)) + cell_kl(a - p, pi(1, 0)) +
         cell_kl(p, pi(1, 1));
}

double nicd_md_exponents(double rho, double alpha, double beta, Side side) {
  if (!(rho >= 0 && rho < 1)) throw DomainError("rho outside [0,1)");
  if (!(alpha >= 0 && beta >= 0)) throw DomainError("exponents must be nonnegative");
  const double r2 = rho * rho, c = 2 * rho * std::sqrt(alpha * beta);
  if (side == Side::reverse) return (alpha + beta + c) / (1 - r2);
  if (beta < r2 * alpha) return alpha;
  if (alpha < r2 * beta) return beta;
  return (alpha + beta - c) / (1 - r2);
}

bool ExponentSurface::infinite(int i, int j) const { return !std::isfinite((*this)(i, j)); }

ExponentSurface nicd_ld_surface_dsbs(double rho, const std::vector<double>& alpha, const std::vector<double>& beta,
                                     Side side) {
  ExponentSurface s{alpha, beta, std::vector<double>(alpha.size() * beta.size())};
  const int nb = static_cast<int>(beta.size());
  parallel_for(static_cast<int>(alpha.size()), [&](int i) {
    for (int j = 0; j < nb; ++j) s.values[i * nb + j] = nicd_ld_exponent_dsbs(rho, alpha[i], beta[j], side);
  });
  return s;
}

namespace {

std::vector<double> slope_sample(std::vector<double> d, int k) {
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  if (static_cast<int>(d.size()) <= k) return d;
  std::vector<double> r(k);
  for (int i = 0; i < k; ++i) r[i] = d[static_cast<std::size_t>(std::llround(double(i) * (d.size() - 1) / (k - 1)))];
  return r;
}

}  // namespace

EnvelopeResult envelope1d(const std::vector<double>& x, const std::vector<double>& f, EnvelopeMode mode) {
  if (x.size() != f.size()) throw DomainError("grid and values differ in length");
  if (x.size() < 3) throw GridTooCoarse("envelope needs at least 3 points");
  const double sg = mode == EnvelopeMode::convex ? 1 : -1;
  const int n = static_cast<int>(x.size());
  std::vector<int> fin;
  for (int i = 0; i < n; ++i)
    if (std::isfinite(f[i])) fin.push_back(i);
  EnvelopeResult r{x, {}, f, std::vector<double>(n, sg * kInf)};
  if (fin.empty()) return r;
  // chord slopes between every pair of finite cells contain the hull slopes
  std::vector<double> ks;
  for (std::size_t u = 0; u < fin.size(); ++u)
    for (std::size_t v = u + 1; v < fin.size(); ++v)
      ks.push_back(sg * (f[fin[v]] - f[fin[u]]) / (x[fin[v]] - x[fin[u]]));
  if (ks.empty()) ks.push_back(0);
  ks = slope_sample(std::move(ks), 1 << 18);
  std::vector<double> conj(ks.size(), -kInf);
  for (std::size_t k = 0; k < ks.size(); ++k)
    for (int i : fin) conj[k] = std::max(conj[k], ks[k] * x[i] - sg * f[i]);
  for (int i : fin) {
    double e = -kInf;
    for (std::size_t k = 0; k < ks.size(); ++k) e = std::max(e, ks[k] * x[i] - conj[k]);
    r.envelope[i] = sg * std::min(e, sg * f[i]);
  }
  return r;
}

EnvelopeResult envelope2d(const ExponentSurface& s, EnvelopeMode mode) {
  const int nx = static_cast<int>(s.alpha.size()), ny = static_cast<int>(s.beta.size());
  if (nx < 3 || ny < 3) throw GridTooCoarse("envelope needs at least 3 points per axis");
  const double sg = mode == EnvelopeMode::convex ? 1 : -1;
  auto F = [&](int i, int j) { return sg * s(i, j); };
  std::vector<double> dx, dy;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      if (!std::isfinite(F(i, j))) continue;
      if (i + 1 < nx && std::isfinite(F(i + 1, j))) dx.push_back((F(i + 1, j) - F(i, j)) / (s.alpha[i + 1] - s.alpha[i]));
      if (j + 1 < ny && std::isfinite(F(i, j + 1))) dy.push_back((F(i, j + 1) - F(i, j)) / (s.beta[j + 1] - s.beta[j]));
    }
  if (dx.empty()) dx.push_back(0);
  if (dy.empty()) dy.push_back(0);
  auto k1 = slope_sample(dx, 2 * nx), k2 = slope_sample(dy, 2 * ny);
  const int K1 = static_cast<int>(k1.size()), K2 = static_cast<int>(k2.size());
  // separable Legendre transforms, one axis at a time
  std::vector<double> g(nx * K2, -kInf), conj(K1 * K2, -kInf);
  parallel_for(nx, [&](int i) {
    for (int b = 0; b < K2; ++b)
      for (int j = 0; j < ny; ++j)
        if (std::isfinite(F(i, j))) g[i * K2 + b] = std::max(g[i * K2 + b], k2[b] * s.beta[j] - F(i, j));
  });
  parallel_for(K1, [&](int a) {
    for (int b = 0; b < K2; ++b)
      for (int i = 0; i < nx; ++i)
        if (std::isfinite(g[i * K2 + b])) conj[a * K2 + b] = std::max(conj[a * K2 + b], k1[a] * s.alpha[i] + g[i * K2 + b]);
  });
  std::vector<double> hh(K1 * ny, -kInf);
  parallel_for(K1, [&](int a) {
    for (int j = 0; j < ny; ++j)
      for (int b = 0; b < K2; ++b) hh[a * ny + j] = std::max(hh[a * ny + j], k2[b] * s.beta[j] - conj[a * K2 + b]);
  });
  EnvelopeResult r{s.alpha, s.beta, s.values, std::vector<double>(nx * ny, sg * kInf)};
  parallel_for(nx, [&](int i) {
    for (int j = 0; j < ny; ++j) {
      if (!std::isfinite(F(i, j))) continue;
      double e = -kInf;
      for (int a = 0; a < K1; ++a) e = std::max(e, k1[a] * s.alpha[i] + hh[a * ny + j]);
      r.envelope[i * ny + j] = sg * std::min(e, F(i, j));
    }
  });
  return r;
}

double q_stability_md_exponent(double rho, double q, double alpha) {
  if (q == 0) throw DomainError("q must be nonzero");
  if (!(rho > -1 && rho < 1)) throw DomainError("rho outside (-1,1)");
  if (!(alpha >= 0)) throw DomainError("alpha must be nonnegative");
  double den = 1 + (q - 1) * rho * rho;
  if (den <= 0) return kInf;
  return alpha / den;
}

double q_stability_phi(const JointPmf& pi, double q, double s, int grid) {
  require_binary(pi);
  if (q == 0) throw DomainError("q must be nonzero");
  if (grid < 3) throw GridTooCoarse("grid needs at least 3 points");
  const double cx = pi.marginal_x()[1], cy = pi.marginal_y()[1];
  if (!(s >= 0) || s > alpha_max(pi.marginal_x()) + 1e-12) throw DomainError("s outside [0, alpha_max]");
  // Q_X with D(Q_X||pi_X) = s
  auto [lo, hi] = kl_ball(cx, s);
  std::vector<double> as;
  if (s == 0) as = {cx};
  else {
    if (binary_kl(0, cx) >= s - 1e-12) as.push_back(lo);
    if (binary_kl(1, cx) >= s - 1e-12) as.push_back(hi);
  }
  const double c = 1 - 1 / q;  // 1/q'
  const bool inner_min = q > 0;  // q < 0 takes the sup over Q_Y
  auto theta = [&](double a, double b) {
    double d = binary_min_rel_entropy(pi, a, b);
    double v = d - c * binary_kl(b, cy);
    return inner_min ? v : -v;
  };
  auto bs = linspace(0, 1, grid);
  auto inner = [&](double a) {
    int bj = 0;
    double bv = kInf;
    for (int j = 0; j < grid; ++j) {
      double v = theta(a, bs[j]);
      if (v < bv) {
        bv = v;
        bj = j;
      }
    }
    double l = bs[std::max(0, bj - 1)], r = bs[std::min(grid - 1, bj + 1)];
    bv = std::min(bv, detail::golden_min([&](double b) { return theta(a, b); }, l, r, 1e-13));
    return inner_min ? bv : -bv;
  };
  double out = q >= 1 ? kInf : -kInf;
  for (double a : as) {
    double v = inner(a);
    out = q >= 1 ? std::min(out, v) : std::max(out, v);
  }
  return out;
}

QStabilityCurve q_stability_ld_curve(const JointPmf& pi, double q, int points, int grid,
                                     const std::vector<double>& extra) {
  require_binary(pi);
  if (points < 3) throw GridTooCoarse("curve needs at least 3 points");
  const double am = alpha_max(pi.marginal_x());
  // uniform points plus a geometric cluster near the origin
  std::vector<double> s = linspace(0, am, points);
  for (int k = 0; k < points / 2; ++k) s.push_back(am * std::pow(10.0, -6 + 6.0 * k / (points / 2)));
  for (double e : extra)
    if (e >= 0 && e <= am) s.push_back(e);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  QStabilityCurve c;
  c.alpha = s;
  c.phi.resize(s.size());
  parallel_for(static_cast<int>(s.size()), [&](int i) { c.phi[i] = q_stability_phi(pi, q, s[i], grid); });
  auto env = envelope1d(s, c.phi, q >= 1 ? EnvelopeMode::convex : EnvelopeMode::concave);
  const int n = static_cast<int>(s.size());
  c.exponent.resize(n);
  if (q >= 1) {
    double m = kInf;
    for (int i = n - 1; i >= 0; --i) c.exponent[i] = m = std::min(m, env.envelope[i]);
  } else {
    double m = -kInf;
    for (int i = 0; i < n; ++i) c.exponent[i] = m = std::max(m, env.envelope[i]);
  }
  return c;
}

double q_stability_exponents(const JointPmf& pi, double q, double alpha, Regime regime) {
  if (q == 0) throw DomainError("q must be nonzero");
  if (!(alpha >= 0)) throw DomainError("alpha must be nonnegative");
  if (regime == Regime::MD) {
    require_binary(pi);
    const double a = pi(0, 0);
    if (std::abs(pi(1, 1) - a) > 1e-12 || std::abs(pi(0, 1) - pi(1, 0)) > 1e-12 || std::abs(2 * (a + pi(0, 1)) - 1) > 1e-12)
      throw DomainError("moderate deviations exponent needs a DSBS");
    return q_stability_md_exponent(4 * a - 1, q, alpha);
  }
  if (alpha == 0) return 0;
  auto c = q_stability_ld_curve(pi, q, 201, 400, {alpha});
  if (alpha > c.alpha.back() + 1e-12) throw DomainError("alpha above alpha_max");
  // linear interpolation on the envelope curve
  auto it = std::lower_bound(c.alpha.begin(), c.alpha.end(), alpha);
  std::size_t i = it - c.alpha.begin();
  if (i == 0) return c.exponent[0];
  if (i >= c.alpha.size()) return c.exponent.back();
  double t = (alpha - c.alpha[i - 1]) / (c.alpha[i] - c.alpha[i - 1]);
  return (1 - t) * c.exponent[i - 1] + t * c.exponent[i];
}

double q_stability_exponents(double rho, double q, double alpha, Regime regime) {
  if (regime == Regime::MD) return q_stability_md_exponent(rho, q, alpha);
  return q_stability_exponents(DsbsParams::from_rho(rho).to_joint(), q, alpha, regime);
}

}  // namespace citk
