#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace citk::detail {

// Euclidean projection of v[0, n) onto the probability simplex
inline void project_simplex(double* v, int n) {
  std::vector<double> u(v, v + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0, theta = 0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    double t = (css - 1) / (i + 1);
    if (u[i] - t > 0) theta = t;
  }
  double s = 0;
  for (int i = 0; i < n; ++i) s += (v[i] = std::max(v[i] - theta, 0.0));
  // large inputs lose digits in the subtraction
  if (s > 0)
    for (int i = 0; i < n; ++i) v[i] /= s;
}

inline std::vector<double> dirichlet(std::mt19937_64& g, int k, double conc = 1.0) {
  std::gamma_distribution<double> gd(conc, 1.0);
  std::vector<double> v(k);
  double s = 0;
  for (double& x : v) s += (x = gd(g) + 1e-300);
  for (double& x : v) x /= s;
  return v;
}

// -d/dp of p log2 p, clamped away from zero
inline double neg_plogp_grad(double p) { return -std::log2(std::max(p, 1e-300)) - 1 / std::log(2.0); }

// golden-section minimization on [lo, hi]
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol,
                         double* xmin = nullptr) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  if (xmin) *xmin = x;
  return f(x);
}

// Nelder-Mead; f may return +inf outside the admissible set
inline double nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double>& x,
                          double step, int iters) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> P(n + 1, x);
  std::vector<double> F(n + 1);
  for (int i = 0; i <= n; ++i) {
    if (i > 0) P[i][i - 1] += (x[i - 1] >= 0 ? 1 : -1) * step * std::max(1e-3, std::abs(x[i - 1]));
    F[i] = f(P[i]);
  }
  std::vector<int> o(n + 1);
  std::vector<double> c(n), xr(n), xe(n), xc(n);
  auto along = [&](double k, const std::vector<double>& worst, std::vector<double>& out) {
    for (int d = 0; d < n; ++d) out[d] = c[d] + k * (worst[d] - c[d]);
  };
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i <= n; ++i) o[i] = i;
    std::sort(o.begin(), o.end(), [&](int u, int v) { return F[u] < F[v]; });
    auto Pc = P;
    auto Fc = F;
    for (int i = 0; i <= n; ++i) {
      P[i] = Pc[o[i]];
      F[i] = Fc[o[i]];
    }
    std::fill(c.begin(), c.end(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < n; ++d) c[d] += P[i][d] / n;
    along(-1, P[n], xr);
    double fr = f(xr);
    if (fr < F[0]) {
      along(-2, P[n], xe);
      double fe = f(xe);
      if (fe < fr) {
        P[n] = xe;
        F[n] = fe;
      } else {
        P[n] = xr;
        F[n] = fr;
      }
    } else if (fr < F[n - 1]) {
      P[n] = xr;
      F[n] = fr;
    } else {
      along(0.5, P[n], xc);
      double fc = f(xc);
      if (fc < F[n]) {
        P[n] = xc;
        F[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int d = 0; d < n; ++d) P[i][d] = P[0][d] + 0.5 * (P[i][d] - P[0][d]);
          F[i] = f(P[i]);
        }
      }
    }
  }
  int b = static_cast<int>(std::min_element(F.begin(), F.end()) - F.begin());
  x = P[b];
  return F[b];
}

struct SpgResult {
  double f = 0;
  int iters = 0;
};

// spectral projected gradient with nonmonotone line search; proj maps a point onto the feasible set
inline SpgResult spg(std::vector<double>& z,
                     const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg,
                     const std::function<void(std::vector<double>&)>& proj, int max_iter, double tol) {
  const int n = static_cast<int>(z.size());
  const int M = 10;
  proj(z);
  std::vector<double> g(n), zn(n), gn(n), d(n);
  double f = fg(z, g);
  std::vector<double> hist{f};
  double alpha = 1;
  {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = z[i] - g[i];
    proj(t);
    double m = 0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(t[i] - z[i]));
    alpha = m > 0 ? std::min(1e6, 1 / m) : 1;
  }
  int it = 0;
  for (; it < max_iter; ++it) {
    for (int i = 0; i < n; ++i) d[i] = z[i] - alpha * g[i];
    proj(d);
    double dn = 0, gd = 0;
    for (int i = 0; i < n; ++i) {
      d[i] -= z[i];
      dn = std::max(dn, std::abs(d[i]));
      gd += g[i] * d[i];
    }
    if (dn < tol) break;
    double fmax = *std::max_element(hist.begin(), hist.end());
    double lam = 1, fn = 0;
    while (true) {
      for (int i = 0; i < n; ++i) zn[i] = z[i] + lam * d[i];
      fn = fg(zn, gn);
      if (fn <= fmax + 1e-4 * lam * gd || lam < 1e-12) break;
      // safeguarded quadratic backtrack
      double lt = -0.5 * gd * lam * lam / (fn - f - lam * gd);
      lam = (lt >= 0.1 * lam && lt <= 0.9 * lam) ? lt : 0.5 * lam;
    }
    if (!(fn <= fmax + 1e-4 * lam * gd)) break;
    double ss = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
      double si = zn[i] - z[i], yi = gn[i] - g[i];
      ss += si * si;
      sy += si * yi;
    }
    alpha = sy > 0 ? std::clamp(ss / sy, 1e-10, 1e6) : 1e6;
    z.swap(zn);
    g.swap(gn);
    f = fn;
    hist.push_back(f);
    if (static_cast<int>(hist.size()) > M) hist.erase(hist.begin());
  }
  return {f, it};
}

}  // namespace citk::detail
