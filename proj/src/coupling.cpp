#include "citk/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <Eigen/Dense>

#include "citk/errors.hpp"

namespace citk {

double TransportPlan::residual() const {
  double r = 0;
  for (int x = 0; x < nx; ++x) {
    double s = 0;
    for (int y = 0; y < ny; ++y) s += (*this)(x, y);
    r = std::max(r, std::abs(s - row[x]));
  }
  for (int y = 0; y < ny; ++y) {
    double s = 0;
    for (int x = 0; x < nx; ++x) s += (*this)(x, y);
    r = std::max(r, std::abs(s - col[y]));
  }
  return r;
}

namespace {

void check_marginals(const std::vector<double>& r, const std::vector<double>& c) {
  double sr = std::accumulate(r.begin(), r.end(), 0.0);
  double sc = std::accumulate(c.begin(), c.end(), 0.0);
  if (std::abs(sr - sc) > 1e-9) throw MarginalMismatch("marginals have different mass");
  for (double v : r)
    if (v < -1e-15) throw MarginalMismatch("negative marginal entry");
  for (double v : c)
    if (v < -1e-15) throw MarginalMismatch("negative marginal entry");
}

}  // namespace

LpResult transport_lp(const std::vector<double>& cost, const std::vector<double>& r0,
                      const std::vector<double>& c0) {
  const int m = static_cast<int>(r0.size()), n = static_cast<int>(c0.size());
  if (static_cast<int>(cost.size()) != m * n) throw AlphabetMismatch("cost grid has wrong shape");
  check_marginals(r0, c0);
  std::vector<double> r(r0), c(c0);
  for (double& v : r) v = std::max(v, 0.0);
  for (double& v : c) v = std::max(v, 0.0);
  double sr = std::accumulate(r.begin(), r.end(), 0.0);
  double sc = std::accumulate(c.begin(), c.end(), 0.0);
  if (sc > 0)
    for (double& v : c) v *= sr / sc;

  std::vector<double> x(m * n, 0.0);
  std::vector<char> basic(m * n, 0);

  // north-west corner
  {
    std::vector<double> rs(r), cs(c);
    int i = 0, j = 0;
    while (true) {
      double t = std::max(0.0, std::min(rs[i], cs[j]));
      x[i * n + j] = t;
      basic[i * n + j] = 1;
      rs[i] -= t;
      cs[j] -= t;
      if (i == m - 1 && j == n - 1) break;
      if ((rs[i] <= cs[j] && i < m - 1) || j == n - 1)
        ++i;
      else
        ++j;
    }
  }

  double scale = 1;
  for (double v : cost)
    if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * scale;

  std::vector<double> u(m), v(n);
  LpResult res;
  const int cap = 50000;
  for (int it = 0; it < cap; ++it) {
    // duals from the spanning tree of basic cells
    std::vector<char> ku(m, 0), kv(n, 0);
    u[0] = 0;
    ku[0] = 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          if (!basic[i * n + j]) continue;
          if (ku[i] && !kv[j]) {
            v[j] = cost[i * n + j] - u[i];
            kv[j] = 1;
            changed = true;
          } else if (!ku[i] && kv[j]) {
            u[i] = cost[i * n + j] - v[j];
            ku[i] = 1;
            changed = true;
          }
        }
    }
    int enter = -1;
    for (int k = 0; k < m * n && enter < 0; ++k)
      if (!basic[k] && cost[k] - u[k / n] - v[k % n] < -tol) enter = k;
    if (enter < 0) {
      res.pivots = it;
      break;
    }
    // path from row node ei to column node ej through basic cells
    int ei = enter / n, ej = enter % n;
    const int N = m + n;
    std::vector<int> prev(N, -1), via(N, -1);
    std::queue<int> bfs;
    bfs.push(ei);
    prev[ei] = ei;
    while (!bfs.empty()) {
      int node = bfs.front();
      bfs.pop();
      if (node == m + ej) break;
      if (node < m) {
        for (int j = 0; j < n; ++j)
          if (basic[node * n + j] && prev[m + j] < 0) {
            prev[m + j] = node;
            via[m + j] = node * n + j;
            bfs.push(m + j);
          }
      } else {
        int j = node - m;
        for (int i = 0; i < m; ++i)
          if (basic[i * n + j] && prev[i] < 0) {
            prev[i] = node;
            via[i] = i * n + j;
            bfs.push(i);
          }
      }
    }
    std::vector<int> path;  // from ej back to ei
    for (int node = m + ej; node != ei; node = prev[node]) path.push_back(via[node]);
    std::reverse(path.begin(), path.end());
    // path[0] touches row ei: minus, then alternating
    double theta = kInf;
    int leave = -1;
    for (size_t k = 0; k < path.size(); k += 2) {
      int cell = path[k];
      if (x[cell] < theta - 1e-18 || (std::abs(x[cell] - theta) <= 1e-18 && cell < leave)) {
        theta = x[cell];
        leave = cell;
      }
    }
    theta = std::max(theta, 0.0);
    x[enter] = theta;
    for (size_t k = 0; k < path.size(); ++k) x[path[k]] += (k % 2 == 0 ? -theta : theta);
    for (int k : path) x[k] = std::max(x[k], 0.0);
    basic[enter] = 1;
    basic[leave] = 0;
    x[leave] = 0;
    if (it == cap - 1) throw NonConvergence("transportation simplex pivot cap");
  }
  res.plan.nx = m;
  res.plan.ny = n;
  res.plan.q = x;
  res.plan.row = r0;
  res.plan.col = c0;
  res.u = u;
  res.v = v;
  double val = 0;
  for (int k = 0; k < m * n; ++k)
    if (x[k] > 0) val += x[k] * cost[k];
  res.value = val;
  return res;
}

double max_escape_mass(const std::vector<double>& r, const std::vector<double>& c,
                       const JointPmf& pi) {
  std::vector<double> cost(r.size() * c.size(), 0.0);
  for (size_t k = 0; k < cost.size(); ++k) cost[k] = pi.probs()[k] > 0 ? 0.0 : -1.0;
  return -transport_lp(cost, r, c).value;
}

namespace {

double lse(const double* a, int n, int stride) {
  double mx = -kInf;
  for (int i = 0; i < n; ++i) mx = std::max(mx, a[i * stride]);
  if (!std::isfinite(mx)) return mx;
  double s = 0;
  for (int i = 0; i < n; ++i) s += std::exp(a[i * stride] - mx);
  return mx + std::log(s);
}

struct SinkhornOut {
  std::vector<double> f, g, q;
  int iterations = 0;
  bool converged = false;
};

// Q = exp(f_x + g_y + logK) with marginals (r, c); rows/cols with zero mass get f = -inf
SinkhornOut sinkhorn(const std::vector<double>& logK, const std::vector<double>& r,
                     const std::vector<double>& c, int max_iter, double tol,
                     const std::vector<double>* g0 = nullptr) {
  const int m = static_cast<int>(r.size()), n = static_cast<int>(c.size());
  SinkhornOut o;
  o.f.assign(m, 0.0);
  o.g.assign(n, 0.0);
  if (g0 && static_cast<int>(g0->size()) == n)
    for (int j = 0; j < n; ++j) o.g[j] = std::isfinite((*g0)[j]) ? (*g0)[j] : 0.0;
  std::vector<double> lr(m), lc(n), buf(std::max(m, n));
  for (int i = 0; i < m; ++i) lr[i] = r[i] > 0 ? std::log(r[i]) : -kInf;
  for (int j = 0; j < n; ++j) lc[j] = c[j] > 0 ? std::log(c[j]) : -kInf;
  for (int it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < m; ++i) {
      if (r[i] <= 0) {
        o.f[i] = -kInf;
        continue;
      }
      for (int j = 0; j < n; ++j) buf[j] = c[j] > 0 ? logK[i * n + j] + o.g[j] : -kInf;
      o.f[i] = lr[i] - lse(buf.data(), n, 1);
    }
    for (int j = 0; j < n; ++j) {
      if (c[j] <= 0) {
        o.g[j] = -kInf;
        continue;
      }
      for (int i = 0; i < m; ++i) buf[i] = r[i] > 0 ? logK[i * n + j] + o.f[i] : -kInf;
      o.g[j] = lc[j] - lse(buf.data(), m, 1);
    }
    double res = 0;
    for (int i = 0; i < m; ++i) {
      if (r[i] <= 0) continue;
      double s = 0;
      for (int j = 0; j < n; ++j)
        if (c[j] > 0) s += std::exp(o.f[i] + o.g[j] + logK[i * n + j]);
      res = std::max(res, std::abs(s - r[i]));
    }
    o.iterations = it;
    if (res <= tol) {
      o.converged = true;
      break;
    }
  }
  o.q.assign(m * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (r[i] > 0 && c[j] > 0) o.q[i * n + j] = std::exp(o.f[i] + o.g[j] + logK[i * n + j]);
  return o;
}

TransportPlan make_plan(int m, int n, std::vector<double> q, const std::vector<double>& r,
                        const std::vector<double>& c) {
  TransportPlan p;
  p.nx = m;
  p.ny = n;
  p.q = std::move(q);
  p.row = r;
  p.col = c;
  return p;
}

}  // namespace

CrossEntropyResult max_cross_entropy(const std::vector<double>& px, const std::vector<double>& py,
                                     const JointPmf& pi, double s, const SinkhornOptions& opt) {
  const int m = pi.nx(), n = pi.ny();
  if (static_cast<int>(px.size()) != m || static_cast<int>(py.size()) != n)
    throw MarginalMismatch("marginal sizes do not match the joint");
  if (!(s > 0)) throw DomainError("s must be positive");
  check_marginals(px, py);
  CrossEntropyResult out;
  const bool capped = opt.zero_cost_cap > 0;
  // log2(1/pi) per cell, capped or infinite on zeros
  std::vector<double> c2(m * n);
  for (int k = 0; k < m * n; ++k) {
    double p = pi.probs()[k];
    c2[k] = p > 0 ? -std::log2(p) : (capped ? opt.zero_cost_cap : kInf);
  }
  if (!capped && max_escape_mass(px, py, pi) > 1e-12) {
    out.infinite = true;
    out.value = kInf;
    out.argmax = make_plan(m, n, std::vector<double>(m * n, 0.0), px, py);
    out.grad_x.assign(m, 0.0);
    out.grad_y.assign(n, 0.0);
    return out;
  }
  if (std::isinf(s)) {
    double big = 0;
    for (double v : c2)
      if (std::isfinite(v)) big = std::max(big, v);
    std::vector<double> cost(m * n);
    for (int k = 0; k < m * n; ++k) cost[k] = std::isfinite(c2[k]) ? -c2[k] : -(big + 1);
    LpResult lp = transport_lp(cost, px, py);
    out.value = -lp.value;
    out.argmax = lp.plan;
    out.grad_x.resize(m);
    out.grad_y.resize(n);
    for (int i = 0; i < m; ++i) out.grad_x[i] = -lp.u[i];
    for (int j = 0; j < n; ++j) out.grad_y[j] = -lp.v[j];
    out.iterations = lp.pivots;
    return out;
  }
  const double ln2 = std::log(2.0);
  std::vector<double> logK(m * n);
  for (int k = 0; k < m * n; ++k) logK[k] = std::isfinite(c2[k]) ? s * c2[k] * ln2 : -kInf;
  SinkhornOut sk = sinkhorn(logK, px, py, opt.max_iter, opt.tol, opt.warm_g);
  if (!sk.converged && opt.strict)
    throw NonConvergence("sinkhorn did not reach marginal tolerance");
  if (opt.warm_g) *opt.warm_g = sk.g;
  double val = 0, ent = 0;
  for (int k = 0; k < m * n; ++k)
    if (sk.q[k] > 0) {
      val += sk.q[k] * c2[k];
      ent -= sk.q[k] * std::log2(sk.q[k]);
    }
  out.value = val + ent / s;
  out.argmax = make_plan(m, n, sk.q, px, py);
  out.iterations = sk.iterations;
  // d/dr_x of the value is -f_x/(s ln2); rows with no mass use a tiny surrogate mass
  out.grad_x.resize(m);
  out.grad_y.resize(n);
  std::vector<double> buf(std::max(m, n));
  for (int i = 0; i < m; ++i) {
    double f = sk.f[i];
    if (!std::isfinite(f)) {
      for (int j = 0; j < n; ++j) buf[j] = py[j] > 0 ? logK[i * n + j] + sk.g[j] : -kInf;
      f = std::log(1e-300) - lse(buf.data(), n, 1);
    }
    out.grad_x[i] = -f / (s * ln2);
  }
  for (int j = 0; j < n; ++j) {
    double g = sk.g[j];
    if (!std::isfinite(g)) {
      for (int i = 0; i < m; ++i) buf[i] = px[i] > 0 ? logK[i * n + j] + sk.f[i] : -kInf;
      g = std::log(1e-300) - lse(buf.data(), m, 1);
    }
    out.grad_y[j] = -g / (s * ln2);
  }
  return out;
}

CrossEntropyResult max_cross_entropy(const Pmf& px, const Pmf& py, const JointPmf& pi, double s,
                                     const SinkhornOptions& opt) {
  return max_cross_entropy(px.probs(), py.probs(), pi, s, opt);
}

RelEntResult min_relative_entropy(const std::vector<double>& qx, const std::vector<double>& qy,
                                  const JointPmf& pi, int max_iter, double tol) {
  const int m = pi.nx(), n = pi.ny();
  if (static_cast<int>(qx.size()) != m || static_cast<int>(qy.size()) != n)
    throw MarginalMismatch("marginal sizes do not match the joint");
  check_marginals(qx, qy);
  RelEntResult out;
  std::vector<double> cost(m * n);
  for (int k = 0; k < m * n; ++k) cost[k] = pi.probs()[k] > 0 ? 0.0 : 1.0;
  if (transport_lp(cost, qx, qy).value > 1e-12) {
    out.infinite = true;
    out.value = kInf;
    out.argmin = make_plan(m, n, std::vector<double>(m * n, 0.0), qx, qy);
    return out;
  }
  std::vector<double> logK(m * n);
  for (int k = 0; k < m * n; ++k) logK[k] = pi.probs()[k] > 0 ? std::log(pi.probs()[k]) : -kInf;
  SinkhornOut sk = sinkhorn(logK, qx, qy, max_iter, tol);
  if (!sk.converged) throw NonConvergence("IPF did not reach marginal tolerance");
  double d = 0;
  for (int k = 0; k < m * n; ++k)
    if (sk.q[k] > 0) d += sk.q[k] * (std::log2(sk.q[k]) - std::log2(pi.probs()[k]));
  out.value = std::max(d, 0.0);
  out.argmin = make_plan(m, n, sk.q, qx, qy);
  out.iterations = sk.iterations;
  const double ln2 = std::log(2.0);
  out.grad_x.resize(m);
  out.grad_y.resize(n);
  std::vector<double> buf(std::max(m, n));
  for (int i = 0; i < m; ++i) {
    double f = sk.f[i];
    if (!std::isfinite(f)) {
      for (int j = 0; j < n; ++j) buf[j] = qy[j] > 0 ? logK[i * n + j] + sk.g[j] : -kInf;
      f = std::log(1e-300) - lse(buf.data(), n, 1);
    }
    out.grad_x[i] = f / ln2;
  }
  for (int j = 0; j < n; ++j) {
    double g = sk.g[j];
    if (!std::isfinite(g)) {
      for (int i = 0; i < m; ++i) buf[i] = qx[i] > 0 ? logK[i * n + j] + sk.f[i] : -kInf;
      g = std::log(1e-300) - lse(buf.data(), m, 1);
    }
    out.grad_y[j] = g / ln2;
  }
  return out;
}

RelEntResult min_relative_entropy(const Pmf& qx, const Pmf& qy, const JointPmf& pi, int max_iter,
                                  double tol) {
  return min_relative_entropy(qx.probs(), qy.probs(), pi, max_iter, tol);
}

SignedPerturbation::SignedPerturbation(std::vector<double> e) : eta(std::move(e)) {
  double s = std::accumulate(eta.begin(), eta.end(), 0.0);
  if (std::abs(s) > 1e-12) throw DomainError("perturbation does not sum to zero");
}

ChiSquareResult min_chi_square(const SignedPerturbation& ex, const SignedPerturbation& ey,
                               const JointPmf& pi) {
  const int m = pi.nx(), n = pi.ny();
  if (static_cast<int>(ex.eta.size()) != m || static_cast<int>(ey.eta.size()) != n)
    throw AlphabetMismatch("perturbation sizes do not match the joint");
  // stationarity: eta_xy = pi_xy (u_x + v_y)
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + n, m + n);
  Eigen::VectorXd b(m + n);
  for (int x = 0; x < m; ++x) {
    for (int y = 0; y < n; ++y) {
      double p = pi(x, y);
      A(x, x) += p;
      A(x, m + y) += p;
      A(m + y, x) += p;
      A(m + y, m + y) += p;
    }
    b(x) = ex.eta[x];
  }
  for (int y = 0; y < n; ++y) b(m + y) = ey.eta[y];
  Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(b);
  if ((A * sol - b).lpNorm<Eigen::Infinity>() > 1e-9)
    throw SingularSystem("perturbation not supported by the joint");
  ChiSquareResult out;
  out.eta_xy.resize(m * n);
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < n; ++y) {
      double t = sol(x) + sol(m + y);
      out.eta_xy[x * n + y] = pi(x, y) * t;
      out.value += pi(x, y) * t * t;
    }
  return out;
}

MaximalCoupling maximal_coupling(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw AlphabetMismatch("pmf sizes differ");
  const int k = p.size();
  MaximalCoupling out;
  std::vector<double> plan(k * k, 0.0), ep(k), eq(k);
  double tv = 0;
  for (int i = 0; i < k; ++i) {
    double mn = std::min(p[i], q[i]);
    plan[i * k + i] = mn;
    ep[i] = p[i] - mn;
    eq[i] = q[i] - mn;
    tv += ep[i];
  }
  if (tv > 0)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) plan[i * k + j] += ep[i] * eq[j] / tv;
  out.plan = make_plan(k, k, plan, p.probs(), q.probs());
  out.mismatch = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) out.mismatch += plan[i * k + j];
  return out;
}

GuessingCoupling maximal_guessing_coupling(const Pmf& qx, const Pmf& qy) {
  const int m = qx.size(), n = qy.size();
  double space = std::pow(static_cast<double>(n), m);
  if (space > 1e6) throw SearchSpaceTooLarge("too many functions to enumerate");
  const long total = static_cast<long>(std::llround(space));
  GuessingCoupling out;
  out.lhs = out.rhs = kInf;
  std::vector<int> f(m, 0);
  std::vector<double> cost(m * n);
  for (long idx = 0; idx < total; ++idx) {
    long t = idx;
    for (int x = 0; x < m; ++x) {
      f[x] = static_cast<int>(t % n);
      t /= n;
    }
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < n; ++y) cost[x * n + y] = (y == f[x]) ? 0.0 : 1.0;
    double l = transport_lp(cost, qx.probs(), qy.probs()).value;
    std::vector<double> push(n, 0.0);
    for (int x = 0; x < m; ++x) push[f[x]] += qx[x];
    double r = 0;
    for (int y = 0; y < n; ++y) r += std::abs(push[y] - qy[y]);
    r *= 0.5;
    if (r < out.rhs - 1e-15) {
      out.rhs = r;
      out.best_f = f;
    }
    out.lhs = std::min(out.lhs, l);
  }
  if (std::abs(out.lhs - out.rhs) > 1e-12)
    throw ConstraintViolation("guessing-coupling equality failed");
  return out;
}

}  // namespace citk
