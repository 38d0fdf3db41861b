#include "citk/common_info.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>

#include "citk/coupling.hpp"
#include "citk/errors.hpp"
#include "citk/nnrank.hpp"
#include "citk/parallel.hpp"
#include "numutil.hpp"

namespace citk {

using detail::neg_plogp_grad;

std::vector<double> MarkovTriple::induced() const {
  std::vector<double> q(nx * ny, 0.0);
  for (int w = 0; w < card_w; ++w) {
    if (pw[w] <= 0) continue;
    for (int x = 0; x < nx; ++x) {
      double a = pw[w] * px[w * nx + x];
      if (a == 0) continue;
      for (int y = 0; y < ny; ++y) q[x * ny + y] += a * py[w * ny + y];
    }
  }
  return q;
}

std::vector<double> MarkovTriple::x_given(int w) const {
  return std::vector<double>(px.begin() + w * nx, px.begin() + (w + 1) * nx);
}

std::vector<double> MarkovTriple::y_given(int w) const {
  return std::vector<double>(py.begin() + w * ny, py.begin() + (w + 1) * ny);
}

double MarkovTriple::violation(const JointPmf& pi) const {
  auto q = induced();
  double v = 0;
  for (size_t k = 0; k < q.size(); ++k) v = std::max(v, std::abs(q[k] - pi.probs()[k]));
  return v;
}

double MarkovTriple::cond_entropy() const {
  double s = 0;
  for (int w = 0; w < card_w; ++w)
    if (pw[w] > 0) s += pw[w] * (entropy(x_given(w)) + entropy(y_given(w)));
  return s;
}

void MarkovTriple::validate() const {
  auto chk = [](const double* v, int n) {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      if (v[i] < -1e-12) throw DomainError("negative probability in Markov triple");
      s += v[i];
    }
    if (std::abs(s - 1) > 1e-9) throw DomainError("Markov triple column does not sum to one");
  };
  chk(pw.data(), card_w);
  for (int w = 0; w < card_w; ++w) {
    chk(px.data() + w * nx, nx);
    chk(py.data() + w * ny, ny);
  }
}

namespace {

// objective on a triple; writes the gradient into a triple-shaped buffer
using TripleObjective = std::function<double(const MarkovTriple&, MarkovTriple&)>;

struct Layout {
  int W, X, Y;
  int size() const { return W + W * X + W * Y; }
  void unpack(const std::vector<double>& z, MarkovTriple& t) const {
    std::copy(z.begin(), z.begin() + W, t.pw.begin());
    std::copy(z.begin() + W, z.begin() + W + W * X, t.px.begin());
    std::copy(z.begin() + W + W * X, z.end(), t.py.begin());
  }
  void pack(const MarkovTriple& t, std::vector<double>& z) const {
    z.resize(size());
    std::copy(t.pw.begin(), t.pw.end(), z.begin());
    std::copy(t.px.begin(), t.px.end(), z.begin() + W);
    std::copy(t.py.begin(), t.py.end(), z.begin() + W + W * X);
  }
  void project(std::vector<double>& z) const {
    detail::project_simplex(z.data(), W);
    for (int w = 0; w < W; ++w) detail::project_simplex(z.data() + W + w * X, X);
    for (int w = 0; w < W; ++w) detail::project_simplex(z.data() + W + W * X + w * Y, Y);
  }
};

MarkovTriple random_triple(std::mt19937_64& g, int W, int X, int Y) {
  MarkovTriple t(W, X, Y);
  t.pw = detail::dirichlet(g, W);
  // low concentration favors near-deterministic conditionals
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (int w = 0; w < W; ++w) {
    auto a = detail::dirichlet(g, X, u(g));
    auto b = detail::dirichlet(g, Y, u(g));
    std::copy(a.begin(), a.end(), t.px.begin() + w * X);
    std::copy(b.begin(), b.end(), t.py.begin() + w * Y);
  }
  return t;
}

MarkovTriple resize_triple(const MarkovTriple& t, int W) {
  if (t.card_w == W) return t;
  MarkovTriple r(W, t.nx, t.ny);
  int k = std::min(W, t.card_w);
  for (int w = 0; w < W; ++w) {
    int src = w < k ? w : 0;
    for (int x = 0; x < t.nx; ++x) r.px[w * t.nx + x] = t.px[src * t.nx + x];
    for (int y = 0; y < t.ny; ++y) r.py[w * t.ny + y] = t.py[src * t.ny + y];
    r.pw[w] = w < k ? t.pw[w] : 0.0;
  }
  // truncation changes the induced joint unless the dropped atoms carry no mass
  double s = std::accumulate(r.pw.begin(), r.pw.end(), 0.0);
  for (double& p : r.pw) p /= s;
  return r;
}

// W copies X (or Y when by_y); the other side is the conditional of pi
MarkovTriple trivial_triple(const JointPmf& pi, bool by_y) {
  const int X = pi.nx(), Y = pi.ny();
  const int W = by_y ? Y : X;
  MarkovTriple t(W, X, Y);
  auto m = by_y ? pi.marginal_y().probs() : pi.marginal_x().probs();
  for (int w = 0; w < W; ++w) {
    t.pw[w] = m[w];
    if (by_y) {
      t.py[w * Y + w] = 1;
      for (int x = 0; x < X; ++x) t.px[w * X + x] = m[w] > 0 ? pi(x, w) / m[w] : 1.0 / X;
    } else {
      t.px[w * X + w] = 1;
      for (int y = 0; y < Y; ++y) t.py[w * Y + y] = m[w] > 0 ? pi(w, y) / m[w] : 1.0 / Y;
    }
  }
  return t;
}

// augmented-Lagrangian multistart over Markov triples with induced joint pi
OptResult minimize_markov(const JointPmf& pi, const std::function<TripleObjective()>& make_obj,
                          const std::function<double(const MarkovTriple&)>& final_value,
                          const OptimizerConfig& cfg) {
  const int X = pi.nx(), Y = pi.ny();
  const int W = cfg.card_w > 0 ? cfg.card_w : X * Y;
  if (W < 1) throw DomainError("card_w must be positive");
  const Layout L{W, X, Y};
  std::vector<MarkovTriple> starts;
  for (const auto& w : cfg.warm) starts.push_back(resize_triple(w, W));
  // W = X and W = Y decompositions are always feasible
  if (W >= X) starts.push_back(resize_triple(trivial_triple(pi, false), W));
  if (W >= Y) starts.push_back(resize_triple(trivial_triple(pi, true), W));
  const int n_warm = static_cast<int>(starts.size());
  const int total = cfg.restarts + n_warm;
  std::vector<OptResult> results(total);

  parallel_for(total, [&](int r) {
    auto g = make_rng(cfg.seed, static_cast<std::uint64_t>(r));
    MarkovTriple t = r < n_warm ? starts[r] : random_triple(g, W, X, Y);
    TripleObjective obj = make_obj();
    std::vector<double> lam(X * Y, 0.0);
    double mu = cfg.mu0;
    MarkovTriple tt(W, X, Y), grad(W, X, Y);
    std::vector<double> z;
    L.pack(t, z);
    auto fg = [&](const std::vector<double>& zz, std::vector<double>& gz) {
      L.unpack(zz, tt);
      std::fill(grad.pw.begin(), grad.pw.end(), 0.0);
      std::fill(grad.px.begin(), grad.px.end(), 0.0);
      std::fill(grad.py.begin(), grad.py.end(), 0.0);
      double f = obj(tt, grad);
      auto q = tt.induced();
      std::vector<double> G(X * Y);
      for (int k = 0; k < X * Y; ++k) {
        double c = q[k] - pi.probs()[k];
        f += lam[k] * c + 0.5 * mu * c * c;
        G[k] = lam[k] + mu * c;
      }
      for (int w = 0; w < W; ++w)
        for (int x = 0; x < X; ++x)
          for (int y = 0; y < Y; ++y) {
            double Gk = G[x * Y + y];
            double a = tt.px[w * X + x], b = tt.py[w * Y + y];
            grad.pw[w] += Gk * a * b;
            grad.px[w * X + x] += Gk * tt.pw[w] * b;
            grad.py[w * Y + y] += Gk * tt.pw[w] * a;
          }
      L.pack(grad, gz);
      return f;
    };
    auto proj = [&](std::vector<double>& zz) { L.project(zz); };
    for (int round = 0; round < cfg.rounds; ++round) {
      detail::spg(z, fg, proj, cfg.inner_iters, cfg.inner_tol);
      L.unpack(z, tt);
      auto q = tt.induced();
      for (int k = 0; k < X * Y; ++k) lam[k] += mu * (q[k] - pi.probs()[k]);
      mu *= 10;
    }
    OptResult& res = results[r];
    res.witness = MarkovTriple(W, X, Y);
    L.unpack(z, res.witness);
    res.violation = res.witness.violation(pi);
    res.value = final_value(res.witness);
    res.best_restart = r;
  });

  // the starts themselves are admissible candidates
  for (int i = 0; i < n_warm; ++i) {
    OptResult c;
    c.witness = starts[i];
    c.violation = c.witness.violation(pi);
    c.value = c.violation <= cfg.feas_tol ? final_value(c.witness) : kInf;
    c.best_restart = total + i;
    results.push_back(std::move(c));
  }
  // deterministic reduction over (value, restart index) among feasible candidates
  int best = -1;
  for (int r = 0; r < static_cast<int>(results.size()); ++r) {
    if (results[r].violation > cfg.feas_tol || !std::isfinite(results[r].value)) continue;
    if (best < 0 || results[r].value < results[best].value) best = r;
  }
  if (best < 0) {
    double v = kInf;
    for (auto& x : results) v = std::min(v, x.violation);
    throw ConstraintViolation("no restart met the marginal constraint (best violation " +
                              std::to_string(v) + ")");
  }
  return results[best];
}

int default_card(const JointPmf& pi, const OptimizerConfig& cfg) {
  return cfg.card_w > 0 ? cfg.card_w : pi.nx() * pi.ny();
}

}  // namespace

double wyner_ci_closed(const DsbsParams& d) {
  double a = d.a;
  return std::max(0.0, 1 + h(2 * a * (1 - a)) - 2 * h(a));
}

double wyner_ci_closed(const SbesParams& s) {
  if (!(s.p >= 0 && s.p <= 1)) throw DomainError("p outside [0,1]");
  return s.p <= 0.5 ? 1.0 : h(s.p);
}

double wyner_ci_closed(const GaussianPair& g) {
  if (!(g.rho > -1 && g.rho < 1)) throw DomainError("rho outside (-1,1)");
  double r = std::abs(g.rho);
  return 0.5 * std::log2((1 + r) / (1 - r));
}

OptResult wyner_ci_numeric(const JointPmf& pi, const OptimizerConfig& cfg) {
  const double hpi = shannon_entropy(pi);
  auto make = [] {
    return TripleObjective([](const MarkovTriple& t, MarkovTriple& g) {
      double f = 0;
      for (int w = 0; w < t.card_w; ++w) {
        double hx = 0, hy = 0;
        for (int x = 0; x < t.nx; ++x) {
          double p = t.px[w * t.nx + x];
          if (p > 0) hx -= p * std::log2(p);
          g.px[w * t.nx + x] -= t.pw[w] * neg_plogp_grad(p);
        }
        for (int y = 0; y < t.ny; ++y) {
          double p = t.py[w * t.ny + y];
          if (p > 0) hy -= p * std::log2(p);
          g.py[w * t.ny + y] -= t.pw[w] * neg_plogp_grad(p);
        }
        f -= t.pw[w] * (hx + hy);
        g.pw[w] -= hx + hy;
      }
      return f;
    });
  };
  auto value = [](const MarkovTriple& t) {
    return std::max(0.0, entropy(t.induced()) - t.cond_entropy());
  };
  OptResult r = minimize_markov(pi, make, value, cfg);
  r.value = std::min(r.value, hpi);
  return r;
}

namespace {

// per-restart state: warm Sinkhorn potentials for each (w, w') pair
struct PsiEval {
  const JointPmf* pi;
  double s;
  PsiSide side;
  std::vector<std::vector<double>> warm;

  double hs(const std::vector<double>& a, const std::vector<double>& b, int slot,
            std::vector<double>* gx, std::vector<double>* gy) {
    SinkhornOptions o;
    o.zero_cost_cap = kZeroCellCap;
    o.strict = false;
    o.max_iter = 20000;
    o.tol = 1e-12;
    if (slot >= static_cast<int>(warm.size())) warm.resize(slot + 1);
    o.warm_g = &warm[slot];
    auto r = max_cross_entropy(a, b, *pi, s, o);
    if (gx) *gx = r.grad_x;
    if (gy) *gy = r.grad_y;
    return r.value;
  }

  double operator()(const MarkovTriple& t, MarkovTriple* g) {
    const int W = t.card_w, X = t.nx, Y = t.ny;
    const double c = std::isinf(s) ? 1.0 : (1 + s) / s;
    double f = 0;
    std::vector<double> hx(W), hy(W);
    for (int w = 0; w < W; ++w) {
      hx[w] = entropy(t.x_given(w));
      hy[w] = entropy(t.y_given(w));
      f -= c * t.pw[w] * (hx[w] + hy[w]);
      if (g) {
        g->pw[w] -= c * (hx[w] + hy[w]);
        for (int x = 0; x < X; ++x) g->px[w * X + x] -= c * t.pw[w] * neg_plogp_grad(t.px[w * X + x]);
        for (int y = 0; y < Y; ++y) g->py[w * Y + y] -= c * t.pw[w] * neg_plogp_grad(t.py[w * Y + y]);
      }
    }
    std::vector<double> gx, gy;
    if (side == PsiSide::upper) {
      for (int w = 0; w < W; ++w) {
        double v = hs(t.x_given(w), t.y_given(w), w, g ? &gx : nullptr, g ? &gy : nullptr);
        f += t.pw[w] * v;
        if (g) {
          g->pw[w] += v;
          for (int x = 0; x < X; ++x) g->px[w * X + x] += t.pw[w] * gx[x];
          for (int y = 0; y < Y; ++y) g->py[w * Y + y] += t.pw[w] * gy[y];
        }
      }
      return f;
    }
    // lower: inner LP over couplings of (P_W, P_W)
    std::vector<double> C(W * W);
    std::vector<std::vector<double>> GX(W * W), GY(W * W);
    for (int w = 0; w < W; ++w)
      for (int v = 0; v < W; ++v)
        C[w * W + v] = hs(t.x_given(w), t.y_given(v), w * W + v, g ? &GX[w * W + v] : nullptr,
                          g ? &GY[w * W + v] : nullptr);
    auto lp = transport_lp(C, t.pw, t.pw);
    f += lp.value;
    if (g) {
      for (int w = 0; w < W; ++w) g->pw[w] += lp.u[w] + lp.v[w];
      for (int w = 0; w < W; ++w)
        for (int v = 0; v < W; ++v) {
          double q = lp.plan.q[w * W + v];
          if (q <= 0) continue;
          for (int x = 0; x < X; ++x) g->px[w * X + x] += q * GX[w * W + v][x];
          for (int y = 0; y < Y; ++y) g->py[v * Y + y] += q * GY[w * W + v][y];
        }
    }
    return f;
  }
};

}  // namespace

double pseudo_ci_objective(const JointPmf& pi, const MarkovTriple& t, double s, PsiSide side) {
  PsiEval e{&pi, s, side, {}};
  return e(t, nullptr);
}

OptResult pseudo_ci(const JointPmf& pi, double s, PsiSide side, const OptimizerConfig& cfg0) {
  if (!(s > 0)) throw DomainError("s must be positive");
  OptimizerConfig cfg = cfg0;
  cfg.card_w = default_card(pi, cfg0);
  if (cfg.warm.empty()) {
    OptimizerConfig wc = cfg;
    cfg.warm.push_back(wyner_ci_numeric(pi, wc).witness);
    if (side == PsiSide::lower) {
      OptimizerConfig uc = cfg;
      cfg.warm.push_back(pseudo_ci(pi, s, PsiSide::upper, uc).witness);
    }
  }
  auto make = [&pi, s, side] {
    auto st = std::make_shared<PsiEval>(PsiEval{&pi, s, side, {}});
    return TripleObjective([st](const MarkovTriple& t, MarkovTriple& g) { return (*st)(t, &g); });
  };
  auto value = [&pi, s, side](const MarkovTriple& t) { return pseudo_ci_objective(pi, t, s, side); };
  return minimize_markov(pi, make, value, cfg);
}

double renyi_ci_dsbs_qstar(double a, double s) {
  if (!(a > 0 && a < 0.5)) throw DomainError("a outside (0,1/2)");
  if (!(s > 0 && s <= 1)) throw DomainError("s outside (0,1]");
  double p = 2 * a * (1 - a);
  double al = (1 - p) / 2, be = p / 2;
  double k = std::pow(al / be, 2 * s);
  double b = k * (1 - 2 * a) + 2 * a;
  double disc = k * k * (1 - 2 * a) * (1 - 2 * a) + 4 * k * a * (1 - a);
  // rationalized root avoids cancellation when k is close to 1
  return 2 * a * a / (b + std::sqrt(disc));
}

double renyi_ci_dsbs_upper(double a, double s) {
  double q = renyi_ci_dsbs_qstar(a, s);
  double p = 2 * a * (1 - a);
  double al = (1 - p) / 2, be = p / 2;
  double h4 = entropy({q, a - q, a - q, 1 + q - 2 * a});
  double inner = h4 + s * (1 - 2 * (a - q)) * std::log2(1 / al) + 2 * s * (a - q) * std::log2(1 / be);
  return -((1 + s) / s) * 2 * h(a) + inner / s;
}

ExactCi exact_ci_dsbs(double a) {
  if (!(a >= 0 && a <= 0.5)) throw DomainError("a outside [0,1/2]");
  double ab = 1 - a;
  double sq = a * a + ab * ab;
  ExactCi r;
  double last = a > 0 ? 2 * a * std::log2(a * ab) : 0.0;
  r.value = -2 * h(a) - (1 - 2 * a) * std::log2(sq / 2) - last;
  r.gap_over_wyner = a > 0 ? 2 * a * a * std::log2(sq / (2 * a * ab)) : 0.0;
  return r;
}

double min_dinf_product(const JointPmf& pi, int restarts, std::uint64_t seed, std::vector<double>* qx_out,
                        std::vector<double>* qy_out) {
  const int X = pi.nx(), Y = pi.ny();
  // for fixed Q_Y the best Q_X is proportional to 1/c_x with c_x = max_y Q_Y(y)/pi(x,y)
  auto best_response = [&](const std::vector<double>& qy, bool transpose, std::vector<double>& qx) {
    int A = transpose ? Y : X, B = transpose ? X : Y;
    qx.assign(A, 0.0);
    double z = 0;
    for (int i = 0; i < A; ++i) {
      double c = 0;
      for (int j = 0; j < B; ++j) {
        if (qy[j] <= 0) continue;
        double p = transpose ? pi(j, i) : pi(i, j);
        c = p > 0 ? std::max(c, qy[j] / p) : kInf;
      }
      qx[i] = std::isinf(c) ? 0.0 : 1 / c;
      z += qx[i];
    }
    if (z <= 0) return kInf;
    for (double& v : qx) v /= z;
    return -std::log2(z);  // log of 1 / sum(1/c)
  };
  double best = kInf;
  std::vector<double> bx, by;
  auto run = [&](std::vector<double> qy) {
    std::vector<double> qx;
    double val = kInf;
    for (int it = 0; it < 200; ++it) {
      double v1 = best_response(qy, false, qx);
      if (!std::isfinite(v1)) return;
      double v2 = best_response(qx, true, qy);
      if (!(v2 < val - 1e-15)) {
        val = std::min(val, v2);
        break;
      }
      val = v2;
    }
    if (val < best) {
      best = val;
      bx = qx;
      by = qy;
    }
  };
  for (int y = 0; y < Y; ++y) {
    std::vector<double> e(Y, 0.0);
    e[y] = 1;
    run(e);
  }
  run(pi.marginal_y().probs());
  auto g = make_rng(seed, 0x51a);
  for (int r = 0; r < restarts; ++r) {
    // random supports, then random weights
    std::vector<double> qy = detail::dirichlet(g, Y, 0.5);
    std::bernoulli_distribution keep(0.6);
    bool any = false;
    for (double& v : qy) {
      if (!keep(g)) v = 0;
      any |= v > 0;
    }
    if (!any) qy[r % Y] = 1;
    double s = std::accumulate(qy.begin(), qy.end(), 0.0);
    for (double& v : qy) v /= s;
    run(qy);
  }
  if (qx_out) *qx_out = bx;
  if (qy_out) *qy_out = by;
  return std::max(best, 0.0);
}

OptResult common_entropy(const JointPmf& pi, double alpha, const OptimizerConfig& cfg) {
  if (!(alpha >= 0)) throw DomainError("alpha must be nonnegative");
  OptResult out;
  if (alpha == 0) {
    NonnegMatrix M(pi.nx(), pi.ny(), pi.probs());
    auto r = nonneg_rank(M);
    out.value = std::log2(static_cast<double>(r.upper));
    return out;
  }
  if (std::isinf(alpha)) {
    out.value = min_dinf_product(pi, std::max(cfg.restarts, 16), cfg.seed);
    return out;
  }
  auto make = [alpha] {
    return TripleObjective([alpha](const MarkovTriple& t, MarkovTriple& g) {
      if (alpha == 1) {
        double f = 0;
        for (int w = 0; w < t.card_w; ++w) {
          double p = t.pw[w];
          if (p > 0) f -= p * std::log2(p);
          g.pw[w] += neg_plogp_grad(p);
        }
        return f;
      }
      double s = 0;
      for (double p : t.pw)
        if (p > 0) s += std::pow(p, alpha);
      for (int w = 0; w < t.card_w; ++w) {
        double p = std::max(t.pw[w], 1e-300);
        g.pw[w] += alpha / (1 - alpha) * std::pow(p, alpha - 1) / (s * std::log(2.0));
      }
      return std::log2(s) / (1 - alpha);
    });
  };
  auto value = [alpha](const MarkovTriple& t) { return renyi_entropy(t.pw, alpha); };
  out = minimize_markov(pi, make, value, cfg);
  return out;
}

CiBounds gaussian_exact_ci_bounds(double rho) {
  if (!(rho >= 0 && rho < 1)) throw DomainError("rho outside [0,1)");
  CiBounds b;
  b.lower = 0.5 * std::log2((1 + rho) / (1 - rho));
  b.upper = b.lower + rho * std::log2(std::exp(1.0)) / (1 + rho);
  return b;
}

double li_elgamal_bound(double rho) { return 0.5 * std::log2(1 / (1 - rho * rho)) + 24; }

double gkw_ci(const JointPmf& pi) {
  const int X = pi.nx(), Y = pi.ny();
  // union-find over row and column nodes joined by support cells
  std::vector<int> parent(X + Y);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      if (pi(x, y) > 0) parent[find(x)] = find(X + y);
  std::vector<double> mass(X + Y, 0.0);
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) mass[find(x)] += pi(x, y);
  return entropy(mass);
}

}  // namespace citk
