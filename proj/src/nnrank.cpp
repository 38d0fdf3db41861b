#include "citk/nnrank.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Dense>

#include "citk/errors.hpp"
#include "citk/parallel.hpp"

namespace citk {

NonnegMatrix::NonnegMatrix(int m, int k, std::vector<double> entries)
    : m_(m), k_(k), e_(std::move(entries)) {
  if (m <= 0 || k <= 0 || static_cast<int>(e_.size()) != m * k) throw DomainError("matrix has wrong shape");
  for (double v : e_)
    if (!(v >= 0)) throw DomainError("matrix has a negative entry");
  if (l1() <= 0) throw DomainError("zero matrix");
}

NonnegMatrix NonnegMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DomainError("empty matrix");
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.size() != rows[0].size()) throw DomainError("ragged matrix");
    v.insert(v.end(), r.begin(), r.end());
  }
  return NonnegMatrix(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), v);
}

double NonnegMatrix::l1() const { return std::accumulate(e_.begin(), e_.end(), 0.0); }

NonnegMatrix NonnegMatrix::kron(const NonnegMatrix& o) const {
  int M = m_ * o.m_, K = k_ * o.k_;
  std::vector<double> v(M * K);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < k_; ++j)
      for (int a = 0; a < o.m_; ++a)
        for (int b = 0; b < o.k_; ++b) v[(i * o.m_ + a) * K + j * o.k_ + b] = (*this)(i, j) * o(a, b);
  return NonnegMatrix(M, K, v);
}

JointPmf induced_distribution(const NonnegMatrix& M) {
  std::vector<double> v(M.entries());
  double s = M.l1();
  for (double& x : v) x /= s;
  return JointPmf(M.rows(), M.cols(), v);
}

int linear_rank(const NonnegMatrix& M, double tol) {
  Eigen::MatrixXd A(M.rows(), M.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) A(i, j) = M(i, j);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(tol);
  return static_cast<int>(lu.rank());
}

std::vector<std::pair<int, int>> max_independent_entries(const NonnegMatrix& M, int cap) {
  std::vector<std::pair<int, int>> nz;
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) > 0) nz.emplace_back(i, j);
  const int N = static_cast<int>(nz.size());
  // entries (a,b),(c,d) are independent when M_ad M_cb = 0
  std::vector<std::vector<char>> adj(N, std::vector<char>(N, 0));
  for (int u = 0; u < N; ++u)
    for (int v = 0; v < N; ++v) {
      if (u == v) continue;
      auto [a, b] = nz[u];
      auto [c, d] = nz[v];
      adj[u][v] = (M(a, d) * M(c, b) == 0);
    }
  const int limit = std::min({cap, M.rows(), M.cols()});
  std::vector<int> best, cur;
  std::function<void(std::vector<int>&)> grow = [&](std::vector<int>& cand) {
    if (cur.size() > best.size()) best = cur;
    if (static_cast<int>(best.size()) >= limit) return;
    if (cur.size() + cand.size() <= best.size()) return;
    for (size_t k = 0; k < cand.size(); ++k) {
      if (cur.size() + (cand.size() - k) <= best.size()) return;
      int v = cand[k];
      std::vector<int> next;
      for (size_t l = k + 1; l < cand.size(); ++l)
        if (adj[v][cand[l]]) next.push_back(cand[l]);
      cur.push_back(v);
      grow(next);
      cur.pop_back();
      if (static_cast<int>(best.size()) >= limit) return;
    }
  };
  std::vector<int> all(N);
  std::iota(all.begin(), all.end(), 0);
  grow(all);
  std::vector<std::pair<int, int>> out;
  for (int v : best) out.push_back(nz[v]);
  return out;
}

namespace {

// HALS nonnegative factorization; returns relative Frobenius residual
double hals(const Eigen::MatrixXd& A, int r, std::mt19937_64& g, Eigen::MatrixXd& W, Eigen::MatrixXd& H,
            int iters) {
  const int m = static_cast<int>(A.rows()), k = static_cast<int>(A.cols());
  std::uniform_real_distribution<double> u(0, 1);
  W.resize(m, r);
  H.resize(r, k);
  double scale = std::sqrt(A.mean() / r);
  for (int i = 0; i < m * r; ++i) W.data()[i] = u(g) * scale + 1e-3;
  for (int i = 0; i < r * k; ++i) H.data()[i] = u(g) * scale + 1e-3;
  const double nA = A.norm();
  double res = 1;
  for (int it = 0; it < iters; ++it) {
    Eigen::MatrixXd AHt = A * H.transpose(), HHt = H * H.transpose();
    for (int j = 0; j < r; ++j) {
      if (HHt(j, j) <= 1e-300) continue;
      Eigen::VectorXd col = W.col(j) + (AHt.col(j) - W * HHt.col(j)) / HHt(j, j);
      W.col(j) = col.cwiseMax(1e-300);
    }
    Eigen::MatrixXd WtA = W.transpose() * A, WtW = W.transpose() * W;
    for (int j = 0; j < r; ++j) {
      if (WtW(j, j) <= 1e-300) continue;
      Eigen::RowVectorXd row = H.row(j) + (WtA.row(j) - WtW.row(j) * H) / WtW(j, j);
      H.row(j) = row.cwiseMax(0.0);
    }
    if (it % 50 == 49 || it == iters - 1) {
      res = (A - W * H).norm() / nA;
      if (res <= 1e-10) break;
    }
  }
  return res;
}

}  // namespace

RankResult nonneg_rank(const NonnegMatrix& M, int cap, int restarts, std::uint64_t seed) {
  const int m = M.rows(), k = M.cols();
  if (std::min(m, k) > cap) throw CapExceeded("matrix too large for exact nonnegative rank");
  RankResult out;
  out.linear_rank = linear_rank(M);
  out.independent_set = max_independent_entries(M, cap);
  out.lower = std::max(out.linear_rank, static_cast<int>(out.independent_set.size()));
  Eigen::MatrixXd A(m, k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) A(i, j) = M(i, j);
  // trivial factorization with min(m, k) terms
  if (m <= k) {
    out.W.assign(m * m, 0.0);
    for (int i = 0; i < m; ++i) out.W[i * m + i] = 1;
    out.H = M.entries();
    out.upper = m;
  } else {
    out.W = M.entries();
    out.H.assign(k * k, 0.0);
    for (int j = 0; j < k; ++j) out.H[j * k + j] = 1;
    out.upper = k;
  }
  // nonnegative rank-one matrices factor exactly through a nonzero row
  if (out.linear_rank == 1) {
    int i0 = 0;
    while (A.row(i0).sum() == 0) ++i0;
    int j0 = 0;
    while (A(i0, j0) == 0) ++j0;
    out.W.assign(m, 0.0);
    out.H.assign(k, 0.0);
    for (int i = 0; i < m; ++i) out.W[i] = A(i, j0) / A(i0, j0);
    for (int j = 0; j < k; ++j) out.H[j] = A(i0, j);
    out.upper = 1;
  }
  for (int r = out.lower; r < out.upper; ++r) {
    std::vector<double> resid(restarts, kInf);
    std::vector<Eigen::MatrixXd> Ws(restarts), Hs(restarts);
    parallel_for(restarts, [&](int t) {
      auto g = make_rng(seed, static_cast<std::uint64_t>(r * 1000 + t));
      resid[t] = hals(A, r, g, Ws[t], Hs[t], 20000);
    });
    int best = static_cast<int>(std::min_element(resid.begin(), resid.end()) - resid.begin());
    if (resid[best] <= 1e-9) {
      out.upper = r;
      out.fit_residual = resid[best];
      // Eigen is column-major; store row-major
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Wr = Ws[best], Hr = Hs[best];
      out.W.assign(Wr.data(), Wr.data() + m * r);
      out.H.assign(Hr.data(), Hr.data() + r * k);
      break;
    }
  }
  out.exact = out.lower == out.upper;
  return out;
}

double alpha_rank(const NonnegMatrix& M, double alpha, const OptimizerConfig& cfg) {
  auto pi = induced_distribution(M);
  if (alpha == 0) return nonneg_rank(M).upper;
  if (linear_rank(M) == 1) return 1.0;
  return std::exp2(common_entropy(pi, alpha, cfg).value);
}

WynerLogRank wyner_vs_logrank(const NonnegMatrix& M, const OptimizerConfig& cfg) {
  WynerLogRank out;
  auto rk = nonneg_rank(M);
  out.certified = rk.exact;
  out.logr = std::log2(static_cast<double>(rk.upper));
  if (rk.upper == 1) {
    out.cw = 0;
    return out;
  }
  out.cw = wyner_ci_numeric(induced_distribution(M), cfg).value;
  return out;
}

}  // namespace citk
