#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "citk/common_info.hpp"
#include "citk/prob.hpp"

namespace citk {

class NonnegMatrix {
 public:
  NonnegMatrix(int m, int k, std::vector<double> entries);
  static NonnegMatrix from_rows(const std::vector<std::vector<double>>& rows);
  int rows() const { return m_; }
  int cols() const { return k_; }
  double operator()(int i, int j) const { return e_[i * k_ + j]; }
  const std::vector<double>& entries() const { return e_; }
  double l1() const;
  NonnegMatrix kron(const NonnegMatrix& o) const;

 private:
  int m_, k_;
  std::vector<double> e_;
};

JointPmf induced_distribution(const NonnegMatrix& M);

struct RankResult {
  int lower = 0, upper = 0;
  bool exact = false;  // false means only the interval [lower, upper] is certified
  int linear_rank = 0;
  std::vector<std::pair<int, int>> independent_set;  // lower-bound certificate
  std::vector<double> W, H;                          // upper-bound certificate, m x upper and upper x k
  double fit_residual = 0;
};

int linear_rank(const NonnegMatrix& M, double tol = 1e-9);
// largest set of pairwise-independent nonzero entries (capped)
std::vector<std::pair<int, int>> max_independent_entries(const NonnegMatrix& M, int cap = 8);

RankResult nonneg_rank(const NonnegMatrix& M, int cap = 8, int restarts = 64, std::uint64_t seed = 0);

// 2^{G_alpha} of the induced distribution
double alpha_rank(const NonnegMatrix& M, double alpha, const OptimizerConfig& cfg = {});

struct WynerLogRank {
  double cw = 0, logr = 0;
  bool certified = false;  // rank bounds met
};
WynerLogRank wyner_vs_logrank(const NonnegMatrix& M, const OptimizerConfig& cfg = {});

}  // namespace citk
