#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "citk/prob.hpp"

namespace citk {

struct MarkovTriple {
  int card_w = 0, nx = 0, ny = 0;
  std::vector<double> pw;  // card_w
  std::vector<double> px;  // card_w x nx, row w is P_{X|W=w}
  std::vector<double> py;  // card_w x ny

  MarkovTriple() = default;
  MarkovTriple(int w, int x, int y)
      : card_w(w), nx(x), ny(y), pw(w, 0.0), px(w * x, 0.0), py(w * y, 0.0) {}

  std::vector<double> induced() const;  // row-major nx x ny
  JointPmf induced_joint() const { return JointPmf(nx, ny, induced()); }
  std::vector<double> x_given(int w) const;
  std::vector<double> y_given(int w) const;
  // max |induced - pi|
  double violation(const JointPmf& pi) const;
  // sum_w P_W(w) [H(X|W=w) + H(Y|W=w)]
  double cond_entropy() const;
  void validate() const;
};

struct CiBounds {
  double lower = 0, upper = 0;
  std::optional<MarkovTriple> lower_witness, upper_witness;
};

struct OptimizerConfig {
  int restarts = 32;
  std::uint64_t seed = 0;
  int card_w = 0;        // 0 means |X||Y|
  int rounds = 8;        // augmented-Lagrangian rounds, penalty x10 each
  double mu0 = 10;
  int inner_iters = 3000;
  double inner_tol = 1e-10;
  double feas_tol = 1e-6;
  std::vector<MarkovTriple> warm;  // extra deterministic starts
};

struct OptResult {
  double value = 0;
  MarkovTriple witness;
  double violation = 0;
  int best_restart = -1;
};

double wyner_ci_closed(const DsbsParams& d);
double wyner_ci_closed(const SbesParams& s);
double wyner_ci_closed(const GaussianPair& g);

OptResult wyner_ci_numeric(const JointPmf& pi, const OptimizerConfig& cfg = {});

enum class PsiSide { upper, lower };

// cap on log2(1/pi) for zero cells used while optimizing
inline constexpr double kZeroCellCap = 40.0;

// objective of the pseudo-common information at a fixed triple
double pseudo_ci_objective(const JointPmf& pi, const MarkovTriple& t, double s, PsiSide side);
OptResult pseudo_ci(const JointPmf& pi, double s, PsiSide side, const OptimizerConfig& cfg = {});

double renyi_ci_dsbs_upper(double a, double s);
// optimal inner overlap q* of the closed form
double renyi_ci_dsbs_qstar(double a, double s);

struct ExactCi {
  double value = 0, gap_over_wyner = 0;
};
ExactCi exact_ci_dsbs(double a);

// G_alpha: alpha = 1 common entropy, inf via product D_inf, 0 via log nonnegative rank
OptResult common_entropy(const JointPmf& pi, double alpha, const OptimizerConfig& cfg = {});
// min over Q_X, Q_Y of D_inf(Q_X Q_Y || pi), bits
double min_dinf_product(const JointPmf& pi, int restarts = 64, std::uint64_t seed = 0,
                        std::vector<double>* qx = nullptr, std::vector<double>* qy = nullptr);

CiBounds gaussian_exact_ci_bounds(double rho);
double li_elgamal_bound(double rho);

// entropy of the ergodic-decomposition component index
double gkw_ci(const JointPmf& pi);

}  // namespace citk
