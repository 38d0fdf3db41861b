#pragma once

#include <vector>

#include "citk/prob.hpp"

namespace citk {

struct TransportPlan {
  int nx = 0, ny = 0;
  std::vector<double> q;  // row-major
  std::vector<double> row, col;
  double operator()(int x, int y) const { return q[x * ny + y]; }
  double residual() const;  // max marginal violation
  JointPmf to_joint() const { return JointPmf(nx, ny, q); }
};

struct LpResult {
  double value = 0;
  TransportPlan plan;
  std::vector<double> u, v;  // duals: u_x + v_y <= cost on every cell, equality on basis
  int pivots = 0;
};

// min sum cost*Q over couplings of (r, c); transportation simplex (NW corner + MODI, Bland pivoting)
LpResult transport_lp(const std::vector<double>& cost, const std::vector<double>& r,
                      const std::vector<double>& c);

struct CrossEntropyResult {
  double value = 0;  // bits, may be +inf
  TransportPlan argmax;
  std::vector<double> grad_x, grad_y;  // derivative wrt the marginals, defined up to a constant
  bool infinite = false;
  int iterations = 0;
};

struct SinkhornOptions {
  int max_iter = 100000;
  double tol = 1e-10;
  // finite cap on log2(1/pi) for zero cells; <= 0 means zero cells are forbidden
  double zero_cost_cap = 0;
  // throw NonConvergence when the cap is hit
  bool strict = true;
  // optional column potentials: read as the starting point, overwritten on return
  std::vector<double>* warm_g = nullptr;
};

// max <Q, log 1/pi> + H(Q)/s over C(P_X, P_Y); s = inf gives the LP
CrossEntropyResult max_cross_entropy(const Pmf& px, const Pmf& py, const JointPmf& pi, double s,
                                     const SinkhornOptions& opt = {});
CrossEntropyResult max_cross_entropy(const std::vector<double>& px, const std::vector<double>& py,
                                     const JointPmf& pi, double s, const SinkhornOptions& opt = {});

// largest mass any coupling of (r, c) can put on cells where pi = 0
double max_escape_mass(const std::vector<double>& r, const std::vector<double>& c, const JointPmf& pi);

struct RelEntResult {
  double value = 0;  // bits
  TransportPlan argmin;
  std::vector<double> grad_x, grad_y;  // bits per unit mass, up to a constant
  bool infinite = false;
  int iterations = 0;
};

RelEntResult min_relative_entropy(const Pmf& qx, const Pmf& qy, const JointPmf& pi,
                                  int max_iter = 100000, double tol = 1e-10);
RelEntResult min_relative_entropy(const std::vector<double>& qx, const std::vector<double>& qy,
                                  const JointPmf& pi, int max_iter = 100000, double tol = 1e-10);

struct SignedPerturbation {
  std::vector<double> eta;
  explicit SignedPerturbation(std::vector<double> e);
};

struct ChiSquareResult {
  double value = 0;
  std::vector<double> eta_xy;
};

// min sum eta^2/pi over eta_XY with margins (eta_X, eta_Y)
ChiSquareResult min_chi_square(const SignedPerturbation& ex, const SignedPerturbation& ey,
                               const JointPmf& pi);

struct MaximalCoupling {
  TransportPlan plan;
  double mismatch = 0;
};
MaximalCoupling maximal_coupling(const Pmf& p, const Pmf& q);

struct GuessingCoupling {
  double lhs = 0, rhs = 0;
  std::vector<int> best_f;
};
GuessingCoupling maximal_guessing_coupling(const Pmf& qx, const Pmf& qy);

}  // namespace citk
