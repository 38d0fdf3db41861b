#pragma once

#include <cstdint>
#include <vector>

#include "citk/prob.hpp"

namespace citk {

double norm_cdf(double x);
double norm_quantile(double p);

// Pr(U <= Phi^{-1}(a), V <= Phi^{-1}(b)) for standard normals with correlation rho
double gaussian_copula(double rho, double a, double b);
// E[Phi((Phi^{-1}(a) - rho V) / sqrt(1 - rho^2))^q]
double gaussian_q_stability(double rho, double q, double a);
// h(a) - E[h(Phi((Phi^{-1}(a) - rho V) / sqrt(1 - rho^2)))], bits: I(f(X); Y) for a halfspace f
double gaussian_ck_mi(double a, double rho);

enum class Side { forward, reverse };

// -log Lambda_{+-rho}(2^-alpha, 2^-beta), bits
double nicd_cl_exponent(double rho, double alpha, double beta, Side side);

// D(Q_X, Q_Y || pi) for binary pi, Q_X(1) = a, Q_Y(1) = b, via the stationary point p*; bits
double binary_min_rel_entropy(const JointPmf& pi, double a, double b, double* p_star = nullptr);
double dsbs_p_star(double rho, double a, double b);

// log 1/min_x pi_X(x)
double alpha_max(const Pmf& p);

struct LdOptions {
  int grid = 400;      // per axis on binary alphabets
  int restarts = 16;   // larger alphabets
  std::uint64_t seed = 0;
};

// forward: min D(Q_X, Q_Y || pi) over D(Q_X||pi_X) >= alpha, D(Q_Y||pi_Y) >= beta
// reverse: max of the same over D(Q_X||pi_X) <= alpha, D(Q_Y||pi_Y) <= beta
double nicd_ld_exponents(const JointPmf& pi, double alpha, double beta, Side side, const LdOptions& opt = {});
// DSBS closed form through h^{-1}; forward falls back to alpha or beta when one constraint is slack
double nicd_ld_exponent_dsbs(double rho, double alpha, double beta, Side side);
double nicd_md_exponents(double rho, double alpha, double beta, Side side);

struct ExponentSurface {
  std::vector<double> alpha, beta;
  std::vector<double> values;  // alpha-major; +inf marks infeasible cells
  double operator()(int i, int j) const { return values[i * beta.size() + j]; }
  bool infinite(int i, int j) const;
};

ExponentSurface nicd_ld_surface_dsbs(double rho, const std::vector<double>& alpha,
                                     const std::vector<double>& beta, Side side);

enum class EnvelopeMode { convex, concave };

struct EnvelopeResult {
  std::vector<double> x, y;  // y empty for curves
  std::vector<double> original, envelope;
};

// biconjugate on the finite cells; slopes sampled at the grid resolution
EnvelopeResult envelope1d(const std::vector<double>& x, const std::vector<double>& f, EnvelopeMode mode);
EnvelopeResult envelope2d(const ExponentSurface& s, EnvelopeMode mode);

enum class Regime { LD, MD };

// alpha / (1 + (q-1) rho^2); +inf for q <= 1 - rho^{-2}
double q_stability_md_exponent(double rho, double q, double alpha);

// inner function of the LD q-stability exponent at D(Q_X||pi_X) = s, binary pi
double q_stability_phi(const JointPmf& pi, double q, double s, int grid = 400);

struct QStabilityCurve {
  std::vector<double> alpha, phi, exponent;  // exponent is the envelope form
};
// extra: additional abscissae merged into the grid
QStabilityCurve q_stability_ld_curve(const JointPmf& pi, double q, int points = 201, int grid = 400,
                                     const std::vector<double>& extra = {});

// DSBS exponent at correlation rho
double q_stability_exponents(double rho, double q, double alpha, Regime regime);
double q_stability_exponents(const JointPmf& pi, double q, double alpha, Regime regime);

}  // namespace citk
