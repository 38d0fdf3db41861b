#pragma once

#include <cstdint>
#include <vector>

#include "citk/boolfn.hpp"
#include "citk/prob.hpp"

namespace citk {

enum class HcRegion { forward, reverse };

// forward needs (p, q) in [1, inf]^2, reverse (p, q) in [-inf, 1]^2
struct HcPoint {
  double p = 2, q = 2;
  HcRegion region = HcRegion::forward;
};

// (p-1)(q-1) >= rho^2
bool hc_membership_dsbs(double rho, double p, double q, HcRegion region);

struct HcCertificate {
  bool member = true;
  bool certified = false;           // a violating pair was found
  std::vector<double> qx, qy;       // the violating pair when certified
  double worst = 0;                 // largest normalized violation seen
};

// searches (Q_X, Q_Y) for a violation of the relative-entropy form of the region
HcCertificate hc_membership_general(const JointPmf& pi, double p, double q, HcRegion region, int grid = 48,
                                    std::uint64_t seed = 0);

struct BlExponents {
  double lower_nats = 0, upper_nats = 0;
  double lower_bits = 0, upper_bits = 0;
  bool lower_minus_infinity = false;
};

// theta = D(Q_X, Q_Y || pi) - D(Q_X||pi_X)/p - D(Q_Y||pi_Y)/q
double bl_theta(const JointPmf& pi, const std::vector<double>& qx, const std::vector<double>& qy, double p,
                double q);  // nats
BlExponents bl_exponents(const JointPmf& pi, double p, double q, int grid = 120, std::uint64_t seed = 0);
// -ln(<f, g> / (||f||_p ||g||_q)) for nonnegative f on X and g on Y
double bl_functional(const JointPmf& pi, const std::vector<double>& f, const std::vector<double>& g, double p,
                     double q);

// pseudo-norm under pi; p = 0 is the geometric mean, a zero entry forces 0 for p < 0
double pseudo_norm(const std::vector<double>& f, const std::vector<double>& pi, double p);
double pseudo_norm(const RealCubeFunction& f, double p);

// inverse of the natural-log binary entropy on [0, 1/2]
double h_nats_inv(double v);

struct LsiValues {
  double y = 0.5;  // h^{-1}(ln 2 - t)
  double b = 0;    // b_p(t)
  double g = 2;    // g(t)
};
LsiValues lsi_functions(double p, double t);
double lsi_b(double p, double t);
double lsi_g(double t);
// inverse of b_p on [0, ln 2]
double lsi_xi(double p, double s);

struct LsiCurve {
  std::vector<double> t, b, g;
};
LsiCurve lsi_curve(double p, int points = 101);

// hypercube Dirichlet form with L = 1{x != y} - 1/2 per coordinate
double dirichlet_form(const RealCubeFunction& f, const RealCubeFunction& g);
double normalized_entropy(const RealCubeFunction& f);  // nats
// (p/(p-1)) ln(||f||_p / ||f||_1), nats
double p_entropy(const RealCubeFunction& f, double p);

struct LsiCheck {
  double lhs = 0, rhs = 0;  // sign(p-1) E_bar(f, f^{p-1}) / n and b_p(Ent_bar(f^p) / n)
  bool holds = true;
};
LsiCheck nonlinear_lsi_check(const RealCubeFunction& f, double p);

struct OdeCurve {
  std::vector<double> t, q;
};
// du/dt = g((alpha/p')(1 + e^{-u})), u(0) = ln(p-1), q = 1 + e^u; RK4
OdeCurve strengthened_hc_ode(double p, double alpha, double t_max, double step = 1e-4, int samples = 101);
// 1 + (p-1) e^{2t}
double classic_hc_q(double p, double t);

// root in (0,1) of (1+r^2) log((1+r)/2) - (1-r)^2 log((1-r)/2)
double rho1_function(double r);
double rho1_root();

struct DualityResult {
  double neg_log_beta = 0;   // bits
  std::vector<double> q_star;
};
// -log sum_x 2^{-c(x)} prod_i P_i(x)^{s_i}, sum s_i = 1
DualityResult duality_beta(const std::vector<std::vector<double>>& P, const std::vector<double>& s,
                           const std::vector<double>& c);
// sum_i s_i D(Q||P_i) + E_Q[c], bits
double duality_objective(const std::vector<double>& Q, const std::vector<std::vector<double>>& P,
                         const std::vector<double>& s, const std::vector<double>& c);

}  // namespace citk
