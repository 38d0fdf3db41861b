#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace citk {

// nonnegative function on {0,1}^n; index x has bit i equal to x_{i+1}
class RealCubeFunction {
 public:
  RealCubeFunction(int n, std::vector<double> table);
  int n() const { return n_; }
  std::size_t size() const { return t_.size(); }
  double operator()(std::uint32_t x) const { return t_[x]; }
  const std::vector<double>& table() const { return t_; }
  double mean() const;

 private:
  int n_;
  std::vector<double> t_;
};

class BooleanFunction {
 public:
  BooleanFunction() : BooleanFunction(0, std::vector<bool>{false}) {}
  BooleanFunction(int n, const std::vector<bool>& table);
  static BooleanFunction from_support(int n, const std::vector<std::uint32_t>& support);
  static BooleanFunction from_mask(int n, std::uint64_t mask);  // n <= 6
  static BooleanFunction from_hex(int n, const std::string& hex);
  static BooleanFunction constant(int n, bool v);
  static BooleanFunction dictator(int n, int i = 0);
  // indicator that the first k coordinates are all 1
  static BooleanFunction subcube(int n, int k);
  static BooleanFunction majority(int n);  // n odd
  static BooleanFunction random(int n, std::mt19937_64& g);

  int n() const { return n_; }
  std::size_t size() const { return std::size_t{1} << n_; }
  bool operator()(std::uint32_t x) const { return (bits_[x >> 6] >> (x & 63)) & 1; }
  std::size_t count() const;
  double mean() const;
  BooleanFunction complement() const;
  RealCubeFunction as_real() const;
  std::string to_hex() const;

  // f_hat_S = E[f(x) (-1)^{sum_{i in S} x_i}], cached
  const std::vector<double>& spectrum() const;

 private:
  int n_;
  std::vector<std::uint64_t> bits_;
  std::shared_ptr<struct SpectrumCache> cache_;
};

std::vector<double> wht(const BooleanFunction& f);
// W_k = sum_{|S|=k} f_hat_S^2
std::vector<double> weights(const BooleanFunction& f);

struct Influences {
  std::vector<double> flip;     // Pr(f(x) != f(x xor e_i))
  std::vector<double> fourier;  // 4 sum_{S contains i} f_hat_S^2
  double total = 0, total_fourier = 0;
  std::uint64_t boundary_edges = 0;
};
Influences influences(const BooleanFunction& f);

RealCubeFunction noise_op(const RealCubeFunction& f, double rho);
RealCubeFunction noise_op(const BooleanFunction& f, double rho);

double q_stability(const BooleanFunction& f, double rho, double q);
double q_stability(const RealCubeFunction& f, double rho, double q);
double sym_q_stability(const BooleanFunction& f, double rho, double q);
// sum_k rho^{2k} W_k
double q2_stability_fourier(const BooleanFunction& f, double rho);

// t ln_q(t) / ln 2, q >= 1
double phi_q(double t, double q);
double phi_stability(const BooleanFunction& f, double rho, double q);
double sym_phi_stability(const BooleanFunction& f, double rho, double q);

// Pr(f(X) = 1, g(Y) = 1) for rho-correlated uniform X, Y
double joint_prob(const BooleanFunction& f, const BooleanFunction& g, double rho);
double joint_prob_fourier(const BooleanFunction& f, const BooleanFunction& g, double rho);

enum class NicdMode { max, min };
struct NicdResult {
  double value = 0;
  BooleanFunction f, g;
};
NicdResult nicd_bruteforce(int n, double a, double b, double rho, NicdMode mode);
// best identical pair f = g at mean a, max mode
NicdResult nicd_identical(int n, double a, double rho);

std::pair<double, double> witsenhausen_bounds(double a, double b, double rho);
// (sup, inf) of the two-point hypercontractivity family
std::pair<double, double> hc_bound_phi(double a, double b, double rho, int grid = 24);
double hc_phi(double a, double b, double rho, double s, double t, double p);

// LP bound on W_1 at a = min(mean, 1 - mean)
double w1_lp_bound(double a);
bool w1_lp_bound_check(const BooleanFunction& f);

// 2a log2(1/a) with a = min(mean, 1 - mean)
double edge_isoperimetric_bound(double mean);

double maj_stability(int m, double rho, double q);
double maj_sym_stability(int m, double rho, double q);
// Pr(Maj_m(X) = Maj_m(Y) = 1) at correlation rho
double maj_plain_stability(int m, double rho);
double maj_limit_plain(double rho);
double maj_limit(double rho, double q);

}  // namespace citk
