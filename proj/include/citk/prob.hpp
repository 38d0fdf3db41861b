#pragma once

#include <limits>
#include <string>
#include <vector>

namespace citk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
// entries below this are exact zeros
inline constexpr double kZeroTol = 1e-15;

class Pmf {
 public:
  Pmf() = default;
  // normalizes if the sum is off by at most 1e-9, throws DomainError otherwise
  explicit Pmf(std::vector<double> probs, std::vector<std::string> labels = {});

  static Pmf bernoulli(double p1);  // (1-p1, p1)
  static Pmf uniform(int n);
  static Pmf point(int n, int k);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::vector<int> support() const;

 private:
  std::vector<double> p_;
  std::vector<std::string> labels_;
};

class JointPmf {
 public:
  JointPmf() = default;
  // row-major nx x ny grid
  JointPmf(int nx, int ny, std::vector<double> probs,
           std::vector<std::string> xlabels = {}, std::vector<std::string> ylabels = {});
  static JointPmf from_rows(const std::vector<std::vector<double>>& rows);
  static JointPmf product(const Pmf& px, const Pmf& py);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double operator()(int x, int y) const { return p_[x * ny_ + y]; }
  const std::vector<double>& probs() const { return p_; }
  const std::vector<std::string>& xlabels() const { return xl_; }
  const std::vector<std::string>& ylabels() const { return yl_; }

  Pmf marginal_x() const;
  Pmf marginal_y() const;
  Pmf flat() const;
  // support of this contained in support of other
  bool ll(const JointPmf& other) const;
  JointPmf transpose() const;

 private:
  int nx_ = 0, ny_ = 0;
  std::vector<double> p_;
  std::vector<std::string> xl_, yl_;
};

struct DsbsParams {
  double rho = 0, p = 0.5, a = 0.5, alpha = 0.25, beta = 0.25;
  static DsbsParams from_rho(double rho);
  static DsbsParams from_p(double p);
  static DsbsParams from_a(double a);  // a in [0, 1/2]
  JointPmf to_joint() const;
};

// X uniform, Y = X erased with probability p; Y ordered (0, e, 1)
struct SbesParams {
  double p = 0.5;
  JointPmf to_joint() const;
};

struct GaussianPair {
  double rho = 0;
  std::vector<std::vector<double>> covariance() const { return {{1, rho}, {rho, 1}}; }
};

// binary helpers, bits
double h(double a);
double h_nats(double a);
// inverse of h on [0, 1/2]
double h_inv(double y);
double conv(double a, double b);
double log2_safe(double x);
// binary Renyi divergence of order 1+s between Bern(p) and Bern(q)
double binary_renyi(double p, double q, double order);
double binary_kl(double p, double q);

// entropies of raw weight vectors (assumed to sum to 1)
double entropy(const std::vector<double>& p);
double renyi_entropy(const std::vector<double>& p, double order);

double shannon_entropy(const Pmf& p);
double shannon_entropy(const JointPmf& j);
double kl_divergence(const Pmf& p, const Pmf& q);
// order in [0, inf]; +inf if p is not absolutely continuous wrt q and order >= 1
double renyi_divergence(const Pmf& p, const Pmf& q, double order);
double renyi_divergence(const std::vector<double>& p, const std::vector<double>& q, double order);
double tv_distance(const Pmf& p, const Pmf& q);
double mutual_information(const JointPmf& j);

// JSON {"labels":[...],"probs":[...]}; joints carry "rows","cols" too
std::string to_json(const Pmf& p);
std::string to_json(const JointPmf& j);
Pmf pmf_from_json(const std::string& s);
JointPmf joint_from_json(const std::string& s);

}  // namespace citk
