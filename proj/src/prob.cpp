#include "citk/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "citk/errors.hpp"
#include "json.hpp"

namespace citk {

namespace {

std::vector<double> clean(std::vector<double> p) {
  if (p.empty()) throw DomainError("empty pmf");
  double s = 0;
  for (double& v : p) {
    if (!std::isfinite(v) || v < -kZeroTol) throw DomainError("negative or non-finite probability");
    if (v < kZeroTol) v = 0;
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw DomainError("probabilities sum to " + std::to_string(s));
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

Pmf::Pmf(std::vector<double> probs, std::vector<std::string> labels)
    : p_(clean(std::move(probs))), labels_(std::move(labels)) {
  if (!labels_.empty() && labels_.size() != p_.size()) throw DomainError("label count mismatch");
}

Pmf Pmf::bernoulli(double p1) {
  if (p1 < 0 || p1 > 1) throw DomainError("bernoulli parameter outside [0,1]");
  return Pmf({1 - p1, p1});
}

Pmf Pmf::uniform(int n) { return Pmf(std::vector<double>(n, 1.0 / n)); }

Pmf Pmf::point(int n, int k) {
  std::vector<double> v(n, 0.0);
  v[k] = 1;
  return Pmf(v);
}

std::vector<int> Pmf::support() const {
  std::vector<int> s;
  for (int i = 0; i < size(); ++i)
    if (p_[i] > 0) s.push_back(i);
  return s;
}

JointPmf::JointPmf(int nx, int ny, std::vector<double> probs, std::vector<std::string> xl,
                   std::vector<std::string> yl)
    : nx_(nx), ny_(ny), xl_(std::move(xl)), yl_(std::move(yl)) {
  if (nx <= 0 || ny <= 0 || static_cast<int>(probs.size()) != nx * ny)
    throw DomainError("joint grid has wrong shape");
  p_ = clean(std::move(probs));
  if ((!xl_.empty() && static_cast<int>(xl_.size()) != nx) ||
      (!yl_.empty() && static_cast<int>(yl_.size()) != ny))
    throw DomainError("label count mismatch");
}

JointPmf JointPmf::from_rows(const std::vector<std::vector<double>>& rows) {
  int nx = static_cast<int>(rows.size());
  if (nx == 0) throw DomainError("empty joint");
  int ny = static_cast<int>(rows[0].size());
  std::vector<double> v;
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != ny) throw DomainError("ragged joint grid");
    v.insert(v.end(), r.begin(), r.end());
  }
  return JointPmf(nx, ny, v);
}

JointPmf JointPmf::product(const Pmf& px, const Pmf& py) {
  std::vector<double> v;
  for (int x = 0; x < px.size(); ++x)
    for (int y = 0; y < py.size(); ++y) v.push_back(px[x] * py[y]);
  return JointPmf(px.size(), py.size(), v);
}

Pmf JointPmf::marginal_x() const {
  std::vector<double> m(nx_, 0.0);
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y) m[x] += (*this)(x, y);
  return Pmf(m, xl_);
}

Pmf JointPmf::marginal_y() const {
  std::vector<double> m(ny_, 0.0);
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y) m[y] += (*this)(x, y);
  return Pmf(m, yl_);
}

Pmf JointPmf::flat() const { return Pmf(p_); }

bool JointPmf::ll(const JointPmf& other) const {
  if (other.nx_ != nx_ || other.ny_ != ny_) throw AlphabetMismatch("joint shapes differ");
  for (size_t i = 0; i < p_.size(); ++i)
    if (p_[i] > 0 && other.p_[i] <= 0) return false;
  return true;
}

JointPmf JointPmf::transpose() const {
  std::vector<double> v(p_.size());
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y) v[y * nx_ + x] = (*this)(x, y);
  return JointPmf(ny_, nx_, v, yl_, xl_);
}

DsbsParams DsbsParams::from_rho(double rho) {
  if (!(rho > -1 && rho < 1)) throw DomainError("rho outside (-1,1)");
  return from_p((1 - rho) / 2);
}

DsbsParams DsbsParams::from_p(double p) {
  if (!(p >= 0 && p <= 1)) throw DomainError("p outside [0,1]");
  DsbsParams d;
  d.p = p;
  d.rho = 1 - 2 * p;
  d.alpha = (1 - p) / 2;
  d.beta = p / 2;
  // a*a = p has a real root only for p <= 1/2; mirror above
  double pe = std::min(p, 1 - p);
  d.a = (1 - std::sqrt(std::max(0.0, 1 - 2 * pe))) / 2;
  return d;
}

DsbsParams DsbsParams::from_a(double a) {
  if (!(a >= 0 && a <= 0.5)) throw DomainError("a outside [0,1/2]");
  DsbsParams d = from_p(2 * a * (1 - a));
  d.a = a;
  return d;
}

JointPmf DsbsParams::to_joint() const {
  return JointPmf(2, 2, {alpha, beta, beta, alpha}, {"0", "1"}, {"0", "1"});
}

JointPmf SbesParams::to_joint() const {
  if (!(p >= 0 && p <= 1)) throw DomainError("p outside [0,1]");
  return JointPmf(2, 3, {(1 - p) / 2, p / 2, 0, 0, p / 2, (1 - p) / 2}, {"0", "1"}, {"0", "e", "1"});
}

double log2_safe(double x) { return x > 0 ? std::log2(x) : -kInf; }

double h(double a) {
  if (a <= 0 || a >= 1) return 0;
  return -a * std::log2(a) - (1 - a) * std::log2(1 - a);
}

double h_nats(double a) {
  if (a <= 0 || a >= 1) return 0;
  return -a * std::log(a) - (1 - a) * std::log1p(-a);
}

double h_inv(double y) {
  if (!(y >= 0 && y <= 1)) throw DomainError("h_inv argument outside [0,1]");
  double lo = 0, hi = 0.5;
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    double mid = 0.5 * (lo + hi);
    (h(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double conv(double a, double b) { return a * (1 - b) + b * (1 - a); }

double binary_renyi(double p, double q, double order) {
  return renyi_divergence(std::vector<double>{1 - p, p}, std::vector<double>{1 - q, q}, order);
}

double binary_kl(double p, double q) { return binary_renyi(p, q, 1.0); }

double entropy(const std::vector<double>& p) {
  double s = 0;
  for (double v : p)
    if (v > 0) s -= v * std::log2(v);
  return s;
}

double renyi_entropy(const std::vector<double>& p, double order) {
  if (order < 0) throw DomainError("negative order");
  if (order == 1) return entropy(p);
  if (std::isinf(order)) return -std::log2(*std::max_element(p.begin(), p.end()));
  if (order == 0) {
    int k = 0;
    for (double v : p) k += v > kZeroTol;
    return std::log2(k);
  }
  double s = 0;
  for (double v : p)
    if (v > 0) s += std::pow(v, order);
  return std::log2(s) / (1 - order);
}

double shannon_entropy(const Pmf& p) { return entropy(p.probs()); }
double shannon_entropy(const JointPmf& j) { return entropy(j.probs()); }

double renyi_divergence(const std::vector<double>& p, const std::vector<double>& q, double order) {
  if (p.size() != q.size()) throw AlphabetMismatch("pmf sizes differ");
  if (!(order >= 0)) throw DomainError("negative order");
  bool abs_cont = true;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0 && q[i] <= 0) abs_cont = false;
  if (order == 0) {
    double m = 0;
    for (size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0) m += q[i];
    return -log2_safe(m);
  }
  if (order >= 1 && !abs_cont) return kInf;
  if (std::isinf(order)) {
    double m = -kInf;
    for (size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0) m = std::max(m, std::log2(p[i]) - std::log2(q[i]));
    return m;
  }
  if (order == 1) {
    double d = 0;
    for (size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0) d += p[i] * (std::log2(p[i]) - std::log2(q[i]));
    return std::max(d, 0.0);
  }
  // log-sum-exp of log p + (order-1) log(p/q)
  std::vector<double> t;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0 && q[i] > 0) t.push_back(order * std::log(p[i]) + (1 - order) * std::log(q[i]));
  if (t.empty()) return kInf;
  double mx = *std::max_element(t.begin(), t.end());
  double s = 0;
  for (double v : t) s += std::exp(v - mx);
  double d = (mx + std::log(s)) / (order - 1) / std::log(2.0);
  return std::max(d, 0.0);
}

double renyi_divergence(const Pmf& p, const Pmf& q, double order) {
  return renyi_divergence(p.probs(), q.probs(), order);
}

double kl_divergence(const Pmf& p, const Pmf& q) { return renyi_divergence(p, q, 1.0); }

double tv_distance(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw AlphabetMismatch("pmf sizes differ");
  double s = 0;
  for (int i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double mutual_information(const JointPmf& j) {
  Pmf px = j.marginal_x(), py = j.marginal_y();
  double s = 0;
  for (int x = 0; x < j.nx(); ++x)
    for (int y = 0; y < j.ny(); ++y) {
      double v = j(x, y);
      if (v > 0) s += v * std::log2(v / (px[x] * py[y]));
    }
  return std::max(s, 0.0);
}

std::string to_json(const Pmf& p) {
  nlohmann::json o;
  o["labels"] = p.labels();
  o["probs"] = p.probs();
  return o.dump();
}

std::string to_json(const JointPmf& j) {
  nlohmann::json o;
  std::vector<std::string> labels;
  for (int x = 0; x < j.nx(); ++x)
    for (int y = 0; y < j.ny(); ++y) {
      std::string lx = j.xlabels().empty() ? std::to_string(x) : j.xlabels()[x];
      std::string ly = j.ylabels().empty() ? std::to_string(y) : j.ylabels()[y];
      labels.push_back(lx + "," + ly);
    }
  o["labels"] = labels;
  o["probs"] = j.probs();
  o["rows"] = j.nx();
  o["cols"] = j.ny();
  return o.dump();
}

Pmf pmf_from_json(const std::string& s) {
  auto o = nlohmann::json::parse(s);
  std::vector<std::string> labels;
  if (o.contains("labels")) labels = o["labels"].get<std::vector<std::string>>();
  return Pmf(o.at("probs").get<std::vector<double>>(), labels);
}

JointPmf joint_from_json(const std::string& s) {
  auto o = nlohmann::json::parse(s);
  auto probs = o.at("probs");
  // nested rows or flat with explicit shape
  if (!probs.empty() && probs[0].is_array())
    return JointPmf::from_rows(probs.get<std::vector<std::vector<double>>>());
  int nx = o.at("rows").get<int>(), ny = o.at("cols").get<int>();
  return JointPmf(nx, ny, probs.get<std::vector<double>>());
}

}  // namespace citk
