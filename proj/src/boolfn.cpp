#include "citk/boolfn.hpp"

#include <algorithm>
#include <cctype>
#include <bit>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>

#include "citk/errors.hpp"
#include "citk/exponents.hpp"
#include "citk/parallel.hpp"
#include "numutil.hpp"

namespace citk {

struct SpectrumCache {
  std::once_flag once;
  std::vector<double> spec;
};

RealCubeFunction::RealCubeFunction(int n, std::vector<double> table) : n_(n), t_(std::move(table)) {
  if (n < 0 || n > 24) throw SizeGuard("cube dimension must be in [0,24]");
  if (t_.size() != (std::size_t{1} << n)) throw DomainError("table size is not 2^n");
  for (double v : t_)
    if (!(v >= 0)) throw DomainError("cube function must be nonnegative");
}

double RealCubeFunction::mean() const { return std::accumulate(t_.begin(), t_.end(), 0.0) / t_.size(); }

BooleanFunction::BooleanFunction(int n, const std::vector<bool>& table)
    : n_(n), cache_(std::make_shared<SpectrumCache>()) {
  if (n < 0 || n > 24) throw SizeGuard("Boolean dimension must be in [0,24]");
  if (table.size() != size()) throw DomainError("table size is not 2^n");
  bits_.assign((size() + 63) / 64, 0);
  for (std::size_t x = 0; x < size(); ++x)
    if (table[x]) bits_[x >> 6] |= std::uint64_t{1} << (x & 63);
}

BooleanFunction BooleanFunction::from_support(int n, const std::vector<std::uint32_t>& support) {
  std::vector<bool> t(std::size_t{1} << n, false);
  for (auto x : support) {
    if (x >= t.size()) throw DomainError("support point outside the cube");
    t[x] = true;
  }
  return BooleanFunction(n, t);
}

BooleanFunction BooleanFunction::from_mask(int n, std::uint64_t mask) {
  if (n > 6) throw SizeGuard("mask form needs n <= 6");
  std::vector<bool> t(std::size_t{1} << n);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = (mask >> x) & 1;
  return BooleanFunction(n, t);
}

BooleanFunction BooleanFunction::from_hex(int n, const std::string& hex) {
  std::vector<bool> t(std::size_t{1} << n, false);
  // most significant nibble first; bit x of the number is f(x)
  std::size_t pos = 0;
  for (auto it = hex.rbegin(); it != hex.rend(); ++it, pos += 4) {
    char c = static_cast<char>(std::tolower(*it));
    int v = (c >= '0' && c <= '9') ? c - '0' : (c >= 'a' && c <= 'f') ? c - 'a' + 10 : -1;
    if (v < 0) throw DomainError("bad hex digit");
    for (int b = 0; b < 4; ++b) {
      if (!((v >> b) & 1)) continue;
      if (pos + b >= t.size()) throw DomainError("hex string longer than the table");
      t[pos + b] = true;
    }
  }
  return BooleanFunction(n, t);
}

std::string BooleanFunction::to_hex() const {
  std::size_t nib = std::max<std::size_t>(1, (size() + 3) / 4);
  std::string s(nib, '0');
  for (std::size_t j = 0; j < nib; ++j) {
    int v = 0;
    for (int b = 0; b < 4; ++b) {
      std::size_t x = 4 * j + b;
      if (x < size() && (*this)(static_cast<std::uint32_t>(x))) v |= 1 << b;
    }
    s[nib - 1 - j] = "0123456789abcdef"[v];
  }
  return s;
}

BooleanFunction BooleanFunction::constant(int n, bool v) {
  return BooleanFunction(n, std::vector<bool>(std::size_t{1} << n, v));
}

BooleanFunction BooleanFunction::dictator(int n, int i) {
  if (i < 0 || i >= n) throw DomainError("dictator coordinate out of range");
  std::vector<bool> t(std::size_t{1} << n);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = (x >> i) & 1;
  return BooleanFunction(n, t);
}

BooleanFunction BooleanFunction::subcube(int n, int k) {
  if (k < 0 || k > n) throw DomainError("subcube codimension out of range");
  std::vector<bool> t(std::size_t{1} << n);
  const std::size_t m = (std::size_t{1} << k) - 1;
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = (x & m) == m;
  return BooleanFunction(n, t);
}

BooleanFunction BooleanFunction::majority(int n) {
  if (n < 1 || n % 2 == 0) throw DomainError("majority needs odd n");
  std::vector<bool> t(std::size_t{1} << n);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = 2 * std::popcount(x) > n;
  return BooleanFunction(n, t);
}

BooleanFunction BooleanFunction::random(int n, std::mt19937_64& g) {
  std::vector<bool> t(std::size_t{1} << n);
  std::uint64_t w = 0;
  for (std::size_t x = 0; x < t.size(); ++x) {
    if ((x & 63) == 0) w = g();
    t[x] = (w >> (x & 63)) & 1;
  }
  return BooleanFunction(n, t);
}

std::size_t BooleanFunction::count() const {
  std::size_t c = 0;
  for (auto w : bits_) c += std::popcount(w);
  return c;
}

double BooleanFunction::mean() const { return static_cast<double>(count()) / size(); }

BooleanFunction BooleanFunction::complement() const {
  std::vector<bool> t(size());
  for (std::size_t x = 0; x < size(); ++x) t[x] = !(*this)(static_cast<std::uint32_t>(x));
  return BooleanFunction(n_, t);
}

RealCubeFunction BooleanFunction::as_real() const {
  std::vector<double> t(size());
  for (std::size_t x = 0; x < size(); ++x) t[x] = (*this)(static_cast<std::uint32_t>(x));
  return RealCubeFunction(n_, t);
}

const std::vector<double>& BooleanFunction::spectrum() const {
  std::call_once(cache_->once, [this] {
    // transform of the +-1 encoding, then shift back to {0,1} values
    std::vector<double> v(size());
    for (std::size_t x = 0; x < size(); ++x) v[x] = (*this)(static_cast<std::uint32_t>(x)) ? -1.0 : 1.0;
    for (std::size_t h = 1; h < size(); h <<= 1)
      for (std::size_t i = 0; i < size(); i += 2 * h)
        for (std::size_t j = i; j < i + h; ++j) {
          double a = v[j], b = v[j + h];
          v[j] = a + b;
          v[j + h] = a - b;
        }
    const double inv = 1.0 / size();
    for (double& c : v) c *= -0.5 * inv;
    v[0] += 0.5;
    cache_->spec = std::move(v);
  });
  return cache_->spec;
}

std::vector<double> wht(const BooleanFunction& f) { return f.spectrum(); }

std::vector<double> weights(const BooleanFunction& f) {
  const auto& s = f.spectrum();
  std::vector<double> w(f.n() + 1, 0.0);
  for (std::size_t S = 0; S < s.size(); ++S) w[std::popcount(S)] += s[S] * s[S];
  return w;
}

Influences influences(const BooleanFunction& f) {
  const int n = f.n();
  Influences r;
  r.flip.assign(n, 0.0);
  r.fourier.assign(n, 0.0);
  std::vector<std::uint64_t> cnt(n, 0);
  for (std::uint32_t x = 0; x < f.size(); ++x)
    for (int i = 0; i < n; ++i)
      if (f(x) != f(x ^ (1u << i))) ++cnt[i];
  const auto& s = f.spectrum();
  for (int i = 0; i < n; ++i) {
    r.flip[i] = static_cast<double>(cnt[i]) / f.size();
    r.boundary_edges += cnt[i] / 2;
    r.total += r.flip[i];
  }
  for (std::size_t S = 0; S < s.size(); ++S) {
    double w = 4 * s[S] * s[S];
    for (int i = 0; i < n; ++i)
      if ((S >> i) & 1) r.fourier[i] += w;
    r.total_fourier += w * std::popcount(S);
  }
  return r;
}

RealCubeFunction noise_op(const RealCubeFunction& f, double rho) {
  if (!(rho >= 0 && rho <= 1)) throw DomainError("rho outside [0,1]");
  std::vector<double> v = f.table();
  const double keep = (1 + rho) / 2, flip = (1 - rho) / 2;
  for (int i = 0; i < f.n(); ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t x = 0; x < v.size(); ++x) {
      if (x & bit) continue;
      double a = v[x], b = v[x | bit];
      v[x] = keep * a + flip * b;
      v[x | bit] = flip * a + keep * b;
    }
  }
  return RealCubeFunction(f.n(), std::move(v));
}

RealCubeFunction noise_op(const BooleanFunction& f, double rho) { return noise_op(f.as_real(), rho); }

double q_stability(const RealCubeFunction& f, double rho, double q) {
  if (!(q >= 1)) throw DomainError("q must be at least 1");
  auto t = noise_op(f, rho);
  double s = 0;
  for (double v : t.table()) s += std::pow(v, q);
  return s / t.size();
}

double q_stability(const BooleanFunction& f, double rho, double q) { return q_stability(f.as_real(), rho, q); }

double sym_q_stability(const BooleanFunction& f, double rho, double q) {
  return q_stability(f, rho, q) + q_stability(f.complement(), rho, q);
}

double q2_stability_fourier(const BooleanFunction& f, double rho) {
  auto w = weights(f);
  double s = 0;
  for (std::size_t k = 0; k < w.size(); ++k) s += std::pow(rho, 2.0 * k) * w[k];
  return s;
}

double phi_q(double t, double q) {
  if (!(q >= 1)) throw DomainError("q must be at least 1");
  if (t <= 0) return 0;
  double lnq = q == 1 ? std::log(t) : (std::pow(t, q - 1) - 1) / (q - 1);
  return t * lnq / std::log(2.0);
}

double phi_stability(const BooleanFunction& f, double rho, double q) {
  auto t = noise_op(f, rho);
  double s = 0;
  for (double v : t.table()) s += phi_q(v, q);
  return s / t.size();
}

double sym_phi_stability(const BooleanFunction& f, double rho, double q) {
  auto t = noise_op(f, rho);
  double s = 0;
  for (double v : t.table()) s += phi_q(v, q) + phi_q(1 - v, q);
  return s / t.size();
}

double joint_prob(const BooleanFunction& f, const BooleanFunction& g, double rho) {
  if (f.n() != g.n()) throw DomainError("dimension mismatch");
  auto tg = noise_op(g, rho);
  double s = 0;
  for (std::uint32_t x = 0; x < f.size(); ++x)
    if (f(x)) s += tg(x);
  return s / f.size();
}

double joint_prob_fourier(const BooleanFunction& f, const BooleanFunction& g, double rho) {
  if (f.n() != g.n()) throw DomainError("dimension mismatch");
  const auto& a = f.spectrum();
  const auto& b = g.spectrum();
  double s = 0;
  for (std::size_t S = 0; S < a.size(); ++S) s += std::pow(rho, std::popcount(S)) * a[S] * b[S];
  return s;
}

namespace {

int dyadic_count(int n, double a) {
  double k = a * std::ldexp(1.0, n);
  if (std::abs(k - std::round(k)) > 1e-9 || a < 0 || a > 1) throw DomainError("mean is not dyadic at this n");
  return static_cast<int>(std::round(k));
}

// visits all k-subsets of [0, N) as bitmasks in increasing order (Gosper's hack)
template <class F>
void for_each_subset(int N, int k, F&& f) {
  if (k == 0) {
    f(std::uint32_t{0});
    return;
  }
  if (k > N) return;
  std::uint32_t c = (std::uint32_t{1} << k) - 1;
  const std::uint32_t lim = std::uint32_t{1} << N;
  while (c < lim) {
    f(c);
    std::uint32_t u = c & (~c + 1), v = c + u;
    c = v + (((v ^ c) / u) >> 2);
  }
}

BooleanFunction mask_function(int n, std::uint32_t m) {
  std::vector<bool> t(std::size_t{1} << n);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = (m >> x) & 1;
  return BooleanFunction(n, t);
}

}  // namespace

NicdResult nicd_bruteforce(int n, double a, double b, double rho, NicdMode mode) {
  if (n < 1 || n > 4) throw SearchSpaceTooLarge("exhaustive NICD needs n <= 4");
  if (!(rho >= 0 && rho <= 1)) throw DomainError("rho outside [0,1]");
  const int N = 1 << n;
  const int A = dyadic_count(n, a), B = dyadic_count(n, b);
  const double keep = (1 + rho) / 2, flip = (1 - rho) / 2;
  // T_rho of point masses: K[x][y] = Pr(Y = y | X = x)
  std::vector<double> K(N * N);
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y) {
      int d = std::popcount(static_cast<unsigned>(x ^ y));
      K[x * N + y] = std::pow(keep, n - d) * std::pow(flip, d);
    }
  const bool mx = mode == NicdMode::max;
  double best = mx ? -kInf : kInf;
  std::uint32_t bf = 0, bg = 0;
  // for a fixed g the best f takes the A points with the largest (smallest) T_rho g
  std::vector<std::pair<double, int>> tg(N);
  for_each_subset(N, B, [&](std::uint32_t g) {
    for (int x = 0; x < N; ++x) {
      double s = 0;
      for (int y = 0; y < N; ++y)
        if ((g >> y) & 1) s += K[x * N + y];
      tg[x] = {s, x};
    }
    std::stable_sort(tg.begin(), tg.end(), [mx](const auto& u, const auto& v) {
      return mx ? u.first > v.first + 1e-15 : u.first < v.first - 1e-15;
    });
    double val = 0;
    std::uint32_t f = 0;
    for (int j = 0; j < A; ++j) {
      val += tg[j].first;
      f |= std::uint32_t{1} << tg[j].second;
    }
    val /= N;
    if (mx ? val > best + 1e-15 : val < best - 1e-15) {
      best = val;
      bf = f;
      bg = g;
    }
  });
  return {best, mask_function(n, bf), mask_function(n, bg)};
}

NicdResult nicd_identical(int n, double a, double rho) {
  if (n < 1 || n > 4) throw SearchSpaceTooLarge("exhaustive NICD needs n <= 4");
  const int N = 1 << n;
  const int A = dyadic_count(n, a);
  double best = -kInf;
  std::uint32_t bm = 0;
  for_each_subset(N, A, [&](std::uint32_t m) {
    auto f = mask_function(n, m);
    double v = joint_prob(f, f, rho);
    if (v > best + 1e-15) {
      best = v;
      bm = m;
    }
  });
  auto f = mask_function(n, bm);
  return {best, f, f};
}

std::pair<double, double> witsenhausen_bounds(double a, double b, double rho) {
  if (!(a >= 0 && a <= 1 && b >= 0 && b <= 1)) throw DomainError("a, b outside [0,1]");
  double r = rho * std::sqrt(a * (1 - a) * b * (1 - b));
  return {a * b - r, a * b + r};
}

double hc_phi(double a, double b, double rho, double s, double t, double p) {
  double q = 1 + rho * rho / (p - 1);
  double ls = std::log(s), lt = std::log(t);
  // log(w e^x + 1 - w) without overflow
  auto lmix = [](double w, double x) {
    if (w <= 0) return 0.0;
    if (w >= 1) return x;
    // keeps relative accuracy when x is tiny, which happens as p or q approaches 0
    if (x < 30) return std::log1p(w * std::expm1(x));
    double u = std::log(w) + x, v = std::log1p(-w);
    double m = std::max(u, v);
    return m + std::log(std::exp(u - m) + std::exp(v - m));
  };
  double L = lmix(a, p * ls) / p + lmix(b, q * lt) / q;
  double es = std::expm1(ls), et = std::expm1(lt);
  return (std::expm1(L) - a * es - b * et) / (es * et);
}

std::pair<double, double> hc_bound_phi(double a, double b, double rho, int grid) {
  if (!(a >= 0 && a <= 1 && b >= 0 && b <= 1)) throw DomainError("a, b outside [0,1]");
  if (!(rho >= 0 && rho < 1)) throw DomainError("rho outside [0,1)");
  if (grid < 4) throw DomainError("grid too coarse");
  if (a == 0 || a == 1 || b == 0 || b == 1 || rho == 0) return {a * b, a * b};
  // log s, log t on a two-sided log-spaced grid; p = 1 +- e^u
  std::vector<double> logs;
  for (int k = 0; k < grid; ++k) {
    double m = 1e-3 * std::pow(1e4, double(k) / (grid - 1));
    logs.push_back(m);
    logs.push_back(-m);
  }
  std::vector<double> us;
  for (int k = 0; k < grid; ++k) us.push_back(-8 + 16.0 * k / (grid - 1));

  // sign = +1 for the upper bound (minimize), -1 for the lower bound (maximize)
  auto solve = [&](double sign) {
    double best = kInf;
    for (int pb = 0; pb < 2; ++pb) {
      const double ps = pb == 0 ? 1.0 : -1.0;  // p - 1 = ps e^u
      for (int ss = -1; ss <= 1; ss += 2)
        for (int ts = -1; ts <= 1; ts += 2) {
          // admissible iff sign((s-1)(t-1)(p-1)) equals sign
          if (ss * ts * ps != sign) continue;
          auto obj = [&](const std::vector<double>& z) {
            // stay where the cancellation in hc_phi is harmless
            if (z[0] * ss < 1e-4 || z[1] * ts < 1e-4 || std::abs(z[0]) > 20 || std::abs(z[1]) > 20 ||
                std::abs(z[2]) > 9)
              return kInf;
            double p = 1 + ps * std::exp(z[2]);
            if (std::abs(p) < 1e-9) return kInf;
            double v = hc_phi(a, b, rho, std::exp(z[0]), std::exp(z[1]), p);
            return std::isfinite(v) ? sign * v : kInf;
          };
          std::vector<double> bz(3);
          double bv = kInf;
          for (double x : logs) {
            if (x * ss <= 0) continue;
            for (double y : logs) {
              if (y * ts <= 0) continue;
              for (double u : us) {
                std::vector<double> z{x, y, u};
                double v = obj(z);
                if (v < bv) {
                  bv = v;
                  bz = z;
                }
              }
            }
          }
          if (!std::isfinite(bv)) continue;
          for (int rep = 0; rep < 4; ++rep) bv = std::min(bv, detail::nelder_mead(obj, bz, 0.3, 400));
          best = std::min(best, bv);
        }
    }
    return sign * best;
  };
  double hi = solve(1.0);
  double lo = solve(-1.0);
  return {lo, hi};
}

double w1_lp_bound(double a) {
  a = std::min(a, 1 - a);
  return a <= 0.25 ? 2 * a * (std::sqrt(a) - a) : a / 2;
}

bool w1_lp_bound_check(const BooleanFunction& f) {
  if (f.n() == 0) return true;
  return weights(f)[1] <= w1_lp_bound(f.mean()) + 1e-12;
}

double edge_isoperimetric_bound(double mean) {
  double a = std::min(mean, 1 - mean);
  return a <= 0 ? 0.0 : 2 * a * std::log2(1 / a);
}

namespace {

std::vector<double> binom_pmf(int m, double p) {
  std::vector<double> v(m + 1, 0.0);
  v[0] = 1;
  for (int i = 0; i < m; ++i)
    for (int k = i + 1; k >= 0; --k) v[k] = v[k] * (1 - p) + (k > 0 ? v[k - 1] * p : 0.0);
  return v;
}

// T_rho Maj_m at an input with k ones
std::vector<double> maj_noisy_layers(int m, double rho) {
  if (m < 1 || m % 2 == 0) throw DomainError("majority needs odd m");
  if (m > 25) throw SizeGuard("majority layer sum needs m <= 25");
  if (!(rho >= 0 && rho <= 1)) throw DomainError("rho outside [0,1]");
  const double keep = (1 + rho) / 2;
  std::vector<double> T(m + 1);
  for (int k = 0; k <= m; ++k) {
    auto u = binom_pmf(k, keep), v = binom_pmf(m - k, 1 - keep);
    double s = 0;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= m - k; ++j)
        if (2 * (i + j) > m) s += u[i] * v[j];
    T[k] = s;
  }
  return T;
}

}  // namespace

double maj_stability(int m, double rho, double q) {
  if (!(q >= 1)) throw DomainError("q must be at least 1");
  auto T = maj_noisy_layers(m, rho);
  auto w = binom_pmf(m, 0.5);
  double s = 0;
  for (int k = 0; k <= m; ++k) s += w[k] * std::pow(T[k], q);
  return s;
}

double maj_sym_stability(int m, double rho, double q) {
  if (!(q >= 1)) throw DomainError("q must be at least 1");
  auto T = maj_noisy_layers(m, rho);
  auto w = binom_pmf(m, 0.5);
  double s = 0;
  for (int k = 0; k <= m; ++k) s += w[k] * (std::pow(T[k], q) + std::pow(1 - T[k], q));
  return s;
}

double maj_plain_stability(int m, double rho) {
  if (!(rho >= 0 && rho <= 1)) throw DomainError("rho outside [0,1]");
  // rho-correlated pair factors through a sqrt(rho)-noisy midpoint
  return maj_stability(m, std::sqrt(rho), 2.0);
}

double maj_limit_plain(double rho) {
  if (!(rho >= -1 && rho <= 1)) throw DomainError("rho outside [-1,1]");
  return 0.25 + std::asin(rho) / (2 * M_PI);
}

double maj_limit(double rho, double q) { return gaussian_q_stability(rho, q, 0.5); }

}  // namespace citk
