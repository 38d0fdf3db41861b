#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "citk/boolfn.hpp"
#include "citk/common_info.hpp"
#include "citk/errors.hpp"
#include "citk/exponents.hpp"
#include "citk/funcineq.hpp"
#include "citk/nnrank.hpp"
#include "citk/synthesis.hpp"

using namespace citk;

namespace {

struct RunConfig {
  std::string source = "dsbs";
  double rho = NAN, p = NAN, a = NAN, b = NAN, q = NAN, alpha = NAN, beta = NAN, s = NAN;
  int grid = 0;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::string out;
  // subcommand specific
  std::string kind, side = "forward", regime = "ld", mode = "max", fn = "maj", matrix, name, region = "forward";
  int n = 0, trials = 31;
  double rate = NAN;
  bool numeric = false;
};

using Cell = std::variant<double, std::string>;

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<Cell> r) { rows_.push_back(std::move(r)); }
  std::string str() const {
    std::ostringstream o;
    for (std::size_t i = 0; i < header_.size(); ++i) o << (i ? "," : "") << header_[i];
    o << "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) o << ",";
        if (auto d = std::get_if<double>(&r[i])) o << fmt(*d);
        else o << std::get<std::string>(r[i]);
      }
      o << "\n";
    }
    return o.str();
  }

 private:
  static std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v == 0 ? 0.0 : v);
    return buf;
  }
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double pick(double v, double def) { return std::isnan(v) ? def : v; }
int pick(int v, int def) { return v > 0 ? v : def; }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  if (n > 1) v.back() = b;
  return v;
}

DsbsParams dsbs_of(const RunConfig& c, double def_p = 0.2) {
  if (!std::isnan(c.rho)) return DsbsParams::from_rho(c.rho);
  if (!std::isnan(c.a)) return DsbsParams::from_a(c.a);
  return DsbsParams::from_p(pick(c.p, def_p));
}

SbesParams sbes_of(const RunConfig& c, double def_p = 0.4) {
  SbesParams s;
  s.p = pick(c.p, def_p);
  return s;
}

GaussianPair gauss_of(const RunConfig& c, double def_rho = 0.5) {
  GaussianPair g;
  g.rho = pick(c.rho, def_rho);
  return g;
}

JointPmf joint_of(const RunConfig& c) {
  if (c.source == "dsbs") return dsbs_of(c).to_joint();
  if (c.source == "sbes") return sbes_of(c).to_joint();
  throw UsageError("source must be dsbs or sbes here");
}

Side side_of(const std::string& s) {
  if (s == "forward") return Side::forward;
  if (s == "reverse") return Side::reverse;
  throw UsageError("side must be forward or reverse");
}

// ---- subcommands

Csv run_ci(const RunConfig& c) {
  Csv t({"quantity", "value"});
  if (c.source == "gauss") {
    auto g = gauss_of(c);
    auto b = gaussian_exact_ci_bounds(g.rho);
    t.row({"wyner", wyner_ci_closed(g)});
    t.row({"exact_lower", b.lower});
    t.row({"exact_upper", b.upper});
    t.row({"li_elgamal", li_elgamal_bound(g.rho)});
    return t;
  }
  auto pi = joint_of(c);
  OptimizerConfig cfg;
  cfg.seed = c.seed;
  if (c.source == "dsbs") {
    auto d = dsbs_of(c);
    t.row({"wyner", wyner_ci_closed(d)});
    auto e = exact_ci_dsbs(d.a);
    t.row({"exact", e.value});
    t.row({"exact_gap", e.gap_over_wyner});
    double s = pick(c.s, 1.0);
    t.row({"renyi_upper", s > 0 ? renyi_ci_dsbs_upper(d.a, s) : wyner_ci_closed(d)});
  } else {
    t.row({"wyner", wyner_ci_closed(sbes_of(c))});
    t.row({"exact", wyner_ci_closed(sbes_of(c))});
  }
  t.row({"gkw", gkw_ci(pi)});
  if (c.numeric) t.row({"wyner_numeric", wyner_ci_numeric(pi, cfg).value});
  return t;
}

Csv region_rows(const std::string& kind, const RateCurve& rc, Csv t) {
  for (const auto& pt : rc.points) t.row({kind, pt.param, pt.R0, pt.R});
  return t;
}

Csv run_region(const RunConfig& c) {
  Csv t({"kind", "param", "R0", "R"});
  const int grid = pick(c.grid, 101);
  auto both = [&](auto src) {
    if (c.kind.empty() || c.kind == "approx") t = region_rows("approx", approx_region(src, grid), t);
    if (c.kind.empty() || c.kind == "exact") t = region_rows("exact", exact_region(src, grid), t);
  };
  if (c.source == "dsbs") both(dsbs_of(c));
  else if (c.source == "sbes") both(sbes_of(c));
  else if (c.source == "gauss") both(gauss_of(c));
  else throw UsageError("unknown source");
  return t;
}

Csv run_nicd(const RunConfig& c) {
  const int n = pick(c.n, 3);
  const double a = pick(c.a, 0.5), b = pick(c.b, a), rho = pick(c.rho, 0.5);
  auto mode = c.mode == "min" ? NicdMode::min : NicdMode::max;
  if (c.mode != "min" && c.mode != "max") throw UsageError("mode must be max or min");
  auto r = nicd_bruteforce(n, a, b, rho, mode);
  auto w = witsenhausen_bounds(a, b, rho);
  auto hc = hc_bound_phi(a, b, rho);
  Csv t({"n", "a", "b", "rho", "mode", "value", "witsenhausen_lo", "witsenhausen_hi", "hc_lo", "hc_hi"});
  t.row({double(n), a, b, rho, c.mode, r.value, w.first, w.second, hc.first, hc.second});
  return t;
}

BooleanFunction function_of(const RunConfig& c, int n) {
  if (c.fn == "maj") return BooleanFunction::majority(n);
  if (c.fn == "dictator") return BooleanFunction::dictator(n);
  if (c.fn.rfind("hex:", 0) == 0) return BooleanFunction::from_hex(n, c.fn.substr(4));
  throw UsageError("function must be maj, dictator or hex:<digits>");
}

Csv run_stability(const RunConfig& c) {
  const int n = pick(c.n, 3);
  const double rho = pick(c.rho, 0.5), q = pick(c.q, 2.0);
  auto f = function_of(c, n);
  Csv t({"fn", "n", "rho", "q", "q_stability", "sym_q_stability"});
  t.row({c.fn, double(n), rho, q, q_stability(f, rho, q), sym_q_stability(f, rho, q)});
  return t;
}

Csv run_exponent(const RunConfig& c) {
  const double rho = pick(c.rho, 0.9), al = pick(c.alpha, 0.2), be = pick(c.beta, al);
  auto side = side_of(c.side);
  double v;
  if (c.regime == "cl") v = nicd_cl_exponent(rho, al, be, side);
  else if (c.regime == "md") v = nicd_md_exponents(rho, al, be, side);
  else if (c.regime == "ld") {
    LdOptions o;
    o.seed = c.seed;
    if (c.grid > 0) o.grid = c.grid;
    v = c.numeric ? nicd_ld_exponents(DsbsParams::from_rho(rho).to_joint(), al, be, side, o)
                  : nicd_ld_exponent_dsbs(rho, al, be, side);
  } else if (c.regime == "q-md") v = q_stability_exponents(rho, pick(c.q, 2.0), al, Regime::MD);
  else if (c.regime == "q-ld") v = q_stability_exponents(rho, pick(c.q, 2.0), al, Regime::LD);
  else throw UsageError("regime must be cl, md, ld, q-md or q-ld");
  Csv t({"regime", "side", "rho", "alpha", "beta", "exponent"});
  t.row({c.regime, c.side, rho, al, be, v});
  return t;
}

Csv run_hc(const RunConfig& c) {
  const double rho = pick(c.rho, 0.5), p = pick(c.p, 2.0), q = pick(c.q, 2.0);
  auto region = c.region == "reverse" ? HcRegion::reverse : HcRegion::forward;
  if (c.region != "reverse" && c.region != "forward") throw UsageError("region must be forward or reverse");
  auto pi = DsbsParams::from_rho(rho).to_joint();
  bool closed = hc_membership_dsbs(rho, p, q, region);
  auto cert = hc_membership_general(pi, p, q, region, pick(c.grid, 48), c.seed);
  auto bl = bl_exponents(pi, p, q);
  Csv t({"rho", "p", "q", "region", "member_closed", "member_search", "certified", "bl_lower_bits",
         "bl_upper_bits"});
  t.row({rho, p, q, c.region, closed ? "1" : "0", cert.member ? "1" : "0", cert.certified ? "1" : "0",
         bl.lower_bits, bl.upper_bits});
  return t;
}

NonnegMatrix parse_matrix(const std::string& s) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(s);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> r;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      try {
        r.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw UsageError("bad matrix entry '" + cell + "'");
      }
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw UsageError("empty matrix");
  return NonnegMatrix::from_rows(rows);
}

Csv run_nnrank(const RunConfig& c) {
  if (c.matrix.empty()) throw UsageError("--matrix is required, rows separated by ';'");
  auto M = parse_matrix(c.matrix);
  auto r = nonneg_rank(M, 8, 64, c.seed);
  Csv t({"rows", "cols", "linear_rank", "lower", "upper", "exact"});
  t.row({double(M.rows()), double(M.cols()), double(r.linear_rank), double(r.lower), double(r.upper),
         r.exact ? "1" : "0"});
  return t;
}

Csv run_simulate(const RunConfig& c) {
  auto d = dsbs_of(c);
  const int n = pick(c.n, 8);
  const double rate = pick(c.rate, wyner_ci_closed(d));
  auto r = soft_covering_sim(d, rate, n, c.trials, c.seed);
  Csv t({"trial", "n", "rate", "tv", "kl", "dinf"});
  for (std::size_t i = 0; i < r.trials.size(); ++i)
    t.row({double(i), double(n), rate, r.trials[i].tv, r.trials[i].kl, r.trials[i].dinf});
  return t;
}

// ---- figures

Csv fig_wyner_dsbs(const RunConfig& c) {
  Csv t({"p", "a", "C_W"});
  for (double p : linspace(0, 0.5, pick(c.grid, 101))) {
    auto d = DsbsParams::from_p(p);
    t.row({p, d.a, wyner_ci_closed(d)});
  }
  return t;
}

Csv fig_eci_sbes(const RunConfig& c) {
  Csv t({"p", "C_W", "T_Ex"});
  for (double p : linspace(0, 1, pick(c.grid, 101))) {
    SbesParams s;
    s.p = p;
    double v = wyner_ci_closed(s);
    t.row({p, v, v});
  }
  return t;
}

Csv fig_wyner_gauss(const RunConfig& c) {
  Csv t({"rho", "C_W"});
  for (double r : linspace(0, 0.99, pick(c.grid, 100))) {
    GaussianPair g;
    g.rho = r;
    t.row({r, wyner_ci_closed(g)});
  }
  return t;
}

Csv fig_renyi_dsbs(const RunConfig& c) {
  Csv t({"sweep", "p", "s", "C_W", "upper", "lower"});
  OptimizerConfig cfg;
  cfg.restarts = 4;
  cfg.card_w = 2;
  cfg.seed = c.seed;
  auto point = [&](const std::string& sweep, double p, double s) {
    auto d = DsbsParams::from_p(p);
    double cw = wyner_ci_closed(d);
    if (s <= 0 || p == 0.5) {
      t.row({sweep, p, s, cw, cw, cw});
      return;
    }
    double up = renyi_ci_dsbs_upper(d.a, s);
    double lo = std::max(cw, pseudo_ci(d.to_joint(), s, PsiSide::lower, cfg).value);
    t.row({sweep, p, s, cw, up, lo});
  };
  const int g = pick(c.grid, 26);
  const double s0 = pick(c.s, 1.0), p0 = pick(c.p, 0.2);
  for (double p : linspace(0.02, 0.5, g)) point("p", p, s0);
  for (double s : linspace(-0.96, 1, g)) point("s", p0, s);
  return t;
}

Csv fig_eci_dsbs(const RunConfig& c) {
  Csv t({"a", "C_W", "T_Ex", "gap"});
  for (double a : linspace(0, 0.5, pick(c.grid, 101))) {
    auto e = exact_ci_dsbs(a);
    t.row({a, wyner_ci_closed(DsbsParams::from_a(a)), e.value, e.gap_over_wyner});
  }
  return t;
}

Csv fig_eci_gauss(const RunConfig& c) {
  Csv t({"rho", "C_W", "T_Ex_upper"});
  for (double r : linspace(0, 0.99, pick(c.grid, 100))) {
    auto b = gaussian_exact_ci_bounds(r);
    t.row({r, b.lower, b.upper});
  }
  return t;
}

Csv fig_ecs(const RunConfig& c, const std::string& src) {
  RunConfig d = c;
  d.source = src;
  d.kind.clear();
  if (src == "dsbs" && std::isnan(d.p) && std::isnan(d.rho) && std::isnan(d.a)) d.p = 0.2;
  return run_region(d);
}

Csv fig_f_exponents(const RunConfig& c) {
  const double rho = pick(c.rho, 0.9);
  const int g = pick(c.grid, 21);
  Csv t({"alpha", "beta", "cl_forward", "cl_reverse", "md_forward", "md_reverse", "ld_forward", "ld_reverse"});
  for (double al : linspace(0, 1, g))
    for (double be : linspace(0, 1, g))
      t.row({al, be, nicd_cl_exponent(rho, al, be, Side::forward), nicd_cl_exponent(rho, al, be, Side::reverse),
             nicd_md_exponents(rho, al, be, Side::forward), nicd_md_exponents(rho, al, be, Side::reverse),
             nicd_ld_exponent_dsbs(rho, al, be, Side::forward), nicd_ld_exponent_dsbs(rho, al, be, Side::reverse)});
  return t;
}

Csv fig_q_md(const RunConfig& c) {
  const double rho = pick(c.rho, 0.9);
  Csv t({"q", "alpha", "exponent"});
  std::vector<double> qs = {-0.2, -0.1, 0.5, 1, 2, 5};
  if (!std::isnan(c.q)) qs = {c.q};
  for (double q : qs)
    for (double al : linspace(0, 1, pick(c.grid, 101))) t.row({q, al, q_stability_md_exponent(rho, q, al)});
  return t;
}

Csv fig_q_ld(const RunConfig& c) {
  const double rho = pick(c.rho, 0.9);
  auto pi = DsbsParams::from_rho(rho).to_joint();
  Csv t({"q", "alpha", "exponent"});
  std::vector<double> qs = {-1, -0.5, 0.5, 1, 2, 5};
  if (!std::isnan(c.q)) qs = {c.q};
  for (double q : qs) {
    auto cv = q_stability_ld_curve(pi, q, pick(c.grid, 101));
    for (std::size_t i = 0; i < cv.alpha.size(); ++i) t.row({q, cv.alpha[i], cv.exponent[i]});
  }
  return t;
}

Csv fig_hc_regions(const RunConfig& c) {
  std::vector<double> rhos = {0.05, 0.95};
  if (!std::isnan(c.rho)) rhos = {c.rho};
  const int g = pick(c.grid, 101);
  Csv t({"rho", "region", "p", "q"});
  for (double rho : rhos) {
    const double r2 = rho * rho;
    // boundary (p-1)(q-1) = rho^2, log-spaced in |p-1|
    for (int i = 0; i < g; ++i) {
      double d = r2 / 20 * std::pow(400.0 / r2, double(i) / (g - 1));
      t.row({rho, "forward", 1 + d, 1 + r2 / d});
    }
    for (int i = 0; i < g; ++i) {
      double d = r2 / 20 * std::pow(400.0 / r2, double(i) / (g - 1));
      t.row({rho, "reverse", 1 - d, 1 - r2 / d});
    }
  }
  return t;
}

Csv fig_edge_isoper(const RunConfig& c) {
  Csv t({"alpha", "edge_isoperimetric", "nonlinear_lsi", "linear_lsi"});
  const double ln2 = std::log(2.0);
  for (double al : linspace(0, 1, pick(c.grid, 101))) t.row({al, al, 2 * lsi_b(2, al * ln2), al * ln2});
  return t;
}

Csv fig_gaussian_ck(const RunConfig& c) {
  std::vector<double> rhos = {0.1, 0.3, 0.5, 0.7, 0.9};
  if (!std::isnan(c.rho)) rhos = {c.rho};
  Csv t({"a", "rho", "MI"});
  for (double rho : rhos)
    for (double a : linspace(0, 0.5, pick(c.grid, 101))) t.row({a, rho, gaussian_ck_mi(a, rho)});
  return t;
}

const std::map<std::string, Csv (*)(const RunConfig&)>& figures() {
  static const std::map<std::string, Csv (*)(const RunConfig&)> m = {
      {"wyner-dsbs", fig_wyner_dsbs},
      {"eci-sbes", fig_eci_sbes},
      {"wyner-gauss", fig_wyner_gauss},
      {"renyi-dsbs", fig_renyi_dsbs},
      {"eci-dsbs", fig_eci_dsbs},
      {"eci-gauss", fig_eci_gauss},
      {"ecs-sbes", [](const RunConfig& c) { return fig_ecs(c, "sbes"); }},
      {"ecs-dsbs", [](const RunConfig& c) { return fig_ecs(c, "dsbs"); }},
      {"ecs-gauss", [](const RunConfig& c) { return fig_ecs(c, "gauss"); }},
      {"f-exponents", fig_f_exponents},
      {"q-md", fig_q_md},
      {"q-ld", fig_q_ld},
      {"hc-regions", fig_hc_regions},
      {"edge-isoper", fig_edge_isoper},
      {"gaussian-ck", fig_gaussian_ck},
  };
  return m;
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const AlphabetMismatch*>(&e)) return "AlphabetMismatch";
  if (dynamic_cast<const MarginalMismatch*>(&e)) return "MarginalMismatch";
  if (dynamic_cast<const NonConvergence*>(&e)) return "NonConvergence";
  if (dynamic_cast<const SingularSystem*>(&e)) return "SingularSystem";
  if (dynamic_cast<const SearchSpaceTooLarge*>(&e)) return "SearchSpaceTooLarge";
  if (dynamic_cast<const ConstraintViolation*>(&e)) return "ConstraintViolation";
  if (dynamic_cast<const SizeGuard*>(&e)) return "SizeGuard";
  if (dynamic_cast<const CapExceeded*>(&e)) return "CapExceeded";
  if (dynamic_cast<const GridTooCoarse*>(&e)) return "GridTooCoarse";
  if (dynamic_cast<const QuadratureFailure*>(&e)) return "QuadratureFailure";
  if (dynamic_cast<const OdeStepFailure*>(&e)) return "OdeStepFailure";
  return "ComputeError";
}

void add_common(CLI::App* s, RunConfig& c) {
  s->add_option("--rho", c.rho, "correlation");
  s->add_option("--p", c.p, "crossover / erasure probability, or hypercontractivity p");
  s->add_option("--a", c.a, "DSBS a parameter or set size");
  s->add_option("--b", c.b, "second set size");
  s->add_option("--q", c.q, "stability order or hypercontractivity q");
  s->add_option("--alpha", c.alpha, "first exponent");
  s->add_option("--beta", c.beta, "second exponent");
  s->add_option("--s", c.s, "Renyi order minus one");
  s->add_option("--grid", c.grid, "grid size")->check(CLI::PositiveNumber);
  s->add_option("--tol", c.tol, "tolerance");
  s->add_option("--seed", c.seed, "random seed");
  s->add_option("--out", c.out, "output CSV path (default stdout)");
  s->add_option("--source", c.source, "dsbs, sbes or gauss")->check(CLI::IsMember({"dsbs", "sbes", "gauss"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Common information toolkit"};
  app.require_subcommand(1);
  RunConfig c;
  std::map<std::string, std::function<Csv()>> runners;

  auto sub = [&](const std::string& name, const std::string& help, std::function<Csv()> fn) {
    auto* s = app.add_subcommand(name, help);
    add_common(s, c);
    runners[name] = std::move(fn);
    return s;
  };
  auto* ci = sub("ci", "common information quantities", [&] { return run_ci(c); });
  ci->add_flag("--numeric", c.numeric, "also run the Wyner optimizer");
  auto* region = sub("region", "channel synthesis rate regions", [&] { return run_region(c); });
  region->add_option("--kind", c.kind, "approx or exact (default both)")->check(CLI::IsMember({"approx", "exact"}));
  auto* nicd = sub("nicd", "exhaustive NICD with bounds", [&] { return run_nicd(c); });
  nicd->add_option("--n", c.n, "dimension");
  nicd->add_option("--mode", c.mode, "max or min")->check(CLI::IsMember({"max", "min"}));
  auto* stab = sub("stability", "q-stability of a Boolean function", [&] { return run_stability(c); });
  stab->add_option("--n", c.n, "dimension");
  stab->add_option("--fn", c.fn, "maj, dictator or hex:<table>");
  auto* expo = sub("exponent", "NICD and q-stability exponents", [&] { return run_exponent(c); });
  expo->add_option("--regime", c.regime, "cl, md, ld, q-md, q-ld")
      ->check(CLI::IsMember({"cl", "md", "ld", "q-md", "q-ld"}));
  expo->add_option("--side", c.side, "forward or reverse")->check(CLI::IsMember({"forward", "reverse"}));
  expo->add_flag("--numeric", c.numeric, "numeric LD optimization instead of the closed form");
  auto* hc = sub("hc", "hypercontractivity membership and BL exponents", [&] { return run_hc(c); });
  hc->add_option("--region", c.region, "forward or reverse")->check(CLI::IsMember({"forward", "reverse"}));
  auto* nn = sub("nnrank", "nonnegative rank bounds", [&] { return run_nnrank(c); });
  nn->add_option("--matrix", c.matrix, "rows separated by ';', entries by ','");
  auto* sim = sub("simulate", "soft covering simulation for the DSBS", [&] { return run_simulate(c); });
  sim->add_option("--n", c.n, "block length");
  sim->add_option("--rate", c.rate, "codebook rate (default C_W)");
  sim->add_option("--trials", c.trials, "trials")->check(CLI::PositiveNumber);
  std::vector<std::string> names;
  for (const auto& [k, v] : figures()) names.push_back(k);
  auto* fig = sub("figure", "emit the CSV behind a figure", [&] { return figures().at(c.name)(c); });
  fig->add_option("name", c.name, "figure name")->required()->check(CLI::IsMember(names));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string name;
  for (auto* s : app.get_subcommands()) name = s->get_name();
  try {
    std::string text = runners.at(name)().str();
    if (c.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(c.out, std::ios::binary);
      if (!f) throw UsageError("cannot open " + c.out);
      f << text;
    }
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    nlohmann::json j = {{"error", error_kind(e)}, {"message", e.what()}, {"subcommand", name}};
    std::cerr << j.dump() << "\n";
    return 1;
  }
  return 0;
}
