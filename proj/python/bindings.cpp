#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "citk/boolfn.hpp"
#include "citk/common_info.hpp"
#include "citk/coupling.hpp"
#include "citk/errors.hpp"
#include "citk/exponents.hpp"
#include "citk/funcineq.hpp"
#include "citk/nnrank.hpp"
#include "citk/prob.hpp"
#include "citk/synthesis.hpp"

namespace py = pybind11;
using namespace citk;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows rows_of(const JointPmf& pi) {
  Rows r(pi.nx(), std::vector<double>(pi.ny()));
  for (int x = 0; x < pi.nx(); ++x)
    for (int y = 0; y < pi.ny(); ++y) r[x][y] = pi(x, y);
  return r;
}

OptimizerConfig config(int restarts, std::uint64_t seed) {
  OptimizerConfig c;
  c.restarts = restarts;
  c.seed = seed;
  return c;
}

py::dict opt_dict(const OptResult& r) {
  py::dict d;
  d["value"] = r.value;
  d["violation"] = r.violation;
  d["card_w"] = r.witness.card_w;
  return d;
}

BooleanFunction boolean_of(const std::vector<int>& table) {
  int n = 0;
  while ((std::size_t{1} << n) < table.size()) ++n;
  if ((std::size_t{1} << n) != table.size()) throw DomainError("truth table length must be a power of two");
  std::vector<bool> t(table.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = table[i] != 0;
  return BooleanFunction(n, t);
}

}  // namespace

PYBIND11_MODULE(_citk, m) {
  m.doc() = "common-information toolkit";

  static py::exception<Error> base(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<MarginalMismatch>(m, "MarginalMismatch", base.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());
  py::register_exception<SearchSpaceTooLarge>(m, "SearchSpaceTooLarge", base.ptr());
  py::register_exception<SizeGuard>(m, "SizeGuard", base.ptr());
  py::register_exception<OdeStepFailure>(m, "OdeStepFailure", base.ptr());

  // sources
  m.def("dsbs", [](double p) { return rows_of(DsbsParams::from_p(p).to_joint()); }, py::arg("p"));
  m.def("sbes", [](double p) { return rows_of(SbesParams{p}.to_joint()); }, py::arg("p"));
  m.def("entropy", [](const std::vector<double>& p) { return entropy(p); }, py::arg("p"));

  // common information
  m.def("wyner_ci_dsbs", [](double p) { return wyner_ci_closed(DsbsParams::from_p(p)); }, py::arg("p"));
  m.def("wyner_ci_sbes", [](double p) { return wyner_ci_closed(SbesParams{p}); }, py::arg("p"));
  m.def("wyner_ci_gauss", [](double rho) { return wyner_ci_closed(GaussianPair{rho}); }, py::arg("rho"));
  m.def(
      "wyner_ci_numeric",
      [](const Rows& pi, int restarts, std::uint64_t seed) {
        return opt_dict(wyner_ci_numeric(JointPmf::from_rows(pi), config(restarts, seed)));
      },
      py::arg("pi"), py::arg("restarts") = 32, py::arg("seed") = 0);
  m.def(
      "pseudo_ci",
      [](const Rows& pi, double s, const std::string& side, int restarts, std::uint64_t seed) {
        PsiSide ps = side == "upper" ? PsiSide::upper : side == "lower" ? PsiSide::lower
                                                                         : throw DomainError("side is upper or lower");
        return opt_dict(pseudo_ci(JointPmf::from_rows(pi), s, ps, config(restarts, seed)));
      },
      py::arg("pi"), py::arg("s"), py::arg("side") = "upper", py::arg("restarts") = 32, py::arg("seed") = 0);
  m.def(
      "exact_ci_dsbs",
      [](double a) {
        auto r = exact_ci_dsbs(a);
        return py::make_tuple(r.value, r.gap_over_wyner);
      },
      py::arg("a"));
  m.def(
      "gaussian_exact_ci_bounds",
      [](double rho) {
        auto b = gaussian_exact_ci_bounds(rho);
        return py::make_tuple(b.lower, b.upper);
      },
      py::arg("rho"));

  // couplings
  m.def(
      "min_relative_entropy",
      [](const std::vector<double>& qx, const std::vector<double>& qy, const Rows& pi) {
        auto r = min_relative_entropy(qx, qy, JointPmf::from_rows(pi));
        return r.infinite ? kInf : r.value;
      },
      py::arg("qx"), py::arg("qy"), py::arg("pi"));
  m.def(
      "max_cross_entropy",
      [](const std::vector<double>& px, const std::vector<double>& py, const Rows& pi, double s) {
        auto r = max_cross_entropy(px, py, JointPmf::from_rows(pi), s);
        return r.infinite ? kInf : r.value;
      },
      py::arg("px"), py::arg("py"), py::arg("pi"), py::arg("s"));
  m.def(
      "transport_lp",
      [](const std::vector<double>& cost, const std::vector<double>& r, const std::vector<double>& c) {
        auto lp = transport_lp(cost, r, c);
        return py::make_tuple(lp.value, lp.plan.q);
      },
      py::arg("cost"), py::arg("r"), py::arg("c"));

  // Boolean functions
  m.def(
      "nicd",
      [](int n, double a, double b, double rho, const std::string& mode) {
        return nicd_bruteforce(n, a, b, rho, mode == "min" ? NicdMode::min : NicdMode::max).value;
      },
      py::arg("n"), py::arg("a"), py::arg("b"), py::arg("rho"), py::arg("mode") = "max");
  m.def("witsenhausen_bounds", &witsenhausen_bounds, py::arg("a"), py::arg("b"), py::arg("rho"));
  m.def(
      "influences", [](const std::vector<int>& table) { return influences(boolean_of(table)).flip; },
      py::arg("table"));
  m.def("weights", [](const std::vector<int>& table) { return weights(boolean_of(table)); }, py::arg("table"));
  m.def("edge_isoperimetric_bound", &edge_isoperimetric_bound, py::arg("mean"));
  m.def("maj_sym_stability", &maj_sym_stability, py::arg("m"), py::arg("rho"), py::arg("q"));
  m.def("maj_plain_stability", &maj_plain_stability, py::arg("m"), py::arg("rho"));

  // exponents
  m.def("gaussian_copula", &gaussian_copula, py::arg("rho"), py::arg("a"), py::arg("b"));
  m.def(
      "nicd_md_exponent",
      [](double rho, double alpha, double beta, const std::string& side) {
        return nicd_md_exponents(rho, alpha, beta, side == "reverse" ? Side::reverse : Side::forward);
      },
      py::arg("rho"), py::arg("alpha"), py::arg("beta"), py::arg("side") = "forward");
  m.def(
      "nicd_ld_exponent_dsbs",
      [](double rho, double alpha, double beta, const std::string& side) {
        return nicd_ld_exponent_dsbs(rho, alpha, beta, side == "reverse" ? Side::reverse : Side::forward);
      },
      py::arg("rho"), py::arg("alpha"), py::arg("beta"), py::arg("side") = "forward");
  m.def("q_stability_md_exponent", &q_stability_md_exponent, py::arg("rho"), py::arg("q"), py::arg("alpha"));

  // functional inequalities
  m.def(
      "hc_member_dsbs",
      [](double rho, double p, double q, const std::string& region) {
        return hc_membership_dsbs(rho, p, q, region == "reverse" ? HcRegion::reverse : HcRegion::forward);
      },
      py::arg("rho"), py::arg("p"), py::arg("q"), py::arg("region") = "forward");
  m.def(
      "hc_member",
      [](const Rows& pi, double p, double q, const std::string& region) {
        auto c = hc_membership_general(JointPmf::from_rows(pi), p, q,
                                       region == "reverse" ? HcRegion::reverse : HcRegion::forward);
        return py::make_tuple(c.member, c.certified);
      },
      py::arg("pi"), py::arg("p"), py::arg("q"), py::arg("region") = "forward");
  m.def("lsi_b", &lsi_b, py::arg("p"), py::arg("t"));
  m.def("lsi_g", &lsi_g, py::arg("t"));
  m.def(
      "strengthened_hc_ode",
      [](double p, double alpha, double t_max, double step, int samples) {
        auto c = strengthened_hc_ode(p, alpha, t_max, step, samples);
        return py::make_tuple(c.t, c.q);
      },
      py::arg("p"), py::arg("alpha"), py::arg("t_max"), py::arg("step") = 1e-4, py::arg("samples") = 101);
  m.def("rho1_root", &rho1_root);

  // nonnegative rank
  m.def(
      "nonneg_rank",
      [](const Rows& M) {
        auto r = nonneg_rank(NonnegMatrix::from_rows(M));
        py::dict d;
        d["lower"] = r.lower;
        d["upper"] = r.upper;
        d["exact"] = r.exact;
        d["linear_rank"] = r.linear_rank;
        return d;
      },
      py::arg("matrix"));

  // synthesis
  m.def(
      "soft_covering_tv",
      [](double p, double rate, int n, int trials, std::uint64_t seed) {
        auto r = soft_covering_sim(DsbsParams::from_p(p), rate, n, trials, seed);
        std::vector<double> tv;
        for (const auto& t : r.trials) tv.push_back(t.tv);
        return tv;
      },
      py::arg("p"), py::arg("rate"), py::arg("n"), py::arg("trials"), py::arg("seed") = 0);
}
