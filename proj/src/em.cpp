#include "nlqft/em.hpp"

#include <cstdio>
#include <stdexcept>

namespace nlqft {

namespace {
std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

NonlinearModel build_em_model(const EMModelParams& p, bool include_axial,
                              bool include_derivative_terms, bool extended) {
  for (double l : {p.lambda1, p.lambda2, p.lambda3, p.lambda4, p.lambda5,
                   p.lambda6, p.lambda7, p.lambda_deriv1, p.lambda_deriv2,
                   p.lambda_ext})
    if (!(l >= 0.0))
      throw std::invalid_argument("term weights must be >= 0");
  if ((p.lambda4 > 0 || p.lambda5 > 0 || p.lambda6 > 0 || p.lambda7 > 0) &&
      !include_axial)
    throw std::invalid_argument("axial-vector terms requested without the S slot");

  Kernel V = make_vector_kernel(p.mV, p.sigma_t, p.sigma_s);
  Kernel EM = make_em_kernel();
  Kernel S0 = make_scalar_kernel(p.mV);

  std::map<std::string, Rank> slots = {{"J", Rank::Vector}, {"F", Rank::Antisym2}};
  if (include_axial) slots.emplace("S", Rank::Vector);

  std::vector<std::tuple<std::string, Kernel, double>> terms;
  terms.emplace_back("F", EM, 1.0);
  terms.emplace_back("J", V, 1.0);
  if (include_axial) terms.emplace_back("S", V, 1.0);
  if (p.lambda1 > 0)
    terms.emplace_back("J + " + num(p.kappa1) + " * contr(J, F)", V, p.lambda1);
  if (p.lambda2 > 0) terms.emplace_back("contr(J, F)", V, p.lambda2);
  if (p.lambda3 > 0) terms.emplace_back("eps(J, F)", V, p.lambda3);
  if (include_axial) {
    if (p.lambda4 > 0) terms.emplace_back("contr(S, F)", V, p.lambda4);
    if (p.lambda5 > 0)
      terms.emplace_back("contr(S, F) + " + num(p.kappa2) + " * eps(J, F)", V,
                         p.lambda5);
    if (p.lambda6 > 0)
      terms.emplace_back("wedge(S, J) + " + num(p.kappa3) + " * eps(F)", EM,
                         p.lambda6);
    if (p.lambda7 > 0) terms.emplace_back("wedge(S, J)", EM, p.lambda7);
  }
  if (include_derivative_terms) {
    if (p.lambda_deriv1 > 0)
      terms.emplace_back("J + " + num(p.kappa2) + " * div(F)", V, p.lambda_deriv1);
    if (p.lambda_deriv2 > 0)
      terms.emplace_back("dwedge(J) + " + num(p.kappa3) + " * F", EM,
                         p.lambda_deriv2);
  }
  if (extended && p.lambda_ext > 0) {
    terms.emplace_back("eta(J, J)", S0, p.lambda_ext);
    terms.emplace_back("inner(F, F)", S0, p.lambda_ext);
    if (include_axial) {
      terms.emplace_back("eta(S, S)", S0, p.lambda_ext);
      terms.emplace_back("eta(J, S)", S0, p.lambda_ext);
    }
  }
  return make_model(terms, slots);
}

Probe em_probe(const EMProbe& p) {
  if (!p.J && !p.S && !p.F)
    throw std::invalid_argument("probe needs at least one test function");
  Probe out;
  if (p.J) {
    if (p.J->rank != Rank::Vector)
      throw std::invalid_argument("J must be a vector test function");
    out.fns.emplace("J", *p.J);
  }
  if (p.S) {
    if (p.S->rank != Rank::Vector)
      throw std::invalid_argument("S must be a vector test function");
    out.fns.emplace("S", *p.S);
  }
  if (p.F) {
    if (p.F->rank != Rank::Antisym2)
      throw std::invalid_argument("F must be an antisym2 test function");
    out.fns.emplace("F", *p.F);
  }
  return out;
}

cplx vacuum_cross_correlation(XiEvaluator& ev, const TestFunction& J,
                              const TestFunction& F) {
  EMProbe pj, pf;
  pj.J = J;
  pf.F = F;
  return ev.xi(em_probe(pj), em_probe(pf));
}

}  // namespace nlqft
