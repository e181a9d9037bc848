#pragma once
// Deformed-electromagnetism model families built from the generic machinery:
// a massless antisymmetric-tensor base product, a massive 4-current product
// with sigma_T/sigma_S weighting, optional axial-vector terms, optional
// derivative-invariant terms, and optional scalar-kernel invariants.
#include <optional>

#include "nlqft/algebra.hpp"

namespace nlqft {

struct EMModelParams {
  // weights of the nonlinear terms (all must be >= 0 so the sum stays PSD)
  double lambda1 = 0, lambda2 = 0, lambda3 = 0, lambda4 = 0, lambda5 = 0,
         lambda6 = 0, lambda7 = 0;
  double kappa1 = 1, kappa2 = 1, kappa3 = 1;
  double mV = 1.0;  // mass of the 4-current/axial kernel
  double sigma_t = 1.0, sigma_s = 0.5;
  // weights of the derivative-invariant terms (include_derivative_terms)
  double lambda_deriv1 = 0, lambda_deriv2 = 0;
  // weight of the scalar-kernel invariants (extended flag)
  double lambda_ext = 0;
};

// Slots: J (vector), S (axial vector, only with include_axial), F (antisym2).
// Term list:
//   base:        (F, F)_EM + (J, J)_V [+ (S, S)_V]
//   lambda1:     (J + kappa1 contr(J,F), .)_V
//   lambda2:     (contr(J,F), .)_V
//   lambda3:     (eps(J,F), .)_V
//   axial:       lambda4 (contr(S,F), .)_V
//                lambda5 (contr(S,F) + kappa2 eps(J,F), .)_V
//                lambda6 (wedge(S,J) + kappa3 eps(F), .)_EM
//                lambda7 (wedge(S,J), .)_EM
//   derivative:  lambda_deriv1 (J + kappa2 div(F), .)_V
//                lambda_deriv2 (dwedge(J) + kappa3 F, .)_EM
//   extended:    lambda_ext { (eta(J,J), .)_S, (eta(J,S), .)_S or (S,S) variant,
//                             (inner(F,F), .)_S } with scalar mass mV
NonlinearModel build_em_model(const EMModelParams& params, bool include_axial,
                              bool include_derivative_terms,
                              bool extended = false);

struct EMProbe {
  std::optional<TestFunction> J, S, F;
};
// At least one member must be present; ranks are checked (J, S vectors;
// F antisym2).
Probe em_probe(const EMProbe& p);

// xi(probe_J, probe_F): the vacuum 2-point cross term between a pure-current
// and a pure-field probe. Identically zero when no term couples the two slots.
cplx vacuum_cross_correlation(XiEvaluator& ev, const TestFunction& J,
                              const TestFunction& F);

}  // namespace nlqft
