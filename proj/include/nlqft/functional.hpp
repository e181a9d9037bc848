#pragma once
// Local functionals: expression trees applied pointwise to sampled fields.
// Pointwise polynomials and contractions keep the support of the input
// (derivative nodes enlarge it by one finite-difference stencil).
//
// Grammar (slots are identifiers; ranks supplied at parse time, default scalar):
//   expr    := term (('+'|'-') term)*
//   term    := factor ('*' factor)*
//   factor  := primary ('^' INT)?
//   primary := NUMBER | IDENT | '-' primary | '(' expr ')' | FUNC '(' args ')'
// Functions:
//   deriv(f)      scalar -> vector, contravariant gradient d^mu f
//   deriv(mu, f)  plain d_mu, any rank (mu in 0..3)
//   eta(a, b)     vectors -> scalar, eta_{mu nu} a^mu b^nu
//   contr(a, F)   vector x antisym2 -> vector, a_mu F^{mu alpha}
//   eps(a, F)     vector x antisym2 -> vector, eps^{mu rho sig alpha} a_mu F_{rho sig}
//   eps(F)        antisym2 -> antisym2, (1/2) eps^{mu alpha nu beta} F_{nu beta}
//   div(F)        antisym2 -> vector, d_mu F^{mu alpha}
//   inner(F, G)   antisym2 x antisym2 -> scalar, F_{mu nu} G^{mu nu}
//   wedge(a, b)   vectors -> antisym2, (1/2)(a^mu b^nu - a^nu b^mu)
//   dwedge(a)     vector -> antisym2, (1/2)(d^mu a^nu - d^nu a^mu)
//   lower(a)      flip spatial-index signs (diagonal metric raise/lower)
// All tensor components are stored contravariant; antisymmetric rank-2 fields
// store the 6 independent components in the order 01,02,03,12,13,23.
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nlqft/grid.hpp"

namespace nlqft {

struct FNode {
  enum Kind {
    Var,
    Const,
    Sum,
    Product,
    Power,
    Grad,
    Deriv,
    Eta,
    Contr,
    Inner2,
    Eps2,
    EpsDual,
    Div,
    Wedge,
    DWedge,
    Lower
  } kind = Const;
  std::vector<FNode> kids;
  std::string name;   // Var
  double value = 0;   // Const
  int power = 1;      // Power
  int mu = -1;        // Deriv
  Rank rank = Rank::Scalar;
};

struct LocalFunctional {
  FNode root;
  Rank out_rank = Rank::Scalar;
  std::string canonical;            // round-trips through parse_functional
  std::vector<std::string> slots;   // sorted unique slot names
};

// Throws std::invalid_argument with a position note on syntax or rank errors.
LocalFunctional parse_functional(
    const std::string& text,
    const std::map<std::string, Rank>& slot_ranks = {});

std::string canonical_print(const LocalFunctional& P);

// Pointwise evaluation; all bound fields must share one grid.
RealField4 eval_functional(const LocalFunctional& P,
                           const std::map<std::string, const RealField4*>& bindings);

}  // namespace nlqft
