#pragma once
// Analytic test-function families: Gaussian packets, compactly supported bumps,
// sums and scalings, with support metadata, translation, and closed-form FTs.
#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "nlqft/grid.hpp"

namespace nlqft {

// Conservative Euclidean 4-ball support bound.
struct Support {
  bool bounded = false;
  std::array<double, 4> center{};
  double radius = 0.0;
};

struct TestFunction;

struct GaussianPacket {
  std::array<double, 4> x0{};  // center
  double sigma = 1.0;          // Euclidean width
  std::array<double, 4> q{};   // modulation wavevector (contravariant)
  double phase = 0.0;          // modulation phase at the center
};

struct BumpFn {
  std::array<double, 4> x0{};
  double r = 1.0;  // support radius (Euclidean 4-ball)
};

struct SumFn {
  std::shared_ptr<const TestFunction> a, b;
};

struct TestFunction {
  std::variant<GaussianPacket, BumpFn, SumFn> family;
  Rank rank = Rank::Scalar;
  std::array<double, 6> profile{{1, 0, 0, 0, 0, 0}};  // per-component factors
  double amplitude = 1.0;
};

TestFunction gaussian_packet(const std::array<double, 4>& x0, double sigma,
                             const std::array<double, 4>& q,
                             Rank rank = Rank::Scalar,
                             const std::array<double, 6>& profile = {
                                 {1, 0, 0, 0, 0, 0}});
TestFunction bump(const std::array<double, 4>& x0, double r,
                  Rank rank = Rank::Scalar,
                  const std::array<double, 6>& profile = {{1, 0, 0, 0, 0, 0}});
TestFunction sum(const TestFunction& a, const TestFunction& b);
TestFunction scale(const TestFunction& f, double s);

// f_a(x) = f(x + a): centers shift by -a; analytic re-evaluation, never
// grid interpolation.
TestFunction translate(const TestFunction& f, const std::array<double, 4>& a);

// Pointwise value of component c at spacetime point x.
double value_at(const TestFunction& f, const std::array<double, 4>& x, int c);

RealField4 sample(const TestFunction& f, std::shared_ptr<const Grid> grid);

Support support_of(const TestFunction& f);

// Closed-form continuum FT, available for Gaussian-built functions (no bumps).
bool has_closed_ft(const TestFunction& f);
// f~_c(k) with the e^{+i(k0 t - kvec.xvec)} convention.
cplx closed_ft(const TestFunction& f, const std::array<double, 4>& k, int c);

// Stable content key for caching: equal keys imply identical functions.
std::string content_key(const TestFunction& f);

enum class Causal { SpacelikeSeparated, NotSpacelikeSeparated, Indeterminate };

struct CausalRelation {
  Causal relation = Causal::Indeterminate;
  // worst case of (dt)^2 - |dx|^2 over the support bounds (NaN if unbounded)
  double margin = 0.0;
};

CausalRelation causal_relation(const TestFunction& f, const TestFunction& g);

}  // namespace nlqft
