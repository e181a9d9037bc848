#pragma once
// Measurement-outcome densities: the Gaussian n-measurement vacuum density,
// the one-particle correction (a quasiprobability, may go negative), and
// densities deformed by an invertible monotone map G.
#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace nlqft {

struct GDescriptor {
  enum Kind { Identity, XMinusTanh, MonotoneTable } kind = Identity;
  // MonotoneTable knots, strictly increasing in both coordinates; interpolated
  // with a monotone (Fritsch-Carlson) cubic so invertibility survives.
  std::vector<double> xs, ys;
};

double g_value(const GDescriptor& G, double y);
double g_derivative(const GDescriptor& G, double y);

struct DensitySpec {
  enum Kind { VacuumGaussian, OneParticle, GDeformed } kind = VacuumGaussian;
  Eigen::MatrixXd F;      // real symmetric covariance-like matrix
  Eigen::VectorXcd S;     // OneParticle only
  double variance = 1.0;  // GDeformed only
  GDescriptor G;          // GDeformed only
  double ridge = 0.0;     // optional eps*I regularization, off by default
};

// VacuumGaussian: e^{-x'F^{-1}x/2} / sqrt((2 pi)^n det F)
// OneParticle:    the same times [|x'F^{-1}S|^2 + (1 - S+F^{-1}S)]
// GDeformed (n=1): g_deformed_density(G, variance, x[0])
// Throws "singular geometry" when F has no Cholesky factorization.
double joint_density(const DensitySpec& spec, const std::vector<double>& x);

// (1/sqrt(2 pi v)) e^{-G(y)^2/(2v)} G'(y)
double g_deformed_density(const GDescriptor& G, double variance, double y);

// Trapezoidal tensor-grid integral, n <= 3; errors out if the density at the
// box boundary exceeds 1e-12 of its maximum (box too small).
double integrate_density(const DensitySpec& spec,
                         const std::vector<std::pair<double, double>>& box,
                         int resolution);

}  // namespace nlqft
