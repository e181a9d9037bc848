#pragma once
// Poincare-invariant mass-shell inner products. The on-shell delta
// delta(k^2 - m^2) theta(k0) is always resolved analytically to the
// d3k/(2 omega_k) measure before discretization.
#include <string>

#include "nlqft/grid.hpp"

namespace nlqft {

struct Kernel {
  enum Kind { ScalarMass, Vector, EMTensor } kind = ScalarMass;
  double m = 1.0;        // mass (ScalarMass: >= 0, Vector: > 0)
  double sigma_t = 1.0;  // Vector only, weight of the k^mu k_nu part
  double sigma_s = 0.0;  // Vector only, weight of the delta^mu_nu part
  std::string label;
};

Kernel make_scalar_kernel(double m);
Kernel make_vector_kernel(double m, double sigma_t, double sigma_s);
Kernel make_em_kernel();

Rank kernel_rank(const Kernel& k);
// Stable cache/label key including all parameters.
std::string kernel_key(const Kernel& k);

struct ShellValue {
  cplx value{};
  std::size_t shell_samples = 0;  // momentum nodes actually summed
  std::size_t dropped = 0;        // nodes above the k0 Nyquist band (grid path)
};

// Direct kernel evaluations on spectral fields (massive kernels reduce onto
// the shell through an exact time-axis transform at omega_k; massless kernels
// go through spherical momentum quadrature).
ShellValue scalar_shell_ip(const SpectralField4& f, const SpectralField4& g,
                           double m);
ShellValue vector_shell_ip(const SpectralField4& j1, const SpectralField4& j2,
                           double m, double sigma_t, double sigma_s);
ShellValue em_shell_ip(const SpectralField4& f1, const SpectralField4& f2);

}  // namespace nlqft
