#pragma once
// On-shell reduction engine.
//
// Massive kernels (rect path): spatial FFT per time slice, then an exact
// discrete-time transform evaluated at k0 = omega_k for every spatial momentum
// node (equivalent to trigonometric interpolation of the 4D DFT along k0).
// Shell nodes with omega_k above the k0 Nyquist limit are dropped and counted.
//
// Massless kernels (spherical path): Gauss-Legendre radial panels x
// Gauss-Legendre in cos(theta) x uniform trapezoid in phi, with the Fourier
// transform evaluated at each node by a direct nonuniform DFT over the
// nonzero position samples. This resolves the cone vertex at k = 0 that a
// rectangular momentum sum cannot.
#include <memory>
#include <vector>

#include "nlqft/grid.hpp"
#include "nlqft/kernel.hpp"

namespace nlqft {

// On-shell values over the spatial momentum grid for one field.
struct RectRep {
  std::shared_ptr<const Grid> grid;
  double mass = 0.0;
  int components = 1;
  std::vector<cplx> vals;       // comp-major, n_spatial entries per component
  std::vector<double> omega;    // shared omega_k table (n_spatial)
  std::vector<std::uint8_t> keep;  // 1 if omega_k within the k0 band
  std::size_t dropped = 0;
};

struct SphNodes {
  double kmax = 0.0;
  double extent_r = 0.0, extent_t = 0.0;  // sizing inputs, for rebuild checks
  std::uint64_t id = 0;                   // identity for caching
  std::vector<double> om, kx, ky, kz;     // node coordinates (om = |k|)
  std::vector<double> w;                  // quadrature weight incl. 1/(2 omega) and (2pi)^-3
};

struct SphRep {
  std::shared_ptr<const SphNodes> nodes;
  int components = 1;
  std::vector<cplx> vals;  // comp-major, one entry per node
};

RectRep reduce_rect(const RealField4& field, double mass);

// rmax/tmax: bounds on |xvec| and |t| over the nonzero support of every field
// that will be reduced onto this node set (node density scales with them).
std::shared_ptr<const SphNodes> make_sph_nodes(const Grid& grid, double rmax,
                                               double tmax);
SphRep reduce_sph(const RealField4& field, std::shared_ptr<const SphNodes> nodes);

// Kernel-contracted shell sum  sum_k w_k integrand(A_k, B_k) [e^{-i k.a}].
// `a` (optional) inserts the translation phase e^{-i(omega a0 - kvec.avec)}.
// The parallel version sums fixed-size blocks in a fixed order, so the result
// is identical for any thread count; the serial version is the plain
// single-accumulator reference used by tests and the benchmark.
ShellValue contract(const Kernel& k, const RectRep& A, const RectRep& B,
                    const double* a = nullptr);
ShellValue contract(const Kernel& k, const SphRep& A, const SphRep& B,
                    const double* a = nullptr);
ShellValue contract_serial(const Kernel& k, const RectRep& A, const RectRep& B,
                           const double* a = nullptr);
ShellValue contract_serial(const Kernel& k, const SphRep& A, const SphRep& B,
                           const double* a = nullptr);

// Extent of the nonzero samples of a field: max |t| and max |xvec|.
void nonzero_extent(const RealField4& f, double& tmax, double& rmax);

}  // namespace nlqft
