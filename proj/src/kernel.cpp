#include "nlqft/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nlqft/shell.hpp"

namespace nlqft {

Kernel make_scalar_kernel(double m) {
  if (!(m >= 0.0) || !std::isfinite(m))
    throw std::invalid_argument("scalar kernel mass must be finite and >= 0");
  Kernel k;
  k.kind = Kernel::ScalarMass;
  k.m = m;
  k.label = kernel_key(k);
  return k;
}

Kernel make_vector_kernel(double m, double sigma_t, double sigma_s) {
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("vector kernel mass must be finite and > 0");
  if (!(sigma_t >= sigma_s && sigma_s >= 0.0))
    throw std::invalid_argument("vector kernel needs sigma_t >= sigma_s >= 0");
  Kernel k;
  k.kind = Kernel::Vector;
  k.m = m;
  k.sigma_t = sigma_t;
  k.sigma_s = sigma_s;
  k.label = kernel_key(k);
  return k;
}

Kernel make_em_kernel() {
  Kernel k;
  k.kind = Kernel::EMTensor;
  k.m = 0.0;
  k.label = kernel_key(k);
  return k;
}

Rank kernel_rank(const Kernel& k) {
  switch (k.kind) {
    case Kernel::ScalarMass: return Rank::Scalar;
    case Kernel::Vector: return Rank::Vector;
    case Kernel::EMTensor: return Rank::Antisym2;
  }
  return Rank::Scalar;
}

std::string kernel_key(const Kernel& k) {
  char buf[128];
  switch (k.kind) {
    case Kernel::ScalarMass:
      std::snprintf(buf, sizeof buf, "scalar(m=%.17g)", k.m);
      break;
    case Kernel::Vector:
      std::snprintf(buf, sizeof buf, "vector(m=%.17g,sigma_t=%.17g,sigma_s=%.17g)",
                    k.m, k.sigma_t, k.sigma_s);
      break;
    case Kernel::EMTensor:
      std::snprintf(buf, sizeof buf, "em");
      break;
  }
  return buf;
}

namespace {

// Direct (uncached) evaluation path: bring the spectral fields back to
// position space, reduce onto the requested shell, contract.
ShellValue direct_pair(const Kernel& k, const SpectralField4& a,
                       const SpectralField4& b) {
  if (a.grid.get() != b.grid.get())
    throw std::invalid_argument("grid mismatch");
  if (a.components != component_count(kernel_rank(k)) ||
      b.components != a.components)
    throw std::invalid_argument("kernel/field rank mismatch");
  RealField4 fa = ifft4(a);
  RealField4 fb = ifft4(b);
  if (k.kind != Kernel::EMTensor && k.m > 0.0) {
    RectRep ra = reduce_rect(fa, k.m);
    RectRep rb = reduce_rect(fb, k.m);
    return contract(k, ra, rb);
  }
  // massless shell: spherical quadrature sized by the union support
  double ta, raa, tb, rbb;
  nonzero_extent(fa, ta, raa);
  nonzero_extent(fb, tb, rbb);
  auto nodes = make_sph_nodes(*a.grid, std::max(raa, rbb), std::max(ta, tb));
  SphRep sa = reduce_sph(fa, nodes);
  SphRep sb = reduce_sph(fb, nodes);
  return contract(k, sa, sb);
}

}  // namespace

ShellValue scalar_shell_ip(const SpectralField4& f, const SpectralField4& g,
                           double m) {
  return direct_pair(make_scalar_kernel(m), f, g);
}

ShellValue vector_shell_ip(const SpectralField4& j1, const SpectralField4& j2,
                           double m, double sigma_t, double sigma_s) {
  return direct_pair(make_vector_kernel(m, sigma_t, sigma_s), j1, j2);
}

ShellValue em_shell_ip(const SpectralField4& f1, const SpectralField4& f2) {
  return direct_pair(make_em_kernel(), f1, f2);
}

}  // namespace nlqft
