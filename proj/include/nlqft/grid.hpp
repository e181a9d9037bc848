#pragma once
// 4D spacetime/momentum lattice: sampling substrate, FFTs, finite differences.
#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace nlqft {

using cplx = std::complex<double>;

// Fixed conventions used everywhere; every output file cites this string.
inline constexpr const char* kConventions =
    "signature (+,-,-,-); k.x = k0*t - kvec.xvec; FT f~(k) = int d4x e^{+i k.x} f(x); "
    "eps^{0123} = +1; hbar = 1";

struct GridSpec {
  int n_t = 16;                    // points along time axis (even, >= 8)
  int n_s = 16;                    // points along each spatial axis (even, >= 8)
  double dt = 0.5;                 // time spacing
  double dx = 0.5;                 // spatial spacing
  std::array<double, 4> origin{};  // coordinates of grid corner (t, x, y, z)
};

// Memory cap for a single complex field, configurable via NLQFT_MEM_CAP_BYTES.
std::size_t memory_cap_bytes();

// Throws std::invalid_argument on bad sizes/spacings/cap violation.
void validate(const GridSpec& spec);

struct Grid {
  GridSpec spec;
  std::vector<double> t;        // n_t time coordinates
  std::array<std::vector<double>, 3> x;  // spatial coordinates per axis
  std::vector<double> k0;       // DFT frequencies along time, 2*pi*fftfreq(n_t, dt)
  std::vector<double> ks;       // DFT frequencies along each spatial axis

  std::size_t n_sites() const {
    return std::size_t(spec.n_t) * spec.n_s * spec.n_s * spec.n_s;
  }
  std::size_t n_spatial() const {
    return std::size_t(spec.n_s) * spec.n_s * spec.n_s;
  }
  // site index, t-major then x,y,z
  std::size_t idx(int it, int ix, int iy, int iz) const {
    return ((std::size_t(it) * spec.n_s + ix) * spec.n_s + iy) * spec.n_s + iz;
  }
  double cell_volume() const { return spec.dt * spec.dx * spec.dx * spec.dx; }
  double coord(int axis, int i) const {
    return axis == 0 ? t[i] : x[axis - 1][i];
  }
};

std::shared_ptr<const Grid> make_grid(const GridSpec& spec);

// Tensor ranks carried by fields: 1, 4, or 6 (antisymmetric pairs 01,02,03,12,13,23).
enum class Rank { Scalar = 1, Vector = 4, Antisym2 = 6 };
inline int component_count(Rank r) { return static_cast<int>(r); }
Rank rank_from_components(int c);

struct RealField4 {
  std::shared_ptr<const Grid> grid;
  int components = 1;
  std::vector<double> data;  // component-major: data[c*n_sites + site]

  double* comp(int c) { return data.data() + std::size_t(c) * grid->n_sites(); }
  const double* comp(int c) const {
    return data.data() + std::size_t(c) * grid->n_sites();
  }
};

struct SpectralField4 {
  std::shared_ptr<const Grid> grid;
  int components = 1;
  std::vector<cplx> data;  // same layout, momentum-space samples
  const char* convention = kConventions;

  cplx* comp(int c) { return data.data() + std::size_t(c) * grid->n_sites(); }
  const cplx* comp(int c) const {
    return data.data() + std::size_t(c) * grid->n_sites();
  }
};

RealField4 make_real_field(std::shared_ptr<const Grid> grid, int components);

// f~(k) = sum_x e^{+i(k0 t - kvec.xvec)} f(x) * dt*dx^3, absolute coordinates.
SpectralField4 fft4(const RealField4& field);
// Inverse of fft4; round-trips to ~1e-15.
RealField4 ifft4(const SpectralField4& field);

// Centered second-order periodic finite difference along axis mu (0..3),
// applied to every component.
RealField4 gradient4(const RealField4& field, int mu);

// max |f| over the six box faces divided by max |f| overall (0 if field is 0).
double boundary_leakage(const RealField4& field);

}  // namespace nlqft
