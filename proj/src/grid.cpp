#include "nlqft/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>

namespace nlqft {

std::size_t memory_cap_bytes() {
  if (const char* s = std::getenv("NLQFT_MEM_CAP_BYTES")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && v > 0) return std::size_t(v);
  }
  return std::size_t(4) << 30;  // 4 GiB default
}

void validate(const GridSpec& spec) {
  if (spec.n_t < 8 || spec.n_s < 8)
    throw std::invalid_argument("grid size below minimum (8)");
  if (spec.n_t % 2 != 0 || spec.n_s % 2 != 0)
    throw std::invalid_argument("odd grid size");
  if (!(spec.dt > 0.0) || !(spec.dx > 0.0))
    throw std::invalid_argument("nonpositive grid spacing");
  std::size_t sites = std::size_t(spec.n_t) * spec.n_s * spec.n_s * spec.n_s;
  if (sites * sizeof(cplx) > memory_cap_bytes())
    throw std::invalid_argument("grid exceeds memory cap");
}

static std::vector<double> dft_freqs(int n, double d) {
  // 2*pi * fftfreq(n, d): index j -> j/(n d) for j < n/2, (j-n)/(n d) otherwise
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) {
    int jj = (j < (n + 1) / 2) ? j : j - n;
    out[j] = 2.0 * M_PI * jj / (n * d);
  }
  return out;
}

std::shared_ptr<const Grid> make_grid(const GridSpec& spec) {
  validate(spec);
  auto g = std::make_shared<Grid>();
  g->spec = spec;
  g->t.resize(spec.n_t);
  for (int i = 0; i < spec.n_t; ++i) g->t[i] = spec.origin[0] + spec.dt * i;
  for (int a = 0; a < 3; ++a) {
    g->x[a].resize(spec.n_s);
    for (int i = 0; i < spec.n_s; ++i)
      g->x[a][i] = spec.origin[a + 1] + spec.dx * i;
  }
  g->k0 = dft_freqs(spec.n_t, spec.dt);
  g->ks = dft_freqs(spec.n_s, spec.dx);
  return g;
}

Rank rank_from_components(int c) {
  switch (c) {
    case 1: return Rank::Scalar;
    case 4: return Rank::Vector;
    case 6: return Rank::Antisym2;
  }
  throw std::invalid_argument("bad component count");
}

RealField4 make_real_field(std::shared_ptr<const Grid> grid, int components) {
  RealField4 f;
  f.grid = std::move(grid);
  f.components = components;
  f.data.assign(std::size_t(components) * f.grid->n_sites(), 0.0);
  return f;
}

// FFTW planner is not thread-safe; serialize plan creation.
static std::mutex g_fftw_mutex;

static void run_c2c_4d(std::vector<cplx>& buf, const GridSpec& s, int sign) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    int dims[4] = {s.n_t, s.n_s, s.n_s, s.n_s};
    plan = fftw_plan_dft(4, dims, reinterpret_cast<fftw_complex*>(buf.data()),
                         reinterpret_cast<fftw_complex*>(buf.data()), sign,
                         FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    fftw_destroy_plan(plan);
  }
}

SpectralField4 fft4(const RealField4& field) {
  const Grid& g = *field.grid;
  const GridSpec& s = g.spec;
  SpectralField4 out;
  out.grid = field.grid;
  out.components = field.components;
  out.data.resize(field.data.size());

  std::size_t vol = g.n_sites();
  std::size_t nsp = g.n_spatial();
  std::vector<cplx> buf(vol);
  double measure = g.cell_volume();

  for (int c = 0; c < field.components; ++c) {
    const double* src = field.comp(c);
    for (std::size_t i = 0; i < vol; ++i) buf[i] = src[i];
    // FFTW forward gives e^{-i k.x_rel} on every axis.
    run_c2c_4d(buf, s, FFTW_FORWARD);
    cplx* dst = out.comp(c);
    // Flip the time-frequency index (j -> (n_t - j) % n_t) so the time axis
    // carries e^{+i k0 t}, then restore the absolute-coordinate phase.
    for (int j = 0; j < s.n_t; ++j) {
      int jsrc = (s.n_t - j) % s.n_t;
      const cplx* row = buf.data() + std::size_t(jsrc) * nsp;
      cplx* orow = dst + std::size_t(j) * nsp;
      for (std::size_t p = 0; p < nsp; ++p) orow[p] = row[p];
    }
    for (int j = 0; j < s.n_t; ++j) {
      cplx* orow = dst + std::size_t(j) * nsp;
      std::size_t p = 0;
      for (int ix = 0; ix < s.n_s; ++ix)
        for (int iy = 0; iy < s.n_s; ++iy)
          for (int iz = 0; iz < s.n_s; ++iz, ++p) {
            double phase = g.k0[j] * s.origin[0] - g.ks[ix] * s.origin[1] -
                           g.ks[iy] * s.origin[2] - g.ks[iz] * s.origin[3];
            orow[p] *= measure * cplx(std::cos(phase), std::sin(phase));
          }
    }
  }
  return out;
}

RealField4 ifft4(const SpectralField4& field) {
  const Grid& g = *field.grid;
  const GridSpec& s = g.spec;
  RealField4 out;
  out.grid = field.grid;
  out.components = field.components;
  out.data.resize(field.data.size());

  std::size_t vol = g.n_sites();
  std::size_t nsp = g.n_spatial();
  std::vector<cplx> buf(vol);
  double inv_norm = 1.0 / (double(vol) * g.cell_volume());

  for (int c = 0; c < field.components; ++c) {
    const cplx* src = field.comp(c);
    // Undo phase/measure, undo time-index flip, then backward transform.
    for (int j = 0; j < s.n_t; ++j) {
      int jdst = (s.n_t - j) % s.n_t;
      const cplx* row = src + std::size_t(j) * nsp;
      cplx* brow = buf.data() + std::size_t(jdst) * nsp;
      std::size_t p = 0;
      for (int ix = 0; ix < s.n_s; ++ix)
        for (int iy = 0; iy < s.n_s; ++iy)
          for (int iz = 0; iz < s.n_s; ++iz, ++p) {
            double phase = g.k0[j] * s.origin[0] - g.ks[ix] * s.origin[1] -
                           g.ks[iy] * s.origin[2] - g.ks[iz] * s.origin[3];
            brow[p] = row[p] * cplx(std::cos(phase), -std::sin(phase));
          }
    }
    run_c2c_4d(buf, s, FFTW_BACKWARD);
    double* dst = out.comp(c);
    for (std::size_t i = 0; i < vol; ++i) dst[i] = buf[i].real() * inv_norm;
  }
  return out;
}

RealField4 gradient4(const RealField4& field, int mu) {
  if (mu < 0 || mu > 3) throw std::invalid_argument("invalid axis index");
  const Grid& g = *field.grid;
  const GridSpec& s = g.spec;
  RealField4 out;
  out.grid = field.grid;
  out.components = field.components;
  out.data.resize(field.data.size());

  int n[4] = {s.n_t, s.n_s, s.n_s, s.n_s};
  double inv2d = 1.0 / (2.0 * (mu == 0 ? s.dt : s.dx));
  std::size_t stride[4];
  stride[3] = 1;
  stride[2] = std::size_t(s.n_s);
  stride[1] = stride[2] * s.n_s;
  stride[0] = stride[1] * s.n_s;

  for (int c = 0; c < field.components; ++c) {
    const double* src = field.comp(c);
    double* dst = out.comp(c);
#pragma omp parallel for schedule(static)
    for (int it = 0; it < n[0]; ++it)
      for (int ix = 0; ix < n[1]; ++ix)
        for (int iy = 0; iy < n[2]; ++iy)
          for (int iz = 0; iz < n[3]; ++iz) {
            int i4[4] = {it, ix, iy, iz};
            std::size_t base = g.idx(it, ix, iy, iz);
            int up = (i4[mu] + 1) % n[mu];
            int dn = (i4[mu] - 1 + n[mu]) % n[mu];
            std::size_t iu = base + (up - i4[mu]) * stride[mu];
            std::size_t id = base + (dn - i4[mu]) * stride[mu];
            dst[base] = (src[iu] - src[id]) * inv2d;
          }
  }
  return out;
}

double boundary_leakage(const RealField4& field) {
  const Grid& g = *field.grid;
  const GridSpec& s = g.spec;
  double fmax = 0.0, bmax = 0.0;
  for (int c = 0; c < field.components; ++c) {
    const double* src = field.comp(c);
    for (int it = 0; it < s.n_t; ++it)
      for (int ix = 0; ix < s.n_s; ++ix)
        for (int iy = 0; iy < s.n_s; ++iy)
          for (int iz = 0; iz < s.n_s; ++iz) {
            double v = std::abs(src[g.idx(it, ix, iy, iz)]);
            if (v > fmax) fmax = v;
            bool face = it == 0 || it == s.n_t - 1 || ix == 0 ||
                        ix == s.n_s - 1 || iy == 0 || iy == s.n_s - 1 ||
                        iz == 0 || iz == s.n_s - 1;
            if (face && v > bmax) bmax = v;
          }
  }
  return fmax > 0.0 ? bmax / fmax : 0.0;
}

}  // namespace nlqft
