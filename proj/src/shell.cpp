#include "nlqft/shell.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace nlqft {

extern std::mutex g_fftw_plan_mutex;
std::mutex g_fftw_plan_mutex;

// ---------------- rect path ----------------

RectRep reduce_rect(const RealField4& field, double mass) {
  const Grid& g = *field.grid;
  const GridSpec& s = g.spec;
  const std::size_t nsp = g.n_spatial();
  const int ns = s.n_s;

  RectRep R;
  R.grid = field.grid;
  R.mass = mass;
  R.components = field.components;
  R.omega.resize(nsp);
  R.keep.resize(nsp);
  R.vals.resize(std::size_t(field.components) * nsp);

  const double k0_nyquist = M_PI / s.dt;
  std::size_t kept = 0;
  {
    std::size_t p = 0;
    for (int ix = 0; ix < ns; ++ix)
      for (int iy = 0; iy < ns; ++iy)
        for (int iz = 0; iz < ns; ++iz, ++p) {
          double k2 = g.ks[ix] * g.ks[ix] + g.ks[iy] * g.ks[iy] +
                      g.ks[iz] * g.ks[iz];
          double om = std::sqrt(k2 + mass * mass);
          R.omega[p] = om;
          R.keep[p] = om <= k0_nyquist * (1.0 + 1e-12) ? 1 : 0;
          kept += R.keep[p];
        }
  }
  R.dropped = nsp - kept;
  if (kept == 0)
    throw std::runtime_error(
        "mass shell entirely outside the k0 band: grid too coarse for mass " +
        std::to_string(mass));

  // time-axis phase recurrence: e^{i omega t0} stepped by e^{i omega dt}
  std::vector<cplx> step(nsp), cur0(nsp);
  for (std::size_t p = 0; p < nsp; ++p) {
    step[p] = cplx(std::cos(R.omega[p] * s.dt), std::sin(R.omega[p] * s.dt));
    cur0[p] = cplx(std::cos(R.omega[p] * g.t[0]), std::sin(R.omega[p] * g.t[0]));
  }

  std::vector<cplx> buf(nsp);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    int dims[3] = {ns, ns, ns};
    plan = fftw_plan_dft(3, dims, reinterpret_cast<fftw_complex*>(buf.data()),
                         reinterpret_cast<fftw_complex*>(buf.data()),
                         FFTW_FORWARD, FFTW_ESTIMATE);
  }

  std::vector<cplx> cur(nsp), acc(nsp);
  for (int c = 0; c < field.components; ++c) {
    std::copy(cur0.begin(), cur0.end(), cur.begin());
    std::fill(acc.begin(), acc.end(), cplx(0.0));
    const double* src = field.comp(c);
    for (int it = 0; it < s.n_t; ++it) {
      const double* slice = src + std::size_t(it) * nsp;
      for (std::size_t p = 0; p < nsp; ++p) buf[p] = slice[p];
      fftw_execute(plan);
#pragma omp parallel for schedule(static)
      for (long long p = 0; p < (long long)nsp; ++p) {
        acc[p] += buf[p] * cur[p];
        cur[p] *= step[p];
      }
    }
    // spatial origin phase and integration measure
    cplx* dst = R.vals.data() + std::size_t(c) * nsp;
    double measure = g.cell_volume();
    std::size_t p = 0;
    for (int ix = 0; ix < ns; ++ix)
      for (int iy = 0; iy < ns; ++iy)
        for (int iz = 0; iz < ns; ++iz, ++p) {
          double ph = -(g.ks[ix] * s.origin[1] + g.ks[iy] * s.origin[2] +
                        g.ks[iz] * s.origin[3]);
          dst[p] = acc[p] * cplx(std::cos(ph), std::sin(ph)) * measure;
        }
  }
  {
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    fftw_destroy_plan(plan);
  }
  return R;
}

// ---------------- spherical path ----------------

static void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration from the Chebyshev-like initial guess
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      double dp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt_step = p0 / dp;
      t -= dt_step;
      if (std::abs(dt_step) < 1e-15) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

static std::atomic<std::uint64_t> g_sph_id{1};

std::shared_ptr<const SphNodes> make_sph_nodes(const Grid& grid, double rmax,
                                               double tmax) {
  const GridSpec& s = grid.spec;
  auto N = std::make_shared<SphNodes>();
  N->kmax = std::min(M_PI / s.dx, M_PI / s.dt);
  N->extent_r = rmax;
  N->extent_t = tmax;
  N->id = g_sph_id.fetch_add(1);

  double K = N->kmax * std::max(rmax, 1e-2);
  // density multiplier, mostly for convergence studies
  double dens = 1.0;
  if (const char* e = std::getenv("NLQFT_SPH_DENSITY")) dens = std::atof(e);
  if (!(dens >= 1.0)) dens = 1.0;
  // angular node counts track the oscillation capacity k*r of the transform;
  // radial panels track the conjugate extent of the support in t and |x|
  int nth = int(std::ceil(1.7 * K * dens)) + 12;
  int nph = int(std::ceil(1.9 * K * dens)) + 12;
  int npan = std::max(
      6, int(std::ceil(dens * N->kmax * (tmax + rmax) / (2.0 * M_PI))) + 2);
  const int nr = 10;

  std::vector<double> gx, gw, cx, cw;
  gauss_legendre(nr, gx, gw);
  gauss_legendre(nth, cx, cw);

  std::size_t total = std::size_t(npan) * nr * nth * nph;
  N->om.reserve(total);
  N->kx.reserve(total);
  N->ky.reserve(total);
  N->kz.reserve(total);
  N->w.reserve(total);

  const double wphi = 2.0 * M_PI / nph;
  const double norm = 1.0 / std::pow(2.0 * M_PI, 3);
  for (int pan = 0; pan < npan; ++pan) {
    double a = N->kmax * pan / npan, b = N->kmax * (pan + 1) / npan;
    for (int ir = 0; ir < nr; ++ir) {
      double r = 0.5 * (b - a) * gx[ir] + 0.5 * (a + b);
      double wr = 0.5 * (b - a) * gw[ir];
      for (int ith = 0; ith < nth; ++ith) {
        double ct = cx[ith], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int iph = 0; iph < nph; ++iph) {
          double phi = wphi * iph;
          N->om.push_back(r);
          N->kx.push_back(r * st * std::cos(phi));
          N->ky.push_back(r * st * std::sin(phi));
          N->kz.push_back(r * ct);
          // r^2 dr dcos dphi / (2pi)^3, with the 1/(2 omega) = 1/(2r) folded in
          N->w.push_back(0.5 * r * wr * cw[ith] * wphi * norm);
        }
      }
    }
  }
  return N;
}

void nonzero_extent(const RealField4& f, double& tmax, double& rmax) {
  const Grid& g = *f.grid;
  const GridSpec& s = g.spec;
  tmax = 0.0;
  rmax = 0.0;
  for (int it = 0; it < s.n_t; ++it)
    for (int ix = 0; ix < s.n_s; ++ix)
      for (int iy = 0; iy < s.n_s; ++iy)
        for (int iz = 0; iz < s.n_s; ++iz) {
          std::size_t p = g.idx(it, ix, iy, iz);
          bool nz = false;
          for (int c = 0; c < f.components && !nz; ++c)
            nz = f.comp(c)[p] != 0.0;
          if (!nz) continue;
          tmax = std::max(tmax, std::abs(g.t[it]));
          double r2 = g.x[0][ix] * g.x[0][ix] + g.x[1][iy] * g.x[1][iy] +
                      g.x[2][iz] * g.x[2][iz];
          rmax = std::max(rmax, std::sqrt(r2));
        }
}

SphRep reduce_sph(const RealField4& field, std::shared_ptr<const SphNodes> nodes) {
  const Grid& g = *field.grid;
  const GridSpec& s = g.spec;

  // pack the nonzero sites (any component)
  std::vector<double> ts, xs, ys, zs;
  std::vector<std::vector<double>> fv(field.components);
  for (int it = 0; it < s.n_t; ++it)
    for (int ix = 0; ix < s.n_s; ++ix)
      for (int iy = 0; iy < s.n_s; ++iy)
        for (int iz = 0; iz < s.n_s; ++iz) {
          std::size_t p = g.idx(it, ix, iy, iz);
          bool nz = false;
          for (int c = 0; c < field.components && !nz; ++c)
            nz = field.comp(c)[p] != 0.0;
          if (!nz) continue;
          ts.push_back(g.t[it]);
          xs.push_back(g.x[0][ix]);
          ys.push_back(g.x[1][iy]);
          zs.push_back(g.x[2][iz]);
          for (int c = 0; c < field.components; ++c)
            fv[c].push_back(field.comp(c)[p]);
        }

  SphRep R;
  R.nodes = nodes;
  R.components = field.components;
  const std::size_t nn = nodes->om.size();
  const std::size_t nsite = ts.size();
  R.vals.assign(std::size_t(field.components) * nn, cplx(0.0));
  const double measure = g.cell_volume();

  // f~(k) = sum_x f(x) e^{+i(omega t - kvec.xvec)} dt dx^3 at each node
#pragma omp parallel for schedule(static)
  for (long long n = 0; n < (long long)nn; ++n) {
    const double om = nodes->om[n], kx = nodes->kx[n], ky = nodes->ky[n],
                 kz = nodes->kz[n];
    double acc_re[6] = {0, 0, 0, 0, 0, 0};
    double acc_im[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < nsite; ++i) {
      double ph = om * ts[i] - kx * xs[i] - ky * ys[i] - kz * zs[i];
      double cph = std::cos(ph), sph = std::sin(ph);
      for (int c = 0; c < field.components; ++c) {
        double v = fv[c][i];
        acc_re[c] += v * cph;
        acc_im[c] += v * sph;
      }
    }
    for (int c = 0; c < field.components; ++c)
      R.vals[std::size_t(c) * nn + n] = measure * cplx(acc_re[c], acc_im[c]);
  }
  return R;
}

// ---------------- kernel integrands ----------------

namespace {

inline cplx node_integrand(const Kernel& k, const cplx* const* A,
                           const cplx* const* B, std::size_t i, double om,
                           double kx, double ky, double kz) {
  switch (k.kind) {
    case Kernel::ScalarMass:
      return std::conj(A[0][i]) * B[0][i];
    case Kernel::Vector: {
      // sigma_T conj(k.J1) (k.J2) - sigma_S m^2 eta(conj J1, J2)
      cplx kda = om * A[0][i] - kx * A[1][i] - ky * A[2][i] - kz * A[3][i];
      cplx kdb = om * B[0][i] - kx * B[1][i] - ky * B[2][i] - kz * B[3][i];
      cplx etab = std::conj(A[0][i]) * B[0][i] - std::conj(A[1][i]) * B[1][i] -
                  std::conj(A[2][i]) * B[2][i] - std::conj(A[3][i]) * B[3][i];
      return k.sigma_t * std::conj(kda) * kdb - k.sigma_s * k.m * k.m * etab;
    }
    case Kernel::EMTensor: {
      // w^beta = k_mu F^{mu beta}, F stored as (01,02,03,12,13,23);
      // integrand -eta(conj w1, w2) = conj(wvec1).wvec2 - conj(w1^0) w2^0,
      // positive semi-definite on the massless shell (k.w = 0).
      auto wcomp = [&](const cplx* const* F, int beta, std::size_t p) -> cplx {
        switch (beta) {
          case 0: return kx * F[0][p] + ky * F[1][p] + kz * F[2][p];
          case 1: return om * F[0][p] + ky * F[3][p] + kz * F[4][p];
          case 2: return om * F[1][p] - kx * F[3][p] + kz * F[5][p];
          default: return om * F[2][p] - kx * F[4][p] - ky * F[5][p];
        }
      };
      cplx acc = -std::conj(wcomp(A, 0, i)) * wcomp(B, 0, i);
      for (int b = 1; b < 4; ++b)
        acc += std::conj(wcomp(A, b, i)) * wcomp(B, b, i);
      return acc;
    }
  }
  return cplx(0.0);
}

void check_kernel_rank(const Kernel& k, int comps) {
  int need = component_count(kernel_rank(k));
  if (comps != need)
    throw std::invalid_argument("kernel/field rank mismatch");
}

}  // namespace

// ---------------- contractions ----------------

static constexpr std::size_t kBlock = 8192;

ShellValue contract(const Kernel& k, const RectRep& A, const RectRep& B,
                    const double* a) {
  if (A.grid.get() != B.grid.get()) throw std::invalid_argument("grid mismatch");
  if (A.mass != B.mass) throw std::invalid_argument("shell mass mismatch");
  check_kernel_rank(k, A.components);
  check_kernel_rank(k, B.components);
  const Grid& g = *A.grid;
  const GridSpec& s = g.spec;
  const std::size_t nsp = g.n_spatial();
  const int ns = s.n_s;
  const double wk0 = 1.0 / std::pow(ns * s.dx, 3);

  const cplx* Ac[6];
  const cplx* Bc[6];
  for (int c = 0; c < A.components; ++c) {
    Ac[c] = A.vals.data() + std::size_t(c) * nsp;
    Bc[c] = B.vals.data() + std::size_t(c) * nsp;
  }

  const std::size_t nblocks = (nsp + kBlock - 1) / kBlock;
  std::vector<cplx> partial(nblocks, cplx(0.0));
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < (long long)nblocks; ++b) {
    cplx local(0.0);
    std::size_t lo = std::size_t(b) * kBlock;
    std::size_t hi = std::min(nsp, lo + kBlock);
    for (std::size_t p = lo; p < hi; ++p) {
      if (!A.keep[p]) continue;
      std::size_t iz = p % ns, iy = (p / ns) % ns, ix = p / (std::size_t(ns) * ns);
      double kx = g.ks[ix], ky = g.ks[iy], kz = g.ks[iz];
      double om = A.omega[p];
      cplx v = node_integrand(k, Ac, Bc, p, om, kx, ky, kz) * (wk0 / (2.0 * om));
      if (a) {
        double ph = -(om * a[0] - kx * a[1] - ky * a[2] - kz * a[3]);
        v *= cplx(std::cos(ph), std::sin(ph));
      }
      local += v;
    }
    partial[b] = local;
  }
  ShellValue out;
  for (std::size_t b = 0; b < nblocks; ++b) out.value += partial[b];
  out.shell_samples = nsp - A.dropped;
  out.dropped = A.dropped;
  return out;
}

ShellValue contract_serial(const Kernel& k, const RectRep& A, const RectRep& B,
                           const double* a) {
  if (A.grid.get() != B.grid.get()) throw std::invalid_argument("grid mismatch");
  if (A.mass != B.mass) throw std::invalid_argument("shell mass mismatch");
  check_kernel_rank(k, A.components);
  const Grid& g = *A.grid;
  const GridSpec& s = g.spec;
  const std::size_t nsp = g.n_spatial();
  const int ns = s.n_s;
  const double wk0 = 1.0 / std::pow(ns * s.dx, 3);
  const cplx* Ac[6];
  const cplx* Bc[6];
  for (int c = 0; c < A.components; ++c) {
    Ac[c] = A.vals.data() + std::size_t(c) * nsp;
    Bc[c] = B.vals.data() + std::size_t(c) * nsp;
  }
  ShellValue out;
  for (std::size_t p = 0; p < nsp; ++p) {
    if (!A.keep[p]) continue;
    std::size_t iz = p % ns, iy = (p / ns) % ns, ix = p / (std::size_t(ns) * ns);
    double kx = g.ks[ix], ky = g.ks[iy], kz = g.ks[iz];
    double om = A.omega[p];
    cplx v = node_integrand(k, Ac, Bc, p, om, kx, ky, kz) * (wk0 / (2.0 * om));
    if (a) {
      double ph = -(om * a[0] - kx * a[1] - ky * a[2] - kz * a[3]);
      v *= cplx(std::cos(ph), std::sin(ph));
    }
    out.value += v;
  }
  out.shell_samples = nsp - A.dropped;
  out.dropped = A.dropped;
  return out;
}

ShellValue contract(const Kernel& k, const SphRep& A, const SphRep& B,
                    const double* a) {
  if (A.nodes->id != B.nodes->id)
    throw std::invalid_argument("spherical node-set mismatch");
  check_kernel_rank(k, A.components);
  check_kernel_rank(k, B.components);
  const SphNodes& N = *A.nodes;
  const std::size_t nn = N.om.size();
  const cplx* Ac[6];
  const cplx* Bc[6];
  for (int c = 0; c < A.components; ++c) {
    Ac[c] = A.vals.data() + std::size_t(c) * nn;
    Bc[c] = B.vals.data() + std::size_t(c) * nn;
  }
  const std::size_t nblocks = (nn + kBlock - 1) / kBlock;
  std::vector<cplx> partial(nblocks, cplx(0.0));
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < (long long)nblocks; ++b) {
    cplx local(0.0);
    std::size_t lo = std::size_t(b) * kBlock;
    std::size_t hi = std::min(nn, lo + kBlock);
    for (std::size_t p = lo; p < hi; ++p) {
      cplx v = node_integrand(k, Ac, Bc, p, N.om[p], N.kx[p], N.ky[p], N.kz[p]) *
               N.w[p];
      if (a) {
        double ph = -(N.om[p] * a[0] - N.kx[p] * a[1] - N.ky[p] * a[2] -
                      N.kz[p] * a[3]);
        v *= cplx(std::cos(ph), std::sin(ph));
      }
      local += v;
    }
    partial[b] = local;
  }
  ShellValue out;
  for (std::size_t b = 0; b < nblocks; ++b) out.value += partial[b];
  out.shell_samples = nn;
  return out;
}

ShellValue contract_serial(const Kernel& k, const SphRep& A, const SphRep& B,
                           const double* a) {
  if (A.nodes->id != B.nodes->id)
    throw std::invalid_argument("spherical node-set mismatch");
  check_kernel_rank(k, A.components);
  const SphNodes& N = *A.nodes;
  const std::size_t nn = N.om.size();
  const cplx* Ac[6];
  const cplx* Bc[6];
  for (int c = 0; c < A.components; ++c) {
    Ac[c] = A.vals.data() + std::size_t(c) * nn;
    Bc[c] = B.vals.data() + std::size_t(c) * nn;
  }
  ShellValue out;
  for (std::size_t p = 0; p < nn; ++p) {
    cplx v = node_integrand(k, Ac, Bc, p, N.om[p], N.kx[p], N.ky[p], N.kz[p]) *
             N.w[p];
    if (a) {
      double ph = -(N.om[p] * a[0] - N.kx[p] * a[1] - N.ky[p] * a[2] -
                    N.kz[p] * a[3]);
      v *= cplx(std::cos(ph), std::sin(ph));
    }
    out.value += v;
  }
  out.shell_samples = nn;
  return out;
}

}  // namespace nlqft
