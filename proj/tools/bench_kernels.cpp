// Times the parallel shell contraction against the plain serial reference
// and checks they agree to round-off.
#include <chrono>
#include <cstdio>
#include <cstring>

#include "nlqft/algebra.hpp"
#include "nlqft/shell.hpp"

using namespace nlqft;
using clk = std::chrono::steady_clock;

static double secs(clk::time_point a, clk::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

int main(int argc, char** argv) {
  int n = 32;
  int reps = 5;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--n") && i + 1 < argc) n = std::atoi(argv[++i]);
    if (!std::strcmp(argv[i], "--reps") && i + 1 < argc)
      reps = std::atoi(argv[++i]);
  }
  GridSpec spec;
  spec.n_t = n;
  spec.n_s = n;
  spec.dt = 0.25;
  spec.dx = 0.25;
  double L = n * 0.25;
  spec.origin = {-L / 2, -L / 2, -L / 2, -L / 2};
  auto grid = make_grid(spec);

  TestFunction f = gaussian_packet({0.3, -0.2, 0.1, 0.0}, 0.8, {1.0, 0.4, 0, 0});
  TestFunction g = gaussian_packet({-0.4, 0.3, -0.1, 0.2}, 0.9, {0.8, 0, 0.3, 0});
  Kernel K = make_scalar_kernel(1.0);

  auto t0 = clk::now();
  RectRep rf = reduce_rect(sample(f, grid), K.m);
  RectRep rg = reduce_rect(sample(g, grid), K.m);
  auto t1 = clk::now();
  std::size_t kept = rf.keep.size() - rf.dropped;
  std::printf("grid %d^4, shell nodes kept %zu (dropped %zu), reduce %.3fs\n", n,
              kept, rf.dropped, secs(t0, t1));

  cplx vp{}, vs{};
  t0 = clk::now();
  for (int r = 0; r < reps; ++r) vp = contract(K, rf, rg).value;
  t1 = clk::now();
  double tp = secs(t0, t1) / reps;
  auto t2 = clk::now();
  for (int r = 0; r < reps; ++r) vs = contract_serial(K, rf, rg).value;
  auto t3 = clk::now();
  double ts = secs(t2, t3) / reps;

  std::printf("parallel contract: %.4fs/it  value (% .12e, % .12e)\n", tp,
              vp.real(), vp.imag());
  std::printf("serial contract:   %.4fs/it  value (% .12e, % .12e)\n", ts,
              vs.real(), vs.imag());
  std::printf("speedup %.2fx, |diff| %.3e\n", ts / tp, std::abs(vp - vs));
  return std::abs(vp - vs) <= 1e-12 * std::abs(vp) ? 0 : 1;
}
