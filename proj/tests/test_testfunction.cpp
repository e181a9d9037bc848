#include <doctest.h>

#include <cmath>

#include "nlqft/testfunction.hpp"

using namespace nlqft;

TEST_CASE("gaussian packet pointwise values") {
  TestFunction f = gaussian_packet({0.5, -0.3, 0.2, 0.0}, 0.8, {1.0, 0.5, 0, 0});
  // at the center the modulation phase is zero -> amplitude itself
  CHECK(value_at(f, {0.5, -0.3, 0.2, 0.0}, 0) == doctest::Approx(1.0));
  TestFunction g = scale(f, 2.5);
  std::array<double, 4> x = {0.9, 0.1, -0.2, 0.3};
  CHECK(value_at(g, x, 0) == doctest::Approx(2.5 * value_at(f, x, 0)));
  TestFunction s = sum(f, g);
  CHECK(value_at(s, x, 0) == doctest::Approx(3.5 * value_at(f, x, 0)));
}

TEST_CASE("bump has compact support and smooth interior") {
  TestFunction b = bump({0, 0, 0, 0}, 1.5);
  CHECK(value_at(b, {0, 0, 0, 0}, 0) > 0.0);
  CHECK(value_at(b, {1.51, 0, 0, 0}, 0) == 0.0);
  CHECK(value_at(b, {0, 1.0, 1.0, 0.5}, 0) == 0.0);  // |x| = 1.5 boundary
  Support s = support_of(b);
  CHECK(s.bounded);
  CHECK(s.radius == doctest::Approx(1.5));
  Support sg = support_of(gaussian_packet({0, 0, 0, 0}, 1.0, {0, 0, 0, 0}));
  CHECK_FALSE(sg.bounded);
}

TEST_CASE("vector/antisym2 profiles select components") {
  TestFunction v = bump({0, 0, 0, 0}, 1.0, Rank::Vector, {{2, 0, -1, 0.5, 0, 0}});
  double base = value_at(v, {0.1, 0.1, 0, 0}, 0) / 2.0;
  CHECK(value_at(v, {0.1, 0.1, 0, 0}, 1) == doctest::Approx(0.0));
  CHECK(value_at(v, {0.1, 0.1, 0, 0}, 2) == doctest::Approx(-base));
  CHECK(value_at(v, {0.1, 0.1, 0, 0}, 3) == doctest::Approx(0.5 * base));
}

TEST_CASE("translate shifts analytically: f_a(x) = f(x + a)") {
  TestFunction f = gaussian_packet({0.2, 0.1, 0, -0.3}, 0.7, {0.8, -0.4, 0.2, 0});
  std::array<double, 4> a = {0.3, -0.2, 0.5, 0.1};
  TestFunction fa = translate(f, a);
  for (double t : {-0.5, 0.0, 0.7})
    for (double x : {-0.4, 0.3}) {
      std::array<double, 4> p = {t, x, 0.1, -0.2};
      std::array<double, 4> q = {t + a[0], x + a[1], 0.1 + a[2], -0.2 + a[3]};
      CHECK(value_at(fa, p, 0) == doctest::Approx(value_at(f, q, 0)).epsilon(1e-12));
    }
  // bump support center shifts by -a
  TestFunction b = translate(bump({1, 0, 0, 0}, 0.5), a);
  Support s = support_of(b);
  CHECK(s.center[0] == doctest::Approx(1 - a[0]));
  CHECK(s.center[2] == doctest::Approx(-a[2]));
}

TEST_CASE("closed-form transform matches the grid transform") {
  GridSpec gs;
  gs.n_t = gs.n_s = 16;
  gs.dt = gs.dx = 0.5;
  gs.origin = {-4, -4, -4, -4};
  auto grid = make_grid(gs);
  TestFunction f = gaussian_packet({0.1, -0.2, 0.3, 0}, 0.8, {0.6, 0.4, 0, -0.3});
  CHECK(has_closed_ft(f));
  CHECK_FALSE(has_closed_ft(bump({0, 0, 0, 0}, 1.0)));
  CHECK(has_closed_ft(sum(f, scale(f, 2.0))));
  CHECK_THROWS(closed_ft(bump({0, 0, 0, 0}, 1.0), {0, 0, 0, 0}, 0));

  SpectralField4 sf = fft4(sample(f, grid));
  double ref = std::abs(closed_ft(f, {0, 0, 0, 0}, 0));
  double worst = 0;
  for (int a : {0, 1, 15})
    for (int b : {0, 2, 14}) {
      std::array<double, 4> k = {grid->k0[a], grid->ks[b], 0, 0};
      cplx want = closed_ft(f, k, 0);
      cplx got = sf.data[grid->idx(a, b, 0, 0)];
      worst = std::max(worst, std::abs(got - want) / ref);
    }
  CHECK(worst < 1e-3);  // discretization + box truncation on a 16^4 grid
}

TEST_CASE("causal classification of bounded supports") {
  TestFunction a = bump({0, -2.5, 0, 0}, 1.0);
  TestFunction b = bump({0, 2.5, 0, 0}, 1.0);
  CausalRelation r = causal_relation(a, b);
  CHECK(r.relation == Causal::SpacelikeSeparated);
  // worst case: dt = r1 + r2 = 2, |dx| = 5 - 2 = 3 -> margin 4 - 9
  CHECK(r.margin == doctest::Approx(-5.0));

  CausalRelation t = causal_relation(bump({0, 0, 0, 0}, 1.0),
                                     bump({3, 0.5, 0, 0}, 1.0));
  CHECK(t.relation == Causal::NotSpacelikeSeparated);
  CHECK(t.margin > 0);

  CausalRelation u = causal_relation(a, gaussian_packet({0, 9, 0, 0}, 1, {0, 0, 0, 0}));
  CHECK(u.relation == Causal::Indeterminate);
}

TEST_CASE("content keys identify functions") {
  TestFunction f = gaussian_packet({0, 0, 0, 0}, 1.0, {0.5, 0, 0, 0});
  TestFunction f2 = gaussian_packet({0, 0, 0, 0}, 1.0, {0.5, 0, 0, 0});
  CHECK(content_key(f) == content_key(f2));
  CHECK(content_key(f) != content_key(scale(f, 2.0)));
  CHECK(content_key(f) != content_key(gaussian_packet({0, 0, 0, 0}, 1.1, {0.5, 0, 0, 0})));
  CHECK(content_key(f) != content_key(translate(f, {0.1, 0, 0, 0})));
  CHECK(content_key(sum(f, f2)) == content_key(sum(f2, f)));
}
