#include <doctest.h>

#include <cmath>

#include "nlqft/em.hpp"

using namespace nlqft;

namespace {

std::shared_ptr<const Grid> cube(int n, double d) {
  GridSpec s;
  s.n_t = s.n_s = n;
  s.dt = s.dx = d;
  s.origin = {-n * d / 2, -n * d / 2, -n * d / 2, -n * d / 2};
  return make_grid(s);
}

TestFunction current_bump(double t, double x, double r = 1.0) {
  return bump({t, x, 0, 0}, r, Rank::Vector, {{0.5, 1, 0.4, -0.3, 0, 0}});
}

TestFunction field_bump(double t, double x, double r = 1.0) {
  return bump({t, x, 0, 0}, r, Rank::Antisym2, {{0.8, -0.4, 0.3, 0.5, 0.2, -0.6}});
}

}  // namespace

TEST_CASE("model family construction") {
  EMModelParams p;
  NonlinearModel base = build_em_model(p, false, false);
  CHECK(base.terms.size() == 2);  // (F,F)_EM + (J,J)_V
  CHECK(base.slots.count("J") == 1);
  CHECK(base.slots.count("F") == 1);
  CHECK(base.slots.count("S") == 0);

  NonlinearModel axial = build_em_model(p, true, false);
  CHECK(axial.slots.count("S") == 1);
  CHECK(axial.terms.size() == 3);  // lambdas are zero: no extra terms

  EMModelParams q = p;
  q.lambda1 = q.lambda2 = q.lambda3 = 0.1;
  CHECK(build_em_model(q, false, false).terms.size() == 5);
  EMModelParams neg = p;
  neg.lambda2 = -0.1;
  CHECK_THROWS(build_em_model(neg, false, false));
  EMModelParams badsig = p;
  badsig.sigma_s = 2.0;  // sigma_s > sigma_t
  CHECK_THROWS(build_em_model(badsig, false, false));
}

TEST_CASE("probe construction enforces slot ranks") {
  EMProbe empty;
  CHECK_THROWS(em_probe(empty));
  EMProbe bad;
  bad.J = field_bump(0, 0);  // antisym2 in the vector slot
  CHECK_THROWS(em_probe(bad));
  EMProbe ok;
  ok.J = current_bump(0, 0);
  ok.F = field_bump(0, 0);
  Probe pr = em_probe(ok);
  CHECK(pr.fns.count("J") == 1);
  CHECK(pr.fns.count("F") == 1);
}

TEST_CASE("free model: sectors decouple and match the plain kernels") {
  auto g = cube(12, 0.5);
  EMModelParams p;
  XiEvaluator ev(g, build_em_model(p, false, false));

  TestFunction J = current_bump(0, 0.2);
  TestFunction F = field_bump(0.1, -0.1);
  CHECK(vacuum_cross_correlation(ev, J, F) == cplx(0.0));

  // J-only self product is the massive vector product alone
  EMProbe pj;
  pj.J = J;
  cplx self = ev.xi(em_probe(pj), em_probe(pj));
  RectRep r = reduce_rect(sample(J, g), p.mV);
  cplx direct =
      contract(make_vector_kernel(p.mV, p.sigma_t, p.sigma_s), r, r).value;
  CHECK(std::abs(self - direct) < 1e-10 * std::abs(direct));
  CHECK(self.real() > 0);

  EMProbe pf;
  pf.F = F;
  CHECK(ev.xi(em_probe(pf), em_probe(pf)).real() > 0);
}

TEST_CASE("lambda1 with kappa1 = 0 rescales the current sector") {
  auto g = cube(12, 0.5);
  EMModelParams p0;
  EMModelParams p1 = p0;
  p1.lambda1 = 0.3;
  p1.kappa1 = 0.0;
  XiEvaluator ev0(g, build_em_model(p0, false, false));
  XiEvaluator ev1(g, build_em_model(p1, false, false));
  EMProbe pj;
  pj.J = current_bump(0, 0.2);
  cplx a = ev0.xi(em_probe(pj), em_probe(pj));
  cplx b = ev1.xi(em_probe(pj), em_probe(pj));
  CHECK(b.real() / a.real() == doctest::Approx(1.3).epsilon(1e-10));
}

TEST_CASE("derivative coupling activates the J/F cross term") {
  auto g = cube(16, 0.5);
  EMModelParams p;
  p.lambda_deriv1 = 0.1;
  p.kappa2 = 1.0;
  XiEvaluator ev(g, build_em_model(p, false, true));
  TestFunction J = current_bump(0, 0, 1.2);
  TestFunction F = field_bump(0.1, 0.2, 1.2);
  cplx cross = vacuum_cross_correlation(ev, J, F);
  EMProbe pj, pf;
  pj.J = J;
  pf.F = F;
  double nj = ev.xi(em_probe(pj), em_probe(pj)).real();
  double nf = ev.xi(em_probe(pf), em_probe(pf)).real();
  CHECK(std::abs(cross) / std::sqrt(nj * nf) > 1e-4);

  // the quadratic couplings alone cannot link single-slot probes
  EMModelParams q;
  q.lambda2 = 0.1;
  XiEvaluator evq(g, build_em_model(q, false, false));
  CHECK(vacuum_cross_correlation(evq, J, F) == cplx(0.0));
}

TEST_CASE("spectrum off the mass shell: quadratic term sees what the base misses") {
  GridSpec s;
  s.n_t = 24;
  s.n_s = 16;
  s.dt = 0.35;
  s.dx = 0.5;
  s.origin = {-24 * 0.35 / 2, -4, -4, -4};
  auto g = make_grid(s);
  // current modulated at omega = 6 with little spatial momentum: nearly
  // orthogonal to the omega = sqrt(k^2 + 1) shell
  TestFunction J = gaussian_packet({0, 0, 0, 0}, 1.0, {6.0, 0, 0, 0},
                                   Rank::Vector, {{0, 1, 0, 0, 0, 0}});
  TestFunction F = field_bump(0, 0, 1.2);
  EMProbe both;
  both.J = J;
  both.F = F;
  EMProbe ponly;
  ponly.J = J;

  EMModelParams base;
  XiEvaluator ev0(g, build_em_model(base, false, false));
  double jj = ev0.xi(em_probe(ponly), em_probe(ponly)).real();
  TestFunction J0 = gaussian_packet({0, 0, 0, 0}, 1.0, {0, 0, 0, 0},
                                    Rank::Vector, {{0, 1, 0, 0, 0, 0}});
  EMProbe p0;
  p0.J = J0;
  double jj_on = ev0.xi(em_probe(p0), em_probe(p0)).real();
  CHECK(jj < 1e-4 * jj_on);  // the base product barely sees this current

  EMModelParams q = base;
  q.lambda2 = 1.0;
  XiEvaluator ev2(g, build_em_model(q, false, false));
  double with = ev2.xi(em_probe(both), em_probe(both)).real();
  double without = ev0.xi(em_probe(both), em_probe(both)).real();
  double quad = with - without;  // the contr(J,F) term alone
  CHECK(quad > 100.0 * jj);
}
