#include "nlqft/testfunction.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace nlqft {

static double minkowski_dot(const std::array<double, 4>& a,
                            const std::array<double, 4>& b) {
  return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

TestFunction gaussian_packet(const std::array<double, 4>& x0, double sigma,
                             const std::array<double, 4>& q, Rank rank,
                             const std::array<double, 6>& profile) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian width must be > 0");
  TestFunction f;
  f.family = GaussianPacket{x0, sigma, q, 0.0};
  f.rank = rank;
  f.profile = profile;
  return f;
}

TestFunction bump(const std::array<double, 4>& x0, double r, Rank rank,
                  const std::array<double, 6>& profile) {
  if (!(r > 0.0)) throw std::invalid_argument("bump radius must be > 0");
  TestFunction f;
  f.family = BumpFn{x0, r};
  f.rank = rank;
  f.profile = profile;
  return f;
}

TestFunction sum(const TestFunction& a, const TestFunction& b) {
  if (a.rank != b.rank) throw std::invalid_argument("sum of different ranks");
  TestFunction f;
  f.family = SumFn{std::make_shared<TestFunction>(a),
                   std::make_shared<TestFunction>(b)};
  f.rank = a.rank;
  f.profile = {{1, 1, 1, 1, 1, 1}};  // unused for Sum; children carry profiles
  return f;
}

TestFunction scale(const TestFunction& f, double s) {
  TestFunction out = f;
  out.amplitude *= s;
  if (auto* su = std::get_if<SumFn>(&out.family)) {
    // push the factor into the children so amplitude stays a leaf property
    out.amplitude = f.amplitude;
    su->a = std::make_shared<TestFunction>(scale(*su->a, s));
    su->b = std::make_shared<TestFunction>(scale(*su->b, s));
  }
  return out;
}

TestFunction translate(const TestFunction& f, const std::array<double, 4>& a) {
  TestFunction out = f;
  if (auto* g = std::get_if<GaussianPacket>(&out.family)) {
    for (int i = 0; i < 4; ++i) g->x0[i] -= a[i];
  } else if (auto* b = std::get_if<BumpFn>(&out.family)) {
    for (int i = 0; i < 4; ++i) b->x0[i] -= a[i];
  } else if (auto* su = std::get_if<SumFn>(&out.family)) {
    su->a = std::make_shared<TestFunction>(translate(*su->a, a));
    su->b = std::make_shared<TestFunction>(translate(*su->b, a));
  }
  return out;
}

double value_at(const TestFunction& f, const std::array<double, 4>& x, int c) {
  if (c < 0 || c >= component_count(f.rank))
    throw std::invalid_argument("component out of range");
  if (auto* g = std::get_if<GaussianPacket>(&f.family)) {
    std::array<double, 4> u;
    double r2 = 0.0;
    for (int i = 0; i < 4; ++i) {
      u[i] = x[i] - g->x0[i];
      r2 += u[i] * u[i];
    }
    double env = std::exp(-r2 / (2.0 * g->sigma * g->sigma));
    double mod = std::cos(minkowski_dot(g->q, u) + g->phase);
    return f.amplitude * f.profile[c] * env * mod;
  }
  if (auto* b = std::get_if<BumpFn>(&f.family)) {
    double r2 = 0.0;
    for (int i = 0; i < 4; ++i) {
      double u = x[i] - b->x0[i];
      r2 += u * u;
    }
    double rho2 = r2 / (b->r * b->r);
    if (rho2 >= 1.0) return 0.0;
    return f.amplitude * f.profile[c] * std::exp(-1.0 / (1.0 - rho2));
  }
  const auto& su = std::get<SumFn>(f.family);
  return f.amplitude * (value_at(*su.a, x, c) + value_at(*su.b, x, c));
}

RealField4 sample(const TestFunction& f, std::shared_ptr<const Grid> grid) {
  RealField4 out = make_real_field(grid, component_count(f.rank));
  const Grid& g = *grid;
  const GridSpec& s = g.spec;
  for (int c = 0; c < out.components; ++c) {
    double* dst = out.comp(c);
#pragma omp parallel for schedule(static)
    for (int it = 0; it < s.n_t; ++it)
      for (int ix = 0; ix < s.n_s; ++ix)
        for (int iy = 0; iy < s.n_s; ++iy)
          for (int iz = 0; iz < s.n_s; ++iz) {
            std::array<double, 4> x = {g.t[it], g.x[0][ix], g.x[1][iy],
                                       g.x[2][iz]};
            dst[g.idx(it, ix, iy, iz)] = value_at(f, x, c);
          }
  }
  return out;
}

Support support_of(const TestFunction& f) {
  if (auto* g = std::get_if<GaussianPacket>(&f.family)) {
    (void)g;
    return Support{false, {}, 0.0};
  }
  if (auto* b = std::get_if<BumpFn>(&f.family))
    return Support{true, b->x0, b->r};
  const auto& su = std::get<SumFn>(f.family);
  Support sa = support_of(*su.a), sb = support_of(*su.b);
  if (!sa.bounded || !sb.bounded) return Support{false, {}, 0.0};
  // smallest enclosing 4-ball of two balls
  double d2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    double u = sb.center[i] - sa.center[i];
    d2 += u * u;
  }
  double d = std::sqrt(d2);
  if (d + sb.radius <= sa.radius) return sa;
  if (d + sa.radius <= sb.radius) return sb;
  Support out;
  out.bounded = true;
  out.radius = 0.5 * (d + sa.radius + sb.radius);
  double lam = d > 0.0 ? (out.radius - sa.radius) / d : 0.0;
  for (int i = 0; i < 4; ++i)
    out.center[i] = sa.center[i] + lam * (sb.center[i] - sa.center[i]);
  return out;
}

bool has_closed_ft(const TestFunction& f) {
  if (std::holds_alternative<GaussianPacket>(f.family)) return true;
  if (std::holds_alternative<BumpFn>(f.family)) return false;
  const auto& su = std::get<SumFn>(f.family);
  return has_closed_ft(*su.a) && has_closed_ft(*su.b);
}

cplx closed_ft(const TestFunction& f, const std::array<double, 4>& k, int c) {
  if (auto* g = std::get_if<GaussianPacket>(&f.family)) {
    double s2 = g->sigma * g->sigma;
    auto gamma = [&](double dsign) {
      // int d4u e^{+i B(p,u)} e^{-|u|^2/(2 s^2)} = (2 pi s^2)^2
      //   * e^{-s^2 (p0^2 + |pvec|^2)/2},  p = k + dsign*q
      double p2 = 0.0;
      for (int i = 0; i < 4; ++i) {
        double p = k[i] + dsign * g->q[i];
        p2 += p * p;
      }
      double c4 = 2.0 * M_PI * s2;
      return c4 * c4 * std::exp(-0.5 * s2 * p2);
    };
    double bk = minkowski_dot(k, g->x0);
    cplx center_phase(std::cos(bk), std::sin(bk));
    cplx eip(std::cos(g->phase), std::sin(g->phase));
    cplx val = 0.5 * (eip * gamma(+1.0) + std::conj(eip) * gamma(-1.0));
    return f.amplitude * f.profile[c] * center_phase * val;
  }
  if (std::holds_alternative<BumpFn>(f.family))
    throw std::invalid_argument("no closed-form FT for bump functions");
  const auto& su = std::get<SumFn>(f.family);
  return f.amplitude * (closed_ft(*su.a, k, c) + closed_ft(*su.b, k, c));
}

static void key_append(std::string& out, const TestFunction& f) {
  char buf[512];
  if (auto* g = std::get_if<GaussianPacket>(&f.family)) {
    std::snprintf(buf, sizeof buf,
                  "G[%.17g;%.17g,%.17g,%.17g,%.17g;%.17g,%.17g,%.17g,%.17g;%.17g]",
                  g->sigma, g->x0[0], g->x0[1], g->x0[2], g->x0[3], g->q[0],
                  g->q[1], g->q[2], g->q[3], g->phase);
    out += buf;
  } else if (auto* b = std::get_if<BumpFn>(&f.family)) {
    std::snprintf(buf, sizeof buf, "B[%.17g;%.17g,%.17g,%.17g,%.17g]", b->r,
                  b->x0[0], b->x0[1], b->x0[2], b->x0[3]);
    out += buf;
  } else {
    const auto& su = std::get<SumFn>(f.family);
    out += "S(";
    key_append(out, *su.a);
    out += "+";
    key_append(out, *su.b);
    out += ")";
  }
  std::snprintf(buf, sizeof buf, "{r%d;a%.17g;p%.17g,%.17g,%.17g,%.17g,%.17g,%.17g}",
                component_count(f.rank), f.amplitude, f.profile[0], f.profile[1],
                f.profile[2], f.profile[3], f.profile[4], f.profile[5]);
  out += buf;
}

std::string content_key(const TestFunction& f) {
  std::string out;
  key_append(out, f);
  return out;
}

CausalRelation causal_relation(const TestFunction& f, const TestFunction& g) {
  Support sf = support_of(f), sg = support_of(g);
  CausalRelation out;
  if (!sf.bounded || !sg.bounded) {
    out.relation = Causal::Indeterminate;
    out.margin = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double dt = std::abs(sf.center[0] - sg.center[0]);
  double dx2 = 0.0;
  for (int i = 1; i < 4; ++i) {
    double u = sf.center[i] - sg.center[i];
    dx2 += u * u;
  }
  double rr = sf.radius + sg.radius;
  double tmax = dt + rr;
  double xmin = std::max(0.0, std::sqrt(dx2) - rr);
  out.margin = tmax * tmax - xmin * xmin;
  out.relation = out.margin < 0.0 ? Causal::SpacelikeSeparated
                                  : Causal::NotSpacelikeSeparated;
  return out;
}

}  // namespace nlqft
