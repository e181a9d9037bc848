#include "nlqft/densities.hpp"

#include <cmath>
#include <stdexcept>

#include "nlqft/grid.hpp"

namespace nlqft {

namespace {

// Fritsch-Carlson tangents for a monotone cubic interpolant.
struct TableEval {
  const std::vector<double>& xs;
  const std::vector<double>& ys;
  std::vector<double> tangents;

  explicit TableEval(const GDescriptor& G) : xs(G.xs), ys(G.ys) {
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("monotone table needs >= 2 knots");
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      double h = xs[i + 1] - xs[i];
      if (!(h > 0.0))
        throw std::invalid_argument("table knots must be strictly increasing");
      d[i] = (ys[i + 1] - ys[i]) / h;
      if (!(d[i] >= 0.0))
        throw std::invalid_argument("table values must be nondecreasing");
    }
    tangents.resize(n);
    tangents[0] = d[0];
    tangents[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
      tangents[i] = d[i - 1] * d[i] <= 0.0 ? 0.0 : 0.5 * (d[i - 1] + d[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (d[i] == 0.0) {
        tangents[i] = tangents[i + 1] = 0.0;
        continue;
      }
      double a = tangents[i] / d[i], b = tangents[i + 1] / d[i];
      double s = a * a + b * b;
      if (s > 9.0) {
        double tau = 3.0 / std::sqrt(s);
        tangents[i] = tau * a * d[i];
        tangents[i + 1] = tau * b * d[i];
      }
    }
  }

  void eval(double x, double& v, double& dv) const {
    const std::size_t n = xs.size();
    if (x <= xs.front()) {  // linear extension with the end tangent
      v = ys.front() + tangents.front() * (x - xs.front());
      dv = tangents.front();
      return;
    }
    if (x >= xs.back()) {
      v = ys.back() + tangents.back() * (x - xs.back());
      dv = tangents.back();
      return;
    }
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      (xs[mid] <= x ? lo : hi) = mid;
    }
    double h = xs[lo + 1] - xs[lo];
    double t = (x - xs[lo]) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    v = h00 * ys[lo] + h10 * h * tangents[lo] + h01 * ys[lo + 1] +
        h11 * h * tangents[lo + 1];
    double dh00 = (6 * t * t - 6 * t) / h;
    double dh10 = (3 * t * t - 4 * t + 1);
    double dh01 = (6 * t - 6 * t * t) / h;
    double dh11 = (3 * t * t - 2 * t);
    dv = dh00 * ys[lo] + dh10 * tangents[lo] + dh01 * ys[lo + 1] +
         dh11 * tangents[lo + 1];
  }
};

}  // namespace

double g_value(const GDescriptor& G, double y) {
  switch (G.kind) {
    case GDescriptor::Identity: return y;
    case GDescriptor::XMinusTanh: return y - std::tanh(y);
    case GDescriptor::MonotoneTable: {
      TableEval t(G);
      double v, dv;
      t.eval(y, v, dv);
      return v;
    }
  }
  return y;
}

double g_derivative(const GDescriptor& G, double y) {
  switch (G.kind) {
    case GDescriptor::Identity: return 1.0;
    case GDescriptor::XMinusTanh: {
      double s = 1.0 / std::cosh(y);
      return 1.0 - s * s;
    }
    case GDescriptor::MonotoneTable: {
      TableEval t(G);
      double v, dv;
      t.eval(y, v, dv);
      return dv;
    }
  }
  return 1.0;
}

double g_deformed_density(const GDescriptor& G, double variance, double y) {
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be > 0");
  double g = g_value(G, y);
  double gp = g_derivative(G, y);
  return gp * std::exp(-g * g / (2.0 * variance)) /
         std::sqrt(2.0 * M_PI * variance);
}

double joint_density(const DensitySpec& spec, const std::vector<double>& x) {
  if (spec.kind == DensitySpec::GDeformed) {
    if (x.size() != 1)
      throw std::invalid_argument("deformed density is one-dimensional");
    return g_deformed_density(spec.G, spec.variance, x[0]);
  }
  const int n = int(spec.F.rows());
  if (spec.F.cols() != n || int(x.size()) != n)
    throw std::invalid_argument("dimension mismatch");
  Eigen::MatrixXd F = spec.F;
  if (spec.ridge > 0.0)
    F += spec.ridge * Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(F);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("singular geometry: F has no Cholesky factorization");
  Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  Eigen::VectorXd Finv_x = llt.solve(xv);
  double det = 1.0;
  Eigen::MatrixXd L = llt.matrixL();
  for (int i = 0; i < n; ++i) det *= L(i, i) * L(i, i);
  if (!(det > 0.0))
    throw std::runtime_error("singular geometry: det F <= 0");
  double gauss = std::exp(-0.5 * xv.dot(Finv_x)) /
                 std::sqrt(std::pow(2.0 * M_PI, n) * det);
  if (spec.kind == DensitySpec::VacuumGaussian) return gauss;
  if (spec.S.size() != n) throw std::invalid_argument("S dimension mismatch");
  // prefactor |x'F^{-1}S|^2 + (1 - S+ F^{-1} S)
  Eigen::VectorXcd Finv_S(n);
  {
    Eigen::VectorXd re = llt.solve(Eigen::VectorXd(spec.S.real()));
    Eigen::VectorXd im = llt.solve(Eigen::VectorXd(spec.S.imag()));
    for (int i = 0; i < n; ++i) Finv_S(i) = cplx(re(i), im(i));
  }
  cplx xFS(0.0);
  for (int i = 0; i < n; ++i) xFS += xv(i) * Finv_S(i);
  double sFs = 0.0;
  for (int i = 0; i < n; ++i) sFs += (std::conj(spec.S(i)) * Finv_S(i)).real();
  double pref = std::norm(xFS) + (1.0 - sFs);
  return pref * gauss;
}

double integrate_density(const DensitySpec& spec,
                         const std::vector<std::pair<double, double>>& box,
                         int resolution) {
  const int n = int(box.size());
  if (n < 1 || n > 3)
    throw std::invalid_argument("tensor-grid integration supports n in 1..3");
  if (resolution < 2) throw std::invalid_argument("resolution too small");
  std::vector<double> h(n), x(n);
  for (int d = 0; d < n; ++d)
    h[d] = (box[d].second - box[d].first) / (resolution - 1);

  double total = 0.0, maxval = 0.0, boundary_max = 0.0;
  std::vector<int> idx(n, 0);
  while (true) {
    double w = 1.0;
    bool boundary = false;
    for (int d = 0; d < n; ++d) {
      x[d] = box[d].first + h[d] * idx[d];
      if (idx[d] == 0 || idx[d] == resolution - 1) {
        w *= 0.5;
        boundary = true;
      }
      w *= h[d];
    }
    double v = joint_density(spec, x);
    double av = std::abs(v);
    if (av > maxval) maxval = av;
    if (boundary && av > boundary_max) boundary_max = av;
    total += w * v;
    int d = n - 1;
    while (d >= 0 && ++idx[d] == resolution) idx[d--] = 0;
    if (d < 0) break;
  }
  if (boundary_max > 1e-12 * maxval)
    throw std::runtime_error("integration box too small for this density");
  return total;
}

}  // namespace nlqft
