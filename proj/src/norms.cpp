#include "cornerflow/norms.hpp"

#include <cmath>

namespace cornerflow {

namespace {

double power(double r, double alpha) { return alpha == 0.0 ? 1.0 : std::pow(r, alpha); }

}  // namespace

double weighted_integral_sq(const Discretization& disc, double alpha,
                            const std::function<double(Index, const QuadPoint&)>& integrand) {
  double sum = 0.0;
  for (Index e = 0; e < disc.mesh().num_triangles(); ++e) {
    for (const QuadPoint& qp : disc.points(e)) {
      const double w = power(qp.rho, alpha);
      sum += qp.weight * w * w * integrand(e, qp);
    }
  }
  return sum;
}

double weighted_l2_norm(const Discretization& disc, const ScalarSampler& s, double alpha) {
  return std::sqrt(weighted_integral_sq(disc, alpha, [&](Index, const QuadPoint& qp) {
    const double v = s(qp.x);
    return v * v;
  }));
}

double weighted_w12_norm(const Discretization& disc, const ScalarSampler& s, const GradientSampler& grad,
                         double alpha) {
  return std::sqrt(weighted_integral_sq(disc, alpha, [&](Index, const QuadPoint& qp) {
    const double v = s(qp.x);
    const Vec2 g = grad(qp.x);
    return v * v + dot(g, g);
  }));
}

double weighted_mean(const Discretization& disc, const ScalarSampler& s) {
  double num = 0.0, den = 0.0;
  for (const QuadPoint& qp : disc.points()) {
    num += qp.weight * qp.rho_nu * s(qp.x);
    den += qp.weight * qp.rho_nu;
  }
  return num / den;
}

}  // namespace cornerflow
