#include "cornerflow/weight.hpp"

#include <fmt/format.h>

#include <cmath>

#include "cornerflow/error.hpp"

namespace cornerflow {

void WeightParams::validate() const {
  if (!(delta > 0.0)) throw ValidationError(fmt::format("weight cutoff delta must be positive, got {}", delta));
  if (!(nu >= 0.0) || !(nu_star >= 0.0) || !(mu_star >= 0.0)) {
    throw ValidationError(
        fmt::format("weight exponents must be non-negative (nu={}, nu*={}, mu*={})", nu, nu_star, mu_star));
  }
}

double rho(const Vec2& x, double delta) {
  const double r = norm(x);
  return r <= delta ? r : delta;
}

std::pair<double, Vec2> rho_pow_grad(const Vec2& x, double alpha, double delta) {
  if (alpha == 0.0) return {1.0, Vec2{}};
  const double r = norm(x);
  if (r >= delta) return {std::pow(delta, alpha), Vec2{}};
  if (r == 0.0) {
    if (alpha < 0.0) throw ValidationError("rho^alpha with alpha < 0 evaluated at the origin");
    // grad r^alpha is bounded only for alpha >= 1; report the one-sided limit 0 for alpha > 1.
    return {0.0, Vec2{}};
  }
  const double value = std::pow(r, alpha);
  // grad r^alpha = alpha r^{alpha-1} x/|x| = alpha r^{alpha-2} x
  return {value, x * (alpha * value / (r * r))};
}

}  // namespace cornerflow
