#pragma once

#include <utility>

#include "cornerflow/geometry.hpp"

namespace cornerflow {

/// Free parameters of the weighted method.
///   nu      exponent of the rho^{2 nu} envelope in the forms
///   nu_star velocity basis exponent (phi = chi * rho^{-nu_star})
///   mu_star pressure basis exponent (psi = theta * rho^{-mu_star})
///   delta   cutoff radius of the weight
struct WeightParams {
  double nu = 0.0;
  double nu_star = 0.0;
  double mu_star = 0.0;
  double delta = 0.03;

  static WeightParams unweighted(double delta = 0.03) { return {0.0, 0.0, 0.0, delta}; }
  bool is_unweighted() const { return nu == 0.0 && nu_star == 0.0 && mu_star == 0.0; }

  /// Throws ValidationError unless delta > 0 and all exponents are >= 0.
  void validate() const;
};

/// rho(x) = |x| inside the closed disk of radius delta, delta outside.
double rho(const Vec2& x, double delta);

/// (rho^alpha, grad rho^alpha). On the circle |x| = delta the outer
/// (zero-gradient) branch is used. Throws ValidationError at x = 0 for alpha < 0.
std::pair<double, Vec2> rho_pow_grad(const Vec2& x, double alpha, double delta);

}  // namespace cornerflow
