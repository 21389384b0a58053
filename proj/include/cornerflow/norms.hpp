#pragma once

#include <functional>

#include "cornerflow/fem.hpp"

namespace cornerflow {

using GradientSampler = std::function<Vec2(const Vec2&)>;

/// ||rho^alpha s||_{L2} on the quadrature of `disc` (its delta).
double weighted_l2_norm(const Discretization& disc, const ScalarSampler& s, double alpha);

/// sqrt(||rho^alpha s||^2 + ||rho^alpha grad s||^2).
double weighted_w12_norm(const Discretization& disc, const ScalarSampler& s, const GradientSampler& grad, double alpha);

/// Sum over quadrature points of weight * rho^(2 alpha) * integrand(element, point).
double weighted_integral_sq(const Discretization& disc, double alpha,
                            const std::function<double(Index, const QuadPoint&)>& integrand);

/// int rho^nu s dx / int rho^nu dx with the gauge exponent nu of `disc`.
double weighted_mean(const Discretization& disc, const ScalarSampler& s);

}  // namespace cornerflow
