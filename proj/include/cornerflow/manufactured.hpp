#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>

#include "cornerflow/geometry.hpp"

namespace cornerflow {

/// Smallest positive root of sin(lambda * omega) + lambda * sin(omega) = 0.
struct CornerExponent {
  double omega = 0.0;
  double lambda = 0.0;
  double residual = 0.0;  // |sin(lambda omega) + lambda sin omega|
};

/// Scans (1e-6, 1.0001] in steps of 0.01, bisects the first sign change and
/// polishes with Newton. Throws ValidationError for omega outside (0, 2pi]
/// and NumericalError when the bracket holds no root.
CornerExponent solve_lambda(double omega);

/// Angular stream-function profile and its first three derivatives.
struct XiValues {
  double xi = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};
XiValues xi_profiles(double lambda, double omega, double theta);
/// k-th derivative of the profile for any k >= 0.
double xi_derivative(double lambda, double omega, double theta, int k);

/// Values and derivatives of an exact solution at one point and time.
struct ExactFields {
  Vec2 u;
  Mat2 grad_u;  // grad_u(i, j) = d u_i / d x_j
  Vec2 lap_u;
  double p = 0.0;
  Vec2 grad_p;
  Vec2 u_t;
};

enum class RegularPart { Zero, Trig };
enum class TimeFactor { Exponential, Frozen };

std::string to_string(RegularPart r);
RegularPart parse_regular_part(std::string_view name);

class ExactSolution {
 public:
  virtual ~ExactSolution() = default;
  /// Throws ValidationError where derivatives are undefined (the corner).
  virtual ExactFields fields(const Vec2& x, double t) const = 0;
  /// Velocity only; defined on the whole closed domain.
  virtual Vec2 velocity(const Vec2& x, double t) const = 0;
  virtual double pressure(const Vec2& x, double t) const { return fields(x, t).p; }
  virtual std::string describe() const = 0;
};

/// u = T(t) (r^lambda chi(theta) + psi(x)), P = T(t) r^(lambda-1) gamma(theta),
/// with T = e^t or T = 1. The corner rays are theta = 0 and theta = omega.
class ExactCornerSolution final : public ExactSolution {
 public:
  ExactCornerSolution(double omega, RegularPart regular, TimeFactor time = TimeFactor::Exponential);

  ExactFields fields(const Vec2& x, double t) const override;
  Vec2 velocity(const Vec2& x, double t) const override;
  std::string describe() const override;

  const CornerExponent& exponent() const { return exponent_; }
  double omega() const { return exponent_.omega; }
  double lambda() const { return exponent_.lambda; }
  RegularPart regular() const { return regular_; }

  /// chi_1, chi_2 and gamma with derivatives up to order 2 (chi) and 1 (gamma).
  std::array<double, 3> chi1(double theta) const;
  std::array<double, 3> chi2(double theta) const;
  std::array<double, 2> gamma(double theta) const;

  /// Singular parts only (no time factor, no regular part).
  Vec2 singular_velocity(const Vec2& x) const;
  double singular_pressure(const Vec2& x) const;

 private:
  double time_factor(double t) const;
  CornerExponent exponent_;
  RegularPart regular_;
  TimeFactor time_;
};

/// Divergence-free quadratic velocity with a linear pressure:
/// u = T(t) (x2^2 + x1, x1^2 - x2), P = T(t) (x1 - 2 x2).
class QuadraticSolution final : public ExactSolution {
 public:
  explicit QuadraticSolution(TimeFactor time = TimeFactor::Exponential) : time_(time) {}
  ExactFields fields(const Vec2& x, double t) const override;
  Vec2 velocity(const Vec2& x, double t) const override;
  std::string describe() const override;

 private:
  TimeFactor time_;
};

class ZeroSolution final : public ExactSolution {
 public:
  ExactFields fields(const Vec2&, double) const override { return {}; }
  Vec2 velocity(const Vec2&, double) const override { return {}; }
  std::string describe() const override { return "zero"; }
};

/// f = u_t - lap u + curl u x u + grad P, with curl u x u = (-w u2, w u1).
Vec2 forcing(const ExactSolution& solution, const Vec2& x, double t);

/// Polar angle in [0, 2pi).
double polar_angle(const Vec2& x);

}  // namespace cornerflow
