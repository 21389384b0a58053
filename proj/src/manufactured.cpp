#include "cornerflow/manufactured.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "cornerflow/error.hpp"

namespace cornerflow {

namespace {

constexpr double kPi = std::numbers::pi;

double exponent_equation(double lambda, double omega) { return std::sin(lambda * omega) + lambda * std::sin(omega); }

// Weight of the sine terms that makes Xi(omega) = Xi'(omega) = 0 once lambda
// solves the exponent equation; equals cos(lambda omega) at omega = 3pi/2.
double sine_weight(double lambda, double omega) {
  return (std::cos(omega) - std::cos(lambda * omega)) / std::sin(omega);
}

// k-th derivative of sin(a t) and cos(a t)
double dsin(double a, double t, int k) { return std::pow(a, k) * std::sin(a * t + k * kPi / 2.0); }
double dcos(double a, double t, int k) { return std::pow(a, k) * std::cos(a * t + k * kPi / 2.0); }

// Binomial coefficients for the Leibniz rule up to order 2.
constexpr double kBinom[3][3] = {{1, 0, 0}, {1, 1, 0}, {1, 2, 1}};

// r^e f(theta): Cartesian gradient from f and f'.
Vec2 polar_gradient(double r, double theta, double e, double f, double df) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double scale = std::pow(r, e - 1.0);
  return {scale * (e * c * f - s * df), scale * (e * s * f + c * df)};
}

// Profile derivatives 0..4 sharing one evaluation of the trigonometric terms.
std::array<double, 5> xi_all(double lambda, double omega, double theta) {
  const double ap = 1.0 + lambda, am = 1.0 - lambda;
  const double c = sine_weight(lambda, omega);
  const double sp = std::sin(ap * theta), cp = std::cos(ap * theta);
  const double sm = std::sin(am * theta), cm = std::cos(am * theta);
  // k-th derivatives of sin and cos cycle through (s, c, -s, -c) and (c, -s, -c, s)
  const double sin_p[4] = {sp, cp, -sp, -cp}, cos_p[4] = {cp, -sp, -cp, sp};
  const double sin_m[4] = {sm, cm, -sm, -cm}, cos_m[4] = {cm, -sm, -cm, sm};
  std::array<double, 5> out{};
  double pk = 1.0, mk = 1.0;  // ap^k, am^k
  for (int k = 0; k < 5; ++k) {
    out[k] = c * (pk * sin_p[k % 4] / ap - mk * sin_m[k % 4] / am) + mk * cos_m[k % 4] - pk * cos_p[k % 4];
    pk *= ap;
    mk *= am;
  }
  return out;
}

}  // namespace

double polar_angle(const Vec2& x) {
  double theta = std::atan2(x.y, x.x);
  if (theta < 0.0) theta += 2.0 * kPi;
  return theta;
}

CornerExponent solve_lambda(double omega) {
  if (!(omega > 0.0 && omega <= 2.0 * kPi + 1e-14)) {
    throw ValidationError(fmt::format("corner angle {} outside (0, 2pi]", omega));
  }
  constexpr double lo_end = 1e-6, hi_end = 1.0001, step = 0.01;
  double a = lo_end;
  double fa = exponent_equation(a, omega);
  double b = a;
  bool bracketed = false;
  for (int k = 1; !bracketed; ++k) {
    b = std::min(lo_end + k * step, hi_end);
    const double fb = exponent_equation(b, omega);
    if (fb == 0.0) {
      a = b;
      fa = 0.0;
      bracketed = true;
      break;
    }
    if ((fa < 0.0) != (fb < 0.0)) {
      bracketed = true;
      break;
    }
    if (b >= hi_end) break;
    a = b;
    fa = fb;
  }
  if (!bracketed) {
    throw NumericalError(fmt::format("no root of the corner exponent equation in (0, 1.0001] for omega = {}", omega));
  }
  double lambda = a;
  if (fa != 0.0) {
    for (int it = 0; it < 200 && b - a > 1e-16 * std::max(1.0, b); ++it) {
      const double m = 0.5 * (a + b);
      const double fm = exponent_equation(m, omega);
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fa < 0.0) != (fm < 0.0)) {
        b = m;
      } else {
        a = m;
        fa = fm;
      }
    }
    lambda = 0.5 * (a + b);
    for (int it = 0; it < 3; ++it) {
      const double f = exponent_equation(lambda, omega);
      const double df = omega * std::cos(lambda * omega) + std::sin(omega);
      if (df == 0.0) break;
      const double next = lambda - f / df;
      if (std::abs(exponent_equation(next, omega)) >= std::abs(f)) break;
      lambda = next;
    }
  }
  return {omega, lambda, std::abs(exponent_equation(lambda, omega))};
}

double xi_derivative(double lambda, double omega, double theta, int k) {
  const double ap = 1.0 + lambda, am = 1.0 - lambda;
  const double c = sine_weight(lambda, omega);
  return c * (dsin(ap, theta, k) / ap - dsin(am, theta, k) / am) + dcos(am, theta, k) - dcos(ap, theta, k);
}

XiValues xi_profiles(double lambda, double omega, double theta) {
  return {xi_derivative(lambda, omega, theta, 0), xi_derivative(lambda, omega, theta, 1),
          xi_derivative(lambda, omega, theta, 2), xi_derivative(lambda, omega, theta, 3)};
}

std::string to_string(RegularPart r) { return r == RegularPart::Zero ? "zero" : "trig"; }

RegularPart parse_regular_part(std::string_view name) {
  if (name == "zero") return RegularPart::Zero;
  if (name == "trig") return RegularPart::Trig;
  throw ValidationError(fmt::format("unknown regular part '{}' (expected zero or trig)", name));
}

ExactCornerSolution::ExactCornerSolution(double omega, RegularPart regular, TimeFactor time)
    : exponent_(solve_lambda(omega)), regular_(regular), time_(time) {
  if (std::abs(std::sin(omega)) < 1e-12) {
    throw ValidationError(fmt::format("corner solution is undefined for the slit angle omega = {}", omega));
  }
  if (exponent_.lambda >= 1.0 - 1e-9) {
    throw ValidationError(
        fmt::format("corner solution needs a re-entrant angle; omega = {} gives lambda = {}", omega, exponent_.lambda));
  }
}

double ExactCornerSolution::time_factor(double t) const { return time_ == TimeFactor::Exponential ? std::exp(t) : 1.0; }

namespace {

struct Profiles {
  std::array<double, 3> chi1{}, chi2{};
  std::array<double, 2> gamma{};
};

Profiles profiles(double l, double w, double theta) {
  const auto xi = xi_all(l, w, theta);
  const double s = std::sin(theta), c = std::cos(theta);
  const double ds[3] = {s, c, -s}, dc[3] = {c, -s, -c};
  Profiles p;
  // chi1 = cos Xi' + (1 + l) sin Xi, chi2 = sin Xi' - (1 + l) cos Xi, by the Leibniz rule
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i <= j; ++i) {
      p.chi1[j] += kBinom[j][i] * (dc[i] * xi[j - i + 1] + (1.0 + l) * ds[i] * xi[j - i]);
      p.chi2[j] += kBinom[j][i] * (ds[i] * xi[j - i + 1] - (1.0 + l) * dc[i] * xi[j - i]);
    }
  }
  const double a2 = (1.0 + l) * (1.0 + l);
  p.gamma = {(xi[3] + a2 * xi[1]) / (l - 1.0), (xi[4] + a2 * xi[2]) / (l - 1.0)};
  return p;
}

}  // namespace

std::array<double, 3> ExactCornerSolution::chi1(double theta) const { return profiles(lambda(), omega(), theta).chi1; }

std::array<double, 3> ExactCornerSolution::chi2(double theta) const { return profiles(lambda(), omega(), theta).chi2; }

std::array<double, 2> ExactCornerSolution::gamma(double theta) const {
  return profiles(lambda(), omega(), theta).gamma;
}

Vec2 ExactCornerSolution::singular_velocity(const Vec2& x) const {
  const double r = norm(x);
  if (r == 0.0) return {};
  const Profiles p = profiles(lambda(), omega(), polar_angle(x));
  const double rl = std::pow(r, lambda());
  return {rl * p.chi1[0], rl * p.chi2[0]};
}

double ExactCornerSolution::singular_pressure(const Vec2& x) const {
  const double r = norm(x);
  if (r == 0.0) throw ValidationError("corner pressure is unbounded at the origin");
  return std::pow(r, lambda() - 1.0) * gamma(polar_angle(x))[0];
}

Vec2 ExactCornerSolution::velocity(const Vec2& x, double t) const {
  Vec2 u = singular_velocity(x);
  if (regular_ == RegularPart::Trig) u += Vec2{std::sin(x.x) * std::cos(x.y), -std::cos(x.x) * std::sin(x.y)};
  return time_factor(t) * u;
}

ExactFields ExactCornerSolution::fields(const Vec2& x, double t) const {
  const double r = norm(x);
  if (r == 0.0) throw ValidationError("corner solution derivatives are undefined at the origin");
  const double theta = polar_angle(x);
  const double l = lambda();
  const Profiles prof = profiles(l, omega(), theta);
  const auto& c1 = prof.chi1;
  const auto& c2 = prof.chi2;
  const auto& g = prof.gamma;
  const double rl = std::pow(r, l);

  ExactFields f;
  f.u = {rl * c1[0], rl * c2[0]};
  const Vec2 g1 = polar_gradient(r, theta, l, c1[0], c1[1]);
  const Vec2 g2 = polar_gradient(r, theta, l, c2[0], c2[1]);
  f.grad_u(0, 0) = g1.x;
  f.grad_u(0, 1) = g1.y;
  f.grad_u(1, 0) = g2.x;
  f.grad_u(1, 1) = g2.y;
  const double rl2 = std::pow(r, l - 2.0);
  f.lap_u = {rl2 * (l * l * c1[0] + c1[2]), rl2 * (l * l * c2[0] + c2[2])};
  f.p = std::pow(r, l - 1.0) * g[0];
  f.grad_p = polar_gradient(r, theta, l - 1.0, g[0], g[1]);

  if (regular_ == RegularPart::Trig) {
    const double sx = std::sin(x.x), cx = std::cos(x.x), sy = std::sin(x.y), cy = std::cos(x.y);
    const Vec2 psi{sx * cy, -cx * sy};
    f.u += psi;
    f.grad_u(0, 0) += cx * cy;
    f.grad_u(0, 1) += -sx * sy;
    f.grad_u(1, 0) += sx * sy;
    f.grad_u(1, 1) += -cx * cy;
    f.lap_u += -2.0 * psi;
  }

  const double T = time_factor(t);
  f.u *= T;
  f.grad_u *= T;
  f.lap_u *= T;
  f.p *= T;
  f.grad_p *= T;
  f.u_t = time_ == TimeFactor::Exponential ? f.u : Vec2{};
  return f;
}

std::string ExactCornerSolution::describe() const {
  return fmt::format("corner(omega={:.17g}, lambda={:.17g}, regular={}, time={})", omega(), lambda(),
                     to_string(regular_), time_ == TimeFactor::Exponential ? "exp" : "frozen");
}

Vec2 QuadraticSolution::velocity(const Vec2& x, double t) const {
  const double T = time_ == TimeFactor::Exponential ? std::exp(t) : 1.0;
  return T * Vec2{x.y * x.y + x.x, x.x * x.x - x.y};
}

ExactFields QuadraticSolution::fields(const Vec2& x, double t) const {
  const double T = time_ == TimeFactor::Exponential ? std::exp(t) : 1.0;
  ExactFields f;
  f.u = T * Vec2{x.y * x.y + x.x, x.x * x.x - x.y};
  f.grad_u(0, 0) = T;
  f.grad_u(0, 1) = 2.0 * T * x.y;
  f.grad_u(1, 0) = 2.0 * T * x.x;
  f.grad_u(1, 1) = -T;
  f.lap_u = {2.0 * T, 2.0 * T};
  f.p = T * (x.x - 2.0 * x.y);
  f.grad_p = {T, -2.0 * T};
  f.u_t = time_ == TimeFactor::Exponential ? f.u : Vec2{};
  return f;
}

std::string QuadraticSolution::describe() const {
  return fmt::format("quadratic(time={})", time_ == TimeFactor::Exponential ? "exp" : "frozen");
}

Vec2 forcing(const ExactSolution& solution, const Vec2& x, double t) {
  const ExactFields f = solution.fields(x, t);
  const double w = f.grad_u(1, 0) - f.grad_u(0, 1);
  return f.u_t - f.lap_u + Vec2{-w * f.u.y, w * f.u.x} + f.grad_p;
}

}  // namespace cornerflow
