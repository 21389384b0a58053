#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "cornerflow/error.hpp"
#include "cornerflow/fem.hpp"
#include "cornerflow/manufactured.hpp"
#include "cornerflow/mesh.hpp"
#include "cornerflow/norms.hpp"

using namespace cornerflow;

namespace {

constexpr double kPi = std::numbers::pi;

// Random point of the corner sector {r in [0.1, 1], theta in [0.05, omega - 0.05]}.
Vec2 sector_point(std::mt19937_64& rng, double omega) {
  std::uniform_real_distribution<double> r(0.1, 1.0), t(0.05, omega - 0.05);
  const double rr = r(rng), tt = t(rng);
  return {rr * std::cos(tt), rr * std::sin(tt)};
}

// Fourth-order central differences.
template <class F>
auto d1(F f, double x, double h) {
  return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) * (1.0 / (12.0 * h));
}
template <class F>
auto d2(F f, double x, double h) {
  return (-f(x - 2 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2 * h)) * (1.0 / (12.0 * h * h));
}

Vec2 fd_laplacian(const std::function<Vec2(const Vec2&)>& u, const Vec2& x, double h) {
  return d2([&](double s) { return u({s, x.y}); }, x.x, h) + d2([&](double s) { return u({x.x, s}); }, x.y, h);
}

Vec2 fd_gradient(const std::function<double(const Vec2&)>& p, const Vec2& x, double h) {
  return {d1([&](double s) { return p({s, x.y}); }, x.x, h), d1([&](double s) { return p({x.x, s}); }, x.y, h)};
}

Mat2 fd_jacobian(const std::function<Vec2(const Vec2&)>& u, const Vec2& x, double h) {
  const Vec2 dx = d1([&](double s) { return u({s, x.y}); }, x.x, h);
  const Vec2 dy = d1([&](double s) { return u({x.x, s}); }, x.y, h);
  Mat2 m;
  m(0, 0) = dx.x;
  m(1, 0) = dx.y;
  m(0, 1) = dy.x;
  m(1, 1) = dy.y;
  return m;
}

}  // namespace

// ---------------------------------------------------------------- exponents

TEST(CornerExponent, TabulatedValues) {
  EXPECT_NEAR(solve_lambda(1.5 * kPi).lambda, 0.5445, 5e-4);
  EXPECT_NEAR(solve_lambda(1.25 * kPi).lambda, 0.6736, 5e-4);
  EXPECT_NEAR(solve_lambda(9.0 * kPi / 8.0).lambda, 0.8008, 5e-4);
}

TEST(CornerExponent, LimitCases) {
  EXPECT_NEAR(solve_lambda(kPi).lambda, 1.0, 1e-12);
  EXPECT_NEAR(solve_lambda(2.0 * kPi).lambda, 0.5, 1e-12);
  EXPECT_THROW(solve_lambda(0.0), ValidationError);
  EXPECT_THROW(solve_lambda(7.0), ValidationError);
}

TEST(CornerExponent, ResidualAndMonotonicity) {
  double previous = 2.0;
  for (int i = 1; i < 100; ++i) {
    const double omega = kPi * (1.0 + i / 100.0);
    const CornerExponent c = solve_lambda(omega);
    EXPECT_LE(c.residual, 1e-12);
    EXPECT_LE(std::abs(std::sin(c.lambda * omega) + c.lambda * std::sin(omega)), 1e-12);
    EXPECT_GT(c.lambda, 0.5);
    EXPECT_LT(c.lambda, previous);
    previous = c.lambda;
  }
}

TEST(CornerExponent, FastEnough) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) solve_lambda(1.5 * kPi);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(ms / 100.0, 1.0);
}

// ---------------------------------------------------------------- profiles

TEST(Profiles, BoundaryConditionsOnBothRays) {
  for (double omega : {1.5 * kPi, 1.25 * kPi, 9.0 * kPi / 8.0, 1.8 * kPi}) {
    const double l = solve_lambda(omega).lambda;
    const XiValues at0 = xi_profiles(l, omega, 0.0);
    EXPECT_NEAR(at0.xi, 0.0, 1e-14);
    EXPECT_NEAR(at0.d1, 0.0, 1e-14);
    const XiValues atw = xi_profiles(l, omega, omega);
    EXPECT_LE(std::abs(atw.xi), 1e-10);
    EXPECT_LE(std::abs(atw.d1), 1e-10);
  }
}

TEST(Profiles, DerivativesMatchFiniteDifferences) {
  const double omega = 1.5 * kPi, l = solve_lambda(omega).lambda;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> t(0.1, omega - 0.1);
  for (int i = 0; i < 50; ++i) {
    const double theta = t(rng);
    const XiValues v = xi_profiles(l, omega, theta);
    const auto f = [&](int k) { return [&, k](double s) { return xi_derivative(l, omega, s, k); }; };
    EXPECT_NEAR(v.d1, d1(f(0), theta, 1e-3), 1e-8);
    EXPECT_NEAR(v.d2, d1(f(1), theta, 1e-3), 1e-8);
    EXPECT_NEAR(v.d3, d1(f(2), theta, 1e-3), 1e-8);
    EXPECT_NEAR(xi_derivative(l, omega, theta, 4), d1(f(3), theta, 1e-3), 1e-7);
  }
}

TEST(Profiles, AngularDerivativesOfChiAndGamma) {
  const ExactCornerSolution sol(1.25 * kPi, RegularPart::Zero);
  for (double theta : {0.3, 1.7, 3.0}) {
    const auto c1 = sol.chi1(theta), c2 = sol.chi2(theta);
    const auto g = sol.gamma(theta);
    EXPECT_NEAR(c1[1], d1([&](double s) { return sol.chi1(s)[0]; }, theta, 1e-3), 1e-9);
    EXPECT_NEAR(c1[2], d2([&](double s) { return sol.chi1(s)[0]; }, theta, 1e-3), 1e-6);
    EXPECT_NEAR(c2[1], d1([&](double s) { return sol.chi2(s)[0]; }, theta, 1e-3), 1e-9);
    EXPECT_NEAR(c2[2], d2([&](double s) { return sol.chi2(s)[0]; }, theta, 1e-3), 1e-6);
    EXPECT_NEAR(g[1], d1([&](double s) { return sol.gamma(s)[0]; }, theta, 1e-3), 1e-8);
  }
}

// ---------------------------------------------------------------- exact fields

class CornerFields : public ::testing::TestWithParam<std::tuple<double, RegularPart>> {};

TEST_P(CornerFields, DivergenceFree) {
  const auto [omega, regular] = GetParam();
  const ExactCornerSolution sol(omega, regular);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec2 x = sector_point(rng, omega);
    const Mat2 j = fd_jacobian([&](const Vec2& y) { return sol.velocity(y, 0.3); }, x, 1e-3);
    EXPECT_LE(std::abs(j(0, 0) + j(1, 1)), 1e-7);
  }
}

TEST_P(CornerFields, DerivativesMatchFiniteDifferences) {
  const auto [omega, regular] = GetParam();
  const ExactCornerSolution sol(omega, regular);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    const Vec2 x = sector_point(rng, omega);
    const double t = 0.2;
    const ExactFields f = sol.fields(x, t);
    const auto vel = [&](const Vec2& y) { return sol.velocity(y, t); };
    const auto pre = [&](const Vec2& y) { return sol.pressure(y, t); };
    const Mat2 j = fd_jacobian(vel, x, 1e-3);
    const double scale = std::sqrt(frobenius_sq(f.grad_u)) + 1.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(f.grad_u(a, b), j(a, b), 1e-6 * scale);
    const Vec2 lap = fd_laplacian(vel, x, 1e-3);
    EXPECT_NEAR(f.lap_u.x, lap.x, 1e-6 * (norm(f.lap_u) + 1.0));
    EXPECT_NEAR(f.lap_u.y, lap.y, 1e-6 * (norm(f.lap_u) + 1.0));
    const Vec2 gp = fd_gradient(pre, x, 1e-3);
    EXPECT_NEAR(f.grad_p.x, gp.x, 1e-6 * (norm(f.grad_p) + 1.0));
    EXPECT_NEAR(f.grad_p.y, gp.y, 1e-6 * (norm(f.grad_p) + 1.0));
    const Vec2 ut = d1([&](double s) { return sol.velocity(x, s); }, t, 1e-3);
    EXPECT_NEAR(f.u_t.x, ut.x, 1e-8);
    EXPECT_NEAR(f.u_t.y, ut.y, 1e-8);
    EXPECT_NEAR(f.p, sol.pressure(x, t), 1e-14 * (std::abs(f.p) + 1.0));
  }
}

TEST_P(CornerFields, ForcingMatchesFiniteDifferenceAssembly) {
  const auto [omega, regular] = GetParam();
  const ExactCornerSolution sol(omega, regular);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const Vec2 x = sector_point(rng, omega);
    const double t = 0.4;
    const auto vel = [&](const Vec2& y) { return sol.velocity(y, t); };
    const Vec2 u = vel(x);
    const Vec2 ut = d1([&](double s) { return sol.velocity(x, s); }, t, 1e-3);
    const Mat2 j = fd_jacobian(vel, x, 1e-3);
    const double w = j(1, 0) - j(0, 1);
    const Vec2 fd = ut - fd_laplacian(vel, x, 1e-3) + Vec2{-w * u.y, w * u.x} +
                    fd_gradient([&](const Vec2& y) { return sol.pressure(y, t); }, x, 1e-3);
    const Vec2 f = forcing(sol, x, t);
    EXPECT_LE(norm(f - fd), 1e-5 * norm(f)) << x.x << " " << x.y;
  }
}

INSTANTIATE_TEST_SUITE_P(Angles, CornerFields,
                         ::testing::Combine(::testing::Values(1.5 * kPi, 1.25 * kPi, 9.0 * kPi / 8.0),
                                            ::testing::Values(RegularPart::Zero, RegularPart::Trig)));

TEST(CornerSolution, SingularPairIsInStokesEquilibrium) {
  for (double omega : {1.5 * kPi, 1.25 * kPi, 9.0 * kPi / 8.0}) {
    const ExactCornerSolution sol(omega, RegularPart::Zero);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
      const Vec2 x = sector_point(rng, omega);
      const Vec2 lap = fd_laplacian([&](const Vec2& y) { return sol.singular_velocity(y); }, x, 1e-3);
      const Vec2 gp = fd_gradient([&](const Vec2& y) { return sol.singular_pressure(y); }, x, 1e-3);
      EXPECT_LE(norm(gp - lap), 1e-5 * norm(lap));
      // with the Stokes part cancelling, f = u_t + curl u x u
      const ExactFields f = sol.fields(x, 0.1);
      const double w = f.grad_u(1, 0) - f.grad_u(0, 1);
      const Vec2 expect = f.u_t + Vec2{-w * f.u.y, w * f.u.x};
      EXPECT_LE(norm(forcing(sol, x, 0.1) - expect), 1e-9 * (norm(f.lap_u) + 1.0));
    }
  }
}

TEST(CornerSolution, NoSlipRaysAndTimeFactor) {
  const double omega = 1.5 * kPi;
  const ExactCornerSolution sol(omega, RegularPart::Zero);
  for (double r : {0.01, 0.3, 1.0}) {
    EXPECT_LE(norm(sol.velocity({r, 0.0}, 0.0)), 1e-15);
    EXPECT_LE(norm(sol.velocity({r * std::cos(omega), r * std::sin(omega)}, 0.0)), 1e-10);
  }
  EXPECT_EQ(norm(sol.velocity({0.0, 0.0}, 0.7)), 0.0);
  const Vec2 x{-0.3, 0.45};
  for (double t : {0.0, 0.25, 1.0}) {
    const Vec2 a = sol.velocity(x, t), b = sol.velocity(x, 0.0) * std::exp(t);
    EXPECT_NEAR(a.x, b.x, 1e-14);
    EXPECT_NEAR(a.y, b.y, 1e-14);
  }
  const ExactCornerSolution frozen(omega, RegularPart::Trig, TimeFactor::Frozen);
  EXPECT_EQ(frozen.velocity(x, 0.9).x, frozen.velocity(x, 0.0).x);
  EXPECT_EQ(norm(frozen.fields(x, 0.9).u_t), 0.0);
}

TEST(CornerSolution, RejectsOriginAndConvexAngles) {
  const ExactCornerSolution sol(1.5 * kPi, RegularPart::Zero);
  EXPECT_THROW(sol.fields({0.0, 0.0}, 0.0), ValidationError);
  EXPECT_THROW(forcing(sol, {0.0, 0.0}, 0.0), ValidationError);
  EXPECT_THROW(ExactCornerSolution(kPi, RegularPart::Zero), ValidationError);
}

TEST(CornerSolution, BoundaryFluxVanishes) {
  for (DomainKind kind : {DomainKind::Omega1, DomainKind::Omega2, DomainKind::Omega3}) {
    const DomainSpec d = build_domain(kind);
    for (RegularPart regular : {RegularPart::Zero, RegularPart::Trig}) {
      const ExactCornerSolution sol(d.corner_angle, regular);
      double flux = 0.0;
      for (std::size_t i = 0; i < d.vertices.size(); ++i) {
        const Vec2 a = d.vertices[i], b = d.vertices[(i + 1) % d.vertices.size()];
        const Vec2 n{(b - a).y, -(b - a).x};  // outward for a counterclockwise polygon, scaled by |b - a|
        flux += boost::math::quadrature::gauss<double, 30>::integrate(
            [&](double s) { return dot(sol.velocity(a + s * (b - a), 0.2), n); }, 0.0, 1.0);
      }
      EXPECT_LE(std::abs(flux), 1e-8) << to_string(kind);
    }
  }
}

TEST(CornerSolution, WeightedPressureNormIsQuadratureStable) {
  const double omega = 1.5 * kPi;
  const ExactCornerSolution sol(omega, RegularPart::Zero);
  const double nu = 0.8;  // > 1 - lambda
  std::vector<double> norms;
  for (double h : {0.25, 0.125}) {
    const Discretization disc(barycentric_split(triangulate(build_domain(DomainKind::Omega1), h)),
                              WeightParams{nu, 0.0, 0.0, 0.03});
    norms.push_back(weighted_l2_norm(disc, [&](const Vec2& x) { return sol.pressure(x, 0.0); }, nu));
  }
  EXPECT_TRUE(std::isfinite(norms[0]));
  EXPECT_NEAR(norms[0], norms[1], 1e-3 * norms[1]);
}

TEST(QuadraticSolution, DivergenceFreeAndForcing) {
  const QuadraticSolution sol;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x{u(rng), u(rng)};
    const ExactFields f = sol.fields(x, 0.3);
    EXPECT_NEAR(f.grad_u(0, 0) + f.grad_u(1, 1), 0.0, 1e-15);
    const Vec2 lap = fd_laplacian([&](const Vec2& y) { return sol.velocity(y, 0.3); }, x, 1e-2);
    EXPECT_NEAR(lap.x, f.lap_u.x, 1e-9);
    EXPECT_NEAR(lap.y, f.lap_u.y, 1e-9);
  }
}

TEST(ZeroSolution, ZeroForcing) {
  const ZeroSolution sol;
  const Vec2 f = forcing(sol, {0.2, 0.4}, 1.0);
  EXPECT_EQ(f.x, 0.0);
  EXPECT_EQ(f.y, 0.0);
}

TEST(PolarAngle, Range) {
  EXPECT_NEAR(polar_angle({1.0, 0.0}), 0.0, 1e-16);
  EXPECT_NEAR(polar_angle({0.0, -1.0}), 1.5 * kPi, 1e-15);
  EXPECT_NEAR(polar_angle({-1.0, -1e-18}), kPi, 1e-15);
  EXPECT_EQ(parse_regular_part(to_string(RegularPart::Trig)), RegularPart::Trig);
  EXPECT_THROW(parse_regular_part("cubic"), ValidationError);
}
