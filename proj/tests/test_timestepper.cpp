#include <gtest/gtest.h>

#include <cmath>

#include "cornerflow/analysis.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/manufactured.hpp"
#include "cornerflow/timestepper.hpp"

using namespace cornerflow;

namespace {

Mesh split_mesh(DomainKind kind, double h) { return barycentric_split(triangulate(build_domain(kind), h)); }

const Discretization& coarse_unweighted() {
  static const Discretization disc(split_mesh(DomainKind::Omega0, 0.25), WeightParams::unweighted());
  return disc;
}

SchemeConfig scheme(int id, double dt, double T) {
  SchemeConfig c;
  c.scheme = id;
  c.dt = dt;
  c.final_time = T;
  return c;
}

Vector nodal(const Discretization& disc, const std::function<Vec2(const Vec2&)>& f) {
  const auto nv = static_cast<Index>(disc.dofs().num_velocity_nodes());
  Vector out(2 * nv);
  for (Index i = 0; i < nv; ++i) {
    const Vec2 v = f(disc.dofs().velocity_nodes[i]);
    out[i] = v.x;
    out[i + nv] = v.y;
  }
  return out;
}

double final_velocity_error(int id, double dt, double T, const ExactSolution& sol, const Discretization& disc) {
  const TimeState s = run_transient(scheme(id, dt, T), sol, disc, 1e-12);
  return measure_errors(disc, s.u, s.p, sol, s.time).velocity;
}

}  // namespace

TEST(SchemeConfig, DefaultGamma) { EXPECT_NEAR(default_gamma(), 0.2928932188134524, 1e-15); }

TEST(SchemeConfig, StepCount) {
  EXPECT_EQ(scheme(1, 0.01, 0.5).steps(), 50);
  EXPECT_EQ(scheme(2, 0.04, 0.12).steps(), 3);
  EXPECT_THROW(scheme(1, 0.01, 0.105).steps(), ValidationError);
  EXPECT_THROW(scheme(3, 0.01, 0.1).steps(), ValidationError);
  EXPECT_THROW(scheme(1, 0.0, 0.1).steps(), ValidationError);
  EXPECT_THROW(scheme(1, 0.01, -0.1).steps(), ValidationError);
  SchemeConfig bad = scheme(2, 0.01, 0.1);
  bad.gamma = 1.0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Extrapolation, Examples) {
  TimeState s;
  s.u = Vector::Constant(3, 2.0);
  s.u_prev = s.u;
  EXPECT_EQ(extrapolate_U(s), s.u);
  s.u_prev = Vector::Constant(3, 1.0);
  EXPECT_EQ(extrapolate_U(s), Vector::Constant(3, 2.5));
}

TEST(Extrapolation, InitialStateUsesFirstLevelTwice) {
  const QuadraticSolution sol(TimeFactor::Frozen);
  const TimeState s = initial_state(coarse_unweighted(), sol);
  EXPECT_EQ(s.step, 0);
  EXPECT_EQ(s.time, 0.0);
  EXPECT_EQ(s.u, s.u_prev);
  EXPECT_LE((extrapolate_U(s) - s.u).cwiseAbs().maxCoeff(), 1e-15 * s.u.cwiseAbs().maxCoeff());
}

TEST(InitialState, InterpolatesQuadraticPairExactly) {
  const QuadraticSolution sol(TimeFactor::Frozen);
  const TimeState s = initial_state(coarse_unweighted(), sol);
  const StepError e = measure_errors(coarse_unweighted(), s.u, s.p, sol, 0.0);
  EXPECT_LE(e.velocity, 1e-12);
  EXPECT_LE(e.pressure, 1e-12);
}

class BothSchemes : public ::testing::TestWithParam<int> {};

TEST_P(BothSchemes, ZeroDataStaysZero) {
  const ZeroSolution sol;
  const TimeState s = run_transient(scheme(GetParam(), 0.05, 0.2), sol, coarse_unweighted(), 1e-12);
  EXPECT_EQ(s.step, 4);
  EXPECT_NEAR(s.time, 0.2, 1e-14);
  EXPECT_EQ(s.u.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.p.cwiseAbs().maxCoeff(), 0.0);
}

TEST_P(BothSchemes, FrozenQuadraticIsFixedPoint) {
  const QuadraticSolution sol(TimeFactor::Frozen);
  const TimeState s = run_transient(scheme(GetParam(), 0.05, 0.2), sol, coarse_unweighted(), 1e-12);
  const StepError e = measure_errors(coarse_unweighted(), s.u, s.p, sol, s.time);
  EXPECT_LE(e.velocity, 1e-9);
  EXPECT_LE(e.pressure, 1e-9);
}

TEST_P(BothSchemes, ObserverSeesEveryLevel) {
  const ZeroSolution sol;
  std::vector<int> steps;
  std::vector<double> times;
  run_transient(scheme(GetParam(), 0.1, 0.3), sol, coarse_unweighted(), 1e-12,
                [&](const TimeState& s, const SolveReport&, double wall_ms) {
                  steps.push_back(s.step);
                  times.push_back(s.time);
                  EXPECT_GE(wall_ms, 0.0);
                });
  ASSERT_EQ(steps, (std::vector<int>{0, 1, 2, 3}));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(times[k], 0.1 * k, 1e-14);
}

TEST_P(BothSchemes, IrrotationalStepIsLinear) {
  // curl U = 0 removes the only nonlinearity, so one step is linear in (state, data)
  const Discretization& disc = coarse_unweighted();
  TimeState s;
  s.u = nodal(disc, [](const Vec2& x) { return Vec2{2 * x.x, -2 * x.y}; });
  s.u_prev = s.u;
  s.p = Vector::Zero(static_cast<Eigen::Index>(disc.dofs().num_pressure_dofs()));
  ProblemData d;
  d.forcing = [](const Vec2& x, double t) { return Vec2{std::sin(x.x + t), x.y * x.y}; };
  d.boundary = [](const Vec2& x, double t) { return Vec2{2 * x.x * (1 + t), -2 * x.y * (1 + t)}; };
  TimeState s2 = s;
  s2.u *= 2.0;
  s2.u_prev *= 2.0;
  ProblemData d2;
  d2.forcing = [&d](const Vec2& x, double t) { return 2.0 * d.forcing(x, t); };
  d2.boundary = [&d](const Vec2& x, double t) { return 2.0 * d.boundary(x, t); };

  OseenSolver solver(disc, 1e-12);
  const double dt = 0.05;
  const bool first = GetParam() == 1;
  const StepResult r1 = first ? scheme1_step(solver, s, d, dt) : scheme2_step(solver, s, d, dt, default_gamma());
  const StepResult r2 = first ? scheme1_step(solver, s2, d2, dt) : scheme2_step(solver, s2, d2, dt, default_gamma());
  const double scale = r1.state.u.cwiseAbs().maxCoeff();
  ASSERT_GT(scale, 0.1);
  EXPECT_LE((r2.state.u - 2.0 * r1.state.u).cwiseAbs().maxCoeff(), 1e-9 * scale);
  EXPECT_LE((r2.state.p - 2.0 * r1.state.p).cwiseAbs().maxCoeff(), 1e-9 * r1.state.p.cwiseAbs().maxCoeff());
  EXPECT_EQ(r1.state.step, 1);
  EXPECT_NEAR(r1.state.time, dt, 1e-15);
  EXPECT_EQ(r1.state.u_prev, s.u);
  EXPECT_LE(r1.report.relative_residual, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Schemes, BothSchemes, ::testing::Values(1, 2));

TEST(TimeConvergence, FirstSchemeIsAtLeastFirstOrder) {
  // quadratic in space is reproduced exactly, so only the time error remains
  const QuadraticSolution sol;
  const double e1 = final_velocity_error(1, 0.05, 0.2, sol, coarse_unweighted());
  const double e2 = final_velocity_error(1, 0.025, 0.2, sol, coarse_unweighted());
  EXPECT_GT(std::log2(e1 / e2), 0.8) << e1 << " " << e2;
}

TEST(TimeConvergence, SecondSchemeIsSecondOrder) {
  const QuadraticSolution sol;
  const double e1 = final_velocity_error(2, 0.05, 0.2, sol, coarse_unweighted());
  const double e2 = final_velocity_error(2, 0.025, 0.2, sol, coarse_unweighted());
  EXPECT_GT(std::log2(e1 / e2), 1.7) << e1 << " " << e2;
}

TEST(RunTransient, RejectsUnrepresentableCornerValue) {
  // a corner boundary value that the weighted space cannot represent
  const Discretization disc(split_mesh(DomainKind::Omega1, 0.5), WeightParams{0.5, 0.5, 0.5, 0.03});
  struct Constant final : ExactSolution {
    ExactFields fields(const Vec2&, double) const override {
      ExactFields f;
      f.u = {1.0, 0.0};
      return f;
    }
    Vec2 velocity(const Vec2&, double) const override { return {1.0, 0.0}; }
    std::string describe() const override { return "constant"; }
  } sol;
  EXPECT_THROW(run_transient(scheme(1, 0.1, 0.1), sol, disc, 1e-12), Error);
}
