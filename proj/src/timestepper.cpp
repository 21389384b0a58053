#include "cornerflow/timestepper.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>

#include "cornerflow/error.hpp"
#include "cornerflow/norms.hpp"

namespace cornerflow {

namespace {

SolveReport worst(const SolveReport& a, const SolveReport& b) {
  SolveReport r = a.relative_residual >= b.relative_residual ? a : b;
  r.wall_ms = a.wall_ms + b.wall_ms;
  r.iterations = std::max(a.iterations, b.iterations);
  return r;
}

VectorSampler at_time(const TimeSampler& s, double t) {
  return [s, t](const Vec2& x) { return s(x, t); };
}

}  // namespace

double default_gamma() { return 1.0 - std::sqrt(2.0) / 2.0; }

int SchemeConfig::steps() const {
  validate();
  const double ratio = final_time / dt;
  return static_cast<int>(std::llround(ratio));
}

void SchemeConfig::validate() const {
  if (scheme != 1 && scheme != 2) throw ValidationError(fmt::format("scheme must be 1 or 2, got {}", scheme));
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError(fmt::format("gamma must lie in (0, 1), got {}", gamma));
  if (!(dt > 0.0) || !(final_time > 0.0)) throw ValidationError("time step and final time must be positive");
  const double ratio = final_time / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw ValidationError(fmt::format("final time {} is not an integer multiple of dt = {}", final_time, dt));
  }
}

ProblemData problem_data(const ExactSolution& solution) {
  return {[&solution](const Vec2& x, double t) { return forcing(solution, x, t); },
          [&solution](const Vec2& x, double t) { return solution.velocity(x, t); }};
}

Vector extrapolate_U(const TimeState& state) { return 1.5 * state.u - 0.5 * state.u_prev; }

TimeState initial_state(const Discretization& disc, const ExactSolution& solution) {
  const DofMap& dofs = disc.dofs();
  const WeightParams& p = disc.params();
  const Index nv = dofs.num_velocity_nodes();
  TimeState s;
  s.u = Vector::Zero(static_cast<Eigen::Index>(2 * nv));
  for (Index i = 0; i < nv; ++i) {
    const Vec2 x = dofs.velocity_nodes[i];
    const Vec2 v = solution.velocity(x, 0.0);
    const double scale = rho_pow_grad(x, p.nu_star, p.delta).first;
    s.u[static_cast<Eigen::Index>(i)] = v.x * scale;
    s.u[static_cast<Eigen::Index>(nv + i)] = v.y * scale;
  }
  s.u_prev = s.u;

  const double shift = weighted_mean(disc, [&](const Vec2& x) { return solution.pressure(x, 0.0); });
  s.p = Vector::Zero(static_cast<Eigen::Index>(dofs.num_pressure_dofs()));
  const double two_nu = 2.0 * p.nu;
  for (Index e = 0; e < disc.mesh().num_triangles(); ++e) {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const QuadPoint& qp : disc.points(e)) {
      const double w = qp.weight * (two_nu == 0.0 ? 1.0 : std::pow(qp.rho, two_nu));
      const double target = solution.pressure(qp.x, 0.0) - shift;
      for (int l = 0; l < 3; ++l) {
        b[l] += w * qp.psi(l) * target;
        for (int m = 0; m < 3; ++m) M(l, m) += w * qp.psi(l) * qp.psi(m);
      }
    }
    const Eigen::Vector3d q = M.ldlt().solve(b);
    for (int l = 0; l < 3; ++l) s.p[static_cast<Eigen::Index>(DofMap::pressure_dof(e, l))] = q[l];
  }
  return s;
}

StepResult scheme1_step(OseenSolver& solver, const TimeState& state, const ProblemData& data, double dt) {
  const Discretization& disc = solver.discretization();
  const double t0 = state.time;
  const double t1 = t0 + dt;
  const Vector U = extrapolate_U(state);

  OseenProblem problem;
  problem.theta = 2.0 / dt;
  problem.vorticity = curl_at_points(disc, U);
  problem.forcing = [&data, t0, t1](const Vec2& x) { return data.forcing(x, t0) + data.forcing(x, t1); };
  problem.weak_terms.push_back({.velocity = &state.u, .mass = 2.0 / dt, .gradient = -1.0, .rotation = -1.0});
  problem.boundary = at_time(data.boundary, t1);

  DiscreteSolution sol = solver.solve(problem, t1);
  StepResult out;
  out.state.u = std::move(sol.velocity_hat);
  out.state.u_prev = state.u;
  out.state.p = sol.pressure_hat - state.p;
  out.state.step = state.step + 1;
  out.state.time = t1;
  out.report = sol.report;
  return out;
}

StepResult scheme2_step(OseenSolver& solver, const TimeState& state, const ProblemData& data, double dt, double gamma) {
  const Discretization& disc = solver.discretization();
  const double t0 = state.time;
  const double tg = t0 + gamma * dt;
  const double t1 = t0 + dt;
  const double theta = 1.0 / (gamma * dt);
  const double c = (1.0 - gamma) / gamma;
  const Vector U = extrapolate_U(state);
  const std::vector<double> W = curl_at_points(disc, U);

  OseenProblem first;
  first.theta = theta;
  first.vorticity = W;
  first.forcing = at_time(data.forcing, tg);
  first.weak_terms.push_back({.velocity = &state.u, .mass = theta});
  first.boundary = at_time(data.boundary, tg);
  const DiscreteSolution mid = solver.solve(first, tg);

  OseenProblem second;
  second.theta = theta;
  second.vorticity = W;
  second.forcing = [&data, tg, t1, c](const Vec2& x) { return data.forcing(x, t1) + c * data.forcing(x, tg); };
  second.weak_terms.push_back({.velocity = &state.u, .mass = theta});
  second.weak_terms.push_back({.velocity = &mid.velocity_hat,
                               .gradient = -c,
                               .rotation = -c,
                               .pressure = &mid.pressure_hat,
                               .pressure_div = c});
  second.boundary = at_time(data.boundary, t1);
  DiscreteSolution end = solver.solve(second, t1);

  StepResult out;
  out.state.u = std::move(end.velocity_hat);
  out.state.u_prev = state.u;
  out.state.p = std::move(end.pressure_hat);
  out.state.step = state.step + 1;
  out.state.time = t1;
  out.report = worst(mid.report, end.report);
  return out;
}

TimeState run_transient(const SchemeConfig& config, const ExactSolution& solution, const Discretization& disc,
                        double tol, const StepObserver& observer) {
  const int n_steps = config.steps();
  const ProblemData data = problem_data(solution);
  OseenSolver solver(disc, tol);
  TimeState state = initial_state(disc, solution);
  if (observer) observer(state, SolveReport{}, 0.0);
  for (int n = 0; n < n_steps; ++n) {
    const auto start = std::chrono::steady_clock::now();
    StepResult result;
    try {
      result = config.scheme == 1 ? scheme1_step(solver, state, data, config.dt)
                                  : scheme2_step(solver, state, data, config.dt, config.gamma);
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("step {}: {}", n + 1, e.what()));
    }
    // keep t_n = n dt exactly rather than accumulating
    result.state.time = (n + 1) * config.dt;
    state = std::move(result.state);
    const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (observer) observer(state, result.report, wall);
  }
  return state;
}

}  // namespace cornerflow
