#pragma once

#include <functional>
#include <vector>

#include "cornerflow/manufactured.hpp"
#include "cornerflow/oseen.hpp"

namespace cornerflow {

/// Default substep fraction of the two-step scheme, 1 - sqrt(2)/2.
double default_gamma();

struct SchemeConfig {
  int scheme = 1;  // 1 or 2
  double gamma = default_gamma();
  double dt = 0.01;
  double final_time = 0.1;

  /// N with N * dt = T; throws ValidationError unless T / dt is an integer
  /// (to 1e-9 relative) and the other fields are in range.
  int steps() const;
  void validate() const;
};

/// Time-dependent data samplers.
using TimeSampler = std::function<Vec2(const Vec2&, double)>;
struct ProblemData {
  TimeSampler forcing;
  TimeSampler boundary;
};
ProblemData problem_data(const ExactSolution& solution);

/// Hatted coefficients of u^n, u^{n-1} and P^n; u^{-1} = u^0 at n = 0.
struct TimeState {
  Vector u;
  Vector u_prev;
  Vector p;
  int step = 0;
  double time = 0.0;
};

/// U^n = 3/2 u^n - 1/2 u^{n-1}, coefficientwise.
Vector extrapolate_U(const TimeState& state);

/// u^0 by hatted nodal interpolation, P^0 by rho^{2nu}-weighted elementwise
/// projection of the gauge-shifted exact pressure.
TimeState initial_state(const Discretization& disc, const ExactSolution& solution);

struct StepResult {
  TimeState state;
  SolveReport report;  // worst of the solves in the step
};

/// One step of the first scheme: unknowns (u^{n+1}, 2 Pbar^{n+1}) with
/// theta = 2 / dt; P^{n+1} = q - P^n.
StepResult scheme1_step(OseenSolver& solver, const TimeState& state, const ProblemData& data, double dt);

/// One step of the two-step scheme with substep fraction gamma.
StepResult scheme2_step(OseenSolver& solver, const TimeState& state, const ProblemData& data, double dt, double gamma);

/// Called after the initial state (step 0, report empty) and after every step.
using StepObserver = std::function<void(const TimeState&, const SolveReport&, double wall_ms)>;

/// Runs N steps from the initial state. Solver failures are rethrown as
/// NumericalError carrying the step index.
TimeState run_transient(const SchemeConfig& config, const ExactSolution& solution, const Discretization& disc,
                        double tol, const StepObserver& observer = {});

}  // namespace cornerflow
