#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "cornerflow/fem.hpp"
#include "cornerflow/saddle_solver.hpp"

namespace cornerflow {

/// theta v - lap v + W x v + grad q = F, div v = 0, v = G on the boundary,
/// in the weighted discrete form. `vorticity` holds W at every quadrature
/// point of the discretization (empty means W = 0).
struct OseenProblem {
  double theta = 0.0;
  std::vector<double> vorticity;
  VectorSampler forcing;
  std::vector<WeakTerm> weak_terms;
  VectorSampler boundary;
};

struct DiscreteSolution {
  Vector velocity_hat;  // 2Nv
  Vector pressure_hat;  // Np
  double multiplier = 0.0;
  std::vector<Vec2> velocity;    // recovered nodal values v_i = v^_i rho^{-nu*}(M_i)
  std::vector<double> pressure;  // recovered nodal values q_j = q^_j rho^{-mu*}(N_j)
  double time = 0.0;
  SolveReport report;
};

/// Nodal recovery; a node at the origin with a positive exponent maps 0 to 0
/// and any other coefficient to a signed infinity.
DiscreteSolution make_solution(const Discretization& disc, Vector velocity_hat, Vector pressure_hat, double time = 0.0);

/// Reusable solver on one discretization: B, C and the gauge are assembled
/// once, the LU symbolic analysis is kept across solves.
class OseenSolver {
 public:
  explicit OseenSolver(const Discretization& disc, double tol = kDefaultSolverTolerance);

  DiscreteSolution solve(const OseenProblem& problem, double time = 0.0);

  const Discretization& discretization() const { return disc_; }
  const DivergenceBlocks& blocks() const { return blocks_; }
  const Vector& gauge() const { return gauge_; }

 private:
  const Discretization& disc_;
  DivergenceBlocks blocks_;
  Vector gauge_;
  SaddleSolver solver_;
};

DiscreteSolution solve_oseen(const OseenProblem& problem, const Discretization& disc,
                             double tol = kDefaultSolverTolerance);

/// Residual of the weighted incompressibility rows c(v_h, psi_l) - l_c.
struct IncompressibilityResidual {
  double raw_max = 0.0;        // max over all pressure basis functions
  double projected_max = 0.0;  // on the zero-gauge test subspace
};
IncompressibilityResidual incompressibility_residual(const OseenSolver& solver, const DiscreteSolution& solution);

/// Weighted gauge int rho^nu q_h dx.
double pressure_gauge(const OseenSolver& solver, const DiscreteSolution& solution);

/// Value and gradient of the discrete fields at an arbitrary point, through
/// the hatted coefficients and the weighted basis. Throws ValidationError
/// outside the mesh.
PointValues eval_discrete(const Discretization& disc, const DiscreteSolution& solution, const Vec2& x);

/// Snapshot CSVs: `x1,x2,v1,v2` per velocity node and `element,vertex,q` per pressure node.
void write_velocity_snapshot(std::ostream& out, const Discretization& disc, const DiscreteSolution& solution);
void write_pressure_snapshot(std::ostream& out, const Discretization& disc, const DiscreteSolution& solution);

}  // namespace cornerflow
