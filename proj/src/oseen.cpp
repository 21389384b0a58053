#include "cornerflow/oseen.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <ostream>

#include "cornerflow/basis.hpp"
#include "cornerflow/error.hpp"

namespace cornerflow {

namespace {

double recover(double hat, const Vec2& node, double sigma, double delta) {
  if (sigma == 0.0) return hat;
  if (node.x == 0.0 && node.y == 0.0) {
    if (hat == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), hat);
  }
  return hat * rho_pow_grad(node, -sigma, delta).first;
}

}  // namespace

DiscreteSolution make_solution(const Discretization& disc, Vector velocity_hat, Vector pressure_hat, double time) {
  const DofMap& dofs = disc.dofs();
  const WeightParams& p = disc.params();
  const Index nv = dofs.num_velocity_nodes();
  if (static_cast<Index>(velocity_hat.size()) != 2 * nv ||
      static_cast<Index>(pressure_hat.size()) != dofs.num_pressure_dofs()) {
    throw ValidationError("make_solution: coefficient vectors do not match the discretization");
  }
  DiscreteSolution s;
  s.velocity_hat = std::move(velocity_hat);
  s.pressure_hat = std::move(pressure_hat);
  s.time = time;
  s.velocity.resize(nv);
  for (Index i = 0; i < nv; ++i) {
    const Vec2& m = dofs.velocity_nodes[i];
    s.velocity[i] = {recover(s.velocity_hat[static_cast<Eigen::Index>(i)], m, p.nu_star, p.delta),
                     recover(s.velocity_hat[static_cast<Eigen::Index>(nv + i)], m, p.nu_star, p.delta)};
  }
  s.pressure.resize(dofs.num_pressure_dofs());
  for (Index j = 0; j < s.pressure.size(); ++j) {
    s.pressure[j] =
        recover(s.pressure_hat[static_cast<Eigen::Index>(j)], pressure_node(disc.mesh(), j), p.mu_star, p.delta);
  }
  return s;
}

OseenSolver::OseenSolver(const Discretization& disc, double tol)
    : disc_(disc), blocks_(assemble_b_c(disc)), gauge_(assemble_gauge(disc)), solver_(tol) {}

DiscreteSolution OseenSolver::solve(const OseenProblem& problem, double time) {
  if (!(problem.theta >= 0.0)) throw ValidationError(fmt::format("Oseen theta must be >= 0, got {}", problem.theta));
  SaddleSystem system;
  system.A = assemble_a(disc_, problem.theta, problem.vorticity);
  system.B = blocks_.B;
  system.C = blocks_.C;
  system.rhs = assemble_l(disc_, problem.forcing, problem.weak_terms, problem.vorticity);
  system.gauge = gauge_;
  const VectorSampler zero = [](const Vec2&) { return Vec2{}; };
  const ReducedSystem reduced = apply_bc_and_gauge(system, disc_, problem.boundary ? problem.boundary : zero);
  SolveReport report;
  const Vector x = solver_.solve_bordered(reduced.core, reduced.border, reduced.rhs, &report);
  HattedSolution hatted = expand_solution(reduced, x);
  DiscreteSolution s = make_solution(disc_, std::move(hatted.velocity), std::move(hatted.pressure), time);
  s.multiplier = hatted.multiplier;
  s.report = report;
  return s;
}

DiscreteSolution solve_oseen(const OseenProblem& problem, const Discretization& disc, double tol) {
  OseenSolver solver(disc, tol);
  return solver.solve(problem);
}

IncompressibilityResidual incompressibility_residual(const OseenSolver& solver, const DiscreteSolution& solution) {
  const Vector r = solver.blocks().C * solution.velocity_hat;
  const Vector& g = solver.gauge();
  const Vector projected = r - g * (g.dot(r) / g.dot(g));
  return {r.cwiseAbs().maxCoeff(), projected.cwiseAbs().maxCoeff()};
}

double pressure_gauge(const OseenSolver& solver, const DiscreteSolution& solution) {
  return solver.gauge().dot(solution.pressure_hat);
}

PointValues eval_discrete(const Discretization& disc, const DiscreteSolution& solution, const Vec2& x) {
  const auto element = disc.locate(x);
  if (!element) throw ValidationError(fmt::format("point ({}, {}) is outside the mesh", x.x, x.y));
  const Index e = *element;
  const auto tri = disc.mesh().corners(e);
  const Vec2 ref = AffineMap(tri).to_reference(x);
  const WeightParams& p = disc.params();
  const auto phi = weighted_basis_p2(tri, ref, p.nu_star, p.delta);
  const auto psi = weighted_basis_p1(tri, ref, p.mu_star, p.delta);
  const auto& nodes = disc.dofs().element_velocity[e];
  const Index nv = disc.dofs().num_velocity_nodes();
  PointValues out;
  for (int d = 0; d < 2; ++d) {
    double value = 0.0;
    Vec2 grad;
    for (int k = 0; k < 6; ++k) {
      const double c = solution.velocity_hat[static_cast<Eigen::Index>(d * nv + nodes[k])];
      value += c * phi[k].value;
      grad += c * phi[k].grad;
    }
    (d == 0 ? out.u.x : out.u.y) = value;
    out.grad_u(d, 0) = grad.x;
    out.grad_u(d, 1) = grad.y;
  }
  for (int l = 0; l < 3; ++l) {
    out.p += solution.pressure_hat[static_cast<Eigen::Index>(DofMap::pressure_dof(e, l))] * psi[l].value;
  }
  return out;
}

void write_velocity_snapshot(std::ostream& out, const Discretization& disc, const DiscreteSolution& solution) {
  out << "x1,x2,v1,v2\n";
  const auto& nodes = disc.dofs().velocity_nodes;
  for (Index i = 0; i < nodes.size(); ++i) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", nodes[i].x, nodes[i].y, solution.velocity[i].x,
                       solution.velocity[i].y);
  }
}

void write_pressure_snapshot(std::ostream& out, const Discretization& disc, const DiscreteSolution& solution) {
  out << "element,vertex,q\n";
  for (Index j = 0; j < solution.pressure.size(); ++j) {
    out << fmt::format("{},{},{:.17g}\n", j / 3, j % 3, solution.pressure[j]);
  }
  (void)disc;
}

}  // namespace cornerflow
