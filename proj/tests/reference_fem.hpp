#pragma once

// Classical (unweighted) P2 / discontinuous P1 Galerkin assembly written from
// barycentric coordinates with its own quadrature. Shares nothing with the
// library beyond the mesh and the dof numbering, so it serves as an oracle.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "cornerflow/dofs.hpp"
#include "cornerflow/mesh.hpp"

namespace reference {

using cornerflow::DofMap;
using cornerflow::Index;
using cornerflow::Mesh;
using cornerflow::Vec2;

// Six-point symmetric rule, exact to degree 4 (weights relative to the area).
inline constexpr double kA1 = 0.445948490915965, kW1 = 0.223381589678011;
inline constexpr double kA2 = 0.091576213509771, kW2 = 0.109951743655322;

inline std::array<std::array<double, 3>, 6> rule_points() {
  return {{{kA1, kA1, 1 - 2 * kA1},
           {kA1, 1 - 2 * kA1, kA1},
           {1 - 2 * kA1, kA1, kA1},
           {kA2, kA2, 1 - 2 * kA2},
           {kA2, 1 - 2 * kA2, kA2},
           {1 - 2 * kA2, kA2, kA2}}};
}
inline double rule_weight(int q) { return q < 3 ? kW1 : kW2; }

struct ElementGeometry {
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;
};

inline ElementGeometry geometry(const std::array<Vec2, 3>& c) {
  ElementGeometry g;
  g.area = 0.5 * std::abs(cornerflow::cross(c[1] - c[0], c[2] - c[0]));
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = c[(i + 1) % 3], b = c[(i + 2) % 3];
    Vec2 n{a.y - b.y, b.x - a.x};
    if (cornerflow::dot(n, c[i] - a) < 0) n = -n;
    g.grad_lambda[i] = n * (1.0 / (2.0 * g.area));
  }
  return g;
}

// Values and physical gradients of the six P2 shape functions: vertices, then
// midpoints of edges (0,1), (1,2), (2,0).
inline void p2_shape(const std::array<double, 3>& l, const ElementGeometry& g, std::array<double, 6>& v,
                     std::array<Vec2, 6>& grad) {
  const int edge[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int i = 0; i < 3; ++i) {
    v[i] = l[i] * (2 * l[i] - 1);
    grad[i] = g.grad_lambda[i] * (4 * l[i] - 1);
  }
  for (int k = 0; k < 3; ++k) {
    const int i = edge[k][0], j = edge[k][1];
    v[3 + k] = 4 * l[i] * l[j];
    grad[3 + k] = g.grad_lambda[i] * (4 * l[j]) + g.grad_lambda[j] * (4 * l[i]);
  }
}

/// theta * mass + stiffness, both components.
inline Eigen::SparseMatrix<double> assemble_velocity(const Mesh& mesh, const DofMap& dofs, double theta) {
  const auto nv = static_cast<int>(dofs.num_velocity_nodes());
  std::vector<Eigen::Triplet<double>> t;
  for (Index e = 0; e < mesh.num_triangles(); ++e) {
    const ElementGeometry g = geometry(mesh.corners(e));
    for (int q = 0; q < 6; ++q) {
      std::array<double, 6> v;
      std::array<Vec2, 6> grad;
      p2_shape(rule_points()[q], g, v, grad);
      const double w = rule_weight(q) * g.area;
      for (int m = 0; m < 6; ++m) {
        for (int k = 0; k < 6; ++k) {
          const double val = w * (theta * v[m] * v[k] + cornerflow::dot(grad[m], grad[k]));
          const auto r = static_cast<int>(dofs.element_velocity[e][m]);
          const auto c = static_cast<int>(dofs.element_velocity[e][k]);
          t.emplace_back(r, c, val);
          t.emplace_back(r + nv, c + nv, val);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> out(2 * nv, 2 * nv);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

/// B_{(d,m), l} = -int theta_l d_d chi_m.
inline Eigen::SparseMatrix<double> assemble_divergence(const Mesh& mesh, const DofMap& dofs) {
  const auto nv = static_cast<int>(dofs.num_velocity_nodes());
  std::vector<Eigen::Triplet<double>> t;
  for (Index e = 0; e < mesh.num_triangles(); ++e) {
    const ElementGeometry g = geometry(mesh.corners(e));
    for (int q = 0; q < 6; ++q) {
      const auto l = rule_points()[q];
      std::array<double, 6> v;
      std::array<Vec2, 6> grad;
      p2_shape(l, g, v, grad);
      const double w = rule_weight(q) * g.area;
      for (int m = 0; m < 6; ++m) {
        const auto r = static_cast<int>(dofs.element_velocity[e][m]);
        for (int p = 0; p < 3; ++p) {
          const auto c = static_cast<int>(DofMap::pressure_dof(e, p));
          t.emplace_back(r, c, -w * l[p] * grad[m].x);
          t.emplace_back(r + nv, c, -w * l[p] * grad[m].y);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> out(2 * nv, static_cast<int>(dofs.num_pressure_dofs()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

/// int F . chi for a vector forcing.
inline Eigen::VectorXd assemble_load(const Mesh& mesh, const DofMap& dofs, const std::function<Vec2(const Vec2&)>& f) {
  const auto nv = static_cast<int>(dofs.num_velocity_nodes());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * nv);
  // degree-4 rule is not exact for non-polynomial forcing; callers use polynomials
  for (Index e = 0; e < mesh.num_triangles(); ++e) {
    const auto c = mesh.corners(e);
    const ElementGeometry g = geometry(c);
    for (int q = 0; q < 6; ++q) {
      const auto l = rule_points()[q];
      std::array<double, 6> v;
      std::array<Vec2, 6> grad;
      p2_shape(l, g, v, grad);
      const Vec2 x = c[0] * l[0] + c[1] * l[1] + c[2] * l[2];
      const Vec2 fx = f(x);
      const double w = rule_weight(q) * g.area;
      for (int m = 0; m < 6; ++m) {
        const auto r = static_cast<int>(dofs.element_velocity[e][m]);
        out[r] += w * v[m] * fx.x;
        out[r + nv] += w * v[m] * fx.y;
      }
    }
  }
  return out;
}

/// Dense reference solve of the Stokes-type problem theta u - lap u + grad p = f,
/// div u = 0, u = g on the boundary, int p = 0. Returns (velocity, pressure).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> solve(const Mesh& mesh, const DofMap& dofs, double theta,
                                                         const std::function<Vec2(const Vec2&)>& f,
                                                         const std::function<Vec2(const Vec2&)>& g) {
  const Eigen::MatrixXd A(assemble_velocity(mesh, dofs, theta));
  const Eigen::MatrixXd B(assemble_divergence(mesh, dofs));
  const Eigen::VectorXd l = assemble_load(mesh, dofs, f);
  const auto nv = static_cast<int>(dofs.num_velocity_nodes());
  const auto np = static_cast<int>(dofs.num_pressure_dofs());
  const int n = 2 * nv + np + 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  M.block(0, 0, 2 * nv, 2 * nv) = A;
  M.block(0, 2 * nv, 2 * nv, np) = B;
  M.block(2 * nv, 0, np, 2 * nv) = B.transpose();
  rhs.head(2 * nv) = l;
  // pressure mean: int theta_l = area / 3
  for (Index e = 0; e < mesh.num_triangles(); ++e) {
    const double a = mesh.area(e) / 3.0;
    for (int p = 0; p < 3; ++p) {
      const int j = 2 * nv + static_cast<int>(DofMap::pressure_dof(e, p));
      M(n - 1, j) = a;
      M(j, n - 1) = a;
    }
  }
  // Dirichlet rows
  for (int i = 0; i < nv; ++i) {
    if (!dofs.velocity_on_boundary[static_cast<Index>(i)]) continue;
    const Vec2 gv = g(dofs.velocity_nodes[static_cast<Index>(i)]);
    for (int d = 0; d < 2; ++d) {
      const int row = i + d * nv;
      M.row(row).setZero();
      M(row, row) = 1.0;
      rhs[row] = d == 0 ? gv.x : gv.y;
    }
  }
  const Eigen::VectorXd x = M.fullPivLu().solve(rhs);
  return {x.head(2 * nv), x.segment(2 * nv, np)};
}

}  // namespace reference
