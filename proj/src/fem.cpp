#include "cornerflow/fem.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cornerflow/basis.hpp"
#include "cornerflow/error.hpp"

namespace cornerflow {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& triplets) {
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

double pow_weight(double r, double alpha) {
  if (alpha == 0.0) return 1.0;
  return std::pow(r, alpha);
}

}  // namespace

Discretization::Discretization(Mesh mesh, const WeightParams& params, int quadrature_degree, int grading_levels)
    : mesh_(std::move(mesh)), params_(params), degree_(quadrature_degree), levels_(grading_levels) {
  params_.validate();
  dofs_ = build_dofs(mesh_);
  build_points();
  build_element_matrices();
  build_locator();
}

void Discretization::build_points() {
  const QuadratureAssignment qa = build_quadrature(mesh_, params_.delta, degree_, levels_);
  const double delta = params_.delta;
  const double nu = params_.nu;
  const double nu_star = params_.nu_star;
  const double mu_star = params_.mu_star;

  offsets_.assign(mesh_.num_triangles() + 1, 0);
  for (Index e = 0; e < mesh_.num_triangles(); ++e) offsets_[e + 1] = offsets_[e] + qa.rule(e).size();
  points_.resize(offsets_.back());

  for (Index e = 0; e < mesh_.num_triangles(); ++e) {
    const auto tri = mesh_.corners(e);
    const AffineMap map(tri);
    const QuadratureRule& rule = qa.rule(e);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      QuadPoint& p = points_[offsets_[e] + q];
      const Vec2& ref = rule.points[q];
      p.x = map.to_physical(ref);
      p.weight = rule.weights[q] * std::abs(map.det);
      const P2Values p2 = ref_basis_p2(ref);
      const P1Values p1 = ref_basis_p1(ref);
      p.chi = p2.value;
      for (int k = 0; k < 6; ++k) p.dchi[k] = map.physical_gradient(p2.grad[k]);
      p.theta = p1.value;

      p.rho = rho(p.x, delta);
      std::tie(p.vel_scale, p.vel_scale_grad) = rho_pow_grad(p.x, -nu_star, delta);
      std::tie(p.test_env, p.test_env_grad) = rho_pow_grad(p.x, 2.0 * nu - nu_star, delta);
      p.p_scale = pow_weight(p.rho, -mu_star);
      p.p_test_env = pow_weight(p.rho, 2.0 * nu - mu_star);
      p.gauge = pow_weight(p.rho, nu - mu_star);
      p.rho_nu = pow_weight(p.rho, nu);
    }
  }
}

void Discretization::build_element_matrices() {
  const std::size_t ne = mesh_.num_triangles();
  mass_.assign(ne, {});
  stiffness_.assign(ne, {});
  div_b_.assign(ne, {});
  div_c_.assign(ne, {});
  gauge_.assign(ne, {});
  for (Index e = 0; e < ne; ++e) {
    auto& M = mass_[e];
    auto& K = stiffness_[e];
    auto& Bl = div_b_[e];
    auto& Cl = div_c_[e];
    auto& g = gauge_[e];
    for (const QuadPoint& qp : points(e)) {
      std::array<double, 6> phi, tau;
      std::array<Vec2, 6> gphi, gtau;
      for (int k = 0; k < 6; ++k) {
        phi[k] = qp.phi(k);
        tau[k] = qp.tau(k);
        gphi[k] = qp.grad_phi(k);
        gtau[k] = qp.grad_tau(k);
      }
      const double w = qp.weight;
      for (int m = 0; m < 6; ++m) {
        for (int k = 0; k < 6; ++k) {
          M[m][k] += w * tau[m] * phi[k];
          K[m][k] += w * dot(gtau[m], gphi[k]);
        }
      }
      for (int l = 0; l < 3; ++l) {
        const double psi = qp.psi(l);
        const double psi_env = qp.theta[l] * qp.p_test_env;
        for (int m = 0; m < 6; ++m) {
          Bl[m][l] -= w * psi * gtau[m].x;
          Bl[6 + m][l] -= w * psi * gtau[m].y;
          Cl[l][m] -= w * psi_env * gphi[m].x;
          Cl[l][6 + m] -= w * psi_env * gphi[m].y;
        }
        g[l] += w * qp.theta[l] * qp.gauge;
      }
    }
  }
}

void Discretization::build_locator() {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-lo.x, -lo.y};
  for (const Vec2& v : mesh_.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
  }
  const double extent = std::max(hi.x - lo.x, hi.y - lo.y);
  const double n_side = std::max(1.0, std::sqrt(static_cast<double>(mesh_.num_triangles())) / 2.0);
  grid_cell_ = std::max(extent / n_side, 1e-12);
  grid_min_ = lo;
  grid_nx_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / grid_cell_)) + 1);
  grid_ny_ = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / grid_cell_)) + 1);
  buckets_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
  for (Index t = 0; t < mesh_.num_triangles(); ++t) {
    const auto c = mesh_.corners(t);
    const double x0 = std::min({c[0].x, c[1].x, c[2].x}), x1 = std::max({c[0].x, c[1].x, c[2].x});
    const double y0 = std::min({c[0].y, c[1].y, c[2].y}), y1 = std::max({c[0].y, c[1].y, c[2].y});
    const int i0 = static_cast<int>((x0 - grid_min_.x) / grid_cell_);
    const int i1 = std::min(grid_nx_ - 1, static_cast<int>((x1 - grid_min_.x) / grid_cell_));
    const int j0 = static_cast<int>((y0 - grid_min_.y) / grid_cell_);
    const int j1 = std::min(grid_ny_ - 1, static_cast<int>((y1 - grid_min_.y) / grid_cell_));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * grid_nx_ + i].push_back(t);
  }
}

std::optional<Index> Discretization::locate(const Vec2& x) const {
  const int i = static_cast<int>(std::floor((x.x - grid_min_.x) / grid_cell_));
  const int j = static_cast<int>(std::floor((x.y - grid_min_.y) / grid_cell_));
  if (i < 0 || j < 0 || i >= grid_nx_ || j >= grid_ny_) return std::nullopt;
  constexpr double tol = 1e-12;
  for (Index t : buckets_[static_cast<std::size_t>(j) * grid_nx_ + i]) {
    const AffineMap map(mesh_.corners(t));
    const Vec2 r = map.to_reference(x);
    if (r.x >= -tol && r.y >= -tol && r.x + r.y <= 1.0 + tol) return t;
  }
  return std::nullopt;
}

Discretization::Local6 element_rotation(const Discretization& disc, Index e, std::span<const double> vorticity) {
  Discretization::Local6 R{};
  if (vorticity.empty()) return R;
  const std::size_t offset = disc.point_offset(e);
  const auto pts = disc.points(e);
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const QuadPoint& qp = pts[q];
    const double ww = qp.weight * vorticity[offset + q];
    if (ww == 0.0) continue;
    for (int m = 0; m < 6; ++m) {
      const double tm = ww * qp.tau(m);
      for (int k = 0; k < 6; ++k) R[m][k] += tm * qp.phi(k);
    }
  }
  return R;
}

SparseMatrix assemble_a(const Discretization& disc, double theta, std::span<const double> vorticity) {
  if (!vorticity.empty() && vorticity.size() != disc.num_points()) {
    throw ValidationError("assemble_a: vorticity must be sampled at every quadrature point");
  }
  const DofMap& dofs = disc.dofs();
  const Index nv = dofs.num_velocity_nodes();
  std::vector<Triplet> triplets;
  triplets.reserve(disc.mesh().num_triangles() * 4 * 36);
  for (Index e = 0; e < disc.mesh().num_triangles(); ++e) {
    const auto& nodes = dofs.element_velocity[e];
    const auto& M = disc.mass(e);
    const auto& K = disc.stiffness(e);
    const auto R = element_rotation(disc, e, vorticity);
    for (int m = 0; m < 6; ++m) {
      for (int k = 0; k < 6; ++k) {
        const double diag = theta * M[m][k] + K[m][k];
        const auto row = static_cast<Eigen::Index>(nodes[m]);
        const auto col = static_cast<Eigen::Index>(nodes[k]);
        triplets.emplace_back(row, col, diag);
        triplets.emplace_back(row + nv, col + nv, diag);
        // (W x w) = (-W w2, W w1)
        triplets.emplace_back(row + nv, col, R[m][k]);
        triplets.emplace_back(row, col + nv, -R[m][k]);
      }
    }
  }
  return from_triplets(2 * nv, 2 * nv, triplets);
}

DivergenceBlocks assemble_b_c(const Discretization& disc) {
  const DofMap& dofs = disc.dofs();
  const Index nv = dofs.num_velocity_nodes();
  const Index np = dofs.num_pressure_dofs();
  std::vector<Triplet> tb, tc;
  tb.reserve(disc.mesh().num_triangles() * 36);
  tc.reserve(disc.mesh().num_triangles() * 36);
  for (Index e = 0; e < disc.mesh().num_triangles(); ++e) {
    const auto& nodes = dofs.element_velocity[e];
    const auto& Bl = disc.div_b(e);
    const auto& Cl = disc.div_c(e);
    for (int d = 0; d < 2; ++d) {
      for (int m = 0; m < 6; ++m) {
        const auto vel = static_cast<Eigen::Index>(d * nv + nodes[m]);
        for (int l = 0; l < 3; ++l) {
          const auto pr = static_cast<Eigen::Index>(DofMap::pressure_dof(e, l));
          tb.emplace_back(vel, pr, Bl[6 * d + m][l]);
          tc.emplace_back(pr, vel, Cl[l][6 * d + m]);
        }
      }
    }
  }
  return {from_triplets(2 * nv, np, tb), from_triplets(np, 2 * nv, tc)};
}

PointValues evaluate_at(const Discretization& disc, Index element, const QuadPoint& qp, const Vector* velocity_hat,
                        const Vector* pressure_hat) {
  PointValues out;
  if (velocity_hat != nullptr) {
    const auto& nodes = disc.dofs().element_velocity[element];
    const Index nv = disc.dofs().num_velocity_nodes();
    for (int d = 0; d < 2; ++d) {
      double s = 0.0;
      Vec2 g;
      for (int k = 0; k < 6; ++k) {
        const double c = (*velocity_hat)[static_cast<Eigen::Index>(d * nv + nodes[k])];
        s += c * qp.chi[k];
        g += c * qp.dchi[k];
      }
      // u = rho^{-nu*} s, grad u = rho^{-nu*} grad s + s grad rho^{-nu*}
      const Vec2 grad = qp.vel_scale * g + s * qp.vel_scale_grad;
      if (d == 0)
        out.u.x = qp.vel_scale * s;
      else
        out.u.y = qp.vel_scale * s;
      out.grad_u(d, 0) = grad.x;
      out.grad_u(d, 1) = grad.y;
    }
  }
  if (pressure_hat != nullptr) {
    double s = 0.0;
    for (int l = 0; l < 3; ++l)
      s += (*pressure_hat)[static_cast<Eigen::Index>(DofMap::pressure_dof(element, l))] * qp.theta[l];
    out.p = qp.p_scale * s;
  }
  return out;
}

std::vector<double> curl_at_points(const Discretization& disc, const Vector& velocity_hat) {
  std::vector<double> curl(disc.num_points());
  for (Index e = 0; e < disc.mesh().num_triangles(); ++e) {
    const std::size_t offset = disc.point_offset(e);
    const auto pts = disc.points(e);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const PointValues v = evaluate_at(disc, e, pts[q], &velocity_hat, nullptr);
      curl[offset + q] = v.grad_u(1, 0) - v.grad_u(0, 1);
    }
  }
  return curl;
}

Vector assemble_l(const Discretization& disc, const VectorSampler& forcing, std::span<const WeakTerm> extra,
                  std::span<const double> vorticity) {
  const DofMap& dofs = disc.dofs();
  const Index nv = dofs.num_velocity_nodes();
  Vector rhs = Vector::Zero(static_cast<Eigen::Index>(2 * nv));
  for (const WeakTerm& term : extra) {
    if (term.rotation != 0.0 && vorticity.size() != disc.num_points()) {
      throw ValidationError("assemble_l: rotation weak term needs the vorticity at every quadrature point");
    }
  }
  for (Index e = 0; e < disc.mesh().num_triangles(); ++e) {
    const auto& nodes = dofs.element_velocity[e];
    const std::size_t offset = disc.point_offset(e);
    const auto pts = disc.points(e);
    std::array<double, 12> local{};
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const QuadPoint& qp = pts[q];
      Vec2 f = forcing ? forcing(qp.x) : Vec2{};
      Mat2 grad_coef;  // coefficient of grad tau
      for (const WeakTerm& term : extra) {
        const PointValues v = evaluate_at(disc, e, qp, term.velocity, term.pressure);
        if (term.velocity != nullptr) {
          f += term.mass * v.u;
          if (term.rotation != 0.0) {
            const double W = vorticity[offset + q];
            f += term.rotation * Vec2{-W * v.u.y, W * v.u.x};
          }
          grad_coef += term.gradient * v.grad_u;
        }
        if (term.pressure != nullptr) {
          grad_coef(0, 0) += term.pressure_div * v.p;
          grad_coef(1, 1) += term.pressure_div * v.p;
        }
      }
      const double w = qp.weight;
      for (int m = 0; m < 6; ++m) {
        const double t = qp.tau(m);
        const Vec2 gt = qp.grad_tau(m);
        local[m] += w * (f.x * t + grad_coef(0, 0) * gt.x + grad_coef(0, 1) * gt.y);
        local[6 + m] += w * (f.y * t + grad_coef(1, 0) * gt.x + grad_coef(1, 1) * gt.y);
      }
    }
    for (int m = 0; m < 6; ++m) {
      rhs[static_cast<Eigen::Index>(nodes[m])] += local[m];
      rhs[static_cast<Eigen::Index>(nv + nodes[m])] += local[6 + m];
    }
  }
  return rhs;
}

Vector assemble_gauge(const Discretization& disc) {
  Vector g(static_cast<Eigen::Index>(disc.dofs().num_pressure_dofs()));
  for (Index e = 0; e < disc.mesh().num_triangles(); ++e) {
    for (int l = 0; l < 3; ++l) g[static_cast<Eigen::Index>(DofMap::pressure_dof(e, l))] = disc.gauge(e)[l];
  }
  return g;
}

Vector boundary_hat_values(const Discretization& disc, const VectorSampler& g) {
  const DofMap& dofs = disc.dofs();
  const Index nv = dofs.num_velocity_nodes();
  const WeightParams& params = disc.params();
  Vector hat = Vector::Zero(static_cast<Eigen::Index>(2 * nv));
  for (Index i = 0; i < nv; ++i) {
    if (!dofs.velocity_on_boundary[i]) continue;
    const Vec2 x = dofs.velocity_nodes[i];
    const Vec2 value = g(x);
    const double scale = rho_pow_grad(x, params.nu_star, params.delta).first;
    if (scale == 0.0 && (std::abs(value.x) > 1e-14 || std::abs(value.y) > 1e-14)) {
      throw ValidationError(
          fmt::format("boundary value ({}, {}) at the origin is not representable with nu* = {} (the weighted basis "
                      "vanishes there)",
                      value.x, value.y, params.nu_star));
    }
    hat[static_cast<Eigen::Index>(i)] = value.x * scale;
    hat[static_cast<Eigen::Index>(nv + i)] = value.y * scale;
  }
  return hat;
}

ReducedSystem apply_bc_and_gauge(const SaddleSystem& system, const Discretization& disc, const VectorSampler& g) {
  return apply_bc_and_gauge(system, disc, boundary_hat_values(disc, g));
}

ReducedSystem apply_bc_and_gauge(const SaddleSystem& system, const Discretization& disc, const Vector& boundary_hat) {
  const DofMap& dofs = disc.dofs();
  const Index nv = dofs.num_velocity_nodes();
  const Index nvd = 2 * nv;
  const Index np = dofs.num_pressure_dofs();
  if (static_cast<Index>(system.A.rows()) != nvd || static_cast<Index>(system.B.cols()) != np ||
      static_cast<Index>(system.rhs.size()) != nvd || static_cast<Index>(system.gauge.size()) != np) {
    throw ValidationError("apply_bc_and_gauge: system dimensions do not match the discretization");
  }

  ReducedSystem red;
  red.boundary_hat = boundary_hat;
  red.velocity_unknown.assign(nvd, -1);
  std::ptrdiff_t next = 0;
  for (Index d = 0; d < 2; ++d)
    for (Index i = 0; i < nv; ++i)
      if (!dofs.velocity_on_boundary[i]) red.velocity_unknown[d * nv + i] = next++;
  red.num_velocity_unknowns = static_cast<std::size_t>(next);
  red.num_pressure = np;
  const auto nvu = static_cast<Eigen::Index>(red.num_velocity_unknowns);
  const auto n = static_cast<Eigen::Index>(red.size());

  red.rhs = Vector::Zero(n - 1);
  for (Index i = 0; i < nvd; ++i) {
    if (red.velocity_unknown[i] >= 0) red.rhs[red.velocity_unknown[i]] = system.rhs[static_cast<Eigen::Index>(i)];
  }
  red.border = Vector::Zero(n - 1);
  red.border.tail(static_cast<Eigen::Index>(np)) = system.gauge;

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(system.A.nonZeros() + system.B.nonZeros() + system.C.nonZeros()));
  for (Eigen::Index col = 0; col < system.A.outerSize(); ++col) {
    const auto cj = red.velocity_unknown[col];
    for (SparseMatrix::InnerIterator it(system.A, col); it; ++it) {
      const auto ri = red.velocity_unknown[it.row()];
      if (ri < 0) continue;
      if (cj >= 0)
        triplets.emplace_back(ri, cj, it.value());
      else
        red.rhs[ri] -= it.value() * boundary_hat[col];
    }
  }
  for (Eigen::Index col = 0; col < system.B.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(system.B, col); it; ++it) {
      const auto ri = red.velocity_unknown[it.row()];
      if (ri >= 0) triplets.emplace_back(ri, nvu + col, it.value());
    }
  }
  for (Eigen::Index col = 0; col < system.C.outerSize(); ++col) {
    const auto cj = red.velocity_unknown[col];
    for (SparseMatrix::InnerIterator it(system.C, col); it; ++it) {
      if (cj >= 0)
        triplets.emplace_back(nvu + it.row(), cj, it.value());
      else
        red.rhs[nvu + it.row()] -= it.value() * boundary_hat[col];
    }
  }
  red.core = from_triplets(red.size() - 1, red.size() - 1, triplets);
  return red;
}

SparseMatrix ReducedSystem::bordered_matrix() const {
  const Eigen::Index m = core.rows();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(core.nonZeros() + 2 * m));
  for (Eigen::Index col = 0; col < core.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(core, col); it; ++it) triplets.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < m; ++i) {
    if (border[i] == 0.0) continue;
    triplets.emplace_back(i, m, border[i]);
    triplets.emplace_back(m, i, border[i]);
  }
  return from_triplets(static_cast<std::size_t>(m + 1), static_cast<std::size_t>(m + 1), triplets);
}

Vector ReducedSystem::bordered_rhs() const {
  Vector r = Vector::Zero(rhs.size() + 1);
  r.head(rhs.size()) = rhs;
  return r;
}

HattedSolution expand_solution(const ReducedSystem& reduced, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != reduced.size()) throw ValidationError("expand_solution: size mismatch");
  HattedSolution s;
  s.velocity = reduced.boundary_hat;
  for (std::size_t i = 0; i < reduced.velocity_unknown.size(); ++i) {
    const auto r = reduced.velocity_unknown[i];
    if (r >= 0) s.velocity[static_cast<Eigen::Index>(i)] = x[r];
  }
  const auto nvu = static_cast<Eigen::Index>(reduced.num_velocity_unknowns);
  s.pressure = x.segment(nvu, static_cast<Eigen::Index>(reduced.num_pressure));
  s.multiplier = x[x.size() - 1];
  return s;
}

void write_triplets(std::ostream& out, const SparseMatrix& m) {
  for (Eigen::Index col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      out << fmt::format("{} {} {:.17g}\n", it.row(), it.col(), it.value());
    }
  }
}

}  // namespace cornerflow
