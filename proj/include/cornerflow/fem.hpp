#pragma once

#include <Eigen/Sparse>
#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cornerflow/dofs.hpp"
#include "cornerflow/geometry.hpp"
#include "cornerflow/mesh.hpp"
#include "cornerflow/quadrature.hpp"
#include "cornerflow/weight.hpp"

namespace cornerflow {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using ScalarSampler = std::function<double(const Vec2&)>;
using VectorSampler = std::function<Vec2(const Vec2&)>;

/// One quadrature point with the P2/P1 basis and the weight factors of the
/// method already evaluated. Velocity trial functions are
/// phi_k = chi_k * rho^{-nu*}; velocity test functions carry the envelope,
/// tau_m = rho^{2nu} phi_m = chi_m * rho^{2nu-nu*}; pressure functions are
/// psi_l = theta_l * rho^{-mu*}.
struct QuadPoint {
  Vec2 x;
  double weight = 0.0;  // physical
  std::array<double, 6> chi{};
  std::array<Vec2, 6> dchi{};  // physical gradients
  std::array<double, 3> theta{};

  double rho = 0.0;
  double vel_scale = 1.0;  // rho^{-nu*}
  Vec2 vel_scale_grad;
  double test_env = 1.0;  // rho^{2nu - nu*}
  Vec2 test_env_grad;
  double p_scale = 1.0;     // rho^{-mu*}
  double p_test_env = 1.0;  // rho^{2nu - mu*}
  double gauge = 1.0;       // rho^{nu - mu*}
  double rho_nu = 1.0;      // rho^{nu}

  double phi(int k) const { return chi[k] * vel_scale; }
  Vec2 grad_phi(int k) const { return vel_scale * dchi[k] + chi[k] * vel_scale_grad; }
  double tau(int k) const { return chi[k] * test_env; }
  Vec2 grad_tau(int k) const { return test_env * dchi[k] + chi[k] * test_env_grad; }
  double psi(int l) const { return theta[l] * p_scale; }
};

/// Mesh, DOFs, weight parameters and quadrature of one weighted P2/P1-disc
/// discretization, plus the parameter-independent element matrices reused
/// by every Oseen solve. Immutable after construction.
class Discretization {
 public:
  Discretization(Mesh mesh, const WeightParams& params, int quadrature_degree = kDefaultQuadratureDegree,
                 int grading_levels = kDefaultGradingLevels);

  const Mesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const WeightParams& params() const { return params_; }
  int quadrature_degree() const { return degree_; }

  std::size_t num_points() const { return points_.size(); }
  std::span<const QuadPoint> points() const { return points_; }
  std::span<const QuadPoint> points(Index element) const {
    return std::span<const QuadPoint>(points_).subspan(offsets_[element], offsets_[element + 1] - offsets_[element]);
  }
  std::size_t point_offset(Index element) const { return offsets_[element]; }

  /// Element containing x (closed), or nullopt.
  std::optional<Index> locate(const Vec2& x) const;

  // Element matrices; local velocity index d * 6 + k for component d.
  using Local6 = std::array<std::array<double, 6>, 6>;
  using LocalB = std::array<std::array<double, 3>, 12>;  // [velocity test][pressure trial]
  using LocalC = std::array<std::array<double, 12>, 3>;  // [pressure test][velocity trial]
  const Local6& mass(Index e) const { return mass_[e]; }
  const Local6& stiffness(Index e) const { return stiffness_[e]; }
  const LocalB& div_b(Index e) const { return div_b_[e]; }
  const LocalC& div_c(Index e) const { return div_c_[e]; }
  const std::array<double, 3>& gauge(Index e) const { return gauge_[e]; }

 private:
  void build_points();
  void build_element_matrices();
  void build_locator();

  Mesh mesh_;
  DofMap dofs_;
  WeightParams params_;
  int degree_;
  int levels_;
  std::vector<std::size_t> offsets_;
  std::vector<QuadPoint> points_;

  std::vector<Local6> mass_;
  std::vector<Local6> stiffness_;
  std::vector<LocalB> div_b_;
  std::vector<LocalC> div_c_;
  std::vector<std::array<double, 3>> gauge_;

  // uniform bucket grid for point location
  Vec2 grid_min_;
  double grid_cell_ = 1.0;
  int grid_nx_ = 1, grid_ny_ = 1;
  std::vector<std::vector<Index>> buckets_;
};

/// Rotation matrix block R(W)_{mk} = int W phi_k tau_m for one element.
Discretization::Local6 element_rotation(const Discretization& disc, Index e, std::span<const double> vorticity);

/// Form a: theta * mass + stiffness + rotation W x w, all test functions in
/// the rho^{2nu} envelope. `vorticity` holds W at every quadrature point
/// (empty means W = 0). Size 2Nv x 2Nv over all velocity nodes.
SparseMatrix assemble_a(const Discretization& disc, double theta, std::span<const double> vorticity = {});

/// Forms b (rows: velocity tests, cols: pressure) and c (rows: pressure tests,
/// cols: velocity).
struct DivergenceBlocks {
  SparseMatrix B;
  SparseMatrix C;
};
DivergenceBlocks assemble_b_c(const Discretization& disc);

/// Weak right-hand-side contribution of a known discrete field:
///   mass * int u.tau + gradient * int grad u : grad tau
///   + rotation * int (W x u).tau + pressure_div * int p div tau
struct WeakTerm {
  const Vector* velocity = nullptr;  // hatted, length 2Nv
  double mass = 0.0;
  double gradient = 0.0;
  double rotation = 0.0;
  const Vector* pressure = nullptr;  // hatted, length Np
  double pressure_div = 0.0;
};

/// Functional l(z) = int F . tau plus weak terms; one entry per velocity dof.
Vector assemble_l(const Discretization& disc, const VectorSampler& forcing, std::span<const WeakTerm> extra = {},
                  std::span<const double> vorticity = {});

/// Pressure gauge vector g_l = int rho^nu psi_l.
Vector assemble_gauge(const Discretization& disc);

struct SaddleSystem {
  SparseMatrix A;  // 2Nv x 2Nv
  SparseMatrix B;  // 2Nv x Np
  SparseMatrix C;  // Np x 2Nv
  Vector rhs;      // 2Nv
  Vector gauge;    // Np
};

/// Square system after Dirichlet elimination with one gauge multiplier:
///   [A_II  B_I  0] [v_I]   [l_I - A_IB g_B]
///   [C_I   0    g] [q  ] = [   -C_B g_B   ]
///   [0     g^T  0] [mu ]   [      0       ]
/// Testing the pressure rows against the zero-mean subspace is equivalent to
/// the multiplier column g. The dense border (g) is kept apart from the sparse
/// core so that the factorization never sees a dense row or column.
struct ReducedSystem {
  SparseMatrix core;                             // [[A_II, B_I], [C_I, 0]]
  Vector border;                                 // (0, g) over the core unknowns
  Vector rhs;                                    // core rows; the border row has right-hand side 0
  std::vector<std::ptrdiff_t> velocity_unknown;  // full velocity dof -> reduced index, -1 on boundary
  Vector boundary_hat;                           // full-length hatted velocity with boundary values set
  std::size_t num_velocity_unknowns = 0;
  std::size_t num_pressure = 0;
  std::size_t size() const { return num_velocity_unknowns + num_pressure + 1; }

  /// The full bordered matrix (for inspection and tests).
  SparseMatrix bordered_matrix() const;
  /// Full right-hand side including the border row.
  Vector bordered_rhs() const;
};

/// Hatted Dirichlet values g(M_i) * rho^{nu*}(M_i) on boundary nodes (zero elsewhere).
/// A boundary node at the origin with nu* > 0 accepts only g = 0.
Vector boundary_hat_values(const Discretization& disc, const VectorSampler& g);

ReducedSystem apply_bc_and_gauge(const SaddleSystem& system, const Discretization& disc, const VectorSampler& g);
ReducedSystem apply_bc_and_gauge(const SaddleSystem& system, const Discretization& disc, const Vector& boundary_hat);

/// Splits a reduced solution into full hatted velocity, pressure and multiplier.
struct HattedSolution {
  Vector velocity;  // 2Nv
  Vector pressure;  // Np
  double multiplier = 0.0;
};
HattedSolution expand_solution(const ReducedSystem& reduced, const Vector& x);

/// `row col value` lines with 17 significant digits.
void write_triplets(std::ostream& out, const SparseMatrix& m);

/// Value and gradient of a hatted discrete velocity / pressure at a quadrature point.
struct PointValues {
  Vec2 u;
  Mat2 grad_u;  // grad_u(i, j) = d u_i / d x_j
  double p = 0.0;
};
PointValues evaluate_at(const Discretization& disc, Index element, const QuadPoint& qp, const Vector* velocity_hat,
                        const Vector* pressure_hat);

/// Scalar curl d u2/dx1 - d u1/dx2 of a hatted velocity at every quadrature point.
std::vector<double> curl_at_points(const Discretization& disc, const Vector& velocity_hat);

}  // namespace cornerflow
