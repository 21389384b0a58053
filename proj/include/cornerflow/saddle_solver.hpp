#pragma once

#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>
#include <cstdint>
#include <string>

namespace cornerflow {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct SolveReport {
  double relative_residual = 0.0;  // ||rhs - M x|| / ||rhs||, recomputed after the solve
  int iterations = 0;              // refinement sweeps; 0 for a plain direct solve
  double wall_ms = 0.0;
  std::string solver;
};

inline constexpr double kDefaultSolverTolerance = 1e-10;

/// ||rhs - M x|| / ||rhs||; plain ||M x|| when rhs = 0.
double relative_residual(const SparseMatrix& m, const Vector& x, const Vector& rhs);

/// Sparse LU (UMFPACK) for the reduced saddle system with a few steps of
/// iterative refinement. The symbolic analysis is kept while consecutive
/// matrices share a sparsity pattern, which is the case across time steps.
class SaddleSolver {
 public:
  explicit SaddleSolver(double tol = kDefaultSolverTolerance, int max_refinement = 3);

  /// General square system. Throws NumericalError naming a zero pivot when
  /// the factorization fails and when the residual stays above tol (with the
  /// best residual reached).
  Vector solve(const SparseMatrix& m, const Vector& rhs, SolveReport* report = nullptr);

  /// Bordered system [[K, b], [b^T, 0]] [x; mu] = [f; 0] with sparse K and a
  /// dense column b. K itself may be singular in one direction (the pressure
  /// constants): one diagonal entry is shifted to make it regular, and the
  /// shift and the border are undone by a 2x2 correction. Returns [x; mu];
  /// the residual is that of the full bordered system.
  Vector solve_bordered(const SparseMatrix& core, const Vector& border, const Vector& rhs,
                        SolveReport* report = nullptr);

  double tolerance() const { return tol_; }

 private:
  void factor(const SparseMatrix& m);

  double tol_;
  int max_refinement_;
  Eigen::UmfPackLU<SparseMatrix> lu_;
  std::uint64_t pattern_key_ = 0;
  bool analyzed_ = false;
};

/// One-shot convenience wrapper.
Vector solve_saddle(const SparseMatrix& m, const Vector& rhs, double tol = kDefaultSolverTolerance,
                    SolveReport* report = nullptr);

}  // namespace cornerflow
