#include "cornerflow/saddle_solver.hpp"

#include <fmt/format.h>

#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>
#include <functional>

#include "cornerflow/error.hpp"

namespace cornerflow {

namespace {

std::uint64_t pattern_hash(const SparseMatrix& m) {
  // FNV-1a over the compressed structure
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(m.rows()));
  mix(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index j = 0; j <= m.outerSize(); ++j) mix(static_cast<std::uint64_t>(m.outerIndexPtr()[j]));
  for (Eigen::Index k = 0; k < m.nonZeros(); ++k) mix(static_cast<std::uint64_t>(m.innerIndexPtr()[k]));
  return h;
}

// Locates the failure for the error message: an empty row or column first,
// otherwise the column SparseLU stops at.
std::string describe_singularity(const SparseMatrix& m) {
  std::vector<bool> row_used(static_cast<std::size_t>(m.rows()), false);
  for (Eigen::Index j = 0; j < m.outerSize(); ++j) {
    bool any = false;
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
      if (it.value() != 0.0) {
        any = true;
        row_used[static_cast<std::size_t>(it.row())] = true;
      }
    }
    if (!any) return fmt::format("zero pivot: column {} is empty", j);
  }
  for (std::size_t i = 0; i < row_used.size(); ++i) {
    if (!row_used[i]) return fmt::format("zero pivot: row {} is empty", i);
  }
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) return "zero pivot: " + lu.lastErrorMessage();
  return "factorization failed without a located zero pivot";
}

}  // namespace

double relative_residual(const SparseMatrix& m, const Vector& x, const Vector& rhs) {
  const Vector r = rhs - m * x;
  const double nb = rhs.norm();
  return nb > 0.0 ? r.norm() / nb : r.norm();
}

SaddleSolver::SaddleSolver(double tol, int max_refinement) : tol_(tol), max_refinement_(max_refinement) {
  if (!(tol >= 1e-14 && tol <= 1e-6)) {
    throw ValidationError(fmt::format("solver tolerance {} outside [1e-14, 1e-6]", tol));
  }
}

void SaddleSolver::factor(const SparseMatrix& m) {
  const std::uint64_t key = pattern_hash(m);
  if (!analyzed_ || key != pattern_key_) {
    lu_.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_AMD;
    lu_.analyzePattern(m);
    pattern_key_ = key;
    analyzed_ = lu_.info() == Eigen::Success;
    if (!analyzed_) throw NumericalError("symbolic analysis failed, " + describe_singularity(m));
  }
  lu_.factorize(m);
  if (lu_.info() != Eigen::Success) throw NumericalError("factorization failed, " + describe_singularity(m));
}

Vector SaddleSolver::solve(const SparseMatrix& m, const Vector& rhs, SolveReport* report) {
  const auto start = std::chrono::steady_clock::now();
  if (m.rows() != m.cols() || m.rows() != rhs.size()) {
    throw ValidationError(
        fmt::format("solve: matrix {}x{} and rhs {} do not form a square system", m.rows(), m.cols(), rhs.size()));
  }
  Vector x = Vector::Zero(rhs.size());
  double residual = 0.0;
  int sweeps = 0;
  if (m.rows() > 0) {
    factor(m);
    x = lu_.solve(rhs);
    residual = relative_residual(m, x, rhs);
    while (residual > tol_ && sweeps < max_refinement_) {
      const Vector candidate = x + Vector(lu_.solve(Vector(rhs - m * x)));
      const double next = relative_residual(m, candidate, rhs);
      ++sweeps;
      if (!(next < residual)) break;
      x = candidate;
      residual = next;
    }
    if (!std::isfinite(residual) || residual > tol_) {
      throw NumericalError(
          fmt::format("solve did not reach tolerance {:.3g}: best relative residual {:.6g}", tol_, residual));
    }
  }
  if (report != nullptr) {
    report->relative_residual = residual;
    report->iterations = sweeps;
    report->wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report->solver = "umfpack-lu";
  }
  return x;
}

Vector SaddleSolver::solve_bordered(const SparseMatrix& core, const Vector& border, const Vector& rhs,
                                    SolveReport* report) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = core.rows();
  if (core.cols() != n || border.size() != n || rhs.size() != n) {
    throw ValidationError("solve_bordered: core, border and rhs sizes differ");
  }
  if (n == 0 || border.cwiseAbs().maxCoeff() == 0.0) throw ValidationError("solve_bordered: border must be nonzero");

  // shift the diagonal at the largest border entry
  Eigen::Index p = 0;
  border.cwiseAbs().maxCoeff(&p);
  double alpha = 0.0;
  for (SparseMatrix::InnerIterator it(core, p); it; ++it) alpha = std::max(alpha, std::abs(it.value()));
  if (alpha == 0.0) alpha = 1.0;
  SparseMatrix shifted = core;
  shifted.coeffRef(p, p) += alpha;
  shifted.makeCompressed();
  factor(shifted);

  Vector e = Vector::Zero(n);
  e[p] = alpha;
  const Vector ya = lu_.solve(e);
  const Vector yg = lu_.solve(border);
  const double bya = border.dot(ya), byg = border.dot(yg);

  // [x; mu] for right-hand side [f; r]
  auto apply = [&](const Vector& f, double r, Vector& x, double& mu) {
    const Vector yf = lu_.solve(f);
    const double a11 = 1.0 - ya[p], a12 = yg[p], a21 = bya, a22 = -byg;
    const double b1 = yf[p], b2 = r - border.dot(yf);
    const double det = a11 * a22 - a12 * a21;
    if (det == 0.0 || !std::isfinite(det)) throw NumericalError("bordered system is singular (gauge correction)");
    const double s = (b1 * a22 - a12 * b2) / det;
    mu = (a11 * b2 - a21 * b1) / det;
    x = yf + s * ya - mu * yg;
  };
  auto residual_of = [&](const Vector& x, double mu, Vector& rc, double& rb) {
    rc = rhs - core * x - mu * border;
    rb = -border.dot(x);
    const double nb = rhs.norm();
    const double rn = std::sqrt(rc.squaredNorm() + rb * rb);
    return nb > 0.0 ? rn / nb : rn;
  };

  Vector x;
  double mu = 0.0;
  apply(rhs, 0.0, x, mu);
  Vector rc;
  double rb = 0.0;
  double residual = residual_of(x, mu, rc, rb);
  int sweeps = 0;
  while (residual > tol_ && sweeps < max_refinement_) {
    Vector dx;
    double dmu = 0.0;
    apply(rc, rb, dx, dmu);
    const Vector cx = x + dx;
    const double cmu = mu + dmu;
    Vector crc;
    double crb = 0.0;
    const double next = residual_of(cx, cmu, crc, crb);
    ++sweeps;
    if (!(next < residual)) break;
    x = cx;
    mu = cmu;
    rc = std::move(crc);
    rb = crb;
    residual = next;
  }
  if (!std::isfinite(residual) || residual > tol_) {
    throw NumericalError(
        fmt::format("solve did not reach tolerance {:.3g}: best relative residual {:.6g}", tol_, residual));
  }
  if (report != nullptr) {
    report->relative_residual = residual;
    report->iterations = sweeps;
    report->wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report->solver = "umfpack-lu-bordered";
  }
  Vector out(n + 1);
  out.head(n) = x;
  out[n] = mu;
  return out;
}

Vector solve_saddle(const SparseMatrix& m, const Vector& rhs, double tol, SolveReport* report) {
  SaddleSolver solver(tol);
  return solver.solve(m, rhs, report);
}

}  // namespace cornerflow
