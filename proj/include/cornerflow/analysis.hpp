#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cornerflow/config.hpp"
#include "cornerflow/fem.hpp"
#include "cornerflow/manufactured.hpp"

namespace cornerflow {

/// Errors of one time level against the exact solution.
struct StepError {
  int step = 0;
  double time = 0.0;
  double velocity = 0.0;             // W^1_{2,nu}
  double velocity_unweighted = 0.0;  // W^1_2
  double pressure = 0.0;             // L_{2,nu}, both pressures shifted to zero rho^nu-mean
  double residual = 0.0;             // worst solver residual of the step
  double wall_ms = 0.0;
};

struct ErrorReport {
  std::vector<StepError> steps;  // step 0 is the initial state

  double final_velocity() const;
  double max_velocity() const;  // over steps >= 1
  double final_pressure() const;
};

/// Errors of hatted fields (u^, p^) at time t. The error integrands use the
/// discretization's own quadrature and exponent nu.
StepError measure_errors(const Discretization& disc, const Vector& velocity_hat, const Vector& pressure_hat,
                         const ExactSolution& exact, double t);

/// Triangulation of the configured domain at size h, barycentrically split.
Mesh build_split_mesh(const DomainSpec& domain, double h);

/// One transient run on a prebuilt split mesh with the given weights.
ErrorReport run_study(const RunConfig& config, const Mesh& split_mesh, const WeightParams& weights);

/// Orders log2(e_j / e_{j+1}) for halving mesh sizes; rejects e_j <= 0.
std::vector<double> pairwise_orders(const std::vector<double>& errors);
/// Least-squares slope of log e against log h.
double least_squares_order(const std::vector<double>& h, const std::vector<double>& errors);

struct ConvergenceTable {
  std::vector<double> h;
  std::vector<double> err;
  std::vector<double> order;  // order[0] = NaN, order[j] from level j-1 to j
  double slope = 0.0;
};
ConvergenceTable convergence_order(const std::vector<double>& h, const std::vector<double>& errors);

/// Steps round(k N / count), k = 1..count (all steps when N < count).
std::vector<int> checkpoint_steps(int n_steps, int count);

/// The optimality rule: row i is a member when errors[i][c] <= threshold *
/// min_j errors[j][c] for every column c. Rows must share a length.
std::vector<bool> optimal_members(const std::vector<std::vector<double>>& errors, double threshold = 1.05);

struct SweepPoint {
  double nu = 0.0;
  double nu_star = 0.0;
  double delta = 0.0;
  bool ok = false;
  std::string failure;
  std::vector<ErrorReport> levels;  // one per mesh size
  bool member = false;
  double order = 0.0;  // least-squares order of the final-time velocity error

  /// Velocity errors at every (level, checkpoint), level-major.
  std::vector<double> checkpoint_errors(const std::vector<int>& checkpoints) const;
};

struct RegionMap {
  std::vector<double> h;
  std::vector<int> checkpoints;
  std::vector<double> nu, nu_star, delta;  // grid axes
  std::vector<SweepPoint> points;          // delta-major, then nu, then nu*
  double threshold = 1.05;
};

/// Recomputes membership per delta slice over the successful points.
void assign_membership(RegionMap& map);

struct SweepOptions {
  int jobs = 1;
  std::optional<std::filesystem::path> cache_dir;
  std::function<void(const std::string&)> log;
};

/// Runs the full study for every grid point (mu* = nu*) at every mesh size.
/// Failures are recorded on the point and excluded from the region.
RegionMap run_sweep(const RunConfig& config, const SweepOptions& options = {});

/// Transient runs at every configured mesh size with fixed weights.
std::vector<ErrorReport> run_convergence(const RunConfig& config, const WeightParams& weights,
                                         const SweepOptions& options = {});

/// On-disk cache of per-run error reports keyed by SHA-256 of the run key.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir);
  std::optional<ErrorReport> load(const std::string& key) const;
  void store(const std::string& key, const ErrorReport& report) const;
  std::filesystem::path path_for(const std::string& key) const;

 private:
  std::filesystem::path dir_;
};

// Report writers; CSV numbers use 17 significant digits.
void write_run_csv(std::ostream& out, const ErrorReport& report);
ErrorReport read_run_csv(std::istream& in);
void write_convergence_csv(std::ostream& out, const ConvergenceTable& table);
void write_sweep_csv(std::ostream& out, const RegionMap& map);
void write_failures_csv(std::ostream& out, const RegionMap& map);
void write_region_svg(std::ostream& out, const RegionMap& map, double delta);

/// Writes `contents` to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace cornerflow
