#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/manufactured.hpp"
#include "cornerflow/mesh.hpp"
#include "cornerflow/timestepper.hpp"
#include "cornerflow/weight.hpp"

namespace cornerflow {

enum class SolutionKind { Corner, Quadratic, Zero };

struct SweepGrid {
  std::vector<double> nu;
  std::vector<double> nu_star;
  std::vector<double> delta;
  int checkpoints = 5;
};

/// Every parameter of a study. Loaded from an INI file with sections
/// [domain], [scheme], [mesh], [weights], [sweep], [output].
struct RunConfig {
  DomainKind domain = DomainKind::Omega1;
  double omega = 0.0;  // custom domains only

  SchemeConfig scheme;
  SolutionKind solution = SolutionKind::Corner;
  RegularPart regular = RegularPart::Zero;
  TimeFactor time_factor = TimeFactor::Exponential;
  double tol = 1e-10;

  double h = 0.025;
  int levels = 3;
  int quadrature_degree = 6;

  WeightParams weights = WeightParams::unweighted();

  SweepGrid sweep;

  std::filesystem::path output_dir = "cornerflow-out";

  /// h_j = 2^{1-j} h, j = 1..levels.
  std::vector<double> mesh_sizes() const;
  void validate() const;
};

/// Grid defaults: nu in (0, 2] step 0.2, nu* in [0, 2] step 0.2, delta in {0.025, 0.03, 0.035}.
SweepGrid default_sweep_grid();

/// `section.key=value` overrides are applied on top of the file contents.
RunConfig parse_config(std::istream& in, const std::vector<std::pair<std::string, std::string>>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});
RunConfig default_config(const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Canonical INI text of the full config (fixed key order, 17 significant digits).
std::string canonical_config(const RunConfig& config);

/// Canonical description of one transient run (the cache key material).
std::string canonical_run_key(const RunConfig& config, const WeightParams& weights, double h);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

/// Parses "3pi/2", "1.5pi", "pi", "2*pi/3" or a plain number.
double parse_angle(const std::string& text);

DomainSpec make_domain(const RunConfig& config);
double corner_angle(const RunConfig& config);
std::shared_ptr<const ExactSolution> make_exact_solution(const RunConfig& config);

}  // namespace cornerflow
