#include <fmt/format.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cornerflow/analysis.hpp"
#include "cornerflow/config.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/manufactured.hpp"
#include "cornerflow/mesh.hpp"

namespace fs = std::filesystem;
using namespace cornerflow;

namespace {

struct StudyOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  int jobs = 1;
  std::string cache_dir;
  bool no_cache = false;
};

void add_study_options(CLI::App* cmd, StudyOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "override as section.key=value (repeatable)");
  cmd->add_option("-j,--jobs", o.jobs, "parallel transient runs")->check(CLI::Range(1, 256));
  cmd->add_option("--cache-dir", o.cache_dir, "result cache (default: $CORNERFLOW_CACHE_DIR)");
  cmd->add_flag("--no-cache", o.no_cache, "ignore the result cache");
}

RunConfig load(const StudyOptions& o) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const std::string& s : o.overrides) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError(fmt::format("override '{}' is not section.key=value", s));
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return o.config_path.empty() ? default_config(kv) : load_config(o.config_path, kv);
}

SweepOptions sweep_options(const StudyOptions& o) {
  SweepOptions s;
  s.jobs = o.jobs;
  if (!o.no_cache) {
    if (!o.cache_dir.empty()) {
      s.cache_dir = o.cache_dir;
    } else if (const char* env = std::getenv("CORNERFLOW_CACHE_DIR"); env != nullptr && *env != '\0') {
      s.cache_dir = env;
    }
  }
  s.log = [](const std::string& msg) { std::cerr << msg << '\n'; };
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

int cmd_mesh(const std::string& domain_name, const std::string& omega, double h, bool split, const std::string& out) {
  const DomainSpec domain =
      omega.empty() ? build_domain(parse_domain_kind(domain_name)) : build_domain(parse_angle(omega));
  Mesh mesh = triangulate(domain, h);
  if (split) mesh = barycentric_split(mesh);
  std::cout << format_report(mesh_report(mesh));
  if (!out.empty()) {
    std::ostringstream os;
    write_mesh(os, mesh);
    write_text(out, os.str());
  }
  return 0;
}

int cmd_lambda(const std::string& omega, int precision) {
  const CornerExponent c = solve_lambda(parse_angle(omega));
  std::cout << fmt::format("{:.{}f}\n", c.lambda, precision);
  return 0;
}

int cmd_exact_eval(const std::string& omega, const std::string& regular, double x, double y, double t) {
  const ExactCornerSolution s(parse_angle(omega), parse_regular_part(regular));
  const ExactFields f = s.fields({x, y}, t);
  const Vec2 force = forcing(s, {x, y}, t);
  std::cout << fmt::format("lambda {:.17g}\n", s.lambda());
  std::cout << fmt::format("u {:.17g} {:.17g}\n", f.u.x, f.u.y);
  std::cout << fmt::format("grad_u {:.17g} {:.17g} {:.17g} {:.17g}\n", f.grad_u(0, 0), f.grad_u(0, 1), f.grad_u(1, 0),
                           f.grad_u(1, 1));
  std::cout << fmt::format("lap_u {:.17g} {:.17g}\n", f.lap_u.x, f.lap_u.y);
  std::cout << fmt::format("p {:.17g}\n", f.p);
  std::cout << fmt::format("grad_p {:.17g} {:.17g}\n", f.grad_p.x, f.grad_p.y);
  std::cout << fmt::format("f {:.17g} {:.17g}\n", force.x, force.y);
  return 0;
}

int cmd_solve(const StudyOptions& o) {
  const RunConfig cfg = load(o);
  const double h = cfg.mesh_sizes().front();
  const Mesh mesh = build_split_mesh(make_domain(cfg), h);
  const ErrorReport report = run_study(cfg, mesh, cfg.weights);
  std::ostringstream csv;
  write_run_csv(csv, report);
  write_text(cfg.output_dir / "run.csv", csv.str());
  std::cout << fmt::format("h {:g}  steps {}  err_W1_nu {:.6e}  err_L2_nu_p {:.6e}\n", h, report.steps.size() - 1,
                           report.final_velocity(), report.final_pressure());
  return 0;
}

void print_table(const std::string& title, const ConvergenceTable& t) {
  std::cout << title << '\n';
  for (std::size_t j = 0; j < t.h.size(); ++j) {
    std::cout << fmt::format("  h {:<10g} err {:.6e}  order {}\n", t.h[j], t.err[j],
                             j == 0 ? std::string("-") : fmt::format("{:.3f}", t.order[j]));
  }
  std::cout << fmt::format("  least-squares order {:.3f}\n", t.slope);
}

int cmd_convergence(const StudyOptions& o, bool baseline) {
  const RunConfig cfg = load(o);
  const SweepOptions so = sweep_options(o);
  const auto sizes = cfg.mesh_sizes();
  auto table_of = [&](const WeightParams& w) {
    std::vector<double> err;
    for (const auto& r : run_convergence(cfg, w, so)) err.push_back(r.final_velocity());
    return convergence_order(sizes, err);
  };
  const ConvergenceTable weighted = table_of(cfg.weights);
  std::ostringstream csv;
  write_convergence_csv(csv, weighted);
  write_text(cfg.output_dir / "convergence.csv", csv.str());
  print_table(fmt::format("nu={:g} nu*={:g} mu*={:g} delta={:g}", cfg.weights.nu, cfg.weights.nu_star,
                          cfg.weights.mu_star, cfg.weights.delta),
              weighted);
  if (baseline && !cfg.weights.is_unweighted()) {
    const ConvergenceTable plain = table_of(WeightParams::unweighted(cfg.weights.delta));
    std::ostringstream b;
    write_convergence_csv(b, plain);
    write_text(cfg.output_dir / "convergence_unweighted.csv", b.str());
    print_table("unweighted", plain);
  }
  return 0;
}

int cmd_sweep(const StudyOptions& o) {
  const RunConfig cfg = load(o);
  const RegionMap map = run_sweep(cfg, sweep_options(o));
  std::ostringstream csv, failures;
  write_sweep_csv(csv, map);
  write_failures_csv(failures, map);
  write_text(cfg.output_dir / "sweep.csv", csv.str());
  write_text(cfg.output_dir / "sweep_failures.csv", failures.str());
  for (double delta : map.delta) {
    std::ostringstream svg;
    write_region_svg(svg, map, delta);
    write_text(cfg.output_dir / fmt::format("region_delta_{:g}.svg", delta), svg.str());
  }
  std::size_t members = 0, failed = 0;
  for (const SweepPoint& p : map.points) {
    members += p.member ? 1 : 0;
    failed += p.ok ? 0 : 1;
  }
  std::cout << fmt::format("{} points, {} members, {} failed\n", map.points.size(), members, failed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted finite elements for Navier-Stokes flow around a re-entrant corner"};
  app.require_subcommand(1);

  std::string domain_name = "omega1", omega, out;
  double h = 0.1;
  bool split = false;
  auto* mesh = app.add_subcommand("mesh", "triangulate a domain and print a quality report");
  mesh->set_help_flag("--help", "print this help message and exit");
  mesh->add_option("--domain", domain_name, "omega0..omega3");
  mesh->add_option("--omega", omega, "custom corner angle, e.g. 7pi/4");
  mesh->add_option("--h", h, "target element size")->check(CLI::PositiveNumber);
  mesh->add_flag("--split", split, "apply the barycentric split");
  mesh->add_option("-o,--out", out, "write the mesh in text format");

  std::string lambda_omega;
  int precision = 4;
  auto* lambda = app.add_subcommand("lambda", "corner exponent for an angle");
  lambda->add_option("--omega", lambda_omega, "angle, e.g. 3pi/2")->required();
  lambda->add_option("--precision", precision, "decimals")->check(CLI::Range(0, 17));

  std::string eval_omega = "3pi/2", regular = "zero";
  double x = 0.0, y = 0.0, t = 0.0;
  auto* exact = app.add_subcommand("exact-eval", "evaluate the manufactured corner solution");
  exact->add_option("--omega", eval_omega, "corner angle");
  exact->add_option("--regular", regular, "zero or trig");
  exact->add_option("--x", x)->required();
  exact->add_option("--y", y)->required();
  exact->add_option("--t", t);

  StudyOptions solve_opts, conv_opts, sweep_opts;
  bool baseline = false;
  auto* solve = app.add_subcommand("solve", "one transient run at the first mesh size");
  add_study_options(solve, solve_opts);
  auto* conv = app.add_subcommand("convergence", "transient runs at every mesh size");
  add_study_options(conv, conv_opts);
  conv->add_flag("--baseline", baseline, "also run the unweighted method");
  auto* sweep = app.add_subcommand("sweep", "parameter sweep and optimal region");
  add_study_options(sweep, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (mesh->parsed()) return cmd_mesh(domain_name, omega, h, split, out);
    if (lambda->parsed()) return cmd_lambda(lambda_omega, precision);
    if (exact->parsed()) return cmd_exact_eval(eval_omega, regular, x, y, t);
    if (solve->parsed()) return cmd_solve(solve_opts);
    if (conv->parsed()) return cmd_convergence(conv_opts, baseline);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
