#include "cornerflow/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "cornerflow/error.hpp"
#include "cornerflow/timestepper.hpp"

namespace cornerflow {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

// Runs task(i) for i in [0, n) on `jobs` threads. Exceptions escape only from
// the calling thread's perspective through the task itself.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct RunTask {
  WeightParams weights;
  std::size_t level = 0;
};

struct RunOutcome {
  bool ok = false;
  std::string failure;
  ErrorReport report;
};

std::vector<RunOutcome> execute_runs(const RunConfig& config, const std::vector<RunTask>& tasks,
                                     const SweepOptions& options) {
  const std::vector<double> sizes = config.mesh_sizes();
  const DomainSpec domain = make_domain(config);
  std::vector<Mesh> meshes;
  for (double h : sizes) meshes.push_back(build_split_mesh(domain, h));

  std::optional<ResultCache> cache;
  if (options.cache_dir) cache.emplace(*options.cache_dir);
  std::mutex log_mutex;
  auto log = [&](const std::string& msg) {
    if (!options.log) return;
    std::lock_guard lock(log_mutex);
    options.log(msg);
  };

  std::vector<RunOutcome> outcomes(tasks.size());
  parallel_for(tasks.size(), options.jobs, [&](std::size_t i) {
    const RunTask& task = tasks[i];
    const double h = sizes[task.level];
    const std::string label = fmt::format("nu={:g} nu*={:g} mu*={:g} delta={:g} h={:g}", task.weights.nu,
                                          task.weights.nu_star, task.weights.mu_star, task.weights.delta, h);
    const std::string key = sha256_hex(canonical_run_key(config, task.weights, h));
    RunOutcome& out = outcomes[i];
    try {
      if (cache) {
        if (auto hit = cache->load(key)) {
          out.report = std::move(*hit);
          out.ok = true;
          log(fmt::format("[cached] {}", label));
          return;
        }
      }
      out.report = run_study(config, meshes[task.level], task.weights);
      out.ok = true;
      if (cache) cache->store(key, out.report);
      log(fmt::format("[done] {} err={:.6g}", label, out.report.final_velocity()));
    } catch (const std::exception& e) {
      out.ok = false;
      out.failure = e.what();
      log(fmt::format("[failed] {}: {}", label, e.what()));
    }
  });
  return outcomes;
}

}  // namespace

double ErrorReport::final_velocity() const { return steps.empty() ? 0.0 : steps.back().velocity; }

double ErrorReport::final_pressure() const { return steps.empty() ? 0.0 : steps.back().pressure; }

double ErrorReport::max_velocity() const {
  double m = 0.0;
  for (const StepError& s : steps)
    if (s.step >= 1) m = std::max(m, s.velocity);
  return m;
}

StepError measure_errors(const Discretization& disc, const Vector& velocity_hat, const Vector& pressure_hat,
                         const ExactSolution& exact, double t) {
  const double nu = disc.params().nu;
  double v_w = 0.0, v_u = 0.0;
  double mean_num = 0.0, mean_den = 0.0;
  std::vector<double> diff(disc.num_points());
  for (Index e = 0; e < disc.mesh().num_triangles(); ++e) {
    const std::size_t offset = disc.point_offset(e);
    const auto pts = disc.points(e);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const QuadPoint& qp = pts[q];
      const PointValues h = evaluate_at(disc, e, qp, &velocity_hat, &pressure_hat);
      const ExactFields f = exact.fields(qp.x, t);
      const Vec2 eu = h.u - f.u;
      const double sq = dot(eu, eu) + frobenius_sq(h.grad_u - f.grad_u);
      const double w2 = nu == 0.0 ? 1.0 : std::pow(qp.rho, 2.0 * nu);
      v_w += qp.weight * w2 * sq;
      v_u += qp.weight * sq;
      diff[offset + q] = h.p - f.p;
      mean_num += qp.weight * qp.rho_nu * diff[offset + q];
      mean_den += qp.weight * qp.rho_nu;
    }
  }
  const double shift = mean_num / mean_den;
  double p_w = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const QuadPoint& qp = disc.points()[i];
    const double d = diff[i] - shift;
    p_w += qp.weight * qp.rho_nu * qp.rho_nu * d * d;
  }
  StepError s;
  s.time = t;
  s.velocity = std::sqrt(v_w);
  s.velocity_unweighted = std::sqrt(v_u);
  s.pressure = std::sqrt(p_w);
  return s;
}

Mesh build_split_mesh(const DomainSpec& domain, double h) { return barycentric_split(triangulate(domain, h)); }

ErrorReport run_study(const RunConfig& config, const Mesh& split_mesh, const WeightParams& weights) {
  const auto exact = make_exact_solution(config);
  const Discretization disc(split_mesh, weights, config.quadrature_degree);
  ErrorReport report;
  run_transient(config.scheme, *exact, disc, config.tol,
                [&](const TimeState& state, const SolveReport& solve, double wall_ms) {
                  StepError s = measure_errors(disc, state.u, state.p, *exact, state.time);
                  s.step = state.step;
                  s.residual = solve.relative_residual;
                  s.wall_ms = wall_ms;
                  report.steps.push_back(s);
                });
  return report;
}

std::vector<double> pairwise_orders(const std::vector<double>& errors) {
  for (double e : errors)
    if (!(e > 0.0)) throw ValidationError(fmt::format("convergence order needs positive errors, got {}", e));
  std::vector<double> orders;
  for (std::size_t j = 0; j + 1 < errors.size(); ++j) orders.push_back(std::log2(errors[j] / errors[j + 1]));
  return orders;
}

double least_squares_order(const std::vector<double>& h, const std::vector<double>& errors) {
  if (h.size() != errors.size() || h.size() < 2)
    throw ValidationError("least-squares order needs >= 2 matching levels");
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (!(errors[j] > 0.0) || !(h[j] > 0.0)) throw ValidationError("least-squares order needs positive h and errors");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double x = std::log(h[j]), y = std::log(errors[j]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceTable convergence_order(const std::vector<double>& h, const std::vector<double>& errors) {
  ConvergenceTable t;
  t.h = h;
  t.err = errors;
  const auto pw = pairwise_orders(errors);
  t.order.push_back(std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < pw.size(); ++j)
    t.order.push_back(std::log(errors[j] / errors[j + 1]) / std::log(h[j] / h[j + 1]));
  t.slope = h.size() >= 2 ? least_squares_order(h, errors) : std::numeric_limits<double>::quiet_NaN();
  return t;
}

std::vector<int> checkpoint_steps(int n_steps, int count) {
  std::vector<int> out;
  if (n_steps <= 0 || count <= 0) return out;
  if (n_steps < count) {
    for (int s = 1; s <= n_steps; ++s) out.push_back(s);
    return out;
  }
  for (int k = 1; k <= count; ++k) {
    const int s = static_cast<int>(std::llround(static_cast<double>(k) * n_steps / count));
    if (out.empty() || s != out.back()) out.push_back(s);
  }
  return out;
}

std::vector<bool> optimal_members(const std::vector<std::vector<double>>& errors, double threshold) {
  if (errors.empty()) return {};
  const std::size_t cols = errors.front().size();
  std::vector<double> best(cols, std::numeric_limits<double>::infinity());
  for (const auto& row : errors) {
    if (row.size() != cols) throw ValidationError("optimal_members: rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) best[c] = std::min(best[c], row[c]);
  }
  std::vector<bool> member;
  for (const auto& row : errors) {
    bool in = true;
    for (std::size_t c = 0; c < cols && in; ++c) in = row[c] <= threshold * best[c];
    member.push_back(in);
  }
  return member;
}

std::vector<double> SweepPoint::checkpoint_errors(const std::vector<int>& checkpoints) const {
  std::vector<double> out;
  for (const ErrorReport& r : levels) {
    for (int step : checkpoints) {
      const auto it =
          std::find_if(r.steps.begin(), r.steps.end(), [step](const StepError& s) { return s.step == step; });
      if (it == r.steps.end()) throw ValidationError(fmt::format("checkpoint step {} missing from report", step));
      out.push_back(it->velocity);
    }
  }
  return out;
}

void assign_membership(RegionMap& map) {
  for (double delta : map.delta) {
    std::vector<std::size_t> idx;
    std::vector<std::vector<double>> table;
    for (std::size_t i = 0; i < map.points.size(); ++i) {
      SweepPoint& p = map.points[i];
      if (p.delta != delta) continue;
      p.member = false;
      if (!p.ok) continue;
      idx.push_back(i);
      table.push_back(p.checkpoint_errors(map.checkpoints));
    }
    const auto member = optimal_members(table, map.threshold);
    for (std::size_t k = 0; k < idx.size(); ++k) map.points[idx[k]].member = member[k];
  }
}

RegionMap run_sweep(const RunConfig& config, const SweepOptions& options) {
  config.validate();
  RegionMap map;
  map.h = config.mesh_sizes();
  map.checkpoints = checkpoint_steps(config.scheme.steps(), config.sweep.checkpoints);
  map.nu = config.sweep.nu;
  map.nu_star = config.sweep.nu_star;
  map.delta = config.sweep.delta;

  std::vector<RunTask> tasks;
  for (double delta : map.delta) {
    for (double nu : map.nu) {
      for (double ns : map.nu_star) {
        SweepPoint p;
        p.nu = nu;
        p.nu_star = ns;
        p.delta = delta;
        map.points.push_back(p);
        for (std::size_t l = 0; l < map.h.size(); ++l) tasks.push_back({WeightParams{nu, ns, ns, delta}, l});
      }
    }
  }
  const auto outcomes = execute_runs(config, tasks, options);
  const std::size_t nl = map.h.size();
  for (std::size_t i = 0; i < map.points.size(); ++i) {
    SweepPoint& p = map.points[i];
    p.ok = true;
    for (std::size_t l = 0; l < nl; ++l) {
      const RunOutcome& o = outcomes[i * nl + l];
      if (!o.ok) {
        p.ok = false;
        if (p.failure.empty()) p.failure = fmt::format("h={:g}: {}", map.h[l], o.failure);
      }
      p.levels.push_back(o.report);
    }
    if (p.ok) {
      std::vector<double> finals;
      for (const auto& r : p.levels) finals.push_back(r.final_velocity());
      try {
        p.order = nl >= 2 ? least_squares_order(map.h, finals) : std::numeric_limits<double>::quiet_NaN();
      } catch (const ValidationError& e) {
        p.ok = false;
        p.failure = e.what();
      }
    }
  }
  assign_membership(map);
  return map;
}

std::vector<ErrorReport> run_convergence(const RunConfig& config, const WeightParams& weights,
                                         const SweepOptions& options) {
  config.validate();
  weights.validate();
  std::vector<RunTask> tasks;
  for (std::size_t l = 0; l < config.mesh_sizes().size(); ++l) tasks.push_back({weights, l});
  const auto outcomes = execute_runs(config, tasks, options);
  std::vector<ErrorReport> reports;
  for (const auto& o : outcomes) {
    if (!o.ok) throw NumericalError(o.failure);
    reports.push_back(o.report);
  }
  return reports;
}

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(fmt::format("cannot create cache directory {}: {}", dir_.string(), ec.message()));
}

std::filesystem::path ResultCache::path_for(const std::string& key) const { return dir_ / (key + ".csv"); }

std::optional<ErrorReport> ResultCache::load(const std::string& key) const {
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  try {
    return read_run_csv(in);
  } catch (const Error&) {
    return std::nullopt;  // unreadable entries are recomputed
  }
}

void ResultCache::store(const std::string& key, const ErrorReport& report) const {
  std::ostringstream out;
  write_run_csv(out, report);
  write_file_atomic(path_for(key), out.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  const auto tmp =
      path.parent_path() / fmt::format(".{}.{}.{}.tmp", path.filename().string(),
                                       std::hash<std::thread::id>{}(std::this_thread::get_id()), counter++);
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out << contents;
    if (!out.flush()) throw Error(fmt::format("write to {} failed", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
}

void write_run_csv(std::ostream& out, const ErrorReport& report) {
  out << "step,time,err_W1_nu_velocity,err_L2_nu_pressure,solver_residual,wall_ms\n";
  for (const StepError& s : report.steps) {
    out << fmt::format("{},{},{},{},{},{}\n", s.step, num(s.time), num(s.velocity), num(s.pressure), num(s.residual),
                       num(s.wall_ms));
  }
  // unweighted velocity errors follow as a trailer block for the baseline comparison
  out << "# step,err_W1_velocity\n";
  for (const StepError& s : report.steps) out << fmt::format("# {},{}\n", s.step, num(s.velocity_unweighted));
}

ErrorReport read_run_csv(std::istream& in) {
  ErrorReport r;
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,", 0) != 0) throw ValidationError("run CSV: missing header");
  auto fields = [](const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  };
  auto parse = [](const std::string& s) {
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("run CSV: bad number '{}'", s));
    }
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# step", 0) == 0) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto f = fields(line.substr(2));
      if (f.size() != 2) throw ValidationError("run CSV: malformed trailer");
      const int step = static_cast<int>(parse(f[0]));
      for (StepError& s : r.steps)
        if (s.step == step) s.velocity_unweighted = parse(f[1]);
      continue;
    }
    const auto f = fields(line);
    if (f.size() != 6) throw ValidationError("run CSV: expected 6 columns");
    StepError s;
    s.step = static_cast<int>(parse(f[0]));
    s.time = parse(f[1]);
    s.velocity = parse(f[2]);
    s.pressure = parse(f[3]);
    s.residual = parse(f[4]);
    s.wall_ms = parse(f[5]);
    r.steps.push_back(s);
  }
  if (r.steps.empty()) throw ValidationError("run CSV: no rows");
  return r;
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
  out << "h,err,order\n";
  for (std::size_t j = 0; j < table.h.size(); ++j) {
    out << fmt::format("{},{},{}\n", num(table.h[j]), num(table.err[j]), num(table.order[j]));
  }
}

void write_sweep_csv(std::ostream& out, const RegionMap& map) {
  out << "nu,nu_star,delta,h,err_final,err_max,order,member\n";
  for (const SweepPoint& p : map.points) {
    if (!p.ok) continue;
    for (std::size_t l = 0; l < p.levels.size(); ++l) {
      const double order = l == 0 ? std::numeric_limits<double>::quiet_NaN()
                                  : std::log2(p.levels[l - 1].final_velocity() / p.levels[l].final_velocity());
      out << fmt::format("{},{},{},{},{},{},{},{}\n", num(p.nu), num(p.nu_star), num(p.delta), num(map.h[l]),
                         num(p.levels[l].final_velocity()), num(p.levels[l].max_velocity()), num(order),
                         p.member ? 1 : 0);
    }
  }
}

void write_failures_csv(std::ostream& out, const RegionMap& map) {
  out << "nu,nu_star,delta,failure\n";
  for (const SweepPoint& p : map.points) {
    if (p.ok) continue;
    std::string msg = p.failure;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << fmt::format("{},{},{},\"{}\"\n", num(p.nu), num(p.nu_star), num(p.delta), msg);
  }
}

void write_region_svg(std::ostream& out, const RegionMap& map, double delta) {
  constexpr int cell = 36, left = 70, top = 50, bottom = 60, right = 20;
  const int nx = static_cast<int>(map.nu.size());
  const int ny = static_cast<int>(map.nu_star.size());
  const int width = left + nx * cell + right;
  const int height = top + ny * cell + bottom;
  out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                     width, height, width, height);
  out << fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
  out << fmt::format(
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
      "optimal region, delta = {:g}</text>\n",
      width / 2, delta);
  out << "<g id=\"grid\">\n";
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const int x = left + i * cell;
      const int y = top + (ny - 1 - j) * cell;  // nu* grows upward
      out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#f2f2f2\" stroke=\"#bbbbbb\"/>\n",
                         x, y, cell, cell);
    }
  }
  out << "</g>\n<g id=\"members\">\n";
  for (const SweepPoint& p : map.points) {
    if (p.delta != delta || !p.member) continue;
    const auto ix = std::find(map.nu.begin(), map.nu.end(), p.nu) - map.nu.begin();
    const auto jy = std::find(map.nu_star.begin(), map.nu_star.end(), p.nu_star) - map.nu_star.begin();
    const int x = left + static_cast<int>(ix) * cell;
    const int y = top + (ny - 1 - static_cast<int>(jy)) * cell;
    out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#2b7bb9\" stroke=\"#1a4f7a\"/>\n", x,
                       y, cell, cell);
  }
  out << "</g>\n<g id=\"axes\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i < nx; ++i) {
    out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", left + i * cell + cell / 2,
                       top + ny * cell + 16, map.nu[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < ny; ++j) {
    out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:g}</text>\n", left - 6,
                       top + (ny - 1 - j) * cell + cell / 2 + 4, map.nu_star[static_cast<std::size_t>(j)]);
  }
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">nu</text>\n", left + nx * cell / 2,
                     top + ny * cell + 40);
  out << fmt::format("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">nu*</text>\n",
                     top + ny * cell / 2, top + ny * cell / 2);
  out << "</g>\n</svg>\n";
}

}  // namespace cornerflow
