#include "cornerflow/config.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include "cornerflow/error.hpp"

namespace cornerflow {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (trim(text.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError(fmt::format("{}: '{}' is not a number", key, text));
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v)) throw ValidationError(fmt::format("{}: '{}' is not an integer", key, text));
  return static_cast<int>(v);
}

// Comma-separated numbers or an inclusive range start:stop:step.
std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(to_double(key, trim(item)));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw ValidationError(fmt::format("{}: range must be start:stop:step with step > 0", key));
    }
    const int n = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (int k = 0; k <= n; ++k) out.push_back(std::stod(fmt::format("{:.12g}", parts[0] + k * parts[2])));
    return out;
  }
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_double(key, trim(item)));
  }
  if (out.empty()) throw ValidationError(fmt::format("{}: empty list", key));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.17g}", i ? "," : "", v[i]);
  return s;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& known_keys() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> keys = {
      {"domain", {"kind", "omega"}},
      {"scheme", {"id", "gamma", "dt", "T", "solution", "regular", "time", "tol"}},
      {"mesh", {"h", "levels", "quadrature_degree"}},
      {"weights", {"nu", "nu_star", "mu_star", "delta"}},
      {"sweep", {"nu", "nu_star", "delta", "checkpoints"}},
      {"output", {"dir"}},
  };
  return keys;
}

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it =
        std::find_if(known_keys().begin(), known_keys().end(), [&](const auto& k) { return k.first == section; });
    if (it == known_keys().end()) throw ValidationError(fmt::format("unknown config section [{}]", section));
    for (const auto& [key, value] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        throw ValidationError(fmt::format("unknown config key {}.{}", section, key));
      }
    }
  }
}

RunConfig from_tree(const pt::ptree& tree) {
  check_keys(tree);
  RunConfig c;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return trim(*v);
    return std::nullopt;
  };
  if (auto v = get("domain.kind")) c.domain = parse_domain_kind(*v);
  if (auto v = get("domain.omega")) c.omega = parse_angle(*v);

  if (auto v = get("scheme.id")) c.scheme.scheme = to_int("scheme.id", *v);
  if (auto v = get("scheme.gamma")) c.scheme.gamma = to_double("scheme.gamma", *v);
  if (auto v = get("scheme.dt")) c.scheme.dt = to_double("scheme.dt", *v);
  if (auto v = get("scheme.T")) c.scheme.final_time = to_double("scheme.T", *v);
  if (auto v = get("scheme.solution")) {
    if (*v == "corner")
      c.solution = SolutionKind::Corner;
    else if (*v == "quadratic")
      c.solution = SolutionKind::Quadratic;
    else if (*v == "zero")
      c.solution = SolutionKind::Zero;
    else
      throw ValidationError(fmt::format("scheme.solution: unknown solution '{}'", *v));
  }
  if (auto v = get("scheme.regular")) c.regular = parse_regular_part(*v);
  if (auto v = get("scheme.time")) {
    if (*v == "exp")
      c.time_factor = TimeFactor::Exponential;
    else if (*v == "frozen")
      c.time_factor = TimeFactor::Frozen;
    else
      throw ValidationError(fmt::format("scheme.time: expected exp or frozen, got '{}'", *v));
  }
  if (auto v = get("scheme.tol")) c.tol = to_double("scheme.tol", *v);

  if (auto v = get("mesh.h")) c.h = to_double("mesh.h", *v);
  if (auto v = get("mesh.levels")) c.levels = to_int("mesh.levels", *v);
  if (auto v = get("mesh.quadrature_degree")) c.quadrature_degree = to_int("mesh.quadrature_degree", *v);

  if (auto v = get("weights.nu")) c.weights.nu = to_double("weights.nu", *v);
  if (auto v = get("weights.nu_star")) {
    c.weights.nu_star = to_double("weights.nu_star", *v);
    c.weights.mu_star = c.weights.nu_star;
  }
  if (auto v = get("weights.mu_star")) c.weights.mu_star = to_double("weights.mu_star", *v);
  if (auto v = get("weights.delta")) c.weights.delta = to_double("weights.delta", *v);

  c.sweep = default_sweep_grid();
  if (auto v = get("sweep.nu")) c.sweep.nu = to_list("sweep.nu", *v);
  if (auto v = get("sweep.nu_star")) c.sweep.nu_star = to_list("sweep.nu_star", *v);
  if (auto v = get("sweep.delta")) c.sweep.delta = to_list("sweep.delta", *v);
  if (auto v = get("sweep.checkpoints")) c.sweep.checkpoints = to_int("sweep.checkpoints", *v);

  if (auto v = get("output.dir")) c.output_dir = *v;
  c.validate();
  return c;
}

void apply_overrides(pt::ptree& tree, const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (const auto& [key, value] : overrides) {
    if (key.find('.') == std::string::npos) {
      throw ValidationError(fmt::format("override '{}' must have the form section.key=value", key));
    }
    tree.put(pt::ptree::path_type(key, '.'), value);
  }
}

}  // namespace

SweepGrid default_sweep_grid() {
  SweepGrid g;
  for (int k = 1; k <= 10; ++k) g.nu.push_back(std::stod(fmt::format("{:.12g}", 0.2 * k)));
  for (int k = 0; k <= 10; ++k) g.nu_star.push_back(std::stod(fmt::format("{:.12g}", 0.2 * k)));
  g.delta = {0.025, 0.03, 0.035};
  return g;
}

std::vector<double> RunConfig::mesh_sizes() const {
  std::vector<double> sizes;
  for (int j = 1; j <= levels; ++j) sizes.push_back(std::ldexp(h, 1 - j));
  return sizes;
}

void RunConfig::validate() const {
  scheme.validate();
  weights.validate();
  if (!(h > 0.0)) throw ValidationError(fmt::format("mesh.h must be positive, got {}", h));
  if (levels < 1 || levels > 8) throw ValidationError(fmt::format("mesh.levels must be in [1, 8], got {}", levels));
  if (quadrature_degree < 6 || quadrature_degree > 23) {
    throw ValidationError(fmt::format("mesh.quadrature_degree must be in [6, 23], got {}", quadrature_degree));
  }
  if (!(tol >= 1e-14 && tol <= 1e-6)) throw ValidationError(fmt::format("scheme.tol {} outside [1e-14, 1e-6]", tol));
  if (domain == DomainKind::Custom && !(omega > std::numbers::pi && omega < 2.0 * std::numbers::pi)) {
    throw ValidationError(fmt::format("domain.omega {} outside (pi, 2pi)", omega));
  }
  if (sweep.checkpoints < 1) throw ValidationError("sweep.checkpoints must be >= 1");
  for (double v : sweep.nu)
    if (!(v > 0.0 && v <= 2.0)) throw ValidationError(fmt::format("sweep.nu value {} outside (0, 2]", v));
  for (double v : sweep.nu_star)
    if (!(v >= 0.0)) throw ValidationError(fmt::format("sweep.nu_star value {} is negative", v));
  for (double v : sweep.delta)
    if (!(v > 0.0)) throw ValidationError(fmt::format("sweep.delta value {} is not positive", v));
}

RunConfig parse_config(std::istream& in, const std::vector<std::pair<std::string, std::string>>& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(fmt::format("config: {}", e.what()));
  }
  apply_overrides(tree, overrides);
  return from_tree(tree);
}

RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open config file {}", path.string()));
  return parse_config(in, overrides);
}

RunConfig default_config(const std::vector<std::pair<std::string, std::string>>& overrides) {
  pt::ptree tree;
  apply_overrides(tree, overrides);
  return from_tree(tree);
}

namespace {

std::string solution_name(SolutionKind k) {
  switch (k) {
    case SolutionKind::Corner:
      return "corner";
    case SolutionKind::Quadratic:
      return "quadratic";
    case SolutionKind::Zero:
      return "zero";
  }
  return "?";
}

}  // namespace

std::string canonical_config(const RunConfig& c) {
  std::string s;
  s += fmt::format("[domain]\nkind={}\nomega={:.17g}\n", to_string(c.domain), c.omega);
  s += fmt::format(
      "[scheme]\nid={}\ngamma={:.17g}\ndt={:.17g}\nT={:.17g}\nsolution={}\nregular={}\ntime={}\ntol={:.17g}\n",
      c.scheme.scheme, c.scheme.gamma, c.scheme.dt, c.scheme.final_time, solution_name(c.solution),
      to_string(c.regular), c.time_factor == TimeFactor::Exponential ? "exp" : "frozen", c.tol);
  s += fmt::format("[mesh]\nh={:.17g}\nlevels={}\nquadrature_degree={}\n", c.h, c.levels, c.quadrature_degree);
  s += fmt::format("[weights]\nnu={:.17g}\nnu_star={:.17g}\nmu_star={:.17g}\ndelta={:.17g}\n", c.weights.nu,
                   c.weights.nu_star, c.weights.mu_star, c.weights.delta);
  s += fmt::format("[sweep]\nnu={}\nnu_star={}\ndelta={}\ncheckpoints={}\n", join(c.sweep.nu), join(c.sweep.nu_star),
                   join(c.sweep.delta), c.sweep.checkpoints);
  s += fmt::format("[output]\ndir={}\n", c.output_dir.string());
  return s;
}

std::string canonical_run_key(const RunConfig& c, const WeightParams& w, double h) {
  // The output directory and sweep grid do not influence a single run.
  return fmt::format(
      "cornerflow-run-v1\ndomain={} omega={:.17g}\nscheme={} gamma={:.17g} dt={:.17g} T={:.17g}\n"
      "solution={} regular={} time={} tol={:.17g}\nh={:.17g} quadrature_degree={}\n"
      "nu={:.17g} nu_star={:.17g} mu_star={:.17g} delta={:.17g}\n",
      to_string(c.domain), c.omega, c.scheme.scheme, c.scheme.gamma, c.scheme.dt, c.scheme.final_time,
      solution_name(c.solution), to_string(c.regular), c.time_factor == TimeFactor::Exponential ? "exp" : "frozen",
      c.tol, h, c.quadrature_degree, w.nu, w.nu_star, w.mu_star, w.delta);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

double parse_angle(const std::string& text) {
  static const std::regex pattern(
      R"(^\s*([0-9]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, pattern)) {
    const double num = m[1].length() > 0 ? to_double("angle", m[1].str()) : 1.0;
    const double den = m[2].matched ? to_double("angle", m[2].str()) : 1.0;
    if (den == 0.0) throw ValidationError(fmt::format("angle '{}' divides by zero", text));
    return num * std::numbers::pi / den;
  }
  return to_double("angle", trim(text));
}

DomainSpec make_domain(const RunConfig& c) {
  return c.domain == DomainKind::Custom ? build_domain(c.omega) : build_domain(c.domain);
}

double corner_angle(const RunConfig& c) { return make_domain(c).corner_angle; }

std::shared_ptr<const ExactSolution> make_exact_solution(const RunConfig& c) {
  switch (c.solution) {
    case SolutionKind::Corner:
      return std::make_shared<ExactCornerSolution>(corner_angle(c), c.regular, c.time_factor);
    case SolutionKind::Quadratic:
      return std::make_shared<QuadraticSolution>(c.time_factor);
    case SolutionKind::Zero:
      return std::make_shared<ZeroSolution>();
  }
  throw ValidationError("unknown solution kind");
}

}  // namespace cornerflow
