#include "cornerflow/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <limits>

#include "cornerflow/error.hpp"

namespace cornerflow {

namespace {

struct GaussLine {
  std::vector<double> x;  // on [0, 1]
  std::vector<double> w;
};

template <unsigned N>
GaussLine gauss_legendre_unit() {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  GaussLine line;
  // Boost stores the non-negative half of the symmetric rule on [-1, 1].
  for (std::size_t i = abscissa.size(); i-- > 0;) {
    if (abscissa[i] == 0.0) continue;
    line.x.push_back(0.5 * (1.0 - abscissa[i]));
    line.w.push_back(0.5 * weights[i]);
  }
  if (N % 2 == 1) {
    line.x.push_back(0.5);
    line.w.push_back(0.5 * weights[0]);
  }
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    if (abscissa[i] == 0.0) continue;
    line.x.push_back(0.5 * (1.0 + abscissa[i]));
    line.w.push_back(0.5 * weights[i]);
  }
  return line;
}

GaussLine gauss_legendre_unit(int n) {
  switch (n) {
    case 1:
      return gauss_legendre_unit<1>();
    case 2:
      return gauss_legendre_unit<2>();
    case 3:
      return gauss_legendre_unit<3>();
    case 4:
      return gauss_legendre_unit<4>();
    case 5:
      return gauss_legendre_unit<5>();
    case 6:
      return gauss_legendre_unit<6>();
    case 7:
      return gauss_legendre_unit<7>();
    case 8:
      return gauss_legendre_unit<8>();
    case 9:
      return gauss_legendre_unit<9>();
    case 10:
      return gauss_legendre_unit<10>();
    case 11:
      return gauss_legendre_unit<11>();
    case 12:
      return gauss_legendre_unit<12>();
    default:
      break;
  }
  throw ValidationError(fmt::format("Gauss-Legendre rule with {} points not available", n));
}

const std::array<Vec2, 3> kReference{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};

void append_mapped(QuadratureRule& out, const QuadratureRule& base, const std::array<Vec2, 3>& tri) {
  const Vec2 e1 = tri[1] - tri[0];
  const Vec2 e2 = tri[2] - tri[0];
  const double jac = std::abs(cross(e1, e2));
  for (std::size_t q = 0; q < base.size(); ++q) {
    out.points.push_back(tri[0] + base.points[q].x * e1 + base.points[q].y * e2);
    out.weights.push_back(base.weights[q] * jac);
  }
}

bool straddles_circle(const std::array<Vec2, 3>& tri, double delta);

}  // namespace

QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw ValidationError("quadrature degree must be non-negative");
  // Duffy map (u, v) -> (u, v (1 - u)) adds one degree in u through the Jacobian.
  const int n = std::max(1, (degree + 2 + 1) / 2);
  const GaussLine line = gauss_legendre_unit(n);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = line.x[i];
      const double v = line.x[j];
      rule.points.push_back({u, v * (1.0 - u)});
      rule.weights.push_back(line.w[i] * line.w[j] * (1.0 - u));
    }
  }
  return rule;
}

QuadratureRule graded_rule(int degree, int vertex, int levels) {
  if (vertex < 0 || vertex > 2) throw ValidationError("graded_rule: vertex must be 0, 1 or 2");
  if (levels < 0) throw ValidationError("graded_rule: levels must be non-negative");
  const QuadratureRule base = triangle_rule(degree);
  QuadratureRule rule;
  rule.degree = degree;
  Vec2 v = kReference[vertex];
  Vec2 a = kReference[(vertex + 1) % 3];
  Vec2 b = kReference[(vertex + 2) % 3];
  for (int level = 0; level < levels; ++level) {
    const Vec2 ma = 0.5 * (v + a);
    const Vec2 mb = 0.5 * (v + b);
    append_mapped(rule, base, {ma, a, b});
    append_mapped(rule, base, {ma, b, mb});
    a = ma;
    b = mb;
  }
  append_mapped(rule, base, {v, a, b});
  return rule;
}

double distance_to_origin(const std::array<Vec2, 3>& tri) {
  const Vec2 o{};
  // Inside (or on) the triangle?
  const double s0 = cross(tri[1] - tri[0], o - tri[0]);
  const double s1 = cross(tri[2] - tri[1], o - tri[1]);
  const double s2 = cross(tri[0] - tri[2], o - tri[2]);
  if ((s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0)) return 0.0;
  return std::min({distance_to_segment(o, tri[0], tri[1]), distance_to_segment(o, tri[1], tri[2]),
                   distance_to_segment(o, tri[2], tri[0])});
}

namespace {

bool straddles_circle(const std::array<Vec2, 3>& tri, double delta) {
  const double far = std::max({norm(tri[0]), norm(tri[1]), norm(tri[2])});
  return distance_to_origin(tri) < delta && far > delta;
}

struct CircleRefiner {
  const std::array<Vec2, 3>& element;
  double delta;
  QuadratureRule base;
  std::array<QuadratureRule, 3> graded;
  QuadratureRule out;

  Vec2 physical(const Vec2& r) const {
    return element[0] + r.x * (element[1] - element[0]) + r.y * (element[2] - element[0]);
  }

  void visit(const std::array<Vec2, 3>& ref, int depth) {
    const std::array<Vec2, 3> phys{physical(ref[0]), physical(ref[1]), physical(ref[2])};
    if (depth > 0 && straddles_circle(phys, delta)) {
      const Vec2 m01 = 0.5 * (ref[0] + ref[1]), m12 = 0.5 * (ref[1] + ref[2]), m20 = 0.5 * (ref[2] + ref[0]);
      visit({ref[0], m01, m20}, depth - 1);
      visit({m01, ref[1], m12}, depth - 1);
      visit({m20, m12, ref[2]}, depth - 1);
      visit({m01, m12, m20}, depth - 1);
      return;
    }
    for (int k = 0; k < 3; ++k) {
      if (norm(phys[k]) == 0.0) {
        append_mapped(out, graded[k], ref);
        return;
      }
    }
    append_mapped(out, base, ref);
  }
};

}  // namespace

QuadratureRule circle_resolved_rule(const std::array<Vec2, 3>& tri, double delta, int degree, int depth, int levels) {
  if (depth < 0) throw ValidationError("circle_resolved_rule: depth must be non-negative");
  CircleRefiner r{tri, delta, triangle_rule(degree), {}, {}};
  for (int v = 0; v < 3; ++v) r.graded[v] = graded_rule(degree, v, levels);
  r.out.degree = degree;
  r.visit(kReference, depth);
  return r.out;
}

QuadratureAssignment build_quadrature(const Mesh& mesh, double delta, int degree, int levels) {
  if (degree < 6) throw ValidationError(fmt::format("base quadrature degree must be >= 6, got {}", degree));
  if (!(delta > 0.0)) throw ValidationError("build_quadrature: delta must be positive");
  QuadratureAssignment qa;
  qa.rules.push_back(triangle_rule(degree));
  for (int v = 0; v < 3; ++v) qa.rules.push_back(graded_rule(degree, v, levels));
  qa.rule_of_element.resize(mesh.num_triangles(), 0);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    if (distance_to_origin(c) > 2.0 * delta) continue;
    if (straddles_circle(c, delta)) {
      qa.rule_of_element[t] = static_cast<int>(qa.rules.size());
      qa.rules.push_back(circle_resolved_rule(c, delta, degree, kDefaultCircleDepth, levels));
      continue;
    }
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const double r = norm(c[k]);
      if (r < best) {
        best = r;
        nearest = k;
      }
    }
    qa.rule_of_element[t] = 1 + nearest;
  }
  return qa;
}

}  // namespace cornerflow
