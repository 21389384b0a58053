#include "cornerflow/mesh.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "cornerflow/error.hpp"

namespace cornerflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinAngleDeg = 20.0;
constexpr double kMaxDiameterRatio = 3.0;

// Snap values within 1e-14 of an integer; keeps box-aligned points exact.
double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-14 ? r : v;
}

// Point k/n along [p, q], computed from the lexicographically smaller
// endpoint so that neighbouring blocks produce bitwise identical points.
Vec2 edge_point(const Vec2& p, const Vec2& q, int k, int n) {
  if (k == 0) return p;
  if (k == n) return q;
  if (q < p) return edge_point(q, p, n - k, n);
  return p + (q - p) * (static_cast<double>(k) / n);
}

using EdgeKey = std::pair<Index, Index>;

EdgeKey edge_key(Index a, Index b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

struct EdgeUse {
  int count = 0;
  Index first_a = 0;  // oriented as in the first incident triangle
  Index first_b = 0;
};

std::map<EdgeKey, EdgeUse> edge_incidence(const Mesh& mesh) {
  std::map<EdgeKey, EdgeUse> edges;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Index a = tri[k];
      const Index b = tri[(k + 1) % 3];
      auto& use = edges[edge_key(a, b)];
      if (use.count == 0) {
        use.first_a = a;
        use.first_b = b;
      }
      ++use.count;
    }
  }
  return edges;
}

int polygon_edge_of(const std::vector<Vec2>& polygon, const Vec2& a, const Vec2& b) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % n];
    const double tol = 1e-12 * std::max(1.0, norm(q - p));
    if (distance_to_segment(a, p, q) <= tol && distance_to_segment(b, p, q) <= tol) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

// Rebuilds the boundary edge list from edge incidence.
std::vector<BoundaryEdge> collect_boundary(const Mesh& mesh, const std::vector<Vec2>* polygon) {
  std::vector<BoundaryEdge> boundary;
  for (const auto& [key, use] : edge_incidence(mesh)) {
    if (use.count > 2) {
      throw ValidationError(
          fmt::format("non-conforming mesh: edge ({}, {}) shared by {} triangles", key.first, key.second, use.count));
    }
    if (use.count == 1) {
      BoundaryEdge edge;
      edge.v = {use.first_a, use.first_b};
      if (polygon != nullptr) {
        edge.flag = polygon_edge_of(*polygon, mesh.vertices[use.first_a], mesh.vertices[use.first_b]);
        if (edge.flag < 0) {
          throw ValidationError(
              fmt::format("boundary edge ({}, {}) does not lie on the polygon boundary", use.first_a, use.first_b));
        }
      }
      boundary.push_back(edge);
    }
  }
  return boundary;
}

// Renumbers vertices in lexicographic coordinate order.
void sort_vertices(Mesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  std::vector<Index> order(nv);
  for (Index i = 0; i < nv; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return mesh.vertices[a] < mesh.vertices[b]; });
  std::vector<Index> new_index(nv);
  std::vector<Vec2> sorted(nv);
  for (Index i = 0; i < nv; ++i) {
    new_index[order[i]] = i;
    sorted[i] = mesh.vertices[order[i]];
  }
  mesh.vertices = std::move(sorted);
  for (auto& tri : mesh.triangles)
    for (auto& v : tri) v = new_index[v];
  for (auto& edge : mesh.boundary)
    for (auto& v : edge.v) v = new_index[v];
  std::sort(mesh.boundary.begin(), mesh.boundary.end(), [](const BoundaryEdge& a, const BoundaryEdge& b) {
    return edge_key(a.v[0], a.v[1]) < edge_key(b.v[0], b.v[1]);
  });
}

DomainSpec make_polygon(DomainKind kind, double omega, const Vec2& ray_end) {
  DomainSpec d;
  d.kind = kind;
  d.corner_angle = omega;
  d.corner_vertex = 0;
  const Vec2 origin{0.0, 0.0};
  d.vertices = {origin, {1.0, 0.0}, {1.0, 1.0}, {-1.0, 1.0}};

  // Upper rectangle (-1,1)x(0,1) as two unit squares, diagonals through the origin.
  d.blocks.push_back({origin, Vec2{1.0, 0.0}, Vec2{1.0, 1.0}});
  d.blocks.push_back({origin, Vec2{1.0, 1.0}, Vec2{0.0, 1.0}});
  d.blocks.push_back({Vec2{-1.0, 0.0}, origin, Vec2{-1.0, 1.0}});
  d.blocks.push_back({origin, Vec2{0.0, 1.0}, Vec2{-1.0, 1.0}});

  if (kind == DomainKind::Omega0) {
    d.vertices.push_back({-1.0, 0.0});
    return d;
  }

  // Lower wedge pi <= theta <= omega, fanned from the origin through the box
  // points it contains.
  std::vector<Vec2> fan{{-1.0, 0.0}};
  std::vector<Vec2> lower_corners;
  if (omega > 1.25 * kPi) {
    fan.push_back({-1.0, -1.0});
    lower_corners.push_back({-1.0, -1.0});
  }
  if (omega > 1.5 * kPi) fan.push_back({0.0, -1.0});
  if (omega > 1.75 * kPi) {
    fan.push_back({1.0, -1.0});
    lower_corners.push_back({1.0, -1.0});
  }
  if (!(fan.back() == ray_end)) fan.push_back(ray_end);

  for (const Vec2& c : lower_corners) d.vertices.push_back(c);
  if (!(d.vertices.back() == ray_end)) d.vertices.push_back(ray_end);

  for (std::size_t i = 0; i + 1 < fan.size(); ++i) d.blocks.push_back({origin, fan[i], fan[i + 1]});
  return d;
}

Vec2 ray_box_exit(double omega) {
  const double c = std::cos(omega);
  const double s = std::sin(omega);
  Vec2 e;
  if (omega <= 1.25 * kPi) {
    e = {-1.0, -s / c};
  } else if (omega <= 1.75 * kPi) {
    e = {-c / s, -1.0};
  } else {
    e = {1.0, s / c};
  }
  return {snap(e.x), snap(e.y)};
}

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Omega0:
      return "omega0";
    case DomainKind::Omega1:
      return "omega1";
    case DomainKind::Omega2:
      return "omega2";
    case DomainKind::Omega3:
      return "omega3";
    case DomainKind::Custom:
      return "custom";
  }
  return "custom";
}

DomainKind parse_domain_kind(std::string_view name) {
  if (name == "omega0" || name == "0") return DomainKind::Omega0;
  if (name == "omega1" || name == "1") return DomainKind::Omega1;
  if (name == "omega2" || name == "2") return DomainKind::Omega2;
  if (name == "omega3" || name == "3") return DomainKind::Omega3;
  if (name == "custom") return DomainKind::Custom;
  throw ValidationError(fmt::format("unknown domain '{}' (expected omega0..omega3 or custom)", name));
}

double DomainSpec::area() const {
  double a = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(vertices[i], vertices[(i + 1) % n]);
  return 0.5 * a;
}

double DomainSpec::shortest_edge() const {
  double s = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) s = std::min(s, norm(vertices[(i + 1) % n] - vertices[i]));
  return s;
}

double DomainSpec::interior_angle(Index vertex) const {
  const std::size_t n = vertices.size();
  const Vec2& v = vertices[vertex];
  const Vec2 to_next = vertices[(vertex + 1) % n] - v;
  const Vec2 to_prev = vertices[(vertex + n - 1) % n] - v;
  // Counterclockwise polygon: the interior lies counterclockwise from the
  // outgoing edge to the incoming one.
  double a = std::atan2(cross(to_next, to_prev), dot(to_next, to_prev));
  if (a <= 0.0) a += 2.0 * kPi;
  return a;
}

DomainSpec build_domain(DomainKind kind) {
  switch (kind) {
    case DomainKind::Omega0:
      return make_polygon(kind, kPi, {});
    case DomainKind::Omega1:
      return make_polygon(kind, 1.5 * kPi, {0.0, -1.0});
    case DomainKind::Omega2:
      return make_polygon(kind, 1.25 * kPi, {-1.0, -1.0});
    case DomainKind::Omega3:
      // Sloped edge at the exact angle 9pi/8: slope tan(pi/8) = sqrt(2) - 1.
      return make_polygon(kind, 1.125 * kPi, {-1.0, -(std::numbers::sqrt2 - 1.0)});
    case DomainKind::Custom:
      break;
  }
  throw ValidationError("build_domain(kind): a custom domain needs an explicit angle");
}

DomainSpec build_domain(double omega) {
  if (!(omega > kPi && omega < 2.0 * kPi)) {
    throw ValidationError(fmt::format("corner angle {} outside (pi, 2pi)", omega));
  }
  return make_polygon(DomainKind::Custom, omega, ray_box_exit(omega));
}

double Mesh::area(Index t) const {
  const auto c = corners(t);
  return signed_area(c[0], c[1], c[2]);
}

double Mesh::total_area() const {
  double a = 0.0;
  for (Index t = 0; t < triangles.size(); ++t) a += area(t);
  return a;
}

double triangle_diameter(const std::array<Vec2, 3>& t) {
  return std::max({norm(t[1] - t[0]), norm(t[2] - t[1]), norm(t[0] - t[2])});
}

double triangle_min_angle(const std::array<Vec2, 3>& t) {
  double m = kPi;
  for (int k = 0; k < 3; ++k) {
    const Vec2 u = t[(k + 1) % 3] - t[k];
    const Vec2 v = t[(k + 2) % 3] - t[k];
    m = std::min(m, std::atan2(std::abs(cross(u, v)), dot(u, v)));
  }
  return m;
}

Mesh triangulate(const DomainSpec& domain, double h) {
  if (!(h > 0.0)) throw ValidationError(fmt::format("mesh size h must be positive, got {}", h));
  if (h > domain.shortest_edge() + 1e-12) {
    throw ValidationError(
        fmt::format("mesh size h = {} exceeds the shortest polygon edge {}", h, domain.shortest_edge()));
  }
  if (domain.blocks.empty()) throw ValidationError("domain has no block decomposition");

  const int n = std::max(1, static_cast<int>(std::ceil(1.0 / h - 1e-9)));

  std::map<Vec2, Index> index_of;
  std::vector<std::array<Vec2, 3>> tris;
  tris.reserve(domain.blocks.size() * static_cast<std::size_t>(n) * n);

  for (const auto& block : domain.blocks) {
    const Vec2& a = block[0];
    const Vec2& b = block[1];
    const Vec2& c = block[2];
    auto lattice = [&](int i, int j) -> Vec2 {
      if (j == 0) return edge_point(a, b, i, n);
      if (i == 0) return edge_point(a, c, j, n);
      if (i + j == n) return edge_point(b, c, j, n);
      return a + (b - a) * (static_cast<double>(i) / n) + (c - a) * (static_cast<double>(j) / n);
    };
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i + j < n; ++i) {
        tris.push_back({lattice(i, j), lattice(i + 1, j), lattice(i, j + 1)});
        if (i + j <= n - 2) tris.push_back({lattice(i + 1, j), lattice(i + 1, j + 1), lattice(i, j + 1)});
      }
    }
  }

  for (const auto& t : tris)
    for (const auto& p : t) index_of.emplace(p, 0);
  Mesh mesh;
  mesh.h = h;
  mesh.vertices.reserve(index_of.size());
  for (auto& [p, idx] : index_of) {
    idx = mesh.vertices.size();
    mesh.vertices.push_back(p);
  }
  mesh.triangles.reserve(tris.size());
  for (const auto& t : tris) {
    std::array<Index, 3> tri{index_of.at(t[0]), index_of.at(t[1]), index_of.at(t[2])};
    if (signed_area(t[0], t[1], t[2]) < 0.0) std::swap(tri[1], tri[2]);
    mesh.triangles.push_back(tri);
  }
  mesh.boundary = collect_boundary(mesh, &domain.vertices);
  sort_vertices(mesh);

  // Quality targets.
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = 0.0;
  Index worst = 0;
  double worst_angle = kPi;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double d = triangle_diameter(c);
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
    const double ang = triangle_min_angle(c);
    if (ang < worst_angle) {
      worst_angle = ang;
      worst = t;
    }
  }
  const double worst_deg = worst_angle * 180.0 / kPi;
  auto describe = [&](Index t) {
    const auto c = mesh.corners(t);
    return fmt::format(
        "triangle {} [({:.6g},{:.6g}) ({:.6g},{:.6g}) ({:.6g},{:.6g})] min angle {:.4g} deg, diameter {:.6g}", t,
        c[0].x, c[0].y, c[1].x, c[1].y, c[2].x, c[2].y, triangle_min_angle(c) * 180.0 / kPi, triangle_diameter(c));
  };
  if (worst_deg < kMinAngleDeg) {
    throw ValidationError("mesh quality target unreachable: " + describe(worst));
  }
  if (d_max / d_min > kMaxDiameterRatio || d_min < 0.5 * h || d_max > 2.0 * h) {
    Index offender = 0;
    double dev = 0.0;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
      const double d = triangle_diameter(mesh.corners(t));
      const double score = std::max(d / (2.0 * h), 0.5 * h / d);
      if (score > dev) {
        dev = score;
        offender = t;
      }
    }
    throw ValidationError(fmt::format("mesh quality target unreachable (diameters in [{:.6g}, {:.6g}] for h = {}): {}",
                                      d_min, d_max, h, describe(offender)));
  }
  return mesh;
}

Mesh barycentric_split(const Mesh& mesh) {
  if (mesh.split) throw ValidationError("mesh is already barycentrically split");
  validate_mesh(mesh);
  Mesh out;
  out.h = mesh.h;
  out.split = true;
  out.vertices = mesh.vertices;
  out.boundary = mesh.boundary;
  out.vertices.reserve(mesh.num_vertices() + mesh.num_triangles());
  out.triangles.reserve(3 * mesh.num_triangles());
  out.macro_children.reserve(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto c = mesh.corners(t);
    const Index g = out.vertices.size();
    out.vertices.push_back((c[0] + c[1] + c[2]) / 3.0);
    const Index first = out.triangles.size();
    out.triangles.push_back({tri[0], tri[1], g});
    out.triangles.push_back({tri[1], tri[2], g});
    out.triangles.push_back({tri[2], tri[0], g});
    out.macro_children.push_back({first, first + 1, first + 2});
  }
  sort_vertices(out);
  return out;
}

MeshReport mesh_report(const Mesh& mesh) {
  MeshReport r;
  r.num_vertices = mesh.num_vertices();
  r.num_triangles = mesh.num_triangles();
  r.num_boundary_edges = mesh.boundary.size();
  r.h_min = std::numeric_limits<double>::infinity();
  r.min_angle_deg = 180.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double d = triangle_diameter(c);
    r.h_min = std::min(r.h_min, d);
    r.h_max = std::max(r.h_max, d);
    r.min_angle_deg = std::min(r.min_angle_deg, triangle_min_angle(c) * 180.0 / kPi);
    r.area += mesh.area(t);
  }
  if (mesh.num_triangles() == 0) r.h_min = 0.0;
  return r;
}

std::string format_report(const MeshReport& r) {
  return fmt::format(
      "vertices {}\ntriangles {}\nboundary_edges {}\nh_min {:.17g}\nh_max {:.17g}\nmin_angle_deg {:.17g}\narea "
      "{:.17g}\n",
      r.num_vertices, r.num_triangles, r.num_boundary_edges, r.h_min, r.h_max, r.min_angle_deg, r.area);
}

void validate_mesh(const Mesh& mesh) {
  const std::size_t nv = mesh.num_vertices();
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    for (Index v : mesh.triangles[t]) {
      if (v >= nv) throw ValidationError(fmt::format("triangle {} references vertex {} >= {}", t, v, nv));
    }
    if (!(mesh.area(t) > 0.0)) {
      throw ValidationError(fmt::format("triangle {} has non-positive area {}", t, mesh.area(t)));
    }
  }
  std::map<EdgeKey, int> boundary_set;
  for (const auto& e : mesh.boundary) boundary_set[edge_key(e.v[0], e.v[1])] += 1;
  for (const auto& [key, use] : edge_incidence(mesh)) {
    if (use.count > 2) {
      throw ValidationError(fmt::format("edge ({}, {}) shared by {} triangles", key.first, key.second, use.count));
    }
    const bool listed = boundary_set.count(key) > 0;
    if ((use.count == 1) != listed) {
      throw ValidationError(
          fmt::format("edge ({}, {}) incidence {} inconsistent with boundary list", key.first, key.second, use.count));
    }
  }
  if (mesh.split) {
    if (mesh.macro_children.size() * 3 != mesh.num_triangles()) {
      throw ValidationError("macro map does not cover all triangles");
    }
    for (Index m = 0; m < mesh.macro_children.size(); ++m) {
      const auto& ch = mesh.macro_children[m];
      // The three children share exactly one vertex: the macro centroid.
      const Index g = mesh.triangles[ch[0]][2];
      for (Index c : ch) {
        const auto& tri = mesh.triangles[c];
        if (std::find(tri.begin(), tri.end(), g) == tri.end()) {
          throw ValidationError(fmt::format("macro triangle {} children do not share a centroid", m));
        }
      }
    }
  }
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << fmt::format("{} {} {}\n", mesh.num_vertices(), mesh.num_triangles(), mesh.boundary.size());
  for (const auto& v : mesh.vertices) out << fmt::format("{:.17g} {:.17g}\n", v.x, v.y);
  for (const auto& t : mesh.triangles) out << fmt::format("{} {} {}\n", t[0], t[1], t[2]);
  for (const auto& e : mesh.boundary) out << fmt::format("{} {} {}\n", e.v[0], e.v[1], e.flag);
}

Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(in >> nv >> nt >> nb)) throw ValidationError("mesh file: malformed header");
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices) {
    if (!(in >> v.x >> v.y)) throw ValidationError("mesh file: truncated vertex section");
  }
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw ValidationError("mesh file: truncated triangle section");
  }
  mesh.boundary.resize(nb);
  for (auto& e : mesh.boundary) {
    if (!(in >> e.v[0] >> e.v[1] >> e.flag)) throw ValidationError("mesh file: truncated boundary section");
  }
  validate_mesh(mesh);
  mesh.h = mesh_report(mesh).h_max;
  return mesh;
}

}  // namespace cornerflow
