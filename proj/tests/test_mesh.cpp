#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "cornerflow/error.hpp"
#include "cornerflow/mesh.hpp"

using namespace cornerflow;

namespace {

constexpr double kPi = std::numbers::pi;

Mesh single_triangle() {
  Mesh m;
  m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m.triangles = {{0, 1, 2}};
  m.boundary = {{{0, 1}, 0}, {{1, 2}, 1}, {{2, 0}, 2}};
  m.h = 1.0;
  return m;
}

// Sum of element angles at the vertex located at the origin.
double angle_at_origin(const Mesh& mesh) {
  double total = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    for (int k = 0; k < 3; ++k) {
      if (!(c[k] == Vec2{0.0, 0.0})) continue;
      const Vec2 a = c[(k + 1) % 3] - c[k];
      const Vec2 b = c[(k + 2) % 3] - c[k];
      total += std::acos(dot(a, b) / (norm(a) * norm(b)));
    }
  }
  return total;
}

bool on_polygon_boundary(const DomainSpec& d, const Vec2& p) {
  for (std::size_t i = 0; i < d.vertices.size(); ++i) {
    const Vec2& a = d.vertices[i];
    const Vec2& b = d.vertices[(i + 1) % d.vertices.size()];
    if (distance_to_segment(p, a, b) <= 1e-12) return true;
  }
  return false;
}

}  // namespace

TEST(Domain, ControlRectangle) {
  const DomainSpec d = build_domain(DomainKind::Omega0);
  EXPECT_NEAR(d.area(), 2.0, 1e-14);
  EXPECT_NEAR(d.corner_angle, kPi, 1e-14);
  EXPECT_NEAR(d.interior_angle(d.corner_vertex), kPi, 1e-12);
}

TEST(Domain, CornerAngles) {
  const DomainSpec d1 = build_domain(DomainKind::Omega1);
  EXPECT_NEAR(d1.area(), 3.0, 1e-14);
  EXPECT_NEAR(d1.interior_angle(d1.corner_vertex), 1.5 * kPi, 1e-12);
  const DomainSpec d2 = build_domain(DomainKind::Omega2);
  EXPECT_NEAR(d2.area(), 2.5, 1e-14);
  EXPECT_NEAR(d2.interior_angle(d2.corner_vertex), 1.25 * kPi, 1e-12);
  const DomainSpec d3 = build_domain(DomainKind::Omega3);
  EXPECT_NEAR(d3.interior_angle(d3.corner_vertex), 9.0 * kPi / 8.0, 1e-12);
  EXPECT_NEAR(d3.area(), 2.0 + 0.5 * (std::sqrt(2.0) - 1.0), 1e-12);
}

TEST(Domain, CustomAngleRejectsConvex) {
  EXPECT_THROW(build_domain(0.9 * kPi), ValidationError);
  EXPECT_THROW(build_domain(DomainKind::Custom), ValidationError);
  EXPECT_NEAR(build_domain(1.7 * kPi).interior_angle(0), 1.7 * kPi, 1e-12);
}

TEST(Domain, KindNamesRoundTrip) {
  for (DomainKind k : {DomainKind::Omega0, DomainKind::Omega1, DomainKind::Omega2, DomainKind::Omega3})
    EXPECT_EQ(parse_domain_kind(to_string(k)), k);
  EXPECT_THROW(parse_domain_kind("omega9"), ValidationError);
}

TEST(Triangulate, CoarsestControlMesh) {
  const Mesh m = triangulate(build_domain(DomainKind::Omega0), 1.0);
  EXPECT_GE(m.num_triangles(), 4u);
  EXPECT_NEAR(m.total_area(), 2.0, 1e-12);
}

TEST(Triangulate, ElementCountWithinAreaBounds) {
  const Mesh m = triangulate(build_domain(DomainKind::Omega1), 0.025);
  const double a = 3.0, h2 = 0.025 * 0.025;
  EXPECT_GE(static_cast<double>(m.num_triangles()), 2.0 * a / h2);
  EXPECT_LE(static_cast<double>(m.num_triangles()), 8.0 * a / h2);
}

TEST(Triangulate, BoundaryEdgesOnPolygon) {
  const DomainSpec d = build_domain(DomainKind::Omega2);
  const Mesh m = triangulate(d, 0.5);
  ASSERT_FALSE(m.boundary.empty());
  for (const auto& e : m.boundary) {
    EXPECT_TRUE(on_polygon_boundary(d, m.vertices[e.v[0]]));
    EXPECT_TRUE(on_polygon_boundary(d, m.vertices[e.v[1]]));
    EXPECT_TRUE(on_polygon_boundary(d, 0.5 * (m.vertices[e.v[0]] + m.vertices[e.v[1]])));
  }
}

TEST(Triangulate, RejectsBadSizes) {
  const DomainSpec d = build_domain(DomainKind::Omega1);
  EXPECT_THROW(triangulate(d, 0.0), ValidationError);
  EXPECT_THROW(triangulate(d, -0.1), ValidationError);
  EXPECT_THROW(triangulate(d, 1.5), ValidationError);
}

class MeshInvariants : public ::testing::TestWithParam<std::tuple<DomainKind, double>> {};

TEST_P(MeshInvariants, AreaConformityAngle) {
  const auto [kind, h] = GetParam();
  const DomainSpec d = build_domain(kind);
  const Mesh m = triangulate(d, h);
  EXPECT_NO_THROW(validate_mesh(m));
  EXPECT_NEAR(m.total_area(), d.area(), 1e-10 * d.area());
  EXPECT_NEAR(angle_at_origin(m), d.corner_angle, 1e-10);

  const MeshReport r = mesh_report(m);
  EXPECT_LE(r.h_min, r.h_max);
  EXPECT_GE(r.min_angle_deg, 20.0);
  EXPECT_GE(r.h_max, 0.5 * h);
  EXPECT_LE(r.h_max, 2.0 * h);

  const Mesh s = barycentric_split(m);
  EXPECT_NO_THROW(validate_mesh(s));
  EXPECT_NEAR(s.total_area(), d.area(), 1e-10 * d.area());
  EXPECT_NEAR(angle_at_origin(s), d.corner_angle, 1e-10);

  // every edge is used once (boundary) or twice (interior)
  std::map<std::pair<Index, Index>, int> use;
  for (const auto& t : s.triangles)
    for (int k = 0; k < 3; ++k) ++use[std::minmax(t[k], t[(k + 1) % 3])];
  std::size_t boundary = 0;
  for (const auto& [edge, count] : use) {
    EXPECT_TRUE(count == 1 || count == 2);
    boundary += count == 1;
  }
  EXPECT_EQ(boundary, s.boundary.size());
}

INSTANTIATE_TEST_SUITE_P(Domains, MeshInvariants,
                         ::testing::Values(std::tuple{DomainKind::Omega0, 0.5}, std::tuple{DomainKind::Omega0, 0.1},
                                           std::tuple{DomainKind::Omega1, 0.25}, std::tuple{DomainKind::Omega1, 0.1},
                                           std::tuple{DomainKind::Omega2, 0.2}, std::tuple{DomainKind::Omega3, 0.1}));

TEST(MeshReport, ControlMeshAngle) {
  const MeshReport r = mesh_report(triangulate(build_domain(DomainKind::Omega0), 0.5));
  EXPECT_GE(r.min_angle_deg, 20.0);
  EXPECT_NEAR(r.area, 2.0, 1e-12);
}

TEST(MeshReport, SingleTriangleDiameterIsLongestEdge) {
  const MeshReport r = mesh_report(single_triangle());
  EXPECT_NEAR(r.h_max, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.h_min, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.min_angle_deg, 45.0, 1e-12);
  EXPECT_EQ(r.num_boundary_edges, 3u);
}

TEST(BarycentricSplit, SingleTriangle) {
  const Mesh m = single_triangle();
  const Mesh s = barycentric_split(m);
  ASSERT_EQ(s.num_triangles(), 3u);
  EXPECT_EQ(s.num_vertices(), 4u);
  for (Index t = 0; t < 3; ++t) EXPECT_NEAR(s.area(t), m.area(0) / 3.0, 1e-15);
  ASSERT_EQ(s.macro_children.size(), 1u);
  EXPECT_TRUE(s.split);
}

TEST(BarycentricSplit, CountsAndOnce) {
  const Mesh m = triangulate(build_domain(DomainKind::Omega1), 0.25);
  const Mesh s = barycentric_split(m);
  EXPECT_EQ(s.num_triangles(), 3 * m.num_triangles());
  EXPECT_EQ(s.num_vertices(), m.num_vertices() + m.num_triangles());
  EXPECT_EQ(s.boundary.size(), m.boundary.size());
  EXPECT_THROW(barycentric_split(s), ValidationError);
}

TEST(MeshIO, RoundTripAndDeterminism) {
  const DomainSpec d = build_domain(DomainKind::Omega3);
  const Mesh a = barycentric_split(triangulate(d, 0.2));
  const Mesh b = barycentric_split(triangulate(d, 0.2));
  std::ostringstream sa, sb;
  write_mesh(sa, a);
  write_mesh(sb, b);
  EXPECT_EQ(sa.str(), sb.str());

  std::istringstream in(sa.str());
  const Mesh c = read_mesh(in);
  EXPECT_EQ(c.num_vertices(), a.num_vertices());
  EXPECT_EQ(c.triangles, a.triangles);
  EXPECT_NEAR(c.total_area(), a.total_area(), 1e-12);
}

TEST(MeshIO, MalformedInputRejected) {
  std::istringstream bad("3 1");
  EXPECT_THROW(read_mesh(bad), ValidationError);
  std::istringstream truncated("3 1 0\n0 0\n1 0\n");
  EXPECT_THROW(read_mesh(truncated), ValidationError);
}

TEST(ValidateMesh, DetectsNonConformity) {
  Mesh m = single_triangle();
  m.triangles.push_back({0, 1, 2});
  EXPECT_THROW(validate_mesh(m), ValidationError);
  Mesh flipped = single_triangle();
  flipped.triangles = {{0, 2, 1}};
  EXPECT_THROW(validate_mesh(flipped), ValidationError);
}
