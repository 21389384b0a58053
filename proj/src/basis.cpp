#include "cornerflow/basis.hpp"

#include "cornerflow/weight.hpp"

namespace cornerflow {

P2Values ref_basis_p2(const Vec2& ref) {
  const double l0 = 1.0 - ref.x - ref.y;
  const double l1 = ref.x;
  const double l2 = ref.y;
  const Vec2 g0{-1.0, -1.0};
  const Vec2 g1{1.0, 0.0};
  const Vec2 g2{0.0, 1.0};
  P2Values p;
  p.value = {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
             4.0 * l0 * l1,         4.0 * l1 * l2,         4.0 * l2 * l0};
  p.grad = {(4.0 * l0 - 1.0) * g0,     (4.0 * l1 - 1.0) * g1,     (4.0 * l2 - 1.0) * g2,
            4.0 * (l1 * g0 + l0 * g1), 4.0 * (l2 * g1 + l1 * g2), 4.0 * (l0 * g2 + l2 * g0)};
  return p;
}

P1Values ref_basis_p1(const Vec2& ref) {
  P1Values p;
  p.value = {1.0 - ref.x - ref.y, ref.x, ref.y};
  p.grad = {Vec2{-1.0, -1.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
  return p;
}

const std::array<Vec2, 6>& p2_reference_nodes() {
  static const std::array<Vec2, 6> nodes{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0},
                                         Vec2{0.5, 0.0}, Vec2{0.5, 0.5}, Vec2{0.0, 0.5}};
  return nodes;
}

AffineMap::AffineMap(const std::array<Vec2, 3>& tri)
    : origin(tri[0]), e1(tri[1] - tri[0]), e2(tri[2] - tri[0]), det(cross(e1, e2)) {
  // J = [e1 e2]; J^{-1} = 1/det [[e2.y, -e2.x], [-e1.y, e1.x]]
  inv_row0 = Vec2{e2.y, -e2.x} / det;
  inv_row1 = Vec2{-e1.y, e1.x} / det;
}

Vec2 AffineMap::to_reference(const Vec2& x) const {
  const Vec2 d = x - origin;
  return {dot(inv_row0, d), dot(inv_row1, d)};
}

namespace {

template <std::size_t N, typename Values>
std::array<WeightedValue, N> weighted(const std::array<Vec2, 3>& tri, const Vec2& ref, const Values& chi, double sigma,
                                      double delta) {
  const AffineMap map(tri);
  const auto [scale, scale_grad] = rho_pow_grad(map.to_physical(ref), -sigma, delta);
  std::array<WeightedValue, N> out;
  for (std::size_t k = 0; k < N; ++k) {
    const Vec2 g = map.physical_gradient(chi.grad[k]);
    out[k].value = chi.value[k] * scale;
    out[k].grad = scale * g + chi.value[k] * scale_grad;
  }
  return out;
}

}  // namespace

std::array<WeightedValue, 6> weighted_basis_p2(const std::array<Vec2, 3>& tri, const Vec2& ref, double sigma,
                                               double delta) {
  return weighted<6>(tri, ref, ref_basis_p2(ref), sigma, delta);
}

std::array<WeightedValue, 3> weighted_basis_p1(const std::array<Vec2, 3>& tri, const Vec2& ref, double sigma,
                                               double delta) {
  return weighted<3>(tri, ref, ref_basis_p1(ref), sigma, delta);
}

}  // namespace cornerflow
