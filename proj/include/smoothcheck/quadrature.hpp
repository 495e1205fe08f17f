#ifndef SMOOTHCHECK_QUADRATURE_HPP
#define SMOOTHCHECK_QUADRATURE_HPP

#include <vector>

#include "smoothcheck/geometry.hpp"
#include "smoothcheck/multi_index.hpp"

namespace smoothcheck {

struct QuadPoint {
  Vec3 x;
  double w;
};
using QuadRule = std::vector<QuadPoint>;

/// Gauss-Legendre nodes/weights on (-1, 1), exact for degree 2n-1.
std::vector<std::pair<double, double>> gauss_legendre(int n);

/// Rules exact for total-degree `degree` polynomials on the given cell.
QuadRule interval_rule(double a, double b, int degree);
QuadRule triangle_rule(const Vec3& v0, const Vec3& v1, const Vec3& v2, int degree);
QuadRule quad_cell_rule(const std::vector<Vec3>& v, int degree);  // bilinear quadrilateral
QuadRule tet_rule(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& v3, int degree);
QuadRule hex_rule(const std::vector<Vec3>& v, int degree);  // trilinear hexahedron

/// Simplex dispatch: verts.size() == dim+1.
QuadRule simplex_rule(int dim, const std::vector<Vec3>& verts, int degree);

/// Half-disk/half-ball rules: the half on the `side` of the plane through
/// `center` with unit normal `normal` (side=+1 keeps normal-positive points).
/// Radial and polar factors are Gauss rules chosen so polynomials of total
/// degree `degree` integrate to machine accuracy; in 3D the rule is exact.
QuadRule half_segment_rule(double center, double radius, int degree, int side);
QuadRule half_disk_rule(const Vec3& center, const Vec3& normal, double radius, int degree, int side);
QuadRule half_ball_rule(const Vec3& center, const Vec3& normal, double radius, int degree, int side);
QuadRule half_ball_rule_nd(int dim, const Vec3& center, const Vec3& normal, double radius, int degree,
                           int side);

/// Closed form for the integral of xi^gamma over the half-ball of the given
/// radius centered at the origin, cut by the plane {xi_1 = 0}; side=+1 is the
/// positive half. Serves as the exactness oracle for the polar rules and as
/// the Gram assembly route for the jump quadratic form.
long double half_ball_monomial_integral(int dim, const MultiIndex& gamma, long double radius, int side);

}  // namespace smoothcheck

#endif
