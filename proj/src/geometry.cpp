#include "smoothcheck/geometry.hpp"

#include <algorithm>

namespace smoothcheck {

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return dist(p, a);
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return dist(p, b);
  if (d1 * d4 - d3 * d2 <= 0 && d1 >= 0 && d3 <= 0) return point_segment_distance(p, a, b);
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return dist(p, c);
  if (d5 * d2 - d1 * d6 <= 0 && d2 >= 0 && d6 <= 0) return point_segment_distance(p, a, c);
  if (d3 * d6 - d5 * d4 <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return point_segment_distance(p, b, c);
  const Vec3 n = normalized(cross(ab, ac));
  return std::abs(dot(ap, n));
}

}  // namespace smoothcheck
