#ifndef SMOOTHCHECK_GEOMETRY_HPP
#define SMOOTHCHECK_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>

namespace smoothcheck {

/// Fixed-size point/vector in up to three dimensions. Unused trailing
/// coordinates stay at zero so 1D/2D code can share the 3D arithmetic.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_ = 0.0, double z_ = 0.0) : x(x_), y(y_), z(z_) {}

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double dist(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return v / n;
}

/// Axis-aligned box, the domain of structured meshes.
struct Box {
  Vec3 lo, hi;
};

/// Orthonormal frame whose first axis is the given unit vector. Used to map
/// interface-local constructions onto a coordinate split plane.
struct Frame {
  // columns: axis[0] is the supplied direction
  std::array<Vec3, 3> axis;

  static Frame from_first_axis(const Vec3& n0, int dim) {
    Frame f;
    f.axis[0] = normalized(n0);
    if (dim == 1) {
      f.axis[1] = {0, 1, 0};
      f.axis[2] = {0, 0, 1};
    } else if (dim == 2) {
      f.axis[1] = {-f.axis[0].y, f.axis[0].x, 0};
      f.axis[2] = {0, 0, 1};
    } else {
      // pick the seed axis least aligned with n0
      Vec3 seed = std::abs(f.axis[0].x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
      f.axis[1] = normalized(cross(f.axis[0], seed));
      f.axis[2] = cross(f.axis[0], f.axis[1]);
    }
    return f;
  }

  /// local -> global direction
  Vec3 to_global(const Vec3& y) const {
    return axis[0] * y.x + axis[1] * y.y + axis[2] * y.z;
  }
  /// global -> local direction
  Vec3 to_local(const Vec3& v) const {
    return {dot(axis[0], v), dot(axis[1], v), dot(axis[2], v)};
  }
};

/// Distance from p to the segment [a,b].
inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return dist(p, a);
  double t = dot(p - a, d) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, a + d * t);
}

/// Distance from p to triangle (a,b,c) in 3D.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace smoothcheck

#endif
