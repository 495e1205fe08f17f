#include "smoothcheck/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace smoothcheck {

namespace {

std::vector<std::pair<double, double>> compute_gauss_legendre(int n) {
  // Newton iteration on P_n from the Chebyshev initial guess.
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double x = std::cos(M_PI * (i + 0.75L) / (n + 0.5L));
    long double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1;
      p1 = 0;
      for (int k = 0; k < n; ++k) {
        const long double p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) * x * p1 - k * p2) / (k + 1);
      }
      const long double dp = n * (x * p0 - p1) / (x * x - 1);
      const long double dx = p0 / dp;
      x -= dx;
      if (std::abs(static_cast<double>(dx)) < 1e-17) break;
    }
    p0 = 1;
    p1 = 0;
    for (int k = 0; k < n; ++k) {
      const long double p2 = p1;
      p1 = p0;
      p0 = ((2 * k + 1) * x * p1 - k * p2) / (k + 1);
    }
    const long double dp = n * (x * p0 - p1) / (x * x - 1);
    const long double w = 2 / ((1 - x * x) * dp * dp);
    out[i] = {-static_cast<double>(x), static_cast<double>(w)};
    out[n - 1 - i] = {static_cast<double>(x), static_cast<double>(w)};
  }
  if (n % 2 == 1) out[n / 2].first = 0.0;  // keep the symmetric node exact
  return out;
}

int nodes_for_degree(int degree) { return degree / 2 + 1; }

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(b - a, c - a)); }

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(cross(b - a, c - a), d - a) / 6.0;
}

}  // namespace

std::vector<std::pair<double, double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

QuadRule interval_rule(double a, double b, int degree) {
  const auto gl = gauss_legendre(nodes_for_degree(degree));
  QuadRule out;
  out.reserve(gl.size());
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (const auto& [t, w] : gl) out.push_back({{mid + half * t, 0, 0}, w * half});
  return out;
}

QuadRule triangle_rule(const Vec3& v0, const Vec3& v1, const Vec3& v2, int degree) {
  // collapsed-coordinate map from the unit square: exact for the requested
  // degree because the Jacobi factor raises the eta degree by one
  const auto gx = gauss_legendre(nodes_for_degree(degree + 1));
  const auto gy = gauss_legendre(nodes_for_degree(degree + 2));
  const double area2 = 2.0 * tri_area(v0, v1, v2);
  QuadRule out;
  out.reserve(gx.size() * gy.size());
  for (const auto& [tx, wx] : gx) {
    const double xi = 0.5 * (tx + 1);
    for (const auto& [ty, wy] : gy) {
      const double eta = 0.5 * (ty + 1);
      const double l1 = xi * (1 - eta), l2 = eta;  // reference coords
      const Vec3 p = v0 + (v1 - v0) * l1 + (v2 - v0) * l2;
      out.push_back({p, 0.25 * wx * wy * (1 - eta) * area2});
    }
  }
  return out;
}

QuadRule quad_cell_rule(const std::vector<Vec3>& v, int degree) {
  if (v.size() != 4) throw std::invalid_argument("quad_cell_rule: 4 vertices required");
  const auto gl = gauss_legendre(nodes_for_degree(degree + 1));
  QuadRule out;
  out.reserve(gl.size() * gl.size());
  for (const auto& [tx, wx] : gl) {
    for (const auto& [ty, wy] : gl) {
      const double a = 0.5 * (tx + 1), b = 0.5 * (ty + 1);
      // bilinear map
      const Vec3 p = v[0] * ((1 - a) * (1 - b)) + v[1] * (a * (1 - b)) + v[2] * (a * b) + v[3] * ((1 - a) * b);
      const Vec3 dxa = (v[1] - v[0]) * (1 - b) + (v[2] - v[3]) * b;
      const Vec3 dxb = (v[3] - v[0]) * (1 - a) + (v[2] - v[1]) * a;
      const double jac = std::abs(dxa.x * dxb.y - dxa.y * dxb.x);
      out.push_back({p, 0.25 * wx * wy * jac});
    }
  }
  return out;
}

QuadRule tet_rule(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& v3, int degree) {
  const auto gu = gauss_legendre(nodes_for_degree(degree + 2));
  const auto gv = gauss_legendre(nodes_for_degree(degree + 1));
  const auto gw = gauss_legendre(nodes_for_degree(degree));
  const double vol6 = std::abs(tet_volume(v0, v1, v2, v3)) * 6.0;
  QuadRule out;
  out.reserve(gu.size() * gv.size() * gw.size());
  for (const auto& [tu, wu] : gu) {
    const double u = 0.5 * (tu + 1);
    for (const auto& [tv, wv] : gv) {
      const double vq = 0.5 * (tv + 1);
      for (const auto& [tw, ww] : gw) {
        const double w = 0.5 * (tw + 1);
        const double l1 = u, l2 = vq * (1 - u), l3 = w * (1 - u) * (1 - vq);
        const Vec3 p = v0 + (v1 - v0) * l1 + (v2 - v0) * l2 + (v3 - v0) * l3;
        const double jac = (1 - u) * (1 - u) * (1 - vq);
        out.push_back({p, 0.125 * wu * wv * ww * jac * vol6});
      }
    }
  }
  return out;
}

// hexahedron vertex order: bottom face 0-1-2-3 counterclockwise, top 4-5-6-7
// stacked above it
static constexpr int kHexRef[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                      {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

QuadRule hex_rule(const std::vector<Vec3>& v, int degree) {
  if (v.size() != 8) throw std::invalid_argument("hex_rule: 8 vertices required");
  const auto gl = gauss_legendre(nodes_for_degree(degree + 2));
  QuadRule out;
  out.reserve(gl.size() * gl.size() * gl.size());
  for (const auto& [ta, wa] : gl)
    for (const auto& [tb, wb] : gl)
      for (const auto& [tc, wc] : gl) {
        const double a = 0.5 * (ta + 1), b = 0.5 * (tb + 1), c = 0.5 * (tc + 1);
        Vec3 p{0, 0, 0}, da{0, 0, 0}, db{0, 0, 0}, dc{0, 0, 0};
        for (int i = 0; i < 8; ++i) {
          const double fa = kHexRef[i][0] ? a : 1 - a;
          const double fb = kHexRef[i][1] ? b : 1 - b;
          const double fc = kHexRef[i][2] ? c : 1 - c;
          p += v[i] * (fa * fb * fc);
          da += v[i] * ((kHexRef[i][0] ? 1.0 : -1.0) * fb * fc);
          db += v[i] * (fa * (kHexRef[i][1] ? 1.0 : -1.0) * fc);
          dc += v[i] * (fa * fb * (kHexRef[i][2] ? 1.0 : -1.0));
        }
        const double jac = std::abs(dot(cross(da, db), dc));
        out.push_back({p, 0.125 * wa * wb * wc * jac});
      }
  return out;
}

QuadRule simplex_rule(int dim, const std::vector<Vec3>& verts, int degree) {
  if (dim == 1 && verts.size() == 2)
    return interval_rule(std::min(verts[0].x, verts[1].x), std::max(verts[0].x, verts[1].x), degree);
  if (dim == 2 && verts.size() == 3) return triangle_rule(verts[0], verts[1], verts[2], degree);
  if (dim == 3 && verts.size() == 4) return tet_rule(verts[0], verts[1], verts[2], verts[3], degree);
  throw std::invalid_argument("simplex_rule: vertex count does not match dimension");
}

QuadRule half_segment_rule(double center, double radius, int degree, int side) {
  return side > 0 ? interval_rule(center, center + radius, degree)
                  : interval_rule(center - radius, center, degree);
}

QuadRule half_disk_rule(const Vec3& center, const Vec3& normal, double radius, int degree, int side) {
  const auto gr = gauss_legendre(nodes_for_degree(degree + 1));
  // the polar factor is analytic; this node count drives its Gauss error
  // below double rounding for the degrees used here
  const auto gt = gauss_legendre(std::max(24, degree + 12));
  const Frame f = Frame::from_first_axis(normal * static_cast<double>(side), 2);
  QuadRule out;
  out.reserve(gr.size() * gt.size());
  for (const auto& [tr, wr] : gr) {
    const double r = 0.5 * (tr + 1) * radius;
    const double wrad = 0.5 * radius * wr * r;
    for (const auto& [tt, wt] : gt) {
      const double th = 0.5 * M_PI * tt;  // (-pi/2, pi/2) around the kept side
      const Vec3 local{r * std::cos(th), r * std::sin(th), 0};
      out.push_back({center + f.to_global(local), wrad * wt * 0.5 * M_PI});
    }
  }
  return out;
}

QuadRule half_ball_rule(const Vec3& center, const Vec3& normal, double radius, int degree, int side) {
  // r: Gauss in the radial variable; t = cos(polar angle): Gauss (polynomial
  // after substitution); azimuth: trapezoid, exact for trig polynomials
  const auto gr = gauss_legendre(nodes_for_degree(degree + 2));
  const auto gt = gauss_legendre(nodes_for_degree(degree + 1));
  const int nphi = degree + 8;
  const Frame f = Frame::from_first_axis(normal * static_cast<double>(side), 3);
  QuadRule out;
  out.reserve(gr.size() * gt.size() * nphi);
  for (const auto& [tr, wr] : gr) {
    const double r = 0.5 * (tr + 1) * radius;
    const double wrad = 0.5 * radius * wr * r * r;
    for (const auto& [tt, wt] : gt) {
      const double t = 0.5 * (tt + 1);  // cos(theta) in (0,1): kept hemisphere
      const double st = std::sqrt(1 - t * t);
      for (int k = 0; k < nphi; ++k) {
        const double phi = 2 * M_PI * (k + 0.5) / nphi;
        const Vec3 local{r * t, r * st * std::cos(phi), r * st * std::sin(phi)};
        out.push_back({center + f.to_global(local), wrad * 0.5 * wt * 2 * M_PI / nphi});
      }
    }
  }
  return out;
}

QuadRule half_ball_rule_nd(int dim, const Vec3& center, const Vec3& normal, double radius, int degree,
                           int side) {
  if (dim == 1) {
    auto rule = half_segment_rule(0.0, radius, degree, normal.x * side > 0 ? +1 : -1);
    for (auto& q : rule) q.x.x += center.x;
    return rule;
  }
  if (dim == 2) return half_disk_rule(center, normal, radius, degree, side);
  return half_ball_rule(center, normal, radius, degree, side);
}

long double half_ball_monomial_integral(int dim, const MultiIndex& gamma, long double radius, int side) {
  const int s = gamma.order();
  long double v = 0;
  if (dim == 1) {
    v = powl(radius, gamma[0] + 1) / (gamma[0] + 1);
  } else if (dim == 2) {
    if (gamma[1] % 2 == 1) return 0;
    const long double lg = lgammal((gamma[0] + 1) / 2.0L) + lgammal((gamma[1] + 1) / 2.0L) -
                           lgammal((gamma[0] + gamma[1] + 2) / 2.0L);
    v = powl(radius, s + 2) / (s + 2) * expl(lg);
  } else {
    if (gamma[1] % 2 == 1 || gamma[2] % 2 == 1) return 0;
    const long double lg = lgammal((gamma[0] + 1) / 2.0L) + lgammal((gamma[1] + 1) / 2.0L) +
                           lgammal((gamma[2] + 1) / 2.0L) - lgammal((gamma[0] + gamma[1] + gamma[2] + 3) / 2.0L);
    v = powl(radius, s + 3) / (s + 3) * expl(lg);
  }
  if (side < 0 && gamma[0] % 2 == 1) v = -v;
  return v;
}

}  // namespace smoothcheck
