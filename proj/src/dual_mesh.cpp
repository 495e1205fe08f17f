#include "smoothcheck/dual_mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace smoothcheck {

namespace {

double simplex_measure(int dim, const Simplex& s) {
  if (dim == 1) return std::abs(s.v[1].x - s.v[0].x);
  if (dim == 2) return 0.5 * norm(cross(s.v[1] - s.v[0], s.v[2] - s.v[0]));
  return std::abs(dot(cross(s.v[1] - s.v[0], s.v[2] - s.v[0]), s.v[3] - s.v[0])) / 6.0;
}

Vec3 simplex_centroid(const Simplex& s) {
  Vec3 c{0, 0, 0};
  for (int i = 0; i < s.npts; ++i) c += s.v[i];
  return c / static_cast<double>(s.npts);
}

bool simplex_contains(int dim, const Simplex& s, const Vec3& p, double tol) {
  if (dim == 1) {
    const double lo = std::min(s.v[0].x, s.v[1].x), hi = std::max(s.v[0].x, s.v[1].x);
    return p.x >= lo - tol && p.x <= hi + tol;
  }
  if (dim == 2) {
    auto sgn = [](const Vec3& a, const Vec3& b, const Vec3& c) {
      return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    };
    const double total = std::abs(sgn(s.v[0], s.v[1], s.v[2]));
    const double lo = -tol * std::max(total, 1e-300);
    const double s1 = sgn(p, s.v[0], s.v[1]);
    const double s2 = sgn(p, s.v[1], s.v[2]);
    const double s3 = sgn(p, s.v[2], s.v[0]);
    return (s1 >= lo && s2 >= lo && s3 >= lo) || (s1 <= -lo && s2 <= -lo && s3 <= -lo);
  }
  auto vol = [](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return dot(cross(b - a, c - a), d - a) / 6.0;
  };
  const double total = std::abs(vol(s.v[0], s.v[1], s.v[2], s.v[3]));
  const double lo = -tol * std::max(total, 1e-300);
  const double s1 = vol(p, s.v[1], s.v[2], s.v[3]);
  const double s2 = vol(s.v[0], p, s.v[2], s.v[3]);
  const double s3 = vol(s.v[0], s.v[1], p, s.v[3]);
  const double s4 = vol(s.v[0], s.v[1], s.v[2], p);
  return (s1 >= lo && s2 >= lo && s3 >= lo && s4 >= lo) || (s1 <= -lo && s2 <= -lo && s3 <= -lo && s4 <= -lo);
}

Vec3 quad_diagonal_intersection(const std::vector<Vec3>& q) {
  // v0 + t (v2 - v0) = v1 + s (v3 - v1)
  const Vec3 d1 = q[2] - q[0], d2 = q[3] - q[1], rhs = q[1] - q[0];
  const double det = d1.x * (-d2.y) - (-d2.x) * d1.y;
  if (std::abs(det) < 1e-300) throw std::runtime_error("non-convex quadrilateral: parallel diagonals");
  const double t = (rhs.x * (-d2.y) - (-d2.x) * rhs.y) / det;
  const double s = (d1.x * rhs.y - rhs.x * d1.y) / det;
  const double eps = 1e-12;
  if (t <= eps || t >= 1 - eps || s <= eps || s >= 1 - eps)
    throw std::runtime_error("non-convex quadrilateral: diagonal intersection not strictly inside");
  return q[0] + d1 * t;
}

}  // namespace

DualMesh build_dual_covolume(std::shared_ptr<const Mesh> mesh) {
  const Mesh& m = *mesh;
  const int dim = m.dimension();

  std::vector<Vec3> added(m.element_count());
  for (int e = 0; e < m.element_count(); ++e) {
    const auto pts = m.element_vertices(e);
    switch (m.kind()) {
      case ElementKind::interval:
        added[e] = (pts[0] + pts[1]) * 0.5;
        break;
      case ElementKind::triangle:
        added[e] = (pts[0] + pts[1] + pts[2]) / 3.0;
        break;
      case ElementKind::quadrilateral:
        added[e] = quad_diagonal_intersection(pts);
        break;
      case ElementKind::tetrahedron:
        added[e] = (pts[0] + pts[1] + pts[2] + pts[3]) * 0.25;
        break;
      case ElementKind::hexahedron: {
        Vec3 c{0, 0, 0};
        for (const auto& p : pts) c += p;
        added[e] = c / 8.0;
        break;
      }
    }
  }

  std::vector<Covolume> cvs;
  cvs.reserve(m.interfaces().size());
  for (const auto& itf : m.interfaces()) {
    Covolume cv;
    cv.interface_id = itf.id;
    cv.elements = {itf.left_element, itf.right_element};
    const Vec3 pl = added[itf.left_element], pr = added[itf.right_element];
    std::vector<Vec3> fv;
    for (int v : itf.facet_vertices) fv.push_back(m.vertex(v));

    auto half = [&](const Vec3& apex) {
      std::vector<Simplex> pieces;
      if (dim == 1) {
        Simplex s;
        s.npts = 2;
        s.v[0] = apex;
        s.v[1] = itf.evaluation_point;
        pieces.push_back(s);
      } else if (dim == 2) {
        Simplex s;
        s.npts = 3;
        s.v[0] = fv[0];
        s.v[1] = fv[1];
        s.v[2] = apex;
        pieces.push_back(s);
      } else if (fv.size() == 3) {
        Simplex s;
        s.npts = 4;
        s.v = {fv[0], fv[1], fv[2], apex};
        pieces.push_back(s);
      } else {
        // pyramid over a quadrilateral face, split along a face diagonal
        Simplex s1, s2;
        s1.npts = s2.npts = 4;
        s1.v = {fv[0], fv[1], fv[2], apex};
        s2.v = {fv[0], fv[2], fv[3], apex};
        pieces.push_back(s1);
        pieces.push_back(s2);
      }
      return pieces;
    };
    cv.left_pieces = half(pl);
    cv.right_pieces = half(pr);

    cv.vertices = fv;
    cv.vertices.push_back(pl);
    cv.vertices.push_back(pr);

    double meas = 0;
    Vec3 cen{0, 0, 0};
    for (const auto* side : {&cv.left_pieces, &cv.right_pieces})
      for (const auto& s : *side) {
        const double w = simplex_measure(dim, s);
        meas += w;
        cen += simplex_centroid(s) * w;
      }
    cv.measure = meas;
    cv.centroid = cen / meas;
    double diam = 0;
    for (std::size_t i = 0; i < cv.vertices.size(); ++i)
      for (std::size_t j = i + 1; j < cv.vertices.size(); ++j)
        diam = std::max(diam, dist(cv.vertices[i], cv.vertices[j]));
    cv.diameter = diam;
    cv.basis_frame = Frame::from_first_axis(itf.normal, dim);
    for (int d = 0; d < dim; ++d) {
      double ext = 0;
      for (const auto& v : cv.vertices)
        ext = std::max(ext, std::abs(cv.basis_frame.to_local(v - cv.centroid)[d]));
      cv.basis_scale[d] = ext > 0 ? ext : 1.0;
    }
    cvs.push_back(std::move(cv));
  }

  return DualMesh(std::move(mesh), std::move(added), std::move(cvs));
}

bool DualMesh::covolume_contains(int c, const Vec3& p) const {
  return covolume_contains(c, p, 1e-12 * mesh_->h());
}

bool DualMesh::covolume_contains(int c, const Vec3& p, double tol) const {
  const int dim = mesh_->dimension();
  const Covolume& cv = covolumes_[c];
  const double rel = tol / std::max(cv.diameter, 1e-300);
  for (const auto* side : {&cv.left_pieces, &cv.right_pieces})
    for (const auto& s : *side)
      if (simplex_contains(dim, s, p, dim == 1 ? tol : rel)) return true;
  return false;
}

QuadRule DualMesh::covolume_rule(int c, int degree) const {
  const int dim = mesh_->dimension();
  const Covolume& cv = covolumes_[c];
  QuadRule out;
  for (const auto* side : {&cv.left_pieces, &cv.right_pieces})
    for (const auto& s : *side) {
      std::vector<Vec3> verts(s.v.begin(), s.v.begin() + s.npts);
      const QuadRule r = simplex_rule(dim, verts, degree);
      out.insert(out.end(), r.begin(), r.end());
    }
  return out;
}

double DualMesh::covered_measure() const {
  double s = 0;
  for (const auto& cv : covolumes_) s += cv.measure;
  return s;
}

}  // namespace smoothcheck
