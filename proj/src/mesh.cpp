#include "smoothcheck/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "smoothcheck/quadrature.hpp"

namespace smoothcheck {

namespace {

constexpr double kGeomTol = 1e-12;

const int kHexFaces[6][4] = {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4},
                             {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
const int kHexEdges[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
const int kTetFaces[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
const int kTetEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(b - a, c - a)); }
double tri_signed_area_2d(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}
double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(cross(b - a, c - a), d - a) / 6.0;
}

double angle_between(const Vec3& u, const Vec3& v) {
  const double c = dot(u, v) / (norm(u) * norm(v));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

/// Dihedral angle along the edge (a,b) between the half-planes through c and d.
double dihedral_angle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 t = normalized(b - a);
  const Vec3 u = (c - a) - t * dot(c - a, t);
  const Vec3 v = (d - a) - t * dot(d - a, t);
  return angle_between(u, v);
}

bool point_in_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, double tol) {
  const double total = std::abs(tri_signed_area_2d(a, b, c));
  const double s1 = tri_signed_area_2d(p, a, b);
  const double s2 = tri_signed_area_2d(p, b, c);
  const double s3 = tri_signed_area_2d(p, c, a);
  const double lo = -tol * std::max(total, 1e-300);
  return (s1 >= lo && s2 >= lo && s3 >= lo) || (s1 <= -lo && s2 <= -lo && s3 <= -lo);
}

bool point_in_tet(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, double tol) {
  const double total = std::abs(tet_signed_volume(a, b, c, d));
  const double s1 = tet_signed_volume(p, b, c, d);
  const double s2 = tet_signed_volume(a, p, c, d);
  const double s3 = tet_signed_volume(a, b, p, d);
  const double s4 = tet_signed_volume(a, b, c, p);
  const double lo = -tol * std::max(total, 1e-300);
  const bool pos = s1 >= lo && s2 >= lo && s3 >= lo && s4 >= lo;
  const bool neg = s1 <= -lo && s2 <= -lo && s3 <= -lo && s4 <= -lo;
  return pos || neg;
}

Vec3 polygon_normal(const std::vector<Vec3>& pts) {
  // Newell's method
  Vec3 n{0, 0, 0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3& p = pts[i];
    const Vec3& q = pts[(i + 1) % pts.size()];
    n.x += (p.y - q.y) * (p.z + q.z);
    n.y += (p.z - q.z) * (p.x + q.x);
    n.z += (p.x - q.x) * (p.y + q.y);
  }
  return n;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(ElementKind k) {
  switch (k) {
    case ElementKind::interval: return "interval";
    case ElementKind::triangle: return "triangle";
    case ElementKind::quadrilateral: return "quadrilateral";
    case ElementKind::tetrahedron: return "tetrahedron";
    case ElementKind::hexahedron: return "hexahedron";
  }
  return "?";
}

ElementKind element_kind_from_string(const std::string& s) {
  if (s == "interval") return ElementKind::interval;
  if (s == "triangle") return ElementKind::triangle;
  if (s == "quadrilateral" || s == "quad") return ElementKind::quadrilateral;
  if (s == "tetrahedron" || s == "tet") return ElementKind::tetrahedron;
  if (s == "hexahedron" || s == "hex") return ElementKind::hexahedron;
  throw std::invalid_argument("unknown element kind: " + s);
}

int element_dimension(ElementKind k) {
  switch (k) {
    case ElementKind::interval: return 1;
    case ElementKind::triangle:
    case ElementKind::quadrilateral: return 2;
    default: return 3;
  }
}

int vertices_per_element(ElementKind k) {
  switch (k) {
    case ElementKind::interval: return 2;
    case ElementKind::triangle: return 3;
    case ElementKind::quadrilateral: return 4;
    case ElementKind::tetrahedron: return 4;
    case ElementKind::hexahedron: return 8;
  }
  return 0;
}

int Mesh::facets_per_element() const {
  switch (kind_) {
    case ElementKind::interval: return 2;
    case ElementKind::triangle: return 3;
    case ElementKind::quadrilateral: return 4;
    case ElementKind::tetrahedron: return 4;
    case ElementKind::hexahedron: return 6;
  }
  return 0;
}

namespace {

std::vector<std::vector<int>> element_facets(ElementKind kind, const std::vector<int>& el) {
  std::vector<std::vector<int>> out;
  switch (kind) {
    case ElementKind::interval:
      out = {{el[0]}, {el[1]}};
      break;
    case ElementKind::triangle:
      out = {{el[0], el[1]}, {el[1], el[2]}, {el[2], el[0]}};
      break;
    case ElementKind::quadrilateral:
      out = {{el[0], el[1]}, {el[1], el[2]}, {el[2], el[3]}, {el[3], el[0]}};
      break;
    case ElementKind::tetrahedron:
      for (const auto& f : kTetFaces) out.push_back({el[f[0]], el[f[1]], el[f[2]]});
      break;
    case ElementKind::hexahedron:
      for (const auto& f : kHexFaces) out.push_back({el[f[0]], el[f[1]], el[f[2]], el[f[3]]});
      break;
  }
  return out;
}

std::vector<std::array<int, 2>> element_edges(ElementKind kind, const std::vector<int>& el) {
  std::vector<std::array<int, 2>> out;
  switch (kind) {
    case ElementKind::interval:
      out = {{el[0], el[1]}};
      break;
    case ElementKind::triangle:
      out = {{el[0], el[1]}, {el[1], el[2]}, {el[2], el[0]}};
      break;
    case ElementKind::quadrilateral:
      out = {{el[0], el[1]}, {el[1], el[2]}, {el[2], el[3]}, {el[3], el[0]}};
      break;
    case ElementKind::tetrahedron:
      for (const auto& e : kTetEdges) out.push_back({el[e[0]], el[e[1]]});
      break;
    case ElementKind::hexahedron:
      for (const auto& e : kHexEdges) out.push_back({el[e[0]], el[e[1]]});
      break;
  }
  return out;
}

}  // namespace

std::vector<Vec3> Mesh::element_vertices(int e) const {
  std::vector<Vec3> out;
  out.reserve(elements_[e].size());
  for (int v : elements_[e]) out.push_back(vertices_[v]);
  return out;
}

std::vector<std::vector<int>> Mesh::element_facet_list(int e) const {
  return element_facets(kind_, elements_[e]);
}

std::vector<std::array<int, 2>> Mesh::edge_list() const {
  std::set<std::array<int, 2>> seen;
  for (const auto& el : elements_)
    for (auto e : element_edges(kind_, el)) {
      if (e[0] > e[1]) std::swap(e[0], e[1]);
      seen.insert(e);
    }
  return {seen.begin(), seen.end()};
}

double Mesh::domain_measure() const {
  double s = 0;
  for (double m : measures_) s += m;
  return s;
}

void Mesh::finalize() {
  const int nv = static_cast<int>(vertices_.size());
  if (dim_ < 1 || dim_ > 3) throw std::invalid_argument("mesh dimension must be 1, 2 or 3");
  if (element_dimension(kind_) != dim_)
    throw std::invalid_argument("element kind " + to_string(kind_) + " does not match dimension " +
                                std::to_string(dim_));
  const int arity = vertices_per_element(kind_);
  for (const auto& el : elements_) {
    if (static_cast<int>(el.size()) != arity)
      throw std::runtime_error("malformed mesh: element arity " + std::to_string(el.size()) +
                               ", expected " + std::to_string(arity));
    for (int v : el)
      if (v < 0 || v >= nv) throw std::runtime_error("malformed mesh: vertex index out of range");
  }
  if (elements_.empty()) throw std::runtime_error("malformed mesh: no elements");

  // orientation normalization
  for (auto& el : elements_) {
    if (kind_ == ElementKind::interval && vertices_[el[0]].x > vertices_[el[1]].x) std::swap(el[0], el[1]);
    if (kind_ == ElementKind::triangle &&
        tri_signed_area_2d(vertices_[el[0]], vertices_[el[1]], vertices_[el[2]]) < 0)
      std::swap(el[1], el[2]);
    if (kind_ == ElementKind::quadrilateral) {
      double s = 0;
      for (int i = 0; i < 4; ++i)
        s += vertices_[el[i]].x * vertices_[el[(i + 1) % 4]].y - vertices_[el[(i + 1) % 4]].x * vertices_[el[i]].y;
      if (s < 0) std::reverse(el.begin(), el.end());
    }
    if (kind_ == ElementKind::tetrahedron &&
        tet_signed_volume(vertices_[el[0]], vertices_[el[1]], vertices_[el[2]], vertices_[el[3]]) < 0)
      std::swap(el[2], el[3]);
  }

  // measures, centroids, diameters
  const int ne = element_count();
  measures_.resize(ne);
  centroids_.resize(ne);
  diameters_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto pts = element_vertices(e);
    double diam = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, dist(pts[i], pts[j]));
    diameters_[e] = diam;
    switch (kind_) {
      case ElementKind::interval:
        measures_[e] = pts[1].x - pts[0].x;
        centroids_[e] = (pts[0] + pts[1]) * 0.5;
        break;
      case ElementKind::triangle:
        measures_[e] = tri_area(pts[0], pts[1], pts[2]);
        centroids_[e] = (pts[0] + pts[1] + pts[2]) / 3.0;
        break;
      case ElementKind::quadrilateral: {
        const double a1 = tri_signed_area_2d(pts[0], pts[1], pts[2]);
        const double a2 = tri_signed_area_2d(pts[0], pts[2], pts[3]);
        // convexity: all corner turns must have one orientation
        for (int i = 0; i < 4; ++i) {
          const double turn = tri_signed_area_2d(pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]);
          if (turn <= kGeomTol * diam * diam) throw std::runtime_error("non-convex quadrilateral element");
        }
        measures_[e] = a1 + a2;
        centroids_[e] =
            ((pts[0] + pts[1] + pts[2]) * (a1 / 3.0) + (pts[0] + pts[2] + pts[3]) * (a2 / 3.0)) / (a1 + a2);
        break;
      }
      case ElementKind::tetrahedron:
        measures_[e] = std::abs(tet_signed_volume(pts[0], pts[1], pts[2], pts[3]));
        centroids_[e] = (pts[0] + pts[1] + pts[2] + pts[3]) * 0.25;
        break;
      case ElementKind::hexahedron: {
        double vol = 0;
        Vec3 c{0, 0, 0};
        for (const auto& q : hex_rule(pts, 2)) {
          vol += q.w;
          c += q.x * q.w;
        }
        measures_[e] = vol;
        centroids_[e] = c / vol;
        break;
      }
    }
    double scale = std::pow(std::max(diam, 1e-300), dim_);
    if (!(measures_[e] > kGeomTol * scale)) throw std::runtime_error("degenerate element");
  }

  h_ = 0;
  for (double d : diameters_) h_ = std::max(h_, d);
  h_min_ = std::numeric_limits<double>::max();
  for (const auto& el : elements_)
    for (const auto& ed : element_edges(kind_, el)) h_min_ = std::min(h_min_, dist(vertices_[ed[0]], vertices_[ed[1]]));

  // facet matching
  std::map<std::vector<int>, std::vector<int>> facet_owners;
  std::map<std::vector<int>, std::vector<int>> facet_oriented;  // one representative orientation
  for (int e = 0; e < ne; ++e) {
    for (const auto& f : element_facets(kind_, elements_[e])) {
      std::vector<int> key = f;
      std::sort(key.begin(), key.end());
      auto& owners = facet_owners[key];
      owners.push_back(e);
      if (owners.size() == 1) facet_oriented[key] = f;
      if (owners.size() > 2) throw std::runtime_error("non-conforming mesh: facet shared by more than two elements");
    }
  }

  boundary_facets_ = 0;
  std::vector<std::vector<int>> boundary;
  for (const auto& [key, owners] : facet_owners)
    if (owners.size() == 1) {
      ++boundary_facets_;
      boundary.push_back(key);
    }

  // hanging-node detection: a vertex in the relative interior of a boundary
  // facet means two refinement levels meet without matching facets
  if (dim_ >= 2) {
    const double tol = kGeomTol * std::max(h_, 1e-300) * 1e3;
    for (const auto& f : boundary) {
      for (int v = 0; v < nv; ++v) {
        if (std::find(f.begin(), f.end(), v) != f.end()) continue;
        const Vec3 p = vertices_[v];
        bool on_facet = false;
        if (dim_ == 2) {
          on_facet = point_segment_distance(p, vertices_[f[0]], vertices_[f[1]]) < tol;
        } else if (f.size() == 3) {
          on_facet = point_triangle_distance(p, vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]) < tol;
        } else {
          const auto& fo = facet_oriented[f];
          on_facet = point_triangle_distance(p, vertices_[fo[0]], vertices_[fo[1]], vertices_[fo[2]]) < tol ||
                     point_triangle_distance(p, vertices_[fo[0]], vertices_[fo[2]], vertices_[fo[3]]) < tol;
        }
        if (!on_facet) continue;
        bool at_corner = false;
        for (int fv : f) at_corner = at_corner || dist(p, vertices_[fv]) < tol;
        if (!at_corner) throw std::runtime_error("non-conforming mesh: hanging node detected");
      }
    }
  }

  // interior interfaces, ordered by (left, right)
  interfaces_.clear();
  for (const auto& [key, owners] : facet_owners) {
    if (owners.size() != 2) continue;
    Interface itf;
    itf.left_element = std::min(owners[0], owners[1]);
    itf.right_element = std::max(owners[0], owners[1]);
    itf.facet_vertices = facet_oriented[key];
    Vec3 xp{0, 0, 0};
    for (int v : itf.facet_vertices) xp += vertices_[v];
    itf.evaluation_point = xp / static_cast<double>(itf.facet_vertices.size());
    if (dim_ == 1) {
      itf.facet_measure = 1.0;
      itf.normal = centroids_[itf.right_element].x > centroids_[itf.left_element].x ? Vec3{1, 0, 0} : Vec3{-1, 0, 0};
    } else if (dim_ == 2) {
      const Vec3 a = vertices_[itf.facet_vertices[0]], b = vertices_[itf.facet_vertices[1]];
      itf.facet_measure = dist(a, b);
      Vec3 nrm = normalized(Vec3{b.y - a.y, a.x - b.x, 0});
      if (dot(nrm, centroids_[itf.right_element] - itf.evaluation_point) < 0) nrm = -nrm;
      itf.normal = nrm;
    } else {
      std::vector<Vec3> fv;
      for (int v : itf.facet_vertices) fv.push_back(vertices_[v]);
      if (fv.size() == 3) {
        itf.facet_measure = tri_area(fv[0], fv[1], fv[2]);
      } else {
        itf.facet_measure = tri_area(fv[0], fv[1], fv[2]) + tri_area(fv[0], fv[2], fv[3]);
      }
      Vec3 nrm = normalized(polygon_normal(fv));
      if (dot(nrm, centroids_[itf.right_element] - itf.evaluation_point) < 0) nrm = -nrm;
      itf.normal = nrm;
    }
    interfaces_.push_back(std::move(itf));
  }
  std::sort(interfaces_.begin(), interfaces_.end(), [](const Interface& a, const Interface& b) {
    return std::tie(a.left_element, a.right_element) < std::tie(b.left_element, b.right_element);
  });
  for (std::size_t i = 0; i < interfaces_.size(); ++i) interfaces_[i].id = static_cast<int>(i);
}

Mesh Mesh::from_data(int dim, ElementKind kind, std::vector<Vec3> vertices,
                     std::vector<std::vector<int>> elements) {
  Mesh m;
  m.dim_ = dim;
  m.kind_ = kind;
  m.vertices_ = std::move(vertices);
  m.elements_ = std::move(elements);
  m.finalize();
  return m;
}

Mesh Mesh::structured(const Box& domain, int dim, const std::array<int, 3>& divisions, ElementKind kind) {
  if (element_dimension(kind) != dim)
    throw std::invalid_argument("element kind " + to_string(kind) + " does not match dimension " +
                                std::to_string(dim));
  for (int d = 0; d < dim; ++d) {
    if (divisions[d] < 1) throw std::invalid_argument("structured mesh needs at least one division per axis");
    if (!(domain.hi[d] > domain.lo[d])) throw std::invalid_argument("structured mesh domain is empty");
  }
  const int nx = divisions[0], ny = dim > 1 ? divisions[1] : 1, nz = dim > 2 ? divisions[2] : 1;
  std::vector<Vec3> verts;
  auto coord = [&](int i, int j, int k) {
    Vec3 p = domain.lo;
    p.x += (domain.hi.x - domain.lo.x) * i / nx;
    if (dim > 1) p.y += (domain.hi.y - domain.lo.y) * j / ny;
    if (dim > 2) p.z += (domain.hi.z - domain.lo.z) * k / nz;
    return p;
  };
  auto vid = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  for (int k = 0; k <= (dim > 2 ? nz : 0); ++k)
    for (int j = 0; j <= (dim > 1 ? ny : 0); ++j)
      for (int i = 0; i <= nx; ++i) verts.push_back(coord(i, j, k));

  std::vector<std::vector<int>> els;
  if (kind == ElementKind::interval) {
    for (int i = 0; i < nx; ++i) els.push_back({i, i + 1});
  } else if (kind == ElementKind::quadrilateral) {
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        els.push_back({vid(i, j, 0), vid(i + 1, j, 0), vid(i + 1, j + 1, 0), vid(i, j + 1, 0)});
  } else if (kind == ElementKind::triangle) {
    // every cell split along the same diagonal
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        els.push_back({vid(i, j, 0), vid(i + 1, j, 0), vid(i + 1, j + 1, 0)});
        els.push_back({vid(i, j, 0), vid(i + 1, j + 1, 0), vid(i, j + 1, 0)});
      }
  } else if (kind == ElementKind::hexahedron) {
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
          els.push_back({vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k),
                         vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1)});
  } else {
    // six tetrahedra per cell from the vertex-permutation split; the pattern
    // repeats identically in every cell, which keeps faces matched
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
          for (const auto& pm : perms) {
            int c[3] = {0, 0, 0};
            std::vector<int> tet;
            tet.push_back(vid(i, j, k));
            for (int s = 0; s < 3; ++s) {
              c[pm[s]] = 1;
              tet.push_back(vid(i + c[0], j + c[1], k + c[2]));
            }
            els.push_back(tet);
          }
  }
  return from_data(dim, kind, std::move(verts), std::move(els));
}

namespace {

/// Key for a refinement point: the sorted parent-vertex ids it interpolates.
using PointKey = std::vector<int>;

struct RefineCtx {
  const Mesh* mesh;
  std::vector<Vec3> verts;
  std::vector<std::vector<int>> els;
  std::map<PointKey, int> known;

  int point(std::vector<int> parents) {
    std::sort(parents.begin(), parents.end());
    auto it = known.find(parents);
    if (it != known.end()) return it->second;
    Vec3 p{0, 0, 0};
    for (int v : parents) p += mesh->vertex(v);
    p = p / static_cast<double>(parents.size());
    verts.push_back(p);
    const int id = static_cast<int>(verts.size()) - 1;
    known.emplace(std::move(parents), id);
    return id;
  }
};

}  // namespace

Mesh Mesh::refined_uniform() const {
  RefineCtx ctx;
  ctx.mesh = this;
  for (int v = 0; v < static_cast<int>(vertices_.size()); ++v) ctx.point({v});

  for (const auto& el : elements_) {
    switch (kind_) {
      case ElementKind::interval: {
        const int m = ctx.point({el[0], el[1]});
        ctx.els.push_back({el[0], m});
        ctx.els.push_back({m, el[1]});
        break;
      }
      case ElementKind::triangle: {
        const int m01 = ctx.point({el[0], el[1]});
        const int m12 = ctx.point({el[1], el[2]});
        const int m02 = ctx.point({el[0], el[2]});
        ctx.els.push_back({el[0], m01, m02});
        ctx.els.push_back({m01, el[1], m12});
        ctx.els.push_back({m02, m12, el[2]});
        ctx.els.push_back({m01, m12, m02});
        break;
      }
      case ElementKind::quadrilateral: {
        const int m01 = ctx.point({el[0], el[1]});
        const int m12 = ctx.point({el[1], el[2]});
        const int m23 = ctx.point({el[2], el[3]});
        const int m30 = ctx.point({el[3], el[0]});
        const int c = ctx.point({el[0], el[1], el[2], el[3]});
        ctx.els.push_back({el[0], m01, c, m30});
        ctx.els.push_back({m01, el[1], m12, c});
        ctx.els.push_back({c, m12, el[2], m23});
        ctx.els.push_back({m30, c, m23, el[3]});
        break;
      }
      case ElementKind::tetrahedron: {
        const int m01 = ctx.point({el[0], el[1]});
        const int m02 = ctx.point({el[0], el[2]});
        const int m03 = ctx.point({el[0], el[3]});
        const int m12 = ctx.point({el[1], el[2]});
        const int m13 = ctx.point({el[1], el[3]});
        const int m23 = ctx.point({el[2], el[3]});
        ctx.els.push_back({el[0], m01, m02, m03});
        ctx.els.push_back({el[1], m01, m12, m13});
        ctx.els.push_back({el[2], m02, m12, m23});
        ctx.els.push_back({el[3], m03, m13, m23});
        // octahedron split along its shortest diagonal
        const double d1 = dist(ctx.verts[m01], ctx.verts[m23]);
        const double d2 = dist(ctx.verts[m02], ctx.verts[m13]);
        const double d3 = dist(ctx.verts[m03], ctx.verts[m12]);
        int a, f, eq[4];
        if (d1 <= d2 && d1 <= d3) {
          a = m01; f = m23; eq[0] = m02; eq[1] = m12; eq[2] = m13; eq[3] = m03;
        } else if (d2 <= d3) {
          a = m02; f = m13; eq[0] = m01; eq[1] = m12; eq[2] = m23; eq[3] = m03;
        } else {
          a = m03; f = m12; eq[0] = m01; eq[1] = m13; eq[2] = m23; eq[3] = m02;
        }
        for (int s = 0; s < 4; ++s) ctx.els.push_back({a, f, eq[s], eq[(s + 1) % 4]});
        break;
      }
      case ElementKind::hexahedron: {
        // lattice points keyed topologically so shared faces refine once
        auto lat = [&](int i, int j, int k) {
          // reference corner coords per the stored vertex order; lattice
          // index 1 spans both corner values on that axis
          static const int rc[8][3] = {{0, 0, 0}, {2, 0, 0}, {2, 2, 0}, {0, 2, 0},
                                       {0, 0, 2}, {2, 0, 2}, {2, 2, 2}, {0, 2, 2}};
          std::vector<int> parents;
          for (int v = 0; v < 8; ++v)
            if ((i == 1 || rc[v][0] == i) && (j == 1 || rc[v][1] == j) && (k == 1 || rc[v][2] == k))
              parents.push_back(el[v]);
          return ctx.point(parents);
        };
        for (int ck = 0; ck < 2; ++ck)
          for (int cj = 0; cj < 2; ++cj)
            for (int ci = 0; ci < 2; ++ci)
              ctx.els.push_back({lat(ci, cj, ck), lat(ci + 1, cj, ck), lat(ci + 1, cj + 1, ck),
                                 lat(ci, cj + 1, ck), lat(ci, cj, ck + 1), lat(ci + 1, cj, ck + 1),
                                 lat(ci + 1, cj + 1, ck + 1), lat(ci, cj + 1, ck + 1)});
        break;
      }
    }
  }
  return from_data(dim_, kind_, std::move(ctx.verts), std::move(ctx.els));
}

bool Mesh::element_contains(int e, const Vec3& p) const { return element_contains(e, p, kGeomTol * h_); }

bool Mesh::element_contains(int e, const Vec3& p, double tol) const {
  const auto pts = element_vertices(e);
  const double rel = tol / std::max(diameters_[e], 1e-300);
  switch (kind_) {
    case ElementKind::interval:
      return p.x >= pts[0].x - tol && p.x <= pts[1].x + tol;
    case ElementKind::triangle:
      return point_in_triangle(p, pts[0], pts[1], pts[2], rel);
    case ElementKind::quadrilateral:
      return point_in_triangle(p, pts[0], pts[1], pts[2], rel) ||
             point_in_triangle(p, pts[0], pts[2], pts[3], rel);
    case ElementKind::tetrahedron:
      return point_in_tet(p, pts[0], pts[1], pts[2], pts[3], rel);
    case ElementKind::hexahedron: {
      static const int split[6][4] = {{0, 1, 2, 6}, {0, 2, 3, 6}, {0, 3, 7, 6},
                                      {0, 7, 4, 6}, {0, 4, 5, 6}, {0, 5, 1, 6}};
      for (const auto& t : split)
        if (point_in_tet(p, pts[t[0]], pts[t[1]], pts[t[2]], pts[t[3]], rel)) return true;
      return false;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// JSON I/O

Mesh Mesh::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed mesh file " + path + ": " + e.what());
  }
  if (!j.contains("dimension") || !j.contains("kind") || !j.contains("vertices") || !j.contains("elements"))
    throw std::runtime_error("malformed mesh file " + path + ": missing field");
  const int dim = j["dimension"].get<int>();
  const ElementKind kind = element_kind_from_string(j["kind"].get<std::string>());
  std::vector<Vec3> verts;
  for (const auto& row : j["vertices"]) {
    if (static_cast<int>(row.size()) != dim)
      throw std::runtime_error("malformed mesh file " + path + ": vertex arity");
    Vec3 p;
    for (int d = 0; d < dim; ++d) p[d] = row[d].get<double>();
    verts.push_back(p);
  }
  std::vector<std::vector<int>> els;
  for (const auto& row : j["elements"]) els.push_back(row.get<std::vector<int>>());
  return from_data(dim, kind, std::move(verts), std::move(els));
}

void Mesh::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out << "{\n  \"dimension\": " << dim_ << ",\n  \"kind\": \"" << to_string(kind_) << "\",\n  \"vertices\": [";
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    out << (i ? ",\n    " : "\n    ") << "[";
    for (int d = 0; d < dim_; ++d) out << (d ? ", " : "") << fmt17(vertices_[i][d]);
    out << "]";
  }
  out << "\n  ],\n  \"elements\": [";
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    out << (i ? ",\n    " : "\n    ") << "[";
    for (std::size_t d = 0; d < elements_[i].size(); ++d) out << (d ? ", " : "") << elements_[i][d];
    out << "]";
  }
  out << "\n  ]\n}\n";
}

// ---------------------------------------------------------------------------
// spec-level wrappers

Mesh build_structured_mesh(const Box& domain, int dim, const std::array<int, 3>& divisions, ElementKind kind) {
  return Mesh::structured(domain, dim, divisions, kind);
}
Mesh jitter_vertices(const Mesh& m, double amplitude, std::uint64_t seed) {
  if (amplitude <= 0) return m;
  // boundary vertices are the ones on boundary facets
  std::vector<bool> on_boundary(m.vertices().size(), false);
  {
    std::map<std::vector<int>, int> counts;
    for (int e = 0; e < m.element_count(); ++e)
      for (auto f : m.element_facet_list(e)) {
        std::sort(f.begin(), f.end());
        counts[f]++;
      }
    for (const auto& [f, c] : counts)
      if (c == 1)
        for (int v : f) on_boundary[v] = true;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> verts = m.vertices();
  const double amp = amplitude * m.h_min();
  for (std::size_t v = 0; v < verts.size(); ++v) {
    // draw in a fixed order so the perturbation is reproducible
    Vec3 offset{u(rng), m.dimension() > 1 ? u(rng) : 0, m.dimension() > 2 ? u(rng) : 0};
    if (on_boundary[v]) continue;
    verts[v] += offset * amp;
  }
  return Mesh::from_data(m.dimension(), m.kind(), std::move(verts), m.elements());
}

Mesh load_mesh(const std::string& path) { return Mesh::load(path); }
void save_mesh(const Mesh& m, const std::string& path) { m.save(path); }
Mesh refine_uniform(const Mesh& m) { return m.refined_uniform(); }
const std::vector<Interface>& interior_interfaces(const Mesh& m) { return m.interfaces(); }

double facet_distance(const Mesh& m, const std::vector<int>& facet, const Vec3& p) {
  if (facet.size() == 1) return dist(m.vertex(facet[0]), p);
  if (facet.size() == 2) return point_segment_distance(p, m.vertex(facet[0]), m.vertex(facet[1]));
  double d = point_triangle_distance(p, m.vertex(facet[0]), m.vertex(facet[1]), m.vertex(facet[2]));
  if (facet.size() == 4)
    d = std::min(d, point_triangle_distance(p, m.vertex(facet[0]), m.vertex(facet[2]), m.vertex(facet[3])));
  return d;
}

double min_facet_distance(const Mesh& m, const std::vector<int>& elements, const std::vector<int>* exclude,
                          const Vec3& p) {
  std::vector<int> excl;
  if (exclude) {
    excl = *exclude;
    std::sort(excl.begin(), excl.end());
  }
  double best = std::numeric_limits<double>::max();
  for (int e : elements)
    for (const auto& f : m.element_facet_list(e)) {
      if (exclude) {
        std::vector<int> key = f;
        std::sort(key.begin(), key.end());
        if (key == excl) continue;
      }
      best = std::min(best, facet_distance(m, f, p));
    }
  return best;
}

// ---------------------------------------------------------------------------
// quality metrics

namespace {

double triangle_inradius(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = dist(b, c), lb = dist(a, c), lc = dist(a, b);
  const double s = 0.5 * (la + lb + lc);
  return tri_area(a, b, c) / s;
}

/// Smallest angle between edges meeting at a vertex and (3D) smallest
/// dihedral angle between adjacent faces, over all elements.
void compute_min_angles(const Mesh& m, double& min_edge_angle, double& min_dihedral) {
  min_edge_angle = M_PI;
  min_dihedral = M_PI;
  for (int e = 0; e < m.element_count(); ++e) {
    const auto pts = m.element_vertices(e);
    switch (m.kind()) {
      case ElementKind::interval:
        break;
      case ElementKind::triangle:
        for (int i = 0; i < 3; ++i)
          min_edge_angle = std::min(min_edge_angle,
                                    angle_between(pts[(i + 1) % 3] - pts[i], pts[(i + 2) % 3] - pts[i]));
        break;
      case ElementKind::quadrilateral:
        for (int i = 0; i < 4; ++i)
          min_edge_angle = std::min(min_edge_angle,
                                    angle_between(pts[(i + 3) % 4] - pts[i], pts[(i + 1) % 4] - pts[i]));
        break;
      case ElementKind::tetrahedron: {
        for (int v = 0; v < 4; ++v)
          for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
              if (i == v || j == v) continue;
              min_edge_angle = std::min(min_edge_angle, angle_between(pts[i] - pts[v], pts[j] - pts[v]));
            }
        for (const auto& ed : kTetEdges) {
          int c = -1, d = -1;
          for (int v = 0; v < 4; ++v)
            if (v != ed[0] && v != ed[1]) (c < 0 ? c : d) = v;
          min_dihedral = std::min(min_dihedral, dihedral_angle(pts[ed[0]], pts[ed[1]], pts[c], pts[d]));
        }
        break;
      }
      case ElementKind::hexahedron: {
        std::vector<std::vector<int>> nb(8);
        for (const auto& ed : kHexEdges) {
          nb[ed[0]].push_back(ed[1]);
          nb[ed[1]].push_back(ed[0]);
        }
        for (int v = 0; v < 8; ++v)
          for (std::size_t i = 0; i < nb[v].size(); ++i)
            for (std::size_t j = i + 1; j < nb[v].size(); ++j)
              min_edge_angle =
                  std::min(min_edge_angle, angle_between(pts[nb[v][i]] - pts[v], pts[nb[v][j]] - pts[v]));
        // dihedrals via in-face directions normal to the shared edge
        for (const auto& ed : kHexEdges) {
          std::vector<Vec3> dirs;
          for (const auto& f : kHexFaces) {
            bool has0 = false, has1 = false;
            Vec3 fc{0, 0, 0};
            for (int fv : f) {
              fc += pts[fv];
              has0 = has0 || fv == ed[0];
              has1 = has1 || fv == ed[1];
            }
            if (!(has0 && has1)) continue;
            fc = fc * 0.25;
            const Vec3 t = normalized(pts[ed[1]] - pts[ed[0]]);
            const Vec3 rel = fc - pts[ed[0]];
            dirs.push_back(rel - t * dot(rel, t));
          }
          if (dirs.size() == 2) min_dihedral = std::min(min_dihedral, angle_between(dirs[0], dirs[1]));
        }
        break;
      }
    }
  }
}

}  // namespace

QualityReport quality_metrics(const Mesh& m, double gamma) {
  QualityReport r;
  r.gamma = gamma;
  r.quasi_uniformity_ratio = m.h() / m.h_min();
  double min_edge_angle, min_dihedral;
  compute_min_angles(m, min_edge_angle, min_dihedral);

  double sigma = 0;
  for (int e = 0; e < m.element_count(); ++e) {
    const auto pts = m.element_vertices(e);
    switch (m.kind()) {
      case ElementKind::interval:
        break;
      case ElementKind::triangle:
        sigma = std::max(sigma, m.element_diameter(e) / (2 * triangle_inradius(pts[0], pts[1], pts[2])));
        break;
      case ElementKind::quadrilateral: {
        // rho_Q = 2 * min over the four corner subtriangles of their
        // inscribed-circle diameter
        double rho = std::numeric_limits<double>::max();
        for (int i = 0; i < 4; ++i)
          rho = std::min(rho, 2 * triangle_inradius(pts[(i + 3) % 4], pts[i], pts[(i + 1) % 4]));
        sigma = std::max(sigma, m.element_diameter(e) / (2 * rho));
        break;
      }
      case ElementKind::tetrahedron: {
        double area = 0;
        for (const auto& f : kTetFaces) area += tri_area(pts[f[0]], pts[f[1]], pts[f[2]]);
        const double inradius = 3 * m.element_measure(e) / area;
        sigma = std::max(sigma, m.element_diameter(e) / (2 * inradius));
        break;
      }
      case ElementKind::hexahedron: {
        // inscribed-sphere estimate from the body center
        const Vec3 c = m.element_centroid(e);
        double rho = std::numeric_limits<double>::max();
        for (const auto& f : kHexFaces) {
          std::vector<Vec3> fp = {pts[f[0]], pts[f[1]], pts[f[2]], pts[f[3]]};
          const Vec3 fc = (fp[0] + fp[1] + fp[2] + fp[3]) * 0.25;
          const Vec3 nrm = normalized(polygon_normal(fp));
          rho = std::min(rho, std::abs(dot(c - fc, nrm)));
        }
        sigma = std::max(sigma, m.element_diameter(e) / (2 * rho));
        break;
      }
    }
  }

  if (m.dimension() >= 2) {
    r.min_solid_angle = min_edge_angle;
    r.sigma = sigma;
  }
  if (m.dimension() == 3) r.min_dihedral_angle = min_dihedral;
  try {
    r.safe_radius = safe_disk_radius(m, gamma);
  } catch (const std::runtime_error& e) {
    r.safe_radius_note = e.what();
  }
  return r;
}

double safe_disk_radius(const Mesh& m, double gamma) {
  if (m.dimension() == 1) return m.h_min() / 4;
  double min_edge_angle, min_dihedral;
  compute_min_angles(m, min_edge_angle, min_dihedral);
  if (m.dimension() == 2) return 0.25 * m.h_min() * std::sin(min_edge_angle / 2);

  const double beta0 = std::min(min_edge_angle, min_dihedral);
  const double gc = gamma * std::cos(beta0);
  if (gc >= 1.0 / 3.0 - 1e-15)
    throw std::runtime_error("radius formula inapplicable: gamma*cos(beta0) = " + std::to_string(gc) +
                             " >= 1/3");
  const double g = std::sin(std::acos(std::clamp(3 * gc, -1.0, 1.0)));
  return m.h_min() / 3.0 * std::sin(beta0 / 2) * std::sin(beta0) * g;
}

// ---------------------------------------------------------------------------
// angle lemmas

AngleIdentityResult verify_angle_identity(const Vec3& A, const Vec3& D, const Vec3& C, const Vec3& G) {
  const Vec3 n1 = cross(D - A, C - A);
  const Vec3 n2 = cross(D - A, G - A);
  const double scale = norm(D - A) * std::max({norm(C - A), norm(G - A), norm(D - A)});
  if (norm(n1) < 1e-12 * scale) throw std::invalid_argument("degenerate configuration: A, D, C collinear");
  if (norm(n2) < 1e-12 * scale || std::abs(dot(G - A, normalized(n1))) < 1e-12 * norm(G - A))
    throw std::invalid_argument("degenerate configuration: G on plane ADC");

  AngleIdentityResult r;
  r.theta_f = std::acos(std::clamp(std::abs(dot(normalized(n1), normalized(n2))), 0.0, 1.0));

  const Vec3 x = (A + D + C) / 3.0;
  const Vec3 t = normalized(D - A);
  const Vec3 K = A + t * dot(x - A, t);
  const Vec3 nh = normalized(n2);
  const Vec3 H = x - nh * dot(x - A, nh);
  // angle H-K-x via the right triangle at H; stays defined when the planes
  // are perpendicular and H collapses onto K
  r.theta_s = std::asin(std::clamp(norm(x - H) / norm(x - K), 0.0, 1.0));

  r.residual = std::abs(std::cos(r.theta_f) - std::cos(r.theta_s) / 3.0);
  r.residual_equal = std::abs(std::cos(r.theta_f) - std::cos(r.theta_s));
  return r;
}

AngleInequalityResult verify_angle_inequality(const Vec3& A, const Vec3& D, const Vec3& C, const Vec3& E) {
  const double vol = std::abs(tet_signed_volume(A, D, C, E));
  const double scale = std::max({dist(A, D), dist(A, C), dist(A, E), dist(D, C)});
  if (vol < 1e-12 * scale * scale * scale) throw std::invalid_argument("degenerate tetrahedron");

  // canonical frame: z along AD, x the in-plane-ADC direction with C on the
  // positive side
  const Vec3 t = normalized(A - D);
  Vec3 cx = (C - D) - t * dot(C - D, t);
  AngleInequalityResult r;
  const Vec3 xhat = normalized(cx);
  const double c1 = dot(C - D, xhat);
  const double e1 = dot(E - D, xhat);
  r.applicable = c1 > 0 && e1 > 0;

  const Vec3 G = (A + D + C + E) * 0.25;
  const Vec3 n1 = cross(A - D, C - D);
  const Vec3 n2 = cross(A - D, G - D);
  const Vec3 n3 = cross(A - D, E - D);
  r.theta_f = std::acos(std::clamp(std::abs(dot(normalized(n1), normalized(n2))), 0.0, 1.0));
  r.theta_ext = std::acos(std::clamp(std::abs(dot(normalized(n1), normalized(n3))), 0.0, 1.0));
  r.ratio = std::cos(r.theta_f) / std::cos(r.theta_ext);
  return r;
}

}  // namespace smoothcheck
