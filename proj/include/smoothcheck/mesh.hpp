#ifndef SMOOTHCHECK_MESH_HPP
#define SMOOTHCHECK_MESH_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smoothcheck/geometry.hpp"

namespace smoothcheck {

enum class ElementKind { interval, triangle, quadrilateral, tetrahedron, hexahedron };

std::string to_string(ElementKind k);
ElementKind element_kind_from_string(const std::string& s);
int element_dimension(ElementKind k);
int vertices_per_element(ElementKind k);

/// Interior facet shared by exactly two elements. The left element has the
/// smaller id; the unit normal points from left to right, which fixes the
/// sign of derivative jumps.
struct Interface {
  int id = -1;
  int left_element = -1;
  int right_element = -1;
  Vec3 evaluation_point;   // shared node (1D), edge midpoint (2D), face vertex average (3D)
  double facet_measure = 0;  // 1 (1D, counting measure), length (2D), area (3D)
  Vec3 normal;             // unit, left -> right
  std::vector<int> facet_vertices;
};

/// Shape metrics of a mesh. Angle entries are absent where they make no
/// sense (no angles in 1D, no dihedral angles below 3D).
struct QualityReport {
  std::optional<double> min_solid_angle;     // smallest angle between edges (radians)
  std::optional<double> min_dihedral_angle;  // 3D only
  std::optional<double> sigma;               // max over elements of h_E / rho_E
  double quasi_uniformity_ratio = 1.0;       // h / h_min
  // absent when the 3D radius formula is inapplicable for the given gamma
  std::optional<double> safe_radius;
  std::string safe_radius_note;
  double gamma = 1.0;  // 3D safe-radius calibration constant used
};

/// Conforming mesh of intervals, triangles, quadrilaterals, tetrahedrons or
/// hexahedrons. Immutable after construction; all queries are const and safe
/// to call concurrently.
class Mesh {
 public:
  static Mesh structured(const Box& domain, int dim, const std::array<int, 3>& divisions, ElementKind kind);
  static Mesh from_data(int dim, ElementKind kind, std::vector<Vec3> vertices,
                        std::vector<std::vector<int>> elements);
  static Mesh load(const std::string& path);
  void save(const std::string& path) const;

  Mesh refined_uniform() const;

  int dimension() const { return dim_; }
  ElementKind kind() const { return kind_; }
  int element_count() const { return static_cast<int>(elements_.size()); }
  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::vector<int>>& elements() const { return elements_; }
  const std::vector<int>& element(int e) const { return elements_[e]; }
  Vec3 vertex(int v) const { return vertices_[v]; }

  double h() const { return h_; }
  double h_min() const { return h_min_; }
  double element_diameter(int e) const { return diameters_[e]; }
  Vec3 element_centroid(int e) const { return centroids_[e]; }
  double element_measure(int e) const { return measures_[e]; }
  double domain_measure() const;

  const std::vector<Interface>& interfaces() const { return interfaces_; }
  int boundary_facet_count() const { return boundary_facets_; }
  int facets_per_element() const;

  /// Point membership with tolerance 1e-12 * h.
  bool element_contains(int e, const Vec3& p) const;
  bool element_contains(int e, const Vec3& p, double tol) const;

  /// Element vertices as coordinates.
  std::vector<Vec3> element_vertices(int e) const;

  /// Facets of one element as vertex-index lists.
  std::vector<std::vector<int>> element_facet_list(int e) const;

  /// All edges (vertex index pairs); 1D elements count as their own edge.
  std::vector<std::array<int, 2>> edge_list() const;

 private:
  Mesh() = default;
  void finalize();  // validates and computes derived data

  int dim_ = 1;
  ElementKind kind_ = ElementKind::interval;
  std::vector<Vec3> vertices_;
  std::vector<std::vector<int>> elements_;

  double h_ = 0, h_min_ = 0;
  std::vector<double> diameters_, measures_;
  std::vector<Vec3> centroids_;
  std::vector<Interface> interfaces_;
  int boundary_facets_ = 0;
};

// Spec-level operation names; thin wrappers over the Mesh class.
Mesh build_structured_mesh(const Box& domain, int dim, const std::array<int, 3>& divisions, ElementKind kind);

/// Moves every strictly-interior vertex by a seeded uniform offset of up to
/// amplitude * h_min per axis, producing a deterministic quasi-uniform
/// family generator: exactly uniform grids superconverge at symmetric
/// evaluation points, which masks the generic jump decay rates.
Mesh jitter_vertices(const Mesh& m, double amplitude, std::uint64_t seed);

Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& m, const std::string& path);
Mesh refine_uniform(const Mesh& m);
const std::vector<Interface>& interior_interfaces(const Mesh& m);

QualityReport quality_metrics(const Mesh& m, double gamma = 1.0);

/// Distance from p to the facet given by vertex indices.
double facet_distance(const Mesh& m, const std::vector<int>& facet, const Vec3& p);

/// Smallest distance from p to any facet of the listed elements, skipping
/// facets whose vertex set equals `exclude` (order-insensitive).
double min_facet_distance(const Mesh& m, const std::vector<int>& elements, const std::vector<int>* exclude,
                          const Vec3& p);

/// Radius of the largest disk guaranteed to sit inside every interface's
/// covolume: h_min/4 in 1D, (h_min/4) sin(theta0/2) in 2D and
/// (h_min/3) sin(beta0/2) sin(beta0) g(acos(gamma cos beta0)) in 3D with
/// g(t) = sin(acos(3 cos t)). Throws when the 3D formula is inapplicable
/// (gamma * cos(beta0) >= 1/3).
double safe_disk_radius(const Mesh& m, double gamma = 1.0);

struct AngleIdentityResult {
  double theta_f = 0;         // dihedral angle between planes ADC and ADG
  double theta_s = 0;         // angle H-K-x from the constructed feet
  double residual = 0;        // |cos(theta_f) - (1/3) cos(theta_s)|
  double residual_equal = 0;  // |cos(theta_f) - cos(theta_s)|
};

/// Construct x = barycenter of ADC, K = foot of the perpendicular from x on
/// line AD and H = foot of the perpendicular from x on plane ADG, then
/// compare the dihedral angle with angle(H,K,x). Both residuals are
/// reported; the construction forces theta_s == theta_f, so `residual`
/// equals (2/3)|cos theta_f| rather than zero.
AngleIdentityResult verify_angle_identity(const Vec3& A, const Vec3& D, const Vec3& C, const Vec3& G);

struct AngleInequalityResult {
  double theta_f = 0;    // angle between planes ADC and ADG, G = barycenter of ADCE
  double theta_ext = 0;  // angle between planes ADC and ADE
  double ratio = 0;      // cos(theta_f) / cos(theta_ext), the empirical gamma
  bool applicable = true;
};

/// Checks cos(theta_ext) < cos(theta_f) for the covolume-face configuration.
/// Configurations outside the admissible regime (the component of C or E
/// along the in-plane axis not positive) are flagged, not errors.
AngleInequalityResult verify_angle_inequality(const Vec3& A, const Vec3& D, const Vec3& C, const Vec3& E);

}  // namespace smoothcheck

#endif
