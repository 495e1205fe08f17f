#ifndef SMOOTHCHECK_DUAL_MESH_HPP
#define SMOOTHCHECK_DUAL_MESH_HPP

#include <memory>
#include <vector>

#include "smoothcheck/mesh.hpp"
#include "smoothcheck/quadrature.hpp"

namespace smoothcheck {

/// Simplex piece of a covolume; npts = dim + 1 vertices are used.
struct Simplex {
  int npts = 0;
  std::array<Vec3, 4> v;
};

/// Cell of the dual mesh: the union of the two half-covolumes meeting at one
/// interior interface. Each half lives inside its parent element and is
/// stored as simplices for quadrature and point location.
struct Covolume {
  int interface_id = -1;
  std::array<int, 2> elements{-1, -1};  // left, right parent
  std::vector<Vec3> vertices;           // polytope vertices (facet + added points)
  std::vector<Simplex> left_pieces, right_pieces;
  double measure = 0;
  Vec3 centroid;
  double diameter = 0;
  // basis normalization: local frame aligned with the interface normal plus
  // per-axis half-extents, which keeps covolume Gram matrices well
  // conditioned for anisotropic cells
  Frame basis_frame;
  Vec3 basis_scale{1, 1, 1};

  /// Physical point -> normalized basis coordinate.
  Vec3 to_basis(const Vec3& x, int dim) const {
    const Vec3 local = basis_frame.to_local(x - centroid);
    Vec3 y;
    for (int d = 0; d < dim; ++d) y[d] = local[d] / basis_scale[d];
    return y;
  }
};

/// Dual covolume mesh: one covolume per interior interface, built by joining
/// each facet to an added point per element (midpoint, barycenter, diagonal
/// intersection or vertex average depending on the element kind). Boundary
/// remainders are not represented. Immutable after construction.
class DualMesh {
 public:
  DualMesh(std::shared_ptr<const Mesh> parent, std::vector<Vec3> added_points,
           std::vector<Covolume> covolumes)
      : mesh_(std::move(parent)), added_points_(std::move(added_points)), covolumes_(std::move(covolumes)) {}

  const Mesh& parent() const { return *mesh_; }
  std::shared_ptr<const Mesh> parent_ptr() const { return mesh_; }
  const std::vector<Vec3>& added_points() const { return added_points_; }
  const std::vector<Covolume>& covolumes() const { return covolumes_; }
  const Covolume& covolume(int i) const { return covolumes_[i]; }
  int covolume_count() const { return static_cast<int>(covolumes_.size()); }

  bool covolume_contains(int c, const Vec3& p) const;
  bool covolume_contains(int c, const Vec3& p, double tol) const;

  /// Composite rule over the covolume's simplex pieces, exact for the degree.
  QuadRule covolume_rule(int c, int degree) const;

  /// Total covolume measure (the domain minus boundary remainders).
  double covered_measure() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<Vec3> added_points_;
  std::vector<Covolume> covolumes_;
};

DualMesh build_dual_covolume(std::shared_ptr<const Mesh> mesh);

}  // namespace smoothcheck

#endif
