#ifndef SMOOTHCHECK_FIELD_HPP
#define SMOOTHCHECK_FIELD_HPP

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "smoothcheck/dual_mesh.hpp"
#include "smoothcheck/mesh.hpp"
#include "smoothcheck/multi_index.hpp"
#include "smoothcheck/polynomial.hpp"

namespace smoothcheck {

enum class NormKind { l1, l2, linf };
NormKind norm_kind_from_string(const std::string& s);
std::string to_string(NormKind s);

/// Quadrature rule on one mesh element, exact for the given total degree.
QuadRule element_rule(const Mesh& mesh, int element, int degree);

/// Piecewise polynomial of total degree <= p on a mesh. Per-element
/// coefficients are stored against the centered-scaled monomial basis
/// ((x - x_T)/h_T)^alpha in graded multi-index order, x_T the element
/// centroid and h_T its diameter. Immutable in practice: evaluation never
/// mutates, and all evaluations are safe concurrently.
class PiecewisePolyField {
 public:
  PiecewisePolyField(std::shared_ptr<const Mesh> mesh, int degree);
  PiecewisePolyField(std::shared_ptr<const Mesh> mesh, int degree,
                     std::vector<std::vector<double>> coefficients);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  const std::vector<std::vector<double>>& coefficients() const { return coef_; }
  std::vector<std::vector<double>>& coefficients() { return coef_; }

  double eval(int element, const Vec3& x) const;
  /// Exact derivative of the element polynomial; zero for |alpha| > degree.
  /// Throws if x lies outside the element beyond tolerance.
  double eval_derivative(int element, const Vec3& x, const MultiIndex& alpha) const;
  /// Same, without the membership check (used for one-sided traces).
  double eval_derivative_unchecked(int element, const Vec3& x, const MultiIndex& alpha) const;

  /// Element polynomial in global coordinates shifted to `origin`:
  /// q(z) = u_e(origin + z).
  Polynomial element_polynomial(int element, const Vec3& origin) const;

  void save(const std::string& path, const std::string& mesh_ref = "") const;
  static PiecewisePolyField load(const std::string& path,
                                 std::shared_ptr<const Mesh> mesh = nullptr);

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  std::vector<std::vector<double>> coef_;
};

/// Analytic target with a derivative oracle. `derivative` must be valid for
/// |alpha| <= max_order; order zero is the value itself.
struct TargetFunction {
  int dim = 1;
  int max_order = 8;
  std::string name;
  nlohmann::json params;
  std::function<double(const Vec3&, const MultiIndex&)> derivative;
  /// Exact Sobolev seminorm |u|_{W^order_s} on the unit box, when known.
  std::function<std::optional<double>(int order, NormKind s)> exact_seminorm;

  double value(const Vec3& x) const { return derivative(x, MultiIndex::zero(dim)); }
  std::optional<double> seminorm_if_known(int order, NormKind s) const {
    return exact_seminorm ? exact_seminorm(order, s) : std::nullopt;
  }

  /// Built-in registry: sin_pi_x, sin_pi_xy, sin_pi_xyz, step, abs_kink, poly.
  static TargetFunction make(const std::string& name, int dim, const nlohmann::json& params = {});
  /// Wraps a field as a target (piecewise values; derivatives one-sided).
  static TargetFunction from_field(std::shared_ptr<const PiecewisePolyField> field);
};

// --- field constructors ----------------------------------------------------

/// Continuous piecewise-Lagrange interpolant on a 1D mesh, p+1 equispaced
/// nodes per element including endpoints (p = 0 uses the left endpoint).
PiecewisePolyField lagrange_interpolant_1d(const TargetFunction& u, std::shared_ptr<const Mesh> mesh, int p);

/// Element-by-element L2 best fit of u.
PiecewisePolyField l2_best_fit(const TargetFunction& u, std::shared_ptr<const Mesh> mesh, int p);

/// Coefficients i.i.d. uniform on [-1, 1]; deterministic for a given seed.
PiecewisePolyField random_field(std::shared_ptr<const Mesh> mesh, int p, std::uint64_t seed);

/// Build a field from one global polynomial (exactly representable).
PiecewisePolyField field_from_polynomial(std::shared_ptr<const Mesh> mesh, int p, const Polynomial& q);

// --- jumps ------------------------------------------------------------------

/// Jump of the alpha-derivative at the interface evaluation point:
/// right-trace minus left-trace.
double interface_jump(const PiecewisePolyField& field, const Interface& itf, const MultiIndex& alpha);

// --- dual-mesh projection ---------------------------------------------------

/// Per-covolume polynomial field on the dual mesh; the basis is centered at
/// the covolume centroid and normalized per axis by its half-extents.
class DualField {
 public:
  DualField(std::shared_ptr<const DualMesh> dual, int degree, std::vector<std::vector<double>> coef)
      : dual_(std::move(dual)), degree_(degree), coef_(std::move(coef)) {}

  const DualMesh& dual() const { return *dual_; }
  int degree() const { return degree_; }
  double eval(int covolume, const Vec3& x) const;
  const std::vector<std::vector<double>>& coefficients() const { return coef_; }

 private:
  std::shared_ptr<const DualMesh> dual_;
  int degree_;
  std::vector<std::vector<double>> coef_;
};

/// Local L2 projection of u onto polynomials of degree <= p on every
/// covolume. The normal equations use quadrature exact to degree 2p+2; the
/// Gram condition number is surfaced through the returned diagnostics.
struct DualProjection {
  DualField field;
  double max_gram_condition = 0;
  double max_orthogonality_residual = 0;  // relative, against ||u|| ||q||
};
DualProjection local_l2_project_dual(const TargetFunction& u, std::shared_ptr<const DualMesh> dual, int p);

// --- norms -------------------------------------------------------------------

/// || u - field ||_{L^s} over the whole mesh. s = linf is a sampled maximum
/// over a lattice ten times denser per axis than the quadrature rule.
double error_norm(const TargetFunction& u, const PiecewisePolyField& field, NormKind s);
double error_norm_element(const TargetFunction& u, const PiecewisePolyField& field, int element, NormKind s);

/// Error over a disk centered at an interface evaluation point (split there)
/// or fully inside one element.
double error_norm_disk(const TargetFunction& u, const PiecewisePolyField& field, const Vec3& center,
                       double radius, NormKind s);

/// || u - dual field ||_{L^s} over the union of covolumes.
double error_norm_dual(const TargetFunction& u, const DualField& field, NormKind s);

/// Sampled lattice density used by the L-infinity norms, per axis.
int linf_samples_per_axis(int degree);

/// |u|_{W^{order}_s(domain of mesh)}: aggregation over |alpha| = order is
/// sum for s=1, root-sum-of-squares for s=2 and max for s=inf.
double sobolev_seminorm(const TargetFunction& u, const Mesh& mesh, int order, NormKind s);

}  // namespace smoothcheck

#endif
