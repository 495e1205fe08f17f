#include "smoothcheck/field.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "smoothcheck/parallel.hpp"

namespace smoothcheck {

NormKind norm_kind_from_string(const std::string& s) {
  if (s == "1" || s == "l1") return NormKind::l1;
  if (s == "2" || s == "l2") return NormKind::l2;
  if (s == "inf" || s == "linf" || s == "infinity") return NormKind::linf;
  throw std::invalid_argument("unsupported norm: " + s);
}

std::string to_string(NormKind s) {
  switch (s) {
    case NormKind::l1: return "1";
    case NormKind::l2: return "2";
    case NormKind::linf: return "inf";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// element quadrature / sampling helpers

QuadRule element_rule(const Mesh& m, int e, int degree) {
  const auto pts = m.element_vertices(e);
  switch (m.kind()) {
    case ElementKind::interval: return interval_rule(pts[0].x, pts[1].x, degree);
    case ElementKind::triangle: return triangle_rule(pts[0], pts[1], pts[2], degree);
    case ElementKind::quadrilateral: return quad_cell_rule(pts, degree);
    case ElementKind::tetrahedron: return tet_rule(pts[0], pts[1], pts[2], pts[3], degree);
    case ElementKind::hexahedron: return hex_rule(pts, degree);
  }
  throw std::logic_error("element_rule: unreachable");
}

namespace {

/// Recursively red-subdivides the element geometry and calls fn on each
/// child's vertex list. Used to keep quadrature of |f| accurate near kinks.
void for_each_subcell(ElementKind kind, const std::vector<Vec3>& v, int depth,
                      const std::function<void(const std::vector<Vec3>&)>& fn) {
  if (depth == 0) {
    fn(v);
    return;
  }
  auto rec = [&](const std::vector<Vec3>& child) { for_each_subcell(kind, child, depth - 1, fn); };
  auto mid = [](const Vec3& a, const Vec3& b) { return (a + b) * 0.5; };
  switch (kind) {
    case ElementKind::interval: {
      const Vec3 m = mid(v[0], v[1]);
      rec({v[0], m});
      rec({m, v[1]});
      break;
    }
    case ElementKind::triangle: {
      const Vec3 m01 = mid(v[0], v[1]), m12 = mid(v[1], v[2]), m02 = mid(v[0], v[2]);
      rec({v[0], m01, m02});
      rec({m01, v[1], m12});
      rec({m02, m12, v[2]});
      rec({m01, m12, m02});
      break;
    }
    case ElementKind::quadrilateral: {
      const Vec3 m01 = mid(v[0], v[1]), m12 = mid(v[1], v[2]), m23 = mid(v[2], v[3]), m30 = mid(v[3], v[0]);
      const Vec3 c = (v[0] + v[1] + v[2] + v[3]) * 0.25;
      rec({v[0], m01, c, m30});
      rec({m01, v[1], m12, c});
      rec({c, m12, v[2], m23});
      rec({m30, c, m23, v[3]});
      break;
    }
    case ElementKind::tetrahedron: {
      const Vec3 m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m03 = mid(v[0], v[3]);
      const Vec3 m12 = mid(v[1], v[2]), m13 = mid(v[1], v[3]), m23 = mid(v[2], v[3]);
      rec({v[0], m01, m02, m03});
      rec({v[1], m01, m12, m13});
      rec({v[2], m02, m12, m23});
      rec({v[3], m03, m13, m23});
      rec({m01, m23, m02, m12});
      rec({m01, m23, m12, m13});
      rec({m01, m23, m13, m03});
      rec({m01, m23, m03, m02});
      break;
    }
    case ElementKind::hexahedron: {
      auto lat = [&](double a, double b, double c) {
        static const double rc[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                        {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
        Vec3 p{0, 0, 0};
        for (int i = 0; i < 8; ++i) {
          const double fa = rc[i][0] ? a : 1 - a;
          const double fb = rc[i][1] ? b : 1 - b;
          const double fc = rc[i][2] ? c : 1 - c;
          p += v[i] * (fa * fb * fc);
        }
        return p;
      };
      for (int ck = 0; ck < 2; ++ck)
        for (int cj = 0; cj < 2; ++cj)
          for (int ci = 0; ci < 2; ++ci) {
            const double a0 = ci * 0.5, b0 = cj * 0.5, c0 = ck * 0.5;
            rec({lat(a0, b0, c0), lat(a0 + .5, b0, c0), lat(a0 + .5, b0 + .5, c0), lat(a0, b0 + .5, c0),
                 lat(a0, b0, c0 + .5), lat(a0 + .5, b0, c0 + .5), lat(a0 + .5, b0 + .5, c0 + .5),
                 lat(a0, b0 + .5, c0 + .5)});
          }
      break;
    }
  }
}

QuadRule cell_rule(ElementKind kind, const std::vector<Vec3>& v, int degree) {
  switch (kind) {
    case ElementKind::interval: return interval_rule(v[0].x, v[1].x, degree);
    case ElementKind::triangle: return triangle_rule(v[0], v[1], v[2], degree);
    case ElementKind::quadrilateral: return quad_cell_rule(v, degree);
    case ElementKind::tetrahedron: return tet_rule(v[0], v[1], v[2], v[3], degree);
    case ElementKind::hexahedron: return hex_rule(v, degree);
  }
  throw std::logic_error("cell_rule: unreachable");
}

/// Composite rule, two red-subdivision levels per element; robust for
/// integrands with interior kinks (absolute values).
QuadRule element_rule_composite(const Mesh& m, int e, int degree) {
  QuadRule out;
  for_each_subcell(m.kind(), m.element_vertices(e), 2, [&](const std::vector<Vec3>& child) {
    const QuadRule r = cell_rule(m.kind(), child, degree);
    out.insert(out.end(), r.begin(), r.end());
  });
  return out;
}

std::vector<Vec3> element_sample_lattice(const Mesh& m, int e, int mdiv) {
  const auto v = m.element_vertices(e);
  std::vector<Vec3> out;
  switch (m.kind()) {
    case ElementKind::interval:
      for (int i = 0; i <= mdiv; ++i) out.push_back(v[0] + (v[1] - v[0]) * (double(i) / mdiv));
      break;
    case ElementKind::triangle:
      for (int i = 0; i <= mdiv; ++i)
        for (int j = 0; i + j <= mdiv; ++j)
          out.push_back(v[0] + (v[1] - v[0]) * (double(i) / mdiv) + (v[2] - v[0]) * (double(j) / mdiv));
      break;
    case ElementKind::quadrilateral:
      for (int i = 0; i <= mdiv; ++i)
        for (int j = 0; j <= mdiv; ++j) {
          const double a = double(i) / mdiv, b = double(j) / mdiv;
          out.push_back(v[0] * ((1 - a) * (1 - b)) + v[1] * (a * (1 - b)) + v[2] * (a * b) +
                        v[3] * ((1 - a) * b));
        }
      break;
    case ElementKind::tetrahedron:
      for (int i = 0; i <= mdiv; ++i)
        for (int j = 0; i + j <= mdiv; ++j)
          for (int k = 0; i + j + k <= mdiv; ++k)
            out.push_back(v[0] + (v[1] - v[0]) * (double(i) / mdiv) + (v[2] - v[0]) * (double(j) / mdiv) +
                          (v[3] - v[0]) * (double(k) / mdiv));
      break;
    case ElementKind::hexahedron:
      for (int i = 0; i <= mdiv; ++i)
        for (int j = 0; j <= mdiv; ++j)
          for (int k = 0; k <= mdiv; ++k) {
            const double a = double(i) / mdiv, b = double(j) / mdiv, c = double(k) / mdiv;
            static const double rc[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                            {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
            Vec3 p{0, 0, 0};
            for (int vv = 0; vv < 8; ++vv)
              p += v[vv] * ((rc[vv][0] ? a : 1 - a) * (rc[vv][1] ? b : 1 - b) * (rc[vv][2] ? c : 1 - c));
            out.push_back(p);
          }
      break;
  }
  return out;
}

}  // namespace

int linf_samples_per_axis(int degree) { return 10 * (degree + 2); }

// ---------------------------------------------------------------------------
// PiecewisePolyField

PiecewisePolyField::PiecewisePolyField(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree < 0) throw std::invalid_argument("field degree must be >= 0");
  coef_.assign(mesh_->element_count(), std::vector<double>(poly_space_dim(mesh_->dimension(), degree), 0.0));
}

PiecewisePolyField::PiecewisePolyField(std::shared_ptr<const Mesh> mesh, int degree,
                                       std::vector<std::vector<double>> coefficients)
    : mesh_(std::move(mesh)), degree_(degree), coef_(std::move(coefficients)) {
  const std::size_t want = poly_space_dim(mesh_->dimension(), degree);
  if (coef_.size() != static_cast<std::size_t>(mesh_->element_count()))
    throw std::invalid_argument("field: one coefficient vector per element required");
  for (const auto& c : coef_)
    if (c.size() != want) throw std::invalid_argument("field: coefficient vector length mismatch");
}

double PiecewisePolyField::eval(int e, const Vec3& x) const {
  return eval_derivative_unchecked(e, x, MultiIndex::zero(mesh_->dimension()));
}

double PiecewisePolyField::eval_derivative(int e, const Vec3& x, const MultiIndex& alpha) const {
  if (!mesh_->element_contains(e, x, 1e-9 * mesh_->element_diameter(e)))
    throw std::invalid_argument("eval_derivative: point outside element " + std::to_string(e));
  return eval_derivative_unchecked(e, x, alpha);
}

double PiecewisePolyField::eval_derivative_unchecked(int e, const Vec3& x, const MultiIndex& alpha) const {
  const int n = mesh_->dimension();
  if (alpha.order() > degree_) return 0.0;
  const double hT = mesh_->element_diameter(e);
  const Vec3 y = (x - mesh_->element_centroid(e)) / hT;
  const auto idx = enumerate_multi_indices(n, degree_);
  double acc = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double c = coef_[e][i];
    if (c == 0.0) continue;
    double term = c;
    bool ok = true;
    for (int d = 0; d < n && ok; ++d) {
      const int b = idx[i][d], a = alpha[d];
      if (b < a) {
        ok = false;
        break;
      }
      for (int k = 0; k < a; ++k) term *= (b - k);  // falling factorial
      for (int k = 0; k < b - a; ++k) term *= y[d];
    }
    if (ok) acc += term;
  }
  double scale = 1.0;
  for (int k = 0; k < alpha.order(); ++k) scale /= hT;
  return acc * scale;
}

Polynomial PiecewisePolyField::element_polynomial(int e, const Vec3& origin) const {
  const int n = mesh_->dimension();
  const double hT = mesh_->element_diameter(e);
  Polynomial in_y(n, degree_);
  const auto idx = enumerate_multi_indices(n, degree_);
  for (std::size_t i = 0; i < idx.size(); ++i) in_y.coefficient(idx[i]) = coef_[e][i];
  // y = (z + origin - x_T)/h_T
  Frame scaled;
  scaled.axis = {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}};
  for (int k = 0; k < n; ++k) scaled.axis[k][k] = 1.0 / hT;
  const Vec3 d = (origin - mesh_->element_centroid(e)) / hT;
  return in_y.compose_affine(d, scaled);
}

double interface_jump(const PiecewisePolyField& field, const Interface& itf, const MultiIndex& alpha) {
  const Vec3& x = itf.evaluation_point;
  return field.eval_derivative_unchecked(itf.right_element, x, alpha) -
         field.eval_derivative_unchecked(itf.left_element, x, alpha);
}

// ---------------------------------------------------------------------------
// constructors

PiecewisePolyField lagrange_interpolant_1d(const TargetFunction& u, std::shared_ptr<const Mesh> mesh, int p) {
  if (mesh->dimension() != 1) throw std::invalid_argument("lagrange_interpolant_1d: 1D mesh required");
  PiecewisePolyField f(mesh, p);
  const auto idx = enumerate_multi_indices(1, p);
  const int nn = p + 1;
  for (int e = 0; e < mesh->element_count(); ++e) {
    const auto v = mesh->element_vertices(e);
    const double hT = mesh->element_diameter(e);
    const double xc = mesh->element_centroid(e).x;
    Eigen::MatrixXd V(nn, nn);
    Eigen::VectorXd b(nn);
    for (int i = 0; i < nn; ++i) {
      const double xi = p == 0 ? v[0].x : v[0].x + (v[1].x - v[0].x) * i / p;
      const double y = (xi - xc) / hT;
      for (int j = 0; j < nn; ++j) V(i, j) = std::pow(y, idx[j][0]);
      b(i) = u.value({xi, 0, 0});
    }
    const Eigen::VectorXd c = V.colPivHouseholderQr().solve(b);
    for (int j = 0; j < nn; ++j) f.coefficients()[e][j] = c(j);
  }
  return f;
}

PiecewisePolyField l2_best_fit(const TargetFunction& u, std::shared_ptr<const Mesh> mesh, int p) {
  PiecewisePolyField f(mesh, p);
  const int n = mesh->dimension();
  const auto idx = enumerate_multi_indices(n, p);
  const int m = static_cast<int>(idx.size());
  std::vector<std::vector<double>>& coef = f.coefficients();
  parallel_for(mesh->element_count(), [&](std::size_t e) {
    const double hT = mesh->element_diameter(e);
    const Vec3 xc = mesh->element_centroid(e);
    const QuadRule rule = element_rule(*mesh, static_cast<int>(e), 2 * p + 2);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd phi(m);
    for (const auto& q : rule) {
      const Vec3 y = (q.x - xc) / hT;
      for (int j = 0; j < m; ++j) {
        double t = 1;
        for (int d = 0; d < n; ++d)
          for (int k = 0; k < idx[j][d]; ++k) t *= y[d];
        phi(j) = t;
      }
      G.selfadjointView<Eigen::Lower>().rankUpdate(phi, q.w);
      b += q.w * u.value(q.x) * phi;
    }
    const Eigen::VectorXd c = Eigen::MatrixXd(G.selfadjointView<Eigen::Lower>()).ldlt().solve(b);
    for (int j = 0; j < m; ++j) coef[e][j] = c(j);
  });
  return f;
}

PiecewisePolyField random_field(std::shared_ptr<const Mesh> mesh, int p, std::uint64_t seed) {
  PiecewisePolyField f(mesh, p);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& el : f.coefficients())
    for (double& c : el) c = dist(rng);
  return f;
}

PiecewisePolyField field_from_polynomial(std::shared_ptr<const Mesh> mesh, int p, const Polynomial& q) {
  if (q.degree() > p) throw std::invalid_argument("field_from_polynomial: polynomial degree exceeds p");
  PiecewisePolyField f(mesh, p);
  const int n = mesh->dimension();
  const auto idx = enumerate_multi_indices(n, p);
  for (int e = 0; e < mesh->element_count(); ++e) {
    const Vec3 xc = mesh->element_centroid(e);
    const double hT = mesh->element_diameter(e);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      double s = q.derivative_at(xc, idx[j]) / idx[j].factorial();
      for (int k = 0; k < idx[j].order(); ++k) s *= hT;
      f.coefficients()[e][j] = s;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// field JSON I/O

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void PiecewisePolyField::save(const std::string& path, const std::string& mesh_ref) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write field file: " + path);
  out << "{\n  \"degree\": " << degree_ << ",\n";
  if (!mesh_ref.empty()) {
    out << "  \"mesh\": \"" << mesh_ref << "\",\n";
  } else {
    // inline mesh
    out << "  \"mesh\": {\"dimension\": " << mesh_->dimension() << ", \"kind\": \"" << to_string(mesh_->kind())
        << "\", \"vertices\": [";
    const auto& vs = mesh_->vertices();
    for (std::size_t i = 0; i < vs.size(); ++i) {
      out << (i ? ", [" : "[");
      for (int d = 0; d < mesh_->dimension(); ++d) out << (d ? ", " : "") << fmt17(vs[i][d]);
      out << "]";
    }
    out << "], \"elements\": [";
    const auto& els = mesh_->elements();
    for (std::size_t i = 0; i < els.size(); ++i) {
      out << (i ? ", [" : "[");
      for (std::size_t d = 0; d < els[i].size(); ++d) out << (d ? ", " : "") << els[i][d];
      out << "]";
    }
    out << "]},\n";
  }
  out << "  \"coefficients\": [";
  for (std::size_t e = 0; e < coef_.size(); ++e) {
    out << (e ? ",\n    " : "\n    ") << "[";
    for (std::size_t j = 0; j < coef_[e].size(); ++j) out << (j ? ", " : "") << fmt17(coef_[e][j]);
    out << "]";
  }
  out << "\n  ]\n}\n";
}

PiecewisePolyField PiecewisePolyField::load(const std::string& path, std::shared_ptr<const Mesh> mesh) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed field file " + path + ": " + e.what());
  }
  if (!j.contains("degree") || !j.contains("coefficients") || (!j.contains("mesh") && !mesh))
    throw std::runtime_error("malformed field file " + path + ": missing field");
  if (!mesh) {
    if (j["mesh"].is_string()) {
      mesh = std::make_shared<Mesh>(Mesh::load(j["mesh"].get<std::string>()));
    } else {
      // inline mesh object
      const auto& jm = j["mesh"];
      std::vector<Vec3> verts;
      const int dim = jm.at("dimension").get<int>();
      for (const auto& row : jm.at("vertices")) {
        Vec3 p;
        for (int d = 0; d < dim; ++d) p[d] = row[d].get<double>();
        verts.push_back(p);
      }
      std::vector<std::vector<int>> els;
      for (const auto& row : jm.at("elements")) els.push_back(row.get<std::vector<int>>());
      mesh = std::make_shared<Mesh>(
          Mesh::from_data(dim, element_kind_from_string(jm.at("kind").get<std::string>()), std::move(verts),
                          std::move(els)));
    }
  }
  return PiecewisePolyField(mesh, j["degree"].get<int>(),
                            j["coefficients"].get<std::vector<std::vector<double>>>());
}

// ---------------------------------------------------------------------------
// targets

TargetFunction TargetFunction::make(const std::string& name, int dim, const nlohmann::json& params) {
  TargetFunction t;
  t.dim = dim;
  t.max_order = 12;
  t.name = name;
  t.params = params;

  auto trig = [](double x, int k) { return std::sin(M_PI * x + k * M_PI_2); };

  if (name == "sin_pi_x") {
    t.derivative = [trig](const Vec3& x, const MultiIndex& a) {
      if (a.dim > 1 && (a[1] > 0 || a[2] > 0)) return 0.0;
      return std::pow(M_PI, a[0]) * trig(x.x, a[0]);
    };
    t.exact_seminorm = [](int order, NormKind s) -> std::optional<double> {
      const double pm = std::pow(M_PI, order);
      switch (s) {
        case NormKind::l1: return pm * 2 / M_PI;
        case NormKind::l2: return pm * std::sqrt(0.5);
        case NormKind::linf: return pm;
      }
      return std::nullopt;
    };
  } else if (name == "sin_pi_xy") {
    if (dim < 2) throw std::invalid_argument("sin_pi_xy needs dimension >= 2");
    t.derivative = [trig](const Vec3& x, const MultiIndex& a) {
      if (a.dim > 2 && a[2] > 0) return 0.0;
      return std::pow(M_PI, a.order()) * trig(x.x, a[0]) * trig(x.y, a[1]);
    };
    t.exact_seminorm = [](int order, NormKind s) -> std::optional<double> {
      const double pm = std::pow(M_PI, order);
      const int count = order + 1;
      switch (s) {
        case NormKind::l1: return count * pm * (2 / M_PI) * (2 / M_PI);
        case NormKind::l2: return pm * std::sqrt(count / 4.0);
        case NormKind::linf: return pm;
      }
      return std::nullopt;
    };
  } else if (name == "sin_pi_xyz") {
    if (dim != 3) throw std::invalid_argument("sin_pi_xyz needs dimension 3");
    t.derivative = [trig](const Vec3& x, const MultiIndex& a) {
      return std::pow(M_PI, a.order()) * trig(x.x, a[0]) * trig(x.y, a[1]) * trig(x.z, a[2]);
    };
    t.exact_seminorm = [](int order, NormKind s) -> std::optional<double> {
      const double pm = std::pow(M_PI, order);
      const int count = (order + 1) * (order + 2) / 2;
      switch (s) {
        case NormKind::l1: return count * pm * std::pow(2 / M_PI, 3);
        case NormKind::l2: return pm * std::sqrt(count / 8.0);
        case NormKind::linf: return pm;
      }
      return std::nullopt;
    };
  } else if (name == "step") {
    const double loc = params.value("loc", 0.5);
    t.derivative = [loc](const Vec3& x, const MultiIndex& a) {
      if (a.order() > 0) return 0.0;
      return x.x < loc ? 0.0 : 1.0;
    };
  } else if (name == "abs_kink") {
    const double loc = params.value("loc", 0.5);
    t.derivative = [loc](const Vec3& x, const MultiIndex& a) {
      if (a.dim > 1 && (a[1] > 0 || a[2] > 0)) return 0.0;
      if (a[0] == 0) return std::abs(x.x - loc);
      if (a[0] == 1) return x.x < loc ? -1.0 : 1.0;
      return 0.0;
    };
  } else if (name == "poly") {
    const int deg = params.at("degree").get<int>();
    auto q = std::make_shared<Polynomial>(dim, deg);
    const auto coeffs = params.at("coefficients").get<std::vector<double>>();
    const auto idx = enumerate_multi_indices(dim, deg);
    if (coeffs.size() != idx.size())
      throw std::invalid_argument("poly target: expected " + std::to_string(idx.size()) + " coefficients");
    for (std::size_t i = 0; i < idx.size(); ++i) q->coefficient(idx[i]) = coeffs[i];
    t.derivative = [q](const Vec3& x, const MultiIndex& a) { return q->derivative_at(x, a); };
    t.exact_seminorm = [deg](int order, NormKind) -> std::optional<double> {
      if (order > deg) return 0.0;
      return std::nullopt;
    };
  } else {
    throw std::invalid_argument("unknown target function: " + name);
  }
  return t;
}

TargetFunction TargetFunction::from_field(std::shared_ptr<const PiecewisePolyField> field) {
  TargetFunction t;
  t.dim = field->mesh().dimension();
  t.max_order = field->degree() + 2;
  t.name = "field";
  t.derivative = [field](const Vec3& x, const MultiIndex& a) {
    const Mesh& m = field->mesh();
    for (int e = 0; e < m.element_count(); ++e)
      if (m.element_contains(e, x)) return field->eval_derivative_unchecked(e, x, a);
    throw std::invalid_argument("field target: point outside mesh");
  };
  return t;
}

// ---------------------------------------------------------------------------
// dual projection

double DualField::eval(int c, const Vec3& x) const {
  const Covolume& cv = dual_->covolume(c);
  const int n = dual_->parent().dimension();
  const Vec3 y = cv.to_basis(x, n);
  const auto idx = enumerate_multi_indices(n, degree_);
  double acc = 0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    double t = coef_[c][j];
    for (int d = 0; d < n; ++d)
      for (int k = 0; k < idx[j][d]; ++k) t *= y[d];
    acc += t;
  }
  return acc;
}

DualProjection local_l2_project_dual(const TargetFunction& u, std::shared_ptr<const DualMesh> dual, int p) {
  const int n = dual->parent().dimension();
  const auto idx = enumerate_multi_indices(n, p);
  const int m = static_cast<int>(idx.size());
  const int nc = dual->covolume_count();
  std::vector<std::vector<double>> coef(nc, std::vector<double>(m, 0.0));
  std::vector<double> conds(nc, 0.0), orth(nc, 0.0);

  parallel_for(nc, [&](std::size_t c) {
    const Covolume& cv = dual->covolume(static_cast<int>(c));
    const QuadRule rule = dual->covolume_rule(static_cast<int>(c), 2 * p + 2);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd phi(m);
    double unorm2 = 0;
    for (const auto& q : rule) {
      const Vec3 y = cv.to_basis(q.x, n);
      for (int j = 0; j < m; ++j) {
        double t = 1;
        for (int d = 0; d < n; ++d)
          for (int k = 0; k < idx[j][d]; ++k) t *= y[d];
        phi(j) = t;
      }
      const double uv = u.value(q.x);
      unorm2 += q.w * uv * uv;
      G.selfadjointView<Eigen::Lower>().rankUpdate(phi, q.w);
      b += q.w * uv * phi;
    }
    const Eigen::MatrixXd Gf = Eigen::MatrixXd(G.selfadjointView<Eigen::Lower>());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gf);
    const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(m - 1);
    if (!(lmin > 0))
      throw std::runtime_error("singular covolume Gram matrix (condition diagnostic: eigenvalue " +
                               std::to_string(lmin) + ")");
    conds[c] = lmax / lmin;
    const Eigen::VectorXd sol = Gf.ldlt().solve(b);
    for (int j = 0; j < m; ++j) coef[c][j] = sol(j);
    // orthogonality residual, relative to ||u|| ||q||
    const Eigen::VectorXd r = b - Gf * sol;
    double worst = 0;
    for (int j = 0; j < m; ++j) {
      const double qn = std::sqrt(Gf(j, j));
      worst = std::max(worst, std::abs(r(j)) / (std::sqrt(unorm2) * qn + 1e-300));
    }
    orth[c] = worst;
  });

  DualProjection out{DualField(dual, p, std::move(coef)), 0, 0};
  for (int c = 0; c < nc; ++c) {
    out.max_gram_condition = std::max(out.max_gram_condition, conds[c]);
    out.max_orthogonality_residual = std::max(out.max_orthogonality_residual, orth[c]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// norms

namespace {

double accumulate_norm(NormKind s, const std::vector<double>& parts) {
  // parts are per-element contributions: integrals for finite s, maxima for inf
  double acc = 0;
  for (double v : parts) acc = (s == NormKind::linf) ? std::max(acc, v) : acc + v;
  if (s == NormKind::l2) return std::sqrt(acc);
  return acc;
}

}  // namespace

double error_norm_element(const TargetFunction& u, const PiecewisePolyField& field, int e, NormKind s) {
  const Mesh& m = field.mesh();
  const int p = field.degree();
  if (s == NormKind::linf) {
    double mx = 0;
    for (const Vec3& x : element_sample_lattice(m, e, linf_samples_per_axis(p)))
      mx = std::max(mx, std::abs(u.value(x) - field.eval(e, x)));
    return mx;
  }
  const QuadRule rule = s == NormKind::l1 ? element_rule_composite(m, e, 2 * p + 2)
                                          : element_rule(m, e, 2 * p + 2);
  double acc = 0;
  for (const auto& q : rule) {
    const double d = u.value(q.x) - field.eval(e, q.x);
    acc += q.w * (s == NormKind::l1 ? std::abs(d) : d * d);
  }
  return s == NormKind::l2 ? std::sqrt(acc) : acc;
}

double error_norm(const TargetFunction& u, const PiecewisePolyField& field, NormKind s) {
  const Mesh& m = field.mesh();
  std::vector<double> parts(m.element_count());
  parallel_for(m.element_count(), [&](std::size_t e) {
    const double v = error_norm_element(u, field, static_cast<int>(e), s);
    parts[e] = s == NormKind::l2 ? v * v : v;
  });
  return accumulate_norm(s, parts);
}

double error_norm_disk(const TargetFunction& u, const PiecewisePolyField& field, const Vec3& center,
                       double radius, NormKind s) {
  const Mesh& m = field.mesh();
  const int n = m.dimension();
  const int p = field.degree();
  const int deg = 2 * p + 2;

  // locate: interface-centered (split) or interior to one element
  const Interface* at = nullptr;
  for (const auto& itf : m.interfaces())
    if (dist(itf.evaluation_point, center) < 1e-12 * m.h()) {
      at = &itf;
      break;
    }

  auto piece_norm = [&](const QuadRule& rule, int elem, double& acc, double& mx) {
    for (const auto& q : rule) {
      if (!m.element_contains(elem, q.x, 1e-9 * m.h()))
        throw std::invalid_argument("disk region not contained in the mesh");
      const double d = std::abs(u.value(q.x) - field.eval(elem, q.x));
      mx = std::max(mx, d);
      acc += q.w * (s == NormKind::l1 ? d : d * d);
    }
  };

  double acc = 0, mx = 0;
  if (at) {
    // the ball must stay inside the two adjacent elements: every facet of
    // theirs except the splitting one has to clear the radius
    if (min_facet_distance(m, {at->left_element, at->right_element}, &at->facet_vertices, center) <
        radius * (1 - 1e-12))
      throw std::invalid_argument("disk region crosses a second interface or leaves the mesh");
    piece_norm(half_ball_rule_nd(n, center, at->normal, radius, deg, -1), at->left_element, acc, mx);
    piece_norm(half_ball_rule_nd(n, center, at->normal, radius, deg, +1), at->right_element, acc, mx);
  } else {
    int owner = -1;
    for (int e = 0; e < m.element_count(); ++e)
      if (m.element_contains(e, center)) {
        owner = e;
        break;
      }
    if (owner < 0) throw std::invalid_argument("disk center outside mesh");
    if (min_facet_distance(m, {owner}, nullptr, center) < radius * (1 - 1e-12))
      throw std::invalid_argument("disk region crosses a second interface or leaves the mesh");
    // both halves of an arbitrary split, entirely inside the owner
    const Vec3 axis = n == 1 ? Vec3{1, 0, 0} : (n == 2 ? Vec3{1, 0, 0} : Vec3{0, 0, 1});
    piece_norm(half_ball_rule_nd(n, center, axis, radius, deg, -1), owner, acc, mx);
    piece_norm(half_ball_rule_nd(n, center, axis, radius, deg, +1), owner, acc, mx);
  }
  if (s == NormKind::linf) return mx;
  return s == NormKind::l2 ? std::sqrt(acc) : acc;
}

double error_norm_dual(const TargetFunction& u, const DualField& field, NormKind s) {
  const DualMesh& dual = field.dual();
  const int p = field.degree();
  std::vector<double> parts(dual.covolume_count());
  parallel_for(dual.covolume_count(), [&](std::size_t c) {
    // the dense rule doubles as the max-sampling set for s = inf
    const QuadRule rule = dual.covolume_rule(static_cast<int>(c), s == NormKind::linf ? 4 * p + 8 : 2 * p + 2);
    double acc = 0, mx = 0;
    for (const auto& q : rule) {
      const double d = std::abs(u.value(q.x) - field.eval(static_cast<int>(c), q.x));
      mx = std::max(mx, d);
      acc += q.w * (s == NormKind::l1 ? d : d * d);
    }
    parts[c] = s == NormKind::linf ? mx : acc;
  });
  return accumulate_norm(s, parts);
}

double sobolev_seminorm(const TargetFunction& u, const Mesh& mesh, int order, NormKind s) {
  const auto all = enumerate_multi_indices(mesh.dimension(), order);
  std::vector<MultiIndex> top;
  for (const auto& a : all)
    if (a.order() == order) top.push_back(a);

  std::vector<double> parts(mesh.element_count());
  parallel_for(mesh.element_count(), [&](std::size_t e) {
    double acc = 0, mx = 0;
    if (s == NormKind::linf) {
      for (const Vec3& x : element_sample_lattice(mesh, static_cast<int>(e), linf_samples_per_axis(order)))
        for (const auto& a : top) mx = std::max(mx, std::abs(u.derivative(x, a)));
    } else {
      const QuadRule rule = s == NormKind::l1
                                ? element_rule_composite(mesh, static_cast<int>(e), 2 * order + 2)
                                : element_rule(mesh, static_cast<int>(e), 2 * order + 2);
      for (const auto& q : rule)
        for (const auto& a : top) {
          const double d = u.derivative(q.x, a);
          acc += q.w * (s == NormKind::l1 ? std::abs(d) : d * d);
        }
    }
    parts[e] = s == NormKind::linf ? mx : acc;
  });
  return accumulate_norm(s, parts);
}

}  // namespace smoothcheck
