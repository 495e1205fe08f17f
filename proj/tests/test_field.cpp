#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

#include "doctest.h"
#include "smoothcheck/field.hpp"

using namespace smoothcheck;

namespace {

const Box kUnit{{0, 0, 0}, {1, 1, 1}};

std::shared_ptr<const Mesh> unit_mesh(int dim, int div, ElementKind kind) {
  return std::make_shared<const Mesh>(build_structured_mesh(kUnit, dim, {div, div, div}, kind));
}

}  // namespace

TEST_CASE("derivatives of a quadratic field") {
  const auto mesh = unit_mesh(1, 4, ElementKind::interval);
  Polynomial q(1, 2);
  q.coefficient(MultiIndex{2}) = 1.0;  // x^2
  const PiecewisePolyField f = field_from_polynomial(mesh, 2, q);
  CHECK(f.eval_derivative(1, {0.3, 0, 0}, MultiIndex{1}) == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(f.eval_derivative(2, {0.5, 0, 0}, MultiIndex{1}) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(f.eval_derivative(2, {0.6, 0, 0}, MultiIndex{2}) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(f.eval_derivative(2, {0.6, 0, 0}, MultiIndex{3}) == 0.0);  // beyond the degree
  CHECK_THROWS_AS(f.eval_derivative(0, {0.9, 0, 0}, MultiIndex{1}), std::invalid_argument);
}

TEST_CASE("derivatives agree with the symbolic element polynomial") {
  std::mt19937_64 rng(3);
  for (ElementKind kind : {ElementKind::interval, ElementKind::triangle, ElementKind::tetrahedron}) {
    const int dim = element_dimension(kind);
    const int p = dim == 3 ? 2 : 3;
    const auto mesh = unit_mesh(dim, 2, kind);
    const PiecewisePolyField f = random_field(mesh, p, rng());
    for (int e = 0; e < std::min(4, mesh->element_count()); ++e) {
      const Vec3 c = mesh->element_centroid(e);
      const Polynomial q = f.element_polynomial(e, c);
      for (const auto& a : enumerate_multi_indices(dim, p)) {
        const double direct = f.eval_derivative_unchecked(e, c, a);
        const double symbolic = q.derivative_at({0, 0, 0}, a);
        CHECK(direct == doctest::Approx(symbolic).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("interface jumps") {
  SUBCASE("piecewise constants") {
    const auto mesh = unit_mesh(1, 2, ElementKind::interval);
    PiecewisePolyField f(mesh, 0);
    f.coefficients()[0][0] = 0.0;
    f.coefficients()[1][0] = 1.0;
    CHECK(interface_jump(f, mesh->interfaces()[0], MultiIndex{0}) == doctest::Approx(1.0));
  }
  SUBCASE("continuous kink: zero value jump, slope difference in the derivative") {
    const auto mesh = unit_mesh(1, 2, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("abs_kink", 1, {{"loc", 0.5}});
    const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 1);
    const Interface& itf = mesh->interfaces()[0];
    CHECK(std::abs(interface_jump(f, itf, MultiIndex{0})) < 1e-14);
    CHECK(interface_jump(f, itf, MultiIndex{1}) == doctest::Approx(2.0).epsilon(1e-13));
  }
  SUBCASE("jump equals the difference of one-sided traces") {
    const auto mesh = unit_mesh(2, 2, ElementKind::triangle);
    const PiecewisePolyField f = random_field(mesh, 2, 99);
    for (const auto& itf : mesh->interfaces())
      for (const auto& a : enumerate_multi_indices(2, 2)) {
        const double two_sided =
            f.eval_derivative_unchecked(itf.right_element, itf.evaluation_point, a) -
            f.eval_derivative_unchecked(itf.left_element, itf.evaluation_point, a);
        CHECK(interface_jump(f, itf, a) == doctest::Approx(two_sided).epsilon(1e-14));
      }
  }
}

TEST_CASE("Lagrange interpolant") {
  SUBCASE("reproduces polynomials of full degree") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("poly", 1, {{"degree", 2}, {"coefficients", {0.5, -1, 1}}});
    const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 2);
    CHECK(error_norm(u, f, NormKind::linf) < 1e-13);
  }
  SUBCASE("classical remainder ceiling for sin on h = 1/4") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("sin_pi_x", 1);
    const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 1);
    const double h = 0.25;
    CHECK(error_norm(u, f, NormKind::linf) <= (M_PI * h) * (M_PI * h) / 8);
    // nodal continuity of the interpolant
    for (const auto& itf : mesh->interfaces())
      CHECK(std::abs(interface_jump(f, itf, MultiIndex{0})) < 1e-13);
  }
  SUBCASE("p = 0 matches at the left endpoint") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("sin_pi_x", 1);
    const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 0);
    for (int e = 0; e < 4; ++e) {
      const double left = mesh->element_vertices(e)[0].x;
      CHECK(f.eval(e, {left, 0, 0}) == doctest::Approx(u.value({left, 0, 0})).epsilon(1e-14));
    }
  }
}

TEST_CASE("element-wise L2 best fit reproduces polynomials") {
  for (ElementKind kind : {ElementKind::interval, ElementKind::triangle, ElementKind::quadrilateral}) {
    const int dim = element_dimension(kind);
    const auto mesh = unit_mesh(dim, 2, kind);
    nlohmann::json params = {{"degree", 2}};
    params["coefficients"] = std::vector<double>(poly_space_dim(dim, 2), 0.7);
    const TargetFunction u = TargetFunction::make("poly", dim, params);
    const PiecewisePolyField f = l2_best_fit(u, mesh, 2);
    CHECK(error_norm(u, f, NormKind::linf) < 1e-12);
  }
}

TEST_CASE("dual projection") {
  SUBCASE("reproduces global polynomials on every covolume") {
    for (ElementKind kind : {ElementKind::interval, ElementKind::triangle, ElementKind::quadrilateral}) {
      const int dim = element_dimension(kind);
      const auto mesh = unit_mesh(dim, 2, kind);
      const auto dual = std::make_shared<const DualMesh>(build_dual_covolume(mesh));
      nlohmann::json params = {{"degree", 1}};
      params["coefficients"] = std::vector<double>(poly_space_dim(dim, 1), -0.3);
      const TargetFunction u = TargetFunction::make("poly", dim, params);
      const DualProjection proj = local_l2_project_dual(u, dual, 1);
      CHECK(error_norm_dual(u, proj.field, NormKind::linf) < 1e-12);
      CHECK(proj.max_orthogonality_residual < 1e-10);
    }
  }
  SUBCASE("constants project to themselves") {
    const auto mesh = unit_mesh(2, 2, ElementKind::triangle);
    const auto dual = std::make_shared<const DualMesh>(build_dual_covolume(mesh));
    const TargetFunction u = TargetFunction::make("poly", 2, {{"degree", 0}, {"coefficients", {4.25}}});
    const DualProjection proj = local_l2_project_dual(u, dual, 2);
    CHECK(error_norm_dual(u, proj.field, NormKind::linf) < 1e-12);
  }
  SUBCASE("second-order decay for sin under refinement, p = 1") {
    const TargetFunction u = TargetFunction::make("sin_pi_x", 1);
    std::vector<double> hs, errs;
    auto mesh = unit_mesh(1, 8, ElementKind::interval);
    for (int level = 0; level < 4; ++level) {
      if (level > 0) mesh = std::make_shared<const Mesh>(mesh->refined_uniform());
      const auto dual = std::make_shared<const DualMesh>(build_dual_covolume(mesh));
      const DualProjection proj = local_l2_project_dual(u, dual, 1);
      hs.push_back(mesh->h());
      errs.push_back(error_norm_dual(u, proj.field, NormKind::l2));
    }
    for (std::size_t i = 1; i < hs.size(); ++i) {
      const double rate = std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]);
      CHECK(rate == doctest::Approx(2.0).epsilon(0.05));
    }
  }
  SUBCASE("gram condition stays moderate at p = 4") {
    const auto mesh = unit_mesh(2, 3, ElementKind::triangle);
    const auto dual = std::make_shared<const DualMesh>(build_dual_covolume(mesh));
    const TargetFunction u = TargetFunction::make("sin_pi_xy", 2);
    const DualProjection proj = local_l2_project_dual(u, dual, 4);
    CHECK(proj.max_gram_condition < 1e6);
  }
}

TEST_CASE("error norms against closed forms") {
  const auto mesh = unit_mesh(1, 4, ElementKind::interval);
  const TargetFunction u = TargetFunction::make("poly", 1, {{"degree", 1}, {"coefficients", {0.0, 1.0}}});
  PiecewisePolyField zero(mesh, 1);
  CHECK(error_norm(u, zero, NormKind::l2) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(error_norm(u, zero, NormKind::linf) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(error_norm(u, zero, NormKind::l1) == doctest::Approx(0.5).epsilon(1e-12));
  const PiecewisePolyField exact = lagrange_interpolant_1d(u, mesh, 1);
  for (NormKind s : {NormKind::l1, NormKind::l2, NormKind::linf}) CHECK(error_norm(u, exact, s) < 1e-13);
}

TEST_CASE("disk error norms split at the interface") {
  const auto mesh = unit_mesh(1, 2, ElementKind::interval);
  PiecewisePolyField f(mesh, 0);
  f.coefficients()[0][0] = -0.5;
  f.coefficients()[1][0] = 0.5;
  const TargetFunction zero = TargetFunction::make("poly", 1, {{"degree", 0}, {"coefficients", {0.0}}});
  // || 0 - f ||^2 over (0.5 - delta, 0.5 + delta) = 2 delta * 0.25
  const double delta = 0.1;
  const double got = error_norm_disk(zero, f, {0.5, 0, 0}, delta, NormKind::l2);
  CHECK(got == doctest::Approx(std::sqrt(2 * delta * 0.25)).epsilon(1e-12));
  CHECK_THROWS_AS(error_norm_disk(zero, f, {0.5, 0, 0}, 0.6, NormKind::l2), std::invalid_argument);
}

TEST_CASE("Sobolev seminorms") {
  SUBCASE("monic top derivative normalizes to one") {
    for (int p = 0; p <= 2; ++p) {
      const auto mesh = unit_mesh(1, 4, ElementKind::interval);
      std::vector<double> coef(poly_space_dim(1, p + 1), 0.0);
      double fac = 1;
      for (int k = 2; k <= p + 1; ++k) fac *= k;
      coef.back() = 1.0 / fac;  // x^{p+1}/(p+1)!
      const TargetFunction u = TargetFunction::make("poly", 1, {{"degree", p + 1}, {"coefficients", coef}});
      CHECK(sobolev_seminorm(u, *mesh, p + 1, NormKind::linf) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("sin on (0, pi), first derivative, L2") {
    const Mesh m = build_structured_mesh(Box{{0, 0, 0}, {M_PI, 0, 0}}, 1, {8, 1, 1}, ElementKind::interval);
    TargetFunction u;
    u.dim = 1;
    u.max_order = 8;
    u.name = "sin";
    u.derivative = [](const Vec3& x, const MultiIndex& a) { return std::sin(x.x + a[0] * M_PI_2); };
    CHECK(sobolev_seminorm(u, m, 1, NormKind::l2) == doctest::Approx(std::sqrt(M_PI / 2)).epsilon(1e-10));
  }
  SUBCASE("polynomials below the order vanish") {
    const auto mesh = unit_mesh(1, 2, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("poly", 1, {{"degree", 2}, {"coefficients", {1, 2, 3}}});
    CHECK(sobolev_seminorm(u, *mesh, 3, NormKind::l2) < 1e-13);
  }
  SUBCASE("exact unit-box formulas match quadrature") {
    const auto m1 = unit_mesh(1, 8, ElementKind::interval);
    const TargetFunction u1 = TargetFunction::make("sin_pi_x", 1);
    for (NormKind s : {NormKind::l1, NormKind::l2, NormKind::linf})
      CHECK(sobolev_seminorm(u1, *m1, 2, s) == doctest::Approx(*u1.seminorm_if_known(2, s)).epsilon(2e-4));
    const auto m2 = unit_mesh(2, 6, ElementKind::triangle);
    const TargetFunction u2 = TargetFunction::make("sin_pi_xy", 2);
    for (NormKind s : {NormKind::l1, NormKind::l2, NormKind::linf})
      CHECK(sobolev_seminorm(u2, *m2, 2, s) == doctest::Approx(*u2.seminorm_if_known(2, s)).epsilon(2e-3));
  }
}

TEST_CASE("target derivative oracle is finite-difference consistent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.2, 0.8);
  for (const char* name : {"sin_pi_x", "sin_pi_xy"}) {
    const int dim = std::string(name) == "sin_pi_x" ? 1 : 2;
    const TargetFunction u = TargetFunction::make(name, dim);
    const double eps = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
      Vec3 x{pos(rng), dim > 1 ? pos(rng) : 0, 0};
      for (int axis = 0; axis < dim; ++axis)
        for (int k = 0; k < 2; ++k) {
          MultiIndex a = MultiIndex::zero(dim), b = MultiIndex::zero(dim);
          a[axis] = k;
          b[axis] = k + 1;
          Vec3 xp = x, xm = x;
          xp[axis] += eps;
          xm[axis] -= eps;
          const double fd = (u.derivative(xp, a) - u.derivative(xm, a)) / (2 * eps);
          CHECK(fd == doctest::Approx(u.derivative(x, b)).epsilon(1e-4));
        }
    }
  }
}

TEST_CASE("field JSON round trip") {
  const auto mesh = unit_mesh(2, 2, ElementKind::triangle);
  const PiecewisePolyField f = random_field(mesh, 2, 4242);
  const std::string path = "/tmp/smoothcheck_test_field.json";
  f.save(path);
  const PiecewisePolyField g = PiecewisePolyField::load(path);
  REQUIRE(g.degree() == f.degree());
  REQUIRE(g.coefficients().size() == f.coefficients().size());
  for (std::size_t e = 0; e < f.coefficients().size(); ++e)
    for (std::size_t j = 0; j < f.coefficients()[e].size(); ++j)
      CHECK(g.coefficients()[e][j] == f.coefficients()[e][j]);
  CHECK(g.mesh().element_count() == f.mesh().element_count());
  std::remove(path.c_str());
}
