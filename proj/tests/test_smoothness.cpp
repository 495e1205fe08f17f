#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "smoothcheck/smoothness.hpp"

using namespace smoothcheck;

namespace {

const Box kUnit{{0, 0, 0}, {1, 1, 1}};

std::shared_ptr<const Mesh> unit_mesh(int dim, int div, ElementKind kind) {
  return std::make_shared<const Mesh>(build_structured_mesh(kUnit, dim, {div, div, div}, kind));
}

/// 1D piecewise-constant field taking the prescribed per-element values.
PiecewisePolyField constants(std::shared_ptr<const Mesh> mesh, const std::vector<double>& vals) {
  PiecewisePolyField f(mesh, 0);
  for (std::size_t e = 0; e < vals.size(); ++e) f.coefficients()[e][0] = vals[e];
  return f;
}

}  // namespace

TEST_CASE("scaled jumps at a single interface") {
  const auto mesh = unit_mesh(1, 2, ElementKind::interval);
  const PiecewisePolyField f = constants(mesh, {0.0, 1.0});
  const JumpVector jv = scaled_jump_vector(f, mesh->interfaces()[0]);
  CHECK(jv.raw[0] == doctest::Approx(1.0));
  CHECK(jv.d[0] == doctest::Approx(2.0));  // J / h^{p+1} with h = 0.5
  CHECK(jv.norm_d == doctest::Approx(2.0));
  CHECK(type_a_indicator(f, NormKind::linf) == doctest::Approx(2.0));
  CHECK(type_a_indicator(f, NormKind::l2) == doctest::Approx(0.5 * 4.0));
  CHECK(type_a_indicator(f, NormKind::l1) == doctest::Approx(0.5 * 2.0));
}

TEST_CASE("continuous fields have zero jumps") {
  const auto mesh = unit_mesh(2, 3, ElementKind::triangle);
  Polynomial q(2, 2);
  q.coefficient(MultiIndex{1, 1}) = 2.0;
  q.coefficient(MultiIndex{0, 1}) = -1.0;
  const PiecewisePolyField f = field_from_polynomial(mesh, 2, q);
  for (NormKind s : {NormKind::l1, NormKind::l2, NormKind::linf})
    CHECK(type_a_indicator(f, s) < 1e-12);
}

TEST_CASE("the two jump scalings") {
  SUBCASE("tilde scaling equals d times (h_min/h)^k") {
    const auto mesh = unit_mesh(2, 3, ElementKind::triangle);  // h != h_min here
    REQUIRE(mesh->h() > mesh->h_min() * 1.1);
    const PiecewisePolyField f = random_field(mesh, 2, 7);
    const auto idx = enumerate_multi_indices(2, 2);
    for (const auto& itf : mesh->interfaces()) {
      const JumpVector jv = scaled_jump_vector(f, itf);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const double expect = jv.d[i] * std::pow(mesh->h_min() / mesh->h(), idx[i].order());
        CHECK(jv.d_tilde[i] == doctest::Approx(expect).epsilon(1e-13));
      }
    }
  }
  SUBCASE("on uniform meshes the scalings coincide exactly") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const PiecewisePolyField f = random_field(mesh, 3, 8);
    for (const auto& itf : mesh->interfaces()) {
      const JumpVector jv = scaled_jump_vector(f, itf);
      for (std::size_t i = 0; i < jv.d.size(); ++i) CHECK(jv.d_tilde[i] == jv.d[i]);
    }
  }
}

TEST_CASE("type A stays bounded for the interpolant of a smooth target") {
  const TargetFunction u = TargetFunction::make("sin_pi_x", 1);
  auto mesh = unit_mesh(1, 8, ElementKind::interval);
  double prev = -1;
  for (int level = 0; level < 4; ++level) {
    if (level > 0) mesh = std::make_shared<const Mesh>(mesh->refined_uniform());
    const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 2);
    const double val = type_a_indicator(f, NormKind::linf);
    if (prev > 0) {
      CHECK(val / prev >= 0.5);
      CHECK(val / prev <= 1.5);
    }
    prev = val;
  }
}

TEST_CASE("interior vectors") {
  SUBCASE("field matching a polynomial target has zero differences") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("poly", 1, {{"degree", 1}, {"coefficients", {1.0, 2.0}}});
    const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 1);
    const InteriorVector iv = interior_vector(f, &u, 1, mesh->element_centroid(1));
    for (double v : iv.f) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("hand-evaluated scaled difference at a shared node") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("sin_pi_x", 1);
    PiecewisePolyField zero(mesh, 1);
    const InteriorVector iv = interior_vector(zero, &u, 1, {0.5, 0, 0});
    CHECK(iv.f[0] == doctest::Approx(16.0).epsilon(1e-12));  // sin(pi/2)/h^2
  }
  SUBCASE("derivative magnitudes need no target") {
    const auto mesh = unit_mesh(1, 2, ElementKind::interval);
    const PiecewisePolyField f = constants(mesh, {5.0, 5.0});
    const InteriorVector iv = interior_vector(f, nullptr, 0, mesh->element_centroid(0));
    CHECK(iv.m[0] == doctest::Approx(5.0));
    CHECK(iv.max_m == doctest::Approx(5.0));
    CHECK(iv.f.empty());
  }
  SUBCASE("sample point outside the element") {
    const auto mesh = unit_mesh(1, 2, ElementKind::interval);
    const PiecewisePolyField f = constants(mesh, {1.0, 2.0});
    CHECK_THROWS_AS(interior_vector(f, nullptr, 0, {0.9, 0, 0}), std::invalid_argument);
  }
}

TEST_CASE("type I indicator") {
  SUBCASE("field 0 against u = 1 at p = 0") {
    const auto mesh = unit_mesh(1, 2, ElementKind::interval);
    PiecewisePolyField zero(mesh, 0);
    const TargetFunction u = TargetFunction::make("poly", 1, {{"degree", 0}, {"coefficients", {1.0}}});
    CHECK(type_i_indicator(zero, u, NormKind::linf) == doctest::Approx(2.0));  // |1|/h
  }
  SUBCASE("interpolated polynomial target gives zero") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("poly", 1, {{"degree", 2}, {"coefficients", {0, 1, 1}}});
    const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 2);
    CHECK(type_i_indicator(f, u, NormKind::linf) < 1e-12);
  }
  SUBCASE("bounded across refinements for the sin interpolant") {
    const TargetFunction u = TargetFunction::make("sin_pi_x", 1);
    auto mesh = unit_mesh(1, 8, ElementKind::interval);
    double prev = -1;
    for (int level = 0; level < 4; ++level) {
      if (level > 0) mesh = std::make_shared<const Mesh>(mesh->refined_uniform());
      const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 1);
      const double val = type_i_indicator(f, u, NormKind::linf);
      if (prev > 0) CHECK(val / prev <= 1.5);
      prev = val;
    }
  }
}

TEST_CASE("jump homogeneity under coefficient scaling") {
  const auto mesh = unit_mesh(2, 2, ElementKind::triangle);
  PiecewisePolyField f = random_field(mesh, 2, 55);
  const double a1 = type_a_indicator(f, NormKind::l1);
  const double a2 = type_a_indicator(f, NormKind::l2);
  const double ai = type_a_indicator(f, NormKind::linf);
  const double t = -3.5;
  for (auto& el : f.coefficients())
    for (auto& c : el) c *= t;
  CHECK(type_a_indicator(f, NormKind::l1) == doctest::Approx(std::abs(t) * a1).epsilon(1e-12));
  CHECK(type_a_indicator(f, NormKind::l2) == doctest::Approx(t * t * a2).epsilon(1e-12));
  CHECK(type_a_indicator(f, NormKind::linf) == doctest::Approx(std::abs(t) * ai).epsilon(1e-12));
}

TEST_CASE("type A vanishes exactly when no derivative jumps exist") {
  const auto mesh = unit_mesh(1, 4, ElementKind::interval);
  Polynomial q(1, 1);
  q.coefficient(MultiIndex{1}) = 1.0;
  PiecewisePolyField f = field_from_polynomial(mesh, 1, q);
  CHECK(type_a_indicator(f, NormKind::linf) < 1e-13);
  f.coefficients()[2][1] += 0.25;  // slope bump -> first-derivative jump
  CHECK(type_a_indicator(f, NormKind::linf) > 1e-3);
}

TEST_CASE("smoothness report") {
  SUBCASE("smooth interpolant with generous thresholds") {
    const auto mesh = unit_mesh(1, 8, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("sin_pi_x", 1);
    const PiecewisePolyField f = lagrange_interpolant_1d(u, mesh, 2);
    Thresholds th;
    th.d_norm = 1e6;
    const SmoothnessReport r = smoothness_report(f, &u, th);
    CHECK(r.verdict == "smooth");
    CHECK(r.type_a.at("inf") == doctest::Approx(type_a_indicator(f, NormKind::linf)));
    CHECK(r.type_i.count("2") == 1);
  }
  SUBCASE("step best fit flags the interfaces at the discontinuity") {
    auto mesh = unit_mesh(1, 8, ElementKind::interval);
    const TargetFunction u = TargetFunction::make("step", 1, {{"loc", 0.5 + 1.0 / 24}});
    const PiecewisePolyField f = l2_best_fit(u, mesh, 0);
    const SmoothnessReport r = smoothness_report(f, nullptr, {});
    CHECK(r.verdict == "flagged");
    REQUIRE(!r.flagged_interfaces.empty());
    // the largest scaled jump sits at the crossing element and is flagged
    double best_norm = 0;
    int best_id = -1;
    for (const auto& jv : r.jumps)
      if (jv.norm_d > best_norm) {
        best_norm = jv.norm_d;
        best_id = jv.interface_id;
      }
    CHECK(std::count(r.flagged_interfaces.begin(), r.flagged_interfaces.end(), best_id) == 1);
    const Vec3 x = mesh->interfaces()[best_id].evaluation_point;
    CHECK(std::abs(x.x - (0.5 + 1.0 / 24)) <= mesh->h() + 1e-12);
  }
  SUBCASE("zero thresholds flag every jumping interface") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const PiecewisePolyField f = random_field(mesh, 1, 12);
    Thresholds th;
    th.d_norm = 0.0;
    const SmoothnessReport r = smoothness_report(f, nullptr, th);
    CHECK(r.flagged_interfaces.size() == mesh->interfaces().size());
  }
  SUBCASE("CSV has one row per interface") {
    const auto mesh = unit_mesh(1, 4, ElementKind::interval);
    const PiecewisePolyField f = random_field(mesh, 1, 12);
    const SmoothnessReport r = smoothness_report(f, nullptr, {});
    const std::string csv = r.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3);
  }
}
