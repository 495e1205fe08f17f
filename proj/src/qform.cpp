#include "smoothcheck/qform.hpp"

#include <cmath>
#include <stdexcept>

#include "smoothcheck/quadrature.hpp"

namespace smoothcheck {

namespace {

void check_spec(const QFormSpec& s) {
  if (s.dim < 1 || s.dim > 3) throw std::invalid_argument("qform: dimension must be 1, 2 or 3");
  if (s.degree < 0) throw std::invalid_argument("qform: degree must be >= 0");
  if (!(s.r_hat > 0 && s.r_hat < 1)) throw std::invalid_argument("qform: r_hat must lie in (0, 1)");
}

}  // namespace

QuadraticForm assemble_qform(const QFormSpec& spec) {
  check_spec(spec);
  const auto idx = enumerate_multi_indices(spec.dim, spec.degree);
  const int m = static_cast<int>(idx.size());
  using Mat = QuadraticForm::MatrixXld;

  // Gram matrices of monomials over the two halves, from the closed-form
  // half-ball monomial integrals
  Mat Gp(m, m), Gm(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      MultiIndex g = MultiIndex::zero(spec.dim);
      for (int d = 0; d < spec.dim; ++d) g[d] = idx[i][d] + idx[j][d];
      Gp(i, j) = half_ball_monomial_integral(spec.dim, g, spec.r_hat, +1);
      Gm(i, j) = half_ball_monomial_integral(spec.dim, g, spec.r_hat, -1);
    }

  const Mat A = Gp + Gm;       // Gram over the whole domain
  const Mat B = Gm - Gp;       // signed difference driving the coupling
  Mat W = Mat::Zero(m, m);     // jump vector -> polynomial coefficients
  for (int i = 0; i < m; ++i) W(i, i) = 0.5L / static_cast<long double>(idx[i].factorial());

  const Mat reduced = W * (A - B * A.ldlt().solve(B)) * W;

  QuadraticForm qf;
  qf.spec_ = spec;
  qf.reduced_ = 0.5L * (reduced + reduced.transpose());  // enforce exact symmetry
  Eigen::SelfAdjointEigenSolver<Mat> es(qf.reduced_);
  const long double lmin = es.eigenvalues()(0);
  const long double lmax = es.eigenvalues()(m - 1);
  qf.cp_ = static_cast<double>(lmin);
  qf.cond_ = static_cast<double>(lmax / lmin);
  return qf;
}

double QuadraticForm::eval(const std::vector<double>& delta) const {
  if (static_cast<int>(delta.size()) != size())
    throw std::invalid_argument("eval_q: jump vector length " + std::to_string(delta.size()) +
                                ", expected " + std::to_string(size()));
  Eigen::Matrix<long double, Eigen::Dynamic, 1> d(size());
  for (int i = 0; i < size(); ++i) d(i) = delta[i];
  return static_cast<double>(d.dot(reduced_ * d));
}

double eval_q(const QuadraticForm& qf, const std::vector<double>& delta) { return qf.eval(delta); }

double cp_constant(const QuadraticForm& qf) {
  // noise floor of the extended-precision eigensolve
  const double lmax = qf.cp() * qf.condition();
  const double floor = 100.0 * 5.5e-20 * lmax;
  if (!(qf.cp() > 0) || qf.cp() <= floor)
    throw std::runtime_error("positivity violated: smallest eigenvalue " + std::to_string(qf.cp()) +
                             " is not positive beyond the numerical floor");
  return qf.cp();
}

double brute_force_q_min(const QFormSpec& spec, const std::vector<double>& delta) {
  check_spec(spec);
  const auto idx = enumerate_multi_indices(spec.dim, spec.degree);
  const int m = static_cast<int>(idx.size());
  if (static_cast<int>(delta.size()) != m)
    throw std::invalid_argument("brute_force_q_min: jump vector length mismatch");

  // residual rows sqrt(w) * (v(xi) -+ g(xi)) over the sampled halves; a
  // deliberately different route (different rule order, dense QR) from the
  // Schur assembly
  const int deg = 2 * spec.degree + 4;
  const Vec3 axis{1, 0, 0};
  std::vector<std::pair<QuadRule, int>> halves = {
      {half_ball_rule_nd(spec.dim, Vec3{0, 0, 0}, axis, spec.r_hat, deg, -1), -1},
      {half_ball_rule_nd(spec.dim, Vec3{0, 0, 0}, axis, spec.r_hat, deg, +1), +1}};

  std::size_t rows = 0;
  for (const auto& [rule, side] : halves) rows += rule.size();
  Eigen::MatrixXd X(rows, m);
  Eigen::VectorXd y(rows);
  std::size_t r = 0;
  for (const auto& [rule, side] : halves) {
    for (const auto& q : rule) {
      const double sw = std::sqrt(q.w);
      double g = 0;
      for (int j = 0; j < m; ++j) {
        double mono = 1;
        for (int d = 0; d < spec.dim; ++d)
          for (int k = 0; k < idx[j][d]; ++k) mono *= q.x[d];
        X(r, j) = sw * mono;
        g += 0.5 * delta[j] / idx[j].factorial() * mono;
      }
      // residual sqrt(w)(v + g) on the negative half, sqrt(w)(v - g) on the
      // positive half
      y(r) = side * g * sw;
      ++r;
    }
  }
  const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  return (X * c - y).squaredNorm();
}

}  // namespace smoothcheck
