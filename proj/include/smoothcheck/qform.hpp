#ifndef SMOOTHCHECK_QFORM_HPP
#define SMOOTHCHECK_QFORM_HPP

#include <Eigen/Dense>
#include <vector>

#include "smoothcheck/multi_index.hpp"

namespace smoothcheck {

/// Scaled two-half domain for the jump quadratic form: paired half-intervals
/// (-r_hat, 0) u (0, r_hat) in 1D, half-balls of radius r_hat split by a
/// coordinate hyperplane through the origin in 2D/3D.
struct QFormSpec {
  int dim = 1;
  int degree = 0;
  double r_hat = 0.25;  // in (0, 1)
};

/// Q(Delta) = min over degree-p corrections v of
///   || v + g ||^2_{L2(neg half)} + || v - g ||^2_{L2(pos half)},
/// g = (1/2) sum_alpha (Delta_alpha / alpha!) xi^alpha. Eliminating v by a
/// Schur complement leaves a symmetric positive definite matrix on the jump
/// vector; its smallest eigenvalue is the positivity constant. Assembly and
/// the eigensolve run in extended precision: for p = 4 and small r_hat the
/// smallest eigenvalue sits below double rounding relative to the largest.
class QuadraticForm {
 public:
  using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

  const QFormSpec& spec() const { return spec_; }
  int size() const { return static_cast<int>(reduced_.rows()); }
  Eigen::MatrixXd matrix() const { return reduced_.cast<double>(); }

  double eval(const std::vector<double>& delta) const;
  double cp() const { return cp_; }
  double condition() const { return cond_; }

 private:
  friend QuadraticForm assemble_qform(const QFormSpec&);
  QFormSpec spec_;
  MatrixXld reduced_;
  double cp_ = 0;
  double cond_ = 0;
};

QuadraticForm assemble_qform(const QFormSpec& spec);

double eval_q(const QuadraticForm& qf, const std::vector<double>& delta);

/// Smallest eigenvalue of the reduced matrix. Throws if it is not positive
/// beyond the extended-precision noise floor (an assembly bug, not a
/// property of the form).
double cp_constant(const QuadraticForm& qf);

/// Direct minimization over quadrature-sampled least squares in the
/// correction coefficients; shares no assembly with assemble_qform.
double brute_force_q_min(const QFormSpec& spec, const std::vector<double>& delta);

}  // namespace smoothcheck

#endif
