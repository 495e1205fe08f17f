#ifndef SMOOTHCHECK_POLYNOMIAL_HPP
#define SMOOTHCHECK_POLYNOMIAL_HPP

#include <vector>

#include "smoothcheck/geometry.hpp"
#include "smoothcheck/multi_index.hpp"

namespace smoothcheck {

/// Dense polynomial in up to three variables, coefficients stored in the
/// graded multi-index order of enumerate_multi_indices. Small degrees only;
/// used for exact derivative bookkeeping and affine changes of variables.
class Polynomial {
 public:
  Polynomial(int n, int degree) : n_(n), degree_(degree), coef_(poly_space_dim(n, degree), 0.0) {}

  static Polynomial monomial(int n, const MultiIndex& alpha, double c = 1.0);

  int vars() const { return n_; }
  int degree() const { return degree_; }
  const std::vector<double>& coefficients() const { return coef_; }
  double& coefficient(const MultiIndex& alpha);
  double coefficient(const MultiIndex& alpha) const;

  double eval(const Vec3& x) const;

  Polynomial derivative(int axis) const;
  double derivative_at(const Vec3& x, const MultiIndex& alpha) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;

  /// Substitute x = shift + B * y, with B given by frame columns. The result
  /// is a polynomial in y of the same degree.
  Polynomial compose_affine(const Vec3& shift, const Frame& frame) const;

 private:
  int n_;
  int degree_;
  std::vector<double> coef_;
};

}  // namespace smoothcheck

#endif
