#include "smoothcheck/polynomial.hpp"

#include <cmath>
#include <stdexcept>

namespace smoothcheck {

Polynomial Polynomial::monomial(int n, const MultiIndex& alpha, double c) {
  Polynomial p(n, alpha.order());
  p.coefficient(alpha) = c;
  return p;
}

double& Polynomial::coefficient(const MultiIndex& alpha) { return coef_[multi_index_rank(alpha, degree_)]; }

double Polynomial::coefficient(const MultiIndex& alpha) const {
  if (alpha.order() > degree_) return 0.0;
  return coef_[multi_index_rank(alpha, degree_)];
}

double Polynomial::eval(const Vec3& x) const {
  const auto idx = enumerate_multi_indices(n_, degree_);
  double v = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    double t = coef_[i];
    if (t == 0.0) continue;
    for (int d = 0; d < n_; ++d)
      for (int k = 0; k < idx[i][d]; ++k) t *= x[d];
    v += t;
  }
  return v;
}

Polynomial Polynomial::derivative(int axis) const {
  Polynomial out(n_, degree_ > 0 ? degree_ - 1 : 0);
  const auto idx = enumerate_multi_indices(n_, degree_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (coef_[i] == 0.0 || idx[i][axis] == 0) continue;
    MultiIndex b = idx[i];
    b[axis] -= 1;
    out.coefficient(b) += coef_[i] * idx[i][axis];
  }
  return out;
}

double Polynomial::derivative_at(const Vec3& x, const MultiIndex& alpha) const {
  Polynomial d = *this;
  for (int axis = 0; axis < n_; ++axis)
    for (int k = 0; k < alpha[axis]; ++k) d = d.derivative(axis);
  return d.eval(x);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (o.n_ != n_) throw std::invalid_argument("Polynomial: variable count mismatch");
  Polynomial out(n_, std::max(degree_, o.degree_));
  for (const auto& a : enumerate_multi_indices(n_, degree_)) out.coefficient(a) += coefficient(a);
  for (const auto& a : enumerate_multi_indices(n_, o.degree_)) out.coefficient(a) += o.coefficient(a);
  return out;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.n_ != n_) throw std::invalid_argument("Polynomial: variable count mismatch");
  Polynomial out(n_, degree_ + o.degree_);
  const auto ia = enumerate_multi_indices(n_, degree_);
  const auto ib = enumerate_multi_indices(n_, o.degree_);
  for (std::size_t i = 0; i < ia.size(); ++i) {
    if (coef_[i] == 0.0) continue;
    for (std::size_t j = 0; j < ib.size(); ++j) {
      if (o.coef_[j] == 0.0) continue;
      MultiIndex c = MultiIndex::zero(n_);
      for (int d = 0; d < n_; ++d) c[d] = ia[i][d] + ib[j][d];
      out.coefficient(c) += coef_[i] * o.coef_[j];
    }
  }
  return out;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial out = *this;
  for (double& c : out.coef_) c *= s;
  return out;
}

Polynomial Polynomial::compose_affine(const Vec3& shift, const Frame& frame) const {
  // x_d = shift_d + sum_k B[d][k] y_k, as degree-1 polynomials in y
  std::vector<Polynomial> lin;
  for (int d = 0; d < n_; ++d) {
    Polynomial ell(n_, 1);
    ell.coefficient(MultiIndex::zero(n_)) = shift[d];
    for (int k = 0; k < n_; ++k) {
      MultiIndex e = MultiIndex::zero(n_);
      e[k] = 1;
      ell.coefficient(e) = frame.axis[k][d];
    }
    lin.push_back(ell);
  }
  Polynomial out(n_, degree_);
  const auto idx = enumerate_multi_indices(n_, degree_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (coef_[i] == 0.0) continue;
    Polynomial term(n_, 0);
    term.coefficient(MultiIndex::zero(n_)) = coef_[i];
    for (int d = 0; d < n_; ++d)
      for (int k = 0; k < idx[i][d]; ++k) term = term * lin[d];
    for (const auto& a : enumerate_multi_indices(n_, term.degree()))
      out.coefficient(a) += term.coefficient(a);
  }
  return out;
}

}  // namespace smoothcheck
