#ifndef SMOOTHCHECK_MULTI_INDEX_HPP
#define SMOOTHCHECK_MULTI_INDEX_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace smoothcheck {

/// Derivative/monomial multi-index alpha = (a1,...,an), n <= 3.
struct MultiIndex {
  std::array<int, 3> a{0, 0, 0};
  int dim = 1;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> comps) {
    dim = static_cast<int>(comps.size());
    int i = 0;
    for (int c : comps) a[i++] = c;
  }
  static MultiIndex zero(int n) {
    MultiIndex m;
    m.dim = n;
    return m;
  }

  int operator[](int i) const { return a[i]; }
  int& operator[](int i) { return a[i]; }

  int order() const { return a[0] + a[1] + a[2]; }

  double factorial() const {
    double f = 1.0;
    for (int i = 0; i < dim; ++i)
      for (int k = 2; k <= a[i]; ++k) f *= k;
    return f;
  }

  bool operator==(const MultiIndex& o) const { return dim == o.dim && a == o.a; }

  std::string to_string() const;
};

/// Number of multi-indices with |alpha| <= p in n variables: C(p+n, n).
int poly_space_dim(int n, int p);

/// All alpha with |alpha| <= p, graded order, and within each grade the
/// leading component decreases first: (0,0), (1,0), (0,1), (2,0), (1,1), ...
std::vector<MultiIndex> enumerate_multi_indices(int n, int p);

/// Position of alpha in enumerate_multi_indices(n, p) order.
int multi_index_rank(const MultiIndex& m, int p);

}  // namespace smoothcheck

#endif
