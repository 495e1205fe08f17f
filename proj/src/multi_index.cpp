#include "smoothcheck/multi_index.hpp"

namespace smoothcheck {

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (int i = 0; i < dim; ++i) {
    if (i) s += ",";
    s += std::to_string(a[i]);
  }
  return s + ")";
}

int poly_space_dim(int n, int p) {
  if (n < 1 || n > 3 || p < 0) throw std::invalid_argument("poly_space_dim: need 1 <= n <= 3, p >= 0");
  // C(p+n, n)
  long long r = 1;
  for (int i = 1; i <= n; ++i) r = r * (p + i) / i;
  return static_cast<int>(r);
}

namespace {

void enumerate_grade(int n, int k, int pos, MultiIndex cur, std::vector<MultiIndex>& out) {
  if (pos == n - 1) {
    cur[pos] = k;
    out.push_back(cur);
    return;
  }
  for (int v = k; v >= 0; --v) {
    cur[pos] = v;
    enumerate_grade(n, k - v, pos + 1, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> enumerate_multi_indices(int n, int p) {
  if (n < 1 || n > 3 || p < 0) throw std::invalid_argument("enumerate_multi_indices: need 1 <= n <= 3, p >= 0");
  std::vector<MultiIndex> out;
  out.reserve(poly_space_dim(n, p));
  for (int k = 0; k <= p; ++k) enumerate_grade(n, k, 0, MultiIndex::zero(n), out);
  return out;
}

int multi_index_rank(const MultiIndex& m, int p) {
  const auto idx = enumerate_multi_indices(m.dim, p);
  for (int i = 0; i < static_cast<int>(idx.size()); ++i)
    if (idx[i] == m) return i;
  throw std::invalid_argument("multi_index_rank: index " + m.to_string() + " out of range for degree " +
                              std::to_string(p));
}

}  // namespace smoothcheck
