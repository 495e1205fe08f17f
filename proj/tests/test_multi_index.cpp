#include "doctest.h"
#include "smoothcheck/multi_index.hpp"

using namespace smoothcheck;

TEST_CASE("enumeration matches the graded order") {
  SUBCASE("1D, p = 2") {
    const auto idx = enumerate_multi_indices(1, 2);
    REQUIRE(idx.size() == 3);
    CHECK(idx[0][0] == 0);
    CHECK(idx[1][0] == 1);
    CHECK(idx[2][0] == 2);
  }
  SUBCASE("2D, p = 1") {
    const auto idx = enumerate_multi_indices(2, 1);
    REQUIRE(idx.size() == 3);
    CHECK(idx[0] == MultiIndex{0, 0});
    CHECK(idx[1] == MultiIndex{1, 0});
    CHECK(idx[2] == MultiIndex{0, 1});
  }
  SUBCASE("3D, p = 2 has C(5,3) = 10 entries") {
    CHECK(enumerate_multi_indices(3, 2).size() == 10);
    CHECK(poly_space_dim(3, 2) == 10);
  }
}

TEST_CASE("enumeration is complete and duplicate-free") {
  for (int n = 1; n <= 3; ++n)
    for (int p = 0; p <= 4; ++p) {
      const auto idx = enumerate_multi_indices(n, p);
      CHECK(static_cast<int>(idx.size()) == poly_space_dim(n, p));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(idx[i].order() <= p);
        for (std::size_t j = i + 1; j < idx.size(); ++j) CHECK(!(idx[i] == idx[j]));
      }
      // graded: orders never decrease
      for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i].order() >= idx[i - 1].order());
    }
}

TEST_CASE("factorials and ranks") {
  MultiIndex a{2, 1, 3};
  CHECK(a.factorial() == 2.0 * 1.0 * 6.0);
  CHECK(a.order() == 6);
  const auto idx = enumerate_multi_indices(3, 3);
  for (std::size_t i = 0; i < idx.size(); ++i) CHECK(multi_index_rank(idx[i], 3) == static_cast<int>(i));
}
