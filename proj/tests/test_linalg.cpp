#include "doctest.h"
#include "operadkit/linalg.hpp"

using namespace operadkit;

TEST_CASE("rational arithmetic and parsing") {
  CHECK(Rat(1, 3) + Rat(2, 5) == Rat(11, 15));
  CHECK(Rat(-2, 4) == Rat(-1, 2));
  CHECK(Rat::parse("7/21") == Rat(1, 3));
  CHECK(Rat::parse("-3") == Rat(-3));
  CHECK(Rat(1, 3).str() == "1/3");
  CHECK_THROWS(Rat::parse("x"));
  CHECK_THROWS(Rat(1) / Rat(0));
}

TEST_CASE("rank and kernel of small matrices") {
  SUBCASE("zero matrix: rank 0, kernel = standard basis") {
    SparseMatrix z(3, 4);
    auto rk = rank_kernel(z);
    CHECK(rk.rank == 0);
    REQUIRE(rk.kernel.size() == 4);
    for (int j = 0; j < 4; ++j) {
      REQUIRE(rk.kernel[j].size() == 1);
      CHECK(rk.kernel[j].count(j) == 1);
    }
  }
  SUBCASE("identity: full rank, empty kernel") {
    SparseMatrix id(3, 3);
    for (int i = 0; i < 3; ++i) id.set(i, i, Rat(1));
    auto rk = rank_kernel(id);
    CHECK(rk.rank == 3);
    CHECK(rk.kernel.empty());
  }
  SUBCASE("[[1,2],[2,4]]: rank 1, kernel spanned by (2,-1)") {
    SparseMatrix m(2, 2);
    m.set(0, 0, Rat(1));
    m.set(0, 1, Rat(2));
    m.set(1, 0, Rat(2));
    m.set(1, 1, Rat(4));
    auto rk = rank_kernel(m);
    CHECK(rk.rank == 1);
    REQUIRE(rk.kernel.size() == 1);
    // kernel vector proportional to (2, -1)
    const auto& k = rk.kernel[0];
    Rat x = k.count(0) ? k.at(0) : Rat(0);
    Rat y = k.count(1) ? k.at(1) : Rat(0);
    CHECK(x * Rat(-1) == y * Rat(2));
    CHECK(!(x.is_zero() && y.is_zero()));
    // and it actually lies in the kernel
    CHECK(m.apply(k).empty());
  }
}

TEST_CASE("rank + kernel dimension = columns; pivot order does not matter") {
  SparseMatrix m(4, 5);
  m.set(0, 0, Rat(1));
  m.set(0, 1, Rat(1, 2));
  m.set(1, 1, Rat(3));
  m.set(1, 2, Rat(-1));
  m.set(2, 3, Rat(5, 7));
  m.set(0, 4, Rat(2));
  m.set(2, 4, Rat(5, 7));
  auto a = rank_kernel(m, PivotRule::SparsestColumn);
  auto b = rank_kernel(m, PivotRule::FirstColumn);
  CHECK(a.rank == b.rank);
  CHECK(a.rank + static_cast<int>(a.kernel.size()) == m.cols());
  CHECK(b.rank + static_cast<int>(b.kernel.size()) == m.cols());
  for (const auto& k : a.kernel) CHECK(m.apply(k).empty());
  for (const auto& k : b.kernel) CHECK(m.apply(k).empty());
}

TEST_CASE("matrix market round trip") {
  SparseMatrix m(2, 3);
  m.set(0, 0, Rat(1, 3));
  m.set(1, 2, Rat(-7));
  auto text = m.dump();
  auto back = SparseMatrix::parse(text);
  CHECK(back == m);
}

TEST_CASE("cohomology dimensions") {
  SUBCASE("zero differentials: H = chain dims") {
    ComplexSlice c;
    c.dims = {{0, 2}, {1, 3}};
    c.d[0] = SparseMatrix(3, 2);
    auto h = cohomology_dims(c);
    CHECK(h[0] == 2);
    CHECK(h[1] == 3);
  }
  SUBCASE("0 -> Q -> Q -> 0 with identity d: all H vanish") {
    ComplexSlice c;
    c.dims = {{0, 1}, {1, 1}};
    SparseMatrix d(1, 1);
    d.set(0, 0, Rat(1));
    c.d[0] = d;
    auto h = cohomology_dims(c);
    CHECK(h.empty());
  }
  SUBCASE("d^2 != 0 is reported with the offending degree") {
    ComplexSlice c;
    c.dims = {{0, 1}, {1, 1}, {2, 1}};
    SparseMatrix d(1, 1);
    d.set(0, 0, Rat(1));
    c.d[0] = d;
    c.d[1] = d;
    CHECK_THROWS_WITH_AS(cohomology_dims(c), "d^2 != 0 at degree 0", std::invalid_argument);
  }
}
