#include <numeric>

#include "doctest.h"
#include "operadkit/presentation.hpp"

using namespace operadkit;

namespace {

Report expect_pass(const Presentation& p, int bound = 0) {
  Report r = verify_axioms(p, bound);
  for (const auto& c : r.checks) {
    INFO(c.name, ": ", c.witness);
    CHECK(c.passed);
  }
  return r;
}

}  // namespace

TEST_CASE("permutation helpers") {
  std::vector<int> s = {2, 3, 1};  // s(1)=2, s(2)=3, s(3)=1
  auto si = perm_inverse(s);
  CHECK(perm_compose(s, si) == perm_identity(3));
  CHECK(perm_compose(si, s) == perm_identity(3));
  // adjacent word recomposes
  auto word = adjacent_word(s);
  auto acc = perm_identity(3);
  for (int j : word) {
    auto sj = perm_identity(3);
    std::swap(sj[j - 1], sj[j]);
    acc = perm_compose(acc, sj);
  }
  CHECK(acc == s);
}

TEST_CASE("com passes all axioms for n <= 6") {
  auto com = builtin("com", 6);
  CHECK(com.dim(2) == 1);
  CHECK(com.dim(6) == 1);
  expect_pass(com);
}

TEST_CASE("ass passes axioms for n <= 4 and the action is a right action") {
  auto ass = builtin("ass", 4);
  CHECK(ass.dim(3) == 6);
  expect_pass(ass);

  // act composition law on random-ish pairs in Sigma_3 and Sigma_4
  for (int n = 3; n <= 4; ++n) {
    std::vector<int> sigma = perm_identity(n), tau = perm_identity(n);
    std::rotate(sigma.begin(), sigma.begin() + 1, sigma.end());
    std::swap(tau[0], tau[n - 1]);
    for (int b = 0; b < ass.dim(n); ++b) {
      auto lhs = act(ass, n, act(ass, n, lincomb_single(b), sigma), tau);
      auto rhs = act(ass, n, lincomb_single(b), perm_compose(sigma, tau));
      CHECK(lincomb_equal(lhs, rhs));
    }
  }
}

TEST_CASE("ass structure constants agree with the word model") {
  auto ass = builtin("ass", 4);
  // gamma(e_21; e_12, e_21) as words: outer word (2,1): block2 then block1;
  // block2 = inputs {3,4} permuted by e_21 -> (4,3); block1 = (1,2).
  // composite word: 4,3,1,2
  std::vector<LinComb> ins = {lincomb_single(1), lincomb_single(0), lincomb_single(1)};
  auto res = gamma_eval(ass, {2, 2}, ins);
  REQUIRE(res.size() == 1);
  CHECK(ass.basis[4][res[0].first].name == "e4312");
  CHECK(res[0].second == Rat(1));
}

TEST_CASE("quasifree sample has a nonzero differential and passes axioms") {
  auto qf = builtin("quasifree_sample", 4);
  CHECK(qf.dim(2) == 2);
  CHECK(qf.dim(3) == 12);
  CHECK(qf.dim(4) == 120);
  bool has_d = false;
  for (int n = 1; n <= 4; ++n)
    for (const auto& col : qf.diff[n])
      if (!col.empty()) has_d = true;
  CHECK(has_d);
  expect_pass(qf);
}

TEST_CASE("dualization") {
  SUBCASE("dualize(com) is the com cooperad and passes axioms") {
    auto comc = builtin("com_cooperad", 5);
    CHECK(comc.kind == PresKind::Cooperad);
    expect_pass(comc);
  }
  SUBCASE("double dual of ass is ass again") {
    auto ass = builtin("ass", 3);
    auto dd = dualize(dualize(ass));
    CHECK(dd.gamma == ass.gamma);
    for (int n = 1; n <= 3; ++n) {
      REQUIRE(dd.dim(n) == ass.dim(n));
      for (int i = 0; i < ass.dim(n); ++i)
        CHECK(dd.basis[n][i].degree == ass.basis[n][i].degree);
    }
    expect_pass(dualize(builtin("ass", 4)));
  }
  SUBCASE("dual of the quasifree sample passes cooperad axioms") {
    expect_pass(builtin("quasifree_sample_cooperad", 3));
  }
}

TEST_CASE("bimodule adapters pass the bimodule axiom suite") {
  expect_pass(as_bimodule(builtin("com", 4)));
  expect_pass(as_bimodule(builtin("ass", 3)));
  expect_pass(as_cobimodule(builtin("com_cooperad", 4)));
  expect_pass(as_bimodule(builtin("quasifree_sample", 3)));
}

TEST_CASE("lambda data: composition law and eps consistency") {
  auto com = builtin("com", 4);
  Report r = verify_axioms(com);
  bool found = false;
  for (const auto& c : r.checks)
    if (c.name.rfind("lambda", 0) == 0) {
      found = true;
      CHECK(c.passed);
    }
  CHECK(found);
  auto comc = builtin("com_cooperad", 4);
  CHECK(lambda_eps(comc, 3) == lincomb_single(0));
}

TEST_CASE("json round trip and the hand-written free binary operad document") {
  SUBCASE("builtin com document round-trips") {
    auto com = builtin("com", 3);
    auto text = save_presentation(com);
    auto back = load_presentation(text);
    CHECK(back.gamma == com.gamma);
    CHECK(back.dim(3) == 1);
    expect_pass(back);
  }
  SUBCASE("free operad on one binary generator, written by hand") {
    // basis: arity 1 unit; arity 2 the generator; arity 3 the three shuffle
    // composites b(b(1,2),3), b(b(1,3),2), b(1,b(2,3)) with trivial action on
    // the generator.
    const char* doc = R"JSON({
      "name": "free_binary",
      "kind": "operad",
      "arity_bound": 3,
      "basis": {"1": {"0": ["1"]}, "2": {"0": ["b"]}, "3": {"0": ["b12_3", "b13_2", "b1_23"]}},
      "sym": {
        "2": [[[[0, "1"]]]],
        "3": [
          [[[0, "1"]], [[2, "1"]], [[1, "1"]]],
          [[[1, "1"]], [[0, "1"]], [[2, "1"]]]
        ]
      },
      "d": {},
      "gamma": [
        {"parts": [1, 1], "map": [{"from": [0, 0, 0], "to": 0, "c": "1"}]},
        {"parts": [2, 1], "map": [{"from": [0, 0, 0], "to": 0, "c": "1"}]},
        {"parts": [1, 2], "map": [{"from": [0, 0, 0], "to": 2, "c": "1"}]},
        {"parts": [1, 1, 1], "map": [
          {"from": [0, 0, 0, 0], "to": 0, "c": "1"},
          {"from": [1, 0, 0, 0], "to": 1, "c": "1"},
          {"from": [2, 0, 0, 0], "to": 2, "c": "1"}
        ]}
      ]
    })JSON";
    auto p = load_presentation(doc);
    CHECK(p.dim(3) == 3);
    expect_pass(p);
  }
  SUBCASE("document with a non-involutive transposition matrix is rejected") {
    const char* doc = R"JSON({
      "name": "broken",
      "kind": "operad",
      "arity_bound": 2,
      "basis": {"1": {"0": ["1"]}, "2": {"0": ["x", "y"]}},
      "sym": {"2": [[[[1, "1"]], [[0, "2"]]]]},
      "d": {},
      "gamma": [{"parts": [1, 1], "map": [
        {"from": [0, 0, 0], "to": 0, "c": "1"},
        {"from": [1, 0, 0], "to": 1, "c": "1"}
      ]}]
    })JSON";
    auto p = load_presentation(doc);
    Report r = verify_axioms(p);
    CHECK(!r.passed());
    bool invol_failed = false;
    for (const auto& c : r.checks)
      if (c.name == "sym: involutions" && !c.passed) invol_failed = true;
    CHECK(invol_failed);
  }
}

TEST_CASE("negative control: a perturbed structure constant is detected with a witness") {
  auto com = builtin("com", 4);
  com.gamma[{2, 2}][0].coeff = Rat(2);
  Report r = verify_axioms(com);
  CHECK(!r.passed());
  bool assoc_failed = false;
  for (const auto& c : r.checks)
    if (!c.passed && c.name.find("associativity") != std::string::npos && !c.witness.empty())
      assoc_failed = true;
  CHECK(assoc_failed);
}
