#include <algorithm>
#include <set>

#include "doctest.h"
#include "operadkit/leveled_tree.hpp"
#include "operadkit/planar_tree.hpp"

using namespace operadkit;

namespace {

// Independent oracle: s(1) = 1, s(n) = sum over compositions of n into >= 2
// parts of the product of s(parts).
long shape_count_oracle(int n) {
  if (n == 1) return 1;
  long total = 0;
  std::vector<int> comp;
  std::function<long(int)> rec = [&](int rest) -> long {
    long acc = 0;
    if (rest == 0) {
      if (comp.size() < 2) return 0;
      long prod = 1;
      for (int part : comp) prod *= shape_count_oracle(part);
      return prod;
    }
    for (int part = 1; part <= rest; ++part) {
      comp.push_back(part);
      acc += rec(rest - part);
      comp.pop_back();
    }
    return acc;
  };
  total = rec(n);
  return total;
}

long factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

// Shared helper of the brute-force oracles: every tuple of surjective (not
// necessarily monotone) index maps along the level-size profile, filtered by
// the full validator. The order structure is entirely the validator's job.
long count_valid_chains(const std::vector<int>& full, int n, bool sectioned) {
  long count = 0;
  std::vector<std::vector<int>> maps(full.size() - 1);
  std::function<void(size_t)> over_maps = [&](size_t j) {
    if (j + 1 == full.size()) {
      if (sectioned) {
        SectionedTree t;
        t.tree.maps = maps;
        t.tree.labels.resize(n);
        for (int i = 0; i < n; ++i) t.tree.labels[i] = i + 1;
        for (int s = 0; s <= t.tree.height(); ++s) {
          t.section = s;
          if (validate_sectioned(t).ok()) ++count;
        }
      } else {
        LeveledTree t;
        t.maps = maps;
        t.labels.resize(n);
        for (int i = 0; i < n; ++i) t.labels[i] = i + 1;
        if (validate_leveled(t).ok()) ++count;
      }
      return;
    }
    const int upper = full[j + 1], lower = full[j];
    std::vector<int>& m = maps[j];
    m.assign(upper, 0);
    std::vector<int> hit(lower, 0);
    std::function<void(int, int)> fill = [&](int q, int covered) {
      if (lower - covered > upper - q) return;  // cannot reach surjectivity
      if (q == upper) {
        over_maps(j + 1);
        return;
      }
      for (int v = 0; v < lower; ++v) {
        m[q] = v;
        ++hit[v];
        fill(q + 1, covered + (hit[v] == 1 ? 1 : 0));
        --hit[v];
      }
    };
    fill(0, 0);
  };
  over_maps(0);
  return count;
}

// Surjections force weak growth upward with at most one equal step (none for
// plain leveled trees); every size profile within that a-priori bound is tried.
void size_profiles(int n, int equal_budget, const std::function<void(const std::vector<int>&)>& emit) {
  std::vector<int> sizes = {1};
  std::function<void(int)> rec = [&](int equals_left) {
    int top_equals = sizes.back() == n ? 1 : 0;
    if (top_equals <= equals_left) {
      std::vector<int> full = sizes;
      full.push_back(n);
      emit(full);
    }
    for (int next = sizes.back(); next <= n; ++next) {
      int cost = next == sizes.back() ? 1 : 0;
      if (cost > equals_left) continue;
      sizes.push_back(next);
      rec(equals_left - cost);
      sizes.pop_back();
    }
  };
  rec(equal_budget);
}

long leveled_chain_count_bruteforce(int n) {
  long count = 0;
  size_profiles(n, 0, [&](const std::vector<int>& full) { count += count_valid_chains(full, n, false); });
  return count;
}

long sectioned_chain_count_bruteforce(int n) {
  long count = 0;
  size_profiles(n, 1, [&](const std::vector<int>& full) { count += count_valid_chains(full, n, true); });
  return count;
}

}  // namespace

TEST_CASE("planar shape counts match the composition recursion") {
  CHECK(enumerate_planar_shapes(2).size() == 1);
  CHECK(enumerate_planar_shapes(3).size() == 3);
  CHECK(enumerate_planar_shapes(4).size() == 11);
  for (int n = 2; n <= 5; ++n)
    CHECK(static_cast<long>(enumerate_planar_shapes(n).size()) == shape_count_oracle(n));
}

TEST_CASE("labeled planar trees: count and validity") {
  auto all3 = enumerate_planar_labeled(3);
  CHECK(all3.size() == 18);
  for (const auto& t : all3) {
    auto rep = validate_planar(to_raw(t), true, false);
    CHECK(rep.ok());
  }
  CHECK(enumerate_planar_labeled(4).size() == 11 * 24);
}

TEST_CASE("shuffle trees are the min-leaf-sorted representatives") {
  auto sh3 = enumerate_shuffle_trees(3);
  CHECK(sh3.size() == 4);  // corolla + 3 two-vertex trees
  for (const auto& t : sh3) CHECK(t.is_shuffle_ordered());
  auto all3 = enumerate_planar_labeled(3);
  int sorted = 0;
  for (const auto& t : all3)
    if (t.is_shuffle_ordered()) ++sorted;
  CHECK(sorted == 4);
}

TEST_CASE("validate planar rejects broken data") {
  auto c2 = PlanarTree::corolla(2);
  CHECK(validate_planar(to_raw(c2)).ok());
  RawPlanar bad = to_raw(c2);
  bad.target[1] = 1;  // leaf targeting itself
  CHECK(!validate_planar(bad).ok());
}

TEST_CASE("leveled tree validation") {
  auto c2 = LeveledTree::corolla(2);
  CHECK(validate_leveled(c2).ok());

  // chain with |V_{i+1}| == |V_i|: level does not grow
  LeveledTree bad;
  bad.labels = {1, 2};
  bad.maps = {{0}, {0, 0}};  // V_1 has one vertex: t_0 bijective
  auto rep = validate_leveled(bad);
  CHECK(!rep.ok());

  // the same chain is a fine sectioned tree with the section at 0
  SectionedTree s{bad, 0};
  CHECK(validate_sectioned(s).ok());
  // ... but not with the section elsewhere
  s.section = 1;
  CHECK(!validate_sectioned(s).ok());
}

TEST_CASE("enumeration counts for leveled and sectioned trees") {
  CHECK(enumerate_leveled(2).size() == 2);  // one corolla shape, two labelings
  for (int n = 2; n <= 4; ++n) {
    auto ts = enumerate_leveled(n);
    std::set<LeveledTree> dedup(ts.begin(), ts.end());
    CHECK(dedup.size() == ts.size());
    for (const auto& t : ts) CHECK(validate_leveled(t).ok());
    CHECK(static_cast<long>(ts.size()) == leveled_chain_count_bruteforce(n) * factorial(n));
  }
  CHECK(enumerate_sectioned(1).size() == 1);
  for (int n = 1; n <= 4; ++n) {
    auto ts = enumerate_sectioned(n);
    std::set<SectionedTree> dedup(ts.begin(), ts.end());
    CHECK(dedup.size() == ts.size());
    for (const auto& t : ts) CHECK(validate_sectioned(t).ok());
    CHECK(static_cast<long>(ts.size()) == sectioned_chain_count_bruteforce(n) * factorial(n));
  }
}

TEST_CASE("permutable levels and the permutation involution") {
  for (int n = 2; n <= 4; ++n) {
    for (const auto& t : enumerate_leveled(n)) {
      for (int i = 1; i < t.height(); ++i) {
        if (!is_permutable(t, i)) continue;
        auto once = permute(t, i);
        CHECK(validate_leveled(once.tree).ok());
        CHECK(is_permutable(once.tree, i));
        auto twice = permute(once.tree, i);
        CHECK(twice.tree == t);
        // class stability
        CHECK(alpha(once.tree) == alpha(t));
      }
    }
  }
}

TEST_CASE("a corolla stacked over a corolla is not permutable") {
  // big vertex at level 1 whose child at level 2 is also big: a direct wide edge
  LeveledTree t;
  t.labels = {1, 2, 3, 4};
  t.maps = {{0, 0}, {0, 0, 1}, {0, 1, 1, 2}};
  REQUIRE(validate_leveled(t).ok());
  CHECK(t.arity(1, 0) == 2);
  CHECK(t.arity(2, 1) == 2);
  CHECK(!is_permutable(t, 1));
}

TEST_CASE("two disjoint 2-corollas on adjacent levels over bivalent chains are permutable") {
  // root(2); level1: A(2), pad; level2: pad, pad, B(2); leaves 4
  LeveledTree t;
  t.labels = {1, 2, 3, 4};
  t.maps = {{0, 0}, {0, 0, 1}, {0, 1, 2, 2}};
  REQUIRE(validate_leveled(t).ok());
  CHECK(is_permutable(t, 1));
  auto p = permute(t, 1);
  CHECK(validate_leveled(p.tree).ok());
  CHECK(alpha(p.tree) == alpha(t));
  CHECK(p.tree != t);
}

TEST_CASE("contraction: identity interval, figures, and full collapse") {
  for (int n = 2; n <= 4; ++n) {
    for (const auto& t : enumerate_leveled(n)) {
      auto same = contract(t, 1, 0);
      REQUIRE(same.has_value());
      CHECK(*same == t);
      if (t.height() >= 1) {
        auto full = contract(t, 1, t.height());
        REQUIRE(full.has_value());
        CHECK(full->height() == 0);
        CHECK(full->labels == t.labels);
      }
      for (int i = 1; i <= t.height(); ++i) {
        auto c = contract(t, i, i);
        REQUIRE(c.has_value());
        CHECK(validate_leveled(*c).ok());
      }
    }
  }
}

TEST_CASE("alpha and beta") {
  SUBCASE("corolla maps to corolla both ways") {
    auto c = LeveledTree::corolla(3);
    CHECK(alpha(c) == PlanarTree::corolla(3));
    CHECK(beta(PlanarTree::corolla(3)) == c);
  }
  SUBCASE("alpha of beta is the identity on labeled planar trees") {
    for (int n = 2; n <= 4; ++n) {
      for (const auto& p : enumerate_planar_labeled(n)) {
        auto lt = beta(p);
        CHECK(validate_leveled(lt).ok());
        // one arity->=2 vertex per level
        for (int lvl = 0; lvl <= lt.height(); ++lvl) {
          int big = 0;
          for (int q = 0; q < lt.level_size(lvl); ++q)
            if (lt.arity(lvl, q) >= 2) ++big;
          CHECK(big == 1);
        }
        CHECK(alpha(lt) == p);
      }
    }
  }
  SUBCASE("alpha is constant on classes and counts 18 classes at n = 3") {
    std::set<PlanarTree> classes;
    for (const auto& t : enumerate_leveled(3)) classes.insert(canonical_class(t));
    CHECK(classes.size() == 18);
  }
}

TEST_CASE("partial composition: height and arity identities") {
  for (const auto& t0 : enumerate_leveled(2)) {
    for (const auto& t1 : enumerate_leveled(3)) {
      for (int label = 1; label <= 2; ++label) {
        auto c = circ(t0, label, t1);
        CHECK(validate_leveled(c).ok());
        CHECK(c.height() == t0.height() + t1.height() + 1);
        CHECK(c.leaf_count() == t0.leaf_count() + t1.leaf_count() - 1);
      }
    }
  }
}

TEST_CASE("total composition gamma") {
  auto c2 = LeveledTree::corolla(2);
  auto g = gamma(c2, std::vector<LeveledTree>{c2, c2});
  CHECK(validate_leveled(g).ok());
  CHECK(g.height() == 2);  // h = 0+0+0+2
  int big = 0;
  for (int lvl = 0; lvl <= g.height(); ++lvl)
    for (int q = 0; q < g.level_size(lvl); ++q)
      if (g.arity(lvl, q) >= 2) ++big;
  CHECK(big == 3);

  SUBCASE("gamma agrees with iterated circ") {
    auto direct = circ(circ(c2, 1, c2), 3, c2);
    CHECK(g == direct);
  }

  SUBCASE("associativity holds at the level of canonical classes") {
    // gamma(gamma(t0; a, b); units, c-based pattern) vs gamma(t0; gamma-parts)
    auto lhs_inner = gamma(c2, std::vector<LeveledTree>{c2, c2});  // arity 4
    std::vector<std::optional<LeveledTree>> units4(4);
    units4[1] = c2;
    auto lhs = gamma(lhs_inner, units4);  // graft c2 at leaf 2
    std::vector<std::optional<LeveledTree>> inner_parts(2);
    inner_parts[0] = gamma(c2, std::vector<std::optional<LeveledTree>>{std::nullopt, c2});
    inner_parts[1] = c2;
    auto rhs = gamma(c2, inner_parts);
    CHECK(lhs != rhs);  // literal trees differ...
    CHECK(canonical_class(lhs) == canonical_class(rhs));  // ...but the classes agree
  }
}

TEST_CASE("gamma_right carries the section and stacks heights") {
  for (const auto& s : enumerate_sectioned(2)) {
    std::vector<std::optional<LeveledTree>> parts = {LeveledTree::corolla(2),
                                                     LeveledTree::corolla(2)};
    auto r = gamma_right(s, parts);
    CHECK(validate_sectioned(r).ok());
    CHECK(r.section == s.section);
    CHECK(r.tree.height() == s.tree.height() + 2);  // two corolla grafts
  }
}

TEST_CASE("gamma_left with trivial parts grafts marked stubs onto the leaves") {
  // parts: 1-leaf sectioned corollas (section at the root)
  SectionedTree unit_part;
  unit_part.tree.labels = {1};
  unit_part.tree.maps = {{0}};
  unit_part.section = 0;
  REQUIRE(validate_sectioned(unit_part).ok());

  auto c2 = LeveledTree::corolla(2);
  auto res = gamma_left(c2, {unit_part, unit_part});
  CHECK(validate_sectioned(res).ok());
  CHECK(res.section == 1);  // h(T0) + sum iota + 1
  CHECK(res.tree.leaf_count() == 2);

  auto cls = canonical_class(res);
  // root vertex with two marked bivalent stubs
  REQUIRE(cls.nodes.size() == 3);
  CHECK(!cls.marked(0));
  CHECK(cls.marked(1));
  CHECK(cls.marked(2));
}

TEST_CASE("gamma_left general shape and section formula") {
  for (const auto& s : enumerate_sectioned(2)) {
    auto c2 = LeveledTree::corolla(2);
    auto res = gamma_left(c2, {s, s});
    CHECK(validate_sectioned(res).ok());
    CHECK(res.section == c2.height() + 2 * s.section + 1);
    CHECK(res.tree.leaf_count() == 4);
    CHECK(marks_are_section(canonical_class(res)));
  }
}

TEST_CASE("splittings") {
  SUBCASE("the corolla is indecomposable") {
    auto c = PlanarTree::corolla(4);
    CHECK(!split_gamma(c, {2, 2}).has_value());
    CHECK(!split_gamma(c, {3, 1}).has_value());
    CHECK(split_gamma(c, {1, 1, 1, 1}).has_value());  // all-unit split
  }
  SUBCASE("two-level binary tree with partition (2,1): exactly one splitting") {
    // m(m(1,2),3)
    auto trees = enumerate_shuffle_trees(3);
    PlanarTree target;
    for (const auto& t : trees)
      if (t.nodes.size() == 2 && t.leaves_under(1) == std::vector<int>{1, 2}) target = t;
    REQUIRE(target.leaf_count == 3);
    auto s = split_gamma(target, {2, 1});
    REQUIRE(s.has_value());
    CHECK(s->outer == PlanarTree::corolla(2));
    CHECK(s->parts[0] == PlanarTree::corolla(2));
    CHECK(s->parts[1].is_bare_leaf());
    CHECK(!split_gamma(target, {1, 2}).has_value());
  }
  SUBCASE("every splitting recomposes to the original class") {
    for (const auto& t : enumerate_shuffle_trees(4)) {
      std::vector<std::vector<int>> partitions = {{2, 2}, {3, 1}, {1, 3}, {2, 1, 1},
                                                  {1, 2, 1}, {1, 1, 2}};
      for (const auto& part : partitions) {
        auto s = split_gamma(t, part);
        if (!s) continue;
        auto g = graft_gamma(s->outer, s->parts);
        CHECK(g.tree == t);
      }
    }
  }
}

TEST_CASE("marked splittings invert gamma_left / gamma_right at class level") {
  SectionedTree stub;
  stub.tree.labels = {1};
  stub.tree.maps = {{0}};
  stub.section = 0;

  auto c2 = LeveledTree::corolla(2);
  auto left = gamma_left(c2, {stub, stub});
  auto cls = canonical_class(left);
  auto sl = split_gamma_left(cls, {1, 1});
  REQUIRE(sl.has_value());
  CHECK(sl->outer == PlanarTree::corolla(2));
  for (const auto& p : sl->parts) {
    CHECK(p.nodes.size() == 1);
    CHECK(p.marked(0));
  }

  SectionedTree s2;  // marked corolla with 2 leaves
  s2.tree = LeveledTree::corolla(2);
  s2.section = 0;
  auto right = gamma_right(s2, {LeveledTree::corolla(2), LeveledTree::corolla(2)});
  auto rcls = canonical_class(right);
  auto sr = split_gamma_right(rcls, {2, 2});
  REQUIRE(sr.has_value());
  CHECK(sr->outer.marked(0));
  CHECK(sr->parts[0] == PlanarTree::corolla(2));
  CHECK(sr->parts[1] == PlanarTree::corolla(2));
}

TEST_CASE("serialization round trips") {
  for (const auto& t : enumerate_leveled(3)) {
    CHECK(leveled_from_text(to_text(t)) == t);
    CHECK(leveled_from_json(to_json(t)) == t);
  }
  for (const auto& t : enumerate_sectioned(2)) {
    CHECK(sectioned_from_text(to_text(t)) == t);
    CHECK(sectioned_from_json(to_json(t)) == t);
  }
}

TEST_CASE("morphism steps apply") {
  auto c3 = LeveledTree::corolla(3);
  TreeMorphismStep iso{TreeMorphismStep::Iso{{2, 3, 1}}};
  auto relabeled = apply_step(c3, iso);
  CHECK(relabeled.labels == std::vector<int>{2, 3, 1});
}
