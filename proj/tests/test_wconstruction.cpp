#include <memory>

#include "doctest.h"
#include "operadkit/wconstruction.hpp"

using namespace operadkit;

namespace {

std::shared_ptr<const Presentation> shared(const Presentation& p) {
  return std::make_shared<Presentation>(p);
}

WContext com_ctx(int bound = 4) { return WContext::cooperad(shared(builtin("com_cooperad", bound)), bound); }
WContext ass_ctx(int bound = 3) { return WContext::cooperad(shared(builtin("ass_cooperad", bound)), bound); }

WContext com_bimod_ctx(int bound = 3) {
  auto c = builtin("com_cooperad", bound);
  return WContext::cobimodule(shared(c), shared(as_cobimodule(c)), shared(c), bound);
}

void expect_pass(const Report& r) {
  for (const auto& c : r.checks) {
    INFO(c.name, " ", c.witness);
    CHECK(c.passed);
  }
}

}  // namespace

TEST_CASE("polyform CDGA laws on a monomial sample") {
  std::vector<PolyForm> sample;
  for (int a = 0; a <= 4; ++a) {
    sample.push_back(PolyForm::monomial(a, false));
    sample.push_back(PolyForm::monomial(a, true));
  }
  for (const auto& f : sample)
    for (const auto& g : sample) {
      // graded commutativity (dt dt = 0 makes both sides vanish in odd-odd)
      CHECK(f * g == ((f.degree() == 1 && g.degree() == 1) ? PolyForm::zero() : g * f));
      for (const auto& h : sample) CHECK((f * g) * h == f * (g * h));
      // Leibniz
      PolyForm lhs = (f * g).d();
      PolyForm rhs = f.d() * g + (f.degree() == 1 ? Rat(-1) : Rat(1)) * (f * g.d());
      CHECK(lhs == rhs);
    }
  for (const auto& f : sample) CHECK(f.d().d() == PolyForm::zero());
  CHECK(PolyForm::t().d() == PolyForm::dt());
}

TEST_CASE("mstar: coproduct values, counit, coabsorbing") {
  // m*(t) = t(x)1 + 1(x)t - t(x)t
  auto mt = PolyForm::mstar(PolyForm::t());
  CHECK(mt.size() == 3);
  std::vector<PolyForm> sample = {PolyForm::one(), PolyForm::t(),
                                  PolyForm::monomial(2, false), PolyForm::dt(),
                                  PolyForm::monomial(1, true)};
  for (const auto& f : sample) {
    // counit: (id (x) ev0) m* = id
    PolyForm counit;
    PolyForm coabs;
    for (const auto& [pair, c] : PolyForm::mstar(f)) {
      counit = counit + (c * pair.second.ev0()) * pair.first;
      coabs = coabs + (c * pair.second.ev1()) * pair.first;
    }
    CHECK(counit == f);
    // coabsorbing: (id (x) ev1) m*(f) = ev1(f) * 1
    CHECK(coabs == f.ev1() * PolyForm::one());
    // chain map: m*(df) = (d (x) 1 + 1 (x) d) m*(f); accumulate over monomials
    std::map<std::tuple<int, bool, int, bool>, Rat> lhs, rhs;
    auto expand = [](std::map<std::tuple<int, bool, int, bool>, Rat>& acc, const PolyForm& a,
                     const PolyForm& b, const Rat& c) {
      auto each = [](const PolyForm& f2, auto&& fn) {
        for (size_t k = 0; k < f2.p().size(); ++k)
          if (!f2.p()[k].is_zero()) fn(static_cast<int>(k), false, f2.p()[k]);
        for (size_t k = 0; k < f2.q().size(); ++k)
          if (!f2.q()[k].is_zero()) fn(static_cast<int>(k), true, f2.q()[k]);
      };
      each(a, [&](int ka, bool da, const Rat& ca) {
        each(b, [&](int kb, bool db, const Rat& cb) { acc[{ka, da, kb, db}] += c * ca * cb; });
      });
    };
    for (const auto& [pair, c] : PolyForm::mstar(f.d())) expand(lhs, pair.first, pair.second, c);
    for (const auto& [pair, c] : PolyForm::mstar(f)) {
      if (!pair.first.d().is_zero()) expand(rhs, pair.first.d(), pair.second, c);
      Rat sgn = pair.first.degree() == 1 ? Rat(-1) : Rat(1);
      if (!pair.second.d().is_zero()) expand(rhs, pair.first, pair.second.d(), c * sgn);
    }
    for (auto it = lhs.begin(); it != lhs.end();)
      it = it->second.is_zero() ? lhs.erase(it) : std::next(it);
    for (auto it = rhs.begin(); it != rhs.end();)
      it = it->second.is_zero() ? rhs.erase(it) : std::next(it);
    CHECK(lhs == rhs);
  }
  // prim projection
  CHECK(PolyForm::one().prim_projection() == PolyForm::one() - PolyForm::t());
  CHECK(PolyForm::t().prim_projection() == PolyForm::zero());
  CHECK(PolyForm::dt().prim_projection() == PolyForm::dt());
}

TEST_CASE("W tree families and the index set matches the tree enumeration") {
  auto ctx = com_ctx(4);
  for (int n = 2; n <= 4; ++n) {
    auto fam = WFamily::get(ctx, n);
    CHECK(fam->trees().size() == enumerate_leveled(n).size());
    // orbits partition the family
    int covered = 0;
    for (int id = 0; id < static_cast<int>(fam->trees().size()); ++id) {
      CHECK(fam->rep_index(id) >= 0);
      ++covered;
    }
    CHECK(covered == static_cast<int>(fam->trees().size()));
  }
  auto bctx = com_bimod_ctx(3);
  for (int n = 1; n <= 3; ++n) {
    auto fam = WFamily::get(bctx, n);
    CHECK(fam->trees().size() == enumerate_sectioned(n).size());
  }
}

TEST_CASE("eta images pass the end relations") {
  SUBCASE("com cooperad, arities up to 4") {
    auto ctx = com_ctx(4);
    for (int n = 2; n <= 4; ++n) {
      WElement w = eta(ctx, n, 0);
      expect_pass(end_check(w));
    }
  }
  SUBCASE("ass cooperad at n = 3: nontrivial coactions") {
    auto ctx = ass_ctx(3);
    for (int b = 0; b < 6; ++b) {
      WElement w = eta(ctx, 3, b);
      expect_pass(end_check(w));
    }
  }
  SUBCASE("com as a cobimodule over itself, n <= 3") {
    auto ctx = com_bimod_ctx(3);
    for (int n = 1; n <= 3; ++n) {
      WElement w = eta(ctx, n, 0);
      expect_pass(end_check(w));
    }
  }
}

TEST_CASE("a perturbed level decoration fails the end relations") {
  auto ctx = com_ctx(3);
  WElement w = eta(ctx, 3, 0);
  // multiply one level form by t on a single representative with h >= 1
  for (size_t r = 0; r < w.rep_values.size(); ++r) {
    const WTree& t = w.family->trees()[w.family->reps()[r]];
    if (t.chain.height() < 1) continue;
    WDec perturbed;
    for (const auto& [k, c] : w.rep_values[r]) {
      WKey nk = k;
      nk.forms[0] = WMono{nk.forms[0].tpow + 1, nk.forms[0].dt};
      perturbed.emplace(nk, c);
    }
    w.rep_values[r] = perturbed;
    break;
  }
  Report rep = end_check(w);
  CHECK(!rep.passed());
  bool contraction_witness = false;
  for (const auto& c : rep.checks)
    if (!c.passed && c.name.find("contraction") != std::string::npos && !c.witness.empty())
      contraction_witness = true;
  CHECK(contraction_witness);
}

TEST_CASE("the differential squares to zero on eta images and their projections") {
  auto ctx = com_ctx(3);
  for (int n = 2; n <= 3; ++n) {
    WElement w = eta(ctx, n, 0);
    WElement dd = w_differential(w_differential(w));
    CHECK(dd.is_zero());
    WElement p = prim_project(w);
    CHECK(w_differential(w_differential(p)).is_zero());
  }
}

TEST_CASE("costructure of eta intertwines the cooperad structure") {
  auto ctx = com_ctx(4);
  for (int n = 2; n <= 3; ++n) {
    WElement w = eta(ctx, n, 0);
    // all 2-part patterns with real or unit slots
    for (int first = 1; first < n; ++first) {
      int second = n - first;
      auto fam_k = WFamily::get(ctx, 2);
      for (const auto& head : fam_k->trees()) {
        std::vector<std::optional<WTree>> parts(2);
        std::vector<std::shared_ptr<const WFamily>> pf(2);
        auto run = [&](const std::optional<WTree>& p1, const std::optional<WTree>& p2) {
          parts[0] = p1;
          parts[1] = p2;
          auto comp = w_costructure(w, head, parts, Side::Operadic);
          // eta of com: every coefficient is 1 on every tuple
          for (const auto& [tuple, c] : comp) {
            (void)tuple;
            CHECK(c == Rat(1));
          }
          CHECK(!comp.empty());
        };
        if (first >= 2 && second >= 2) {
          for (const auto& p1 : WFamily::get(ctx, first)->trees())
            for (const auto& p2 : WFamily::get(ctx, second)->trees()) run(p1, p2);
        } else if (first == 1 && second >= 2) {
          for (const auto& p2 : WFamily::get(ctx, second)->trees()) run(std::nullopt, p2);
        } else if (first >= 2 && second == 1) {
          for (const auto& p1 : WFamily::get(ctx, first)->trees()) run(p1, std::nullopt);
        }
      }
    }
  }
}

TEST_CASE("prim projection: checks and idempotence") {
  auto ctx = com_ctx(3);
  for (int n = 2; n <= 3; ++n) {
    WElement w = eta(ctx, n, 0);
    if (n >= 3) CHECK(!prim_check(w));
    WElement p = prim_project(w);
    CHECK(prim_check(p));
    CHECK(prim_project(p) == p);
    // ev0 preserved: contract everything to the corolla and compare? the
    // slotwise statement: ev0 of every level form is unchanged; verified on
    // the representative decorations directly
    for (size_t r = 0; r < w.rep_values.size(); ++r) {
      std::map<std::vector<int>, Rat> before, after;
      for (const auto& [k, c] : w.rep_values[r]) {
        bool all_even = true;
        Rat scale(1);
        for (const auto& f : k.forms) {
          if (f.dt || f.tpow != 0) scale = Rat(0);
        }
        if (all_even) before[k.dec] += c * scale;
      }
      for (const auto& [k, c] : p.rep_values[r]) {
        Rat scale(1);
        for (const auto& f : k.forms)
          if (f.dt || f.tpow != 0) scale = Rat(0);
        after[k.dec] += c * scale;
      }
      for (auto it = before.begin(); it != before.end();)
        it = it->second.is_zero() ? before.erase(it) : std::next(it);
      for (auto it = after.begin(); it != after.end();)
        it = it->second.is_zero() ? after.erase(it) : std::next(it);
      CHECK(before == after);
    }
  }
}

TEST_CASE("primitive composition: corolla supports and vanishing") {
  auto ctx = com_ctx(4);
  WElement p2 = prim_project(eta(ctx, 2, 0));
  std::vector<std::optional<WElement>> parts = {p2, std::nullopt};
  WElement comp = prim_compose(p2, parts, Side::Operadic);
  CHECK(!comp.is_zero());
  // support: exactly the grafted class gamma(c2; c2, 1)
  for (size_t r = 0; r < comp.rep_values.size(); ++r) {
    const WTree& t = comp.family->trees()[comp.family->reps()[r]];
    auto cls = canonical_class(t.chain);
    // the support is every labeled tree decomposable along the partition
    bool should_live = split_gamma(cls, {2, 1}).has_value();
    CHECK(comp.rep_values[r].empty() == !should_live);
  }
}
