#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "operadkit/constructions.hpp"
#include "operadkit/presentation.hpp"

namespace operadkit {

namespace {

void partitions_ge2(int n, const std::function<void(const std::vector<int>&)>& emit) {
  std::vector<int> acc;
  std::function<void(int)> rec = [&](int rest) {
    if (rest == 0) {
      if (acc.size() >= 2) emit(acc);
      return;
    }
    for (int part = 1; part <= rest; ++part) {
      acc.push_back(part);
      rec(rest - part);
      acc.pop_back();
    }
  };
  rec(n);
}

Presentation make_com(int bound) {
  Presentation p;
  p.name = "com";
  p.kind = PresKind::Operad;
  p.arity_bound = bound;
  p.basis.resize(bound + 1);
  p.sym.resize(bound + 1);
  p.diff.resize(bound + 1);
  for (int n = 1; n <= bound; ++n) {
    p.basis[n].push_back({"e", 0});
    p.diff[n].push_back({});
    for (int j = 1; j < n; ++j) p.sym[n].push_back({lincomb_single(0)});
  }
  for (int n = 2; n <= bound; ++n) {
    partitions_ge2(n, [&](const std::vector<int>& parts) {
      GammaEntry e;
      e.inputs.assign(parts.size() + 1, 0);
      e.output = 0;
      e.coeff = Rat(1);
      p.gamma[parts] = {e};
    });
  }
  // restriction operators h[i]^* are all identities
  for (int n = 1; n + 1 <= bound; ++n)
    for (int i = 1; i <= n + 1; ++i) p.lambda.hmat[{n, i}] = {lincomb_single(0)};
  return p;
}

// permutations of [n] in lexicographic one-line order
std::vector<std::vector<int>> all_perms(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 1);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

int perm_index(const std::vector<std::vector<int>>& perms, const std::vector<int>& p) {
  auto it = std::lower_bound(perms.begin(), perms.end(), p);
  if (it == perms.end() || *it != p) throw std::logic_error("permutation not found");
  return static_cast<int>(it - perms.begin());
}

std::string perm_name(const std::vector<int>& p) {
  std::string s = "e";
  for (int v : p) s += std::to_string(v);
  return s;
}

// block substitution of permutations: the composite word reads, for each
// output slot s of pi0, the block pi0(s) permuted internally by that block's
// permutation.
std::vector<int> perm_substitute(const std::vector<int>& pi0,
                                 const std::vector<std::vector<int>>& parts) {
  const int k = static_cast<int>(pi0.size());
  std::vector<int> offset(k + 1, 0);
  for (int i = 0; i < k; ++i) offset[i + 1] = offset[i] + static_cast<int>(parts[i].size());
  std::vector<int> out;
  for (int s = 0; s < k; ++s) {
    int block = pi0[s] - 1;
    for (int v : parts[block]) out.push_back(offset[block] + v);
  }
  return out;
}

Presentation make_ass(int bound) {
  Presentation p;
  p.name = "ass";
  p.kind = PresKind::Operad;
  p.arity_bound = bound;
  p.basis.resize(bound + 1);
  p.sym.resize(bound + 1);
  p.diff.resize(bound + 1);
  std::vector<std::vector<std::vector<int>>> perms(bound + 1);
  for (int n = 1; n <= bound; ++n) {
    perms[n] = all_perms(n);
    for (const auto& pi : perms[n]) p.basis[n].push_back({perm_name(pi), 0});
    p.diff[n].assign(p.dim(n), {});
    for (int j = 1; j < n; ++j) {
      auto sj = perm_identity(n);
      std::swap(sj[j - 1], sj[j]);
      std::vector<LinComb> mat(p.dim(n));
      for (int b = 0; b < p.dim(n); ++b) {
        // right action e_pi . sigma = e_{sigma^{-1} o pi}
        auto img = perm_compose(perm_inverse(sj), perms[n][b]);
        mat[b] = lincomb_single(perm_index(perms[n], img));
      }
      p.sym[n].push_back(std::move(mat));
    }
  }
  for (int n = 2; n <= bound; ++n) {
    partitions_ge2(n, [&](const std::vector<int>& parts) {
      const int k = static_cast<int>(parts.size());
      std::vector<GammaEntry> entries;
      std::vector<int> tup(k + 1, 0);
      std::function<void(int)> rec = [&](int pos) {
        if (pos == k + 1) {
          std::vector<std::vector<int>> blocks(k);
          for (int i = 0; i < k; ++i) blocks[i] = perms[parts[i]][tup[i + 1]];
          auto composite = perm_substitute(perms[k][tup[0]], blocks);
          GammaEntry e;
          e.inputs = tup;
          e.output = perm_index(perms[n], composite);
          e.coeff = Rat(1);
          entries.push_back(std::move(e));
          return;
        }
        int d = pos == 0 ? p.dim(k) : p.dim(parts[pos - 1]);
        for (int v = 0; v < d; ++v) {
          tup[pos] = v;
          rec(pos + 1);
        }
      };
      rec(0);
      p.gamma[parts] = std::move(entries);
    });
  }
  return p;
}

Presentation make_quasifree(int bound) {
  // free operad on a binary product m and a degree -1 binary h with d h = m
  std::vector<FreeGenerator> gens(2);
  gens[0] = {"m", 2, 0, {}};
  gens[1] = {"h", 2, -1, {{0, Rat(1)}}};
  return free_operad_presentation("quasifree_sample", gens, bound);
}

}  // namespace

Presentation as_bimodule(const Presentation& operad) {
  if (operad.kind != PresKind::Operad)
    throw std::invalid_argument("as_bimodule expects an operad");
  Presentation m = operad;
  m.name = operad.name + "_bimod";
  m.kind = PresKind::Bimodule;
  m.gamma_left = operad.gamma;
  m.gamma_right = operad.gamma;
  m.gamma.clear();
  // one-part actions gamma_L(1_P; x) = x and gamma_R(x'; q) for x' the arity-1
  // unit: both reduce to the operad unit axioms
  for (int n = 1; n <= operad.arity_bound; ++n) {
    std::vector<GammaEntry> left_entries, right_entries;
    for (int i = 0; i < operad.dim(n); ++i) {
      left_entries.push_back({{0, i}, i, Rat(1)});
      right_entries.push_back({{0, i}, i, Rat(1)});
    }
    m.gamma_left[{n}] = left_entries;
    m.gamma_right[{n}] = right_entries;
  }
  m.left = std::make_shared<Presentation>(operad);
  m.right = std::make_shared<Presentation>(operad);
  m.lambda = {};
  return m;
}

Presentation as_cobimodule(const Presentation& cooperad) {
  if (cooperad.kind != PresKind::Cooperad)
    throw std::invalid_argument("as_cobimodule expects a cooperad");
  Presentation m = cooperad;
  m.name = cooperad.name + "_cobimod";
  m.kind = PresKind::Cobimodule;
  m.gamma_left = cooperad.gamma;
  m.gamma_right = cooperad.gamma;
  m.gamma.clear();
  for (int n = 1; n <= cooperad.arity_bound; ++n) {
    std::vector<GammaEntry> left_entries, right_entries;
    for (int i = 0; i < cooperad.dim(n); ++i) {
      left_entries.push_back({{0, i}, i, Rat(1)});
      right_entries.push_back({{0, i}, i, Rat(1)});
    }
    m.gamma_left[{n}] = left_entries;
    m.gamma_right[{n}] = right_entries;
  }
  m.left = std::make_shared<Presentation>(cooperad);
  m.right = std::make_shared<Presentation>(cooperad);
  m.lambda = {};
  return m;
}

Presentation builtin(const std::string& name, int arity_bound) {
  if (arity_bound < 1) throw std::invalid_argument("arity bound must be >= 1");
  if (name == "com") return make_com(arity_bound);
  if (name == "com_cooperad") {
    Presentation c = dualize(make_com(arity_bound));
    c.name = "com_cooperad";
    return c;
  }
  if (name == "ass") return make_ass(arity_bound);
  if (name == "ass_cooperad") {
    Presentation c = dualize(make_ass(arity_bound));
    c.name = "ass_cooperad";
    return c;
  }
  if (name == "quasifree_sample") return make_quasifree(arity_bound);
  if (name == "quasifree_sample_cooperad") {
    Presentation c = dualize(make_quasifree(arity_bound));
    c.name = "quasifree_sample_cooperad";
    return c;
  }
  throw std::invalid_argument("unknown builtin: " + name);
}

}  // namespace operadkit
