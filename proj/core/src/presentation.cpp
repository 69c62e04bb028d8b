#include "operadkit/presentation.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace operadkit {

LinComb lincomb_single(int index, Rat coeff) {
  if (coeff.is_zero()) return {};
  return {{index, coeff}};
}

LinComb lincomb_add(const LinComb& a, const LinComb& b) {
  LinComb out;
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      Rat c = a[i].second + b[j].second;
      if (!c.is_zero()) out.push_back({a[i].first, c});
      ++i;
      ++j;
    }
  }
  return out;
}

LinComb lincomb_scale(const LinComb& a, const Rat& c) {
  if (c.is_zero()) return {};
  LinComb out;
  out.reserve(a.size());
  for (const auto& [i, v] : a) out.push_back({i, v * c});
  return out;
}

bool lincomb_equal(const LinComb& a, const LinComb& b) { return a == b; }

// ---- permutations ----

std::vector<int> perm_identity(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i + 1;
  return p;
}

std::vector<int> perm_compose(const std::vector<int>& s, const std::vector<int>& t) {
  std::vector<int> out(t.size());
  for (size_t i = 0; i < t.size(); ++i) out[i] = s.at(t[i] - 1);
  return out;
}

std::vector<int> perm_inverse(const std::vector<int>& s) {
  std::vector<int> out(s.size());
  for (size_t i = 0; i < s.size(); ++i) out[s[i] - 1] = static_cast<int>(i) + 1;
  return out;
}

std::vector<int> adjacent_word(const std::vector<int>& sigma) {
  // bubble-sort the one-line form to the identity; swapping positions j, j+1
  // postcomposes with s_j, so sigma = s_{w_r} o ... o s_{w_1} reversed.
  std::vector<int> arr = sigma;
  std::vector<int> swaps;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t j = 0; j + 1 < arr.size(); ++j) {
      if (arr[j] > arr[j + 1]) {
        std::swap(arr[j], arr[j + 1]);
        swaps.push_back(static_cast<int>(j) + 1);
        changed = true;
      }
    }
  }
  std::reverse(swaps.begin(), swaps.end());
  return swaps;
}

std::vector<int> block_permutation(const std::vector<int>& sigma, const std::vector<int>& sizes) {
  // u(t) = original position of the t-th entry of the blocks concatenated in
  // sigma^{-1} order; returns u^{-1}.
  const int k = static_cast<int>(sizes.size());
  std::vector<int> offset(k + 1, 0);
  for (int i = 0; i < k; ++i) offset[i + 1] = offset[i] + sizes[i];
  auto inv = perm_inverse(sigma);
  std::vector<int> u;
  u.reserve(offset[k]);
  for (int s = 0; s < k; ++s) {
    int b = inv[s] - 1;
    for (int t = 1; t <= sizes[b]; ++t) u.push_back(offset[b] + t);
  }
  return perm_inverse(u);
}

// ---- basic evaluators ----

LinComb act(const Presentation& p, int n, const LinComb& x, const std::vector<int>& sigma) {
  if (static_cast<int>(sigma.size()) != n) throw std::invalid_argument("act: arity mismatch");
  LinComb cur = x;
  for (int j : adjacent_word(sigma)) {
    const auto& mat = p.sym.at(n).at(j - 1);
    LinComb next;
    for (const auto& [i, c] : cur) next = lincomb_add(next, lincomb_scale(mat.at(i), c));
    cur = std::move(next);
  }
  return cur;
}

LinComb apply_diff(const Presentation& p, int n, const LinComb& x) {
  LinComb out;
  const auto& mat = p.diff.at(n);
  for (const auto& [i, c] : x) out = lincomb_add(out, lincomb_scale(mat.at(i), c));
  return out;
}

namespace {

LinComb table_eval(const GammaTable& table, const std::vector<int>& partition,
                   const std::vector<LinComb>& inputs) {
  const int k = static_cast<int>(partition.size());
  if (static_cast<int>(inputs.size()) != k + 1)
    throw std::invalid_argument("gamma evaluation: input count mismatch");
  auto it = table.find(partition);
  if (it == table.end())
    throw std::out_of_range("gamma table has no entry for this partition");
  LinComb out;
  for (const auto& entry : it->second) {
    Rat c = entry.coeff;
    for (int s = 0; s <= k && !c.is_zero(); ++s) {
      Rat found;
      for (const auto& [i, v] : inputs[s])
        if (i == entry.inputs[s]) {
          found = v;
          break;
        }
      c *= found;
    }
    if (!c.is_zero()) out = lincomb_add(out, lincomb_single(entry.output, c));
  }
  return out;
}

}  // namespace

LinComb gamma_eval(const Presentation& p, const std::vector<int>& partition,
                   const std::vector<LinComb>& inputs) {
  if (partition.size() == 1 && !p.gamma.count(partition)) {
    // unit action of the arity-1 slot
    Rat c;
    for (const auto& [i, v] : inputs[0])
      if (i == 0) c = v;
    return lincomb_scale(inputs[1], c);
  }
  return table_eval(p.gamma, partition, inputs);
}

LinComb gamma_eval_left(const Presentation& p, const std::vector<int>& partition,
                        const std::vector<LinComb>& inputs) {
  return table_eval(p.gamma_left, partition, inputs);
}

LinComb gamma_eval_right(const Presentation& p, const std::vector<int>& partition,
                         const std::vector<LinComb>& inputs) {
  if (partition.size() == 1 && !p.gamma_right.count(partition)) {
    Rat c;
    for (const auto& [i, v] : inputs[0])
      if (i == 0) c = v;
    return lincomb_scale(inputs[1], c);
  }
  return table_eval(p.gamma_right, partition, inputs);
}

std::vector<GammaEntry> coop_components(const GammaTable& table, const std::vector<int>& partition,
                                        int j) {
  auto it = table.find(partition);
  if (it == table.end())
    throw std::out_of_range("cooperad table has no entry for this partition");
  std::vector<GammaEntry> out;
  for (const auto& e : it->second)
    if (e.output == j) out.push_back(e);
  return out;
}

LinComb lambda_apply(const Presentation& p, int n, int i, const LinComb& x) {
  auto it = p.lambda.hmat.find({n, i});
  if (it == p.lambda.hmat.end()) throw std::out_of_range("missing lambda generator matrix");
  LinComb out;
  for (const auto& [b, c] : x) out = lincomb_add(out, lincomb_scale(it->second.at(b), c));
  return out;
}

LinComb lambda_eps(const Presentation& p, int n) {
  if (!p.is_co()) throw std::invalid_argument("eps is a cooperad-side map");
  LinComb cur = lincomb_single(0);  // unit of the arity-1 slice
  for (int m = 1; m < n; ++m) cur = lambda_apply(p, m, 1, cur);
  return cur;
}

// ---- dualization ----

Presentation dualize(const Presentation& p) {
  Presentation d;
  switch (p.kind) {
    case PresKind::Operad: d.kind = PresKind::Cooperad; break;
    case PresKind::Cooperad: d.kind = PresKind::Operad; break;
    case PresKind::Bimodule: d.kind = PresKind::Cobimodule; break;
    case PresKind::Cobimodule: d.kind = PresKind::Bimodule; break;
  }
  d.name = p.name + "_dual";
  d.arity_bound = p.arity_bound;
  d.basis.resize(p.basis.size());
  for (size_t n = 1; n < p.basis.size(); ++n) {
    for (const auto& b : p.basis[n]) d.basis[n].push_back({b.name + "*", -b.degree});
  }
  // transpose the adjacent action matrices
  d.sym.resize(p.sym.size());
  for (size_t n = 1; n < p.sym.size(); ++n) {
    d.sym[n].resize(p.sym[n].size());
    for (size_t j = 0; j < p.sym[n].size(); ++j) {
      const auto& m = p.sym[n][j];
      std::vector<LinComb> t(m.size());
      for (size_t col = 0; col < m.size(); ++col)
        for (const auto& [row, c] : m[col]) t[row] = lincomb_add(t[row], lincomb_single(col, c));
      d.sym[n][j] = std::move(t);
    }
  }
  // transpose d with the dual-complex sign
  d.diff.resize(p.diff.size());
  for (size_t n = 1; n < p.diff.size(); ++n) {
    const auto& m = p.diff[n];
    std::vector<LinComb> t(m.size());
    for (size_t col = 0; col < m.size(); ++col) {
      for (const auto& [row, c] : m[col]) {
        // <d xi, e_col> = -(-1)^{|xi|} <xi, d e_col> with xi = e_row^*
        int deg_dual = -p.basis[n][row].degree;
        Rat sign((deg_dual % 2 == 0) ? -1 : 1);
        t[row] = lincomb_add(t[row], lincomb_single(col, c * sign));
      }
    }
    d.diff[n] = std::move(t);
  }
  // tables transpose with the Koszul pairing sign of the input tensor factors
  auto twist_table = [&](const GammaTable& table, const Presentation* head,
                         const Presentation* part) {
    GammaTable out;
    for (const auto& [partition, entries] : table) {
      const int k = static_cast<int>(partition.size());
      auto& oe = out[partition];
      for (const auto& e : entries) {
        std::vector<int> degs;
        degs.push_back(head->degree_of(k, e.inputs[0]));
        for (int s2 = 0; s2 < k; ++s2)
          degs.push_back(part->degree_of(partition[s2], e.inputs[s2 + 1]));
        int cross = 0;
        for (size_t i = 0; i < degs.size(); ++i)
          for (size_t j = i + 1; j < degs.size(); ++j)
            if ((degs[i] % 2) && (degs[j] % 2)) cross ^= 1;
        GammaEntry ne = e;
        if (cross) ne.coeff = -ne.coeff;
        oe.push_back(std::move(ne));
      }
    }
    return out;
  };
  if (!p.gamma.empty()) d.gamma = twist_table(p.gamma, &p, &p);
  if (!p.gamma_left.empty()) d.gamma_left = twist_table(p.gamma_left, p.left.get(), &p);
  if (!p.gamma_right.empty()) d.gamma_right = twist_table(p.gamma_right, &p, p.right.get());
  d.gamma_degree_shift = -p.gamma_degree_shift;
  d.leibniz_parity_offset = p.leibniz_parity_offset;
  // transpose the lambda generators
  for (const auto& [key, m] : p.lambda.hmat) {
    int in_dim, out_dim;
    auto [n, i] = key;
    if (p.is_co()) {
      in_dim = p.dim(n);
      out_dim = p.dim(n + 1);
    } else {
      in_dim = p.dim(n + 1);
      out_dim = p.dim(n);
    }
    (void)in_dim;
    std::vector<LinComb> t(out_dim);
    for (size_t col = 0; col < m.size(); ++col)
      for (const auto& [row, c] : m[col]) t[row] = lincomb_add(t[row], lincomb_single(col, c));
    d.lambda.hmat[key] = std::move(t);
  }
  if (p.left) d.left = std::make_shared<Presentation>(dualize(*p.left));
  if (p.right) d.right = std::make_shared<Presentation>(dualize(*p.right));
  return d;
}

// ---- axiom verification ----

namespace {

Rat koszul_reorder_sign_int(const std::vector<int>& degrees, const std::vector<int>& order) {
  int flips = 0;
  for (size_t i = 0; i < order.size(); ++i)
    for (size_t j = i + 1; j < order.size(); ++j)
      if (order[i] > order[j] && (degrees[order[i]] % 2) && (degrees[order[j]] % 2)) ++flips;
  return Rat(flips % 2 == 0 ? 1 : -1);
}

struct AxiomChecker {
  const Presentation& p;
  int bound;
  Report rep;

  // semantic helpers: for co-kinds the stored tables are read as the structure
  // constants of the dual operad, so the same bilinear identities apply.
  bool co;

  explicit AxiomChecker(const Presentation& pres, int b)
      : p(pres), bound(b), co(pres.is_co()) {}

  std::string basis_name(int n, int i) const { return p.basis[n][i].name; }

  void check_basis() {
    bool ok = p.arity_bound >= 1 && static_cast<int>(p.basis.size()) > p.arity_bound;
    for (int n = 1; ok && n <= p.arity_bound; ++n)
      if (p.basis[n].empty() && n == 1) ok = false;
    bool reduced = ok && p.dim(1) == 1 && p.degree_of(1, 0) == 0;
    rep.add("basis: arity-1 slice is one element in degree 0", reduced,
            reduced ? "" : "arity-1 slice not one-dimensional in degree 0");
  }

  void check_sym() {
    bool invol = true, braid = true, distant = true;
    std::string winvol, wbraid, wdistant;
    for (int n = 2; n <= bound; ++n) {
      for (int j = 1; j < n && invol; ++j) {
        auto sj = perm_identity(n);
        std::swap(sj[j - 1], sj[j]);
        for (int i = 0; i < p.dim(n) && invol; ++i) {
          auto once = act(p, n, lincomb_single(i), sj);
          LinComb twice;
          for (const auto& [b, c] : once)
            twice = lincomb_add(twice, lincomb_scale(act(p, n, lincomb_single(b), sj), c));
          if (!lincomb_equal(twice, lincomb_single(i))) {
            invol = false;
            winvol = "s_" + std::to_string(j) + " on " + basis_name(n, i);
          }
        }
      }
      // braid and distant relations through full composites
      for (int j = 1; j + 1 < n && braid; ++j) {
        auto sj = perm_identity(n), sk = perm_identity(n);
        std::swap(sj[j - 1], sj[j]);
        std::swap(sk[j], sk[j + 1]);
        auto lhs = perm_compose(sj, perm_compose(sk, sj));
        auto rhs = perm_compose(sk, perm_compose(sj, sk));
        for (int i = 0; i < p.dim(n) && braid; ++i) {
          if (!lincomb_equal(act(p, n, lincomb_single(i), lhs),
                             act(p, n, lincomb_single(i), rhs))) {
            braid = false;
            wbraid = "arity " + std::to_string(n) + ", " + basis_name(n, i);
          }
        }
      }
      for (int j = 1; j < n && distant; ++j)
        for (int l = j + 2; l < n && distant; ++l) {
          auto sj = perm_identity(n), sl = perm_identity(n);
          std::swap(sj[j - 1], sj[j]);
          std::swap(sl[l - 1], sl[l]);
          for (int i = 0; i < p.dim(n) && distant; ++i) {
            auto ab = act(p, n, act(p, n, lincomb_single(i), sj), sl);
            auto ba = act(p, n, act(p, n, lincomb_single(i), sl), sj);
            if (!lincomb_equal(ab, ba)) {
              distant = false;
              wdistant = "arity " + std::to_string(n);
            }
          }
        }
    }
    rep.add("sym: involutions", invol, winvol);
    rep.add("sym: braid relations", braid, wbraid);
    rep.add("sym: distant commutation", distant, wdistant);
  }

  void check_diff() {
    bool degree_ok = true, square_ok = true;
    std::string wd, ws;
    for (int n = 1; n <= bound; ++n) {
      for (int i = 0; i < p.dim(n); ++i) {
        for (const auto& [b, c] : p.diff[n].at(i)) {
          (void)c;
          if (p.degree_of(n, b) != p.degree_of(n, i) + 1) {
            degree_ok = false;
            wd = basis_name(n, i);
          }
        }
        auto dd = apply_diff(p, n, apply_diff(p, n, lincomb_single(i)));
        if (!dd.empty()) {
          square_ok = false;
          ws = basis_name(n, i);
        }
      }
    }
    rep.add("diff: degree +1", degree_ok, wd);
    rep.add("diff: d^2 = 0", square_ok, ws);
  }

  // enumerate partitions of n into k >= 1 parts (>= 1 each)
  static void partitions_of(int n, const std::function<void(const std::vector<int>&)>& emit) {
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

  const GammaTable& main_table() const { return p.gamma; }

  // gamma table of the given flavor together with the slot presentations
  struct Flavor {
    const GammaTable* table;
    const Presentation* head;   // arity-k slot
    const Presentation* part;   // the n_i slots
    const Presentation* out;    // the output space
    std::string tag;
  };

  std::vector<Flavor> flavors() const {
    std::vector<Flavor> fs;
    if (p.kind == PresKind::Operad || p.kind == PresKind::Cooperad) {
      fs.push_back({&p.gamma, &p, &p, &p, "gamma"});
    } else {
      fs.push_back({&p.gamma_left, p.left.get(), &p, &p, "gammaL"});
      fs.push_back({&p.gamma_right, &p, p.right.get(), &p, "gammaR"});
    }
    return fs;
  }

  void check_gamma_grading() {
    for (const auto& f : flavors()) {
      bool ok = true;
      std::string w;
      for (const auto& [partition, entries] : *f.table) {
        int n = 0, k = static_cast<int>(partition.size());
        for (int s : partition) n += s;
        if (n > bound) continue;
        for (const auto& e : entries) {
          int deg = f.head->degree_of(k, e.inputs[0]);
          for (int s = 0; s < k; ++s) deg += f.part->degree_of(partition[s], e.inputs[s + 1]);
          deg -= k * f.out->gamma_degree_shift;
          if (deg != f.out->degree_of(n, e.output)) {
            ok = false;
            w = f.tag + " entry at arity " + std::to_string(n);
          }
        }
      }
      rep.add(f.tag + ": structure constants preserve degree", ok, w);
    }
  }

  void check_units() {
    // gamma(x; units) = x, read dually as the counit axiom for co-kinds.
    const GammaTable& table =
        (p.kind == PresKind::Operad || p.kind == PresKind::Cooperad) ? p.gamma : p.gamma_right;
    bool ok = true;
    std::string w;
    for (int k = 2; k <= bound; ++k) {
      std::vector<int> ones(k, 1);
      auto it = table.find(ones);
      if (it == table.end()) {
        ok = false;
        w = "missing all-unit partition at arity " + std::to_string(k);
        break;
      }
      for (int i = 0; i < p.dim(k) && ok; ++i) {
        std::vector<LinComb> inputs(k + 1, lincomb_single(0));
        inputs[0] = lincomb_single(i);
        auto res = table_eval(table, ones, inputs);
        if (!lincomb_equal(res, lincomb_single(i))) {
          ok = false;
          w = "gamma(x; units) != x for " + basis_name(k, i);
        }
      }
    }
    rep.add(co ? "gamma: counit axioms" : "gamma: unit axioms", ok, w);
  }

  // table_eval that synthesizes the k = 1 unit action instead of a lookup
  static LinComb eval_units(const GammaTable& table, const std::vector<int>& partition,
                            const std::vector<LinComb>& inputs) {
    if (partition.size() == 1 && !table.count(partition)) {
      Rat c;
      for (const auto& [i, v] : inputs[0])
        if (i == 0) c = v;
      return lincomb_scale(inputs[1], c);
    }
    return table_eval(table, partition, inputs);
  }

  void check_associativity() {
    // gamma(gamma(x; y_1..y_k); z_1..z_N) = gamma(x; {gamma(y_i; z-block_i)})
    // where N = sum of the y arities and z_j attaches to the j-th leaf slot.
    // Read dually this is coassociativity of the stored co-structure.
    struct Tower {
      const GammaTable* lhs_first;
      const GammaTable* lhs_second;
      const GammaTable* rhs_inner;
      const GammaTable* rhs_outer;
      const Presentation* head;
      const Presentation* mid_slot;
      const Presentation* fine_slot;
      std::string tag;
    };
    std::vector<Tower> towers;
    if (p.kind == PresKind::Operad || p.kind == PresKind::Cooperad) {
      towers.push_back({&p.gamma, &p.gamma, &p.gamma, &p.gamma, &p, &p, &p, "gamma"});
    } else {
      towers.push_back({&p.gamma_right, &p.gamma_right, &p.right->gamma, &p.gamma_right, &p,
                        p.right.get(), p.right.get(), "gammaR tower"});
      towers.push_back({&p.left->gamma, &p.gamma_left, &p.gamma_left, &p.gamma_left,
                        p.left.get(), p.left.get(), &p, "gammaL tower"});
      towers.push_back({&p.gamma_left, &p.gamma_right, &p.gamma_right, &p.gamma_left,
                        p.left.get(), &p, p.right.get(), "left/right interchange"});
    }

    bool ok = true;
    std::string w;
    for (const auto& tw : towers) {
      for (int N = 2; N <= bound && ok; ++N) {
        partitions_of(N, [&](const std::vector<int>& mid) {
          if (!ok) return;
          // fine: one arity >= 1 per leaf slot of the mid parts, total <= bound
          std::vector<int> fine(N, 1);
          std::function<void(int, int)> over_fine = [&](int slot, int total) {
            if (!ok) return;
            if (slot == N) {
              run_assoc_instance(tw, mid, fine, ok, w);
              return;
            }
            for (int m = 1; total + m + (N - slot - 1) <= bound; ++m) {
              fine[slot] = m;
              over_fine(slot + 1, total + m);
            }
          };
          over_fine(0, 0);
        });
      }
      if (!ok) break;
    }
    rep.add("gamma: associativity / interchange of total compositions", ok, w);
  }

  template <typename Tower>
  void run_assoc_instance(const Tower& tw, const std::vector<int>& mid,
                          const std::vector<int>& fine, bool& ok, std::string& w) {
    const int k = static_cast<int>(mid.size());
    const int N = static_cast<int>(fine.size());
    std::vector<int> dims;
    dims.push_back(tw.head->dim(k));
    for (int i = 0; i < k; ++i) dims.push_back(tw.mid_slot->dim(mid[i]));
    for (int s = 0; s < N; ++s) dims.push_back(tw.fine_slot->dim(fine[s]));

    std::vector<int> tup(dims.size(), 0);
    std::function<void(size_t)> rec = [&](size_t pos) {
      if (!ok) return;
      if (pos == tup.size()) {
        // LHS
        std::vector<LinComb> mid_in(k + 1);
        for (int s = 0; s <= k; ++s) mid_in[s] = lincomb_single(tup[s]);
        LinComb first = eval_units(*tw.lhs_first, mid, mid_in);
        std::vector<LinComb> fine_in(N + 1);
        fine_in[0] = first;
        for (int s = 0; s < N; ++s) fine_in[s + 1] = lincomb_single(tup[k + 1 + s]);
        LinComb lhs = eval_units(*tw.lhs_second, fine, fine_in);
        // RHS, with the Koszul interchange sign from moving each z-block left
        // past the later y's
        std::vector<LinComb> outer_in(k + 1);
        outer_in[0] = lincomb_single(tup[0]);
        std::vector<int> coarse(k);
        std::vector<int> zblock_deg(k, 0), ydeg(k, 0);
        int zpos = 0;
        for (int i = 0; i < k; ++i) {
          std::vector<int> sub(fine.begin() + zpos, fine.begin() + zpos + mid[i]);
          int ci = 0;
          for (int s : sub) ci += s;
          coarse[i] = ci;
          ydeg[i] = tw.mid_slot->parity_of(mid[i], tup[i + 1]);
          std::vector<LinComb> ins(mid[i] + 1);
          ins[0] = lincomb_single(tup[i + 1]);
          for (int s = 0; s < mid[i]; ++s) {
            ins[s + 1] = lincomb_single(tup[k + 1 + zpos + s]);
            zblock_deg[i] += tw.fine_slot->parity_of(fine[zpos + s], tup[k + 1 + zpos + s]);
          }
          outer_in[i + 1] = eval_units(*tw.rhs_inner, sub, ins);
          zpos += mid[i];
        }
        int cross = 0;
        for (int i = 0; i < k; ++i)
          for (int j = i + 1; j < k; ++j)
            if ((zblock_deg[i] % 2) && (ydeg[j] % 2)) cross ^= 1;
        LinComb rhs = eval_units(*tw.rhs_outer, coarse, outer_in);
        if (cross) rhs = lincomb_scale(rhs, Rat(-1));
        if (!lincomb_equal(lhs, rhs)) {
          ok = false;
          std::ostringstream os;
          os << tw.tag << " fails at mid (";
          for (size_t i = 0; i < mid.size(); ++i) os << (i ? "," : "") << mid[i];
          os << ") fine (";
          for (size_t i = 0; i < fine.size(); ++i) os << (i ? "," : "") << fine[i];
          os << ")";
          w = os.str();
        }
        return;
      }
      for (int v = 0; v < dims[pos]; ++v) {
        tup[pos] = v;
        rec(pos + 1);
      }
    };
    rec(0);
  }

  void check_equivariance() {
    bool ok = true;
    std::string w;
    for (const auto& f : flavors()) {
      for (const auto& [partition, entries] : *f.table) {
        (void)entries;
        int n = 0;
        const int k = static_cast<int>(partition.size());
        for (int s : partition) n += s;
        if (n > bound || !ok) continue;
        // head generators sigma = s_j
        for (int j = 1; j < k && ok; ++j) {
          auto sj = perm_identity(k);
          std::swap(sj[j - 1], sj[j]);
          std::vector<int> swapped = partition;
          std::swap(swapped[j - 1], swapped[j]);
          if (!f.table->count(swapped)) continue;
          auto tau = block_permutation(sj, partition);
          for_tuples(f, partition, [&](const std::vector<int>& tup) {
            if (!ok) return;
            std::vector<LinComb> ins(k + 1);
            ins[0] = act(*f.head, k, lincomb_single(tup[0]), sj);
            for (int s = 0; s < k; ++s) ins[s + 1] = lincomb_single(tup[s + 1]);
            LinComb lhs = table_eval(*f.table, partition, ins);

            std::vector<LinComb> rins(k + 1);
            rins[0] = lincomb_single(tup[0]);
            std::vector<int> part_degs(k), reorder(k);
            for (int s = 0; s < k; ++s) {
              rins[s + 1] = lincomb_single(tup[sj[s]]);
              part_degs[s] = f.part->parity_of(partition[s], tup[s + 1]);
              reorder[s] = sj[s] - 1;
            }
            LinComb pre = table_eval(*f.table, swapped, rins);
            LinComb rhs = act(*f.out, n, pre, tau);
            rhs = lincomb_scale(rhs, koszul_reorder_sign_int(part_degs, reorder));
            if (!lincomb_equal(lhs, rhs)) {
              ok = false;
              w = f.tag + ": head equivariance fails, partition arity " + std::to_string(n);
            }
          });
        }
        // part generators
        for (int i = 0; i < k && ok; ++i) {
          if (partition[i] < 2) continue;
          for (int j = 1; j < partition[i] && ok; ++j) {
            auto sj = perm_identity(partition[i]);
            std::swap(sj[j - 1], sj[j]);
            // embed into Sigma_n at the block offset
            int off = 0;
            for (int s = 0; s < i; ++s) off += partition[s];
            auto embedded = perm_identity(n);
            std::swap(embedded[off + j - 1], embedded[off + j]);
            for_tuples(f, partition, [&](const std::vector<int>& tup) {
              if (!ok) return;
              std::vector<LinComb> ins(k + 1);
              ins[0] = lincomb_single(tup[0]);
              for (int s = 0; s < k; ++s) ins[s + 1] = lincomb_single(tup[s + 1]);
              ins[i + 1] = act(*f.part, partition[i], ins[i + 1], sj);
              LinComb lhs = table_eval(*f.table, partition, ins);
              std::vector<LinComb> rins(k + 1);
              rins[0] = lincomb_single(tup[0]);
              for (int s = 0; s < k; ++s) rins[s + 1] = lincomb_single(tup[s + 1]);
              LinComb rhs = act(*f.out, n, table_eval(*f.table, partition, rins), embedded);
              if (!lincomb_equal(lhs, rhs)) {
                ok = false;
                w = f.tag + ": part equivariance fails, arity " + std::to_string(n);
              }
            });
          }
        }
      }
    }
    rep.add("gamma: equivariance on generators", ok, w);
  }

  void for_tuples(const auto& f, const std::vector<int>& partition,
                  const std::function<void(const std::vector<int>&)>& emit) {
    const int k = static_cast<int>(partition.size());
    std::vector<int> dims;
    dims.push_back(f.head->dim(k));
    for (int s : partition) dims.push_back(f.part->dim(s));
    std::vector<int> tup(dims.size(), 0);
    std::function<void(size_t)> rec = [&](size_t pos) {
      if (pos == tup.size()) {
        emit(tup);
        return;
      }
      for (int v = 0; v < dims[pos]; ++v) {
        tup[pos] = v;
        rec(pos + 1);
      }
    };
    rec(0);
  }

  void check_leibniz() {
    bool ok = true;
    std::string w;
    for (const auto& f : flavors()) {
      for (const auto& [partition, entries] : *f.table) {
        (void)entries;
        int n = 0;
        const int k = static_cast<int>(partition.size());
        for (int s : partition) n += s;
        if (n > bound || !ok) continue;
        for_tuples(f, partition, [&](const std::vector<int>& tup) {
          if (!ok) return;
          std::vector<LinComb> ins(k + 1);
          for (int s = 0; s <= k; ++s) ins[s] = lincomb_single(tup[s]);
          LinComb lhs = apply_diff(*f.out, n, table_eval(*f.table, partition, ins));

          LinComb rhs;
          {
            std::vector<LinComb> j = ins;
            j[0] = apply_diff(*f.head, k, ins[0]);
            rhs = lincomb_add(rhs, table_eval(*f.table, partition, j));
          }
          int sign_deg = f.head->parity_of(k, tup[0]);
          for (int s = 0; s < k; ++s) {
            std::vector<LinComb> j = ins;
            j[s + 1] = apply_diff(*f.part, partition[s], ins[s + 1]);
            Rat sg(sign_deg % 2 == 0 ? 1 : -1);
            rhs = lincomb_add(rhs, lincomb_scale(table_eval(*f.table, partition, j), sg));
            sign_deg += f.part->parity_of(partition[s], tup[s + 1]);
          }
          if (!lincomb_equal(lhs, rhs)) {
            ok = false;
            w = f.tag + ": Leibniz fails at arity " + std::to_string(n);
          }
        });
      }
    }
    rep.add("diff: (co)derivation (Leibniz) for the structure maps", ok, w);
  }

  void check_lambda() {
    if (p.lambda.empty()) return;
    bool ok = true;
    std::string w;
    // injection generators as functions; h[i] : [n] -> [n+1] skips i
    auto hfun = [](int n, int i) {
      std::vector<int> f(n);
      for (int x = 1; x <= n; ++x) f[x - 1] = x < i ? x : x + 1;
      return f;
    };
    for (int n = 1; n + 2 <= bound && ok; ++n) {
      // group matrix composites by the composite injection [n] -> [n+2]
      std::map<std::vector<int>, std::vector<std::pair<int, int>>> by_fun;
      for (int i = 1; i <= n + 1; ++i)
        for (int j = 1; j <= n + 2; ++j) {
          auto hi = hfun(n, i), hj = hfun(n + 1, j);
          std::vector<int> comp(n);
          for (int x = 0; x < n; ++x) comp[x] = hj[hi[x] - 1];
          by_fun[comp].push_back({i, j});
        }
      for (const auto& [fun, pairs] : by_fun) {
        (void)fun;
        if (pairs.size() < 2) continue;
        for (int b = 0; b < p.dim(p.is_co() ? n : n + 2) && ok; ++b) {
          LinComb ref;
          bool first = true;
          for (auto [i, j] : pairs) {
            LinComb v;
            if (p.is_co()) {
              v = lambda_apply(p, n + 1, j, lambda_apply(p, n, i, lincomb_single(b)));
            } else {
              v = lambda_apply(p, n, i, lambda_apply(p, n + 1, j, lincomb_single(b)));
            }
            if (first) {
              ref = v;
              first = false;
            } else if (!lincomb_equal(ref, v)) {
              ok = false;
              w = "lambda composition law fails at arity " + std::to_string(n);
            }
          }
        }
      }
    }
    rep.add("lambda: composition law on generators", ok, w);
  }
};

}  // namespace

Report verify_axioms(const Presentation& p, int max_arity) {
  int bound = max_arity > 0 ? std::min(max_arity, p.arity_bound) : p.arity_bound;
  AxiomChecker chk(p, bound);
  chk.check_basis();
  chk.check_sym();
  chk.check_diff();
  if (p.is_co()) {
    // the structure-map identities are the transposed ones; run them on the
    // arity-wise dual, which is an honest operad-side presentation
    Presentation op = dualize(p);
    AxiomChecker dual_chk(op, bound);
    dual_chk.check_gamma_grading();
    dual_chk.check_units();
    dual_chk.check_associativity();
    dual_chk.check_equivariance();
    dual_chk.check_leibniz();
    for (auto& c : dual_chk.rep.checks) {
      c.name += " (checked on the arity-wise dual)";
      chk.rep.checks.push_back(std::move(c));
    }
  } else {
    chk.check_gamma_grading();
    chk.check_units();
    chk.check_associativity();
    chk.check_equivariance();
    chk.check_leibniz();
  }
  chk.check_lambda();
  return chk.rep;
}

// ---- json ----

namespace {

nlohmann::ordered_json lincomb_to_json(const LinComb& x) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& [i, c] : x) j.push_back({i, c.str()});
  return j;
}

LinComb lincomb_from_json(const nlohmann::json& j) {
  LinComb out;
  for (const auto& e : j) out.push_back({e.at(0).get<int>(), Rat::parse(e.at(1).get<std::string>())});
  return out;
}

nlohmann::ordered_json table_to_json(const GammaTable& t) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& [partition, entries] : t) {
    nlohmann::ordered_json jt;
    jt["parts"] = partition;
    jt["map"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
      nlohmann::ordered_json je;
      je["from"] = e.inputs;
      je["to"] = e.output;
      je["c"] = e.coeff.str();
      jt["map"].push_back(je);
    }
    out.push_back(jt);
  }
  return out;
}

GammaTable table_from_json(const nlohmann::json& j) {
  GammaTable out;
  for (const auto& jt : j) {
    auto partition = jt.at("parts").get<std::vector<int>>();
    auto& entries = out[partition];
    for (const auto& je : jt.at("map")) {
      GammaEntry e;
      e.inputs = je.at("from").get<std::vector<int>>();
      e.output = je.at("to").get<int>();
      e.coeff = Rat::parse(je.at("c").get<std::string>());
      entries.push_back(e);
    }
  }
  return out;
}

std::string kind_name(PresKind k) {
  switch (k) {
    case PresKind::Operad: return "operad";
    case PresKind::Cooperad: return "cooperad";
    case PresKind::Bimodule: return "bimodule";
    case PresKind::Cobimodule: return "cobimodule";
  }
  return "?";
}

PresKind kind_parse(const std::string& s) {
  if (s == "operad") return PresKind::Operad;
  if (s == "cooperad") return PresKind::Cooperad;
  if (s == "bimodule") return PresKind::Bimodule;
  if (s == "cobimodule") return PresKind::Cobimodule;
  throw std::invalid_argument("unknown presentation kind: " + s);
}

}  // namespace

std::string save_presentation(const Presentation& p) {
  nlohmann::ordered_json j;
  j["name"] = p.name;
  j["kind"] = kind_name(p.kind);
  j["arity_bound"] = p.arity_bound;
  for (int n = 1; n <= p.arity_bound; ++n) {
    auto& jb = j["basis"][std::to_string(n)];
    for (const auto& b : p.basis[n]) jb[std::to_string(b.degree)].push_back(b.name);
  }
  for (int n = 2; n <= p.arity_bound; ++n) {
    auto& js = j["sym"][std::to_string(n)];
    for (const auto& mat : p.sym[n]) {
      nlohmann::ordered_json jm = nlohmann::ordered_json::array();
      for (const auto& col : mat) jm.push_back(lincomb_to_json(col));
      js.push_back(jm);
    }
  }
  for (int n = 1; n <= p.arity_bound; ++n) {
    nlohmann::ordered_json jm = nlohmann::ordered_json::array();
    for (const auto& col : p.diff[n]) jm.push_back(lincomb_to_json(col));
    j["d"][std::to_string(n)] = jm;
  }
  if (!p.gamma.empty()) j["gamma"] = table_to_json(p.gamma);
  if (!p.gamma_left.empty()) j["gammaL"] = table_to_json(p.gamma_left);
  if (!p.gamma_right.empty()) j["gammaR"] = table_to_json(p.gamma_right);
  if (!p.lambda.empty()) {
    for (const auto& [key, mat] : p.lambda.hmat) {
      nlohmann::ordered_json jm = nlohmann::ordered_json::array();
      for (const auto& col : mat) jm.push_back(lincomb_to_json(col));
      j["lambda"]["h"][std::to_string(key.first) + "," + std::to_string(key.second)] = jm;
    }
  }
  if (p.left) j["left"] = nlohmann::ordered_json::parse(save_presentation(*p.left));
  if (p.right) j["right"] = nlohmann::ordered_json::parse(save_presentation(*p.right));
  return j.dump(1);
}

Presentation load_presentation(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  Presentation p;
  p.name = j.at("name").get<std::string>();
  p.kind = kind_parse(j.at("kind").get<std::string>());
  p.arity_bound = j.at("arity_bound").get<int>();
  if (p.arity_bound < 1) throw std::invalid_argument("arity_bound must be >= 1");
  p.basis.resize(p.arity_bound + 1);
  p.sym.resize(p.arity_bound + 1);
  p.diff.resize(p.arity_bound + 1);
  for (int n = 1; n <= p.arity_bound; ++n) {
    auto jb = j.at("basis").find(std::to_string(n));
    if (jb == j.at("basis").end()) throw std::invalid_argument("missing basis slice");
    // iterate degrees in numeric order for determinism
    std::vector<std::pair<int, std::vector<std::string>>> slices;
    for (auto it = jb->begin(); it != jb->end(); ++it)
      slices.push_back({std::stoi(it.key()), it.value().get<std::vector<std::string>>()});
    std::sort(slices.begin(), slices.end());
    for (const auto& [deg, names] : slices)
      for (const auto& nm : names) p.basis[n].push_back({nm, deg});
  }
  for (int n = 2; n <= p.arity_bound; ++n) {
    auto js = j.at("sym").find(std::to_string(n));
    if (js == j.at("sym").end()) throw std::invalid_argument("missing sym slice");
    for (const auto& jm : *js) {
      std::vector<LinComb> mat;
      for (const auto& col : jm) mat.push_back(lincomb_from_json(col));
      if (static_cast<int>(mat.size()) != p.dim(n))
        throw std::invalid_argument("sym matrix has wrong size");
      p.sym[n].push_back(std::move(mat));
    }
    if (static_cast<int>(p.sym[n].size()) != n - 1)
      throw std::invalid_argument("expected n-1 adjacent transposition matrices");
  }
  p.sym[1] = {};
  for (int n = 1; n <= p.arity_bound; ++n) {
    p.diff[n].assign(p.dim(n), {});
    if (j.contains("d") && j.at("d").contains(std::to_string(n))) {
      const auto& jm = j.at("d").at(std::to_string(n));
      p.diff[n].clear();
      for (const auto& col : jm) p.diff[n].push_back(lincomb_from_json(col));
      if (static_cast<int>(p.diff[n].size()) != p.dim(n))
        throw std::invalid_argument("d matrix has wrong size");
    }
  }
  if (j.contains("gamma")) p.gamma = table_from_json(j.at("gamma"));
  if (j.contains("gammaL")) p.gamma_left = table_from_json(j.at("gammaL"));
  if (j.contains("gammaR")) p.gamma_right = table_from_json(j.at("gammaR"));
  if (j.contains("lambda") && j.at("lambda").contains("h")) {
    for (auto it = j.at("lambda").at("h").begin(); it != j.at("lambda").at("h").end(); ++it) {
      auto comma = it.key().find(',');
      int n = std::stoi(it.key().substr(0, comma));
      int i = std::stoi(it.key().substr(comma + 1));
      std::vector<LinComb> mat;
      for (const auto& col : it.value()) mat.push_back(lincomb_from_json(col));
      p.lambda.hmat[{n, i}] = std::move(mat);
    }
  }
  if (j.contains("left"))
    p.left = std::make_shared<Presentation>(load_presentation(j.at("left").dump()));
  if (j.contains("right"))
    p.right = std::make_shared<Presentation>(load_presentation(j.at("right").dump()));

  // structural validation beyond what parsing enforces
  for (int n = 1; n <= p.arity_bound; ++n)
    for (const auto& col : p.diff[n])
      for (const auto& [row, c] : col) {
        (void)c;
        if (row < 0 || row >= p.dim(n)) throw std::invalid_argument("d entry out of range");
      }
  return p;
}

}  // namespace operadkit
