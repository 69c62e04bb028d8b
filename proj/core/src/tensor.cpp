#include "operadkit/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace operadkit {

Element& element_add(Element& acc, const TreeTensor& t, const Rat& c) {
  if (c.is_zero()) return acc;
  auto it = acc.find(t);
  if (it == acc.end()) {
    acc.emplace(t, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) acc.erase(it);
  }
  return acc;
}

Element element_sum(const Element& a, const Element& b) {
  Element out = a;
  for (const auto& [t, c] : b) element_add(out, t, c);
  return out;
}

Element element_scale(const Element& a, const Rat& c) {
  Element out;
  if (c.is_zero()) return out;
  for (const auto& [t, v] : a) out.emplace(t, v * c);
  return out;
}

bool element_equal(const Element& a, const Element& b) { return a == b; }

std::vector<VertexRole> classify_nodes(const PlanarTree& t) {
  std::vector<VertexRole> roles(t.nodes.size(), VertexRole::Above);
  if (!t.has_marks()) return roles;
  std::function<bool(int)> walk = [&](int v) -> bool {
    bool below_mark = false;
    for (int kid : t.nodes[v].kids)
      if (kid >= 0 && walk(kid)) below_mark = true;
    if (t.marked(v)) {
      roles[v] = VertexRole::Marked;
      return true;
    }
    roles[v] = below_mark ? VertexRole::Below : VertexRole::Above;
    return below_mark;
  };
  if (!t.nodes.empty()) walk(0);
  return roles;
}

const Presentation& TensorScheme::pres(VertexRole r) const {
  switch (r) {
    case VertexRole::Below: return *below;
    case VertexRole::Marked: return *marked;
    case VertexRole::Above: return *above;
  }
  throw std::logic_error("bad role");
}

int TensorScheme::shift(VertexRole r) const {
  switch (r) {
    case VertexRole::Below: return below_shift;
    case VertexRole::Marked: return marked_shift;
    case VertexRole::Above: return above_shift;
  }
  return 0;
}

std::vector<int> factor_degrees(const TensorScheme& s, const TreeTensor& t) {
  auto roles = classify_nodes(t.tree);
  std::vector<int> degs(t.tree.nodes.size());
  for (size_t v = 0; v < t.tree.nodes.size(); ++v)
    degs[v] = s.eff_degree(roles[v], t.tree.arity_of(static_cast<int>(v)), t.dec[v]);
  return degs;
}

std::vector<int> factor_parities(const TensorScheme& s, const TreeTensor& t) {
  auto roles = classify_nodes(t.tree);
  std::vector<int> out(t.tree.nodes.size());
  for (size_t v = 0; v < t.tree.nodes.size(); ++v)
    out[v] = s.eff_parity(roles[v], t.tree.arity_of(static_cast<int>(v)), t.dec[v]);
  return out;
}

int term_degree(const TensorScheme& s, const TreeTensor& t) {
  int total = 0;
  for (int d : factor_degrees(s, t)) total += d;
  return total;
}

int term_parity(const TensorScheme& s, const TreeTensor& t) {
  int total = 0;
  for (int d : factor_parities(s, t)) total += d;
  return total & 1;
}

Rat koszul_reorder_sign(const std::vector<int>& degrees, const std::vector<int>& order) {
  int flips = 0;
  for (size_t i = 0; i < order.size(); ++i)
    for (size_t j = i + 1; j < order.size(); ++j)
      if (order[i] > order[j] && (degrees[order[i]] % 2) && (degrees[order[j]] % 2)) ++flips;
  return Rat(flips % 2 == 0 ? 1 : -1);
}

SignData sign_data(const TensorScheme& s, const PlanarTree& tree, const std::vector<int>& dec) {
  SignData d;
  auto roles = classify_nodes(tree);
  const size_t nv = tree.nodes.size();
  d.theta_parity.resize(nv);
  d.slot_of_vertex.assign(nv, -1);
  for (size_t v = 0; v < nv; ++v) {
    d.theta_parity[v] =
        s.pres(roles[v]).parity_of(tree.arity_of(static_cast<int>(v)), dec[v]);
    d.theta_total ^= d.theta_parity[v];
  }
  auto depth = tree.depths();
  std::vector<int> below, above;
  for (size_t v = 0; v < nv; ++v) {
    if (s.parity_shift(roles[v]) % 2 == 0) continue;  // unsuspended factor
    (roles[v] == VertexRole::Below ? below : above).push_back(static_cast<int>(v));
  }
  auto by_depth = [&](std::vector<int>& vs) {
    std::stable_sort(vs.begin(), vs.end(), [&](int a, int b) { return depth[a] < depth[b]; });
  };
  by_depth(below);
  by_depth(above);
  for (int v : below) {
    d.slot_of_vertex[v] = static_cast<int>(d.slot_vertices.size());
    d.slot_vertices.push_back(v);
  }
  for (int v : above) {
    d.slot_of_vertex[v] = static_cast<int>(d.slot_vertices.size());
    d.slot_vertices.push_back(v);
  }
  return d;
}

Rat transport_sign(const SignData& src, const TensorScheme& s, const PlanarTree& target_tree,
                   const std::vector<int>& target_dec, const std::vector<int>& order) {
  // decoration block: Koszul over odd pairs of the preorder permutation
  int flips = 0;
  for (size_t i = 0; i < order.size(); ++i)
    for (size_t j = i + 1; j < order.size(); ++j)
      if (order[i] > order[j] && src.theta_parity[order[i]] && src.theta_parity[order[j]])
        ++flips;
  // suspension block: plain permutation sign between the two level orders
  SignData dst = sign_data(s, target_tree, target_dec);
  if (dst.slot_vertices.size() != src.slot_vertices.size())
    throw std::logic_error("transport_sign: slot count changed");
  std::vector<int> perm;
  perm.reserve(dst.slot_vertices.size());
  for (int tv : dst.slot_vertices) perm.push_back(src.slot_of_vertex[order[tv]]);
  for (size_t i = 0; i < perm.size(); ++i)
    for (size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) ++flips;
  return Rat(flips % 2 == 0 ? 1 : -1);
}

namespace {

// preorder walk order of nodes when kid blocks at `vertex` are permuted by tau
void preorder_after_sort(const PlanarTree& t, int vertex, const std::vector<int>& tau,
                         int cur, std::vector<int>& out) {
  out.push_back(cur);
  const auto& kids = t.nodes[cur].kids;
  if (cur == vertex) {
    for (int pos = 0; pos < static_cast<int>(kids.size()); ++pos) {
      int kid = kids[tau[pos] - 1];
      if (kid >= 0) preorder_after_sort(t, vertex, tau, kid, out);
    }
  } else {
    for (int kid : kids)
      if (kid >= 0) preorder_after_sort(t, vertex, tau, kid, out);
  }
}

}  // namespace

std::pair<PlanarTree, std::vector<int>> shuffle_sort(const PlanarTree& t) {
  PlanarTree out;
  out.leaf_count = t.leaf_count;
  bool marks = t.has_marks();
  std::vector<int> map(t.nodes.size(), -1);
  std::function<int(int)> walk = [&](int v) -> int {
    int idx = static_cast<int>(out.nodes.size());
    out.nodes.push_back({});
    if (marks) out.marks.push_back(t.marked(v) ? 1 : 0);
    map[v] = idx;
    std::vector<int> kids = t.nodes[v].kids;
    std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) {
      return t.min_leaf_of_kid(a) < t.min_leaf_of_kid(b);
    });
    for (int kid : kids) {
      if (kid >= 0) {
        int child = walk(kid);
        out.nodes[idx].kids.push_back(child);
      } else {
        out.nodes[idx].kids.push_back(kid);
      }
    }
    return idx;
  };
  if (!t.is_bare_leaf()) walk(0);
  return {out, map};
}

Rat couple_sign(const TensorScheme& s, const TreeTensor& t) {
  if (t.tree.is_bare_leaf()) return Rat(1);
  SignData d = sign_data(s, t.tree, t.dec);
  const int m = static_cast<int>(t.tree.nodes.size());
  // source: theta_0..theta_{m-1}, then the suspension symbols in slot order;
  // target: each suspension directly before its decoration, in preorder
  std::vector<int> src_parity(m + d.slot_vertices.size());
  for (int v = 0; v < m; ++v) src_parity[v] = d.theta_parity[v];
  for (size_t k = 0; k < d.slot_vertices.size(); ++k) src_parity[m + k] = 1;
  std::vector<int> target;
  target.reserve(src_parity.size());
  for (int v = 0; v < m; ++v) {
    if (d.slot_of_vertex[v] >= 0) target.push_back(m + d.slot_of_vertex[v]);
    target.push_back(v);
  }
  int flips = 0;
  for (size_t i = 0; i < target.size(); ++i)
    for (size_t j = i + 1; j < target.size(); ++j)
      if (target[i] > target[j] && src_parity[target[i]] && src_parity[target[j]]) ++flips;
  return Rat(flips % 2 == 0 ? 1 : -1);
}

Element normalize_term(const TensorScheme& s, PlanarTree tree, const std::vector<int>& dec,
                       const Rat& coeff, SignConvention conv) {
  Element out;
  if (coeff.is_zero()) return out;
  if (tree.is_bare_leaf()) {
    element_add(out, TreeTensor{tree, {}}, coeff);
    return out;
  }

  // find a vertex with unsorted kid blocks
  int bad = -1;
  std::vector<int> tau;
  for (size_t v = 0; v < tree.nodes.size() && bad < 0; ++v) {
    const auto& kids = tree.nodes[v].kids;
    std::vector<int> mins(kids.size());
    for (size_t j = 0; j < kids.size(); ++j) mins[j] = tree.min_leaf_of_kid(kids[j]);
    if (!std::is_sorted(mins.begin(), mins.end())) {
      bad = static_cast<int>(v);
      tau.resize(kids.size());
      std::iota(tau.begin(), tau.end(), 1);
      std::stable_sort(tau.begin(), tau.end(), [&](int a, int b) { return mins[a - 1] < mins[b - 1]; });
    }
  }

  if (bad < 0) {
    TreeTensor tt{std::move(tree), dec};
    element_add(out, tt, coeff);
    return out;
  }

  std::vector<int> order;
  preorder_after_sort(tree, bad, tau, 0, order);
  SignData src = sign_data(s, tree, dec);

  // twist the decoration at the sorted vertex
  auto roles = classify_nodes(tree);
  std::vector<int> coupled_par(tree.nodes.size());
  for (size_t v = 0; v < tree.nodes.size(); ++v)
    coupled_par[v] = s.eff_parity(roles[v], tree.arity_of(static_cast<int>(v)), dec[v]);
  const Presentation& pres = s.pres(roles[bad]);
  int arity = tree.arity_of(bad);
  LinComb twisted = act(pres, arity, lincomb_single(dec[bad]), tau);

  // rebuild the tree with sorted kid blocks at `bad`
  PlanarTree sorted = tree;
  {
    std::vector<int> nk(arity);
    for (int pos = 0; pos < arity; ++pos) nk[pos] = tree.nodes[bad].kids[tau[pos] - 1];
    sorted.nodes[bad].kids = std::move(nk);
  }
  // renumber into preorder, carrying decorations along
  std::vector<int> new_dec_template(dec.size());
  {
    std::vector<int> new_of_old(tree.nodes.size());
    for (size_t i = 0; i < order.size(); ++i) new_of_old[order[i]] = static_cast<int>(i);
    PlanarTree fixed;
    fixed.leaf_count = sorted.leaf_count;
    fixed.nodes.resize(order.size());
    if (!sorted.marks.empty()) fixed.marks.assign(order.size(), 0);
    for (size_t i = 0; i < order.size(); ++i) {
      PlanarTree::Node nd;
      for (int kid : sorted.nodes[order[i]].kids)
        nd.kids.push_back(kid >= 0 ? new_of_old[kid] : kid);
      fixed.nodes[i] = std::move(nd);
      if (!sorted.marks.empty()) fixed.marks[i] = sorted.marked(order[i]);
      new_dec_template[i] = dec[order[i]];
    }
    sorted = std::move(fixed);
  }
  int bad_new = 0;
  for (size_t i = 0; i < order.size(); ++i)
    if (order[i] == bad) bad_new = static_cast<int>(i);
  Rat sign = conv == SignConvention::Block
                 ? transport_sign(src, s, sorted, new_dec_template, order)
                 : koszul_reorder_sign(coupled_par, order);

  for (const auto& [b, c] : twisted) {
    std::vector<int> nd = new_dec_template;
    nd[bad_new] = b;
    Element rec = normalize_term(s, sorted, nd, coeff * sign * c, conv);
    for (const auto& [t2, c2] : rec) element_add(out, t2, c2);
  }
  return out;
}

Element graft_terms(const TensorScheme& composite, const TensorScheme& outer_scheme,
                    const TreeTensor& outer, const std::vector<const TensorScheme*>& part_schemes,
                    const std::vector<const TreeTensor*>& parts, const Rat& coeff) {
  std::vector<PlanarTree> part_trees;
  part_trees.reserve(parts.size());
  for (const auto* p : parts) part_trees.push_back(p->tree);
  Graft g = graft_gamma(outer.tree, part_trees);

  // decorations in composite preorder + the permutation from input factor order
  const size_t total = g.tree.nodes.size();
  std::vector<int> dec(total, -1);
  std::vector<int> source_pos(total, -1);
  std::vector<int> par_src;
  int pos = 0;
  {
    auto op = factor_parities(outer_scheme, outer);
    for (size_t v = 0; v < outer.tree.nodes.size(); ++v) {
      int nv = g.outer_nodes[v];
      dec[nv] = outer.dec[v];
      source_pos[nv] = pos++;
      par_src.push_back(op[v]);
    }
  }
  for (size_t i = 0; i < parts.size(); ++i) {
    if (parts[i]->tree.is_bare_leaf()) continue;
    auto pp = factor_parities(*part_schemes[i], *parts[i]);
    for (size_t v = 0; v < parts[i]->tree.nodes.size(); ++v) {
      int nv = g.part_nodes[i][v];
      dec[nv] = parts[i]->dec[v];
      source_pos[nv] = pos++;
      par_src.push_back(pp[v]);
    }
  }
  if (static_cast<size_t>(pos) != total)
    throw std::logic_error("graft_terms: factor bookkeeping mismatch");

  std::vector<int> order(total);
  for (size_t v = 0; v < total; ++v) order[v] = source_pos[v];
  Rat sign = koszul_reorder_sign(par_src, order);
  return normalize_term(composite, g.tree, dec, coeff * sign);
}

}  // namespace operadkit
