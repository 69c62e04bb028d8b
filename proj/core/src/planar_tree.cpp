#include "operadkit/planar_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace operadkit {

bool PlanarTree::has_marks() const {
  for (char m : marks)
    if (m) return true;
  return false;
}

PlanarTree PlanarTree::corolla(int n, bool mark) {
  PlanarTree t;
  t.leaf_count = n;
  Node root;
  for (int i = 1; i <= n; ++i) root.kids.push_back(-i);
  t.nodes.push_back(std::move(root));
  if (mark) t.marks.assign(1, 1);
  return t;
}

void PlanarTree::renumber_preorder() {
  if (nodes.empty()) return;
  std::vector<int> order;  // old index in preorder
  order.reserve(nodes.size());
  std::function<void(int)> walk = [&](int v) {
    order.push_back(v);
    for (int kid : nodes[v].kids)
      if (kid >= 0) walk(kid);
  };
  walk(0);
  std::vector<int> new_of_old(nodes.size(), -1);
  for (size_t i = 0; i < order.size(); ++i) new_of_old[order[i]] = static_cast<int>(i);
  std::vector<Node> nn(order.size());
  std::vector<char> nm;
  if (!marks.empty()) nm.assign(order.size(), 0);
  for (size_t i = 0; i < order.size(); ++i) {
    const Node& src = nodes[order[i]];
    Node dst;
    for (int kid : src.kids) dst.kids.push_back(kid >= 0 ? new_of_old[kid] : kid);
    nn[i] = std::move(dst);
    if (!marks.empty()) nm[i] = marks[order[i]];
  }
  nodes = std::move(nn);
  marks = std::move(nm);
}

int PlanarTree::min_leaf_of_kid(int kid) const {
  if (kid < 0) return -kid;
  int best = leaf_count + 1;
  for (int k : nodes[kid].kids) best = std::min(best, min_leaf_of_kid(k));
  return best;
}

std::vector<int> PlanarTree::leaves_under(int v) const {
  std::vector<int> out;
  std::function<void(int)> walk = [&](int kid) {
    if (kid < 0) {
      out.push_back(-kid);
      return;
    }
    for (int k : nodes[kid].kids) walk(k);
  };
  for (int k : nodes[v].kids) walk(k);
  return out;
}

std::vector<int> PlanarTree::depths() const {
  std::vector<int> d(nodes.size(), 0);
  std::function<void(int, int)> walk = [&](int v, int depth) {
    d[v] = depth;
    for (int kid : nodes[v].kids)
      if (kid >= 0) walk(kid, depth + 1);
  };
  if (!nodes.empty()) walk(0, 0);
  return d;
}

void PlanarTree::relabel(const std::vector<int>& image) {
  for (auto& node : nodes)
    for (int& kid : node.kids)
      if (kid < 0) kid = -image[-kid - 1];
}

bool PlanarTree::is_shuffle_ordered() const {
  for (const auto& node : nodes) {
    int prev = 0;
    for (int kid : node.kids) {
      int m = min_leaf_of_kid(kid);
      if (m <= prev) return false;
      prev = m;
    }
  }
  return true;
}

std::string PlanarTree::encode() const {
  std::ostringstream os;
  os << "n" << leaf_count;
  std::function<void(int)> walk = [&](int kid) {
    if (kid < 0) {
      os << -kid;
      return;
    }
    os << (marked(kid) ? "{" : "(");
    for (size_t i = 0; i < nodes[kid].kids.size(); ++i) {
      if (i) os << ",";
      walk(nodes[kid].kids[i]);
    }
    os << (marked(kid) ? "}" : ")");
  };
  os << ":";
  if (nodes.empty())
    os << "1";
  else
    walk(0);
  return os.str();
}

RawPlanar to_raw(const PlanarTree& t) {
  RawPlanar raw;
  raw.leaf_count = t.leaf_count;
  if (t.is_bare_leaf()) {
    raw.target = {0};       // degenerate: single leaf pointing at itself
    raw.leaf_label = {1};
    return raw;
  }
  // Breadth-first by depth, kids in planar order; elements are nodes and leaves.
  struct Elem {
    int node;   // -1 for leaf
    int label;  // leaf label, 0 for nodes
    int parent_node;
  };
  std::vector<Elem> elems;
  std::vector<Elem> frontier = {{0, 0, -1}};
  while (!frontier.empty()) {
    std::vector<Elem> next;
    for (const auto& e : frontier) {
      elems.push_back(e);
      if (e.node >= 0)
        for (int kid : t.nodes[e.node].kids) {
          if (kid >= 0)
            next.push_back({kid, 0, e.node});
          else
            next.push_back({-1, -kid, e.node});
        }
    }
    frontier = std::move(next);
  }
  std::vector<int> elem_of_node(t.nodes.size(), -1);
  for (size_t i = 0; i < elems.size(); ++i)
    if (elems[i].node >= 0) elem_of_node[elems[i].node] = static_cast<int>(i);
  raw.target.resize(elems.size());
  raw.leaf_label.resize(elems.size());
  for (size_t i = 0; i < elems.size(); ++i) {
    raw.leaf_label[i] = elems[i].label;
    raw.target[i] = elems[i].parent_node < 0 ? static_cast<int>(i)
                                             : elem_of_node[elems[i].parent_node];
  }
  return raw;
}

ValidationReport validate_planar(const RawPlanar& raw, bool require_reduced,
                                 bool require_canonical) {
  ValidationReport rep;
  const int m = static_cast<int>(raw.target.size());
  if (static_cast<int>(raw.leaf_label.size()) != m) {
    rep.fail("target and leaf_label sizes differ");
    return rep;
  }
  std::vector<int> labels;
  for (int l : raw.leaf_label)
    if (l != 0) labels.push_back(l);
  if (static_cast<int>(labels.size()) != raw.leaf_count)
    rep.fail("leaf count does not match labeled elements");
  std::set<int> lab(labels.begin(), labels.end());
  if (static_cast<int>(lab.size()) != static_cast<int>(labels.size()) ||
      (!labels.empty() && (*lab.begin() != 1 || *lab.rbegin() != raw.leaf_count)))
    rep.fail("leaf labels are not a permutation of 1..n");

  int root = -1;
  for (int e = 0; e < m; ++e) {
    if (raw.target[e] < 0 || raw.target[e] >= m) {
      rep.fail("target out of range");
      return rep;
    }
    if (raw.leaf_label[raw.target[e]] != 0) rep.fail("target of an element is a leaf");
    if (raw.target[e] == e) {
      if (raw.leaf_label[e] != 0) rep.fail("root is a leaf");
      if (root >= 0)
        rep.fail("more than one target fixpoint");
      else
        root = e;
    }
  }
  if (root < 0) {
    rep.fail("no root (no target fixpoint)");
    return rep;
  }
  for (int e = 1; e < m; ++e)
    if (raw.target[e] < raw.target[e - 1]) {
      rep.fail("target map is not non-decreasing for the total order");
      break;
    }
  for (int e = 0; e < m; ++e) {
    int cur = e, steps = 0;
    while (cur != root && steps <= m) {
      cur = raw.target[cur];
      ++steps;
    }
    if (cur != root) {
      rep.fail("element does not reach the root under iterated target");
      break;
    }
  }
  if (require_reduced) {
    std::vector<int> arity(m, 0);
    for (int e = 0; e < m; ++e)
      if (e != root) ++arity[raw.target[e]];
    for (int e = 0; e < m; ++e)
      if (raw.leaf_label[e] == 0 && arity[e] < 2) {
        rep.fail("vertex of arity < 2 in a reduced tree");
        break;
      }
  }
  if (require_canonical && rep.ok()) {
    // Rebuild child lists; compare minimal leaf labels of consecutive siblings.
    std::vector<std::vector<int>> kids(m);
    for (int e = 0; e < m; ++e)
      if (e != root) kids[raw.target[e]].push_back(e);
    std::function<int(int)> min_leaf = [&](int e) -> int {
      if (raw.leaf_label[e] != 0) return raw.leaf_label[e];
      int best = raw.leaf_count + 1;
      for (int k : kids[e]) best = std::min(best, min_leaf(k));
      return best;
    };
    for (int e = 0; e < m; ++e) {
      int prev = 0;
      for (int k : kids[e]) {
        int ml = min_leaf(k);
        if (ml <= prev) {
          rep.fail("children not ordered by minimal leaf label");
          break;
        }
        prev = ml;
      }
    }
  }
  return rep;
}

bool marks_are_section(const PlanarTree& t) {
  if (t.is_bare_leaf()) return false;
  bool ok = true;
  std::function<void(int, int)> walk = [&](int kid, int seen) {
    if (kid < 0) {
      if (seen != 1) ok = false;
      return;
    }
    int now = seen + (t.marked(kid) ? 1 : 0);
    if (now > 1) {
      ok = false;
      return;
    }
    for (int k : t.nodes[kid].kids) walk(k, now);
  };
  walk(0, 0);
  return ok;
}

// ---- enumeration ----

namespace {

// All ordered partitions of the labels into k >= min_blocks blocks sorted by
// their minimum, via restricted-growth assignment.
void block_partitions(const std::vector<int>& labels, int min_block_count,
                      const std::function<void(const std::vector<std::vector<int>>&)>& emit) {
  const int n = static_cast<int>(labels.size());
  std::vector<int> assign(n, 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      if (used < min_block_count) return;
      std::vector<std::vector<int>> blocks(used);
      for (int j = 0; j < n; ++j) blocks[assign[j]].push_back(labels[j]);
      emit(blocks);
      return;
    }
    for (int b = 0; b <= used; ++b) {
      assign[i] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  if (n > 0) rec(0, 0);
}

// Root vertex over child entries that may be labeled leaves or subtrees.
PlanarTree assemble_mixed(const std::vector<std::pair<int, PlanarTree>>& kids_in,
                          bool mark_root, int leaf_total) {
  PlanarTree t;
  t.leaf_count = leaf_total;
  bool any_marks = mark_root;
  for (const auto& [lab, s] : kids_in)
    if (lab == 0) any_marks = any_marks || s.has_marks();
  t.nodes.push_back({});
  if (any_marks) t.marks.assign(1, mark_root ? 1 : 0);
  for (const auto& [lab, s] : kids_in) {
    if (lab != 0) {
      t.nodes[0].kids.push_back(-lab);
      continue;
    }
    int base = static_cast<int>(t.nodes.size());
    for (size_t i = 0; i < s.nodes.size(); ++i) {
      PlanarTree::Node node;
      for (int kid : s.nodes[i].kids)
        node.kids.push_back(kid >= 0 ? kid + base : kid);
      t.nodes.push_back(std::move(node));
      if (any_marks) t.marks.push_back(s.marked(static_cast<int>(i)) ? 1 : 0);
    }
    t.nodes[0].kids.push_back(base);
  }
  return t;
}

// All shuffle subtrees with a root vertex over the given sorted label set.
std::vector<PlanarTree> shuffle_subtrees(const std::vector<int>& labels) {
  std::vector<PlanarTree> out;
  if (labels.size() < 2) return out;
  block_partitions(labels, 2, [&](const std::vector<std::vector<int>>& blocks) {
    // Each block becomes a kid: a leaf when singleton, otherwise a subtree.
    std::vector<std::vector<std::pair<int, PlanarTree>>> choices(blocks.size());
    for (size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].size() == 1) {
        choices[b].push_back({blocks[b][0], PlanarTree()});
      } else {
        for (auto& s : shuffle_subtrees(blocks[b])) choices[b].push_back({0, s});
      }
    }
    std::vector<std::pair<int, PlanarTree>> pick(blocks.size());
    std::function<void(size_t)> rec = [&](size_t b) {
      if (b == blocks.size()) {
        int total = 0;
        for (const auto& [lab, s] : pick) total += (lab != 0) ? 1 : s.leaf_count;
        out.push_back(assemble_mixed(pick, false, total));
        return;
      }
      for (const auto& c : choices[b]) {
        pick[b] = c;
        rec(b + 1);
      }
    };
    rec(0);
  });
  return out;
}

// Marked shuffle subtrees: every leaf-to-root path meets exactly one mark.
std::vector<PlanarTree> marked_subtrees(const std::vector<int>& labels) {
  std::vector<PlanarTree> out;
  // (a) marked root with k >= 1 plain children
  block_partitions(labels, 1, [&](const std::vector<std::vector<int>>& blocks) {
    std::vector<std::vector<std::pair<int, PlanarTree>>> choices(blocks.size());
    for (size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].size() == 1) choices[b].push_back({blocks[b][0], PlanarTree()});
      for (auto& s : shuffle_subtrees(blocks[b])) choices[b].push_back({0, s});
    }
    std::vector<std::pair<int, PlanarTree>> pick(blocks.size());
    std::function<void(size_t)> rec = [&](size_t b) {
      if (b == blocks.size()) {
        out.push_back(assemble_mixed(pick, true, static_cast<int>(labels.size())));
        return;
      }
      for (const auto& c : choices[b]) {
        pick[b] = c;
        rec(b + 1);
      }
    };
    rec(0);
  });
  // (b) unmarked root, k >= 2 marked children (no leaf children below the section)
  if (labels.size() >= 2) {
    block_partitions(labels, 2, [&](const std::vector<std::vector<int>>& blocks) {
      std::vector<std::vector<PlanarTree>> choices(blocks.size());
      for (size_t b = 0; b < blocks.size(); ++b) choices[b] = marked_subtrees(blocks[b]);
      std::vector<std::pair<int, PlanarTree>> pick(blocks.size());
      std::function<void(size_t)> rec = [&](size_t b) {
        if (b == blocks.size()) {
          out.push_back(assemble_mixed(pick, false, static_cast<int>(labels.size())));
          return;
        }
        for (const auto& c : choices[b]) {
          pick[b] = {0, c};
          rec(b + 1);
        }
      };
      rec(0);
    });
  }
  return out;
}

void shapes_rec(int n, std::vector<PlanarTree>& out);

// Child entry choices for a composition part of the given size.
std::vector<std::pair<int, PlanarTree>> shape_part_choices(int size, int label_from) {
  std::vector<std::pair<int, PlanarTree>> out;
  if (size == 1) {
    out.push_back({label_from, PlanarTree()});
    return out;
  }
  std::vector<PlanarTree> subs;
  shapes_rec(size, subs);
  for (auto& s : subs) {
    PlanarTree t = s;
    std::vector<int> image(size);
    for (int i = 0; i < size; ++i) image[i] = label_from + i;
    t.relabel(image);
    t.leaf_count = size;  // labels now label_from..; leaf_count stays logical size
    out.push_back({0, t});
  }
  return out;
}

void shapes_rec(int n, std::vector<PlanarTree>& out) {
  // Reduced planar shapes with leaves labeled 1..n in planar order.
  out.clear();
  if (n < 2) return;
  std::vector<int> comp;
  std::function<void(int)> rec_comp = [&](int rest) {
    if (rest == 0) {
      if (comp.size() < 2) return;
      std::vector<std::vector<std::pair<int, PlanarTree>>> choices(comp.size());
      int from = 1;
      for (size_t b = 0; b < comp.size(); ++b) {
        choices[b] = shape_part_choices(comp[b], from);
        from += comp[b];
      }
      std::vector<std::pair<int, PlanarTree>> pick(comp.size());
      std::function<void(size_t)> rec = [&](size_t b) {
        if (b == comp.size()) {
          out.push_back(assemble_mixed(pick, false, n));
          return;
        }
        for (const auto& c : choices[b]) {
          pick[b] = c;
          rec(b + 1);
        }
      };
      rec(0);
      return;
    }
    for (int part = 1; part <= rest; ++part) {
      comp.push_back(part);
      rec_comp(rest - part);
      comp.pop_back();
    }
  };
  rec_comp(n);
}

}  // namespace

std::vector<PlanarTree> enumerate_planar_shapes(int n) {
  if (n < 2) throw std::invalid_argument("planar shapes need arity >= 2");
  std::vector<PlanarTree> out;
  shapes_rec(n, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PlanarTree> enumerate_planar_labeled(int n) {
  if (n < 2) throw std::invalid_argument("labeled planar trees need arity >= 2");
  std::vector<PlanarTree> shapes = enumerate_planar_shapes(n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<PlanarTree> out;
  do {
    for (const auto& s : shapes) {
      PlanarTree t = s;
      t.relabel(perm);
      out.push_back(std::move(t));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PlanarTree> enumerate_shuffle_trees(int n) {
  if (n < 2) throw std::invalid_argument("shuffle trees need arity >= 2");
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 1);
  auto out = shuffle_subtrees(labels);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PlanarTree> enumerate_marked_shuffle_trees(int n) {
  if (n < 1) throw std::invalid_argument("marked trees need arity >= 1");
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 1);
  auto out = marked_subtrees(labels);
  std::sort(out.begin(), out.end());
  return out;
}

// ---- composition ----

Graft graft_gamma(const PlanarTree& outer, const std::vector<PlanarTree>& parts) {
  if (static_cast<int>(parts.size()) != outer.leaf_count)
    throw std::invalid_argument("graft_gamma: arity mismatch");
  std::vector<int> offset(parts.size() + 1, 0);
  for (size_t i = 0; i < parts.size(); ++i)
    offset[i + 1] = offset[i] + parts[i].leaf_count;

  Graft g;
  g.tree.leaf_count = offset[parts.size()];
  g.outer_nodes.assign(outer.nodes.size(), -1);
  g.part_nodes.resize(parts.size());
  bool any_marks = outer.has_marks();
  for (const auto& p : parts) any_marks = any_marks || p.has_marks();

  std::function<int(int, const PlanarTree&, std::vector<int>&, int)> copy_part =
      [&](int v, const PlanarTree& p, std::vector<int>& node_map, int off) -> int {
    int idx = static_cast<int>(g.tree.nodes.size());
    g.tree.nodes.push_back({});
    if (any_marks) g.tree.marks.push_back(p.marked(v) ? 1 : 0);
    node_map[v] = idx;
    for (int kid : p.nodes[v].kids) {
      if (kid >= 0) {
        int child = copy_part(kid, p, node_map, off);
        g.tree.nodes[idx].kids.push_back(child);
      } else {
        g.tree.nodes[idx].kids.push_back(-(off + (-kid)));
      }
    }
    return idx;
  };

  std::function<int(int)> copy_outer = [&](int v) -> int {
    int idx = static_cast<int>(g.tree.nodes.size());
    g.tree.nodes.push_back({});
    if (any_marks) g.tree.marks.push_back(outer.marked(v) ? 1 : 0);
    g.outer_nodes[v] = idx;
    for (int kid : outer.nodes[v].kids) {
      if (kid >= 0) {
        int child = copy_outer(kid);
        g.tree.nodes[idx].kids.push_back(child);
      } else {
        int slot = -kid - 1;  // graft by the leaf label
        const PlanarTree& p = parts[slot];
        if (p.is_bare_leaf()) {
          g.tree.nodes[idx].kids.push_back(-(offset[slot] + 1));
        } else {
          g.part_nodes[slot].assign(p.nodes.size(), -1);
          int child = copy_part(0, p, g.part_nodes[slot], offset[slot]);
          g.tree.nodes[idx].kids.push_back(child);
        }
      }
    }
    return idx;
  };

  if (outer.is_bare_leaf()) {
    // unit outer: the single part is the answer
    const PlanarTree& p = parts[0];
    g.tree = p;
    if (!p.is_bare_leaf()) {
      g.part_nodes[0].resize(p.nodes.size());
      std::iota(g.part_nodes[0].begin(), g.part_nodes[0].end(), 0);
    }
    return g;
  }
  copy_outer(0);
  return g;
}

namespace {

// Candidate subtree roots whose leaf set is exactly `want`, ordered from
// closest-to-root outward (candidates form a chain).
std::vector<int> cut_candidates(const PlanarTree& t, const std::set<int>& want) {
  std::vector<int> out;
  for (size_t v = 0; v < t.nodes.size(); ++v) {
    auto lv = t.leaves_under(static_cast<int>(v));
    if (lv.size() != want.size()) continue;
    if (std::set<int>(lv.begin(), lv.end()) == want) out.push_back(static_cast<int>(v));
  }
  auto depth = t.depths();
  std::sort(out.begin(), out.end(), [&](int a, int b) { return depth[a] < depth[b]; });
  return out;
}

// Extracts the subtree rooted at v as a standalone tree, relabeling its leaves
// order-preservingly to 1..m; records the node correspondence.
PlanarTree extract_subtree(const PlanarTree& t, int v, std::vector<int>* node_map) {
  auto leaves = t.leaves_under(v);
  std::vector<int> sorted(leaves);
  std::sort(sorted.begin(), sorted.end());
  std::map<int, int> new_label;
  for (size_t i = 0; i < sorted.size(); ++i) new_label[sorted[i]] = static_cast<int>(i) + 1;

  PlanarTree out;
  out.leaf_count = static_cast<int>(leaves.size());
  bool any_marks = t.has_marks();
  std::function<int(int)> copy = [&](int u) -> int {
    int idx = static_cast<int>(out.nodes.size());
    out.nodes.push_back({});
    if (any_marks) out.marks.push_back(t.marked(u) ? 1 : 0);
    if (node_map) node_map->push_back(u);
    for (int kid : t.nodes[u].kids) {
      if (kid >= 0) {
        int child = copy(kid);
        out.nodes[idx].kids.push_back(child);
      } else {
        out.nodes[idx].kids.push_back(-new_label[-kid]);
      }
    }
    return idx;
  };
  copy(v);
  if (!out.has_marks()) out.marks.clear();
  return out;
}

// Replaces the subtrees at `cut[i]` (or, for unit slots, the single leaf of the
// block) by leaves labeled i+1. cut[i] < 0 marks a unit slot.
PlanarTree collapse_outer(const PlanarTree& t, const std::vector<int>& cut,
                          const std::vector<std::set<int>>& blocks,
                          std::vector<int>* node_map) {
  std::vector<int> slot_of_node(t.nodes.size(), -1);
  std::map<int, int> slot_of_unit_leaf;
  for (size_t i = 0; i < cut.size(); ++i) {
    if (cut[i] >= 0)
      slot_of_node[cut[i]] = static_cast<int>(i);
    else
      slot_of_unit_leaf[*blocks[i].begin()] = static_cast<int>(i);
  }
  PlanarTree out;
  out.leaf_count = static_cast<int>(cut.size());
  bool any_marks = t.has_marks();
  std::function<int(int)> copy = [&](int u) -> int {
    int idx = static_cast<int>(out.nodes.size());
    out.nodes.push_back({});
    if (any_marks) out.marks.push_back(t.marked(u) ? 1 : 0);
    if (node_map) node_map->push_back(u);
    for (int kid : t.nodes[u].kids) {
      if (kid >= 0) {
        int slot = slot_of_node[kid];
        int entry = slot >= 0 ? -(slot + 1) : copy(kid);
        out.nodes[idx].kids.push_back(entry);
      } else {
        auto it = slot_of_unit_leaf.find(-kid);
        if (it == slot_of_unit_leaf.end())
          throw std::logic_error("collapse_outer: leaf outside every block");
        out.nodes[idx].kids.push_back(-(it->second + 1));
      }
    }
    return idx;
  };
  copy(0);
  if (!out.has_marks()) out.marks.clear();
  return out;
}

std::vector<std::set<int>> label_blocks(const std::vector<int>& partition) {
  std::vector<std::set<int>> blocks;
  int next = 1;
  for (int sz : partition) {
    if (sz < 1) throw std::invalid_argument("partition parts must be >= 1");
    std::set<int> b;
    for (int j = 0; j < sz; ++j) b.insert(next++);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

}  // namespace

std::optional<Splitting> split_gamma(const PlanarTree& t, const std::vector<int>& partition) {
  if (t.has_marks()) throw std::invalid_argument("split_gamma: unmarked trees only");
  auto blocks = label_blocks(partition);
  int total = 0;
  for (int sz : partition) total += sz;
  if (total != t.leaf_count) throw std::invalid_argument("partition does not sum to arity");
  if (partition.size() < 2) throw std::invalid_argument("partition needs k >= 2");

  Splitting s;
  std::vector<int> cut(partition.size(), -1);
  for (size_t i = 0; i < partition.size(); ++i) {
    if (partition[i] == 1) continue;  // unit slot
    auto cand = cut_candidates(t, blocks[i]);
    if (cand.empty()) return std::nullopt;
    cut[i] = cand.front();
  }
  s.parts.resize(partition.size());
  s.part_nodes.resize(partition.size());
  for (size_t i = 0; i < partition.size(); ++i) {
    if (cut[i] < 0) {
      s.parts[i] = PlanarTree::bare_leaf();
    } else {
      s.parts[i] = extract_subtree(t, cut[i], &s.part_nodes[i]);
    }
  }
  s.outer = collapse_outer(t, cut, blocks, &s.outer_nodes);
  return s;
}

std::optional<Splitting> split_gamma_left(const PlanarTree& t, const std::vector<int>& partition) {
  auto blocks = label_blocks(partition);
  int total = 0;
  for (int sz : partition) total += sz;
  if (total != t.leaf_count) throw std::invalid_argument("partition does not sum to arity");
  if (!marks_are_section(t)) return std::nullopt;

  Splitting s;
  std::vector<int> cut(partition.size(), -1);
  for (size_t i = 0; i < partition.size(); ++i) {
    auto cand = cut_candidates(t, blocks[i]);
    if (cand.empty()) return std::nullopt;
    cut[i] = cand.front();  // lowest: keeps the marks inside the part
  }
  s.parts.resize(partition.size());
  s.part_nodes.resize(partition.size());
  for (size_t i = 0; i < partition.size(); ++i) {
    s.parts[i] = extract_subtree(t, cut[i], &s.part_nodes[i]);
    if (!marks_are_section(s.parts[i])) return std::nullopt;
  }
  s.outer = collapse_outer(t, cut, blocks, &s.outer_nodes);
  if (s.outer.has_marks()) return std::nullopt;
  s.outer.marks.clear();
  return s;
}

std::optional<Splitting> split_gamma_right(const PlanarTree& t, const std::vector<int>& partition) {
  auto blocks = label_blocks(partition);
  int total = 0;
  for (int sz : partition) total += sz;
  if (total != t.leaf_count) throw std::invalid_argument("partition does not sum to arity");
  if (!marks_are_section(t)) return std::nullopt;

  Splitting s;
  std::vector<int> cut(partition.size(), -1);
  for (size_t i = 0; i < partition.size(); ++i) {
    if (partition[i] == 1) continue;
    auto cand = cut_candidates(t, blocks[i]);
    int pick = -1;
    for (int v : cand) {
      std::vector<int> nm;
      PlanarTree sub = extract_subtree(t, v, &nm);
      if (!sub.has_marks()) {
        pick = v;
        break;
      }
    }
    if (pick < 0) return std::nullopt;
    cut[i] = pick;
  }
  s.parts.resize(partition.size());
  s.part_nodes.resize(partition.size());
  for (size_t i = 0; i < partition.size(); ++i) {
    if (cut[i] < 0) {
      s.parts[i] = PlanarTree::bare_leaf();
    } else {
      s.parts[i] = extract_subtree(t, cut[i], &s.part_nodes[i]);
      s.parts[i].marks.clear();
    }
  }
  s.outer = collapse_outer(t, cut, blocks, &s.outer_nodes);
  if (!marks_are_section(s.outer)) return std::nullopt;
  return s;
}

}  // namespace operadkit
