#pragma once

#include <optional>
#include <string>
#include <vector>

#include "operadkit/report.hpp"

namespace operadkit {

/// Rooted planar tree with labeled leaves, in canonical preorder numbering.
/// Vertices may carry marks (used for the section structure of bimodule-style
/// trees); in an unmarked reduced tree every vertex has arity >= 2, while
/// marked vertices may have arity 1. The bare leaf (no vertices, leaf_count 1)
/// stands for the unit slot of compositions.
struct PlanarTree {
  struct Node {
    // kid >= 0: child node index; kid < 0: leaf with label (-kid).
    std::vector<int> kids;
    auto operator<=>(const Node&) const = default;
  };

  int leaf_count = 0;
  std::vector<Node> nodes;  // preorder; nodes[0] is the root when nonempty
  std::vector<char> marks;  // per node, empty when the tree carries no marks

  bool is_bare_leaf() const { return nodes.empty(); }
  bool has_marks() const;
  bool marked(int v) const { return !marks.empty() && marks[v] != 0; }
  int arity_of(int v) const { return static_cast<int>(nodes[v].kids.size()); }

  static PlanarTree bare_leaf() { return PlanarTree{1, {}, {}}; }
  static PlanarTree corolla(int n, bool mark = false);

  /// Rebuilds preorder numbering; all public trees keep this normal form.
  void renumber_preorder();

  /// Smallest leaf label within the subtree rooted at the given kid entry.
  int min_leaf_of_kid(int kid) const;
  /// Leaf labels of the subtree at node v, in planar order.
  std::vector<int> leaves_under(int v) const;
  /// Depth of every node (root = 0).
  std::vector<int> depths() const;
  /// Applies f to every leaf label.
  void relabel(const std::vector<int>& image);  // label l -> image[l-1]

  /// True if at every vertex the child subtrees are ordered by minimal leaf label.
  bool is_shuffle_ordered() const;

  std::string encode() const;

  auto operator<=>(const PlanarTree&) const = default;
};

/// The formal element-list form of a planar tree: elements are vertices and
/// leaves in one total order; target maps every element to a vertex.
struct RawPlanar {
  int leaf_count = 0;
  std::vector<int> target;      // per element, index of target element
  std::vector<int> leaf_label;  // 0 for vertices, else the leaf label
};

/// Total validation of candidate planar data. `require_reduced` additionally
/// checks arity >= 2 at unmarked vertices, `require_canonical` the shuffle order.
ValidationReport validate_planar(const RawPlanar& raw, bool require_reduced = true,
                                 bool require_canonical = false);

/// Element-list form of a canonical tree (depth-major order).
RawPlanar to_raw(const PlanarTree& t);

/// Marked trees: true when every leaf-to-root path meets exactly one marked vertex.
bool marks_are_section(const PlanarTree& t);

// ---- enumeration ----

/// Reduced planar tree shapes (labels fixed to 1..n in planar order).
std::vector<PlanarTree> enumerate_planar_shapes(int n);
/// All labeled reduced planar trees with leaves 1..n.
std::vector<PlanarTree> enumerate_planar_labeled(int n);
/// Shuffle trees: labeled reduced trees in shuffle normal form.
std::vector<PlanarTree> enumerate_shuffle_trees(int n);
/// Shuffle-ordered marked trees whose marks form a section (n >= 1).
std::vector<PlanarTree> enumerate_marked_shuffle_trees(int n);

// ---- composition on canonical classes ----

struct Graft {
  PlanarTree tree;
  std::vector<int> outer_nodes;               // outer node index -> grafted node index
  std::vector<std::vector<int>> part_nodes;   // part i node index -> grafted node index
};

/// gamma on planar classes: grafts parts[i] (or nothing, for bare-leaf units)
/// onto the leaf of `outer` labeled i+1, with block relabeling. Output is NOT
/// re-sorted; callers needing shuffle form normalize afterwards.
Graft graft_gamma(const PlanarTree& outer, const std::vector<PlanarTree>& parts);

struct Splitting {
  PlanarTree outer;
  std::vector<PlanarTree> parts;
  std::vector<int> outer_nodes;              // outer node -> original node (-1 for none)
  std::vector<std::vector<int>> part_nodes;  // part node -> original node
};

/// Unique decomposition of a class as gamma(outer; parts) along consecutive
/// label blocks of the given sizes, if it exists. Unmarked trees only.
std::optional<Splitting> split_gamma(const PlanarTree& t, const std::vector<int>& partition);
/// Marked tree as gamma_L(plain outer; marked parts).
std::optional<Splitting> split_gamma_left(const PlanarTree& t, const std::vector<int>& partition);
/// Marked tree as gamma_R(marked outer; plain parts).
std::optional<Splitting> split_gamma_right(const PlanarTree& t, const std::vector<int>& partition);

}  // namespace operadkit
