#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "operadkit/planar_tree.hpp"
#include "operadkit/report.hpp"

namespace operadkit {

/// Leveled tree: a chain of non-decreasing surjections
///   [n] ->> V_h ->> ... ->> V_0 = {root}
/// with a leaf labeling. maps[j] is t_j : V_{j+1} -> V_j as an index list
/// (maps[h] has length n, the leaf line). Level sizes grow strictly upward.
struct LeveledTree {
  std::vector<int> labels;             // labels[p] = label of the leaf at planar position p
  std::vector<std::vector<int>> maps;  // maps[j] = t_j, j = 0..h

  int leaf_count() const { return static_cast<int>(labels.size()); }
  int height() const { return static_cast<int>(maps.size()) - 1; }
  int level_size(int i) const;         // |V_i|, 0 <= i <= height()
  int arity(int level, int pos) const; // preimage count under t_level
  int parent(int level, int pos) const { return maps[level - 1][pos]; }  // level >= 1

  static LeveledTree corolla(int n);

  std::string encode() const;
  auto operator<=>(const LeveledTree&) const = default;
};

/// Leveled tree with a marked section level; t_j must be non-bijective for j != section.
struct SectionedTree {
  LeveledTree tree;
  int section = 0;

  std::string encode() const;
  auto operator<=>(const SectionedTree&) const = default;
};

ValidationReport validate_leveled(const LeveledTree& t);
ValidationReport validate_sectioned(const SectionedTree& t);

// ---- serialization ----
// Text form: levels=[|V_h|,...,1]; maps=[t_h,...,t_0]; labels=sigma; section=i?
std::string to_text(const LeveledTree& t);
std::string to_text(const SectionedTree& t);
LeveledTree leveled_from_text(const std::string& s);
SectionedTree sectioned_from_text(const std::string& s);
std::string to_json(const LeveledTree& t);
std::string to_json(const SectionedTree& t);
LeveledTree leveled_from_json(const std::string& s);
SectionedTree sectioned_from_json(const std::string& s);

// ---- enumeration ----
std::vector<LeveledTree> enumerate_leveled(int n);     // n >= 2
std::vector<SectionedTree> enumerate_sectioned(int n); // n >= 1

// ---- morphisms ----

/// Generator morphisms of the leveled-tree categories.
struct TreeMorphismStep {
  struct Iso { std::vector<int> relabel; };  // label l -> relabel[l-1]
  struct Contract { int from = 0; int to = 0; };  // inclusive level interval
  struct Permute { int level = 0; };
  std::variant<Iso, Contract, Permute> step;
};

bool is_permutable(const LeveledTree& t, int i);     // 1 <= i < height
bool is_permutable(const SectionedTree& t, int i);   // additionally section not in {i, i+1}

/// Correspondence data carried along a level permutation, enough to transport
/// tensor decorations: where each arity->=2 vertex went and the level swap.
struct PermuteResult {
  LeveledTree tree;
  // (level, pos) of each big vertex of the input, paired with its image.
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> big_vertex_map;
};

PermuteResult permute(const LeveledTree& t, int i);
SectionedTree permute(const SectionedTree& t, int i);

/// Contraction of the level interval [from, to]; rejects invalid results.
std::optional<LeveledTree> contract(const LeveledTree& t, int from, int to);
std::optional<SectionedTree> contract(const SectionedTree& t, int from, int to);

LeveledTree apply_step(const LeveledTree& t, const TreeMorphismStep& s);

// ---- comparison with planar trees ----

PlanarTree alpha(const LeveledTree& t);
/// Marked planar class of a sectioned tree (section vertices kept and marked).
PlanarTree canonical_class(const SectionedTree& t);
inline PlanarTree canonical_class(const LeveledTree& t) { return alpha(t); }

/// Section of alpha: one arity->=2 vertex per level, in depth-then-left order.
LeveledTree beta(const PlanarTree& p);
/// Sectioned representative of a marked planar class: all marked vertices on
/// one level, one arity->=2 vertex per other level.
SectionedTree sectioned_beta(const PlanarTree& marked);

/// Positions of the arity->=2 vertices of t as (level, pos), in (level, pos)
/// order, paired with the preorder index of the corresponding node of
/// canonical_class(t). For sectioned trees all section vertices count.
std::vector<std::pair<std::pair<int, int>, int>> big_vertex_class_nodes(const LeveledTree& t);
std::vector<std::pair<std::pair<int, int>, int>> big_vertex_class_nodes(const SectionedTree& t);

// ---- composition ----

/// Partial composition: grafts `part` into the leaf of t labeled `label`.
LeveledTree circ(const LeveledTree& t, int label, const LeveledTree& part);

/// Total composition; bare std::nullopt slots act as unit (graft nothing).
LeveledTree gamma(const LeveledTree& t, const std::vector<std::optional<LeveledTree>>& parts);
inline LeveledTree gamma(const LeveledTree& t, const std::vector<LeveledTree>& parts) {
  std::vector<std::optional<LeveledTree>> ps(parts.begin(), parts.end());
  return gamma(t, ps);
}

/// Right module operation: section index carried unchanged.
SectionedTree gamma_right(const SectionedTree& t,
                          const std::vector<std::optional<LeveledTree>>& parts);

/// Left module operation over sectioned parts.
SectionedTree gamma_left(const LeveledTree& t, const std::vector<SectionedTree>& parts);

/// Structural bookkeeping of a composition, enough to redistribute decorations
/// and level forms. Blocks: -1 the head, i >= 0 part i; a slot source block of
/// -2 marks a level evaluated away by the costructure.
struct ComposeProvenance {
  std::map<std::pair<int, int>, std::tuple<int, int, int>> vertex_src;
  std::map<int, std::pair<int, int>> slot_src;  // composite level -> (block, source level)
};

LeveledTree gamma_prov(const LeveledTree& t, const std::vector<std::optional<LeveledTree>>& parts,
                       ComposeProvenance* prov);
SectionedTree gamma_left_prov(const LeveledTree& t, const std::vector<SectionedTree>& parts,
                              ComposeProvenance* prov);

}  // namespace operadkit
