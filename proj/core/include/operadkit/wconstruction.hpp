#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "operadkit/constructions.hpp"
#include "operadkit/leveled_tree.hpp"
#include "operadkit/polyform.hpp"
#include "operadkit/presentation.hpp"
#include "operadkit/report.hpp"

namespace operadkit {

/// Leveled tree with an optional section (section = -1 for the cooperad case).
struct WTree {
  LeveledTree chain;
  int section = -1;
  bool sectioned() const { return section >= 0; }
  auto operator<=>(const WTree&) const = default;
};

/// One monomial level form t^a or t^a dt.
struct WMono {
  int tpow = 0;
  bool dt = false;
  auto operator<=>(const WMono&) const = default;
  PolyForm form() const { return PolyForm::monomial(tpow, dt); }
};

/// Basis key of a decoration on one tree: the decorated vertices in
/// (level, position) order and one monomial per form slot.
struct WKey {
  std::vector<int> dec;
  std::vector<WMono> forms;
  auto operator<=>(const WKey&) const = default;
};
using WDec = std::map<WKey, Rat>;

WDec wdec_sum(const WDec& a, const WDec& b);
WDec wdec_scale(const WDec& a, const Rat& c);

/// Inputs of a W construction: the cooperad C (cooperad case) or the triple
/// (P, M, Q) with M a (P-Q)-cobimodule.
struct WContext {
  std::shared_ptr<const Presentation> below;  // C, or P
  std::shared_ptr<const Presentation> mid;    // M (sectioned case only)
  std::shared_ptr<const Presentation> above;  // C, or Q
  bool sectioned = false;
  int bound = 4;

  static WContext cooperad(std::shared_ptr<const Presentation> c, int bound);
  static WContext cobimodule(std::shared_ptr<const Presentation> p,
                             std::shared_ptr<const Presentation> m,
                             std::shared_ptr<const Presentation> q, int bound);
};

/// Structural data of one tree: decorated vertices, their roles and arities,
/// and the form slots.
struct WTreeInfo {
  std::vector<std::pair<int, int>> big;  // (level, pos), ascending
  std::vector<int> arity;
  std::vector<VertexRole> role;
  std::vector<int> slots;  // form slot level indices, ascending
  int big_index(int level, int pos) const;
  int slot_index(int level) const;  // -1 when the level carries no form
};
WTreeInfo tree_info(const WContext& ctx, const WTree& t);

/// The enumerated tree family of one arity with its permutation orbits.
class WFamily {
 public:
  static std::shared_ptr<const WFamily> get(const WContext& ctx, int n);

  const std::vector<WTree>& trees() const { return trees_; }
  int index_of(const WTree& t) const;
  int rep_of(int tree) const { return rep_; }
  bool is_rep(int tree) const { return parent_[tree] < 0; }
  int parent(int tree) const { return parent_[tree]; }
  int parent_level(int tree) const { return parent_level_[tree]; }
  const std::vector<int>& reps() const { return rep_ids_; }
  int rep_index(int tree) const { return rep_of_tree_[tree]; }  // index into reps()

 private:
  friend struct WFamilyBuilder;
  std::vector<WTree> trees_;
  std::map<WTree, int> index_;
  std::vector<int> parent_;        // -1 for orbit representatives
  std::vector<int> parent_level_;  // the sigma level connecting to the parent
  std::vector<int> rep_of_tree_;
  std::vector<int> rep_ids_;
  int rep_ = 0;
};

/// Family of decorations indexed by the orbit representatives; the values on
/// the other trees are recovered through the permutation relations.
class WElement {
 public:
  WContext ctx;
  int arity = 0;
  std::shared_ptr<const WFamily> family;
  std::vector<WDec> rep_values;  // by rep index

  WDec value(int tree_id) const;  // transported on demand
  bool is_zero() const;
  WElement& operator+=(const WElement& o);
  WElement scaled(const Rat& c) const;
  bool operator==(const WElement& o) const;
};

WElement w_zero(const WContext& ctx, int n);

/// eta: decorates every tree with the iterated (co)structure of x and constant
/// level forms 1.
WElement eta(const WContext& ctx, int n, int basis_index);

/// Verifies every permutation and single-level contraction relation; failures
/// carry (tree, morphism) witnesses.
Report end_check(const WElement& w);

/// Per-tree differential (internal + de Rham), a degree +1 endo of the end.
WElement w_differential(const WElement& w);

/// Component of the (co)structure map at the given tree tuple: evaluates the
/// part-root levels at 1 and redistributes the rest. Side::Operadic for the
/// cooperad case; Left/Right for the cobimodule one. Returns the linear
/// combination over tuples (head block first).
std::map<std::vector<WKey>, Rat> w_costructure(const WElement& w, const WTree& head,
                                               const std::vector<std::optional<WTree>>& parts,
                                               Side side);

WElement prim_project(const WElement& w);
bool prim_check(const WElement& w);

/// gamma (resp. gamma_L / gamma_R) of primitive elements; vanishes on trees
/// that do not decompose along the pattern.
WElement prim_compose(const WElement& head, const std::vector<std::optional<WElement>>& parts,
                      Side side);

/// Lambda costructure generator h[i]_* on the W construction (cooperad case).
WElement w_lambda(const WElement& w, int i);

/// Comparison map from the bar-of-cobar (resp. two-sided bar of the two-sided
/// cobar) into W: subtree-root levels carry 1, the other levels dt.
WElement gamma_to_w(const WContext& ctx, const Materialized& omega,
                    const Construction& bar_of_omega, const TreeTensor& t);

/// Section of the cofree description: outer tree with primitive decorations
/// into a W element (cut levels carry t). Used by the W = bar(Prim) checks.
WElement cofree_to_w(const WContext& ctx, const PlanarTree& outer,
                     const std::vector<WElement>& prim_decorations);

/// Truncated slices (every level form of t-degree <= tdeg_bound): dimension of
/// the end, and a basis of the primitive part, computed as exact nullspaces.
int w_slice_dim(const WContext& ctx, int n, int tdeg_bound);
std::vector<WElement> prim_basis(const WContext& ctx, int n, int tdeg_bound);

}  // namespace operadkit
