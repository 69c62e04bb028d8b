#pragma once

#include <map>
#include <vector>

#include "operadkit/planar_tree.hpp"
#include "operadkit/presentation.hpp"

namespace operadkit {

/// Basis tensor of a tree construction: a canonical class tree with one
/// decoration per vertex (preorder). The bare leaf with no decorations is the
/// arity-1 unit element.
struct TreeTensor {
  PlanarTree tree;
  std::vector<int> dec;
  auto operator<=>(const TreeTensor&) const = default;
};

/// Formal linear combination of TreeTensors of one arity; like terms merged,
/// zero coefficients dropped.
using Element = std::map<TreeTensor, Rat>;

Element& element_add(Element& acc, const TreeTensor& t, const Rat& c);
Element element_sum(const Element& a, const Element& b);
Element element_scale(const Element& a, const Rat& c);
bool element_equal(const Element& a, const Element& b);

/// Role of a vertex in a marked tree (everything is Above in unmarked trees).
enum class VertexRole { Below, Marked, Above };
std::vector<VertexRole> classify_nodes(const PlanarTree& t);

/// Resolves which presentation decorates each vertex and the effective
/// (Koszul) degree of a factor: basis degree + a per-role shift.
struct TensorScheme {
  const Presentation* below = nullptr;   // role Below (and everything, when unmarked)
  const Presentation* marked = nullptr;  // role Marked
  const Presentation* above = nullptr;   // role Above
  int below_shift = 0;
  int marked_shift = 0;
  int above_shift = 0;
  // Sign bookkeeping can differ from the reported degree: a section factor
  // counts as suspended (odd-shifted) in every Koszul rule even though its
  // reported degree carries no shift.
  int marked_parity_shift = 0;

  static TensorScheme plain(const Presentation& p, int shift) {
    return {&p, nullptr, &p, shift, 0, shift, 0};
  }
  static TensorScheme with_marks(const Presentation& p, int ps, const Presentation& m, int ms,
                                 const Presentation& q, int qs, int mps) {
    return {&p, &m, &q, ps, ms, qs, mps};
  }

  const Presentation& pres(VertexRole r) const;
  int shift(VertexRole r) const;
  int eff_degree(VertexRole r, int arity, int basis) const {
    return pres(r).degree_of(arity, basis) + shift(r);
  }
  int parity_shift(VertexRole r) const {
    return r == VertexRole::Marked ? marked_parity_shift : shift(r);
  }
  int eff_parity(VertexRole r, int arity, int basis) const {
    int v = pres(r).degree_of(arity, basis) + parity_shift(r);
    return (v % 2 + 2) % 2;
  }
};

/// Effective degrees of the factors of a term, in preorder.
std::vector<int> factor_degrees(const TensorScheme& s, const TreeTensor& t);
/// Koszul parities of the factors (may differ from the degrees mod 2 on
/// section factors).
std::vector<int> factor_parities(const TensorScheme& s, const TreeTensor& t);
/// Total degree of a term (sum of effective degrees; global constants such as
/// the bar +1 / cobar -1 are the construction's business).
int term_degree(const TensorScheme& s, const TreeTensor& t);
/// Parity of a term under the sign bookkeeping.
int term_parity(const TensorScheme& s, const TreeTensor& t);

/// Koszul sign of reordering graded items: order[i] = source position of the
/// item at target position i.
Rat koszul_reorder_sign(const std::vector<int>& degrees, const std::vector<int>& order);

/// Sign bookkeeping of a term, in the two-block form: the decoration tensor
/// (preorder, graded by the honest presentation degrees) followed by one odd
/// suspension symbol per unmarked vertex, ordered by level (below-section
/// vertices by depth then left, then above-section ones likewise).
struct SignData {
  std::vector<int> theta_parity;    // per vertex, preorder
  std::vector<int> slot_of_vertex;  // position in the suspension block, -1 for marked
  std::vector<int> slot_vertices;   // vertex ids in suspension order
  int theta_total = 0;              // parity of the whole decoration block
};
SignData sign_data(const TensorScheme& s, const PlanarTree& tree, const std::vector<int>& dec);

/// Sign of carrying a whole term through a vertex bijection: `order[i]` is the
/// source vertex at target preorder position i. Composes the permutation sign
/// of the suspension block with the Koszul sign of the decoration block.
Rat transport_sign(const SignData& src, const TensorScheme& s, const PlanarTree& target_tree,
                   const std::vector<int>& target_dec, const std::vector<int>& order);

/// Structure-only shuffle sort: returns the sorted tree and the old-to-new
/// vertex index map.
std::pair<PlanarTree, std::vector<int>> shuffle_sort(const PlanarTree& t);

/// Interleaving sign between the block form [decorations][suspensions] used
/// internally and the factor-coupled form (each suspension directly before its
/// decoration, in preorder). Conjugating by it presents every operation with
/// the standard suspended-factor sign conventions.
Rat couple_sign(const TensorScheme& s, const TreeTensor& t);

/// Sign coordinates: Coupled treats every suspended vertex factor as one odd
/// object (degree + 1); Block keeps the decoration tensor and the level
/// suspensions in two separate blocks (the differential's native coordinates).
enum class SignConvention { Coupled, Block };

/// Rewrites a (possibly unsorted) decorated tree into shuffle normal form:
/// child blocks sorted by minimal leaf at every vertex, decorations twisted by
/// the vertex Sigma-action, Koszul signs per the chosen convention.
Element normalize_term(const TensorScheme& s, PlanarTree tree, const std::vector<int>& dec,
                       const Rat& coeff, SignConvention conv = SignConvention::Coupled);

/// Grafts decorated parts onto a decorated outer tree (gamma of the free
/// construction). Bare-leaf parts are unit slots. Input factor order is
/// outer-then-parts; the Koszul reorder to the composite's preorder and the
/// final normalization are included.
Element graft_terms(const TensorScheme& composite, const TensorScheme& outer_scheme,
                    const TreeTensor& outer, const std::vector<const TensorScheme*>& part_schemes,
                    const std::vector<const TreeTensor*>& parts, const Rat& coeff);

}  // namespace operadkit
