#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "operadkit/rational.hpp"
#include "operadkit/report.hpp"

namespace operadkit {

struct BasisElem {
  std::string name;
  int degree = 0;
};

/// Sorted sparse linear combination over one (arity) basis slice.
using LinComb = std::vector<std::pair<int, Rat>>;

LinComb lincomb_single(int index, Rat coeff = Rat(1));
LinComb lincomb_add(const LinComb& a, const LinComb& b);
LinComb lincomb_scale(const LinComb& a, const Rat& c);
bool lincomb_equal(const LinComb& a, const LinComb& b);

// ---- permutations (one-based images: sigma[i-1] = sigma(i)) ----

std::vector<int> perm_identity(int n);
std::vector<int> perm_compose(const std::vector<int>& s, const std::vector<int>& t);  // s 'then-inside' t: (s*t)(i) = s[t[i]]
std::vector<int> perm_inverse(const std::vector<int>& s);
/// Decomposition into adjacent transpositions s_{j}: sigma = s_{a_1} * ... * s_{a_r}
/// as functions, composed left to right with perm_compose above.
std::vector<int> adjacent_word(const std::vector<int>& sigma);
/// Permutation of [sum n_i] induced by reordering consecutive blocks of the
/// given sizes by sigma in Sigma_k (image convention pinned by the Ass tests).
std::vector<int> block_permutation(const std::vector<int>& sigma, const std::vector<int>& sizes);

enum class PresKind { Operad, Cooperad, Bimodule, Cobimodule };

/// One total (co)composition structure constant along a partition
/// (n_1,...,n_k): the coefficient pairing the input tuple (i_0; i_1..i_k)
/// in O(k) x O(n_1) x ... x O(n_k) with the output basis element.
struct GammaEntry {
  std::vector<int> inputs;  // i_0 then i_1..i_k
  int output = 0;
  Rat coeff;
  bool operator==(const GammaEntry&) const = default;
};
using GammaTable = std::map<std::vector<int>, std::vector<GammaEntry>>;

/// Lambda (co)structure on the order-preserving injection generators h[i].
struct LambdaData {
  // cooperads / cobimodules: h[i]_* : X(n) -> X(n+1), key (n, i), 1 <= i <= n+1
  // operads   / bimodules:   h[i]^* : X(n+1) -> X(n), same key
  std::map<std::pair<int, int>, std::vector<LinComb>> hmat;
  bool empty() const { return hmat.empty(); }
};

/// Finite basis presentation of a graded symmetric (co)sequence with structure
/// constants. 1-reduced: the arity-1 slice is one basis element in degree 0.
struct Presentation {
  std::string name;
  PresKind kind = PresKind::Operad;
  int arity_bound = 0;

  std::vector<std::vector<BasisElem>> basis;  // basis[n], 1 <= n <= arity_bound
  // sym[n][j] = matrix of the adjacent transposition s_{j+1} (right action);
  // matrix stored column-wise: sym[n][j][input] is a LinComb.
  std::vector<std::vector<std::vector<LinComb>>> sym;
  std::vector<std::vector<LinComb>> diff;  // diff[n][input], degree +1

  // operads/cooperads: total (co)composition; bimodules/cobimodules: left/right.
  GammaTable gamma;
  GammaTable gamma_left;
  GammaTable gamma_right;
  LambdaData lambda;

  // bimodule/cobimodule coefficients act against these
  std::shared_ptr<const Presentation> left;
  std::shared_ptr<const Presentation> right;

  // Materialized bar/cobar slices carry the printed global degree constant:
  // composition is then additive up to k * gamma_degree_shift, and the sign
  // conventions of d and gamma follow the parity of degree + parity_offset.
  int gamma_degree_shift = 0;
  int leibniz_parity_offset = 0;

  int dim(int n) const { return static_cast<int>(basis.at(n).size()); }
  int degree_of(int n, int i) const { return basis.at(n).at(i).degree; }
  int parity_of(int n, int i) const {
    return ((basis.at(n).at(i).degree + leibniz_parity_offset) % 2 + 2) % 2;
  }
  bool is_co() const { return kind == PresKind::Cooperad || kind == PresKind::Cobimodule; }
};

/// Right action of an arbitrary permutation via the stored adjacent matrices.
LinComb act(const Presentation& p, int n, const LinComb& x, const std::vector<int>& sigma);
LinComb apply_diff(const Presentation& p, int n, const LinComb& x);

/// Operadic evaluation along the consecutive partition; unit slots (n_i = 1)
/// take the canonical arity-1 basis element. k = 1 acts as the identity.
LinComb gamma_eval(const Presentation& p, const std::vector<int>& partition,
                   const std::vector<LinComb>& inputs);
LinComb gamma_eval_left(const Presentation& p, const std::vector<int>& partition,
                        const std::vector<LinComb>& inputs);
LinComb gamma_eval_right(const Presentation& p, const std::vector<int>& partition,
                         const std::vector<LinComb>& inputs);

/// Cooperadic components of basis element j along the consecutive partition.
std::vector<GammaEntry> coop_components(const GammaTable& table, const std::vector<int>& partition,
                                        int j);

/// Lambda maps. For cooperads: pushforward along h[i]; eps_n is the composite
/// image of the arity-1 unit.
LinComb lambda_apply(const Presentation& p, int n, int i, const LinComb& x);
LinComb lambda_eps(const Presentation& p, int n);

Presentation dualize(const Presentation& p);

/// Exhaustive axiom verification up to the arity bound (or smaller cap).
Report verify_axioms(const Presentation& p, int max_arity = 0);

Presentation load_presentation(const std::string& json_text);
std::string save_presentation(const Presentation& p);

/// Built-in presentations: com, com_cooperad, ass, ass_cooperad,
/// quasifree_sample, quasifree_sample_cooperad.
Presentation builtin(const std::string& name, int arity_bound = 4);

/// A (co)operad as a (co)bimodule over itself.
Presentation as_bimodule(const Presentation& operad);
Presentation as_cobimodule(const Presentation& cooperad);

}  // namespace operadkit
