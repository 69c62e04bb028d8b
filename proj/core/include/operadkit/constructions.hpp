#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "operadkit/linalg.hpp"
#include "operadkit/tensor.hpp"

namespace operadkit {

enum class ConstructionKind { Free, Cofree, Bar, Cobar, TwoSidedBar, TwoSidedCobar };

/// A tree construction over presentations, materialized arity by arity.
/// Free/cofree/bar/cobar take one input; the two-sided kinds take the pair of
/// (co)operads and the (co)bimodule.
class Construction {
 public:
  static Construction make(ConstructionKind kind, std::shared_ptr<const Presentation> x,
                           int bound);
  static Construction make_two_sided(ConstructionKind kind,
                                     std::shared_ptr<const Presentation> p,
                                     std::shared_ptr<const Presentation> m,
                                     std::shared_ptr<const Presentation> q, int bound);

  ConstructionKind kind() const { return kind_; }
  int bound() const { return bound_; }
  const Presentation& input() const { return *x_; }
  const Presentation& left_input() const { return *p_; }
  const Presentation& middle_input() const { return *m_; }
  const Presentation& right_input() const { return *q_; }
  bool two_sided() const {
    return kind_ == ConstructionKind::TwoSidedBar || kind_ == ConstructionKind::TwoSidedCobar;
  }
  bool differential_on() const {
    return kind_ == ConstructionKind::Bar || kind_ == ConstructionKind::Cobar ||
           kind_ == ConstructionKind::TwoSidedBar || kind_ == ConstructionKind::TwoSidedCobar;
  }

  /// Effective-degree scheme of the tensor factors.
  const TensorScheme& scheme() const { return scheme_; }
  /// Reported degree: the global constant plus the factor degrees.
  int degree(const TreeTensor& t) const;
  int global_shift() const;

  struct Slice {
    std::vector<TreeTensor> basis;
    std::map<TreeTensor, int> index;
    std::vector<int> degrees;
    SparseMatrix d;  // full differential on the slice (0 when no differential)
  };
  const Slice& slice(int n) const;

  /// d_int + d_ext on one basis tensor.
  Element differential(const TreeTensor& t) const;
  Element differential(const Element& e) const;

  /// Right action of a permutation (leaf relabeling + normalization).
  Element act_element(const TreeTensor& t, const std::vector<int>& sigma) const;

  /// Cochain complex of the arity slice, split by degree.
  ComplexSlice complex_slice(int n) const;
  std::map<int, int> homology(int n) const;

  /// Test hook: flips the sign of the edge-contraction / vertex-splitting
  /// operator, which must break d^2 = 0 somewhere.
  void set_sign_flip(bool flip) { sign_flip_ = flip; }

 private:
  ConstructionKind kind_;
  std::shared_ptr<const Presentation> x_, p_, m_, q_;
  int bound_ = 0;
  TensorScheme scheme_;
  bool sign_flip_ = false;
  mutable std::map<int, Slice> slices_;

  Element d_int(const TreeTensor& t) const;
  Element d_ext(const TreeTensor& t) const;
};

enum class Side { Operadic, Left, Right };

struct CostructureTerm {
  TreeTensor outer;
  std::vector<TreeTensor> parts;
  Rat coeff;
};

/// Component of the (co)structure map along consecutive label blocks; empty on
/// indecomposables. Defined for cofree-style kinds (Cofree, Bar, TwoSidedBar).
std::vector<CostructureTerm> costructure(const Construction& c, const TreeTensor& t,
                                         const std::vector<int>& partition, Side side);

/// Grafting structure map for free-style kinds (Free, Cobar, TwoSidedCobar).
/// Unit slots are bare-leaf tensors. `side` picks gamma / gamma_L / gamma_R.
Element structure(const Construction& c, const TreeTensor& head,
                  const std::vector<TreeTensor>& parts, Side side);

/// Lambda pushforward h[i]_* on a cobar element (Eq-level operation; not a
/// Lambda-costructure by itself).
Element lambda_histar(const Construction& cobar, int i, const TreeTensor& t);

/// A construction slice packaged as a presentation, with the index-to-tensor
/// correspondence kept for nested constructions.
struct Materialized {
  std::shared_ptr<Presentation> pres;
  std::shared_ptr<const Construction> source;
  std::vector<std::vector<TreeTensor>> tensors;  // per arity

  int index_of(int n, const TreeTensor& t) const;
};

/// Packages a Free/Cobar construction as an operad presentation (or a
/// Cofree/Bar one as a cooperad presentation) up to the bound.
Materialized materialize(const Construction& c, const std::string& name);

/// Lambda-costructure generator h[i]_* on the bar-of-cobar construction:
/// `bar_of_cobar` must be a Bar construction over `omega.pres`.
Element lambda_barcobar(const Materialized& omega, const Construction& bar_of_cobar, int i,
                        const TreeTensor& t);

/// Free operad on explicit generators (name, arity, degree, d-image names),
/// materialized as a presentation. Used by the quasifree built-in.
struct FreeGenerator {
  std::string name;
  int arity = 2;
  int degree = 0;
  // differential image: list of (generator index, coefficient); the image of a
  // generator must be a combination of same-arity generators.
  std::vector<std::pair<int, Rat>> d_image;
};
Presentation free_operad_presentation(const std::string& name,
                                      const std::vector<FreeGenerator>& gens, int bound);

}  // namespace operadkit
