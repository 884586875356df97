#pragma once

// Finite categories, profunctors between them and the pointed profunctor
// interpretation of diagrams.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "layerprop/rewrite.hpp"

namespace layerprop {

struct FinCategory {
  std::string name;
  std::vector<std::string> objects;
  std::vector<std::string> morphisms;
  std::vector<int> dom, cod;
  std::vector<int> identity;
  /// then[f * nmor + g] = f ; g (that is g . f), or -1 when not composable.
  std::vector<int> then_table;
  /// Morphisms a -> b in index order, at hom_sets[a * nobj + b].
  std::vector<std::vector<int>> hom_sets;
  /// Position of each morphism inside its hom-set.
  std::vector<int> rank;
  bool terminal = false;

  int nobj() const { return static_cast<int>(objects.size()); }
  int nmor() const { return static_cast<int>(morphisms.size()); }
  int then(int f, int g) const { return then_table[static_cast<std::size_t>(f) * morphisms.size() + g]; }
  const std::vector<int>& hom(int a, int b) const { return hom_sets[static_cast<std::size_t>(a) * objects.size() + b]; }
  int object_index(const std::string& n) const;
  int morphism_index(const std::string& n) const;
  /// Rebuilds hom_sets and rank from dom/cod.
  void finalize();

  bool same_shape(const FinCategory& o) const {
    return objects.size() == o.objects.size() && dom == o.dom && cod == o.cod && identity == o.identity &&
           then_table == o.then_table;
  }
};

using CategoryPtr = std::shared_ptr<const FinCategory>;

struct MorphismSpec {
  std::string name;
  std::string dom;
  std::string cod;
};

/// Identities are generated as "id:<object>" ahead of `morphisms`.
/// `compose` lists f ; g = h for every composable non-identity pair.
FinCategory make_category(std::string name, std::vector<std::string> objects, std::vector<MorphismSpec> morphisms,
                          const std::vector<std::array<std::string, 3>>& compose);
/// The free category on a finite preorder given by `leq(a, b)`.
FinCategory preorder_category(std::string name, std::vector<std::string> objects,
                              const std::function<bool(int, int)>& leq);
CategoryPtr terminal_category();
/// Objects (a, b) at a * |B| + b, morphisms likewise. Products with the
/// terminal category return the other factor; results are memoized.
CategoryPtr product_category(const CategoryPtr& a, const CategoryPtr& b);

ValidationReport validate_category(const FinCategory& c);

struct FinFunctor {
  CategoryPtr source, target;
  std::vector<int> obj;
  std::vector<int> mor;
};

FinFunctor identity_functor(const CategoryPtr& c);
FinFunctor compose_functor(const FinFunctor& f, const FinFunctor& g);  // g after f
FinFunctor product_functor(const FinFunctor& f, const FinFunctor& g);
/// (c, d) -> (d, c).
FinFunctor swap_functor(const CategoryPtr& c, const CategoryPtr& d);
ValidationReport validate_functor(const FinFunctor& f);

struct FinMonoidalCategory {
  CategoryPtr cat;
  std::vector<int> tensor_obj;  // a * nobj + b
  std::vector<int> tensor_mor;  // f * nmor + g
  int unit = 0;

  int tensor(int a, int b) const { return tensor_obj[static_cast<std::size_t>(a) * cat->objects.size() + b]; }
  int tensor_m(int f, int g) const { return tensor_mor[static_cast<std::size_t>(f) * cat->morphisms.size() + g]; }
};

ValidationReport validate_monoidal(const FinMonoidalCategory& m);
FinFunctor tensor_functor(const FinMonoidalCategory& m);
FinFunctor unit_functor(const FinMonoidalCategory& m);
bool is_strict_monoidal_functor(const FinFunctor& f, const FinMonoidalCategory& src, const FinMonoidalCategory& tgt);

/// A profunctor P : C -/-> D, i.e. a functor C^op x D -> Set, with elements
/// numbered 0..size-1 in each P(c, d).
struct Profunctor {
  enum class Rep { None, Up, Down };

  CategoryPtr source, target;
  std::vector<int> size;  // c * |D| + d
  /// left[h * |D| + d][x]: action of h : c' -> c, from P(c,d) to P(c',d).
  std::vector<std::vector<int>> left;
  /// right[k * |C| + c][x]: action of k : d -> d', from P(c,d) to P(c,d').
  std::vector<std::vector<int>> right;

  /// Representable profunctors remember their functor and, per element, the
  /// morphism it stands for. Up: F : C -> D and P(c,d) = D(Fc,d). Down:
  /// F : D -> C and P(c,d) = C(c,Fd). Hom-profunctors are Up of the identity.
  Rep rep = Rep::None;
  bool is_hom = false;
  std::shared_ptr<const FinFunctor> functor;
  std::vector<std::vector<int>> label;

  int nd() const { return target->nobj(); }
  int count(int c, int d) const { return size[static_cast<std::size_t>(c) * target->objects.size() + d]; }
  int act_left(int h, int d, int x) const { return left[static_cast<std::size_t>(h) * target->objects.size() + d][x]; }
  int act_right(int k, int c, int x) const {
    return right[static_cast<std::size_t>(k) * source->objects.size() + c][x];
  }
  /// Element of a representable profunctor standing for morphism m, or -1.
  int element_of(int c, int d, int m) const;
};

using ProfunctorPtr = std::shared_ptr<const Profunctor>;

ValidationReport validate_profunctor(const Profunctor& p);
bool same_tables(const Profunctor& p, const Profunctor& q);

Profunctor embed_up(const FinFunctor& f);
Profunctor embed_down(const FinFunctor& f);
Profunctor hom_profunctor(const CategoryPtr& c);
Profunctor product_prof(const Profunctor& p, const Profunctor& q);

/// Q o P as a coend, with a representative (b, p, q) for every class.
struct Composite {
  ProfunctorPtr first;   // P : A -/-> B
  ProfunctorPtr second;  // Q : B -/-> C
  Profunctor result;
  struct Rep {
    int b, p, q;
  };
  std::vector<std::vector<Rep>> reps;  // reps[a * |C| + c][class]
  /// Offsets into pair_class[a * |C| + c] of the block for middle object b.
  std::vector<std::vector<int>> offsets;
  std::vector<std::vector<int>> pair_class;

  int class_of(int a, int b, int c, int p, int q) const;
};

/// Throws BoundaryMismatch when target(P) and source(Q) differ.
Composite compose_prof(const ProfunctorPtr& p, const ProfunctorPtr& q);

struct PointedProfunctor {
  ProfunctorPtr prof;
  int source_point = 0;
  int target_point = 0;
  int point = 0;
  /// Set when the profunctor arose from point_compose.
  std::shared_ptr<const Composite> composite;
};

PointedProfunctor pointed_hom(const CategoryPtr& c, int morphism);
PointedProfunctor point_compose(const PointedProfunctor& p, const PointedProfunctor& q);
PointedProfunctor point_product(const PointedProfunctor& p, const PointedProfunctor& q);

/// Components alpha[c * |D| + d][x].
using Transformation = std::vector<std::vector<int>>;

struct NatSearchOptions {
  bool iso = false;
  /// Element x of P(c, d) must map to y.
  struct Pin {
    int c, d, x, y;
  };
  std::optional<Pin> pin;
  std::size_t cap = 1000000;
};

/// First natural transformation P => Q in a fixed search order. Throws
/// SearchTooLarge after `cap` tentative assignments.
std::optional<Transformation> nat_trans_search(const Profunctor& p, const Profunctor& q,
                                               const NatSearchOptions& opts = {});
std::optional<Transformation> nat_iso_search(const Profunctor& p, const Profunctor& q, std::size_t cap = 1000000);
bool is_natural(const Profunctor& p, const Profunctor& q, const Transformation& alpha);

// ---------------------------------------------------------------- models

struct LayerModel {
  std::shared_ptr<const FinMonoidalCategory> cat;
  std::map<Symbol, int> objects;
  std::map<std::string, int> generators;
};

struct OmegaModel {
  std::map<std::string, LayerModel> layers;
  std::map<std::string, FinFunctor> functors;
};

/// Typing of generator images, equations, strict monoidality and functor
/// coherence with the syntactic translations. The two consistency conditions
/// hold by construction: a layer denotes one category and every internal box
/// denotes its hom-profunctor.
ValidationReport check_model(const SystemOfLayers& sys, const OmegaModel& model);

class Interpreter {
 public:
  Interpreter(const SystemOfLayers& sys, const OmegaModel& model) : sys_(sys), model_(model) {}

  int word_object(const std::string& layer, const Word& w) const;
  int internal_morphism(const InternalDiagram& d) const;
  /// Category of an Omega-type and the object it denotes.
  std::pair<CategoryPtr, int> type_point(const OmegaType& t);

  PointedProfunctor interpret(const Term& t);
  PointedProfunctor interpret(const Diagram& d) { return interpret(diagram_to_term(d)); }

 private:
  const SystemOfLayers& sys_;
  const OmegaModel& model_;

  const LayerModel& layer(const std::string& id) const;
};

struct SemanticCheck {
  bool ok = false;
  std::string reason;
  bool canonical_witness_checked = false;
};

/// A pointed natural transformation interpret(lhs) => interpret(rhs) exists,
/// and also the reverse one for bidirectional rules. For F-family instances
/// the canonical witness [h,k] -> k . f(h) must be one of them.
SemanticCheck verify_rule_semantics(const SystemOfLayers& sys, const OmegaModel& model, const RuleInstance& inst,
                                    std::size_t cap = 1000000);

struct NamedModel {
  std::string name;
  SystemOfLayers sys;
  OmegaModel model;
};

/// The cyclic monoid of order 3, the arrow category under max, and the
/// commutative square under join, each as a two-layer system U > L.
std::vector<NamedModel> builtin_models();

/// Rule instances over small words and generator-level internal morphisms.
std::vector<RuleInstance> sample_instances(const NamedModel& m, const std::set<std::string>& rules);

}  // namespace layerprop
