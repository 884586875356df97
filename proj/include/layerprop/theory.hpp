#pragma once

// Systems of layers: finitely presented strict monoidal layers, the
// translation functors between them and the abstraction order.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace layerprop {

using Symbol = std::string;
using Word = std::vector<Symbol>;

/// One sheet of an Omega-type: a layer together with an object word in it.
struct SheetType {
  std::string layer;
  Word word;

  auto operator<=>(const SheetType&) const = default;
  bool operator==(const SheetType&) const = default;
};

using OmegaType = std::vector<SheetType>;

struct Sort {
  OmegaType dom;
  OmegaType cod;

  bool operator==(const Sort&) const = default;
};

/// A generator application inside a layer, padded by identities on the left.
struct Slice {
  std::size_t offset = 0;
  std::string gen;

  auto operator<=>(const Slice&) const = default;
  bool operator==(const Slice&) const = default;
};

/// A morphism of a single layer written as a sequence of slices.
struct InternalDiagram {
  std::string layer;
  Word dom;
  Word cod;
  std::vector<Slice> slices;

  bool is_identity() const { return slices.empty(); }
  bool operator==(const InternalDiagram&) const = default;
};

struct GeneratorDecl {
  std::string name;
  Word dom;
  Word cod;
};

struct Equation {
  std::string name;
  InternalDiagram lhs;
  InternalDiagram rhs;
};

class LayerPresentation {
 public:
  LayerPresentation() = default;
  explicit LayerPresentation(std::string id) : id(std::move(id)) {}

  std::string id;
  std::vector<Symbol> objects;
  std::vector<GeneratorDecl> generators;
  std::vector<Equation> equations;

  void add_object(const Symbol& s);
  void add_generator(GeneratorDecl g);
  void add_equation(Equation e) { equations.push_back(std::move(e)); }

  bool has_object(const Symbol& s) const { return object_index_.count(s) != 0; }
  const GeneratorDecl* find_generator(const std::string& name) const;

  /// Rebuilds lookup tables after direct edits of the public vectors.
  void reindex();

 private:
  std::map<Symbol, std::size_t> object_index_;
  std::map<std::string, std::size_t> generator_index_;
};

/// A strict monoidal functor given on generators.
struct TranslationFunctor {
  std::string name;
  std::string source;
  std::string target;
  std::map<Symbol, Word> object_map;
  std::map<std::string, InternalDiagram> morphism_map;
};

/// Signature entry with an arbitrary multi-layer arity.
struct SignatureEntry {
  std::string name;
  OmegaType arity;
  OmegaType coarity;
};

bool is_internal(const SignatureEntry& gen);

class SystemOfLayers {
 public:
  std::vector<LayerPresentation> layers;
  std::vector<TranslationFunctor> functors;
  /// Pairs (upper, lower): upper is strictly more abstract than lower.
  std::vector<std::pair<std::string, std::string>> order;
  std::vector<SignatureEntry> external;

  const LayerPresentation* layer(const std::string& id) const;
  const LayerPresentation& require_layer(const std::string& id) const;
  LayerPresentation* mutable_layer(const std::string& id);

  const TranslationFunctor* functor(const std::string& name) const;
  const TranslationFunctor& require_functor(const std::string& name) const;
  const TranslationFunctor* functor_between(const std::string& source,
                                            const std::string& target) const;
  std::vector<const TranslationFunctor*> functors_from(const std::string& layer) const;
  std::vector<const TranslationFunctor*> functors_into(const std::string& layer) const;
  const SignatureEntry* external_generator(const std::string& name) const;

  /// Strict order test on the transitive closure of `order`: lower < upper.
  bool below(const std::string& lower, const std::string& upper) const;
};

struct Issue {
  std::string kind;
  std::string location;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> issues;

  bool ok() const { return issues.empty(); }
  bool has(const std::string& kind) const;
  void add(std::string kind, std::string location, std::string message) {
    issues.push_back({std::move(kind), std::move(location), std::move(message)});
  }
};

ValidationReport validate_system(const SystemOfLayers& sys);

Word translate_word(const TranslationFunctor& f, const Word& w);

/// Composite g after f, computed on generators.
TranslationFunctor compose_functors(const SystemOfLayers& sys, const TranslationFunctor& f,
                                    const TranslationFunctor& g, std::string name);

std::string word_to_string(const Word& w);
std::string sheet_to_string(const SheetType& s);
std::string type_to_string(const OmegaType& t);

}  // namespace layerprop
