#pragma once

// 2-cells: the generating rewrite families, positioned matches, bounded
// derivation search and the isolation certificate.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "layerprop/diagram.hpp"

namespace layerprop {

enum class Orientation { Fwd, Bwd };

std::string_view to_string(Orientation o);

/// Rule names: F1-F4 (functoriality), A1-A6 (units and counits), M1-M6
/// (monoidal coherence), E (layer equations), X (faithful window collapse).
bool is_bidirectional(const std::string& rule);
/// Does this orientation of the rule denote a generating 2-cell?
bool is_valid_direction(const std::string& rule, Orientation o);
std::vector<std::string> rule_names();

struct Match {
  std::string rule;
  Orientation orientation = Orientation::Fwd;
  /// Matched cells, as indices into the canonical form of the host.
  std::vector<int> anchor;
  /// For insertions: consumer ports of the wires the rule is inserted on.
  std::vector<Port> wires;
  /// Functor, layer or equation the instance is parametrised by.
  std::string param;
  std::string variant;
  Word word;
  std::size_t index = 0;
  bool insertion = false;

  bool operator==(const Match&) const = default;
};

std::string match_to_string(const Match& m);

struct RuleOptions {
  /// Functors for which the window collapse X is enabled.
  std::set<std::string> faithful_functors;
  bool include_insertions = true;
  /// Cap on factorizations, preimages and occurrences per anchor.
  std::size_t cap = 256;
  /// When non-empty, only these rules are generated.
  std::set<std::string> only;
};

enum class MoveSet {
  /// Generating 2-cells leaving the diagram.
  Forward,
  /// Inverse moves: generating 2-cells arriving at the diagram.
  Predecessor,
  All,
};

struct Step {
  Match match;
  Diagram result;  // canonical
  std::string key;
};

struct Expansion {
  std::vector<Step> steps;
  /// False when a cap was hit or a preimage search was incomplete.
  bool complete = true;
};

struct RuleFilter {
  std::string rule;
  std::optional<Orientation> orientation;
};

/// All rule applications on the canonical form of `d`.
Expansion expand(const SystemOfLayers& sys, const Diagram& d, const RuleOptions& opts,
                 MoveSet moves = MoveSet::Forward, const std::optional<RuleFilter>& filter = std::nullopt);

/// Replaces matched cells. `in_producers[k]` feeds input k of the
/// replacement; output k of the replacement feeds `out_consumers[k]`.
/// Throws MalformedInput if the result would contain a cycle.
Diagram splice(const Diagram& host, const std::set<int>& remove, const std::vector<Port>& in_producers,
               const std::vector<Port>& out_consumers, const Diagram& replacement);

/// Applies `m`, which must have been produced against canonicalize(d).
/// Throws StaleMatch otherwise.
Diagram apply_rule(const SystemOfLayers& sys, const Diagram& d, const Match& m, const RuleOptions& opts = {});

struct Derivation {
  Diagram start;
  std::vector<Match> steps;
};

struct SearchOptions {
  /// Maximum number of rule applications in a derivation.
  std::size_t budget = 10000;
  std::size_t max_states = 200000;
  RuleOptions rules;
};

enum class SearchStatus { Found, NotFound, BudgetExhausted };

struct SearchResult {
  SearchStatus status = SearchStatus::NotFound;
  std::optional<Derivation> derivation;
  std::size_t states = 0;
};

/// Bidirectional breadth-first search over canonical forms. NotFound means
/// the reachable space was exhausted within the budget; BudgetExhausted means
/// the budget or the state cap ran out first.
SearchResult find_derivation(const SystemOfLayers& sys, const Diagram& src, const Diagram& dst,
                             const SearchOptions& opts);

/// Replays `dv`; returns the final diagram or nullopt when a step does not
/// re-validate or is not a generating direction.
std::optional<Diagram> replay_derivation(const SystemOfLayers& sys, const Derivation& dv,
                                         const RuleOptions& opts = {});
bool verify_derivation(const SystemOfLayers& sys, const Derivation& dv, const RuleOptions& opts = {});

/// No rule instance applies in either orientation. Insertions (which apply
/// on every wire) are only considered for the empty diagram.
bool is_isolated(const SystemOfLayers& sys, const Diagram& d, const RuleOptions& opts = {});

enum class LayerEqStatus { Equal, Distinct, Unknown };

struct LayerEqResult {
  LayerEqStatus status = LayerEqStatus::Unknown;
  std::optional<Derivation> witness;
};

LayerEqResult layer_eq(const SystemOfLayers& sys, const Diagram& x, const Diagram& y, std::size_t budget);

/// Budgeted check that functors send source equations to derivably equal
/// target morphisms. One issue per equation not confirmed.
ValidationReport check_equation_preservation(const SystemOfLayers& sys, std::size_t budget);

/// A concrete instance of a rule, lhs => rhs in the forward orientation.
struct RuleInstance {
  std::string rule;
  std::string variant;
  Term lhs_term;
  Term rhs_term;
  Diagram lhs;
  Diagram rhs;
};

struct InstanceSpec {
  std::string rule;
  std::string variant;
  std::string layer;
  std::string functor;
  std::string equation;
  Word a, b, c;
  std::optional<InternalDiagram> sigma, tau;
};

RuleInstance make_instance(const SystemOfLayers& sys, const InstanceSpec& spec);

/// Parameter families of every rule available in `sys`.
struct RuleFamily {
  std::string rule;
  std::string variant;
  std::string param;
  bool bidirectional;
};

std::vector<RuleFamily> instantiate_rules(const SystemOfLayers& sys, const RuleOptions& opts = {});

}  // namespace layerprop
