#pragma once

// Windows and the explanation judgments for 1-cells, 2-cells and
// counterfactuals.

#include <optional>
#include <string>
#include <vector>

#include "layerprop/rewrite.hpp"

namespace layerprop {

/// Refine(f,a) ; m ; Coarsen(f,b) with m internal to f's target layer.
bool is_window(const SystemOfLayers& sys, const Diagram& d);
/// Coarsen(f,a) ; m ; Refine(f,b) with m internal to f's source layer.
bool is_cowindow(const SystemOfLayers& sys, const Diagram& d);
/// Some Refine cell is connected by a directed path to a Coarsen cell of the
/// same functor.
bool contains_window(const Diagram& d);

enum class VerdictStatus { Valid, Invalid, Certified, Refuted, Unknown };

std::string_view to_string(VerdictStatus s);

struct FailedCondition {
  /// "1", "2", "3", or "parallel".
  std::string condition;
  std::string reason;
};

struct ExplanationVerdict {
  VerdictStatus status = VerdictStatus::Unknown;
  std::optional<Derivation> witness;
  std::vector<FailedCondition> failed_conditions;
};

struct ExplainOptions {
  std::size_t budget = 6;
  std::size_t max_states = 200000;
  RuleOptions rules;
};

ExplanationVerdict check_explanation_1(const SystemOfLayers& sys, const Diagram& e, const Diagram& sigma,
                                       const ExplainOptions& opts = {});

struct EquationRef {
  std::string layer;
  std::string name;
};

/// `eta` must verify (InvalidDerivation otherwise). Valid when eta runs from
/// box(lhs) to box(rhs) of the equation and every E step uses an equation of
/// a layer strictly below the equation's layer.
ExplanationVerdict check_explanation_2(const SystemOfLayers& sys, const Derivation& eta, const EquationRef& mu,
                                       const RuleOptions& rules = {});

ExplanationVerdict check_counterfactual(const SystemOfLayers& sys, const Diagram& e, const Diagram& sigma,
                                        const ExplainOptions& opts = {});

}  // namespace layerprop
