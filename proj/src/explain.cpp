#include "layerprop/explain.hpp"

#include "layerprop/error.hpp"
#include "layerprop/internal.hpp"

namespace layerprop {

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Valid: return "Valid";
    case VerdictStatus::Invalid: return "Invalid";
    case VerdictStatus::Certified: return "Certified";
    case VerdictStatus::Refuted: return "Refuted";
    case VerdictStatus::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

// First and last cells of a chain Refine/Coarsen ; boxes ; Coarsen/Refine on
// one sheet. The middle may be empty (an identity).
bool is_framed(const SystemOfLayers& sys, const Diagram& input, CellKind open, CellKind close) {
  const Diagram d = normalize(sys, input);
  if (d.in.size() != 1 || d.out.size() != 1) return false;
  if (d.cells.size() < 2 || d.cells.size() > 3) return false;
  const auto order = topological_order(d);
  const Cell& first = d.cells[order.front()];
  const Cell& last = d.cells[order.back()];
  if (first.kind != open || last.kind != close || first.functor != last.functor) return false;
  if (d.cells.size() == 3 && d.cells[order[1]].kind != CellKind::Box) return false;
  // A chain: each cell feeds the next.
  if (d.feeds[order.front()][0].cell != kBoundary) return false;
  for (std::size_t k = 1; k < order.size(); ++k)
    if (d.feeds[order[k]][0].cell != order[k - 1]) return false;
  if (d.out_feeds[0].cell != order.back()) return false;
  const auto& f = sys.require_functor(first.functor);
  const std::string& middle = open == CellKind::Refine ? f.target : f.source;
  return d.cells.size() == 2 || d.cells[order[1]].box.layer == middle;
}

// Condition 1: the explained 1-cell is a single non-identity internal box.
// Returns its layer.
std::optional<std::string> single_box_layer(const SystemOfLayers& sys, const Diagram& sigma) {
  const Diagram d = normalize(sys, sigma);
  if (d.cells.size() != 1 || d.cells[0].kind != CellKind::Box || d.cells[0].box.slices.empty()) return std::nullopt;
  if (d.in.size() != 1 || d.out.size() != 1) return std::nullopt;
  return d.cells[0].box.layer;
}

std::vector<FailedCondition> conditions_1_2(const SystemOfLayers& sys, const Diagram& e, const Diagram& sigma) {
  std::vector<FailedCondition> failed;
  const auto omega = single_box_layer(sys, sigma);
  if (!omega) {
    failed.push_back({"1", "the explained 1-cell is not a single internal morphism"});
    return failed;
  }
  for (const auto& c : normalize(sys, e).cells) {
    if (c.kind != CellKind::Box || c.box.slices.empty()) continue;
    if (!sys.below(c.box.layer, *omega)) {
      failed.push_back({"2", "internal morphism in layer " + c.box.layer + " is not strictly below " + *omega});
      break;
    }
  }
  return failed;
}

void require_parallel(const Diagram& e, const Diagram& sigma) {
  if (e.in != sigma.in || e.out != sigma.out) throw Error(ErrorCode::SortMismatch, "explanation is not parallel");
}

struct Relevance {
  std::optional<Derivation> witness;
  bool exhausted = false;  // both searches ran out of budget or states
  bool refuted_both = false;
};

Relevance search_both(const SystemOfLayers& sys, const Diagram& e, const Diagram& sigma, const ExplainOptions& opts) {
  SearchOptions so;
  so.budget = opts.budget;
  so.max_states = opts.max_states;
  so.rules = opts.rules;
  Relevance r;
  // Explanations usually arise from the explained cell, so try that side first.
  auto a = find_derivation(sys, sigma, e, so);
  if (a.status == SearchStatus::Found) {
    r.witness = a.derivation;
    return r;
  }
  auto b = find_derivation(sys, e, sigma, so);
  if (b.status == SearchStatus::Found) {
    r.witness = b.derivation;
    return r;
  }
  r.refuted_both = a.status == SearchStatus::NotFound && b.status == SearchStatus::NotFound;
  r.exhausted = !r.refuted_both;
  return r;
}

}  // namespace

bool is_window(const SystemOfLayers& sys, const Diagram& d) {
  return is_framed(sys, d, CellKind::Refine, CellKind::Coarsen);
}

bool is_cowindow(const SystemOfLayers& sys, const Diagram& d) {
  return is_framed(sys, d, CellKind::Coarsen, CellKind::Refine);
}

bool contains_window(const Diagram& d) {
  for (std::size_t r = 0; r < d.cells.size(); ++r) {
    if (d.cells[r].kind != CellKind::Refine) continue;
    for (std::size_t c = 0; c < d.cells.size(); ++c)
      if (d.cells[c].kind == CellKind::Coarsen && d.cells[c].functor == d.cells[r].functor &&
          reaches(d, static_cast<int>(r), static_cast<int>(c)))
        return true;
  }
  return false;
}

ExplanationVerdict check_explanation_1(const SystemOfLayers& sys, const Diagram& e, const Diagram& sigma,
                                       const ExplainOptions& opts) {
  require_parallel(e, sigma);
  ExplanationVerdict v;
  v.failed_conditions = conditions_1_2(sys, e, sigma);
  if (!v.failed_conditions.empty()) {
    v.status = VerdictStatus::Invalid;
    return v;
  }
  auto r = search_both(sys, e, sigma, opts);
  if (r.witness) {
    v.status = VerdictStatus::Valid;
    v.witness = std::move(r.witness);
  } else if (r.refuted_both) {
    v.status = VerdictStatus::Invalid;
    v.failed_conditions.push_back({"3", "no 2-cell between the explanation and the explained 1-cell"});
  } else {
    v.status = VerdictStatus::Unknown;
    v.failed_conditions.push_back({"3", "no 2-cell found within budget"});
  }
  return v;
}

ExplanationVerdict check_explanation_2(const SystemOfLayers& sys, const Derivation& eta, const EquationRef& mu,
                                       const RuleOptions& rules) {
  if (!verify_derivation(sys, eta, rules)) throw Error(ErrorCode::InvalidDerivation, "derivation does not replay");
  ExplanationVerdict v;
  const auto* layer = sys.layer(mu.layer);
  const Equation* eq = nullptr;
  if (layer)
    for (const auto& e : layer->equations)
      if (e.name == mu.name) eq = &e;
  if (!eq) {
    v.status = VerdictStatus::Invalid;
    v.failed_conditions.push_back({"1", "no equation " + mu.name + " in layer " + mu.layer});
    return v;
  }

  RuleOptions o = rules;
  o.include_insertions = true;
  o.only.clear();
  Diagram cur = canonicalize(sys, eta.start).diagram;
  const Diagram start = cur;
  for (const auto& m : eta.steps) {
    if (m.rule == "E") {
      const std::string& l = cur.cells.at(static_cast<std::size_t>(m.anchor.at(0))).layer;
      if (!sys.below(l, mu.layer) && v.failed_conditions.empty())
        v.failed_conditions.push_back({"2", "step uses equation " + m.param + " of layer " + l +
                                                ", which is not strictly below " + mu.layer});
    }
    cur = apply_rule(sys, cur, m, o);
  }
  if (!structural_eq(sys, start, box_diagram(eq->lhs)) || !structural_eq(sys, cur, box_diagram(eq->rhs)))
    v.failed_conditions.insert(v.failed_conditions.begin(),
                               {"parallel", "derivation does not run from the left to the right side of " + mu.name});
  v.status = v.failed_conditions.empty() ? VerdictStatus::Valid : VerdictStatus::Invalid;
  if (v.status == VerdictStatus::Valid) v.witness = eta;
  return v;
}

ExplanationVerdict check_counterfactual(const SystemOfLayers& sys, const Diagram& e, const Diagram& sigma,
                                        const ExplainOptions& opts) {
  require_parallel(e, sigma);
  ExplanationVerdict v;
  v.failed_conditions = conditions_1_2(sys, e, sigma);
  if (!v.failed_conditions.empty()) {
    v.status = VerdictStatus::Invalid;
    return v;
  }
  if (is_isolated(sys, e, opts.rules)) {
    v.status = VerdictStatus::Certified;
    return v;
  }
  auto r = search_both(sys, e, sigma, opts);
  if (r.witness) {
    v.status = VerdictStatus::Refuted;
    v.witness = std::move(r.witness);
    v.failed_conditions.push_back({"3", "a 2-cell connects the explanation and the explained 1-cell"});
  } else {
    v.status = r.refuted_both ? VerdictStatus::Certified : VerdictStatus::Unknown;
  }
  return v;
}

}  // namespace layerprop
