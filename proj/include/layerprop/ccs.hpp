#pragma once

// The prefix/parallel fragment of CCS: reduction and labelled transition
// semantics, strong bisimulation, and the Red > LTS layered system.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "layerprop/explain.hpp"

namespace layerprop::ccs {

/// Names are identifiers; a trailing ' marks the co-name. "tau" is silent.
using Action = std::string;

inline constexpr const char* kTau = "tau";

bool is_silent(const Action& a);
/// x <-> x'. Throws MalformedInput on tau.
Action complement(const Action& a);

class Process {
 public:
  enum class Kind { Nil, Prefix, Par };

  static Process nil();
  static Process prefix(Action a, Process body);
  static Process par(Process l, Process r);

  Kind kind() const { return kind_; }
  const Action& action() const { return action_; }
  const Process& body() const { return *left_; }
  const Process& left() const { return *left_; }
  const Process& right() const { return *right_; }
  bool is_sequential() const { return kind_ != Kind::Par; }
  /// Number of prefixes.
  int size() const;

  bool operator==(const Process& o) const;
  bool operator<(const Process& o) const { return to_string() < o.to_string(); }

  /// "0", "x.P", "(P|Q)" with brackets kept.
  std::string to_string() const;

 private:
  Kind kind_ = Kind::Nil;
  Action action_;
  std::shared_ptr<const Process> left_, right_;
};

/// Accepts `0`, `x.P`, `x'.P`, `tau.P` and `(P|Q)`; braces work as brackets
/// and an unbracketed `P|Q` nests to the right.
Process parse_process(const std::string& text);

/// Parallel components, left to right, including 0.
std::vector<Process> components(const Process& p);

/// Commutative monoid normal form: flattened, 0 dropped, components sorted.
/// Bodies under a prefix are compared as written.
std::string normal_form(const Process& p);
bool congruent(const Process& p, const Process& q);

/// One step reducts, one per congruence class, in order of the firing pair.
std::vector<Process> reductions(const Process& p);

struct Transition {
  Action label;
  Process target;
};

std::vector<Transition> lts_transitions(const Process& p);

/// Strong bisimilarity by partition refinement over the reachable graphs,
/// with states identified up to congruence.
bool bisimilar(const Process& p, const Process& q);

struct LtsGraph {
  std::vector<Process> states;
  struct Edge {
    int from;
    Action label;
    int to;
  };
  std::vector<Edge> edges;
};

/// Reachable states up to congruence, in discovery order.
LtsGraph reachable_lts(const Process& p);
std::string lts_to_dot(const LtsGraph& g);

// ---------------------------------------------------------------- layers

inline constexpr const char* kRedLayer = "Red";
inline constexpr const char* kLtsLayer = "LTS";

/// Object symbol of a sequential process in Red: its text with braces for
/// brackets.
std::string red_symbol(const Process& p);
/// Object symbol of the state (P, pending a) in LTS; silent pending omitted.
std::string lts_symbol(const Process& p, const Action& pending);
/// Red word of a process: the symbols of its components.
Word red_word(const Process& p);

struct CcsSystem {
  SystemOfLayers sys;
  /// The derived rewrite rule as an internal morphism of Red.
  InternalDiagram rule;
  Diagram sigma;
  /// The Red derivation moved through the I window.
  Diagram windowed;
  /// A direct LTS derivation of the same transition.
  Diagram counterfactual;
};

/// Red and LTS over the sequential processes reachable from `source` and
/// `target`, with `rule` derived by swaps, units and one reduction. The
/// defaults give x.0|(y.0|x'.0) -> 0|(y.0|0).
CcsSystem build_ccs_system(const Process& source, const Process& target);
CcsSystem build_ccs_system();

struct CcsVerdicts {
  ExplanationVerdict windowed;
  ExplanationVerdict counterfactual;
};

CcsVerdicts check_ccs_fixtures(const CcsSystem& cs, const ExplainOptions& opts = {});

}  // namespace layerprop::ccs
