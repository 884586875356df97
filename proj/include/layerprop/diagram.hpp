#pragma once

// 1-cells of a layered prop: the term language of sheets and its compiled
// port-graph form, compared modulo the symmetric monoidal laws.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "layerprop/theory.hpp"

namespace layerprop {

enum class CellKind { Box, Pants, Copants, Cup, Cap, Refine, Coarsen, External };

std::string_view to_string(CellKind k);

struct Cell {
  CellKind kind = CellKind::Box;
  /// Layer of the cell. For Refine and Coarsen this is the functor's source.
  std::string layer;
  std::string functor;
  /// External generator name.
  std::string name;
  /// Pants/Copants: the two factors. Refine/Coarsen: the source word.
  Word a, b;
  InternalDiagram box;
  OmegaType ins, outs;

  bool operator==(const Cell&) const = default;
};

Cell make_box(InternalDiagram d);
Cell make_pants(const std::string& layer, Word a, Word b);
Cell make_copants(const std::string& layer, Word a, Word b);
Cell make_cup(const std::string& layer);
Cell make_cap(const std::string& layer);
Cell make_refine(const SystemOfLayers& sys, const std::string& functor, Word a);
Cell make_coarsen(const SystemOfLayers& sys, const std::string& functor, Word a);
Cell make_external(const SystemOfLayers& sys, const std::string& name);

/// Stable textual label; equal labels mean interchangeable cells.
std::string cell_label(const Cell& c);

constexpr int kBoundary = -1;

/// A port reference. As a producer: (cell, output) or (kBoundary, input
/// index). As a consumer: (cell, input) or (kBoundary, output index).
struct Port {
  int cell = kBoundary;
  int port = 0;

  auto operator<=>(const Port&) const = default;
  bool operator==(const Port&) const = default;
};

struct Diagram {
  OmegaType in;
  OmegaType out;
  std::vector<Cell> cells;
  /// feeds[c][k]: producer of input k of cell c.
  std::vector<std::vector<Port>> feeds;
  /// Producer of each outer output.
  std::vector<Port> out_feeds;

  Sort sort() const { return {in, out}; }
  bool operator==(const Diagram&) const = default;
};

/// Consumer of every producer port, indexed like `feeds`.
struct ConsumerMap {
  std::vector<std::vector<Port>> of_cell;  // of_cell[c][k]: consumer of output k of cell c
  std::vector<Port> of_input;              // consumer of outer input k
};

ConsumerMap consumers(const Diagram& d);

/// Throws SortMismatch / MalformedInput when the port graph is not a
/// well-typed, linear, acyclic wiring.
void check_diagram(const Diagram& d);
std::vector<int> topological_order(const Diagram& d);
/// True when some directed path leads from cell `from` to cell `to`.
bool reaches(const Diagram& d, int from, int to);

Diagram empty_diagram();
Diagram identity_diagram(const OmegaType& t);
Diagram single_cell(const Cell& c);
Diagram sym_diagram(const SheetType& x, const SheetType& y);
Diagram box_diagram(const InternalDiagram& d);

Diagram seq_compose(const Diagram& x, const Diagram& y);
Diagram par_tensor(const Diagram& x, const Diagram& y);

/// The internal morphism carried by a diagram built only from internal
/// boxes and identities on one sheet, if any.
std::optional<InternalDiagram> as_internal(const SystemOfLayers& sys, const Diagram& d);
Diagram fuse_internal(const SystemOfLayers& sys, const Diagram& x, const Diagram& y,
                      const std::string& layer);

/// Term syntax following the recursive construction of terms.
struct Term {
  enum class Kind { Empty, Id, Gen, Box, Pants, Copants, Cup, Cap, Refine, Coarsen, Sym, Seq, Par, Fuse };
  Kind kind = Kind::Empty;
  std::string layer;    // Id, Gen (internal), Pants, Copants, Cup, Cap, Fuse, Sym (first sheet)
  std::string layer2;   // Sym second sheet
  std::string functor;  // Refine, Coarsen
  std::string name;     // Gen
  Word a, b;
  InternalDiagram box;
  std::vector<Term> args;

  static Term empty() { return {}; }
  static Term id(std::string layer, Word w);
  static Term gen(std::string layer, std::string name);
  static Term external(std::string name);
  static Term boxed(InternalDiagram d);
  static Term pants(std::string layer, Word a, Word b);
  static Term copants(std::string layer, Word a, Word b);
  static Term cup(std::string layer);
  static Term cap(std::string layer);
  static Term refine(std::string functor, Word a);
  static Term coarsen(std::string functor, Word a);
  static Term sym(std::string l1, Word a, std::string l2, Word b);
  static Term seq(std::vector<Term> parts);
  static Term par(std::vector<Term> parts);
  static Term fuse(std::string layer, Term x, Term y);
};

bool is_internal_term(const SystemOfLayers& sys, const Term& t);
Sort infer_sort(const SystemOfLayers& sys, const Term& t);
Sort infer_sort(const Diagram& d);
Diagram compile(const SystemOfLayers& sys, const Term& t);
std::string term_to_string(const Term& t);
/// A term compiling to a diagram isomorphic to `d`: cells in topological
/// order, wires routed with adjacent symmetries.
Term diagram_to_term(const Diagram& d);

/// Drops identity boxes, merges adjacent boxes of a layer and puts box
/// contents in interchange normal form.
Diagram normalize(const SystemOfLayers& sys, const Diagram& d);

struct CanonicalForm {
  Diagram diagram;
  std::string key;
};

CanonicalForm canonicalize(const SystemOfLayers& sys, const Diagram& d);
bool structural_eq(const SystemOfLayers& sys, const Diagram& x, const Diagram& y);

std::string export_dot(const SystemOfLayers& sys, const Diagram& d);

}  // namespace layerprop
