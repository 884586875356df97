#pragma once

// Molecule partitions, the partitioning relation and the three chemistry
// layers used to explain glucose phosphorylation.

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "layerprop/explain.hpp"
#include "layerprop/io.hpp"

namespace layerprop::chem {

struct NodeType {
  bool is_var = false;
  /// Atom symbol, or the variable name.
  std::string symbol;

  static NodeType atom(std::string s) { return {false, std::move(s)}; }
  static NodeType var(std::string s) { return {true, std::move(s)}; }
  /// "$name" for variables, the symbol otherwise.
  std::string to_string() const { return is_var ? "$" + symbol : symbol; }
  bool operator==(const NodeType&) const = default;
};

struct ValenceTable {
  std::map<std::string, int> valence;

  /// Main-group defaults with H=1, O=2, N=3, C=4, P=5 and the charge
  /// markers + and - at 1.
  static ValenceTable defaults();
  /// Variables always have valence 1; unknown atoms give -1.
  int of(const NodeType& t) const;
};

class MoleculePartition {
 public:
  MoleculePartition() = default;

  int add_vertex(NodeType t, std::string id = {});
  /// Adds `mult` to the multiplicity of {a, b}.
  void bond(int a, int b, int mult = 1);

  int size() const { return static_cast<int>(types_.size()); }
  const NodeType& type(int v) const { return types_[v]; }
  const std::string& id(int v) const { return ids_[v]; }
  int mult(int a, int b) const { return adj_[static_cast<std::size_t>(a) * types_.size() + b]; }
  int degree(int v) const;
  bool has_var(const std::string& name) const;
  int count_var(const std::string& name) const;

  /// Takes the matrix as given, so that validation can reject it.
  static MoleculePartition from_matrix(std::vector<NodeType> types, const std::vector<std::vector<int>>& m);

 private:
  std::vector<NodeType> types_;
  std::vector<std::string> ids_;
  std::vector<int> adj_;
};

ValidationReport validate_partition(const MoleculePartition& m, const ValenceTable& vt = ValenceTable::defaults());
bool is_molecule(const MoleculePartition& m, const ValenceTable& vt = ValenceTable::defaults());

struct CanonicalLabel {
  /// order[k] is the vertex placed at position k.
  std::vector<int> order;
  std::string key;
};

/// Canonical labelling by colour refinement with individualisation.
CanonicalLabel canonical_label(const MoleculePartition& m);
bool isomorphic(const MoleculePartition& a, const MoleculePartition& b);
/// Hill formula; charges and variables appended, e.g. "C10H14N5O10P2-".
std::string formula(const MoleculePartition& m);

struct Split {
  /// Cut edge, as vertices of the input.
  int u, v;
  MoleculePartition first;   // side of u
  MoleculePartition second;  // side of v
};

/// One split per single-bond bridge, in canonical edge order.
std::vector<Split> enumerate_splits(const MoleculePartition& m, const std::string& var);
/// Removes the two var vertices and bonds their neighbours.
MoleculePartition join(const MoleculePartition& n, const MoleculePartition& k, const std::string& var);

json partition_to_json(const MoleculePartition& m);
MoleculePartition partition_from_json(const json& j);
MoleculePartition load_partition(const std::filesystem::path& p);

struct ChemSystem {
  SystemOfLayers sys;
  /// PartMol+ object symbol to its partition; Mol+ symbols are shared.
  std::map<std::string, MoleculePartition> objects;
  /// High-level names to their molecules, in the rule's order.
  std::vector<std::pair<std::string, MoleculePartition>> fixtures;
  Diagram sigma;
  Diagram explanation;
};

inline constexpr const char* kNamesLayer = "L+";
inline constexpr const char* kMolLayer = "Mol+";
inline constexpr const char* kPartLayer = "PartMol+";

/// Reads glucose, ATP, G6P, ADP and hplus from `molecule_dir`. Throws
/// FixtureInvalid if a fixture does not validate or the reaction cannot be
/// assembled from its splits.
ChemSystem build_chem_system(const std::filesystem::path& molecule_dir,
                             const ValenceTable& vt = ValenceTable::defaults());

ExplanationVerdict check_glucose_explanation(const ChemSystem& cs, const ExplainOptions& opts = {});

}  // namespace layerprop::chem
