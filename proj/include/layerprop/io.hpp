#pragma once

// JSON and s-expression formats for theories, terms, diagrams and
// derivations.

#include <string>

#include <json.hpp>

#include "layerprop/diagram.hpp"
#include "layerprop/rewrite.hpp"

namespace layerprop {

using json = nlohmann::ordered_json;

json word_to_json(const Word& w);
Word word_from_json(const json& j);
json sheet_to_json(const SheetType& s);
SheetType sheet_from_json(const json& j);
json type_to_json(const OmegaType& t);
OmegaType type_from_json(const json& j);

/// `{layer, dom, cod, slices: [{at, gen}]}`. `default_layer` fills a missing
/// layer field.
json internal_to_json(const InternalDiagram& d);
InternalDiagram internal_from_json(const json& j, const std::string& default_layer = "");

json theory_to_json(const SystemOfLayers& sys);
/// Parses and re-indexes a theory. Structural errors throw MalformedInput;
/// semantic problems are left to validate_system.
SystemOfLayers theory_from_json(const json& j);
SystemOfLayers load_theory(const std::string& path);
json load_json(const std::string& path);

json report_to_json(const ValidationReport& r);

json diagram_to_json(const Diagram& d);
Diagram diagram_from_json(const SystemOfLayers& sys, const json& j);

json match_to_json(const Match& m);
Match match_from_json(const json& j);
json derivation_to_json(const Derivation& dv);
Derivation derivation_from_json(const SystemOfLayers& sys, const json& j);

/// Parses the s-expression term syntax printed by term_to_string.
Term parse_term(const std::string& text);

}  // namespace layerprop
