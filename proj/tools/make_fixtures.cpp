// Regenerates the exported theories and diagrams under fixtures/ from the
// case-study builders.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "layerprop/ccs.hpp"
#include "layerprop/chem.hpp"
#include "layerprop/circuits.hpp"
#include "layerprop/io.hpp"

namespace fs = std::filesystem;
using namespace layerprop;

namespace {

void write(const fs::path& p, const json& j) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << j.dump(2) << "\n";
  std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: layerprop_fixtures FIXTURE_DIR\n";
    return 1;
  }
  const fs::path root = argv[1];
  try {
    const auto chem = chem::build_chem_system(root / "molecules");
    write(root / "chem" / "chem.json", theory_to_json(chem.sys));
    write(root / "chem" / "glucose.json", diagram_to_json(chem.explanation));

    const auto ccs = ccs::build_ccs_system();
    write(root / "ccs" / "ccs.json", theory_to_json(ccs.sys));
    write(root / "ccs" / "red1.json", diagram_to_json(ccs.sigma));
    write(root / "ccs" / "windowed.json", diagram_to_json(ccs.windowed));
    write(root / "ccs" / "lts2.json", diagram_to_json(ccs.counterfactual));

    const auto circ = circuits::build_circuit_system();
    json theory = theory_to_json(circ.sys);
    theory["faithful"] = circ.rules.faithful_functors;
    write(root / "circuits" / "circuits.json", theory);
    write(root / "circuits" / "resistors.json", derivation_to_json(circ.eta));
    const circuits::BipoleTerm series{{circuits::BipoleKind::Resistor, 2}, {circuits::BipoleKind::Resistor, 3}};
    write(root / "circuits" / "series.json", circuits::circuit_to_json(series));
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
