#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

#include "layerprop/ccs.hpp"
#include "layerprop/chem.hpp"
#include "layerprop/circuits.hpp"
#include "layerprop/cli.hpp"
#include "layerprop/io.hpp"

namespace py = pybind11;
using namespace layerprop;

namespace {

circuits::Scalar scalar(const std::string& text) {
  try {
    return circuits::Scalar(mpq_class(text));
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::MalformedInput, "not a rational number: " + text);
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the layerprop library";
  py::register_exception<Error>(m, "Error");

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        const auto o = cli::run(args);
        return std::make_tuple(o.code, o.out, o.err);
      },
      py::arg("args"), "Run a command line, returning (exit code, stdout, stderr).");

  m.def(
      "check_theory",
      [](const std::string& path) {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& i : validate_system(load_theory(path)).issues) out.emplace_back(i.kind, i.location, i.message);
        return out;
      },
      py::arg("path"), "Issues of a theory file as (kind, location, message); empty when valid.");

  m.def(
      "reductions",
      [](const std::string& p) {
        std::vector<std::string> out;
        for (const auto& r : ccs::reductions(ccs::parse_process(p))) out.push_back(r.to_string());
        return out;
      },
      py::arg("process"));
  m.def(
      "bisimilar",
      [](const std::string& p, const std::string& q) {
        return ccs::bisimilar(ccs::parse_process(p), ccs::parse_process(q));
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "congruent",
      [](const std::string& p, const std::string& q) {
        return ccs::congruent(ccs::parse_process(p), ccs::parse_process(q));
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "molecule_formula", [](const std::string& path) { return chem::formula(chem::load_partition(path)); },
      py::arg("path"));
  m.def(
      "molecule_valid", [](const std::string& path) { return chem::validate_partition(chem::load_partition(path)).ok(); },
      py::arg("path"));
  m.def(
      "molecule_splits",
      [](const std::string& path, const std::string& var) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& s : chem::enumerate_splits(chem::load_partition(path), var))
          out.emplace_back(chem::formula(s.first), chem::formula(s.second));
        return out;
      },
      py::arg("path"), py::arg("var") = "x", "Formulas of both sides of every split.");
  m.def(
      "isomorphic",
      [](const std::string& a, const std::string& b) {
        return chem::isomorphic(chem::load_partition(a), chem::load_partition(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "series_impedance",
      [](const std::vector<std::string>& values) {
        circuits::Impedance z = circuits::imp_identity();
        for (const auto& v : values) z = circuits::imp_compose(z, circuits::scalar_impedance(scalar(v)));
        return z.key();
      },
      py::arg("values"), "Key of the series composite of scalar impedances.");
  m.def(
      "scalar_impedance", [](const std::string& v) { return circuits::scalar_impedance(scalar(v)).key(); },
      py::arg("value"));
}
