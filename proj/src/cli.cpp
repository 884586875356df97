#include "layerprop/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "layerprop/ccs.hpp"
#include "layerprop/chem.hpp"
#include "layerprop/circuits.hpp"
#include "layerprop/explain.hpp"
#include "layerprop/internal.hpp"
#include "layerprop/io.hpp"
#include "layerprop/semantics.hpp"

#ifndef LAYERPROP_FIXTURE_DIR
#define LAYERPROP_FIXTURE_DIR "fixtures"
#endif

namespace layerprop::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  bool json = false;
  bool timings = false;
  std::string system;
  std::size_t budget = 10000;
  std::size_t max_states = 200000;
  std::size_t cap = 1000000;
  std::vector<std::string> faithful;
};

struct Report {
  json j = json::object();
  std::string text;
  int code = kOk;

  void line(const std::string& s) { text += s + "\n"; }
};

int exit_for(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Valid:
    case VerdictStatus::Certified: return kOk;
    case VerdictStatus::Invalid:
    case VerdictStatus::Refuted: return kFailed;
    case VerdictStatus::Unknown: return kUnknown;
  }
  return kFailed;
}

int exit_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::FixtureInvalid:
    case ErrorCode::SquareViolation:
    case ErrorCode::InvalidDerivation:
    case ErrorCode::StaleMatch:
    case ErrorCode::BoundaryMismatch: return kFailed;
    case ErrorCode::SearchTooLarge: return kUnknown;
    default: return kMalformed;
  }
}

std::string_view to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Found: return "Found";
    case SearchStatus::NotFound: return "NotFound";
    case SearchStatus::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The loaded theory together with the rule options it declares.
struct Loaded {
  SystemOfLayers sys;
  RuleOptions rules;
  fs::path dir;
};

Loaded load_system(const Common& c) {
  if (c.system.empty()) throw Error(ErrorCode::MalformedInput, "--system is required");
  const json j = load_json(c.system);
  Loaded l{theory_from_json(j), {}, fs::path(c.system).parent_path()};
  const auto rep = validate_system(l.sys);
  if (!rep.ok()) {
    const auto& i = rep.issues.front();
    throw Error(ErrorCode::MalformedInput, "invalid theory: " + i.location + ": " + i.message);
  }
  if (j.contains("faithful"))
    for (const auto& f : j.at("faithful")) l.rules.faithful_functors.insert(f.get<std::string>());
  for (const auto& f : c.faithful) l.rules.faithful_functors.insert(f);
  for (const auto& f : l.rules.faithful_functors)
    if (!l.sys.functor(f)) throw Error(ErrorCode::UnknownFunctor, f);
  return l;
}

// JSON diagrams, JSON {"term": ...} wrappers, or bare s-expression terms.
Diagram load_diagram(const SystemOfLayers& sys, const std::string& path) {
  if (fs::path(path).extension() == ".json") {
    const json j = load_json(path);
    if (j.is_object() && j.contains("term")) return compile(sys, parse_term(j.at("term").get<std::string>()));
    return diagram_from_json(sys, j);
  }
  return compile(sys, parse_term(read_text(path)));
}

Diagram resolve_sigma(const Loaded& l, const std::string& arg) {
  for (const fs::path& p : {fs::path(arg), fs::path(arg + ".json"), l.dir / arg, l.dir / (arg + ".json")})
    if (fs::is_regular_file(p)) return load_diagram(l.sys, p.string());
  for (const auto& layer : l.sys.layers)
    if (layer.find_generator(arg)) return box_diagram(internal_generator(l.sys, layer.id, arg));
  throw Error(ErrorCode::UnknownGenerator, "'" + arg + "' is neither a diagram file nor a generator");
}

json verdict_json(const ExplanationVerdict& v) {
  json failed = json::array();
  for (const auto& f : v.failed_conditions) failed.push_back({{"condition", f.condition}, {"reason", f.reason}});
  return {{"status", std::string(to_string(v.status))},
          {"witness", v.witness ? derivation_to_json(*v.witness) : json(nullptr)},
          {"failed_conditions", failed}};
}

void describe(Report& r, const ExplanationVerdict& v) {
  r.line("verdict: " + std::string(to_string(v.status)));
  if (v.witness) {
    r.line("witness: " + std::to_string(v.witness->steps.size()) + " steps");
    for (const auto& m : v.witness->steps) r.line("  " + match_to_string(m));
  }
  for (const auto& f : v.failed_conditions) r.line("condition " + f.condition + ": " + f.reason);
}

ExplainOptions explain_options(const Common& c, const RuleOptions& rules) {
  ExplainOptions o;
  o.budget = c.budget;
  o.max_states = c.max_states;
  o.rules = rules;
  return o;
}

std::string sort_string(const Sort& s) { return type_to_json(s.dom).dump() + " -> " + type_to_json(s.cod).dump(); }

// ---------------------------------------------------------------- verbs

void check_theory(const Common& c, Report& r) {
  const SystemOfLayers sys = load_theory(c.system);
  const auto rep = validate_system(sys);
  r.j["ok"] = rep.ok();
  r.j["issues"] = report_to_json(rep).at("issues");
  r.line(rep.ok() ? "theory ok" : "theory has " + std::to_string(rep.issues.size()) + " issue(s)");
  for (const auto& i : rep.issues) r.line("  " + i.kind + " at " + i.location + ": " + i.message);
  std::size_t gens = 0;
  for (const auto& l : sys.layers) gens += l.generators.size();
  r.j["layers"] = sys.layers.size();
  r.j["generators"] = gens;
  r.j["functors"] = sys.functors.size();
  if (!rep.ok()) r.code = kFailed;
}

void typecheck(const Common& c, const std::vector<std::string>& files, Report& r) {
  const Loaded l = load_system(c);
  json items = json::array();
  for (const auto& f : files) {
    const Diagram d = load_diagram(l.sys, f);
    const Sort s = infer_sort(d);
    items.push_back({{"file", fs::path(f).filename().string()},
                     {"dom", type_to_json(s.dom)},
                     {"cod", type_to_json(s.cod)},
                     {"cells", d.cells.size()},
                     {"internal", as_internal(l.sys, d).has_value()}});
    r.line(fs::path(f).filename().string() + ": " + sort_string(s));
  }
  r.j["diagrams"] = items;
}

void eq(const Common& c, const std::vector<std::string>& files, Report& r) {
  if (files.size() != 2) throw Error(ErrorCode::MalformedInput, "eq takes two diagrams");
  const Loaded l = load_system(c);
  const Diagram a = load_diagram(l.sys, files[0]);
  const Diagram b = load_diagram(l.sys, files[1]);
  if (a.sort() != b.sort())
    throw Error(ErrorCode::SortMismatch, sort_string(a.sort()) + " differs from " + sort_string(b.sort()));
  const bool equal = structural_eq(l.sys, a, b);
  r.j["equal"] = equal;
  r.line(equal ? "equal" : "not equal");
  if (!equal) r.code = kFailed;
}

void derive(const Common& c, const std::vector<std::string>& files, Report& r) {
  if (files.size() != 2) throw Error(ErrorCode::MalformedInput, "derive takes two diagrams");
  const Loaded l = load_system(c);
  SearchOptions so;
  so.budget = c.budget;
  so.max_states = c.max_states;
  so.rules = l.rules;
  const auto res =
      find_derivation(l.sys, load_diagram(l.sys, files[0]), load_diagram(l.sys, files[1]), so);
  r.j["status"] = std::string(to_string(res.status));
  r.j["states"] = res.states;
  r.j["derivation"] = res.derivation ? derivation_to_json(*res.derivation) : json(nullptr);
  r.line("search: " + std::string(to_string(res.status)) + " after " + std::to_string(res.states) + " states");
  if (res.derivation)
    for (const auto& m : res.derivation->steps) r.line("  " + match_to_string(m));
  r.code = res.status == SearchStatus::Found ? kOk : res.status == SearchStatus::NotFound ? kFailed : kUnknown;
}

void explain(const Common& c, const std::string& sigma, const std::string& diagram, bool counterfactual, Report& r) {
  const Loaded l = load_system(c);
  const Diagram s = resolve_sigma(l, sigma);
  const Diagram e = load_diagram(l.sys, diagram);
  const auto o = explain_options(c, l.rules);
  const auto v = counterfactual ? check_counterfactual(l.sys, e, s, o) : check_explanation_1(l.sys, e, s, o);
  r.j["verdict"] = verdict_json(v);
  describe(r, v);
  r.code = exit_for(v.status);
}

void explain2(const Common& c, const std::string& derivation, const std::string& equation, Report& r) {
  const Loaded l = load_system(c);
  const auto slash = equation.find('/');
  if (slash == std::string::npos) throw Error(ErrorCode::MalformedInput, "--equation takes LAYER/NAME");
  const EquationRef mu{equation.substr(0, slash), equation.substr(slash + 1)};
  const Derivation eta = derivation_from_json(l.sys, load_json(derivation));
  const auto v = check_explanation_2(l.sys, eta, mu, l.rules);
  r.j["verdict"] = verdict_json(v);
  describe(r, v);
  r.code = exit_for(v.status);
}

void semantics_verify(const Common& c, const std::vector<std::string>& models, const std::vector<std::string>& rules,
                      Report& r) {
  const std::set<std::string> want(models.begin(), models.end());
  const std::set<std::string> rule_set(rules.begin(), rules.end());
  json out = json::array();
  std::size_t seen = 0;
  for (const auto& m : builtin_models()) {
    if (!want.empty() && !want.count(m.name)) continue;
    ++seen;
    const auto model_rep = check_model(m.sys, m.model);
    std::size_t passed = 0, total = 0;
    json failures = json::array();
    for (const auto& inst : sample_instances(m, rule_set)) {
      ++total;
      const auto chk = verify_rule_semantics(m.sys, m.model, inst, c.cap);
      if (chk.ok) {
        ++passed;
        continue;
      }
      failures.push_back({{"rule", inst.rule}, {"variant", inst.variant}, {"lhs", term_to_string(inst.lhs_term)},
                          {"rhs", term_to_string(inst.rhs_term)}, {"reason", chk.reason}});
    }
    out.push_back({{"model", m.name}, {"model_ok", model_rep.ok()}, {"instances", total}, {"passed", passed},
                   {"failures", failures}});
    r.line(m.name + ": model " + (model_rep.ok() ? "ok" : "invalid") + ", " + std::to_string(passed) + "/" +
           std::to_string(total) + " rule instances hold");
    for (const auto& f : failures)
      r.line("  " + f.at("rule").get<std::string>() + " " + f.at("lhs").get<std::string>() + ": " +
             f.at("reason").get<std::string>());
    if (!model_rep.ok() || passed != total) r.code = kFailed;
  }
  if (seen == 0) throw Error(ErrorCode::MalformedInput, "no such model");
  r.j["models"] = out;
}

void chem_verb(const Common& c, const std::string& dir, const std::string& molecule, const std::string& var,
               Report& r) {
  if (!molecule.empty()) {
    const auto m = chem::load_partition(molecule);
    const auto rep = chem::validate_partition(m);
    r.j["formula"] = chem::formula(m);
    r.j["valid"] = report_to_json(rep);
    r.line(chem::formula(m) + (rep.ok() ? " is a molecule" : " does not validate"));
    for (const auto& i : rep.issues) r.line("  " + i.kind + ": " + i.message);
    if (!rep.ok()) {
      r.code = kFailed;
      return;
    }
    json splits = json::array();
    for (const auto& s : chem::enumerate_splits(m, var)) {
      splits.push_back({{"u", m.id(s.u)}, {"v", m.id(s.v)}, {"first", chem::formula(s.first)},
                        {"second", chem::formula(s.second)}});
      r.line("  split " + m.id(s.u) + "-" + m.id(s.v) + ": " + chem::formula(s.first) + " + " +
             chem::formula(s.second));
    }
    r.j["splits"] = splits;
    return;
  }
  const auto cs = chem::build_chem_system(dir);
  json mols = json::object();
  for (const auto& [name, m] : cs.fixtures) {
    mols[name] = chem::formula(m);
    r.line(name + ": " + chem::formula(m));
  }
  r.j["molecules"] = mols;
  const auto v = chem::check_glucose_explanation(cs, explain_options(c, {}));
  r.j["verdict"] = verdict_json(v);
  describe(r, v);
  r.code = exit_for(v.status);
}

void ccs_verb(const Common& c, const std::string& source, const std::string& target, const std::string& reduce,
              const std::vector<std::string>& bisim, const std::string& lts, Report& r) {
  using namespace ccs;
  if (!reduce.empty()) {
    const Process p = parse_process(reduce);
    json out = json::array();
    for (const auto& q : reductions(p)) {
      out.push_back(q.to_string());
      r.line(p.to_string() + " -> " + q.to_string());
    }
    r.j["reductions"] = out;
    return;
  }
  if (!bisim.empty()) {
    if (bisim.size() != 2) throw Error(ErrorCode::MalformedInput, "--bisim takes two processes");
    const bool b = bisimilar(parse_process(bisim[0]), parse_process(bisim[1]));
    r.j["bisimilar"] = b;
    r.line(b ? "bisimilar" : "not bisimilar");
    if (!b) r.code = kFailed;
    return;
  }
  if (!lts.empty()) {
    const auto g = reachable_lts(parse_process(lts));
    json states = json::array(), edges = json::array();
    for (const auto& s : g.states) states.push_back(s.to_string());
    for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"label", e.label}, {"to", e.to}});
    r.j["states"] = states;
    r.j["edges"] = edges;
    for (const auto& e : g.edges)
      r.line(g.states[e.from].to_string() + " --" + e.label + "--> " + g.states[e.to].to_string());
    return;
  }
  const auto cs = build_ccs_system(parse_process(source), parse_process(target));
  const auto v = check_ccs_fixtures(cs, explain_options(c, {}));
  r.j["rule"] = internal_to_json(cs.rule);
  r.j["windowed"] = verdict_json(v.windowed);
  r.j["counterfactual"] = verdict_json(v.counterfactual);
  r.line("windowed reduction:");
  describe(r, v.windowed);
  r.line("direct transition:");
  describe(r, v.counterfactual);
  const bool ok = v.windowed.status == VerdictStatus::Valid && v.counterfactual.status == VerdictStatus::Certified;
  const bool unknown =
      v.windowed.status == VerdictStatus::Unknown || v.counterfactual.status == VerdictStatus::Unknown;
  r.code = ok ? kOk : unknown ? kUnknown : kFailed;
}

void circuit_verb(const std::string& file, Report& r) {
  using namespace circuits;
  if (!file.empty()) {
    const BipoleTerm t = circuit_from_json(load_json(file));
    const auto sem = bipole_semantics(t);
    const auto z = boxing_B(t);
    const bool square = affine_eq(wrapping_W(z), sem);
    r.j["circuit"] = circuit_to_json(t);
    r.j["semantics"] = relation_to_json(sem);
    r.j["impedance"] = relation_to_json(z);
    r.j["square"] = square;
    r.line("semantics: " + sem.key());
    r.line("impedance: " + z.key());
    r.line(square ? "W(B(c)) agrees with the circuit semantics" : "W(B(c)) differs from the circuit semantics");
    if (!square) r.code = kFailed;
    return;
  }
  const auto cs = build_circuit_system();
  json gens = json::array();
  for (const auto& g : cs.generators) gens.push_back(g.name());
  r.j["generators"] = gens;
  r.j["square"] = true;
  r.line("square commutes on " + std::to_string(cs.generators.size()) + " generators");
  const auto v = check_resistor_explanation(cs);
  r.j["verdict"] = verdict_json(v);
  describe(r, v);
  r.code = exit_for(v.status);
}

void export_dot_verb(const Common& c, const std::vector<std::string>& files, const std::string& lts, Report& r) {
  std::string dot;
  if (!lts.empty()) {
    dot = ccs::lts_to_dot(ccs::reachable_lts(ccs::parse_process(lts)));
  } else {
    if (files.size() != 1) throw Error(ErrorCode::MalformedInput, "export-dot takes one diagram");
    const Loaded l = load_system(c);
    dot = export_dot(l.sys, load_diagram(l.sys, files[0]));
  }
  r.j["dot"] = dot;
  r.text = dot;
}

}  // namespace

Outcome run(const std::vector<std::string>& args) {
  CLI::App app{"Layered props: typed string diagrams, rewriting and explanations", "layerprop"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Common c;
  app.add_flag("--json", c.json, "Machine-readable report");
  app.add_flag("--timings", c.timings, "Include the elapsed time in the report");
  app.add_option("--system", c.system, "Theory file");
  app.add_option("--budget", c.budget, "Derivation search depth")->capture_default_str();
  app.add_option("--max-states", c.max_states, "Derivation search state cap")->capture_default_str();
  app.add_option("--cap", c.cap, "Natural transformation search cap")->capture_default_str();
  app.add_option("--faithful", c.faithful, "Functor for which window collapse is allowed");

  std::vector<std::string> files, models, rules, bisim;
  std::string sigma, diagram, derivation, equation, dir = std::string(LAYERPROP_FIXTURE_DIR) + "/molecules";
  std::string molecule, var = "x", source = "x.0|(y.0|x'.0)", target = "0|(y.0|0)", reduce, lts, circuit;

  auto* v_check = app.add_subcommand("check-theory", "Validate a theory");
  auto* v_type = app.add_subcommand("typecheck", "Infer the sort of diagrams");
  v_type->add_option("files", files, "Diagram files")->required();
  auto* v_eq = app.add_subcommand("eq", "Structural equality of two diagrams");
  v_eq->add_option("files", files, "Diagram files")->required();
  auto* v_derive = app.add_subcommand("derive", "Search for a derivation between two diagrams");
  v_derive->add_option("files", files, "Diagram files")->required();
  auto* v_explain = app.add_subcommand("explain", "Check an explanation of a 1-cell");
  auto* v_cf = app.add_subcommand("counterfactual", "Check a counterfactual explanation");
  for (auto* s : {v_explain, v_cf}) {
    s->add_option("--sigma", sigma, "Explained cell: a diagram file or a generator name")->required();
    s->add_option("--diagram", diagram, "Explanation diagram")->required();
  }
  auto* v_explain2 = app.add_subcommand("explain2", "Check an explanation of a 2-cell");
  v_explain2->add_option("--derivation", derivation, "Derivation file")->required();
  v_explain2->add_option("--equation", equation, "Explained equation as LAYER/NAME")->required();
  auto* v_sem = app.add_subcommand("semantics-verify", "Check the rule families in the built-in models");
  v_sem->add_option("--model", models, "Model name");
  v_sem->add_option("--rule", rules, "Rule family");
  auto* v_chem = app.add_subcommand("chem", "Glucose phosphorylation, or splits of one molecule");
  v_chem->add_option("--molecules", dir, "Directory with the molecule fixtures");
  v_chem->add_option("--molecule", molecule, "Validate one molecule and list its splits");
  v_chem->add_option("--var", var, "Variable name used for splits")->capture_default_str();
  auto* v_ccs = app.add_subcommand("ccs", "Reduction against transition semantics");
  v_ccs->add_option("--source", source, "Process before the reduction")->capture_default_str();
  v_ccs->add_option("--target", target, "Process after the reduction")->capture_default_str();
  v_ccs->add_option("--reductions", reduce, "List the one-step reducts of a process");
  v_ccs->add_option("--bisim", bisim, "Decide strong bisimilarity of two processes")->expected(2);
  v_ccs->add_option("--lts", lts, "List the reachable transitions of a process");
  auto* v_circ = app.add_subcommand("circuit", "Impedance calculus checks");
  v_circ->add_option("file", circuit, "Circuit file; omitted for the built-in checks");
  auto* v_dot = app.add_subcommand("export-dot", "Render a diagram or a transition system as DOT");
  v_dot->add_option("files", files, "Diagram file");
  v_dot->add_option("--lts", lts, "Process whose transition system is rendered");
  (void)v_check;

  std::vector<std::string> argv_store{"layerprop"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  Outcome out;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int rc = app.exit(e, o, er);
    out.code = rc == 0 ? kOk : kMalformed;
    out.out = o.str();
    out.err = er.str();
    return out;
  }

  CLI::App* verb = app.get_subcommands().front();
  Report r;
  r.j["verb"] = verb->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (verb == v_check) check_theory(c, r);
    else if (verb == v_type) typecheck(c, files, r);
    else if (verb == v_eq) eq(c, files, r);
    else if (verb == v_derive) derive(c, files, r);
    else if (verb == v_explain) explain(c, sigma, diagram, false, r);
    else if (verb == v_cf) explain(c, sigma, diagram, true, r);
    else if (verb == v_explain2) explain2(c, derivation, equation, r);
    else if (verb == v_sem) semantics_verify(c, models, rules, r);
    else if (verb == v_chem) chem_verb(c, dir, molecule, var, r);
    else if (verb == v_ccs) ccs_verb(c, source, target, reduce, bisim, lts, r);
    else if (verb == v_circ) circuit_verb(circuit, r);
    else if (verb == v_dot) export_dot_verb(c, files, lts, r);
  } catch (const Error& e) {
    r = Report{};
    r.j["verb"] = verb->get_name();
    r.j["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    r.code = exit_for(e.code());
    out.err = std::string(e.what()) + "\n";
  } catch (const std::exception& e) {
    r = Report{};
    r.j["verb"] = verb->get_name();
    r.j["error"] = {{"code", "MalformedInput"}, {"message", e.what()}};
    r.code = kMalformed;
    out.err = std::string(e.what()) + "\n";
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  r.j["exit"] = r.code;
  if (c.timings) {
    r.j["elapsed_ms"] = ms;
    r.line("time: " + std::to_string(ms) + " ms");
  }
  out.code = r.code;
  if (c.json) out.out = r.j.dump(2) + "\n";
  else if (!r.j.contains("error")) out.out = r.text;
  return out;
}

}  // namespace layerprop::cli
