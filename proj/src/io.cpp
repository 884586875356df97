#include "layerprop/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "layerprop/error.hpp"

namespace layerprop {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::MalformedInput, msg); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string str(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string str_or(const json& j, const char* key, const std::string& dflt) {
  return j.contains(key) ? str(j, key) : dflt;
}

const json& array(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_array()) bad(std::string("field '") + key + "' must be an array");
  return v;
}

int integer(const json& j) {
  if (!j.is_number_integer()) bad("expected an integer");
  return j.get<int>();
}

json port_to_json(const Port& p) { return json::array({p.cell, p.port}); }

Port port_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) bad("a port is [cell, port]");
  return {integer(j[0]), integer(j[1])};
}

}  // namespace

json word_to_json(const Word& w) { return json(w); }

Word word_from_json(const json& j) {
  if (!j.is_array()) bad("a word is an array of symbols");
  Word w;
  for (const auto& s : j) {
    if (!s.is_string()) bad("a word is an array of symbols");
    w.push_back(s.get<std::string>());
  }
  return w;
}

json sheet_to_json(const SheetType& s) { return {{"layer", s.layer}, {"word", s.word}}; }

SheetType sheet_from_json(const json& j) { return {str(j, "layer"), word_from_json(field(j, "word"))}; }

json type_to_json(const OmegaType& t) {
  json out = json::array();
  for (const auto& s : t) out.push_back(sheet_to_json(s));
  return out;
}

OmegaType type_from_json(const json& j) {
  if (!j.is_array()) bad("a type is an array of sheets");
  OmegaType t;
  for (const auto& s : j) t.push_back(sheet_from_json(s));
  return t;
}

json internal_to_json(const InternalDiagram& d) {
  json slices = json::array();
  for (const auto& s : d.slices) slices.push_back({{"at", s.offset}, {"gen", s.gen}});
  return {{"layer", d.layer}, {"dom", d.dom}, {"cod", d.cod}, {"slices", slices}};
}

InternalDiagram internal_from_json(const json& j, const std::string& default_layer) {
  InternalDiagram d;
  d.layer = str_or(j, "layer", default_layer);
  if (d.layer.empty()) bad("internal diagram without a layer");
  d.dom = word_from_json(field(j, "dom"));
  d.cod = word_from_json(field(j, "cod"));
  if (j.contains("slices")) {
    for (const auto& s : array(j, "slices")) {
      const int at = integer(field(s, "at"));
      if (at < 0) bad("negative slice offset");
      d.slices.push_back({static_cast<std::size_t>(at), str(s, "gen")});
    }
  }
  return d;
}

// ---------------------------------------------------------------- theories

json theory_to_json(const SystemOfLayers& sys) {
  json layers = json::array();
  for (const auto& l : sys.layers) {
    json gens = json::array();
    for (const auto& g : l.generators) gens.push_back({{"name", g.name}, {"dom", g.dom}, {"cod", g.cod}});
    json eqs = json::array();
    for (const auto& e : l.equations)
      eqs.push_back({{"name", e.name}, {"lhs", internal_to_json(e.lhs)}, {"rhs", internal_to_json(e.rhs)}});
    layers.push_back({{"id", l.id}, {"objects", l.objects}, {"generators", gens}, {"equations", eqs}});
  }
  json functors = json::array();
  for (const auto& f : sys.functors) {
    json objects = json::object();
    for (const auto& [k, v] : f.object_map) objects[k] = v;
    json morphisms = json::object();
    for (const auto& [k, v] : f.morphism_map) morphisms[k] = internal_to_json(v);
    functors.push_back(
        {{"name", f.name}, {"source", f.source}, {"target", f.target}, {"objects", objects}, {"morphisms", morphisms}});
  }
  json order = json::array();
  for (const auto& [u, l] : sys.order) order.push_back({u, l});
  json out = {{"layers", layers}, {"functors", functors}, {"order", order}};
  if (!sys.external.empty()) {
    json ext = json::array();
    for (const auto& e : sys.external)
      ext.push_back({{"name", e.name}, {"arity", type_to_json(e.arity)}, {"coarity", type_to_json(e.coarity)}});
    out["external"] = ext;
  }
  return out;
}

SystemOfLayers theory_from_json(const json& j) {
  if (!j.is_object()) bad("a theory is a JSON object");
  SystemOfLayers sys;
  for (const auto& lj : array(j, "layers")) {
    LayerPresentation l(str(lj, "id"));
    if (lj.contains("objects"))
      for (const auto& o : array(lj, "objects")) {
        if (!o.is_string()) bad("object names are strings");
        // Keep duplicates visible to validation.
        l.objects.push_back(o.get<std::string>());
      }
    if (lj.contains("generators"))
      for (const auto& g : array(lj, "generators"))
        l.generators.push_back({str(g, "name"), word_from_json(field(g, "dom")), word_from_json(field(g, "cod"))});
    if (lj.contains("equations"))
      for (const auto& e : array(lj, "equations"))
        l.equations.push_back({str(e, "name"), internal_from_json(field(e, "lhs"), l.id),
                               internal_from_json(field(e, "rhs"), l.id)});
    l.reindex();
    sys.layers.push_back(std::move(l));
  }
  if (j.contains("functors")) {
    for (const auto& fj : array(j, "functors")) {
      TranslationFunctor f;
      f.name = str(fj, "name");
      f.source = str(fj, "source");
      f.target = str(fj, "target");
      if (fj.contains("objects")) {
        const auto& o = field(fj, "objects");
        if (!o.is_object()) bad("functor objects must be an object");
        for (const auto& [k, v] : o.items()) f.object_map[k] = word_from_json(v);
      }
      if (fj.contains("morphisms")) {
        const auto& m = field(fj, "morphisms");
        if (!m.is_object()) bad("functor morphisms must be an object");
        for (const auto& [k, v] : m.items()) f.morphism_map[k] = internal_from_json(v, f.target);
      }
      sys.functors.push_back(std::move(f));
    }
  }
  if (j.contains("order")) {
    for (const auto& p : array(j, "order")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
        bad("order entries are [upper, lower]");
      sys.order.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
  }
  if (j.contains("external")) {
    for (const auto& e : array(j, "external"))
      sys.external.push_back({str(e, "name"), type_from_json(field(e, "arity")), type_from_json(field(e, "coarity"))});
  }
  return sys;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    bad(path + ": " + e.what());
  }
}

SystemOfLayers load_theory(const std::string& path) { return theory_from_json(load_json(path)); }

json report_to_json(const ValidationReport& r) {
  json issues = json::array();
  for (const auto& i : r.issues) issues.push_back({{"kind", i.kind}, {"location", i.location}, {"message", i.message}});
  return {{"ok", r.ok()}, {"issues", issues}};
}

// ---------------------------------------------------------------- diagrams

json diagram_to_json(const Diagram& d) {
  json cells = json::array();
  for (const auto& c : d.cells) {
    json cj = {{"kind", std::string(to_string(c.kind))}};
    switch (c.kind) {
      case CellKind::Box: cj["box"] = internal_to_json(c.box); break;
      case CellKind::Pants:
      case CellKind::Copants:
        cj["layer"] = c.layer;
        cj["a"] = c.a;
        cj["b"] = c.b;
        break;
      case CellKind::Cup:
      case CellKind::Cap: cj["layer"] = c.layer; break;
      case CellKind::Refine:
      case CellKind::Coarsen:
        cj["functor"] = c.functor;
        cj["a"] = c.a;
        break;
      case CellKind::External: cj["name"] = c.name; break;
    }
    cells.push_back(cj);
  }
  json wires = json::array();
  for (std::size_t c = 0; c < d.feeds.size(); ++c)
    for (std::size_t k = 0; k < d.feeds[c].size(); ++k)
      wires.push_back({{"from", port_to_json(d.feeds[c][k])},
                       {"to", port_to_json({static_cast<int>(c), static_cast<int>(k)})}});
  for (std::size_t k = 0; k < d.out_feeds.size(); ++k)
    wires.push_back({{"from", port_to_json(d.out_feeds[k])}, {"to", port_to_json({kBoundary, static_cast<int>(k)})}});
  return {{"sort", {{"dom", type_to_json(d.in)}, {"cod", type_to_json(d.out)}}}, {"cells", cells}, {"wires", wires}};
}

Diagram diagram_from_json(const SystemOfLayers& sys, const json& j) {
  Diagram d;
  const auto& sort = field(j, "sort");
  d.in = type_from_json(field(sort, "dom"));
  d.out = type_from_json(field(sort, "cod"));
  for (const auto& cj : array(j, "cells")) {
    const std::string kind = str(cj, "kind");
    if (kind == "box") d.cells.push_back(make_box(internal_from_json(field(cj, "box"))));
    else if (kind == "pants")
      d.cells.push_back(make_pants(str(cj, "layer"), word_from_json(field(cj, "a")), word_from_json(field(cj, "b"))));
    else if (kind == "copants")
      d.cells.push_back(make_copants(str(cj, "layer"), word_from_json(field(cj, "a")), word_from_json(field(cj, "b"))));
    else if (kind == "cup") d.cells.push_back(make_cup(str(cj, "layer")));
    else if (kind == "cap") d.cells.push_back(make_cap(str(cj, "layer")));
    else if (kind == "refine") d.cells.push_back(make_refine(sys, str(cj, "functor"), word_from_json(field(cj, "a"))));
    else if (kind == "coarsen") d.cells.push_back(make_coarsen(sys, str(cj, "functor"), word_from_json(field(cj, "a"))));
    else if (kind == "external") d.cells.push_back(make_external(sys, str(cj, "name")));
    else bad("unknown cell kind '" + kind + "'");
  }
  const Port unset{-2, -2};
  d.feeds.resize(d.cells.size());
  for (std::size_t c = 0; c < d.cells.size(); ++c) d.feeds[c].assign(d.cells[c].ins.size(), unset);
  d.out_feeds.assign(d.out.size(), unset);
  for (const auto& w : array(j, "wires")) {
    const Port from = port_from_json(field(w, "from"));
    const Port to = port_from_json(field(w, "to"));
    Port* slot = nullptr;
    if (to.cell == kBoundary) {
      if (to.port < 0 || to.port >= static_cast<int>(d.out_feeds.size())) bad("wire target out of range");
      slot = &d.out_feeds[to.port];
    } else {
      if (to.cell < 0 || to.cell >= static_cast<int>(d.cells.size()) || to.port < 0 ||
          to.port >= static_cast<int>(d.feeds[to.cell].size()))
        bad("wire target out of range");
      slot = &d.feeds[to.cell][to.port];
    }
    if (*slot != unset) bad("input port wired twice");
    *slot = from;
  }
  for (const auto& row : d.feeds)
    for (const auto& p : row)
      if (p == unset) bad("unwired cell input");
  for (const auto& p : d.out_feeds)
    if (p == unset) bad("unwired diagram output");
  check_diagram(d);
  return d;
}

// ---------------------------------------------------------------- derivations

json match_to_json(const Match& m) {
  json wires = json::array();
  for (const auto& w : m.wires) wires.push_back(port_to_json(w));
  return {{"rule", m.rule},   {"orientation", std::string(to_string(m.orientation))},
          {"anchor", m.anchor}, {"wires", wires},
          {"param", m.param}, {"variant", m.variant},
          {"word", m.word},   {"index", m.index},
          {"insertion", m.insertion}};
}

Match match_from_json(const json& j) {
  Match m;
  m.rule = str(j, "rule");
  const std::string o = str_or(j, "orientation", "fwd");
  if (o != "fwd" && o != "bwd") bad("orientation is fwd or bwd");
  m.orientation = o == "fwd" ? Orientation::Fwd : Orientation::Bwd;
  if (j.contains("anchor"))
    for (const auto& a : array(j, "anchor")) m.anchor.push_back(integer(a));
  if (j.contains("wires"))
    for (const auto& w : array(j, "wires")) m.wires.push_back(port_from_json(w));
  m.param = str_or(j, "param", "");
  m.variant = str_or(j, "variant", "");
  if (j.contains("word")) m.word = word_from_json(j.at("word"));
  if (j.contains("index")) m.index = static_cast<std::size_t>(integer(j.at("index")));
  if (j.contains("insertion")) {
    if (!j.at("insertion").is_boolean()) bad("insertion is a boolean");
    m.insertion = j.at("insertion").get<bool>();
  }
  return m;
}

json derivation_to_json(const Derivation& dv) {
  json steps = json::array();
  for (const auto& s : dv.steps) steps.push_back(match_to_json(s));
  return {{"start", diagram_to_json(dv.start)}, {"steps", steps}};
}

Derivation derivation_from_json(const SystemOfLayers& sys, const json& j) {
  Derivation dv;
  dv.start = diagram_from_json(sys, field(j, "start"));
  for (const auto& s : array(j, "steps")) dv.steps.push_back(match_from_json(s));
  return dv;
}

// ---------------------------------------------------------------- s-expressions

namespace {

struct Node {
  enum class Kind { Atom, List, Word } kind = Kind::Atom;
  std::string atom;
  std::vector<Node> items;
};

class Reader {
 public:
  explicit Reader(const std::string& text) : s_(text) {}

  Node read_top() {
    Node n = read();
    skip();
    if (i_ != s_.size()) bad("trailing input after term");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  static bool delim(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' || c == ']';
  }

  Node read() {
    skip();
    if (i_ >= s_.size()) bad("unexpected end of term");
    const char c = s_[i_];
    if (c == '(' || c == '[') {
      const char close = c == '(' ? ')' : ']';
      ++i_;
      Node n;
      n.kind = c == '(' ? Node::Kind::List : Node::Kind::Word;
      for (;;) {
        skip();
        if (i_ >= s_.size()) bad("unbalanced brackets in term");
        if (s_[i_] == close) {
          ++i_;
          return n;
        }
        if (s_[i_] == ')' || s_[i_] == ']') bad("mismatched bracket in term");
        n.items.push_back(read());
        if (n.kind == Node::Kind::Word && n.items.back().kind != Node::Kind::Atom) bad("words contain symbols only");
      }
    }
    if (c == ')' || c == ']') bad("unexpected closing bracket");
    Node n;
    while (i_ < s_.size() && !delim(s_[i_])) n.atom += s_[i_++];
    return n;
  }
};

const std::string& atom(const Node& n) {
  if (n.kind != Node::Kind::Atom) bad("expected a name");
  return n.atom;
}

Word word(const Node& n) {
  if (n.kind != Node::Kind::Word) bad("expected a word [..]");
  Word w;
  for (const auto& i : n.items) w.push_back(i.atom);
  return w;
}

Slice slice(const Node& n) {
  const std::string& a = atom(n);
  const auto at = a.rfind('@');
  if (at == std::string::npos || at == 0) bad("slices are written gen@offset");
  std::size_t off = 0;
  const char* first = a.data() + at + 1;
  const char* last = a.data() + a.size();
  auto [p, ec] = std::from_chars(first, last, off);
  if (ec != std::errc() || p != last || first == last) bad("bad slice offset in '" + a + "'");
  return {off, a.substr(0, at)};
}

Term build(const Node& n) {
  if (n.kind != Node::Kind::List || n.items.empty()) bad("a term is a parenthesised form");
  const std::string& head = atom(n.items[0]);
  const auto& it = n.items;
  auto arity = [&](std::size_t k) {
    if (it.size() != k + 1) bad("'" + head + "' takes " + std::to_string(k) + " arguments");
  };
  if (head == "empty") {
    arity(0);
    return Term::empty();
  }
  if (head == "id") {
    arity(2);
    return Term::id(atom(it[1]), word(it[2]));
  }
  if (head == "gen") {
    arity(2);
    return Term::gen(atom(it[1]), atom(it[2]));
  }
  if (head == "ext") {
    arity(1);
    return Term::external(atom(it[1]));
  }
  if (head == "box") {
    if (it.size() < 4) bad("'box' takes a layer, dom, cod and slices");
    InternalDiagram d{atom(it[1]), word(it[2]), word(it[3]), {}};
    for (std::size_t k = 4; k < it.size(); ++k) d.slices.push_back(slice(it[k]));
    return Term::boxed(std::move(d));
  }
  if (head == "pants" || head == "copants") {
    arity(3);
    return head == "pants" ? Term::pants(atom(it[1]), word(it[2]), word(it[3]))
                           : Term::copants(atom(it[1]), word(it[2]), word(it[3]));
  }
  if (head == "cup" || head == "cap") {
    arity(1);
    return head == "cup" ? Term::cup(atom(it[1])) : Term::cap(atom(it[1]));
  }
  if (head == "refine" || head == "coarsen") {
    arity(2);
    return head == "refine" ? Term::refine(atom(it[1]), word(it[2])) : Term::coarsen(atom(it[1]), word(it[2]));
  }
  if (head == "sym") {
    arity(4);
    return Term::sym(atom(it[1]), word(it[2]), atom(it[3]), word(it[4]));
  }
  if (head == "seq" || head == "par") {
    std::vector<Term> parts;
    for (std::size_t k = 1; k < it.size(); ++k) parts.push_back(build(it[k]));
    if (parts.empty()) bad("'" + head + "' needs at least one argument");
    return head == "seq" ? Term::seq(std::move(parts)) : Term::par(std::move(parts));
  }
  if (head == "fuse") {
    arity(3);
    return Term::fuse(atom(it[1]), build(it[2]), build(it[3]));
  }
  bad("unknown term former '" + head + "'");
}

}  // namespace

Term parse_term(const std::string& text) { return build(Reader(text).read_top()); }

}  // namespace layerprop
