#include "layerprop/diagram.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

#include "layerprop/error.hpp"
#include "layerprop/internal.hpp"

namespace layerprop {

std::string_view to_string(CellKind k) {
  switch (k) {
    case CellKind::Box: return "box";
    case CellKind::Pants: return "pants";
    case CellKind::Copants: return "copants";
    case CellKind::Cup: return "cup";
    case CellKind::Cap: return "cap";
    case CellKind::Refine: return "refine";
    case CellKind::Coarsen: return "coarsen";
    case CellKind::External: return "external";
  }
  return "?";
}

namespace {

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void require_symbols(const SystemOfLayers& sys, const std::string& layer, const Word& w) {
  const auto& l = sys.require_layer(layer);
  for (const auto& s : w) {
    if (!l.has_object(s)) throw Error(ErrorCode::UnknownSymbol, "'" + s + "' in layer " + layer);
  }
}

}  // namespace

Cell make_box(InternalDiagram d) {
  Cell c;
  c.kind = CellKind::Box;
  c.layer = d.layer;
  c.ins = {{d.layer, d.dom}};
  c.outs = {{d.layer, d.cod}};
  c.box = std::move(d);
  return c;
}

Cell make_pants(const std::string& layer, Word a, Word b) {
  Cell c;
  c.kind = CellKind::Pants;
  c.layer = layer;
  c.ins = {{layer, a}, {layer, b}};
  c.outs = {{layer, concat(a, b)}};
  c.a = std::move(a);
  c.b = std::move(b);
  return c;
}

Cell make_copants(const std::string& layer, Word a, Word b) {
  Cell c;
  c.kind = CellKind::Copants;
  c.layer = layer;
  c.ins = {{layer, concat(a, b)}};
  c.outs = {{layer, a}, {layer, b}};
  c.a = std::move(a);
  c.b = std::move(b);
  return c;
}

Cell make_cup(const std::string& layer) {
  Cell c;
  c.kind = CellKind::Cup;
  c.layer = layer;
  c.outs = {{layer, {}}};
  return c;
}

Cell make_cap(const std::string& layer) {
  Cell c;
  c.kind = CellKind::Cap;
  c.layer = layer;
  c.ins = {{layer, {}}};
  return c;
}

Cell make_refine(const SystemOfLayers& sys, const std::string& functor, Word a) {
  const auto& f = sys.require_functor(functor);
  require_symbols(sys, f.source, a);
  Cell c;
  c.kind = CellKind::Refine;
  c.layer = f.source;
  c.functor = functor;
  c.ins = {{f.source, a}};
  c.outs = {{f.target, translate_word(f, a)}};
  c.a = std::move(a);
  return c;
}

Cell make_coarsen(const SystemOfLayers& sys, const std::string& functor, Word a) {
  const auto& f = sys.require_functor(functor);
  require_symbols(sys, f.source, a);
  Cell c;
  c.kind = CellKind::Coarsen;
  c.layer = f.source;
  c.functor = functor;
  c.ins = {{f.target, translate_word(f, a)}};
  c.outs = {{f.source, a}};
  c.a = std::move(a);
  return c;
}

Cell make_external(const SystemOfLayers& sys, const std::string& name) {
  const auto* e = sys.external_generator(name);
  if (!e) throw Error(ErrorCode::UnknownGenerator, "external generator '" + name + "'");
  Cell c;
  c.kind = CellKind::External;
  c.name = name;
  c.ins = e->arity;
  c.outs = e->coarity;
  return c;
}

std::string cell_label(const Cell& c) {
  std::string s(to_string(c.kind));
  switch (c.kind) {
    case CellKind::Box: return s + "{" + internal_key(c.box) + "}";
    case CellKind::Pants:
    case CellKind::Copants: return s + "{" + c.layer + "|" + word_to_string(c.a) + "|" + word_to_string(c.b) + "}";
    case CellKind::Cup:
    case CellKind::Cap: return s + "{" + c.layer + "}";
    case CellKind::Refine:
    case CellKind::Coarsen: return s + "{" + c.functor + "|" + word_to_string(c.a) + "}";
    case CellKind::External: return s + "{" + c.name + "|" + type_to_string(c.ins) + "|" + type_to_string(c.outs) + "}";
  }
  return s;
}

ConsumerMap consumers(const Diagram& d) {
  ConsumerMap cm;
  cm.of_input.assign(d.in.size(), Port{kBoundary, -1});
  cm.of_cell.resize(d.cells.size());
  for (std::size_t c = 0; c < d.cells.size(); ++c) cm.of_cell[c].assign(d.cells[c].outs.size(), Port{kBoundary, -1});
  auto mark = [&](const Port& producer, const Port& consumer) {
    if (producer.cell == kBoundary) {
      if (producer.port < 0 || static_cast<std::size_t>(producer.port) >= d.in.size())
        throw Error(ErrorCode::MalformedInput, "wire from missing input " + std::to_string(producer.port));
      cm.of_input[producer.port] = consumer;
    } else {
      if (producer.cell < 0 || static_cast<std::size_t>(producer.cell) >= d.cells.size() ||
          producer.port < 0 || static_cast<std::size_t>(producer.port) >= d.cells[producer.cell].outs.size())
        throw Error(ErrorCode::MalformedInput, "wire from missing port");
      cm.of_cell[producer.cell][producer.port] = consumer;
    }
  };
  for (std::size_t c = 0; c < d.cells.size(); ++c)
    for (std::size_t k = 0; k < d.feeds[c].size(); ++k) mark(d.feeds[c][k], Port{static_cast<int>(c), static_cast<int>(k)});
  for (std::size_t k = 0; k < d.out_feeds.size(); ++k) mark(d.out_feeds[k], Port{kBoundary, static_cast<int>(k)});
  return cm;
}

namespace {

const SheetType& producer_type(const Diagram& d, const Port& p) {
  if (p.cell == kBoundary) return d.in.at(p.port);
  return d.cells.at(p.cell).outs.at(p.port);
}

}  // namespace

void check_diagram(const Diagram& d) {
  if (d.feeds.size() != d.cells.size()) throw Error(ErrorCode::MalformedInput, "feeds table size");
  if (d.out_feeds.size() != d.out.size()) throw Error(ErrorCode::MalformedInput, "output wiring size");
  std::map<Port, int> uses;
  auto use = [&](const Port& p, const SheetType& want, const std::string& where) {
    if (p.cell == kBoundary) {
      if (p.port < 0 || static_cast<std::size_t>(p.port) >= d.in.size())
        throw Error(ErrorCode::MalformedInput, where + " reads a missing input");
    } else if (p.cell < 0 || static_cast<std::size_t>(p.cell) >= d.cells.size() || p.port < 0 ||
               static_cast<std::size_t>(p.port) >= d.cells[p.cell].outs.size()) {
      throw Error(ErrorCode::MalformedInput, where + " reads a missing port");
    }
    if (++uses[p] > 1) throw Error(ErrorCode::MalformedInput, where + " shares a wire");
    if (producer_type(d, p) != want) {
      throw Error(ErrorCode::SortMismatch, where + " expects " + sheet_to_string(want) + " but receives " +
                                               sheet_to_string(producer_type(d, p)));
    }
  };
  for (std::size_t c = 0; c < d.cells.size(); ++c) {
    if (d.feeds[c].size() != d.cells[c].ins.size())
      throw Error(ErrorCode::MalformedInput, "cell " + std::to_string(c) + " input count");
    for (std::size_t k = 0; k < d.feeds[c].size(); ++k)
      use(d.feeds[c][k], d.cells[c].ins[k], "cell " + std::to_string(c) + " input " + std::to_string(k));
  }
  for (std::size_t k = 0; k < d.out.size(); ++k) use(d.out_feeds[k], d.out[k], "output " + std::to_string(k));
  std::size_t producers = d.in.size();
  for (const auto& c : d.cells) producers += c.outs.size();
  if (uses.size() != producers) throw Error(ErrorCode::MalformedInput, "dangling wire");
  topological_order(d);
}

std::vector<int> topological_order(const Diagram& d) {
  const int n = static_cast<int>(d.cells.size());
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (int c = 0; c < n; ++c) {
    for (const auto& p : d.feeds[c]) {
      if (p.cell != kBoundary) {
        succ[p.cell].push_back(c);
        ++indeg[c];
      }
    }
  }
  std::vector<int> order;
  std::deque<int> ready;
  for (int c = 0; c < n; ++c)
    if (indeg[c] == 0) ready.push_back(c);
  while (!ready.empty()) {
    int c = ready.front();
    ready.pop_front();
    order.push_back(c);
    for (int s : succ[c])
      if (--indeg[s] == 0) ready.push_back(s);
  }
  if (static_cast<int>(order.size()) != n) throw Error(ErrorCode::MalformedInput, "wiring has a cycle");
  return order;
}

bool reaches(const Diagram& d, int from, int to) {
  std::vector<std::vector<int>> succ(d.cells.size());
  for (std::size_t c = 0; c < d.cells.size(); ++c)
    for (const auto& p : d.feeds[c])
      if (p.cell != kBoundary) succ[p.cell].push_back(static_cast<int>(c));
  std::vector<char> seen(d.cells.size(), 0);
  std::vector<int> stack{from};
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    if (c == to) return true;
    if (seen[c]) continue;
    seen[c] = 1;
    for (int s : succ[c]) stack.push_back(s);
  }
  return false;
}

Diagram empty_diagram() { return {}; }

Diagram identity_diagram(const OmegaType& t) {
  Diagram d;
  d.in = t;
  d.out = t;
  for (std::size_t k = 0; k < t.size(); ++k) d.out_feeds.push_back({kBoundary, static_cast<int>(k)});
  return d;
}

Diagram single_cell(const Cell& c) {
  Diagram d;
  d.in = c.ins;
  d.out = c.outs;
  d.cells.push_back(c);
  d.feeds.emplace_back();
  for (std::size_t k = 0; k < c.ins.size(); ++k) d.feeds[0].push_back({kBoundary, static_cast<int>(k)});
  for (std::size_t k = 0; k < c.outs.size(); ++k) d.out_feeds.push_back({0, static_cast<int>(k)});
  return d;
}

Diagram sym_diagram(const SheetType& x, const SheetType& y) {
  Diagram d;
  d.in = {x, y};
  d.out = {y, x};
  d.out_feeds = {{kBoundary, 1}, {kBoundary, 0}};
  return d;
}

Diagram box_diagram(const InternalDiagram& b) {
  if (b.slices.empty()) return identity_diagram({{b.layer, b.dom}});
  return single_cell(make_box(b));
}

Diagram seq_compose(const Diagram& x, const Diagram& y) {
  if (x.out != y.in) {
    throw Error(ErrorCode::SortMismatch,
                "sequential composition of " + type_to_string(x.out) + " with " + type_to_string(y.in));
  }
  Diagram d;
  d.in = x.in;
  d.out = y.out;
  d.cells = x.cells;
  d.cells.insert(d.cells.end(), y.cells.begin(), y.cells.end());
  d.feeds = x.feeds;
  const int shift = static_cast<int>(x.cells.size());
  auto map = [&](const Port& p) { return p.cell == kBoundary ? x.out_feeds[p.port] : Port{p.cell + shift, p.port}; };
  for (const auto& f : y.feeds) {
    std::vector<Port> row;
    for (const auto& p : f) row.push_back(map(p));
    d.feeds.push_back(std::move(row));
  }
  for (const auto& p : y.out_feeds) d.out_feeds.push_back(map(p));
  return d;
}

Diagram par_tensor(const Diagram& x, const Diagram& y) {
  Diagram d;
  d.in = x.in;
  d.in.insert(d.in.end(), y.in.begin(), y.in.end());
  d.out = x.out;
  d.out.insert(d.out.end(), y.out.begin(), y.out.end());
  d.cells = x.cells;
  d.cells.insert(d.cells.end(), y.cells.begin(), y.cells.end());
  d.feeds = x.feeds;
  d.out_feeds = x.out_feeds;
  const int cshift = static_cast<int>(x.cells.size());
  const int ishift = static_cast<int>(x.in.size());
  auto map = [&](const Port& p) {
    return p.cell == kBoundary ? Port{kBoundary, p.port + ishift} : Port{p.cell + cshift, p.port};
  };
  for (const auto& f : y.feeds) {
    std::vector<Port> row;
    for (const auto& p : f) row.push_back(map(p));
    d.feeds.push_back(std::move(row));
  }
  for (const auto& p : y.out_feeds) d.out_feeds.push_back(map(p));
  return d;
}

std::optional<InternalDiagram> as_internal(const SystemOfLayers& sys, const Diagram& d) {
  if (d.in.size() != 1 || d.out.size() != 1 || d.in[0].layer != d.out[0].layer) return std::nullopt;
  for (const auto& c : d.cells)
    if (c.kind != CellKind::Box) return std::nullopt;
  Diagram n = normalize(sys, d);
  if (n.cells.empty()) return internal_identity(d.in[0].layer, d.in[0].word);
  if (n.cells.size() == 1) return n.cells[0].box;
  return std::nullopt;
}

Diagram fuse_internal(const SystemOfLayers& sys, const Diagram& x, const Diagram& y,
                      const std::string& layer) {
  auto ax = as_internal(sys, x);
  auto ay = as_internal(sys, y);
  if (!ax || !ay) throw Error(ErrorCode::SideConditionViolation, "fusion needs internal operands");
  if (ax->layer != layer || ay->layer != layer) {
    throw Error(ErrorCode::SideConditionViolation, "fusion operands are not internal to " + layer);
  }
  return box_diagram(internal_tensor(sys, *ax, *ay));
}

// ---------------------------------------------------------------- terms

Term Term::id(std::string layer, Word w) {
  Term t;
  t.kind = Kind::Id;
  t.layer = std::move(layer);
  t.a = std::move(w);
  return t;
}

Term Term::gen(std::string layer, std::string name) {
  Term t;
  t.kind = Kind::Gen;
  t.layer = std::move(layer);
  t.name = std::move(name);
  return t;
}

Term Term::external(std::string name) {
  Term t;
  t.kind = Kind::Gen;
  t.name = std::move(name);
  return t;
}

Term Term::boxed(InternalDiagram d) {
  Term t;
  t.kind = Kind::Box;
  t.layer = d.layer;
  t.box = std::move(d);
  return t;
}

Term Term::pants(std::string layer, Word a, Word b) {
  Term t;
  t.kind = Kind::Pants;
  t.layer = std::move(layer);
  t.a = std::move(a);
  t.b = std::move(b);
  return t;
}

Term Term::copants(std::string layer, Word a, Word b) {
  Term t = pants(std::move(layer), std::move(a), std::move(b));
  t.kind = Kind::Copants;
  return t;
}

Term Term::cup(std::string layer) {
  Term t;
  t.kind = Kind::Cup;
  t.layer = std::move(layer);
  return t;
}

Term Term::cap(std::string layer) {
  Term t;
  t.kind = Kind::Cap;
  t.layer = std::move(layer);
  return t;
}

Term Term::refine(std::string functor, Word a) {
  Term t;
  t.kind = Kind::Refine;
  t.functor = std::move(functor);
  t.a = std::move(a);
  return t;
}

Term Term::coarsen(std::string functor, Word a) {
  Term t = refine(std::move(functor), std::move(a));
  t.kind = Kind::Coarsen;
  return t;
}

Term Term::sym(std::string l1, Word a, std::string l2, Word b) {
  Term t;
  t.kind = Kind::Sym;
  t.layer = std::move(l1);
  t.layer2 = std::move(l2);
  t.a = std::move(a);
  t.b = std::move(b);
  return t;
}

Term Term::seq(std::vector<Term> parts) {
  Term t;
  t.kind = Kind::Seq;
  t.args = std::move(parts);
  return t;
}

Term Term::par(std::vector<Term> parts) {
  Term t;
  t.kind = Kind::Par;
  t.args = std::move(parts);
  return t;
}

Term Term::fuse(std::string layer, Term x, Term y) {
  Term t;
  t.kind = Kind::Fuse;
  t.layer = std::move(layer);
  t.args = {std::move(x), std::move(y)};
  return t;
}

bool is_internal_term(const SystemOfLayers& sys, const Term& t) {
  switch (t.kind) {
    case Term::Kind::Id:
    case Term::Kind::Box: return true;
    case Term::Kind::Gen: return !t.layer.empty();
    case Term::Kind::Seq:
      if (t.args.empty()) return false;
      return std::all_of(t.args.begin(), t.args.end(), [&](const Term& a) { return is_internal_term(sys, a); });
    case Term::Kind::Fuse:
      return t.args.size() == 2 && is_internal_term(sys, t.args[0]) && is_internal_term(sys, t.args[1]);
    default: return false;
  }
}

Sort infer_sort(const SystemOfLayers& sys, const Term& t) {
  using K = Term::Kind;
  switch (t.kind) {
    case K::Empty: return {};
    case K::Id:
      require_symbols(sys, t.layer, t.a);
      return {{{t.layer, t.a}}, {{t.layer, t.a}}};
    case K::Gen: {
      if (t.layer.empty()) {
        const auto* e = sys.external_generator(t.name);
        if (!e) throw Error(ErrorCode::UnknownGenerator, "external generator '" + t.name + "'");
        return {e->arity, e->coarity};
      }
      const auto* g = sys.require_layer(t.layer).find_generator(t.name);
      if (!g) throw Error(ErrorCode::UnknownGenerator, "generator '" + t.name + "' in " + t.layer);
      return {{{t.layer, g->dom}}, {{t.layer, g->cod}}};
    }
    case K::Box:
      check_internal(sys, t.box);
      return {{{t.box.layer, t.box.dom}}, {{t.box.layer, t.box.cod}}};
    case K::Pants:
      require_symbols(sys, t.layer, t.a);
      require_symbols(sys, t.layer, t.b);
      return {{{t.layer, t.a}, {t.layer, t.b}}, {{t.layer, concat(t.a, t.b)}}};
    case K::Copants:
      require_symbols(sys, t.layer, t.a);
      require_symbols(sys, t.layer, t.b);
      return {{{t.layer, concat(t.a, t.b)}}, {{t.layer, t.a}, {t.layer, t.b}}};
    case K::Cup:
      sys.require_layer(t.layer);
      return {{}, {{t.layer, {}}}};
    case K::Cap:
      sys.require_layer(t.layer);
      return {{{t.layer, {}}}, {}};
    case K::Refine:
    case K::Coarsen: {
      const auto& f = sys.require_functor(t.functor);
      require_symbols(sys, f.source, t.a);
      SheetType hi{f.source, t.a}, lo{f.target, translate_word(f, t.a)};
      return t.kind == K::Refine ? Sort{{hi}, {lo}} : Sort{{lo}, {hi}};
    }
    case K::Sym:
      require_symbols(sys, t.layer, t.a);
      require_symbols(sys, t.layer2, t.b);
      return {{{t.layer, t.a}, {t.layer2, t.b}}, {{t.layer2, t.b}, {t.layer, t.a}}};
    case K::Seq: {
      if (t.args.empty()) return {};
      Sort s = infer_sort(sys, t.args[0]);
      for (std::size_t i = 1; i < t.args.size(); ++i) {
        Sort n = infer_sort(sys, t.args[i]);
        if (n.dom != s.cod) {
          throw Error(ErrorCode::SortMismatch, "composite middle " + type_to_string(s.cod) + " vs " +
                                                   type_to_string(n.dom));
        }
        s.cod = n.cod;
      }
      return s;
    }
    case K::Par: {
      Sort s;
      for (const auto& a : t.args) {
        Sort n = infer_sort(sys, a);
        s.dom.insert(s.dom.end(), n.dom.begin(), n.dom.end());
        s.cod.insert(s.cod.end(), n.cod.begin(), n.cod.end());
      }
      return s;
    }
    case K::Fuse: {
      if (t.args.size() != 2 || !is_internal_term(sys, t.args[0]) || !is_internal_term(sys, t.args[1])) {
        throw Error(ErrorCode::SideConditionViolation, "fusion operands must be internal terms");
      }
      Sort x = infer_sort(sys, t.args[0]);
      Sort y = infer_sort(sys, t.args[1]);
      if (x.dom[0].layer != t.layer || y.dom[0].layer != t.layer) {
        throw Error(ErrorCode::SideConditionViolation, "fusion operands are not internal to " + t.layer);
      }
      return {{{t.layer, concat(x.dom[0].word, y.dom[0].word)}},
              {{t.layer, concat(x.cod[0].word, y.cod[0].word)}}};
    }
  }
  throw Error(ErrorCode::MalformedInput, "unknown term kind");
}

Sort infer_sort(const Diagram& d) {
  check_diagram(d);
  return d.sort();
}

Diagram compile(const SystemOfLayers& sys, const Term& t) {
  using K = Term::Kind;
  infer_sort(sys, t);
  switch (t.kind) {
    case K::Empty: return empty_diagram();
    case K::Id: return identity_diagram({{t.layer, t.a}});
    case K::Gen:
      if (t.layer.empty()) return single_cell(make_external(sys, t.name));
      return box_diagram(internal_generator(sys, t.layer, t.name));
    case K::Box: return box_diagram(t.box);
    case K::Pants: return single_cell(make_pants(t.layer, t.a, t.b));
    case K::Copants: return single_cell(make_copants(t.layer, t.a, t.b));
    case K::Cup: return single_cell(make_cup(t.layer));
    case K::Cap: return single_cell(make_cap(t.layer));
    case K::Refine: return single_cell(make_refine(sys, t.functor, t.a));
    case K::Coarsen: return single_cell(make_coarsen(sys, t.functor, t.a));
    case K::Sym: return sym_diagram({t.layer, t.a}, {t.layer2, t.b});
    case K::Seq: {
      Diagram d = compile(sys, t.args.at(0));
      for (std::size_t i = 1; i < t.args.size(); ++i) d = seq_compose(d, compile(sys, t.args[i]));
      return d;
    }
    case K::Par: {
      Diagram d;
      for (const auto& a : t.args) d = par_tensor(d, compile(sys, a));
      return d;
    }
    case K::Fuse:
      return fuse_internal(sys, compile(sys, t.args[0]), compile(sys, t.args[1]), t.layer);
  }
  throw Error(ErrorCode::MalformedInput, "unknown term kind");
}

std::string term_to_string(const Term& t) {
  using K = Term::Kind;
  auto w = [](const Word& x) { return word_to_string(x); };
  auto list = [&](const char* head) {
    std::string s = std::string("(") + head;
    for (const auto& a : t.args) s += " " + term_to_string(a);
    return s + ")";
  };
  switch (t.kind) {
    case K::Empty: return "(empty)";
    case K::Id: return "(id " + t.layer + " " + w(t.a) + ")";
    case K::Gen: return t.layer.empty() ? "(ext " + t.name + ")" : "(gen " + t.layer + " " + t.name + ")";
    case K::Box: {
      std::string s = "(box " + t.box.layer + " " + w(t.box.dom) + " " + w(t.box.cod);
      for (const auto& sl : t.box.slices) s += " " + sl.gen + "@" + std::to_string(sl.offset);
      return s + ")";
    }
    case K::Pants: return "(pants " + t.layer + " " + w(t.a) + " " + w(t.b) + ")";
    case K::Copants: return "(copants " + t.layer + " " + w(t.a) + " " + w(t.b) + ")";
    case K::Cup: return "(cup " + t.layer + ")";
    case K::Cap: return "(cap " + t.layer + ")";
    case K::Refine: return "(refine " + t.functor + " " + w(t.a) + ")";
    case K::Coarsen: return "(coarsen " + t.functor + " " + w(t.a) + ")";
    case K::Sym: return "(sym " + t.layer + " " + w(t.a) + " " + t.layer2 + " " + w(t.b) + ")";
    case K::Seq: return list("seq");
    case K::Par: return list("par");
    case K::Fuse: return "(fuse " + t.layer + " " + term_to_string(t.args[0]) + " " + term_to_string(t.args[1]) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------- normal forms

namespace {

// Removes a one-input one-output cell, connecting its producer to its consumer.
void bypass_cell(Diagram& d, int idx) {
  const Port producer = d.feeds[idx][0];
  const Port self{idx, 0};
  for (auto& row : d.feeds)
    for (auto& p : row)
      if (p == self) p = producer;
  for (auto& p : d.out_feeds)
    if (p == self) p = producer;
  d.cells.erase(d.cells.begin() + idx);
  d.feeds.erase(d.feeds.begin() + idx);
  auto fix = [&](Port& p) {
    if (p.cell > idx) --p.cell;
  };
  for (auto& row : d.feeds)
    for (auto& p : row) fix(p);
  for (auto& p : d.out_feeds) fix(p);
}

}  // namespace

Diagram normalize(const SystemOfLayers& sys, const Diagram& input) {
  Diagram d = input;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t c = 0; c < d.cells.size(); ++c) {
      if (d.cells[c].kind == CellKind::Box && d.cells[c].box.slices.empty()) {
        bypass_cell(d, static_cast<int>(c));
        changed = true;
        break;
      }
      if (d.cells[c].kind != CellKind::Box) continue;
      const Port src = d.feeds[c][0];
      if (src.cell != kBoundary && d.cells[src.cell].kind == CellKind::Box) {
        d.cells[c] = make_box(internal_seq(d.cells[src.cell].box, d.cells[c].box));
        bypass_cell(d, src.cell);
        changed = true;
        break;
      }
    }
  }
  for (auto& c : d.cells)
    if (c.kind == CellKind::Box) c = make_box(canonical_internal(sys, c.box));
  return d;
}

namespace {

struct Labeler {
  const Diagram& d;
  ConsumerMap cm;
  std::vector<std::string> labels;

  explicit Labeler(const Diagram& dd) : d(dd), cm(consumers(dd)) {
    for (const auto& c : d.cells) labels.push_back(cell_label(c));
  }

  void bfs(std::deque<int> queue, std::vector<char>& seen, std::vector<int>& order) const {
    while (!queue.empty()) {
      int c = queue.front();
      queue.pop_front();
      order.push_back(c);
      auto visit = [&](const Port& p) {
        if (p.cell != kBoundary && !seen[p.cell]) {
          seen[p.cell] = 1;
          queue.push_back(p.cell);
        }
      };
      for (const auto& p : d.feeds[c]) visit(p);
      for (const auto& p : cm.of_cell[c]) visit(p);
    }
  }

  // Encoding of the cells in `order`, wires named by position in `order`.
  std::string encode(const std::vector<int>& order, bool with_boundary) const {
    std::map<int, int> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    auto name = [&](const Port& p) {
      if (p.cell == kBoundary) return "i" + std::to_string(p.port);
      return std::to_string(pos.at(p.cell)) + "." + std::to_string(p.port);
    };
    std::ostringstream os;
    if (with_boundary) os << type_to_string(d.in) << "=>" << type_to_string(d.out) << "\n";
    for (int c : order) {
      os << labels[c] << " <-";
      for (const auto& p : d.feeds[c]) os << ' ' << name(p);
      os << "\n";
    }
    if (with_boundary) {
      os << "out <-";
      for (const auto& p : d.out_feeds) os << ' ' << name(p);
      os << "\n";
    }
    return os.str();
  }
};

}  // namespace

CanonicalForm canonicalize(const SystemOfLayers& sys, const Diagram& input) {
  check_diagram(input);
  Diagram d = normalize(sys, input);
  Labeler lab(d);
  const std::size_t n = d.cells.size();
  std::vector<char> seen(n, 0);
  std::vector<int> order;
  std::deque<int> seeds;
  for (const auto& p : lab.cm.of_input) {
    if (p.cell != kBoundary && !seen[p.cell]) {
      seen[p.cell] = 1;
      seeds.push_back(p.cell);
    }
  }
  for (const auto& p : d.out_feeds) {
    if (p.cell != kBoundary && !seen[p.cell]) {
      seen[p.cell] = 1;
      seeds.push_back(p.cell);
    }
  }
  lab.bfs(seeds, seen, order);

  // Components not attached to the boundary: best root per component, then
  // sort the components by their encodings.
  std::vector<std::pair<std::string, std::vector<int>>> floating;
  for (std::size_t c = 0; c < n; ++c) {
    if (seen[c]) continue;
    std::vector<char> comp_seen = seen;
    std::vector<int> comp;
    comp_seen[c] = 1;
    lab.bfs({static_cast<int>(c)}, comp_seen, comp);
    std::string best_code;
    std::vector<int> best_order;
    for (int root : comp) {
      std::vector<char> s2 = seen;
      std::vector<int> ord;
      s2[root] = 1;
      lab.bfs({root}, s2, ord);
      std::string code = lab.encode(ord, false);
      if (best_order.empty() || code < best_code) {
        best_code = code;
        best_order = ord;
      }
    }
    for (int x : comp) seen[x] = 1;
    floating.emplace_back(std::move(best_code), std::move(best_order));
  }
  std::sort(floating.begin(), floating.end());
  for (const auto& [code, ord] : floating) order.insert(order.end(), ord.begin(), ord.end());

  CanonicalForm out;
  out.key = lab.encode(order, true);
  std::vector<int> pos(n);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  auto remap = [&](Port p) {
    if (p.cell != kBoundary) p.cell = pos[p.cell];
    return p;
  };
  Diagram& c = out.diagram;
  c.in = d.in;
  c.out = d.out;
  for (int old : order) {
    c.cells.push_back(d.cells[old]);
    std::vector<Port> row;
    for (const auto& p : d.feeds[old]) row.push_back(remap(p));
    c.feeds.push_back(std::move(row));
  }
  for (const auto& p : d.out_feeds) c.out_feeds.push_back(remap(p));
  return out;
}

bool structural_eq(const SystemOfLayers& sys, const Diagram& x, const Diagram& y) {
  if (x.in != y.in || x.out != y.out) return false;
  return canonicalize(sys, x).key == canonicalize(sys, y).key;
}

std::string export_dot(const SystemOfLayers& sys, const Diagram& input) {
  const Diagram d = canonicalize(sys, input).diagram;
  std::ostringstream os;
  auto esc = [](std::string s) {
    std::string out;
    for (char ch : s) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    return out;
  };
  os << "digraph layerprop {\n  rankdir=LR;\n";
  for (std::size_t k = 0; k < d.in.size(); ++k) os << "  in" << k << " [shape=point];\n";
  for (std::size_t k = 0; k < d.out.size(); ++k) os << "  out" << k << " [shape=point];\n";
  for (std::size_t c = 0; c < d.cells.size(); ++c) {
    const auto& cell = d.cells[c];
    std::string label(to_string(cell.kind));
    switch (cell.kind) {
      case CellKind::Box: {
        label += " " + cell.layer + ":";
        for (const auto& s : cell.box.slices) label += " " + s.gen + "@" + std::to_string(s.offset);
        break;
      }
      case CellKind::Refine:
      case CellKind::Coarsen: label += " " + cell.functor + " " + word_to_string(cell.a); break;
      case CellKind::External: label += " " + cell.name; break;
      default: label += " " + cell.layer;
    }
    os << "  c" << c << " [shape=box,label=\"" << esc(label) << "\"];\n";
  }
  auto node = [](const Port& p, bool producer) {
    if (p.cell == kBoundary) return std::string(producer ? "in" : "out") + std::to_string(p.port);
    return "c" + std::to_string(p.cell);
  };
  for (std::size_t c = 0; c < d.cells.size(); ++c) {
    for (std::size_t k = 0; k < d.feeds[c].size(); ++k) {
      const auto& p = d.feeds[c][k];
      os << "  " << node(p, true) << " -> c" << c << " [label=\"" << esc(sheet_to_string(d.cells[c].ins[k]))
         << "\"];\n";
    }
  }
  for (std::size_t k = 0; k < d.out_feeds.size(); ++k) {
    os << "  " << node(d.out_feeds[k], true) << " -> out" << k << " [label=\"" << esc(sheet_to_string(d.out[k]))
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace layerprop

// ---------------------------------------------------------------- sequentialization

namespace layerprop {

namespace {

Term cell_term(const Cell& c) {
  switch (c.kind) {
    case CellKind::Box: return Term::boxed(c.box);
    case CellKind::Pants: return Term::pants(c.layer, c.a, c.b);
    case CellKind::Copants: return Term::copants(c.layer, c.a, c.b);
    case CellKind::Cup: return Term::cup(c.layer);
    case CellKind::Cap: return Term::cap(c.layer);
    case CellKind::Refine: return Term::refine(c.functor, c.a);
    case CellKind::Coarsen: return Term::coarsen(c.functor, c.a);
    case CellKind::External: return Term::external(c.name);
  }
  return Term::empty();
}

Term ids(const OmegaType& t, std::size_t from, std::size_t to) {
  std::vector<Term> parts;
  for (std::size_t i = from; i < to; ++i) parts.push_back(Term::id(t[i].layer, t[i].word));
  if (parts.empty()) return Term::empty();
  if (parts.size() == 1) return parts[0];
  return Term::par(std::move(parts));
}

Term beside(Term left, Term middle, Term right) {
  std::vector<Term> parts;
  for (Term* t : {&left, &middle, &right})
    if (t->kind != Term::Kind::Empty) parts.push_back(std::move(*t));
  if (parts.empty()) return Term::empty();
  if (parts.size() == 1) return parts[0];
  return Term::par(std::move(parts));
}

struct Sequencer {
  std::vector<Port> producers;
  OmegaType types;
  std::vector<Term> layers;

  // Moves the wire at index j down to index i by adjacent symmetries.
  void bring(std::size_t j, std::size_t i) {
    for (std::size_t t = j; t > i; --t) {
      const auto& a = types[t - 1];
      const auto& b = types[t];
      layers.push_back(beside(ids(types, 0, t - 1), Term::sym(a.layer, a.word, b.layer, b.word),
                              ids(types, t + 1, types.size())));
      std::swap(types[t - 1], types[t]);
      std::swap(producers[t - 1], producers[t]);
    }
  }

  void gather(const std::vector<Port>& wanted) {
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      std::size_t j = i;
      while (producers[j] != wanted[i]) ++j;
      bring(j, i);
    }
  }
};

}  // namespace

Term diagram_to_term(const Diagram& d) {
  check_diagram(d);
  Sequencer s;
  s.types = d.in;
  for (std::size_t k = 0; k < d.in.size(); ++k) s.producers.push_back({kBoundary, static_cast<int>(k)});
  for (int c : topological_order(d)) {
    const Cell& cell = d.cells[c];
    s.gather(d.feeds[c]);
    const std::size_t n = cell.ins.size();
    s.layers.push_back(beside(Term::empty(), cell_term(cell), ids(s.types, n, s.types.size())));
    s.types.erase(s.types.begin(), s.types.begin() + static_cast<std::ptrdiff_t>(n));
    s.producers.erase(s.producers.begin(), s.producers.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t k = cell.outs.size(); k-- > 0;) {
      s.types.insert(s.types.begin(), cell.outs[k]);
      s.producers.insert(s.producers.begin(), Port{c, static_cast<int>(k)});
    }
  }
  s.gather(d.out_feeds);
  if (s.layers.empty()) return ids(d.in, 0, d.in.size());
  if (s.layers.size() == 1) return s.layers[0];
  return Term::seq(std::move(s.layers));
}

}  // namespace layerprop
