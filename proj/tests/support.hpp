#pragma once

// Shared fixtures for the test suites: a small three-layer system, random
// term generation and oracles written without the library's algorithms.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "layerprop/ccs.hpp"
#include "layerprop/diagram.hpp"
#include "layerprop/error.hpp"
#include "layerprop/rewrite.hpp"
#include "layerprop/semantics.hpp"
#include "layerprop/theory.hpp"

namespace testkit {

using namespace layerprop;

// ------------------------------------------------------------ toy system
//
//   H: A, B     f:A->B  g:B->A  m:AA->B  u:->A
//   L: a, b     p:a->b  q:b->a  n:aa->a  z:->a  e:b->
//   M: c        r:c->c  s:cc->c w:->c    d:c->cc k:c->
//   F: H->L (A=a, B=b), G: L->M (a=c, b=cc), GF = G.F

inline InternalDiagram slices(std::string layer, Word dom, Word cod, std::vector<Slice> s) {
  return InternalDiagram{std::move(layer), std::move(dom), std::move(cod), std::move(s)};
}

inline SystemOfLayers toy_system() {
  SystemOfLayers sys;
  LayerPresentation h("H"), l("L"), m("M");
  for (auto o : {"A", "B"}) h.add_object(o);
  h.add_generator({"f", {"A"}, {"B"}});
  h.add_generator({"g", {"B"}, {"A"}});
  h.add_generator({"m", {"A", "A"}, {"B"}});
  h.add_generator({"u", {}, {"A"}});
  for (auto o : {"a", "b"}) l.add_object(o);
  l.add_generator({"p", {"a"}, {"b"}});
  l.add_generator({"q", {"b"}, {"a"}});
  l.add_generator({"n", {"a", "a"}, {"a"}});
  l.add_generator({"z", {}, {"a"}});
  l.add_generator({"e", {"b"}, {}});
  l.add_equation({"pq", slices("L", {"a"}, {"a"}, {{0, "p"}, {0, "q"}}), slices("L", {"a"}, {"a"}, {})});
  m.add_object("c");
  m.add_generator({"r", {"c"}, {"c"}});
  m.add_generator({"s", {"c", "c"}, {"c"}});
  m.add_generator({"w", {}, {"c"}});
  m.add_generator({"d", {"c"}, {"c", "c"}});
  m.add_generator({"k", {"c"}, {}});
  sys.layers = {h, l, m};

  TranslationFunctor f{"F", "H", "L", {{"A", {"a"}}, {"B", {"b"}}}, {}};
  f.morphism_map["f"] = slices("L", {"a"}, {"b"}, {{0, "p"}});
  f.morphism_map["g"] = slices("L", {"b"}, {"a"}, {{0, "q"}});
  f.morphism_map["m"] = slices("L", {"a", "a"}, {"b"}, {{0, "n"}, {0, "p"}});
  f.morphism_map["u"] = slices("L", {}, {"a"}, {{0, "z"}});
  TranslationFunctor g{"G", "L", "M", {{"a", {"c"}}, {"b", {"c", "c"}}}, {}};
  g.morphism_map["p"] = slices("M", {"c"}, {"c", "c"}, {{0, "d"}});
  g.morphism_map["q"] = slices("M", {"c", "c"}, {"c"}, {{0, "s"}});
  g.morphism_map["n"] = slices("M", {"c", "c"}, {"c"}, {{0, "s"}, {0, "r"}});
  g.morphism_map["z"] = slices("M", {}, {"c"}, {{0, "w"}});
  g.morphism_map["e"] = slices("M", {"c", "c"}, {}, {{0, "k"}, {0, "k"}});
  sys.functors = {f, g};
  sys.functors.push_back(compose_functors(sys, f, g, "GF"));
  sys.order = {{"H", "L"}, {"L", "M"}};
  sys.external.push_back({"ext", {{"H", {"A"}}, {"M", {"c"}}}, {{"L", {"b"}}}});
  sys.external.push_back({"obs", {{"L", {"a"}}}, {}});
  return sys;
}

// ------------------------------------------------------------ sort oracle
//
// Each typing rule of the term language, checked directly against the
// presentation tables.

struct Reject {
  ErrorCode code;
};

class SortOracle {
 public:
  explicit SortOracle(const SystemOfLayers& sys) : sys_(sys) {}

  std::variant<Sort, ErrorCode> check(const Term& t) const {
    try {
      return sort(t);
    } catch (const Reject& r) {
      return r.code;
    }
  }

 private:
  const SystemOfLayers& sys_;

  const LayerPresentation& layer(const std::string& id) const {
    for (const auto& l : sys_.layers)
      if (l.id == id) return l;
    throw Reject{ErrorCode::UnknownLayer};
  }
  void symbols(const std::string& id, const Word& w) const {
    const auto& l = layer(id);
    for (const auto& s : w)
      if (std::find(l.objects.begin(), l.objects.end(), s) == l.objects.end()) throw Reject{ErrorCode::UnknownSymbol};
  }
  const GeneratorDecl& gen(const LayerPresentation& l, const std::string& name) const {
    for (const auto& g : l.generators)
      if (g.name == name) return g;
    throw Reject{ErrorCode::UnknownGenerator};
  }
  const TranslationFunctor& functor(const std::string& name) const {
    for (const auto& f : sys_.functors)
      if (f.name == name) return f;
    throw Reject{ErrorCode::UnknownFunctor};
  }
  Word image(const TranslationFunctor& f, const Word& w) const {
    Word out;
    for (const auto& s : w) {
      const auto& img = f.object_map.at(s);
      out.insert(out.end(), img.begin(), img.end());
    }
    return out;
  }
  void box(const InternalDiagram& d) const {
    const auto& l = layer(d.layer);
    symbols(d.layer, d.dom);
    Word cur = d.dom;
    for (const auto& s : d.slices) {
      const auto& g = gen(l, s.gen);
      if (s.offset + g.dom.size() > cur.size() ||
          !std::equal(g.dom.begin(), g.dom.end(), cur.begin() + static_cast<std::ptrdiff_t>(s.offset)))
        throw Reject{ErrorCode::SortMismatch};
      Word next(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(s.offset));
      next.insert(next.end(), g.cod.begin(), g.cod.end());
      next.insert(next.end(), cur.begin() + static_cast<std::ptrdiff_t>(s.offset + g.dom.size()), cur.end());
      cur = std::move(next);
    }
    if (cur != d.cod) throw Reject{ErrorCode::SortMismatch};
  }
  bool internal(const Term& t) const {
    using K = Term::Kind;
    if (t.kind == K::Id || t.kind == K::Box) return true;
    if (t.kind == K::Gen) return !t.layer.empty();
    if (t.kind == K::Seq) {
      if (t.args.empty()) return false;
      for (const auto& a : t.args)
        if (!internal(a)) return false;
      return true;
    }
    if (t.kind == K::Fuse) return t.args.size() == 2 && internal(t.args[0]) && internal(t.args[1]);
    return false;
  }
  static Word cat(Word a, const Word& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }

  Sort sort(const Term& t) const {
    using K = Term::Kind;
    switch (t.kind) {
      case K::Empty: return {};
      case K::Id: symbols(t.layer, t.a); return {{{t.layer, t.a}}, {{t.layer, t.a}}};
      case K::Gen: {
        if (t.layer.empty()) {
          for (const auto& e : sys_.external)
            if (e.name == t.name) return {e.arity, e.coarity};
          throw Reject{ErrorCode::UnknownGenerator};
        }
        const auto& g = gen(layer(t.layer), t.name);
        return {{{t.layer, g.dom}}, {{t.layer, g.cod}}};
      }
      case K::Box: box(t.box); return {{{t.box.layer, t.box.dom}}, {{t.box.layer, t.box.cod}}};
      case K::Pants:
        symbols(t.layer, t.a);
        symbols(t.layer, t.b);
        return {{{t.layer, t.a}, {t.layer, t.b}}, {{t.layer, cat(t.a, t.b)}}};
      case K::Copants:
        symbols(t.layer, t.a);
        symbols(t.layer, t.b);
        return {{{t.layer, cat(t.a, t.b)}}, {{t.layer, t.a}, {t.layer, t.b}}};
      case K::Cup: layer(t.layer); return {{}, {{t.layer, {}}}};
      case K::Cap: layer(t.layer); return {{{t.layer, {}}}, {}};
      case K::Refine:
      case K::Coarsen: {
        const auto& f = functor(t.functor);
        symbols(f.source, t.a);
        SheetType hi{f.source, t.a}, lo{f.target, image(f, t.a)};
        return t.kind == K::Refine ? Sort{{hi}, {lo}} : Sort{{lo}, {hi}};
      }
      case K::Sym:
        symbols(t.layer, t.a);
        symbols(t.layer2, t.b);
        return {{{t.layer, t.a}, {t.layer2, t.b}}, {{t.layer2, t.b}, {t.layer, t.a}}};
      case K::Seq: {
        Sort s;
        for (std::size_t i = 0; i < t.args.size(); ++i) {
          Sort n = sort(t.args[i]);
          if (i == 0) {
            s = n;
          } else {
            if (n.dom != s.cod) throw Reject{ErrorCode::SortMismatch};
            s.cod = n.cod;
          }
        }
        return s;
      }
      case K::Par: {
        Sort s;
        for (const auto& a : t.args) {
          Sort n = sort(a);
          s.dom.insert(s.dom.end(), n.dom.begin(), n.dom.end());
          s.cod.insert(s.cod.end(), n.cod.begin(), n.cod.end());
        }
        return s;
      }
      case K::Fuse: {
        if (t.args.size() != 2 || !internal(t.args[0]) || !internal(t.args[1]))
          throw Reject{ErrorCode::SideConditionViolation};
        Sort x = sort(t.args[0]), y = sort(t.args[1]);
        if (x.dom[0].layer != t.layer || y.dom[0].layer != t.layer) throw Reject{ErrorCode::SideConditionViolation};
        return {{{t.layer, cat(x.dom[0].word, y.dom[0].word)}}, {{t.layer, cat(x.cod[0].word, y.cod[0].word)}}};
      }
    }
    throw Reject{ErrorCode::MalformedInput};
  }
};

// ------------------------------------------------------------ random terms

class TermGen {
 public:
  TermGen(const SystemOfLayers& sys, std::mt19937& rng) : sys_(sys), rng_(rng) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  Word random_word(const std::string& layer, int max_len) {
    const auto& objs = sys_.require_layer(layer).objects;
    Word w;
    for (int n = pick(max_len + 1); n > 0; --n) w.push_back(objs[pick(static_cast<int>(objs.size()))]);
    return w;
  }

  OmegaType random_type(int max_sheets = 3) {
    OmegaType t;
    for (int n = 1 + pick(max_sheets); n > 0; --n) {
      const auto& l = sys_.layers[pick(static_cast<int>(sys_.layers.size()))].id;
      t.push_back({l, random_word(l, 2)});
    }
    return t;
  }

  /// Identity term on a type.
  static Term identity(const OmegaType& t) {
    if (t.empty()) return Term::empty();
    if (t.size() == 1) return Term::id(t[0].layer, t[0].word);
    std::vector<Term> parts;
    for (const auto& s : t) parts.push_back(Term::id(s.layer, s.word));
    return Term::par(parts);
  }

  /// Random internal morphism out of `w` with a few slices.
  InternalDiagram random_box(const std::string& layer, const Word& w, int max_slices = 2) {
    const auto& l = sys_.require_layer(layer);
    InternalDiagram d{layer, w, w, {}};
    for (int n = pick(max_slices + 1); n > 0; --n) {
      std::vector<Slice> options;
      for (const auto& g : l.generators)
        for (std::size_t at = 0; at + g.dom.size() <= d.cod.size(); ++at)
          if (std::equal(g.dom.begin(), g.dom.end(), d.cod.begin() + static_cast<std::ptrdiff_t>(at)) &&
              d.cod.size() - g.dom.size() + g.cod.size() <= 4)
            options.push_back({at, g.name});
      if (options.empty()) break;
      const Slice s = options[pick(static_cast<int>(options.size()))];
      const auto* g = l.find_generator(s.gen);
      Word next(d.cod.begin(), d.cod.begin() + static_cast<std::ptrdiff_t>(s.offset));
      next.insert(next.end(), g->cod.begin(), g->cod.end());
      next.insert(next.end(), d.cod.begin() + static_cast<std::ptrdiff_t>(s.offset + g->dom.size()), d.cod.end());
      d.cod = std::move(next);
      d.slices.push_back(s);
    }
    return d;
  }

  /// One parallel layer of atoms on `dom`; the codomain goes to `cod`.
  Term step(const OmegaType& dom, OmegaType& cod) {
    std::vector<Term> parts;
    cod.clear();
    auto emit = [&](Term t) {
      const Sort s = infer_sort(sys_, t);
      cod.insert(cod.end(), s.cod.begin(), s.cod.end());
      parts.push_back(std::move(t));
    };
    std::size_t i = 0;
    while (i <= dom.size()) {
      if (coin(0.08)) emit(Term::cup(sys_.layers[pick(static_cast<int>(sys_.layers.size()))].id));
      if (i == dom.size()) break;
      const auto& s = dom[i];
      std::vector<std::function<std::size_t()>> moves;
      moves.push_back([&] { emit(Term::id(s.layer, s.word)); return 1; });
      moves.push_back([&] { emit(Term::boxed(random_box(s.layer, s.word))); return 1; });
      for (const auto& g : sys_.require_layer(s.layer).generators)
        if (g.dom == s.word) moves.push_back([&, name = g.name] { emit(Term::gen(s.layer, name)); return 1; });
      for (const auto* f : sys_.functors_from(s.layer))
        if (translate_word(*f, s.word).size() <= 4)
          moves.push_back([&, name = f->name] { emit(Term::refine(name, s.word)); return 1; });
      for (const auto* f : sys_.functors_into(s.layer))
        for (const auto& w : short_words(f->source))
          if (translate_word(*f, w) == s.word)
            moves.push_back([&, name = f->name, w] { emit(Term::coarsen(name, w)); return 1; });
      moves.push_back([&] {
        const std::size_t k = static_cast<std::size_t>(pick(static_cast<int>(s.word.size()) + 1));
        emit(Term::copants(s.layer, Word(s.word.begin(), s.word.begin() + static_cast<std::ptrdiff_t>(k)),
                           Word(s.word.begin() + static_cast<std::ptrdiff_t>(k), s.word.end())));
        return 1;
      });
      if (s.word.size() >= 1)
        moves.push_back([&] {
          const std::size_t k = static_cast<std::size_t>(pick(static_cast<int>(s.word.size()) + 1));
          const Word w1(s.word.begin(), s.word.begin() + static_cast<std::ptrdiff_t>(k));
          const Word w2(s.word.begin() + static_cast<std::ptrdiff_t>(k), s.word.end());
          emit(Term::fuse(s.layer, Term::boxed(random_box(s.layer, w1, 1)), Term::boxed(random_box(s.layer, w2, 1))));
          return 1;
        });
      if (s.word.empty()) moves.push_back([&] { emit(Term::cap(s.layer)); return 1; });
      if (i + 1 < dom.size()) {
        const auto& t = dom[i + 1];
        if (t.layer == s.layer && s.word.size() + t.word.size() <= 4)
          moves.push_back([&] { emit(Term::pants(s.layer, s.word, t.word)); return 2; });
        moves.push_back([&] { emit(Term::sym(s.layer, s.word, t.layer, t.word)); return 2; });
      }
      for (const auto& e : sys_.external)
        if (i + e.arity.size() <= dom.size() &&
            std::equal(e.arity.begin(), e.arity.end(), dom.begin() + static_cast<std::ptrdiff_t>(i)))
          moves.push_back([&, name = e.name, n = e.arity.size()] { emit(Term::external(name)); return n; });
      i += moves[pick(static_cast<int>(moves.size()))]();
    }
    if (parts.empty()) return Term::empty();
    if (parts.size() == 1) return parts[0];
    return Term::par(parts);
  }

  Term random_term(const OmegaType& dom, int steps, OmegaType* cod_out = nullptr) {
    std::vector<Term> parts;
    OmegaType cur = dom, next;
    for (int k = 0; k < steps; ++k) {
      parts.push_back(step(cur, next));
      cur = next;
    }
    if (cod_out) *cod_out = cur;
    if (parts.size() == 1) return parts[0];
    return Term::seq(parts);
  }

  /// Random term whose compiled diagram has between min and max cells.
  Term random_bounded(int min_cells, int max_cells, int steps) {
    for (;;) {
      Term t = random_term(random_type(), 1 + pick(steps));
      const auto n = static_cast<int>(compile(sys_, t).cells.size());
      if (n >= min_cells && n <= max_cells) return t;
    }
  }

  std::vector<Word> short_words(const std::string& layer) {
    const auto& objs = sys_.require_layer(layer).objects;
    std::vector<Word> out{{}};
    for (const auto& a : objs) out.push_back({a});
    for (const auto& a : objs)
      for (const auto& b : objs) out.push_back({a, b});
    return out;
  }

 private:
  const SystemOfLayers& sys_;
  std::mt19937& rng_;
};

// ------------------------------------------------------------ broken terms

struct Broken {
  Term term;
  ErrorCode expected;
};

/// A well-formed term with exactly one defect planted at a random node.
inline Broken break_term(const SystemOfLayers& sys, TermGen& gen, const Term& good) {
  const auto& layer = sys.layers[gen.pick(static_cast<int>(sys.layers.size()))].id;
  Term atom;
  ErrorCode code = ErrorCode::SortMismatch;
  bool append_step = false;
  switch (gen.pick(8)) {
    case 0: append_step = true; break;
    case 1: atom = Term::gen(layer, "nope"); code = ErrorCode::UnknownGenerator; break;
    case 2: atom = Term::refine("Nope", {}); code = ErrorCode::UnknownFunctor; break;
    case 3: atom = Term::id(layer, {"zz"}); code = ErrorCode::UnknownSymbol; break;
    case 4: atom = Term::cup("Nowhere"); code = ErrorCode::UnknownLayer; break;
    case 5: {
      // m needs A A but gets B
      atom = Term::boxed(slices("H", {"B"}, {"B"}, {{0, "m"}}));
      code = ErrorCode::SortMismatch;
      break;
    }
    case 6:
      atom = Term::fuse("H", Term::refine("F", {"A"}), Term::id("H", {}));
      code = ErrorCode::SideConditionViolation;
      break;
    default: atom = Term::coarsen("F", {"zz"}); code = ErrorCode::UnknownSymbol; break;
  }
  std::vector<Term*> nodes;
  Term out = good;
  std::function<void(Term&)> walk = [&](Term& t) {
    nodes.push_back(&t);
    if (t.kind == Term::Kind::Seq || t.kind == Term::Kind::Par)
      for (auto& a : t.args) walk(a);
  };
  walk(out);
  Term& at = *nodes[gen.pick(static_cast<int>(nodes.size()))];
  if (append_step) {
    const Sort s = infer_sort(sys, at);
    OmegaType other;
    do other = gen.random_type(); while (other == s.cod);
    OmegaType ignored;
    at = Term::seq({at, gen.step(other, ignored)});
  } else if (gen.coin(0.5)) {
    at = Term::par({at, atom});
  } else {
    at = Term::par({atom, at});
  }
  return {out, code};
}

// ------------------------------------------------------------ SMC rewriting
//
// One random instance of a symmetric monoidal law applied at a random
// subterm. Every law keeps the denoted 1-cell.

class SmcRewriter {
 public:
  SmcRewriter(const SystemOfLayers& sys, TermGen& gen) : sys_(sys), gen_(gen) {}

  void rewrite(Term& t) {
    for (;;) {
      std::vector<Term*> nodes;
      std::function<void(Term&)> walk = [&](Term& x) {
        nodes.push_back(&x);
        if (x.kind == Term::Kind::Seq || x.kind == Term::Kind::Par)
          for (auto& a : x.args) walk(a);
      };
      walk(t);
      if (apply(*nodes[gen_.pick(static_cast<int>(nodes.size()))])) return;
    }
  }

 private:
  const SystemOfLayers& sys_;
  TermGen& gen_;

  static Term group(const std::vector<Term>& parts, std::size_t from, std::size_t to, Term::Kind kind) {
    if (to - from == 1) return parts[from];
    std::vector<Term> sub(parts.begin() + static_cast<std::ptrdiff_t>(from),
                          parts.begin() + static_cast<std::ptrdiff_t>(to));
    return kind == Term::Kind::Seq ? Term::seq(sub) : Term::par(sub);
  }
  static bool single(const OmegaType& t) { return t.size() == 1; }

  /// id_{prefix} (x) sym(s_i, s_{i+1}) (x) id_{rest}
  static Term swap_at(const OmegaType& t, std::size_t i) {
    std::vector<Term> parts;
    for (std::size_t k = 0; k < i; ++k) parts.push_back(Term::id(t[k].layer, t[k].word));
    parts.push_back(Term::sym(t[i].layer, t[i].word, t[i + 1].layer, t[i + 1].word));
    for (std::size_t k = i + 2; k < t.size(); ++k) parts.push_back(Term::id(t[k].layer, t[k].word));
    return parts.size() == 1 ? parts[0] : Term::par(parts);
  }

  bool apply(Term& t) {
    using K = Term::Kind;
    const Sort s = infer_sort(sys_, t);
    switch (gen_.pick(9)) {
      case 0:
        t = gen_.coin(0.5) ? Term::seq({TermGen::identity(s.dom), t}) : Term::seq({t, TermGen::identity(s.cod)});
        return true;
      case 1:
        t = gen_.coin(0.5) ? Term::par({Term::empty(), t}) : Term::par({t, Term::empty()});
        return true;
      case 2:
      case 3: {
        if ((t.kind != K::Seq && t.kind != K::Par) || t.args.size() < 2) return false;
        const std::size_t k = 1 + static_cast<std::size_t>(gen_.pick(static_cast<int>(t.args.size()) - 1));
        const auto parts = t.args;
        t = t.kind == K::Seq ? Term::seq({group(parts, 0, k, K::Seq), group(parts, k, parts.size(), K::Seq)})
                             : Term::par({group(parts, 0, k, K::Par), group(parts, k, parts.size(), K::Par)});
        return true;
      }
      case 4: {
        // sliding
        if (t.kind != K::Par || t.args.size() != 2) return false;
        const Term a = t.args[0], b = t.args[1];
        const Sort sa = infer_sort(sys_, a), sb = infer_sort(sys_, b);
        if (gen_.coin(0.5))
          t = Term::seq({Term::par({a, TermGen::identity(sb.dom)}), Term::par({TermGen::identity(sa.cod), b})});
        else
          t = Term::seq({Term::par({TermGen::identity(sa.dom), b}), Term::par({a, TermGen::identity(sb.cod)})});
        return true;
      }
      case 5: {
        // interchange, both directions
        if (t.kind == K::Par && t.args.size() == 2 && t.args[0].kind == K::Seq && t.args[1].kind == K::Seq &&
            t.args[0].args.size() == 2 && t.args[1].args.size() == 2) {
          const auto& x = t.args[0].args;
          const auto& y = t.args[1].args;
          t = Term::seq({Term::par({x[0], y[0]}), Term::par({x[1], y[1]})});
          return true;
        }
        if (t.kind == K::Seq && t.args.size() == 2 && t.args[0].kind == K::Par && t.args[1].kind == K::Par &&
            t.args[0].args.size() == 2 && t.args[1].args.size() == 2) {
          const auto& x = t.args[0].args;
          const auto& y = t.args[1].args;
          if (infer_sort(sys_, x[0]).cod != infer_sort(sys_, y[0]).dom) return false;
          t = Term::par({Term::seq({x[0], y[0]}), Term::seq({x[1], y[1]})});
          return true;
        }
        return false;
      }
      case 6: {
        // naturality of the symmetry
        if (t.kind != K::Par || t.args.size() != 2) return false;
        const Term a = t.args[0], b = t.args[1];
        const Sort sa = infer_sort(sys_, a), sb = infer_sort(sys_, b);
        if (!single(sa.dom) || !single(sa.cod) || !single(sb.dom) || !single(sb.cod)) return false;
        t = Term::seq({Term::sym(sa.dom[0].layer, sa.dom[0].word, sb.dom[0].layer, sb.dom[0].word),
                       Term::par({b, a}),
                       Term::sym(sb.cod[0].layer, sb.cod[0].word, sa.cod[0].layer, sa.cod[0].word)});
        return true;
      }
      case 7: {
        // involution after t
        if (s.cod.size() < 2) return false;
        const std::size_t i = static_cast<std::size_t>(gen_.pick(static_cast<int>(s.cod.size()) - 1));
        OmegaType mid = s.cod;
        std::swap(mid[i], mid[i + 1]);
        t = Term::seq({t, swap_at(s.cod, i), swap_at(mid, i)});
        return true;
      }
      default: {
        // involution before t
        if (s.dom.size() < 2) return false;
        const std::size_t i = static_cast<std::size_t>(gen_.pick(static_cast<int>(s.dom.size()) - 1));
        OmegaType mid = s.dom;
        std::swap(mid[i], mid[i + 1]);
        t = Term::seq({swap_at(s.dom, i), swap_at(mid, i), t});
        return true;
      }
    }
  }
};

/// The same diagram with its cells listed in a different order.
inline Diagram permute_cells(const Diagram& d, const std::vector<int>& perm) {
  // perm[old] = new
  Diagram out;
  out.in = d.in;
  out.out = d.out;
  out.cells.resize(d.cells.size());
  out.feeds.resize(d.cells.size());
  auto map = [&](Port p) {
    if (p.cell != kBoundary) p.cell = perm[p.cell];
    return p;
  };
  for (std::size_t c = 0; c < d.cells.size(); ++c) {
    out.cells[perm[c]] = d.cells[c];
    for (const auto& p : d.feeds[c]) out.feeds[perm[c]].push_back(map(p));
  }
  for (const auto& p : d.out_feeds) out.out_feeds.push_back(map(p));
  return out;
}

// ------------------------------------------------------------ isomorphism

/// Brute force over all label-preserving cell bijections.
inline bool brute_iso(const Diagram& x, const Diagram& y) {
  if (x.in != y.in || x.out != y.out || x.cells.size() != y.cells.size()) return false;
  const std::size_t n = x.cells.size();
  std::vector<std::string> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = cell_label(x.cells[i]);
    ly[i] = cell_label(y.cells[i]);
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = lx[i] == ly[perm[i]];
    if (!ok) continue;
    auto map = [&](Port p) {
      if (p.cell != kBoundary) p.cell = perm[p.cell];
      return p;
    };
    for (std::size_t i = 0; i < n && ok; ++i) {
      const auto& fx = x.feeds[i];
      const auto& fy = y.feeds[perm[i]];
      if (fx.size() != fy.size()) ok = false;
      for (std::size_t k = 0; k < fx.size() && ok; ++k) ok = map(fx[k]) == fy[k];
    }
    for (std::size_t k = 0; k < x.out_feeds.size() && ok; ++k) ok = map(x.out_feeds[k]) == y.out_feeds[k];
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

/// Swaps the producers of two same-typed wires; nullopt if that is not a
/// valid diagram or not a change.
inline std::optional<Diagram> cross_wires(const Diagram& d, TermGen& gen) {
  struct Slot {
    Port consumer;
    Port producer;
    SheetType type;
  };
  std::vector<Slot> slots;
  for (std::size_t c = 0; c < d.cells.size(); ++c)
    for (std::size_t k = 0; k < d.feeds[c].size(); ++k)
      slots.push_back({{static_cast<int>(c), static_cast<int>(k)}, d.feeds[c][k], d.cells[c].ins[k]});
  for (std::size_t k = 0; k < d.out_feeds.size(); ++k)
    slots.push_back({{kBoundary, static_cast<int>(k)}, d.out_feeds[k], d.out[k]});
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < slots.size(); ++i)
    for (std::size_t j = i + 1; j < slots.size(); ++j)
      if (slots[i].type == slots[j].type && slots[i].producer != slots[j].producer) pairs.push_back({i, j});
  if (pairs.empty()) return std::nullopt;
  const auto [i, j] = pairs[gen.pick(static_cast<int>(pairs.size()))];
  Diagram out = d;
  auto set = [&](const Port& consumer, const Port& producer) {
    if (consumer.cell == kBoundary)
      out.out_feeds[consumer.port] = producer;
    else
      out.feeds[consumer.cell][consumer.port] = producer;
  };
  set(slots[i].consumer, slots[j].producer);
  set(slots[j].consumer, slots[i].producer);
  try {
    check_diagram(out);
  } catch (const Error&) {
    return std::nullopt;
  }
  return out;
}

// ------------------------------------------------------------ coends
//
// Classes of Q o P at (a, c): triples (b, p, q) under the equivalence
// generated by (b', P(a,k) p, q) ~ (b, p, Q(k,c) q) for k : b -> b', closed
// by iterating the relation to a fixpoint on a boolean matrix.

struct NaiveCoend {
  std::vector<std::array<int, 3>> triples;  // (b, p, q)
  std::vector<std::vector<bool>> related;
};

inline NaiveCoend naive_coend(const Profunctor& P, const Profunctor& Q, int a, int c) {
  NaiveCoend out;
  const auto& B = *P.target;
  std::map<std::array<int, 3>, std::size_t> index;
  for (int b = 0; b < B.nobj(); ++b)
    for (int p = 0; p < P.count(a, b); ++p)
      for (int q = 0; q < Q.count(b, c); ++q) {
        index[{b, p, q}] = out.triples.size();
        out.triples.push_back({b, p, q});
      }
  const std::size_t n = out.triples.size();
  out.related.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) out.related[i][i] = true;
  for (int k = 0; k < B.nmor(); ++k) {
    const int b = B.dom[k], b2 = B.cod[k];
    for (int p = 0; p < P.count(a, b); ++p)
      for (int q = 0; q < Q.count(b2, c); ++q) {
        // P acts covariantly in its target, Q contravariantly in its source
        const std::size_t x = index.at({b2, P.act_right(k, a, p), q});
        const std::size_t y = index.at({b, p, Q.act_left(k, c, q)});
        out.related[x][y] = out.related[y][x] = true;
      }
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      if (out.related[i][m])
        for (std::size_t j = 0; j < n; ++j)
          if (out.related[m][j]) out.related[i][j] = true;
  return out;
}

// ------------------------------------------------------------ bisimulation
//
// Greatest fixpoint on exact syntax: start from all pairs and delete pairs
// violating the transfer property until nothing changes.

inline bool gfp_bisimilar(const ccs::Process& p, const ccs::Process& q, std::size_t* states_out = nullptr) {
  std::map<std::string, int> id;
  std::vector<ccs::Process> states;
  std::vector<std::vector<std::pair<std::string, int>>> succ;
  std::function<int(const ccs::Process&)> visit = [&](const ccs::Process& s) -> int {
    const auto key = s.to_string();
    if (auto it = id.find(key); it != id.end()) return it->second;
    const int me = static_cast<int>(states.size());
    id[key] = me;
    states.push_back(s);
    succ.emplace_back();
    for (const auto& t : ccs::lts_transitions(s)) {
      const int to = visit(t.target);
      succ[me].push_back({t.label, to});
    }
    return me;
  };
  const int sp = visit(p), sq = visit(q);
  const std::size_t n = states.size();
  if (states_out) *states_out = n;
  std::vector<std::vector<bool>> rel(n, std::vector<bool>(n, true));
  auto simulated = [&](std::size_t x, std::size_t y) {
    for (const auto& [a, x2] : succ[x]) {
      bool found = false;
      for (const auto& [b, y2] : succ[y])
        if (a == b && rel[x2][y2]) found = true;
      if (!found) return false;
    }
    return true;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (rel[x][y] && !(simulated(x, y) && simulated(y, x))) {
          rel[x][y] = false;
          changed = true;
        }
  }
  return rel[sp][sq];
}

}  // namespace testkit
