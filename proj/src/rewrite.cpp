#include "layerprop/rewrite.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include "layerprop/error.hpp"
#include "layerprop/internal.hpp"

namespace layerprop {

std::string_view to_string(Orientation o) { return o == Orientation::Fwd ? "fwd" : "bwd"; }

std::vector<std::string> rule_names() {
  return {"A1", "A2", "A3", "A4", "A5", "A6", "E", "F1", "F2", "F3", "F4",
          "M1", "M2", "M3", "M4", "M5", "M6", "X"};
}

bool is_bidirectional(const std::string& rule) {
  return !rule.empty() && (rule[0] == 'F' || rule[0] == 'M' || rule[0] == 'E');
}

bool is_valid_direction(const std::string& rule, Orientation o) {
  return is_bidirectional(rule) || o == Orientation::Fwd;
}

std::string match_to_string(const Match& m) {
  std::ostringstream os;
  os << m.rule << ' ' << to_string(m.orientation);
  if (!m.variant.empty()) os << " [" << m.variant << ']';
  if (!m.param.empty()) os << " {" << m.param << '}';
  if (!m.word.empty()) os << ' ' << word_to_string(m.word);
  os << " at";
  for (int c : m.anchor) os << " c" << c;
  for (const auto& w : m.wires) os << " w(" << w.cell << ',' << w.port << ')';
  if (m.index) os << " #" << m.index;
  return os.str();
}

Diagram splice(const Diagram& host, const std::set<int>& remove, const std::vector<Port>& in_producers,
               const std::vector<Port>& out_consumers, const Diagram& rep) {
  if (in_producers.size() != rep.in.size() || out_consumers.size() != rep.out.size()) {
    throw Error(ErrorCode::MalformedInput, "replacement boundary does not fit the match");
  }
  Diagram d;
  d.in = host.in;
  d.out = host.out;
  std::vector<int> newidx(host.cells.size(), -1);
  for (std::size_t c = 0; c < host.cells.size(); ++c) {
    if (remove.count(static_cast<int>(c))) continue;
    newidx[c] = static_cast<int>(d.cells.size());
    d.cells.push_back(host.cells[c]);
  }
  const int base = static_cast<int>(d.cells.size());
  d.cells.insert(d.cells.end(), rep.cells.begin(), rep.cells.end());
  auto map_host = [&](const Port& p) {
    if (p.cell == kBoundary) return p;
    if (newidx[p.cell] < 0) throw Error(ErrorCode::MalformedInput, "match leaves a wire dangling");
    return Port{newidx[p.cell], p.port};
  };
  auto map_rep = [&](const Port& p) {
    if (p.cell == kBoundary) return map_host(in_producers[p.port]);
    return Port{base + p.cell, p.port};
  };
  std::map<Port, Port> redirected;
  for (std::size_t k = 0; k < out_consumers.size(); ++k) redirected[out_consumers[k]] = map_rep(rep.out_feeds[k]);
  for (std::size_t c = 0; c < host.cells.size(); ++c) {
    if (newidx[c] < 0) continue;
    std::vector<Port> row;
    for (std::size_t k = 0; k < host.feeds[c].size(); ++k) {
      auto it = redirected.find(Port{static_cast<int>(c), static_cast<int>(k)});
      row.push_back(it != redirected.end() ? it->second : map_host(host.feeds[c][k]));
    }
    d.feeds.push_back(std::move(row));
  }
  for (const auto& f : rep.feeds) {
    std::vector<Port> row;
    for (const auto& p : f) row.push_back(map_rep(p));
    d.feeds.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < host.out_feeds.size(); ++k) {
    auto it = redirected.find(Port{kBoundary, static_cast<int>(k)});
    d.out_feeds.push_back(it != redirected.end() ? it->second : map_host(host.out_feeds[k]));
  }
  check_diagram(d);
  return d;
}

namespace {

Word cat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Diagram seq(const Diagram& a, const Diagram& b) { return seq_compose(a, b); }
Diagram par(const Diagram& a, const Diagram& b) { return par_tensor(a, b); }
Diagram one(const Cell& c) { return single_cell(c); }
Diagram id1(const std::string& layer, const Word& w) { return identity_diagram({{layer, w}}); }

struct Wire {
  Port producer;
  Port consumer;
  SheetType type;
};

class Expander {
 public:
  Expander(const SystemOfLayers& sys, const Diagram& d, const RuleOptions& opts, MoveSet moves,
           const std::optional<RuleFilter>& filter)
      : sys_(sys), d_(d), cm_(consumers(d)), opts_(opts), moves_(moves), filter_(filter) {
    for (std::size_t c = 0; c < d_.cells.size(); ++c)
      for (std::size_t k = 0; k < d_.feeds[c].size(); ++k)
        wires_.push_back({d_.feeds[c][k], {static_cast<int>(c), static_cast<int>(k)}, d_.cells[c].ins[k]});
    for (std::size_t k = 0; k < d_.out_feeds.size(); ++k)
      wires_.push_back({d_.out_feeds[k], {kBoundary, static_cast<int>(k)}, d_.out[k]});
  }

  Expansion run() {
    a1(); a2(); a3(); a4(); a5(); a6();
    e();
    f1(); f2(); f3(); f4();
    m1(); m2(); m3(); m4(); m5(); m6();
    x();
    return std::move(out_);
  }

 private:
  const SystemOfLayers& sys_;
  const Diagram& d_;
  ConsumerMap cm_;
  const RuleOptions& opts_;
  MoveSet moves_;
  std::optional<RuleFilter> filter_;
  std::vector<Wire> wires_;
  Expansion out_;

  bool wants(const std::string& rule, Orientation o, bool insertion) const {
    if (!opts_.only.empty() && !opts_.only.count(rule)) return false;
    if (filter_ && (filter_->rule != rule || (filter_->orientation && *filter_->orientation != o))) return false;
    if (insertion && !opts_.include_insertions) return false;
    switch (moves_) {
      case MoveSet::All: return true;
      case MoveSet::Forward: return is_valid_direction(rule, o);
      case MoveSet::Predecessor: return is_bidirectional(rule) || o == Orientation::Bwd;
    }
    return false;
  }

  const Cell& cell(int c) const { return d_.cells[c]; }
  bool is(const Port& p, CellKind k) const { return p.cell != kBoundary && cell(p.cell).kind == k; }
  Port in(int c, int k) const { return d_.feeds[c][k]; }
  Port cons(int c, int k) const { return cm_.of_cell[c][k]; }
  int n() const { return static_cast<int>(d_.cells.size()); }

  void emit(Match m, const std::set<int>& remove, std::vector<Port> ins, std::vector<Port> outs,
            const Diagram& rep) {
    Diagram r;
    try {
      r = splice(d_, remove, ins, outs, rep);
    } catch (const Error&) {
      return;
    }
    m.anchor.assign(remove.begin(), remove.end());
    auto cf = canonicalize(sys_, r);
    out_.steps.push_back({std::move(m), std::move(cf.diagram), std::move(cf.key)});
  }

  static Match mk(const std::string& rule, Orientation o, bool insertion = false) {
    Match m;
    m.rule = rule;
    m.orientation = o;
    m.insertion = insertion;
    return m;
  }

  // Insertion of `rep` (one sheet in, one sheet out) on a single wire.
  void insert_on(const Wire& w, Match m, const Diagram& rep) {
    m.wires = {w.consumer};
    emit(std::move(m), {}, {w.producer}, {w.consumer}, rep);
  }

  // ------------------------------------------------------------ A family

  void a1() {
    if (wants("A1", Orientation::Fwd, true)) {
      for (const auto& w1 : wires_) {
        for (const auto& w2 : wires_) {
          if (w1.consumer == w2.consumer || w1.type.layer != w2.type.layer) continue;
          const auto& l = w1.type.layer;
          auto m = mk("A1", Orientation::Fwd, true);
          m.wires = {w1.consumer, w2.consumer};
          m.param = l;
          emit(m, {}, {w1.producer, w2.producer}, {w1.consumer, w2.consumer},
               seq(one(make_pants(l, w1.type.word, w2.type.word)), one(make_copants(l, w1.type.word, w2.type.word))));
        }
      }
    }
    if (wants("A1", Orientation::Bwd, false)) {
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Copants || !is(in(c2, 0), CellKind::Pants)) continue;
        int c1 = in(c2, 0).cell;
        if (cell(c1).a != cell(c2).a || cell(c1).b != cell(c2).b) continue;
        emit(mk("A1", Orientation::Bwd), {c1, c2}, {in(c1, 0), in(c1, 1)}, {cons(c2, 0), cons(c2, 1)},
             identity_diagram(cell(c1).ins));
      }
    }
  }

  void a2() {
    if (wants("A2", Orientation::Fwd, false)) {
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Pants) continue;
        Port p0 = in(c2, 0), p1 = in(c2, 1);
        if (!is(p0, CellKind::Copants) || p0.cell != p1.cell || p0.port != 0 || p1.port != 1) continue;
        int c1 = p0.cell;
        emit(mk("A2", Orientation::Fwd), {c1, c2}, {in(c1, 0)}, {cons(c2, 0)}, identity_diagram(cell(c1).ins));
      }
    }
    if (wants("A2", Orientation::Bwd, true)) {
      for (const auto& w : wires_) {
        for (std::size_t s = 0; s <= w.type.word.size(); ++s) {
          Word a(w.type.word.begin(), w.type.word.begin() + static_cast<std::ptrdiff_t>(s));
          Word b(w.type.word.begin() + static_cast<std::ptrdiff_t>(s), w.type.word.end());
          auto m = mk("A2", Orientation::Bwd, true);
          m.index = s;
          m.param = w.type.layer;
          insert_on(w, m, seq(one(make_copants(w.type.layer, a, b)), one(make_pants(w.type.layer, a, b))));
        }
      }
    }
  }

  void a3() {
    if (wants("A3", Orientation::Fwd, true)) {
      for (const auto& w : wires_) {
        for (const auto* f : sys_.functors_from(w.type.layer)) {
          auto m = mk("A3", Orientation::Fwd, true);
          m.param = f->name;
          insert_on(w, m, seq(one(make_refine(sys_, f->name, w.type.word)), one(make_coarsen(sys_, f->name, w.type.word))));
        }
      }
    }
    if (wants("A3", Orientation::Bwd, false)) collapse_refine_coarsen("A3", Orientation::Bwd, false);
  }

  // Refine;Coarsen => id, shared by A3 backwards and the window collapse X.
  void collapse_refine_coarsen(const std::string& rule, Orientation o, bool faithful_only) {
    for (int c2 = 0; c2 < n(); ++c2) {
      if (cell(c2).kind != CellKind::Coarsen || !is(in(c2, 0), CellKind::Refine)) continue;
      int c1 = in(c2, 0).cell;
      if (cell(c1).functor != cell(c2).functor || cell(c1).a != cell(c2).a) continue;
      if (faithful_only && !opts_.faithful_functors.count(cell(c1).functor)) continue;
      auto m = mk(rule, o);
      m.param = cell(c1).functor;
      emit(m, {c1, c2}, {in(c1, 0)}, {cons(c2, 0)}, identity_diagram(cell(c1).ins));
    }
  }

  void a4() {
    if (wants("A4", Orientation::Fwd, false)) {
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Refine || !is(in(c2, 0), CellKind::Coarsen)) continue;
        int c1 = in(c2, 0).cell;
        if (cell(c1).functor != cell(c2).functor || cell(c1).a != cell(c2).a) continue;
        auto m = mk("A4", Orientation::Fwd);
        m.param = cell(c1).functor;
        emit(m, {c1, c2}, {in(c1, 0)}, {cons(c2, 0)}, identity_diagram(cell(c1).ins));
      }
    }
    if (wants("A4", Orientation::Bwd, true)) {
      for (const auto& w : wires_) {
        for (const auto* f : sys_.functors_into(w.type.layer)) {
          bool complete = true;
          auto pre = word_preimages(sys_, *f, w.type.word, opts_.cap, &complete);
          if (!complete) out_.complete = false;
          for (const auto& a : pre) {
            auto m = mk("A4", Orientation::Bwd, true);
            m.param = f->name;
            m.word = a;
            insert_on(w, m, seq(one(make_coarsen(sys_, f->name, a)), one(make_refine(sys_, f->name, a))));
          }
        }
      }
    }
  }

  void a5() {
    if (wants("A5", Orientation::Fwd, true)) {
      std::vector<std::string> ids;
      for (const auto& l : sys_.layers) ids.push_back(l.id);
      std::sort(ids.begin(), ids.end());
      for (const auto& l : ids) {
        auto m = mk("A5", Orientation::Fwd, true);
        m.param = l;
        emit(m, {}, {}, {}, seq(one(make_cup(l)), one(make_cap(l))));
      }
    }
    if (wants("A5", Orientation::Bwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Cup || !is(cons(c1, 0), CellKind::Cap)) continue;
        emit(mk("A5", Orientation::Bwd), {c1, cons(c1, 0).cell}, {}, {}, empty_diagram());
      }
    }
  }

  void a6() {
    if (wants("A6", Orientation::Fwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Cap) continue;
        for (int c2 = 0; c2 < n(); ++c2) {
          if (cell(c2).kind != CellKind::Cup || cell(c2).layer != cell(c1).layer) continue;
          if (reaches(d_, c2, c1)) continue;
          emit(mk("A6", Orientation::Fwd), {c1, c2}, {in(c1, 0)}, {cons(c2, 0)}, id1(cell(c1).layer, {}));
        }
      }
    }
    if (wants("A6", Orientation::Bwd, true)) {
      for (const auto& w : wires_) {
        if (!w.type.word.empty()) continue;
        auto m = mk("A6", Orientation::Bwd, true);
        m.param = w.type.layer;
        insert_on(w, m, seq(one(make_cap(w.type.layer)), one(make_cup(w.type.layer))));
      }
    }
  }

  // ------------------------------------------------------------ equations

  void e() {
    for (Orientation o : {Orientation::Fwd, Orientation::Bwd}) {
      // An identity side matches on bare wires of its type.
      if (wants("E", o, true)) {
        for (const auto& layer : sys_.layers)
          for (const auto& eq : layer.equations) {
            const auto& pat = o == Orientation::Fwd ? eq.lhs : eq.rhs;
            const auto& rep = o == Orientation::Fwd ? eq.rhs : eq.lhs;
            if (!pat.slices.empty() || rep.slices.empty()) continue;
            for (const auto& w : wires_) {
              if (w.type.layer != layer.id || w.type.word != pat.dom) continue;
              auto m = mk("E", o, true);
              m.param = eq.name;
              insert_on(w, m, box_diagram(rep));
            }
          }
      }
      if (!wants("E", o, false)) continue;
      for (int c = 0; c < n(); ++c) {
        if (cell(c).kind != CellKind::Box) continue;
        const auto& layer = sys_.require_layer(cell(c).layer);
        for (const auto& eq : layer.equations) {
          const auto& pat = o == Orientation::Fwd ? eq.lhs : eq.rhs;
          const auto& rep = o == Orientation::Fwd ? eq.rhs : eq.lhs;
          if (pat.slices.empty()) continue;
          auto occ = find_occurrences(sys_, cell(c).box, pat, opts_.cap);
          if (occ.size() >= opts_.cap) out_.complete = false;
          for (std::size_t i = 0; i < occ.size(); ++i) {
            auto body = internal_seq(internal_seq(occ[i].pre, internal_whisker(rep, occ[i].left, occ[i].right)),
                                     occ[i].post);
            auto m = mk("E", o);
            m.param = eq.name;
            m.index = i;
            emit(m, {c}, {in(c, 0)}, {cons(c, 0)}, box_diagram(body));
          }
        }
      }
    }
  }

  // ------------------------------------------------------------ F family

  std::vector<Factorization> facts(const InternalDiagram& box) {
    bool truncated = false;
    auto fs = factorizations(sys_, box, opts_.cap, &truncated);
    if (truncated) out_.complete = false;
    return fs;
  }

  std::vector<InternalDiagram> pre_of(const TranslationFunctor& f, const InternalDiagram& target) {
    auto res = preimages(sys_, f, target, opts_.cap);
    if (!res.complete) out_.complete = false;
    return res.diagrams;
  }

  /// Non-identity source morphisms starting (or ending) at `a` whose image
  /// is an identity.
  std::vector<InternalDiagram> collapsed(const TranslationFunctor& f, const Word& a, bool from) {
    std::vector<InternalDiagram> out;
    const bool any = std::any_of(f.morphism_map.begin(), f.morphism_map.end(),
                                 [](const auto& kv) { return kv.second.slices.empty(); });
    if (!any) return out;
    for (auto& s : pre_of(f, internal_identity(f.target, translate_word(f, a))))
      if (!s.slices.empty() && (from ? s.dom : s.cod) == a) out.push_back(std::move(s));
    return out;
  }

  void f1() {
    if (wants("F1", Orientation::Fwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Box || !is(cons(c1, 0), CellKind::Refine)) continue;
        int c2 = cons(c1, 0).cell;
        const auto& f = sys_.require_functor(cell(c2).functor);
        const auto& s = cell(c1).box;
        auto m = mk("F1", Orientation::Fwd);
        m.param = f.name;
        emit(m, {c1, c2}, {in(c1, 0)}, {cons(c2, 0)},
             seq(one(make_refine(sys_, f.name, s.dom)), box_diagram(translate_internal(sys_, f, s))));
      }
    }
    if (wants("F1", Orientation::Bwd, false)) {
      // s with f(s) an identity: the image box was dropped by normalization
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Refine) continue;
        const auto& f = sys_.require_functor(cell(c1).functor);
        std::size_t idx = 0;
        for (const auto& s : collapsed(f, cell(c1).a, true)) {
          auto m = mk("F1", Orientation::Bwd);
          m.param = f.name;
          m.variant = "collapsed";
          m.index = idx++;
          emit(m, {c1}, {in(c1, 0)}, {cons(c1, 0)}, seq(box_diagram(s), one(make_refine(sys_, f.name, s.cod))));
        }
      }
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Box || !is(in(c2, 0), CellKind::Refine)) continue;
        int c1 = in(c2, 0).cell;
        const auto& f = sys_.require_functor(cell(c1).functor);
        std::size_t idx = 0;
        for (const auto& fac : facts(cell(c2).box)) {
          if (fac.pre.slices.empty()) continue;
          for (const auto& s : pre_of(f, fac.pre)) {
            if (s.dom != cell(c1).a) continue;
            auto m = mk("F1", Orientation::Bwd);
            m.param = f.name;
            m.index = idx++;
            emit(m, {c1, c2}, {in(c1, 0)}, {cons(c2, 0)},
                 seq(seq(box_diagram(s), one(make_refine(sys_, f.name, s.cod))), box_diagram(fac.post)));
          }
        }
      }
    }
  }

  void f2() {
    if (wants("F2", Orientation::Fwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Coarsen || !is(cons(c1, 0), CellKind::Box)) continue;
        int c2 = cons(c1, 0).cell;
        const auto& f = sys_.require_functor(cell(c1).functor);
        const auto& s = cell(c2).box;
        auto m = mk("F2", Orientation::Fwd);
        m.param = f.name;
        emit(m, {c1, c2}, {in(c1, 0)}, {cons(c2, 0)},
             seq(box_diagram(translate_internal(sys_, f, s)), one(make_coarsen(sys_, f.name, s.cod))));
      }
    }
    if (wants("F2", Orientation::Bwd, false)) {
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Coarsen) continue;
        const auto& f = sys_.require_functor(cell(c2).functor);
        std::size_t idx = 0;
        for (const auto& s : collapsed(f, cell(c2).a, false)) {
          auto m = mk("F2", Orientation::Bwd);
          m.param = f.name;
          m.variant = "collapsed";
          m.index = idx++;
          emit(m, {c2}, {in(c2, 0)}, {cons(c2, 0)}, seq(one(make_coarsen(sys_, f.name, s.dom)), box_diagram(s)));
        }
      }
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Box || !is(cons(c1, 0), CellKind::Coarsen)) continue;
        int c2 = cons(c1, 0).cell;
        const auto& f = sys_.require_functor(cell(c2).functor);
        std::size_t idx = 0;
        for (const auto& fac : facts(cell(c1).box)) {
          if (fac.post.slices.empty()) continue;
          for (const auto& s : pre_of(f, fac.post)) {
            if (s.cod != cell(c2).a) continue;
            auto m = mk("F2", Orientation::Bwd);
            m.param = f.name;
            m.index = idx++;
            emit(m, {c1, c2}, {in(c1, 0)}, {cons(c2, 0)},
                 seq(seq(box_diagram(fac.pre), one(make_coarsen(sys_, f.name, s.dom))), box_diagram(s)));
          }
        }
      }
    }
  }

  void f3() {
    if (wants("F3", Orientation::Fwd, false)) {
      for (int c3 = 0; c3 < n(); ++c3) {
        if (cell(c3).kind != CellKind::Pants) continue;
        const auto& l = cell(c3).layer;
        Port p0 = in(c3, 0), p1 = in(c3, 1);
        bool b0 = is(p0, CellKind::Box), b1 = is(p1, CellKind::Box);
        auto go = [&](const char* variant, bool use0, bool use1) {
          InternalDiagram s = use0 ? cell(p0.cell).box : internal_identity(l, cell(c3).a);
          InternalDiagram t = use1 ? cell(p1.cell).box : internal_identity(l, cell(c3).b);
          std::set<int> rm{c3};
          if (use0) rm.insert(p0.cell);
          if (use1) rm.insert(p1.cell);
          auto m = mk("F3", Orientation::Fwd);
          m.variant = variant;
          emit(m, rm, {use0 ? in(p0.cell, 0) : p0, use1 ? in(p1.cell, 0) : p1}, {cons(c3, 0)},
               seq(one(make_pants(l, s.dom, t.dom)), box_diagram(internal_tensor(sys_, s, t))));
        };
        if (b0 && b1) go("both", true, true);
        if (b0) go("left", true, false);
        if (b1) go("right", false, true);
      }
    }
    if (wants("F3", Orientation::Bwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Pants || !is(cons(c1, 0), CellKind::Box)) continue;
        int c2 = cons(c1, 0).cell;
        const auto& l = cell(c1).layer;
        std::size_t idx = 0;
        for (const auto& fac : facts(cell(c2).box)) {
          if (fac.pre.slices.empty()) continue;
          for (const auto& [s, t] : tensor_splits(sys_, fac.pre, cell(c1).a.size())) {
            auto m = mk("F3", Orientation::Bwd);
            m.index = idx++;
            emit(m, {c1, c2}, {in(c1, 0), in(c1, 1)}, {cons(c2, 0)},
                 seq(seq(par(box_diagram(s), box_diagram(t)), one(make_pants(l, s.cod, t.cod))),
                     box_diagram(fac.post)));
          }
        }
      }
    }
  }

  void f4() {
    if (wants("F4", Orientation::Fwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Copants) continue;
        const auto& l = cell(c1).layer;
        Port q0 = cons(c1, 0), q1 = cons(c1, 1);
        bool b0 = is(q0, CellKind::Box), b1 = is(q1, CellKind::Box);
        auto go = [&](const char* variant, bool use0, bool use1) {
          InternalDiagram s = use0 ? cell(q0.cell).box : internal_identity(l, cell(c1).a);
          InternalDiagram t = use1 ? cell(q1.cell).box : internal_identity(l, cell(c1).b);
          std::set<int> rm{c1};
          if (use0) rm.insert(q0.cell);
          if (use1) rm.insert(q1.cell);
          auto m = mk("F4", Orientation::Fwd);
          m.variant = variant;
          emit(m, rm, {in(c1, 0)}, {use0 ? cons(q0.cell, 0) : q0, use1 ? cons(q1.cell, 0) : q1},
               seq(box_diagram(internal_tensor(sys_, s, t)), one(make_copants(l, s.cod, t.cod))));
        };
        if (b0 && b1) go("both", true, true);
        if (b0) go("left", true, false);
        if (b1) go("right", false, true);
      }
    }
    if (wants("F4", Orientation::Bwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Box || !is(cons(c1, 0), CellKind::Copants)) continue;
        int c2 = cons(c1, 0).cell;
        const auto& l = cell(c2).layer;
        std::size_t idx = 0;
        for (const auto& fac : facts(cell(c1).box)) {
          if (fac.post.slices.empty()) continue;
          // the dom seam is not determined by the cod seam when nullary
          // generators sit at it
          for (std::size_t at = 0; at <= fac.post.dom.size(); ++at)
            for (const auto& [s, t] : tensor_splits(sys_, fac.post, at)) {
              if (s.cod.size() != cell(c2).a.size()) continue;
              auto m = mk("F4", Orientation::Bwd);
              m.index = idx++;
              emit(m, {c1, c2}, {in(c1, 0)}, {cons(c2, 0), cons(c2, 1)},
                   seq(box_diagram(fac.pre),
                       seq(one(make_copants(l, s.dom, t.dom)), par(box_diagram(s), box_diagram(t)))));
            }
        }
      }
    }
  }

  // ------------------------------------------------------------ M family

  void m1() {
    for (Orientation o : {Orientation::Fwd, Orientation::Bwd}) {
      if (!wants("M1", o, false)) continue;
      const int side = o == Orientation::Fwd ? 0 : 1;
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Pants || !is(in(c2, side), CellKind::Pants)) continue;
        int c1 = in(c2, side).cell;
        const auto& l = cell(c2).layer;
        if (o == Orientation::Fwd) {
          const Word &a = cell(c1).a, &b = cell(c1).b, &c = cell(c2).b;
          emit(mk("M1", o), {c1, c2}, {in(c1, 0), in(c1, 1), in(c2, 1)}, {cons(c2, 0)},
               seq(par(id1(l, a), one(make_pants(l, b, c))), one(make_pants(l, a, cat(b, c)))));
        } else {
          const Word &a = cell(c2).a, &b = cell(c1).a, &c = cell(c1).b;
          emit(mk("M1", o), {c1, c2}, {in(c2, 0), in(c1, 0), in(c1, 1)}, {cons(c2, 0)},
               seq(par(one(make_pants(l, a, b)), id1(l, c)), one(make_pants(l, cat(a, b), c))));
        }
      }
    }
  }

  void m2() {
    for (Orientation o : {Orientation::Fwd, Orientation::Bwd}) {
      if (!wants("M2", o, false)) continue;
      const int side = o == Orientation::Fwd ? 0 : 1;
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Copants || !is(cons(c1, side), CellKind::Copants)) continue;
        int c2 = cons(c1, side).cell;
        const auto& l = cell(c1).layer;
        if (o == Orientation::Fwd) {
          const Word &a = cell(c2).a, &b = cell(c2).b, &c = cell(c1).b;
          emit(mk("M2", o), {c1, c2}, {in(c1, 0)}, {cons(c2, 0), cons(c2, 1), cons(c1, 1)},
               seq(one(make_copants(l, a, cat(b, c))), par(id1(l, a), one(make_copants(l, b, c)))));
        } else {
          const Word &a = cell(c1).a, &b = cell(c2).a, &c = cell(c2).b;
          emit(mk("M2", o), {c1, c2}, {in(c1, 0)}, {cons(c1, 0), cons(c2, 0), cons(c2, 1)},
               seq(one(make_copants(l, cat(a, b), c)), par(one(make_copants(l, a, b)), id1(l, c))));
        }
      }
    }
  }

  void m3() {
    if (wants("M3", Orientation::Fwd, false)) {
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Pants) continue;
        for (int side : {0, 1}) {
          const Word& unit = side == 0 ? cell(c2).a : cell(c2).b;
          if (!unit.empty() || !is(in(c2, side), CellKind::Cup)) continue;
          auto m = mk("M3", Orientation::Fwd);
          m.variant = side == 0 ? "L" : "R";
          emit(m, {in(c2, side).cell, c2}, {in(c2, 1 - side)}, {cons(c2, 0)},
               id1(cell(c2).layer, side == 0 ? cell(c2).b : cell(c2).a));
        }
      }
    }
    if (wants("M3", Orientation::Bwd, true)) {
      for (const auto& w : wires_) {
        const auto& l = w.type.layer;
        for (int side : {0, 1}) {
          auto m = mk("M3", Orientation::Bwd, true);
          m.variant = side == 0 ? "L" : "R";
          Diagram rep = side == 0 ? seq(par(one(make_cup(l)), id1(l, w.type.word)), one(make_pants(l, {}, w.type.word)))
                                  : seq(par(id1(l, w.type.word), one(make_cup(l))), one(make_pants(l, w.type.word, {})));
          insert_on(w, m, rep);
        }
      }
    }
  }

  void m4() {
    if (wants("M4", Orientation::Fwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Copants) continue;
        for (int side : {0, 1}) {
          const Word& unit = side == 0 ? cell(c1).a : cell(c1).b;
          if (!unit.empty() || !is(cons(c1, side), CellKind::Cap)) continue;
          auto m = mk("M4", Orientation::Fwd);
          m.variant = side == 0 ? "L" : "R";
          emit(m, {c1, cons(c1, side).cell}, {in(c1, 0)}, {cons(c1, 1 - side)},
               id1(cell(c1).layer, side == 0 ? cell(c1).b : cell(c1).a));
        }
      }
    }
    if (wants("M4", Orientation::Bwd, true)) {
      for (const auto& w : wires_) {
        const auto& l = w.type.layer;
        for (int side : {0, 1}) {
          auto m = mk("M4", Orientation::Bwd, true);
          m.variant = side == 0 ? "L" : "R";
          Diagram rep = side == 0 ? seq(one(make_copants(l, {}, w.type.word)), par(one(make_cap(l)), id1(l, w.type.word)))
                                  : seq(one(make_copants(l, w.type.word, {})), par(id1(l, w.type.word), one(make_cap(l))));
          insert_on(w, m, rep);
        }
      }
    }
  }

  void m5() {
    if (wants("M5", Orientation::Fwd, false)) {
      for (int c3 = 0; c3 < n(); ++c3) {
        if (cell(c3).kind != CellKind::Pants) continue;
        Port p0 = in(c3, 0), p1 = in(c3, 1);
        if (!is(p0, CellKind::Refine) || !is(p1, CellKind::Refine)) continue;
        const auto &r0 = cell(p0.cell), &r1 = cell(p1.cell);
        if (r0.functor != r1.functor) continue;
        auto m = mk("M5", Orientation::Fwd);
        m.variant = "P";
        m.param = r0.functor;
        emit(m, {p0.cell, p1.cell, c3}, {in(p0.cell, 0), in(p1.cell, 0)}, {cons(c3, 0)},
             seq(one(make_pants(r0.layer, r0.a, r1.a)), one(make_refine(sys_, r0.functor, cat(r0.a, r1.a)))));
      }
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Refine || !cell(c2).a.empty() || !is(in(c2, 0), CellKind::Cup)) continue;
        auto m = mk("M5", Orientation::Fwd);
        m.variant = "C";
        m.param = cell(c2).functor;
        emit(m, {in(c2, 0).cell, c2}, {}, {cons(c2, 0)}, one(make_cup(cell(c2).outs[0].layer)));
      }
    }
    if (wants("M5", Orientation::Bwd, false)) {
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Refine || !is(in(c2, 0), CellKind::Pants)) continue;
        int c1 = in(c2, 0).cell;
        const auto& f = sys_.require_functor(cell(c2).functor);
        const Word &a = cell(c1).a, &b = cell(c1).b;
        auto m = mk("M5", Orientation::Bwd);
        m.variant = "P";
        m.param = f.name;
        emit(m, {c1, c2}, {in(c1, 0), in(c1, 1)}, {cons(c2, 0)},
             seq(par(one(make_refine(sys_, f.name, a)), one(make_refine(sys_, f.name, b))),
                 one(make_pants(f.target, translate_word(f, a), translate_word(f, b)))));
      }
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Cup) continue;
        for (const auto* f : sys_.functors_into(cell(c1).layer)) {
          auto m = mk("M5", Orientation::Bwd);
          m.variant = "C";
          m.param = f->name;
          emit(m, {c1}, {}, {cons(c1, 0)}, seq(one(make_cup(f->source)), one(make_refine(sys_, f->name, {}))));
        }
      }
    }
  }

  void m6() {
    if (wants("M6", Orientation::Fwd, false)) {
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Copants) continue;
        Port q0 = cons(c1, 0), q1 = cons(c1, 1);
        if (!is(q0, CellKind::Coarsen) || !is(q1, CellKind::Coarsen)) continue;
        const auto &k0 = cell(q0.cell), &k1 = cell(q1.cell);
        if (k0.functor != k1.functor) continue;
        auto m = mk("M6", Orientation::Fwd);
        m.variant = "P";
        m.param = k0.functor;
        emit(m, {c1, q0.cell, q1.cell}, {in(c1, 0)}, {cons(q0.cell, 0), cons(q1.cell, 0)},
             seq(one(make_coarsen(sys_, k0.functor, cat(k0.a, k1.a))), one(make_copants(k0.layer, k0.a, k1.a))));
      }
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Cap || !is(in(c2, 0), CellKind::Coarsen)) continue;
        int c1 = in(c2, 0).cell;
        if (!cell(c1).a.empty()) continue;
        auto m = mk("M6", Orientation::Fwd);
        m.variant = "C";
        m.param = cell(c1).functor;
        emit(m, {c1, c2}, {in(c1, 0)}, {}, one(make_cap(cell(c1).ins[0].layer)));
      }
    }
    if (wants("M6", Orientation::Bwd, false)) {
      for (int c2 = 0; c2 < n(); ++c2) {
        if (cell(c2).kind != CellKind::Copants || !is(in(c2, 0), CellKind::Coarsen)) continue;
        int c1 = in(c2, 0).cell;
        const auto& f = sys_.require_functor(cell(c1).functor);
        const Word &a = cell(c2).a, &b = cell(c2).b;
        auto m = mk("M6", Orientation::Bwd);
        m.variant = "P";
        m.param = f.name;
        emit(m, {c1, c2}, {in(c1, 0)}, {cons(c2, 0), cons(c2, 1)},
             seq(one(make_copants(f.target, translate_word(f, a), translate_word(f, b))),
                 par(one(make_coarsen(sys_, f.name, a)), one(make_coarsen(sys_, f.name, b)))));
      }
      for (int c1 = 0; c1 < n(); ++c1) {
        if (cell(c1).kind != CellKind::Cap) continue;
        for (const auto* f : sys_.functors_into(cell(c1).layer)) {
          auto m = mk("M6", Orientation::Bwd);
          m.variant = "C";
          m.param = f->name;
          emit(m, {c1}, {in(c1, 0)}, {}, seq(one(make_coarsen(sys_, f->name, {})), one(make_cap(f->source))));
        }
      }
    }
  }

  // ------------------------------------------------------------ window collapse

  void x() {
    if (opts_.faithful_functors.empty()) return;
    if (wants("X", Orientation::Fwd, false)) collapse_refine_coarsen("X", Orientation::Fwd, true);
    if (wants("X", Orientation::Bwd, true)) {
      for (const auto& w : wires_) {
        for (const auto* f : sys_.functors_from(w.type.layer)) {
          if (!opts_.faithful_functors.count(f->name)) continue;
          auto m = mk("X", Orientation::Bwd, true);
          m.param = f->name;
          insert_on(w, m, seq(one(make_refine(sys_, f->name, w.type.word)), one(make_coarsen(sys_, f->name, w.type.word))));
        }
      }
    }
  }
};

}  // namespace

Expansion expand(const SystemOfLayers& sys, const Diagram& d, const RuleOptions& opts, MoveSet moves,
                 const std::optional<RuleFilter>& filter) {
  const auto cf = canonicalize(sys, d);
  return Expander(sys, cf.diagram, opts, moves, filter).run();
}

Diagram apply_rule(const SystemOfLayers& sys, const Diagram& d, const Match& m, const RuleOptions& opts) {
  RuleOptions o = opts;
  o.include_insertions = true;
  o.only.clear();
  auto ex = expand(sys, d, o, MoveSet::All, RuleFilter{m.rule, m.orientation});
  for (auto& s : ex.steps)
    if (s.match == m) return std::move(s.result);
  throw Error(ErrorCode::StaleMatch, "no instance " + match_to_string(m));
}

// ---------------------------------------------------------------- search

namespace {

struct Visit {
  Diagram diagram;
  std::string parent;  // empty for the root
  Match via;
};

}  // namespace

SearchResult find_derivation(const SystemOfLayers& sys, const Diagram& src, const Diagram& dst,
                             const SearchOptions& opts) {
  if (src.in != dst.in || src.out != dst.out) {
    throw Error(ErrorCode::SortMismatch, "derivation endpoints are not parallel");
  }
  SearchResult res;
  auto s = canonicalize(sys, src);
  auto t = canonicalize(sys, dst);
  if (s.key == t.key) {
    res.status = SearchStatus::Found;
    res.derivation = Derivation{s.diagram, {}};
    res.states = 1;
    return res;
  }
  std::unordered_map<std::string, Visit> fwd, bwd;
  fwd.emplace(s.key, Visit{s.diagram, "", {}});
  bwd.emplace(t.key, Visit{t.diagram, "", {}});
  std::vector<std::string> ffront{s.key}, bfront{t.key};
  std::size_t depth = 0;
  bool incomplete = false;
  std::string meet;

  while (meet.empty() && depth < opts.budget && !ffront.empty() && !bfront.empty()) {
    const bool forward = ffront.size() <= bfront.size();
    auto& mine = forward ? fwd : bwd;
    auto& other = forward ? bwd : fwd;
    auto& front = forward ? ffront : bfront;
    std::vector<std::string> next;
    for (const auto& key : front) {
      const Diagram here = mine.at(key).diagram;
      auto ex = expand(sys, here, opts.rules, forward ? MoveSet::Forward : MoveSet::Predecessor);
      if (!ex.complete) incomplete = true;
      for (auto& step : ex.steps) {
        if (mine.count(step.key)) continue;
        mine.emplace(step.key, Visit{std::move(step.result), key, step.match});
        next.push_back(step.key);
        if (other.count(step.key)) {
          meet = step.key;
          break;
        }
      }
      if (!meet.empty()) break;
      if (fwd.size() + bwd.size() > opts.max_states) break;
    }
    if (fwd.size() + bwd.size() > opts.max_states && meet.empty()) {
      res.states = fwd.size() + bwd.size();
      res.status = SearchStatus::BudgetExhausted;
      return res;
    }
    front = std::move(next);
    ++depth;
  }
  res.states = fwd.size() + bwd.size();
  if (meet.empty()) {
    const bool space_exhausted = ffront.empty() || bfront.empty();
    res.status = space_exhausted && !incomplete ? SearchStatus::NotFound : SearchStatus::BudgetExhausted;
    return res;
  }

  Derivation dv;
  dv.start = s.diagram;
  std::vector<Match> head;
  for (std::string k = meet; !fwd.at(k).parent.empty(); k = fwd.at(k).parent) head.push_back(fwd.at(k).via);
  std::reverse(head.begin(), head.end());
  dv.steps = head;
  // The backward half was built from inverse moves; re-match each link in
  // its generating direction.
  for (std::string k = meet; !bwd.at(k).parent.empty(); k = bwd.at(k).parent) {
    const auto& v = bwd.at(k);
    const std::string& child = v.parent;
    auto ex = expand(sys, v.diagram, opts.rules, MoveSet::Forward, RuleFilter{v.via.rule, std::nullopt});
    const Match* found = nullptr;
    for (const auto& step : ex.steps) {
      if (step.key != child) continue;
      if (!found || step.match.orientation != v.via.orientation) found = &step.match;
      if (step.match.orientation != v.via.orientation) break;
    }
    if (!found) throw Error(ErrorCode::InvalidDerivation, "could not re-match " + match_to_string(v.via));
    dv.steps.push_back(*found);
  }
  res.status = SearchStatus::Found;
  res.derivation = std::move(dv);
  return res;
}

std::optional<Diagram> replay_derivation(const SystemOfLayers& sys, const Derivation& dv, const RuleOptions& opts) {
  Diagram cur;
  try {
    cur = canonicalize(sys, dv.start).diagram;
  } catch (const Error&) {
    return std::nullopt;
  }
  RuleOptions o = opts;
  o.include_insertions = true;
  o.only.clear();
  for (const auto& m : dv.steps) {
    if (!is_valid_direction(m.rule, m.orientation)) return std::nullopt;
    auto ex = expand(sys, cur, o, MoveSet::Forward, RuleFilter{m.rule, m.orientation});
    bool ok = false;
    for (auto& s : ex.steps) {
      if (s.match == m) {
        if (s.result.in != cur.in || s.result.out != cur.out) return std::nullopt;
        cur = std::move(s.result);
        ok = true;
        break;
      }
    }
    if (!ok) return std::nullopt;
  }
  return cur;
}

bool verify_derivation(const SystemOfLayers& sys, const Derivation& dv, const RuleOptions& opts) {
  return replay_derivation(sys, dv, opts).has_value();
}

bool is_isolated(const SystemOfLayers& sys, const Diagram& d, const RuleOptions& opts) {
  RuleOptions o = opts;
  const auto cf = canonicalize(sys, d);
  if (!cf.diagram.cells.empty()) o.include_insertions = false;
  auto ex = expand(sys, cf.diagram, o, MoveSet::All);
  return ex.complete && ex.steps.empty();
}

LayerEqResult layer_eq(const SystemOfLayers& sys, const Diagram& x, const Diagram& y, std::size_t budget) {
  if (x.in != y.in || x.out != y.out) throw Error(ErrorCode::SortMismatch, "layer_eq on non-parallel diagrams");
  SearchOptions so;
  so.budget = budget;
  so.rules.only = {"E"};
  so.rules.include_insertions = false;
  auto r = find_derivation(sys, x, y, so);
  LayerEqResult out;
  if (r.status == SearchStatus::Found) {
    out.status = LayerEqStatus::Equal;
    out.witness = r.derivation;
    return out;
  }
  std::set<std::string> touched;
  for (const auto* d : {&x, &y})
    for (const auto& c : d->cells)
      if (c.kind == CellKind::Box) touched.insert(c.layer);
  bool any_equations = false;
  for (const auto& l : touched)
    if (!sys.require_layer(l).equations.empty()) any_equations = true;
  out.status = (!any_equations || r.status == SearchStatus::NotFound) ? LayerEqStatus::Distinct : LayerEqStatus::Unknown;
  return out;
}

ValidationReport check_equation_preservation(const SystemOfLayers& sys, std::size_t budget) {
  ValidationReport rep;
  for (const auto& f : sys.functors) {
    for (const auto& eq : sys.require_layer(f.source).equations) {
      auto l = box_diagram(translate_internal(sys, f, eq.lhs));
      auto r = box_diagram(translate_internal(sys, f, eq.rhs));
      auto res = layer_eq(sys, l, r, budget);
      if (res.status != LayerEqStatus::Equal) {
        rep.add("equation-preservation", f.name + "/" + eq.name,
                res.status == LayerEqStatus::Distinct ? "translated sides are distinct" : "not confirmed within budget");
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------- instances

RuleInstance make_instance(const SystemOfLayers& sys, const InstanceSpec& s) {
  using T = Term;
  auto need = [&](const auto& opt, const char* what) -> const InternalDiagram& {
    if (!opt) throw Error(ErrorCode::MalformedInput, std::string("instance needs ") + what);
    return *opt;
  };
  auto sq = [](T x, T y) { return T::seq({std::move(x), std::move(y)}); };
  auto pr = [](T x, T y) { return T::par({std::move(x), std::move(y)}); };
  const std::string& l = s.layer;
  const std::string& r = s.rule;
  T lhs, rhs;
  if (r == "F1" || r == "F2") {
    const auto& f = sys.require_functor(s.functor);
    const auto& sg = need(s.sigma, "sigma");
    T fs = T::boxed(translate_internal(sys, f, sg));
    if (r == "F1") {
      lhs = sq(T::boxed(sg), T::refine(f.name, sg.cod));
      rhs = sq(T::refine(f.name, sg.dom), fs);
    } else {
      lhs = sq(T::coarsen(f.name, sg.dom), T::boxed(sg));
      rhs = sq(fs, T::coarsen(f.name, sg.cod));
    }
  } else if (r == "F3" || r == "F4") {
    const auto& sg = need(s.sigma, "sigma");
    const auto& tu = need(s.tau, "tau");
    const std::string& ly = sg.layer;
    T both = T::boxed(internal_tensor(sys, sg, tu));
    if (r == "F3") {
      lhs = sq(pr(T::boxed(sg), T::boxed(tu)), T::pants(ly, sg.cod, tu.cod));
      rhs = sq(T::pants(ly, sg.dom, tu.dom), both);
    } else {
      lhs = sq(T::copants(ly, sg.dom, tu.dom), pr(T::boxed(sg), T::boxed(tu)));
      rhs = sq(both, T::copants(ly, sg.cod, tu.cod));
    }
  } else if (r == "A1") {
    lhs = pr(T::id(l, s.a), T::id(l, s.b));
    rhs = sq(T::pants(l, s.a, s.b), T::copants(l, s.a, s.b));
  } else if (r == "A2") {
    lhs = sq(T::copants(l, s.a, s.b), T::pants(l, s.a, s.b));
    rhs = T::id(l, cat(s.a, s.b));
  } else if (r == "A3" || r == "X") {
    const auto& f = sys.require_functor(s.functor);
    lhs = T::id(f.source, s.a);
    rhs = sq(T::refine(f.name, s.a), T::coarsen(f.name, s.a));
    if (r == "X") std::swap(lhs, rhs);
  } else if (r == "A4") {
    const auto& f = sys.require_functor(s.functor);
    lhs = sq(T::coarsen(f.name, s.a), T::refine(f.name, s.a));
    rhs = T::id(f.target, translate_word(f, s.a));
  } else if (r == "A5") {
    lhs = T::empty();
    rhs = sq(T::cup(l), T::cap(l));
  } else if (r == "A6") {
    lhs = sq(T::cap(l), T::cup(l));
    rhs = T::id(l, {});
  } else if (r == "M1") {
    lhs = sq(pr(T::pants(l, s.a, s.b), T::id(l, s.c)), T::pants(l, cat(s.a, s.b), s.c));
    rhs = sq(pr(T::id(l, s.a), T::pants(l, s.b, s.c)), T::pants(l, s.a, cat(s.b, s.c)));
  } else if (r == "M2") {
    lhs = sq(T::copants(l, cat(s.a, s.b), s.c), pr(T::copants(l, s.a, s.b), T::id(l, s.c)));
    rhs = sq(T::copants(l, s.a, cat(s.b, s.c)), pr(T::id(l, s.a), T::copants(l, s.b, s.c)));
  } else if (r == "M3") {
    lhs = s.variant == "R" ? sq(pr(T::id(l, s.a), T::cup(l)), T::pants(l, s.a, {}))
                           : sq(pr(T::cup(l), T::id(l, s.a)), T::pants(l, {}, s.a));
    rhs = T::id(l, s.a);
  } else if (r == "M4") {
    lhs = s.variant == "R" ? sq(T::copants(l, s.a, {}), pr(T::id(l, s.a), T::cap(l)))
                           : sq(T::copants(l, {}, s.a), pr(T::cap(l), T::id(l, s.a)));
    rhs = T::id(l, s.a);
  } else if (r == "M5" || r == "M6") {
    const auto& f = sys.require_functor(s.functor);
    Word fa = translate_word(f, s.a), fb = translate_word(f, s.b);
    if (s.variant == "C") {
      if (r == "M5") {
        lhs = sq(T::cup(f.source), T::refine(f.name, {}));
        rhs = T::cup(f.target);
      } else {
        lhs = sq(T::coarsen(f.name, {}), T::cap(f.source));
        rhs = T::cap(f.target);
      }
    } else if (r == "M5") {
      lhs = sq(pr(T::refine(f.name, s.a), T::refine(f.name, s.b)), T::pants(f.target, fa, fb));
      rhs = sq(T::pants(f.source, s.a, s.b), T::refine(f.name, cat(s.a, s.b)));
    } else {
      lhs = sq(T::copants(f.target, fa, fb), pr(T::coarsen(f.name, s.a), T::coarsen(f.name, s.b)));
      rhs = sq(T::coarsen(f.name, cat(s.a, s.b)), T::copants(f.source, s.a, s.b));
    }
  } else if (r == "E") {
    const auto& layer = sys.require_layer(l);
    const Equation* eq = nullptr;
    for (const auto& e : layer.equations)
      if (e.name == s.equation) eq = &e;
    if (!eq) throw Error(ErrorCode::UnknownGenerator, "equation '" + s.equation + "' in " + l);
    lhs = T::boxed(eq->lhs);
    rhs = T::boxed(eq->rhs);
  } else {
    throw Error(ErrorCode::MalformedInput, "unknown rule '" + r + "'");
  }
  RuleInstance ri;
  ri.rule = s.rule;
  ri.variant = s.variant;
  ri.lhs = compile(sys, lhs);
  ri.rhs = compile(sys, rhs);
  ri.lhs_term = std::move(lhs);
  ri.rhs_term = std::move(rhs);
  return ri;
}

std::vector<RuleFamily> instantiate_rules(const SystemOfLayers& sys, const RuleOptions& opts) {
  std::vector<RuleFamily> out;
  std::vector<std::string> layers;
  for (const auto& l : sys.layers) layers.push_back(l.id);
  std::sort(layers.begin(), layers.end());
  std::vector<std::string> functors;
  for (const auto& f : sys.functors) functors.push_back(f.name);
  std::sort(functors.begin(), functors.end());
  auto per_layer = [&](const std::string& r, const std::string& v = "") {
    for (const auto& l : layers) out.push_back({r, v, l, is_bidirectional(r)});
  };
  auto per_functor = [&](const std::string& r, const std::string& v = "") {
    for (const auto& f : functors) out.push_back({r, v, f, is_bidirectional(r)});
  };
  per_layer("A1");
  per_layer("A2");
  per_functor("A3");
  per_functor("A4");
  per_layer("A5");
  per_layer("A6");
  for (const auto& l : layers)
    for (const auto& eq : sys.require_layer(l).equations) out.push_back({"E", "", l + "/" + eq.name, true});
  per_functor("F1");
  per_functor("F2");
  per_layer("F3");
  per_layer("F4");
  per_layer("M1");
  per_layer("M2");
  per_layer("M3", "L");
  per_layer("M3", "R");
  per_layer("M4", "L");
  per_layer("M4", "R");
  per_functor("M5", "P");
  per_functor("M5", "C");
  per_functor("M6", "P");
  per_functor("M6", "C");
  for (const auto& f : functors)
    if (opts.faithful_functors.count(f)) out.push_back({"X", "", f, false});
  return out;
}

}  // namespace layerprop
