#include "layerprop/ccs.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <optional>
#include <set>

#include "layerprop/error.hpp"
#include "layerprop/internal.hpp"

namespace layerprop::ccs {

bool is_silent(const Action& a) { return a == kTau; }

Action complement(const Action& a) {
  if (is_silent(a)) throw Error(ErrorCode::MalformedInput, "tau has no complement");
  if (!a.empty() && a.back() == '\'') return a.substr(0, a.size() - 1);
  return a + "'";
}

Process Process::nil() { return Process(); }

Process Process::prefix(Action a, Process body) {
  Process p;
  p.kind_ = Kind::Prefix;
  p.action_ = std::move(a);
  p.left_ = std::make_shared<const Process>(std::move(body));
  return p;
}

Process Process::par(Process l, Process r) {
  Process p;
  p.kind_ = Kind::Par;
  p.left_ = std::make_shared<const Process>(std::move(l));
  p.right_ = std::make_shared<const Process>(std::move(r));
  return p;
}

int Process::size() const {
  switch (kind_) {
    case Kind::Nil: return 0;
    case Kind::Prefix: return 1 + body().size();
    case Kind::Par: return left().size() + right().size();
  }
  return 0;
}

bool Process::operator==(const Process& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::Nil: return true;
    case Kind::Prefix: return action_ == o.action_ && body() == o.body();
    case Kind::Par: return left() == o.left() && right() == o.right();
  }
  return false;
}

std::string Process::to_string() const {
  switch (kind_) {
    case Kind::Nil: return "0";
    case Kind::Prefix: return action_ + "." + body().to_string();
    case Kind::Par: return "(" + left().to_string() + "|" + right().to_string() + ")";
  }
  return "?";
}

namespace {

class ProcessParser {
 public:
  explicit ProcessParser(const std::string& s) : s_(s) {}

  Process top() {
    Process p = par();
    skip();
    if (i_ != s_.size()) fail("trailing input");
    return p;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedInput, "process: " + what + " at offset " + std::to_string(i_));
  }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  Process par() {
    Process l = unary();
    if (eat('|')) return Process::par(std::move(l), par());
    return l;
  }

  Process unary() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end");
    const char c = s_[i_];
    if (c == '(' || c == '{') {
      ++i_;
      Process p = par();
      if (!eat(c == '(' ? ')' : '}')) fail("unclosed bracket");
      return p;
    }
    if (c == '0') {
      ++i_;
      return Process::nil();
    }
    const std::size_t start = i_;
    if (std::isdigit(static_cast<unsigned char>(c))) fail("names start with a letter");
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    if (i_ == start) fail("expected a process");
    if (i_ < s_.size() && s_[i_] == '\'') ++i_;
    Action a = s_.substr(start, i_ - start);
    if (a == "tau'") fail("tau has no complement");
    if (!eat('.')) fail("expected '.' after action " + a);
    return Process::prefix(std::move(a), unary());
  }
};

void collect(const Process& p, std::vector<Process>& out) {
  if (p.kind() == Process::Kind::Par) {
    collect(p.left(), out);
    collect(p.right(), out);
  } else {
    out.push_back(p);
  }
}

// Replaces the components at the given positions, keeping the bracketing.
Process replace_components(const Process& p, const std::map<int, Process>& with, int& next) {
  if (p.kind() != Process::Kind::Par) {
    auto it = with.find(next++);
    return it == with.end() ? p : it->second;
  }
  Process l = replace_components(p.left(), with, next);
  Process r = replace_components(p.right(), with, next);
  return Process::par(std::move(l), std::move(r));
}

bool complementary(const Action& a, const Action& b) { return !is_silent(a) && !is_silent(b) && complement(a) == b; }

}  // namespace

Process parse_process(const std::string& text) { return ProcessParser(text).top(); }

std::vector<Process> components(const Process& p) {
  std::vector<Process> out;
  collect(p, out);
  return out;
}

std::string normal_form(const Process& p) {
  std::vector<std::string> parts;
  for (const auto& c : components(p))
    if (c.kind() != Process::Kind::Nil) parts.push_back(c.to_string());
  std::sort(parts.begin(), parts.end());
  std::string out = "{";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out + "}";
}

bool congruent(const Process& p, const Process& q) { return normal_form(p) == normal_form(q); }

std::vector<Process> reductions(const Process& p) {
  const auto comps = components(p);
  std::vector<Process> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      const Process& a = comps[i];
      const Process& b = comps[j];
      if (a.kind() != Process::Kind::Prefix || b.kind() != Process::Kind::Prefix) continue;
      if (!complementary(a.action(), b.action())) continue;
      int next = 0;
      Process r = replace_components(p, {{static_cast<int>(i), a.body()}, {static_cast<int>(j), b.body()}}, next);
      if (seen.insert(normal_form(r)).second) out.push_back(std::move(r));
    }
  return out;
}

std::vector<Transition> lts_transitions(const Process& p) {
  std::vector<Transition> out;
  switch (p.kind()) {
    case Process::Kind::Nil: break;
    case Process::Kind::Prefix: out.push_back({p.action(), p.body()}); break;
    case Process::Kind::Par: {
      const auto left = lts_transitions(p.left());
      const auto right = lts_transitions(p.right());
      for (const auto& t : left) out.push_back({t.label, Process::par(t.target, p.right())});
      for (const auto& t : right) out.push_back({t.label, Process::par(p.left(), t.target)});
      for (const auto& l : left)
        for (const auto& r : right)
          if (complementary(l.label, r.label)) out.push_back({kTau, Process::par(l.target, r.target)});
      break;
    }
  }
  std::vector<Transition> unique;
  for (auto& t : out)
    if (std::none_of(unique.begin(), unique.end(),
                     [&](const Transition& u) { return u.label == t.label && u.target == t.target; }))
      unique.push_back(std::move(t));
  return unique;
}

LtsGraph reachable_lts(const Process& p) {
  LtsGraph g;
  std::map<std::string, int> index;
  std::deque<int> work;
  auto visit = [&](const Process& q) {
    const std::string key = normal_form(q);
    auto [it, fresh] = index.emplace(key, static_cast<int>(g.states.size()));
    if (fresh) {
      g.states.push_back(q);
      work.push_back(it->second);
    }
    return it->second;
  };
  visit(p);
  while (!work.empty()) {
    const int s = work.front();
    work.pop_front();
    std::set<std::pair<std::string, int>> done;
    for (const auto& t : lts_transitions(g.states[s])) {
      const int to = visit(t.target);
      if (done.insert({t.label, to}).second) g.edges.push_back({s, t.label, to});
    }
  }
  return g;
}

std::string lts_to_dot(const LtsGraph& g) {
  std::string out = "digraph lts {\n";
  for (std::size_t s = 0; s < g.states.size(); ++s)
    out += "  s" + std::to_string(s) + " [label=\"" + g.states[s].to_string() + "\"];\n";
  for (const auto& e : g.edges)
    out += "  s" + std::to_string(e.from) + " -> s" + std::to_string(e.to) + " [label=\"" +
           (is_silent(e.label) ? std::string("&tau;") : e.label) + "\"];\n";
  return out + "}\n";
}

bool bisimilar(const Process& p, const Process& q) {
  // Union of both graphs, keyed by congruence class.
  std::map<std::string, int> index;
  std::vector<Process> states;
  std::vector<std::vector<std::pair<Action, int>>> succ;
  std::deque<int> work;
  auto visit = [&](const Process& r) {
    auto [it, fresh] = index.emplace(normal_form(r), static_cast<int>(states.size()));
    if (fresh) {
      states.push_back(r);
      succ.emplace_back();
      work.push_back(it->second);
    }
    return it->second;
  };
  const int sp = visit(p), sq = visit(q);
  while (!work.empty()) {
    const int s = work.front();
    work.pop_front();
    for (const auto& t : lts_transitions(states[s])) {
      const int to = visit(t.target);
      succ[s].push_back({t.label, to});
    }
  }
  std::vector<int> block(states.size(), 0);
  std::size_t blocks = 1;
  while (true) {
    using Sig = std::pair<int, std::set<std::pair<Action, int>>>;
    std::vector<Sig> sig(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
      sig[s].first = block[s];
      for (const auto& [a, t] : succ[s]) sig[s].second.insert({a, block[t]});
    }
    std::vector<Sig> sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t s = 0; s < states.size(); ++s)
      block[s] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[s]) - sorted.begin());
    if (sorted.size() == blocks) break;
    blocks = sorted.size();
  }
  return block[sp] == block[sq];
}

// ---------------------------------------------------------------- layers

std::string red_symbol(const Process& p) {
  std::string s = p.to_string();
  for (char& c : s) {
    if (c == '(') c = '{';
    else if (c == ')') c = '}';
  }
  return s;
}

std::string lts_symbol(const Process& p, const Action& pending) {
  return is_silent(pending) ? red_symbol(p) : red_symbol(p) + "^" + pending;
}

Word red_word(const Process& p) {
  Word w;
  for (const auto& c : components(p)) w.push_back(red_symbol(c));
  return w;
}

namespace {

Word lts_word(const Process& p) {
  Word w;
  for (const auto& c : components(p)) w.push_back(lts_symbol(c, kTau));
  return w;
}

struct Builder {
  std::vector<Process> seq;  // sequential processes of the universe, sorted
  LayerPresentation red{kRedLayer}, lts{kLtsLayer};
  TranslationFunctor I{"I", kRedLayer, kLtsLayer, {}, {}};
  std::set<std::string> lts_objects;
  std::map<std::string, std::pair<Process, Action>> lts_state;

  void add_lts_object(const Process& p, const Action& a) {
    const std::string s = lts_symbol(p, a);
    if (lts_objects.insert(s).second) {
      lts.objects.push_back(s);
      lts_state.emplace(s, std::make_pair(p, a));
    }
  }

  void universe(const std::vector<Process>& roots) {
    std::set<std::string> seen;
    std::vector<Process> work(roots);
    while (!work.empty()) {
      Process p = work.back();
      work.pop_back();
      for (const auto& c : components(p)) {
        if (!seen.insert(c.to_string()).second) continue;
        seq.push_back(c);
        if (c.kind() == Process::Kind::Prefix) work.push_back(c.body());
      }
    }
    if (!seen.count("0")) seq.push_back(Process::nil());
    std::sort(seq.begin(), seq.end());
  }

  std::string sync_name(const std::string& l, const Word& ctx, const std::string& r) const {
    std::string c;
    for (std::size_t i = 0; i < ctx.size(); ++i) c += (i ? "," : "") + ctx[i];
    return "sync<" + l + ";" + c + ";" + r + ">";
  }

  void build(const std::vector<Word>& contexts) {
    for (const auto& p : seq) red.objects.push_back(red_symbol(p));
    const std::string zero = red_symbol(Process::nil());
    for (const auto& p : seq) {
      const std::string s = red_symbol(p);
      for (const auto& q : seq)
        if (!(p == q)) red.generators.push_back({"swap<" + s + "," + red_symbol(q) + ">", {s, red_symbol(q)}, {red_symbol(q), s}});
      red.generators.push_back({"lam<" + s + ">", {zero, s}, {s}});
      red.generators.push_back({"lam-<" + s + ">", {s}, {zero, s}});
    }
    for (const auto& p : seq) {
      if (p.kind() != Process::Kind::Prefix || is_silent(p.action()) || p.action().back() == '\'') continue;
      for (const auto& q : seq) {
        if (q.kind() != Process::Kind::Prefix || q.action() != complement(p.action())) continue;
        Word cod = red_word(p.body());
        for (const auto& w : red_word(q.body())) cod.push_back(w);
        red.generators.push_back({"R<" + red_symbol(p) + "," + red_symbol(q) + ">", {red_symbol(p), red_symbol(q)}, cod});
      }
    }

    // LTS objects: every sequential state, the results of firing, and the
    // bracketed bodies that synchronisation leaves behind.
    for (const auto& p : seq) add_lts_object(p, kTau);
    for (const auto& p : seq)
      if (p.kind() == Process::Kind::Prefix) {
        add_lts_object(p.body(), p.action());
        add_lts_object(p.body(), kTau);
      }
    for (const auto& p : seq)
      if (p.kind() == Process::Kind::Prefix) {
        const std::string s = lts_symbol(p, kTau);
        lts.generators.push_back({"fire<" + s + ">", {s}, {lts_symbol(p.body(), p.action())}});
      }
    for (const auto& [x, px] : lts_state) {
      const auto& [p, a] = px;
      if (is_silent(a)) continue;
      for (const auto& [y, qy] : lts_state) {
        const auto& [q, b] = qy;
        if (is_silent(b) || b != complement(a)) continue;
        for (const auto& ctx : contexts) {
          Word dom{x}, cod{lts_symbol(p, kTau)};
          for (const auto& c : ctx) {
            dom.push_back(c);
            cod.push_back(c);
          }
          dom.push_back(y);
          cod.push_back(lts_symbol(q, kTau));
          lts.generators.push_back({sync_name(x, ctx, y), dom, cod});
        }
      }
    }
    for (const auto& [s, st] : lts_state) {
      const auto& [p, a] = st;
      if (p.is_sequential() || !is_silent(a)) continue;
      lts.generators.push_back({"unpack<" + s + ">", {s}, lts_word(p)});
      lts.generators.push_back({"pack<" + s + ">", lts_word(p), {s}});
    }
    const std::string lzero = lts_symbol(Process::nil(), kTau);
    for (const auto& [s, st] : lts_state) {
      for (const auto& [t, tt] : lts_state) {
        if (s == t) continue;
        lts.generators.push_back({"swap<" + s + "," + t + ">", {s, t}, {t, s}});
        if (st.second == tt.second && bisimilar(st.first, tt.first))
          lts.generators.push_back({"bisim<" + s + "," + t + ">", {s}, {t}});
      }
      lts.generators.push_back({"lam<" + s + ">", {lzero, s}, {s}});
      lts.generators.push_back({"lam-<" + s + ">", {s}, {lzero, s}});
    }

    for (const auto& p : seq) I.object_map[red_symbol(p)] = {lts_symbol(p, kTau)};
    for (const auto& g : red.generators) {
      InternalDiagram d{kLtsLayer, {}, {}, {}};
      for (const auto& o : g.dom) d.dom.push_back(I.object_map.at(o).front());
      for (const auto& o : g.cod) d.cod.push_back(I.object_map.at(o).front());
      if (g.name.rfind("R<", 0) == 0) {
        const Process p = parse_process(g.dom[0]);
        const Process q = parse_process(g.dom[1]);
        const std::string pp = lts_symbol(p.body(), p.action());
        const std::string qq = lts_symbol(q.body(), q.action());
        d.slices = {{0, "fire<" + d.dom[0] + ">"}, {1, "fire<" + d.dom[1] + ">"}, {0, sync_name(pp, {}, qq)}};
        if (!p.body().is_sequential()) d.slices.push_back({0, "unpack<" + lts_symbol(p.body(), kTau) + ">"});
        if (!q.body().is_sequential())
          d.slices.push_back({components(p.body()).size(), "unpack<" + lts_symbol(q.body(), kTau) + ">"});
      } else {
        d.slices = {{0, g.name}};
      }
      I.morphism_map[g.name] = std::move(d);
    }
  }
};

// Shortest Red path from `from` to `to` using exactly one reduction.
InternalDiagram derive_rule(const SystemOfLayers& sys, const Word& from, const Word& to) {
  const auto& red = sys.require_layer(kRedLayer);
  const std::size_t cap = std::max(from.size(), to.size()) + 1;
  using State = std::pair<Word, bool>;
  std::map<State, std::pair<State, Slice>> parent;
  std::deque<State> work{{from, false}};
  parent.emplace(State{from, false}, std::make_pair(State{}, Slice{}));
  while (!work.empty()) {
    const State s = work.front();
    work.pop_front();
    if (s.first == to && s.second) {
      std::vector<Slice> slices;
      for (State c = s; !(c.first == from && !c.second);) {
        const auto& [prev, slice] = parent.at(c);
        slices.push_back(slice);
        c = prev;
      }
      std::reverse(slices.begin(), slices.end());
      return InternalDiagram{kRedLayer, from, to, slices};
    }
    for (const auto& g : red.generators) {
      const bool is_r = g.name.rfind("R<", 0) == 0;
      if (is_r && s.second) continue;
      for (std::size_t off = 0; off + g.dom.size() <= s.first.size(); ++off) {
        if (!std::equal(g.dom.begin(), g.dom.end(), s.first.begin() + static_cast<std::ptrdiff_t>(off))) continue;
        Word next = apply_slice(red, s.first, {off, g.name});
        if (next.size() > cap) continue;
        State n{std::move(next), s.second || is_r};
        if (parent.count(n)) continue;
        parent.emplace(n, std::make_pair(s, Slice{off, g.name}));
        work.push_back(std::move(n));
      }
    }
  }
  throw Error(ErrorCode::FixtureInvalid, "no reduction derivation between the fixture processes");
}

}  // namespace

CcsSystem build_ccs_system(const Process& source, const Process& target) {
  Builder b;
  b.universe({source, target});

  // The direct LTS derivation fires a complementary pair in place, so its
  // synchronisation needs the components in between as context.
  const auto comps = components(source);
  struct Firing {
    std::size_t i, j;
    Word ctx;
  };
  std::optional<Firing> firing;
  for (std::size_t i = 0; i < comps.size() && !firing; ++i)
    for (std::size_t j = i + 1; j < comps.size() && !firing; ++j) {
      const Process& a = comps[i];
      const Process& c = comps[j];
      if (a.kind() != Process::Kind::Prefix || c.kind() != Process::Kind::Prefix) continue;
      if (!complementary(a.action(), c.action())) continue;
      int next = 0;
      const Process r =
          replace_components(source, {{static_cast<int>(i), a.body()}, {static_cast<int>(j), c.body()}}, next);
      if (lts_word(r) != lts_word(target)) continue;
      Word ctx;
      for (std::size_t k = i + 1; k < j; ++k) ctx.push_back(lts_symbol(comps[k], kTau));
      firing = Firing{i, j, ctx};
    }
  if (!firing) throw Error(ErrorCode::FixtureInvalid, "target is not an in-place reduct of the source");
  std::vector<Word> contexts{{}};
  if (!firing->ctx.empty()) contexts.push_back(firing->ctx);
  b.build(contexts);

  CcsSystem cs;
  b.red.reindex();
  b.lts.reindex();
  cs.sys.layers = {std::move(b.red), std::move(b.lts)};
  cs.sys.functors = {std::move(b.I)};
  cs.sys.order = {{kRedLayer, kLtsLayer}};
  const auto rep = validate_system(cs.sys);
  if (!rep.ok())
    throw Error(ErrorCode::FixtureInvalid, "CCS system: " + rep.issues.front().location + ": " + rep.issues.front().message);

  const Word from = red_word(source), to = red_word(target);
  cs.rule = derive_rule(cs.sys, from, to);
  cs.sigma = box_diagram(cs.rule);
  const auto& I = cs.sys.functors.front();
  cs.windowed = compile(cs.sys, Term::seq({Term::refine("I", from), Term::boxed(translate_internal(cs.sys, I, cs.rule)),
                                          Term::coarsen("I", to)}));

  const Process& a = comps[firing->i];
  const Process& c = comps[firing->j];
  const Word lfrom = lts_word(source);
  InternalDiagram direct{kLtsLayer, lfrom, lts_word(target), {}};
  direct.slices = {{firing->i, "fire<" + lts_symbol(a, kTau) + ">"},
                   {firing->j, "fire<" + lts_symbol(c, kTau) + ">"},
                   {firing->i, b.sync_name(lts_symbol(a.body(), a.action()), firing->ctx,
                                           lts_symbol(c.body(), c.action()))}};
  // Unpack bracketed bodies, right one first so offsets stay valid.
  if (!c.body().is_sequential()) direct.slices.push_back({firing->j, "unpack<" + lts_symbol(c.body(), kTau) + ">"});
  if (!a.body().is_sequential()) direct.slices.push_back({firing->i, "unpack<" + lts_symbol(a.body(), kTau) + ">"});
  check_internal(cs.sys, direct);
  cs.counterfactual = compile(cs.sys, Term::seq({Term::refine("I", from), Term::boxed(direct), Term::coarsen("I", to)}));
  return cs;
}

CcsSystem build_ccs_system() {
  return build_ccs_system(parse_process("x.0|(y.0|x'.0)"), parse_process("0|(y.0|0)"));
}

CcsVerdicts check_ccs_fixtures(const CcsSystem& cs, const ExplainOptions& opts) {
  return {check_explanation_1(cs.sys, cs.windowed, cs.sigma, opts),
          check_counterfactual(cs.sys, cs.counterfactual, cs.sigma, opts)};
}

}  // namespace layerprop::ccs
