// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "layerprop/ccs.hpp"
#include "layerprop/chem.hpp"
#include "layerprop/circuits.hpp"
#include "layerprop/cli.hpp"
#include "layerprop/explain.hpp"
#include "layerprop/internal.hpp"
#include "layerprop/io.hpp"
#include "layerprop/semantics.hpp"
#include "support.hpp"

using namespace layerprop;
using testkit::TermGen;

namespace {

const std::filesystem::path kFixtures = LAYERPROP_FIXTURE_DIR;

struct Outcome {
  bool ok = true;
  std::ostringstream note;
  std::string first_failure;

  void fail(const std::string& why) {
    if (ok) first_failure = why;
    ok = false;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------ 1

void typing(Outcome& o) {
  const auto sys = testkit::toy_system();
  o.expect(validate_system(sys).ok(), "toy system does not validate");
  std::mt19937 rng(101);
  TermGen gen(sys, rng);
  const testkit::SortOracle oracle(sys);
  int good = 0, broken = 0;
  for (int i = 0; i < 100; ++i) {
    const Term t = gen.random_term(gen.random_type(), 1 + gen.pick(3));
    const auto want = oracle.check(t);
    if (!std::holds_alternative<Sort>(want)) {
      o.fail("oracle rejects a generated term");
      continue;
    }
    try {
      if (infer_sort(sys, t) == std::get<Sort>(want)) ++good;
      else o.fail("sort differs on " + term_to_string(t));
    } catch (const Error& e) {
      o.fail(std::string("well-formed term rejected: ") + e.what());
    }
  }
  for (int i = 0; i < 100; ++i) {
    const Term base = gen.random_term(gen.random_type(), 1 + gen.pick(3));
    const auto b = testkit::break_term(sys, gen, base);
    const auto want = oracle.check(b.term);
    if (!std::holds_alternative<ErrorCode>(want) || std::get<ErrorCode>(want) != b.expected) {
      o.fail("oracle disagrees with the planted defect");
      continue;
    }
    try {
      infer_sort(sys, b.term);
      o.fail("broken term accepted: " + term_to_string(b.term));
    } catch (const Error& e) {
      if (e.code() == b.expected) ++broken;
      else o.fail(std::string("wrong error class: ") + e.what());
    }
  }
  o.note << good << "/100 sorts, " << broken << "/100 rejections";
}

// ------------------------------------------------------------ 2

void canonical(Outcome& o) {
  const auto sys = testkit::toy_system();
  std::mt19937 rng(202);
  TermGen gen(sys, rng);
  testkit::SmcRewriter rw(sys, gen);
  int rewrites = 0;
  for (int i = 0; i < 200 && o.ok; ++i) {
    const Term t = gen.random_bounded(1, 8, 3);
    const Diagram d = compile(sys, t);
    const auto c = canonicalize(sys, d);
    const auto again = canonicalize(sys, c.diagram);
    o.expect(again.key == c.key && again.diagram == c.diagram, "canonicalize is not idempotent");
    Term cur = t;
    for (int k = 0; k < 500 && o.ok; ++k) {
      if (k % 25 == 0) cur = t;
      rw.rewrite(cur);
      ++rewrites;
      Diagram e = compile(sys, cur);
      std::vector<int> perm(e.cells.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      e = testkit::permute_cells(e, perm);
      if (canonicalize(sys, e).key != c.key) o.fail("key changed after rewriting to " + term_to_string(cur));
    }
  }
  int pairs = 0, equal = 0;
  for (int i = 0; i < 200 && o.ok; ++i) {
    const Term t = gen.random_bounded(1, 5, 3);
    const Diagram x = compile(sys, t);
    std::vector<Diagram> others;
    Term r = t;
    for (int k = 0; k < 10; ++k) rw.rewrite(r);
    others.push_back(compile(sys, r));
    if (auto crossed = testkit::cross_wires(x, gen)) others.push_back(*crossed);
    OmegaType cod;
    others.push_back(compile(sys, gen.random_term(x.in, 1 + gen.pick(2), &cod)));
    for (const auto& y : others) {
      const Diagram nx = normalize(sys, x), ny = normalize(sys, y);
      if (nx.cells.size() > 5 || ny.cells.size() > 5) continue;
      const bool want = testkit::brute_iso(nx, ny);
      ++pairs;
      equal += want;
      if (structural_eq(sys, x, y) != want) o.fail("structural_eq disagrees with brute force on " + term_to_string(t));
    }
  }
  o.note << rewrites << " rewrites, " << pairs << " pairs (" << equal << " isomorphic)";
}

// ------------------------------------------------------------ 3

std::optional<Step> step_to(const SystemOfLayers& sys, const Diagram& from, const std::string& key,
                            const RuleFilter& filter, const RuleOptions& opts = {}) {
  for (auto& s : expand(sys, from, opts, MoveSet::Forward, filter).steps)
    if (s.key == key) return s;
  return std::nullopt;
}

void rewriting(Outcome& o) {
  const std::set<std::string> bidi{"F1", "F2", "F3", "F4", "M1", "M2", "M3", "M4", "M5", "M6", "E"};
  std::vector<std::pair<const SystemOfLayers*, RuleInstance>> pool;
  const auto models = builtin_models();
  const auto toy = testkit::toy_system();
  const NamedModel toy_model{"toy", toy, {}};
  for (const auto& m : models)
    for (auto& inst : sample_instances(m, bidi)) pool.push_back({&m.sys, std::move(inst)});
  for (auto& inst : sample_instances(toy_model, bidi)) pool.push_back({&toy_model.sys, std::move(inst)});
  std::mt19937 rng(303);
  std::shuffle(pool.begin(), pool.end(), rng);
  // one instance of every rule family first, then the rest
  std::set<std::string> seen;
  std::vector<std::pair<const SystemOfLayers*, RuleInstance>> head, tail;
  for (auto& p : pool) (seen.insert(p.second.rule + p.second.variant).second ? head : tail).push_back(std::move(p));
  pool = std::move(head);
  for (auto& p : tail) pool.push_back(std::move(p));
  int trips = 0;
  for (std::size_t i = 0; i < pool.size() && trips < 100; ++i) {
    const auto& sys = *pool[i].first;
    const auto& inst = pool[i].second;
    const auto lhs = canonicalize(sys, inst.lhs), rhs = canonicalize(sys, inst.rhs);
    const auto fwd = step_to(sys, inst.lhs, rhs.key, {inst.rule, Orientation::Fwd});
    if (!fwd) {
      o.fail(inst.rule + inst.variant + " forward step not found on " + term_to_string(inst.lhs_term));
      continue;
    }
    const auto bwd = step_to(sys, fwd->result, lhs.key, {inst.rule, Orientation::Bwd});
    if (!bwd) {
      o.fail(inst.rule + inst.variant + " does not round-trip on " + term_to_string(inst.lhs_term));
      continue;
    }
    const Derivation dv{inst.lhs, {fwd->match, bwd->match}};
    const auto end = replay_derivation(sys, dv);
    o.expect(end && structural_eq(sys, *end, inst.lhs), inst.rule + " round trip does not replay");
    ++trips;
  }
  o.expect(trips == 100, "fewer than 100 instances");
  o.note << trips << " round trips";

  // single steps of the unit and counit families
  SearchOptions so;
  so.budget = 5;
  int single = 0;
  std::vector<InstanceSpec> specs;
  for (const auto& l : toy.layers) {
    const Word x{l.objects.front()}, y{l.objects.back()};
    specs.push_back({"A1", "", l.id, "", "", x, y, {}, {}, {}});
    specs.push_back({"A2", "", l.id, "", "", x, {}, {}, {}, {}});
    specs.push_back({"A5", "", l.id, "", "", {}, {}, {}, {}, {}});
    specs.push_back({"A6", "", l.id, "", "", {}, {}, {}, {}, {}});
  }
  for (const auto& f : toy.functors) {
    const auto& src = toy.require_layer(f.source);
    specs.push_back({"A3", "", "", f.name, "", {src.objects.front()}, {}, {}, {}, {}});
    specs.push_back({"A4", "", "", f.name, "", {src.objects.back(), src.objects.front()}, {}, {}, {}, {}});
  }
  for (const auto& spec : specs) {
    const auto inst = make_instance(toy, spec);
    const auto r = find_derivation(toy, inst.lhs, inst.rhs, so);
    if (r.status != SearchStatus::Found || !verify_derivation(toy, *r.derivation))
      o.fail(spec.rule + " single step not found");
    else
      ++single;
  }

  // triangle composites: insert a unit pair next to a cell, then cancel it
  struct Triangle {
    std::string name;
    Term start;
    std::string insert, cancel;
  };
  const std::vector<Triangle> triangles{
      {"refine", Term::refine("F", {"A"}), "A3", "A4"},
      {"coarsen", Term::coarsen("F", {"A"}), "A3", "A4"},
      {"pants", Term::pants("L", {"a"}, {"b"}), "A1", "A2"},
      {"copants", Term::copants("L", {"a"}, {"b"}), "A1", "A2"},
      {"cup", Term::cup("M"), "A5", "A6"},
      {"cap", Term::cap("M"), "A5", "A6"},
  };
  int composites = 0;
  for (const auto& tri : triangles) {
    const Diagram start = compile(toy, tri.start);
    const auto key = canonicalize(toy, start).key;
    bool found = false;
    for (const auto& s1 : expand(toy, start, {}, MoveSet::Forward, RuleFilter{tri.insert, Orientation::Fwd}).steps) {
      if (s1.result.cells.size() != 3) continue;
      const auto s2 = step_to(toy, s1.result, key, {tri.cancel, Orientation::Fwd});
      if (!s2) continue;
      const Derivation dv{start, {s1.match, s2->match}};
      if (!verify_derivation(toy, dv)) continue;
      // the composite's midpoint is reachable from both ends within the budget
      const auto there = find_derivation(toy, start, s1.result, so);
      const auto back = find_derivation(toy, s1.result, start, so);
      found = there.status == SearchStatus::Found && back.status == SearchStatus::Found &&
              there.derivation->steps.size() + back.derivation->steps.size() <= 5;
      if (found) break;
    }
    o.expect(found, "no triangle composite through " + tri.name);
    composites += found;
  }
  o.note << ", " << single << "/" << specs.size() << " unit/counit steps, " << composites << "/"
         << triangles.size() << " triangles";
}

// ------------------------------------------------------------ 4, 5

/// Every functor between two small categories, by exhaustive assignment.
std::vector<FinFunctor> all_functors(const CategoryPtr& c, const CategoryPtr& d) {
  std::vector<FinFunctor> out;
  FinFunctor f{c, d, std::vector<int>(c->nobj(), 0), std::vector<int>(c->nmor(), -1)};
  std::function<void(int)> mor = [&](int m) {
    if (m == c->nmor()) {
      for (int x = 0; x < c->nmor(); ++x)
        for (int y = 0; y < c->nmor(); ++y) {
          const int xy = c->then(x, y);
          if (xy >= 0 && d->then(f.mor[x], f.mor[y]) != f.mor[xy]) return;
        }
      out.push_back(f);
      return;
    }
    const auto& cands = d->hom(f.obj[c->dom[m]], f.obj[c->cod[m]]);
    for (int h : cands) {
      if (c->identity[c->dom[m]] == m && d->identity[f.obj[c->dom[m]]] != h) continue;
      f.mor[m] = h;
      mor(m + 1);
    }
  };
  std::function<void(int)> obj = [&](int x) {
    if (x == c->nobj()) return mor(0);
    for (int y = 0; y < d->nobj(); ++y) {
      f.obj[x] = y;
      obj(x + 1);
    }
  };
  obj(0);
  return out;
}

std::vector<CategoryPtr> small_categories(const std::vector<NamedModel>& models, std::size_t max_mor) {
  std::vector<CategoryPtr> cats{terminal_category()};
  for (const auto& m : models)
    for (const auto& [id, lm] : m.model.layers)
      if (static_cast<std::size_t>(lm.cat->cat->nmor()) <= max_mor &&
          std::find(cats.begin(), cats.end(), lm.cat->cat) == cats.end())
        cats.push_back(lm.cat->cat);
  cats.push_back(std::make_shared<FinCategory>(make_category("discrete", {"0", "1"}, {}, {})));
  cats.push_back(
      std::make_shared<FinCategory>(make_category("parallel", {"0", "1"}, {{"f", "0", "1"}, {"g", "0", "1"}}, {})));
  return cats;
}

void semantics(Outcome& o) {
  const auto models = builtin_models();
  int rules = 0;
  for (const auto& m : models) {
    for (const auto& inst : sample_instances(m, {})) {
      const char fam = inst.rule[0];
      if (fam != 'F' && fam != 'A' && fam != 'M') continue;
      const auto r = verify_rule_semantics(m.sys, m.model, inst);
      if (r.ok) ++rules;
      else o.fail(m.name + " " + inst.rule + inst.variant + ": " + r.reason);
    }
  }
  o.note << rules << " rule instances";

  const auto cats = small_categories(models, 4);
  std::vector<ProfunctorPtr> profs;
  for (const auto& c : cats) {
    profs.push_back(std::make_shared<Profunctor>(hom_profunctor(c)));
    for (const auto& d : cats)
      for (const auto& f : all_functors(c, d)) {
        profs.push_back(std::make_shared<Profunctor>(embed_up(f)));
        profs.push_back(std::make_shared<Profunctor>(embed_down(f)));
      }
  }
  int composites = 0;
  for (const auto& p : profs)
    for (const auto& q : profs) {
      if (p->target != q->source) continue;
      const auto comp = compose_prof(p, q);
      ++composites;
      const auto& A = *p->source;
      const auto& C = *q->target;
      for (int a = 0; a < A.nobj(); ++a)
        for (int c = 0; c < C.nobj(); ++c) {
          const auto naive = testkit::naive_coend(*p, *q, a, c);
          std::set<int> classes;
          const auto& tr = naive.triples;
          for (std::size_t i = 0; i < tr.size(); ++i) {
            classes.insert(comp.class_of(a, tr[i][0], c, tr[i][1], tr[i][2]));
            for (std::size_t j = 0; j < tr.size(); ++j) {
              const bool same = comp.class_of(a, tr[i][0], c, tr[i][1], tr[i][2]) ==
                                comp.class_of(a, tr[j][0], c, tr[j][1], tr[j][2]);
              if (same != naive.related[i][j]) o.fail("coend classes differ from the closure");
            }
          }
          if (static_cast<int>(classes.size()) != comp.result.count(a, c)) o.fail("coend has extra classes");
          // the action on classes is the action on any representative
          for (std::size_t i = 0; i < tr.size(); ++i)
            for (int k = 0; k < C.nmor(); ++k) {
              if (C.dom[k] != c) continue;
              const int cls = comp.class_of(a, tr[i][0], c, tr[i][1], tr[i][2]);
              const int moved = comp.class_of(a, tr[i][0], C.cod[k], tr[i][1], q->act_right(k, tr[i][0], tr[i][2]));
              if (comp.result.act_right(k, a, cls) != moved) o.fail("coend action differs");
            }
        }
    }
  o.note << ", " << composites << " composites over " << cats.size() << " categories";
}

void points(Outcome& o) {
  const auto models = builtin_models();
  auto cats = small_categories(models, 100);
  int pairs = 0;
  for (const auto& c : cats) {
    for (int f = 0; f < c->nmor(); ++f)
      for (int g = 0; g < c->nmor(); ++g) {
        const int gf = c->then(f, g);
        if (gf < 0) continue;
        const auto pc = point_compose(pointed_hom(c, f), pointed_hom(c, g));
        const auto& comp = *pc.composite;
        const int a = c->dom[f], e = c->cod[g];
        const auto& rep = comp.reps[static_cast<std::size_t>(a) * c->objects.size() + e][pc.point];
        const int m = c->then(comp.first->label[static_cast<std::size_t>(a) * c->objects.size() + rep.b][rep.p],
                              comp.second->label[static_cast<std::size_t>(rep.b) * c->objects.size() + e][rep.q]);
        o.expect(m == gf, "[f,g] does not denote g.f in " + c->name);
        // every class of hom o hom at (a, e) denotes a different morphism
        std::set<int> images;
        const auto& row = comp.reps[static_cast<std::size_t>(a) * c->objects.size() + e];
        for (const auto& r : row)
          images.insert(c->then(comp.first->label[static_cast<std::size_t>(a) * c->objects.size() + r.b][r.p],
                                comp.second->label[static_cast<std::size_t>(r.b) * c->objects.size() + e][r.q]));
        o.expect(images.size() == row.size() && images.size() == c->hom(a, e).size(),
                 "hom o hom is not hom in " + c->name);
        ++pairs;
      }
  }
  o.note << pairs << " composable pairs";

  int products = 0;
  const auto small = small_categories(models, 4);
  for (std::size_t i = 1; i < small.size(); ++i) {
    const auto fs = all_functors(small[i], small[i]);
    const auto gs = all_functors(small[1], small[(i + 1) % small.size()]);
    for (const auto& f : {fs.front(), fs.back()})
      for (const auto& g : {gs.front(), gs.back()}) {
        const auto lhs = embed_up(product_functor(f, g));
        const auto rhs = product_prof(embed_up(f), embed_up(g));
        const auto iso = nat_iso_search(lhs, rhs);
        o.expect(iso && is_natural(lhs, rhs, *iso), "up(F x G) is not up F x up G");
        ++products;
      }
  }
  o.note << ", " << products << " product instances";
}

// ------------------------------------------------------------ 6

chem::MoleculePartition molecule(const std::vector<std::string>& atoms, const std::vector<std::array<int, 3>>& bonds) {
  chem::MoleculePartition m;
  for (const auto& a : atoms) m.add_vertex(chem::NodeType::atom(a));
  for (const auto& b : bonds) m.bond(b[0], b[1], b[2]);
  return m;
}

/// Single bonds whose removal disconnects the graph, by search.
std::set<std::pair<int, int>> bridges(const chem::MoleculePartition& m) {
  std::set<std::pair<int, int>> out;
  for (int u = 0; u < m.size(); ++u)
    for (int v = u + 1; v < m.size(); ++v) {
      if (m.mult(u, v) != 1) continue;
      std::vector<bool> seen(m.size(), false);
      std::queue<int> todo;
      todo.push(u);
      seen[u] = true;
      while (!todo.empty()) {
        const int x = todo.front();
        todo.pop();
        for (int y = 0; y < m.size(); ++y)
          if (!seen[y] && m.mult(x, y) > 0 && !((x == u && y == v) || (x == v && y == u))) {
            seen[y] = true;
            todo.push(y);
          }
      }
      if (!seen[v]) out.insert({u, v});
    }
  return out;
}

void chemistry(Outcome& o) {
  const auto dir = kFixtures / "molecules";
  int valid = 0;
  std::vector<chem::MoleculePartition> all;
  for (const char* name : {"glucose", "atp", "g6p", "adp", "hplus"}) {
    const auto m = chem::load_partition(dir / (std::string(name) + ".json"));
    const auto rep = chem::validate_partition(m);
    if (rep.ok()) ++valid;
    else o.fail(std::string(name) + " does not validate");
    all.push_back(m);
  }
  o.note << valid << "/5 fixtures";
  const auto h2 = molecule({"H", "H"}, {{0, 1, 1}});
  const auto water = molecule({"O", "H", "H"}, {{0, 1, 1}, {0, 2, 1}});
  const auto ethane = molecule({"C", "C", "H", "H", "H", "H", "H", "H"},
                               {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}, {1, 5, 1}, {1, 6, 1}, {1, 7, 1}});
  int splits = 0;
  for (const auto* m : {&h2, &water, &ethane}) {
    const auto want = bridges(*m);
    std::set<std::pair<int, int>> got;
    for (const auto& s : chem::enumerate_splits(*m, "x")) got.insert({std::min(s.u, s.v), std::max(s.u, s.v)});
    o.expect(got == want, "splits differ from the bridges of " + chem::formula(*m));
    splits += static_cast<int>(got.size());
  }
  o.note << ", " << splits << " splits of H2, H2O, C2H6";
  all.insert(all.end(), {h2, water, ethane});
  int trips = 0;
  for (const auto& m : all)
    for (const auto& s : chem::enumerate_splits(m, "x")) {
      o.expect(chem::validate_partition(s.first).ok() && chem::validate_partition(s.second).ok(),
               "split side does not validate");
      o.expect(chem::isomorphic(chem::join(s.first, s.second, "x"), m), "join does not undo a split");
      ++trips;
    }
  o.note << ", " << trips << " round trips";
  const auto cs = chem::build_chem_system(dir);
  const ExplainOptions opts;
  const auto v = chem::check_glucose_explanation(cs, opts);
  o.expect(v.status == VerdictStatus::Valid, "glucose explanation is " + std::string(to_string(v.status)));
  o.expect(v.witness && verify_derivation(cs.sys, *v.witness, opts.rules), "glucose witness does not verify");
  o.note << ", glucose " << to_string(v.status);
}

// ------------------------------------------------------------ 7

ccs::Process random_process(TermGen& gen, int depth) {
  static const std::vector<std::string> acts{"x", "x'", "y", "y'", "tau"};
  if (depth == 0 || gen.coin(0.2)) return ccs::Process::nil();
  if (gen.coin(0.35)) return ccs::Process::par(random_process(gen, depth - 1), random_process(gen, depth - 1));
  return ccs::Process::prefix(acts[gen.pick(5)], random_process(gen, depth - 1));
}

/// A process congruent to p: components shuffled, regrouped, padded with 0.
ccs::Process shuffled(TermGen& gen, std::mt19937& rng, const ccs::Process& p) {
  auto parts = ccs::components(p);
  std::shuffle(parts.begin(), parts.end(), rng);
  if (gen.coin(0.5)) parts.push_back(ccs::Process::nil());
  ccs::Process out = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;)
    out = gen.coin(0.5) ? ccs::Process::par(parts[i], out) : ccs::Process::par(out, parts[i]);
  return out;
}

void process_calculus(Outcome& o) {
  const auto red = ccs::reductions(ccs::parse_process("x.0|(y.0|x'.0)"));
  o.expect(red.size() == 1 && red[0] == ccs::parse_process("0|(y.0|0)"), "wrong reducts");
  if (!red.empty()) o.note << "x.0|(y.0|x'.0) -> " << red[0].to_string();

  std::mt19937 rng(707);
  const SystemOfLayers none;
  TermGen gen(none, rng);
  int pairs = 0, same = 0;
  while (pairs < 100) {
    const auto p = random_process(gen, 4);
    ccs::Process q = p;
    switch (gen.pick(3)) {
      case 0: q = shuffled(gen, rng, p); break;
      case 1: q = random_process(gen, 4); break;
      default: q = shuffled(gen, rng, ccs::Process::par(p, random_process(gen, 1))); break;
    }
    std::size_t states = 0;
    const bool want = testkit::gfp_bisimilar(p, q, &states);
    if (states > 20) continue;
    ++pairs;
    same += want;
    if (ccs::bisimilar(p, q) != want) o.fail("bisimilar disagrees on " + p.to_string() + " and " + q.to_string());
  }
  o.note << "; " << pairs << " pairs (" << same << " bisimilar)";

  const auto cs = ccs::build_ccs_system();
  const ExplainOptions opts;
  const auto v = ccs::check_ccs_fixtures(cs, opts);
  o.expect(v.windowed.status == VerdictStatus::Valid, "windowed is " + std::string(to_string(v.windowed.status)));
  o.expect(v.counterfactual.status == VerdictStatus::Certified,
           "counterfactual is " + std::string(to_string(v.counterfactual.status)));
  o.expect(is_isolated(cs.sys, cs.counterfactual, opts.rules), "counterfactual is not isolated");
  o.note << "; windowed " << to_string(v.windowed.status) << ", counterfactual "
         << to_string(v.counterfactual.status);
}

// ------------------------------------------------------------ 8

using circuits::GF5;
using Rel5 = circuits::AffineRel<GF5>;

Rel5 random_rel(TermGen& gen, std::size_t n, std::size_t m) {
  std::vector<Rel5::Row> rows;
  for (int r = gen.pick(static_cast<int>(n + m) + 2); r > 0; --r) {
    Rel5::Row row{std::vector<GF5>(n + m), GF5(gen.pick(5))};
    for (auto& x : row.a) x = GF5(gen.coin(0.4) ? 0 : gen.pick(5));
    rows.push_back(row);
  }
  return Rel5(n, m, rows);
}

/// All points of F5^k, as vectors.
std::vector<std::vector<GF5>> cube(std::size_t k) {
  std::vector<std::vector<GF5>> out{{}};
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<std::vector<GF5>> next;
    for (const auto& v : out)
      for (int x = 0; x < 5; ++x) {
        next.push_back(v);
        next.back().push_back(GF5(x));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<GF5> join(std::vector<GF5> a, const std::vector<GF5>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void circuit(Outcome& o) {
  using namespace circuits;
  const auto cs = build_circuit_system();
  std::set<BipoleKind> kinds;
  for (const auto& g : cs.generators) {
    if (!kinds.insert(g.kind).second) continue;
    const auto gen = internal_generator(cs.sys, kBipLayer, g.name());
    const auto wb = translate_internal(cs.sys, cs.sys.require_functor("W"),
                                      translate_internal(cs.sys, cs.sys.require_functor("B"), gen));
    const auto ii = translate_internal(cs.sys, cs.sys.require_functor("I"),
                                      translate_internal(cs.sys, cs.sys.require_functor("incl"), gen));
    o.expect(internal_equal(cs.sys, wb, ii), "square fails on " + g.name());
    // physics: current through, voltage drop by the element law
    const Scalar z = g.kind == BipoleKind::Inductor    ? RatFunc::s() * g.value
                     : g.kind == BipoleKind::Capacitor ? Scalar(1) / (RatFunc::s() * g.value)
                                                       : g.value;
    std::vector<AffineRelation::Row> rows{{{1, 0, -1, 0}, 0}};
    if (g.kind == BipoleKind::VSource) rows.push_back({{0, 1, 0, -1}, g.value});
    else if (g.kind == BipoleKind::ISource) rows.push_back({{1, 0, 0, 0}, g.value});
    else rows.push_back({{-z, 1, 0, -1}, 0});
    o.expect(evaluate(cs, wb) == AffineRelation(2, 2, rows), "W(B) is not the law of " + g.name());
  }
  o.expect(kinds.size() == 5, "missing a bipole kind");
  o.note << kinds.size() << " bipole kinds";

  const auto five = imp_compose(scalar_impedance(2), scalar_impedance(3));
  o.expect(five == scalar_impedance(5), "2 + 3 is not 5");
  // {v = 5 i} holds at i = 1, v = 5 and nowhere else on i = 1
  o.expect(five.contains({1, 5}) && !five.contains({1, 4}), "composite impedance has the wrong points");
  o.note << ", imp_compose(2,3) = 5";

  const auto v = check_resistor_explanation(cs);
  o.expect(v.status == VerdictStatus::Valid, "resistor derivation is " + std::string(to_string(v.status)));
  o.note << ", resistors " << to_string(v.status);

  std::mt19937 rng(808);
  const SystemOfLayers none;
  TermGen gen(none, rng);
  int pairs = 0, empty = 0;
  for (; pairs < 50; ++pairs) {
    const std::size_t n = gen.pick(4), m = gen.pick(4), k = gen.pick(4);
    const Rel5 r = random_rel(gen, n, m), s = random_rel(gen, m, k);
    const Rel5 rs = affine_compose(r, s);
    const auto mids = cube(m);
    std::size_t count = 0;
    for (const auto& x : cube(n))
      for (const auto& y : cube(k)) {
        bool exists = false;
        for (const auto& mid : mids)
          if (r.contains(join(x, mid)) && s.contains(join(mid, y))) {
            exists = true;
            break;
          }
        count += exists;
        if (rs.contains(join(x, y)) != exists) {
          o.fail("composite differs from enumeration at " + r.key() + " ; " + s.key());
          break;
        }
      }
    empty += count == 0;
  }
  o.note << ", " << pairs << " F5 pairs (" << empty << " empty)";
}

// ------------------------------------------------------------ 9

std::string run_binary(const std::string& args, int& code) {
  const std::string cmd = std::string(LAYERPROP_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
  code = WEXITSTATUS(pclose(p));
  return out;
}

void determinism(Outcome& o) {
  const std::string f = kFixtures.string();
  const std::vector<std::vector<std::string>> runs{
      {"--system", f + "/chem/chem.json", "check-theory"},
      {"--system", f + "/chem/chem.json", "explain", "--sigma", "rule1", "--diagram", f + "/chem/glucose.json"},
      {"--system", f + "/ccs/ccs.json", "explain", "--sigma", "red1.json", "--diagram", f + "/ccs/windowed.json"},
      {"--system", f + "/ccs/ccs.json", "counterfactual", "--sigma", "red1.json", "--diagram", f + "/ccs/lts2.json"},
      {"--system", f + "/circuits/circuits.json", "explain2", "--derivation", f + "/circuits/resistors.json",
       "--equation", "Bip/series"},
      {"circuit", f + "/circuits/series.json"},
      {"chem"},
      {"ccs"},
      {"circuit"},
      {"semantics-verify", "--model", "arrow"},
  };
  int identical = 0;
  for (const auto& args : runs) {
    std::vector<std::string> full{"--json"};
    full.insert(full.end(), args.begin(), args.end());
    std::string line;
    for (const auto& a : full) line += "'" + a + "' ";
    const auto first = cli::run(full);
    const auto second = cli::run(full);
    int c1 = 0, c2 = 0;
    const auto p1 = run_binary(line, c1), p2 = run_binary(line, c2);
    const bool same = first.out == second.out && first.out == p1 && p1 == p2 && c1 == c2 && c1 == first.code;
    bool parses = true;
    try {
      (void)json::parse(first.out);
    } catch (const std::exception&) {
      parses = false;
    }
    o.expect(same, "output differs between runs of " + line);
    o.expect(parses && !first.out.empty(), "not JSON: " + line);
    o.expect(first.code == cli::kOk, "exit " + std::to_string(first.code) + " for " + line);
    identical += same;
  }
  o.note << identical << "/" << runs.size() << " fixture runs byte-identical";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double limit;  // seconds, 0 for none
    std::function<void(Outcome&)> body;
  };
  const std::vector<Criterion> all{
      {1, 5, typing},    {2, 0, canonical},        {3, 0, rewriting}, {4, 60, semantics},  {5, 0, points},
      {6, 10, chemistry}, {7, 0, process_calculus}, {8, 10, circuit},  {9, 0, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double dt = seconds_since(t0);
    if (c.limit > 0 && dt > c.limit) o.fail("over the time limit");
    std::printf("criterion %d: %s  %s (%.2f s)\n", c.id, o.ok ? "PASS" : "FAIL", o.note.str().c_str(), dt);
    if (!o.ok) std::printf("  first failure: %s\n", o.first_failure.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  return failed == 0 ? 0 : 1;
}
