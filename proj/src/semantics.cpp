#include "layerprop/semantics.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "layerprop/error.hpp"
#include "layerprop/internal.hpp"

namespace layerprop {

// ---------------------------------------------------------------- categories

int FinCategory::object_index(const std::string& n) const {
  auto it = std::find(objects.begin(), objects.end(), n);
  return it == objects.end() ? -1 : static_cast<int>(it - objects.begin());
}

int FinCategory::morphism_index(const std::string& n) const {
  auto it = std::find(morphisms.begin(), morphisms.end(), n);
  return it == morphisms.end() ? -1 : static_cast<int>(it - morphisms.begin());
}

void FinCategory::finalize() {
  const std::size_t n = objects.size();
  hom_sets.assign(n * n, {});
  rank.assign(morphisms.size(), 0);
  for (std::size_t f = 0; f < morphisms.size(); ++f) {
    auto& h = hom_sets[static_cast<std::size_t>(dom[f]) * n + cod[f]];
    rank[f] = static_cast<int>(h.size());
    h.push_back(static_cast<int>(f));
  }
}

FinCategory make_category(std::string name, std::vector<std::string> objects, std::vector<MorphismSpec> morphisms,
                          const std::vector<std::array<std::string, 3>>& compose) {
  FinCategory c;
  c.name = std::move(name);
  c.objects = std::move(objects);
  for (std::size_t o = 0; o < c.objects.size(); ++o) {
    c.identity.push_back(static_cast<int>(c.morphisms.size()));
    c.morphisms.push_back("id:" + c.objects[o]);
    c.dom.push_back(static_cast<int>(o));
    c.cod.push_back(static_cast<int>(o));
  }
  for (const auto& m : morphisms) {
    const int d = c.object_index(m.dom), e = c.object_index(m.cod);
    if (d < 0 || e < 0) throw Error(ErrorCode::UnknownSymbol, "morphism " + m.name + " has an unknown end");
    c.morphisms.push_back(m.name);
    c.dom.push_back(d);
    c.cod.push_back(e);
  }
  const std::size_t n = c.morphisms.size();
  c.then_table.assign(n * n, -1);
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t g = 0; g < n; ++g) {
      if (c.cod[f] != c.dom[g]) continue;
      if (static_cast<int>(f) == c.identity[c.dom[f]]) c.then_table[f * n + g] = static_cast<int>(g);
      else if (static_cast<int>(g) == c.identity[c.cod[g]]) c.then_table[f * n + g] = static_cast<int>(f);
    }
  for (const auto& [f, g, h] : compose) {
    const int fi = c.morphism_index(f), gi = c.morphism_index(g), hi = c.morphism_index(h);
    if (fi < 0 || gi < 0 || hi < 0) throw Error(ErrorCode::UnknownSymbol, "composite " + f + ";" + g + "=" + h);
    c.then_table[static_cast<std::size_t>(fi) * n + gi] = hi;
  }
  c.finalize();
  return c;
}

FinCategory preorder_category(std::string name, std::vector<std::string> objects,
                              const std::function<bool(int, int)>& leq) {
  std::vector<MorphismSpec> ms;
  const int n = static_cast<int>(objects.size());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && leq(a, b)) ms.push_back({objects[a] + "<" + objects[b], objects[a], objects[b]});
  std::vector<std::array<std::string, 3>> comp;
  for (const auto& f : ms)
    for (const auto& g : ms)
      if (f.cod == g.dom) comp.push_back({f.name, g.name, f.dom == g.cod ? "id:" + f.dom : f.dom + "<" + g.cod});
  return make_category(std::move(name), std::move(objects), std::move(ms), comp);
}

CategoryPtr terminal_category() {
  static const CategoryPtr one = [] {
    auto c = make_category("1", {"*"}, {}, {});
    c.terminal = true;
    return std::make_shared<const FinCategory>(std::move(c));
  }();
  return one;
}

namespace {

bool same_category(const CategoryPtr& a, const CategoryPtr& b) { return a == b || a->same_shape(*b); }

std::string join_names(const std::string& a, const std::string& b) { return a + "," + b; }

}  // namespace

CategoryPtr product_category(const CategoryPtr& a, const CategoryPtr& b) {
  if (b->terminal) return a;
  if (a->terminal) return b;
  static std::mutex mu;
  static std::map<std::pair<const FinCategory*, const FinCategory*>,
                  std::tuple<CategoryPtr, CategoryPtr, CategoryPtr>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(a.get(), b.get());
  if (auto it = cache.find(key); it != cache.end()) return std::get<2>(it->second);
  FinCategory c;
  c.name = a->name + "x" + b->name;
  const int na = a->nobj(), nb = b->nobj(), ma = a->nmor(), mb = b->nmor();
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) c.objects.push_back(join_names(a->objects[i], b->objects[j]));
  for (int f = 0; f < ma; ++f)
    for (int g = 0; g < mb; ++g) {
      c.morphisms.push_back(join_names(a->morphisms[f], b->morphisms[g]));
      c.dom.push_back(a->dom[f] * nb + b->dom[g]);
      c.cod.push_back(a->cod[f] * nb + b->cod[g]);
    }
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) c.identity.push_back(a->identity[i] * mb + b->identity[j]);
  const std::size_t m = c.morphisms.size();
  c.then_table.assign(m * m, -1);
  for (int f1 = 0; f1 < ma; ++f1)
    for (int f2 = 0; f2 < ma; ++f2) {
      const int h1 = a->then(f1, f2);
      if (h1 < 0) continue;
      for (int g1 = 0; g1 < mb; ++g1)
        for (int g2 = 0; g2 < mb; ++g2) {
          const int h2 = b->then(g1, g2);
          if (h2 < 0) continue;
          c.then_table[static_cast<std::size_t>(f1 * mb + g1) * m + (f2 * mb + g2)] = h1 * mb + h2;
        }
    }
  c.finalize();
  auto out = std::make_shared<const FinCategory>(std::move(c));
  cache.emplace(key, std::make_tuple(a, b, out));
  return out;
}

ValidationReport validate_category(const FinCategory& c) {
  ValidationReport r;
  const int n = c.nmor();
  const std::string& nm = c.name;
  if (static_cast<int>(c.identity.size()) != c.nobj()) r.add("category-identity", nm, "identity map incomplete");
  for (int o = 0; o < c.nobj() && o < static_cast<int>(c.identity.size()); ++o) {
    const int i = c.identity[o];
    if (c.dom[i] != o || c.cod[i] != o) r.add("category-identity", nm, "identity of " + c.objects[o] + " mistyped");
  }
  for (int f = 0; f < n; ++f)
    for (int g = 0; g < n; ++g) {
      const int h = c.then(f, g);
      if (c.cod[f] != c.dom[g]) {
        if (h >= 0) r.add("category-composition", nm, c.morphisms[f] + ";" + c.morphisms[g] + " defined off-type");
        continue;
      }
      if (h < 0) {
        r.add("category-composition", nm, c.morphisms[f] + ";" + c.morphisms[g] + " missing");
        continue;
      }
      if (c.dom[h] != c.dom[f] || c.cod[h] != c.cod[g])
        r.add("category-composition", nm, c.morphisms[f] + ";" + c.morphisms[g] + " mistyped");
    }
  if (!r.ok()) return r;
  for (int f = 0; f < n; ++f) {
    if (c.then(c.identity[c.dom[f]], f) != f || c.then(f, c.identity[c.cod[f]]) != f)
      r.add("category-unit", nm, "identity law fails at " + c.morphisms[f]);
  }
  for (int f = 0; f < n; ++f)
    for (int g = 0; g < n; ++g) {
      const int fg = c.then(f, g);
      if (fg < 0) continue;
      for (int h = 0; h < n; ++h) {
        const int gh = c.then(g, h);
        if (gh < 0) continue;
        if (c.then(fg, h) != c.then(f, gh))
          r.add("category-associativity", nm,
                "at " + c.morphisms[f] + ", " + c.morphisms[g] + ", " + c.morphisms[h]);
      }
    }
  return r;
}

// ---------------------------------------------------------------- functors

FinFunctor identity_functor(const CategoryPtr& c) {
  FinFunctor f{c, c, {}, {}};
  f.obj.resize(c->nobj());
  std::iota(f.obj.begin(), f.obj.end(), 0);
  f.mor.resize(c->nmor());
  std::iota(f.mor.begin(), f.mor.end(), 0);
  return f;
}

FinFunctor compose_functor(const FinFunctor& f, const FinFunctor& g) {
  if (!same_category(f.target, g.source)) throw Error(ErrorCode::BoundaryMismatch, "functors do not compose");
  FinFunctor h{f.source, g.target, {}, {}};
  for (int o : f.obj) h.obj.push_back(g.obj[o]);
  for (int m : f.mor) h.mor.push_back(g.mor[m]);
  return h;
}

FinFunctor product_functor(const FinFunctor& f, const FinFunctor& g) {
  FinFunctor h{product_category(f.source, g.source), product_category(f.target, g.target), {}, {}};
  const int nb = g.target->nobj(), mb = g.target->nmor();
  for (int o1 : f.obj)
    for (int o2 : g.obj) h.obj.push_back(o1 * nb + o2);
  for (int m1 : f.mor)
    for (int m2 : g.mor) h.mor.push_back(m1 * mb + m2);
  return h;
}

FinFunctor swap_functor(const CategoryPtr& c, const CategoryPtr& d) {
  FinFunctor s{product_category(c, d), product_category(d, c), {}, {}};
  const int nc = c->nobj(), nd = d->nobj(), mc = c->nmor(), md = d->nmor();
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nd; ++j) s.obj.push_back(j * nc + i);
  for (int f = 0; f < mc; ++f)
    for (int g = 0; g < md; ++g) s.mor.push_back(g * mc + f);
  return s;
}

ValidationReport validate_functor(const FinFunctor& f) {
  ValidationReport r;
  const auto& s = *f.source;
  const auto& t = *f.target;
  if (static_cast<int>(f.obj.size()) != s.nobj() || static_cast<int>(f.mor.size()) != s.nmor()) {
    r.add("functor-shape", s.name + "->" + t.name, "object or morphism map has the wrong size");
    return r;
  }
  for (int m = 0; m < s.nmor(); ++m) {
    const int fm = f.mor[m];
    if (fm < 0 || fm >= t.nmor() || t.dom[fm] != f.obj[s.dom[m]] || t.cod[fm] != f.obj[s.cod[m]])
      r.add("functor-typing", s.morphisms[m], "image is mistyped");
  }
  if (!r.ok()) return r;
  for (int o = 0; o < s.nobj(); ++o)
    if (f.mor[s.identity[o]] != t.identity[f.obj[o]]) r.add("functor-identity", s.objects[o], "identity not preserved");
  for (int a = 0; a < s.nmor(); ++a)
    for (int b = 0; b < s.nmor(); ++b) {
      const int ab = s.then(a, b);
      if (ab >= 0 && f.mor[ab] != t.then(f.mor[a], f.mor[b]))
        r.add("functor-composition", s.morphisms[a] + ";" + s.morphisms[b], "composition not preserved");
    }
  return r;
}

ValidationReport validate_monoidal(const FinMonoidalCategory& m) {
  ValidationReport r = validate_category(*m.cat);
  if (!r.ok()) return r;
  const auto& c = *m.cat;
  const int n = c.nobj(), k = c.nmor();
  if (static_cast<int>(m.tensor_obj.size()) != n * n || static_cast<int>(m.tensor_mor.size()) != k * k) {
    r.add("monoidal-shape", c.name, "tensor tables have the wrong size");
    return r;
  }
  for (int f = 0; f < k; ++f)
    for (int g = 0; g < k; ++g) {
      const int h = m.tensor_m(f, g);
      if (h < 0 || h >= k || c.dom[h] != m.tensor(c.dom[f], c.dom[g]) || c.cod[h] != m.tensor(c.cod[f], c.cod[g]))
        r.add("monoidal-typing", c.morphisms[f] + "*" + c.morphisms[g], "tensor is mistyped");
    }
  if (!r.ok()) return r;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (m.tensor_m(c.identity[a], c.identity[b]) != c.identity[m.tensor(a, b)])
        r.add("monoidal-functoriality", c.objects[a] + "*" + c.objects[b], "identities not preserved");
  for (int f1 = 0; f1 < k; ++f1)
    for (int f2 = 0; f2 < k; ++f2) {
      const int f = c.then(f1, f2);
      if (f < 0) continue;
      for (int g1 = 0; g1 < k; ++g1)
        for (int g2 = 0; g2 < k; ++g2) {
          const int g = c.then(g1, g2);
          if (g < 0) continue;
          if (m.tensor_m(f, g) != c.then(m.tensor_m(f1, g1), m.tensor_m(f2, g2)))
            r.add("monoidal-interchange", c.morphisms[f] + "*" + c.morphisms[g], "interchange fails");
        }
    }
  for (int f = 0; f < k; ++f) {
    const int u = c.identity[m.unit];
    if (m.tensor_m(u, f) != f || m.tensor_m(f, u) != f) r.add("monoidal-unit", c.morphisms[f], "unit law fails");
    for (int g = 0; g < k; ++g)
      for (int h = 0; h < k; ++h)
        if (m.tensor_m(m.tensor_m(f, g), h) != m.tensor_m(f, m.tensor_m(g, h)))
          r.add("monoidal-associativity", c.morphisms[f], "tensor is not strictly associative");
  }
  return r;
}

FinFunctor tensor_functor(const FinMonoidalCategory& m) {
  FinFunctor t{product_category(m.cat, m.cat), m.cat, m.tensor_obj, m.tensor_mor};
  return t;
}

FinFunctor unit_functor(const FinMonoidalCategory& m) {
  return FinFunctor{terminal_category(), m.cat, {m.unit}, {m.cat->identity[m.unit]}};
}

bool is_strict_monoidal_functor(const FinFunctor& f, const FinMonoidalCategory& src, const FinMonoidalCategory& tgt) {
  if (f.obj[src.unit] != tgt.unit) return false;
  const int n = src.cat->nobj(), k = src.cat->nmor();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (f.obj[src.tensor(a, b)] != tgt.tensor(f.obj[a], f.obj[b])) return false;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      if (f.mor[src.tensor_m(a, b)] != tgt.tensor_m(f.mor[a], f.mor[b])) return false;
  return true;
}

// ---------------------------------------------------------------- profunctors

int Profunctor::element_of(int c, int d, int m) const {
  if (label.empty()) return -1;
  const auto& l = label[static_cast<std::size_t>(c) * target->objects.size() + d];
  auto it = std::find(l.begin(), l.end(), m);
  return it == l.end() ? -1 : static_cast<int>(it - l.begin());
}

namespace {

void alloc_actions(Profunctor& p) {
  const auto& s = *p.source;
  const auto& t = *p.target;
  p.left.assign(static_cast<std::size_t>(s.nmor()) * t.nobj(), {});
  p.right.assign(static_cast<std::size_t>(t.nmor()) * s.nobj(), {});
}

}  // namespace

ValidationReport validate_profunctor(const Profunctor& p) {
  ValidationReport r;
  const auto& s = *p.source;
  const auto& t = *p.target;
  const int ns = s.nobj(), nt = t.nobj();
  auto in_range = [](const std::vector<int>& v, int n) {
    return std::all_of(v.begin(), v.end(), [&](int y) { return y >= 0 && y < n; });
  };
  for (int h = 0; h < s.nmor(); ++h)
    for (int d = 0; d < nt; ++d) {
      const auto& v = p.left[static_cast<std::size_t>(h) * nt + d];
      if (static_cast<int>(v.size()) != p.count(s.cod[h], d) || !in_range(v, p.count(s.dom[h], d)))
        r.add("profunctor-shape", s.morphisms[h] + "@" + t.objects[d], "left action table malformed");
    }
  for (int k = 0; k < t.nmor(); ++k)
    for (int c = 0; c < ns; ++c) {
      const auto& v = p.right[static_cast<std::size_t>(k) * ns + c];
      if (static_cast<int>(v.size()) != p.count(c, t.dom[k]) || !in_range(v, p.count(c, t.cod[k])))
        r.add("profunctor-shape", s.objects[c] + "@" + t.morphisms[k], "right action table malformed");
    }
  if (!r.ok()) return r;
  for (int c = 0; c < ns; ++c)
    for (int d = 0; d < nt; ++d)
      for (int x = 0; x < p.count(c, d); ++x) {
        const std::string at = s.objects[c] + "," + t.objects[d] + "#" + std::to_string(x);
        if (p.act_left(s.identity[c], d, x) != x) r.add("profunctor-identity", at, "left identity acts nontrivially");
        if (p.act_right(t.identity[d], c, x) != x) r.add("profunctor-identity", at, "right identity acts nontrivially");
        // Left action is contravariant: (h1 ; h2) acts as h2 then h1.
        for (int h2 = 0; h2 < s.nmor(); ++h2) {
          if (s.cod[h2] != c) continue;
          const int y = p.act_left(h2, d, x);
          for (int h1 = 0; h1 < s.nmor(); ++h1) {
            if (s.cod[h1] != s.dom[h2]) continue;
            if (p.act_left(s.then(h1, h2), d, x) != p.act_left(h1, d, y))
              r.add("profunctor-left", at, "left action not functorial at " + s.morphisms[h1] + ";" + s.morphisms[h2]);
          }
          for (int k = 0; k < t.nmor(); ++k) {
            if (t.dom[k] != d) continue;
            if (p.act_right(k, s.dom[h2], y) != p.act_left(h2, t.cod[k], p.act_right(k, c, x)))
              r.add("profunctor-commute", at, "actions of " + s.morphisms[h2] + " and " + t.morphisms[k] + " do not commute");
          }
        }
        for (int k1 = 0; k1 < t.nmor(); ++k1) {
          if (t.dom[k1] != d) continue;
          const int y = p.act_right(k1, c, x);
          for (int k2 = 0; k2 < t.nmor(); ++k2) {
            if (t.dom[k2] != t.cod[k1]) continue;
            if (p.act_right(t.then(k1, k2), c, x) != p.act_right(k2, c, y))
              r.add("profunctor-right", at, "right action not functorial at " + t.morphisms[k1] + ";" + t.morphisms[k2]);
          }
        }
      }
  return r;
}

bool same_tables(const Profunctor& p, const Profunctor& q) {
  return same_category(p.source, q.source) && same_category(p.target, q.target) && p.size == q.size &&
         p.left == q.left && p.right == q.right;
}

Profunctor embed_up(const FinFunctor& f) {
  Profunctor p;
  p.source = f.source;
  p.target = f.target;
  const auto& s = *f.source;
  const auto& t = *f.target;
  const int ns = s.nobj(), nt = t.nobj();
  p.size.resize(static_cast<std::size_t>(ns) * nt);
  p.label.resize(p.size.size());
  for (int c = 0; c < ns; ++c)
    for (int d = 0; d < nt; ++d) {
      p.label[c * nt + d] = t.hom(f.obj[c], d);
      p.size[c * nt + d] = static_cast<int>(p.label[c * nt + d].size());
    }
  alloc_actions(p);
  for (int h = 0; h < s.nmor(); ++h)
    for (int d = 0; d < nt; ++d) {
      auto& v = p.left[static_cast<std::size_t>(h) * nt + d];
      for (int m : p.label[s.cod[h] * nt + d]) v.push_back(t.rank[t.then(f.mor[h], m)]);
    }
  for (int k = 0; k < t.nmor(); ++k)
    for (int c = 0; c < ns; ++c) {
      auto& v = p.right[static_cast<std::size_t>(k) * ns + c];
      for (int m : p.label[c * nt + t.dom[k]]) v.push_back(t.rank[t.then(m, k)]);
    }
  p.rep = Profunctor::Rep::Up;
  p.functor = std::make_shared<const FinFunctor>(f);
  return p;
}

Profunctor embed_down(const FinFunctor& f) {
  Profunctor p;
  p.source = f.target;
  p.target = f.source;
  const auto& s = *f.target;  // D, contravariant argument
  const auto& t = *f.source;  // C
  const int ns = s.nobj(), nt = t.nobj();
  p.size.resize(static_cast<std::size_t>(ns) * nt);
  p.label.resize(p.size.size());
  for (int d = 0; d < ns; ++d)
    for (int c = 0; c < nt; ++c) {
      p.label[d * nt + c] = s.hom(d, f.obj[c]);
      p.size[d * nt + c] = static_cast<int>(p.label[d * nt + c].size());
    }
  alloc_actions(p);
  for (int k = 0; k < s.nmor(); ++k)
    for (int c = 0; c < nt; ++c) {
      auto& v = p.left[static_cast<std::size_t>(k) * nt + c];
      for (int m : p.label[s.cod[k] * nt + c]) v.push_back(s.rank[s.then(k, m)]);
    }
  for (int h = 0; h < t.nmor(); ++h)
    for (int d = 0; d < ns; ++d) {
      auto& v = p.right[static_cast<std::size_t>(h) * ns + d];
      for (int m : p.label[d * nt + t.dom[h]]) v.push_back(s.rank[s.then(m, f.mor[h])]);
    }
  p.rep = Profunctor::Rep::Down;
  p.functor = std::make_shared<const FinFunctor>(f);
  return p;
}

Profunctor hom_profunctor(const CategoryPtr& c) {
  Profunctor p = embed_up(identity_functor(c));
  p.is_hom = true;
  return p;
}

Profunctor product_prof(const Profunctor& p, const Profunctor& q) {
  Profunctor r;
  r.source = product_category(p.source, q.source);
  r.target = product_category(p.target, q.target);
  const int ps = p.source->nobj(), qs = q.source->nobj(), pt = p.target->nobj(), qt = q.target->nobj();
  const int nt = pt * qt, ns = ps * qs;
  r.size.assign(static_cast<std::size_t>(ns) * nt, 0);
  for (int c1 = 0; c1 < ps; ++c1)
    for (int c2 = 0; c2 < qs; ++c2)
      for (int d1 = 0; d1 < pt; ++d1)
        for (int d2 = 0; d2 < qt; ++d2)
          r.size[(c1 * qs + c2) * nt + d1 * qt + d2] = p.count(c1, d1) * q.count(c2, d2);
  alloc_actions(r);
  const int qm = q.source->nmor();
  for (int h1 = 0; h1 < p.source->nmor(); ++h1)
    for (int h2 = 0; h2 < qm; ++h2)
      for (int d1 = 0; d1 < pt; ++d1)
        for (int d2 = 0; d2 < qt; ++d2) {
          const int c1 = p.source->cod[h1], c2 = q.source->cod[h2];
          const int e2 = q.source->dom[h2];
          const int nq = q.count(c2, d2), nq2 = q.count(e2, d2);
          auto& v = r.left[static_cast<std::size_t>(h1 * qm + h2) * nt + d1 * qt + d2];
          for (int x = 0; x < p.count(c1, d1); ++x)
            for (int y = 0; y < nq; ++y) v.push_back(p.act_left(h1, d1, x) * nq2 + q.act_left(h2, d2, y));
        }
  const int qtm = q.target->nmor();
  for (int k1 = 0; k1 < p.target->nmor(); ++k1)
    for (int k2 = 0; k2 < qtm; ++k2)
      for (int c1 = 0; c1 < ps; ++c1)
        for (int c2 = 0; c2 < qs; ++c2) {
          const int d1 = p.target->dom[k1], d2 = q.target->dom[k2];
          const int nq = q.count(c2, d2), nq2 = q.count(c2, q.target->cod[k2]);
          auto& v = r.right[static_cast<std::size_t>(k1 * qtm + k2) * ns + c1 * qs + c2];
          for (int x = 0; x < p.count(c1, d1); ++x)
            for (int y = 0; y < nq; ++y) v.push_back(p.act_right(k1, c1, x) * nq2 + q.act_right(k2, c2, y));
        }
  // Products of representables are representable by the product functor.
  using R = Profunctor::Rep;
  auto as = [](const Profunctor& x, R want) { return x.rep == want || (x.is_hom && x.rep != R::None); };
  for (R want : {R::Up, R::Down}) {
    if (!as(p, want) || !as(q, want)) continue;
    if (p.rep == R::Up && q.rep == R::Up && !(p.is_hom && q.is_hom) && want == R::Down) continue;
    r.rep = want;
    r.is_hom = p.is_hom && q.is_hom;
    r.functor = std::make_shared<const FinFunctor>(product_functor(*p.functor, *q.functor));
    const int mq = (want == R::Up ? q.target : q.source)->nmor();
    r.label.resize(r.size.size());
    for (int c1 = 0; c1 < ps; ++c1)
      for (int c2 = 0; c2 < qs; ++c2)
        for (int d1 = 0; d1 < pt; ++d1)
          for (int d2 = 0; d2 < qt; ++d2) {
            auto& l = r.label[(c1 * qs + c2) * nt + d1 * qt + d2];
            for (int m1 : p.label[c1 * pt + d1])
              for (int m2 : q.label[c2 * qt + d2]) l.push_back(m1 * mq + m2);
          }
    break;
  }
  return r;
}

int Composite::class_of(int a, int b, int c, int p, int q) const {
  const std::size_t ac = static_cast<std::size_t>(a) * result.target->objects.size() + c;
  return pair_class[ac][offsets[ac][b] + p * second->count(b, c) + q];
}

Composite compose_prof(const ProfunctorPtr& pp, const ProfunctorPtr& qq) {
  const Profunctor& P = *pp;
  const Profunctor& Q = *qq;
  if (!same_category(P.target, Q.source)) throw Error(ErrorCode::BoundaryMismatch, "profunctors do not compose");
  Composite out;
  out.first = pp;
  out.second = qq;
  Profunctor& R = out.result;
  R.source = P.source;
  R.target = Q.target;
  const auto& A = *P.source;
  const auto& B = *P.target;
  const auto& C = *Q.target;
  const int na = A.nobj(), nb = B.nobj(), nc = C.nobj();
  R.size.assign(static_cast<std::size_t>(na) * nc, 0);
  out.reps.resize(R.size.size());
  out.offsets.resize(R.size.size());
  out.pair_class.resize(R.size.size());

  std::vector<int> parent;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int a = 0; a < na; ++a)
    for (int c = 0; c < nc; ++c) {
      const std::size_t ac = static_cast<std::size_t>(a) * nc + c;
      auto& off = out.offsets[ac];
      off.resize(nb + 1);
      int total = 0;
      for (int b = 0; b < nb; ++b) {
        off[b] = total;
        total += P.count(a, b) * Q.count(b, c);
      }
      off[nb] = total;
      parent.resize(total);
      std::iota(parent.begin(), parent.end(), 0);
      // (p . g, q) ~ (p, g . q) for g : b -> b'.
      for (int g = 0; g < B.nmor(); ++g) {
        const int b = B.dom[g], b2 = B.cod[g];
        const int nq = Q.count(b, c), nq2 = Q.count(b2, c);
        for (int p = 0; p < P.count(a, b); ++p) {
          const int pg = P.act_right(g, a, p);
          for (int q = 0; q < nq2; ++q) {
            const int x = find(off[b2] + pg * nq2 + q);
            const int y = find(off[b] + p * nq + Q.act_left(g, c, q));
            if (x != y) parent[std::max(x, y)] = std::min(x, y);
          }
        }
      }
      auto& cls = out.pair_class[ac];
      cls.assign(total, -1);
      std::vector<int> root_class(total, -1);
      for (int b = 0; b < nb; ++b) {
        const int nq = Q.count(b, c);
        for (int i = off[b]; i < off[b + 1]; ++i) {
          const int root = find(i);
          if (root_class[root] < 0) {
            root_class[root] = static_cast<int>(out.reps[ac].size());
            out.reps[ac].push_back({b, (i - off[b]) / nq, (i - off[b]) % nq});
          }
          cls[i] = root_class[root];
        }
      }
      R.size[ac] = static_cast<int>(out.reps[ac].size());
    }
  alloc_actions(R);
  for (int h = 0; h < A.nmor(); ++h)
    for (int c = 0; c < nc; ++c) {
      auto& v = R.left[static_cast<std::size_t>(h) * nc + c];
      for (const auto& rep : out.reps[static_cast<std::size_t>(A.cod[h]) * nc + c])
        v.push_back(out.class_of(A.dom[h], rep.b, c, P.act_left(h, rep.b, rep.p), rep.q));
    }
  for (int k = 0; k < C.nmor(); ++k)
    for (int a = 0; a < na; ++a) {
      auto& v = R.right[static_cast<std::size_t>(k) * na + a];
      for (const auto& rep : out.reps[static_cast<std::size_t>(a) * nc + C.dom[k]])
        v.push_back(out.class_of(a, rep.b, C.cod[k], rep.p, Q.act_right(k, rep.b, rep.q)));
    }
  return out;
}

PointedProfunctor pointed_hom(const CategoryPtr& c, int morphism) {
  PointedProfunctor p;
  p.prof = std::make_shared<const Profunctor>(hom_profunctor(c));
  p.source_point = c->dom[morphism];
  p.target_point = c->cod[morphism];
  p.point = c->rank[morphism];
  return p;
}

PointedProfunctor point_compose(const PointedProfunctor& p, const PointedProfunctor& q) {
  if (p.target_point != q.source_point || !same_category(p.prof->target, q.prof->source))
    throw Error(ErrorCode::BoundaryMismatch, "pointed profunctors do not compose");
  auto comp = std::make_shared<Composite>(compose_prof(p.prof, q.prof));
  PointedProfunctor r;
  r.source_point = p.source_point;
  r.target_point = q.target_point;
  r.point = comp->class_of(p.source_point, p.target_point, q.target_point, p.point, q.point);
  r.prof = std::shared_ptr<const Profunctor>(comp, &comp->result);
  r.composite = comp;
  return r;
}

PointedProfunctor point_product(const PointedProfunctor& p, const PointedProfunctor& q) {
  PointedProfunctor r;
  r.prof = std::make_shared<const Profunctor>(product_prof(*p.prof, *q.prof));
  r.source_point = p.source_point * q.prof->source->nobj() + q.source_point;
  r.target_point = p.target_point * q.prof->target->nobj() + q.target_point;
  r.point = p.point * q.prof->count(q.source_point, q.target_point) + q.point;
  return r;
}

// ---------------------------------------------------------------- transformations

namespace {

class NatSearch {
 public:
  NatSearch(const Profunctor& p, const Profunctor& q, const NatSearchOptions& o) : P(p), Q(q), opts(o) {
    const auto& S = *P.source;
    const auto& T = *P.target;
    ns = S.nobj();
    nt = T.nobj();
    base.resize(static_cast<std::size_t>(ns) * nt + 1);
    for (int i = 0; i < ns * nt; ++i) base[i + 1] = base[i] + P.size[i];
    value.assign(base.back(), -1);
    if (opts.iso) {
      used.resize(static_cast<std::size_t>(ns) * nt);
      for (int i = 0; i < ns * nt; ++i) used[i].assign(Q.size[i], 0);
    }
    into.resize(ns);
    for (int h = 0; h < S.nmor(); ++h) into[S.cod[h]].push_back(h);
    outof.resize(nt);
    for (int k = 0; k < T.nmor(); ++k) outof[T.dom[k]].push_back(k);
  }

  std::optional<Transformation> run() {
    if (opts.iso && P.size != Q.size) return std::nullopt;
    for (std::size_t i = 0; i < P.size.size(); ++i)
      if (P.size[i] > 0 && Q.size[i] == 0) return std::nullopt;
    if (opts.pin) {
      const auto& pin = *opts.pin;
      if (!assign(pin.c, pin.d, pin.x, pin.y)) return std::nullopt;
    }
    if (!solve(0)) return std::nullopt;
    Transformation t(static_cast<std::size_t>(ns) * nt);
    for (int i = 0; i < ns * nt; ++i) t[i].assign(value.begin() + base[i], value.begin() + base[i + 1]);
    return t;
  }

 private:
  const Profunctor& P;
  const Profunctor& Q;
  const NatSearchOptions& opts;
  int ns = 0, nt = 0;
  std::vector<int> base;
  std::vector<int> value;
  std::vector<std::vector<char>> used;
  std::vector<std::vector<int>> into, outof;
  std::vector<int> trail;
  std::size_t tries = 0;

  bool set(int cd, int x, int y, std::vector<std::array<int, 3>>& queue) {
    int& v = value[base[cd] + x];
    if (v >= 0) return v == y;
    if (opts.iso) {
      if (used[cd][y]) return false;
      used[cd][y] = 1;
    }
    v = y;
    trail.push_back(base[cd] + x);
    queue.push_back({cd, x, y});
    return true;
  }

  bool assign(int c, int d, int x, int y) {
    std::vector<std::array<int, 3>> queue;
    if (!set(c * nt + d, x, y, queue)) return false;
    while (!queue.empty()) {
      auto [cd, ex, ey] = queue.back();
      queue.pop_back();
      const int cc = cd / nt, dd = cd % nt;
      for (int h : into[cc])
        if (!set(P.source->dom[h] * nt + dd, P.act_left(h, dd, ex), Q.act_left(h, dd, ey), queue)) return false;
      for (int k : outof[dd])
        if (!set(cc * nt + P.target->cod[k], P.act_right(k, cc, ex), Q.act_right(k, cc, ey), queue)) return false;
    }
    return true;
  }

  void undo(std::size_t mark) {
    while (trail.size() > mark) {
      const int e = trail.back();
      trail.pop_back();
      if (opts.iso) {
        const int cd = static_cast<int>(std::upper_bound(base.begin(), base.end(), e) - base.begin()) - 1;
        used[cd][value[e]] = 0;
      }
      value[e] = -1;
    }
  }

  bool solve(int from) {
    int e = from;
    while (e < static_cast<int>(value.size()) && value[e] >= 0) ++e;
    if (e == static_cast<int>(value.size())) return true;
    const int cd = static_cast<int>(std::upper_bound(base.begin(), base.end(), e) - base.begin()) - 1;
    const int x = e - base[cd];
    for (int y = 0; y < Q.size[cd]; ++y) {
      if (++tries > opts.cap) throw Error(ErrorCode::SearchTooLarge, "natural transformation search exceeded its cap");
      const std::size_t mark = trail.size();
      if (assign(cd / nt, cd % nt, x, y) && solve(e + 1)) return true;
      undo(mark);
    }
    return false;
  }
};

}  // namespace

std::optional<Transformation> nat_trans_search(const Profunctor& p, const Profunctor& q,
                                               const NatSearchOptions& opts) {
  if (!same_category(p.source, q.source) || !same_category(p.target, q.target))
    throw Error(ErrorCode::BoundaryMismatch, "transformations need parallel profunctors");
  return NatSearch(p, q, opts).run();
}

std::optional<Transformation> nat_iso_search(const Profunctor& p, const Profunctor& q, std::size_t cap) {
  NatSearchOptions o;
  o.iso = true;
  o.cap = cap;
  return nat_trans_search(p, q, o);
}

bool is_natural(const Profunctor& p, const Profunctor& q, const Transformation& alpha) {
  const auto& S = *p.source;
  const auto& T = *p.target;
  const int ns = S.nobj(), nt = T.nobj();
  if (alpha.size() != static_cast<std::size_t>(ns) * nt) return false;
  for (int i = 0; i < ns * nt; ++i) {
    if (static_cast<int>(alpha[i].size()) != p.size[i]) return false;
    for (int y : alpha[i])
      if (y < 0 || y >= q.size[i]) return false;
  }
  for (int h = 0; h < S.nmor(); ++h)
    for (int d = 0; d < nt; ++d)
      for (int x = 0; x < p.count(S.cod[h], d); ++x)
        if (alpha[S.dom[h] * nt + d][p.act_left(h, d, x)] != q.act_left(h, d, alpha[S.cod[h] * nt + d][x]))
          return false;
  for (int k = 0; k < T.nmor(); ++k)
    for (int c = 0; c < ns; ++c)
      for (int x = 0; x < p.count(c, T.dom[k]); ++x)
        if (alpha[c * nt + T.cod[k]][p.act_right(k, c, x)] != q.act_right(k, c, alpha[c * nt + T.dom[k]][x]))
          return false;
  return true;
}

// ---------------------------------------------------------------- models

const LayerModel& Interpreter::layer(const std::string& id) const {
  auto it = model_.layers.find(id);
  if (it == model_.layers.end()) throw Error(ErrorCode::ModelIncomplete, "no model for layer " + id);
  return it->second;
}

int Interpreter::word_object(const std::string& id, const Word& w) const {
  const auto& lm = layer(id);
  int o = lm.cat->unit;
  for (const auto& s : w) {
    auto it = lm.objects.find(s);
    if (it == lm.objects.end()) throw Error(ErrorCode::ModelIncomplete, "no model for object " + s + " of " + id);
    o = lm.cat->tensor(o, it->second);
  }
  return o;
}

int Interpreter::internal_morphism(const InternalDiagram& d) const {
  const auto& lm = layer(d.layer);
  const auto& pres = sys_.require_layer(d.layer);
  const auto& C = *lm.cat->cat;
  int m = C.identity[word_object(d.layer, d.dom)];
  Word w = d.dom;
  for (const auto& s : d.slices) {
    auto it = lm.generators.find(s.gen);
    if (it == lm.generators.end()) throw Error(ErrorCode::ModelIncomplete, "no model for generator " + s.gen);
    const auto* g = pres.find_generator(s.gen);
    if (!g) throw Error(ErrorCode::UnknownGenerator, s.gen);
    const Word left(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(s.offset));
    const Word right(w.begin() + static_cast<std::ptrdiff_t>(s.offset + g->dom.size()), w.end());
    const int l = C.identity[word_object(d.layer, left)];
    const int r = C.identity[word_object(d.layer, right)];
    m = C.then(m, lm.cat->tensor_m(lm.cat->tensor_m(l, it->second), r));
    w = apply_slice(pres, w, s);
  }
  return m;
}

std::pair<CategoryPtr, int> Interpreter::type_point(const OmegaType& t) {
  CategoryPtr c = terminal_category();
  int o = 0;
  for (const auto& s : t) {
    const auto& lm = layer(s.layer);
    const CategoryPtr& next = lm.cat->cat;
    c = product_category(c, next);
    o = o * next->nobj() + word_object(s.layer, s.word);
  }
  return {c, o};
}

namespace {

PointedProfunctor pointed(Profunctor p, int src, int tgt, int morphism) {
  PointedProfunctor r;
  r.source_point = src;
  r.target_point = tgt;
  r.point = p.element_of(src, tgt, morphism);
  if (r.point < 0) throw Error(ErrorCode::MalformedInput, "point is not an element");
  r.prof = std::make_shared<const Profunctor>(std::move(p));
  return r;
}

}  // namespace

PointedProfunctor Interpreter::interpret(const Term& t) {
  using K = Term::Kind;
  switch (t.kind) {
    case K::Empty: return pointed_hom(terminal_category(), 0);
    case K::Id: {
      const auto& c = layer(t.layer).cat->cat;
      return pointed_hom(c, c->identity[word_object(t.layer, t.a)]);
    }
    case K::Gen: {
      if (t.layer.empty()) throw Error(ErrorCode::ModelIncomplete, "external generator " + t.name + " has no model");
      return pointed_hom(layer(t.layer).cat->cat, internal_morphism(internal_generator(sys_, t.layer, t.name)));
    }
    case K::Box: return pointed_hom(layer(t.box.layer).cat->cat, internal_morphism(t.box));
    case K::Pants:
    case K::Copants: {
      const auto& m = *layer(t.layer).cat;
      const int a = word_object(t.layer, t.a), b = word_object(t.layer, t.b);
      const int pair = a * m.cat->nobj() + b, ab = m.tensor(a, b);
      if (t.kind == K::Pants) return pointed(embed_up(tensor_functor(m)), pair, ab, m.cat->identity[ab]);
      return pointed(embed_down(tensor_functor(m)), ab, pair, m.cat->identity[ab]);
    }
    case K::Cup:
    case K::Cap: {
      const auto& m = *layer(t.layer).cat;
      const int id = m.cat->identity[m.unit];
      if (t.kind == K::Cup) return pointed(embed_up(unit_functor(m)), 0, m.unit, id);
      return pointed(embed_down(unit_functor(m)), m.unit, 0, id);
    }
    case K::Refine:
    case K::Coarsen: {
      const auto& syn = sys_.require_functor(t.functor);
      auto it = model_.functors.find(t.functor);
      if (it == model_.functors.end()) throw Error(ErrorCode::ModelIncomplete, "no model for functor " + t.functor);
      const FinFunctor& f = it->second;
      const int a = word_object(syn.source, t.a);
      const int fa = f.obj[a];
      const int id = f.target->identity[fa];
      if (t.kind == K::Refine) return pointed(embed_up(f), a, fa, id);
      return pointed(embed_down(f), fa, a, id);
    }
    case K::Sym: {
      const auto& c = layer(t.layer).cat->cat;
      const auto& d = layer(t.layer2).cat->cat;
      const int a = word_object(t.layer, t.a), b = word_object(t.layer2, t.b);
      auto s = swap_functor(c, d);
      const int to = b * c->nobj() + a;
      return pointed(embed_up(s), a * d->nobj() + b, to, s.target->identity[to]);
    }
    case K::Seq: {
      if (t.args.empty()) throw Error(ErrorCode::MalformedInput, "empty seq");
      PointedProfunctor acc = interpret(t.args[0]);
      for (std::size_t i = 1; i < t.args.size(); ++i) acc = point_compose(acc, interpret(t.args[i]));
      return acc;
    }
    case K::Par: {
      if (t.args.empty()) throw Error(ErrorCode::MalformedInput, "empty par");
      PointedProfunctor acc = interpret(t.args[0]);
      for (std::size_t i = 1; i < t.args.size(); ++i) acc = point_product(acc, interpret(t.args[i]));
      return acc;
    }
    case K::Fuse: {
      auto d = as_internal(sys_, compile(sys_, t));
      if (!d) throw Error(ErrorCode::MalformedInput, "fused term is not internal");
      return pointed_hom(layer(d->layer).cat->cat, internal_morphism(*d));
    }
  }
  throw Error(ErrorCode::MalformedInput, "unknown term");
}

ValidationReport check_model(const SystemOfLayers& sys, const OmegaModel& model) {
  ValidationReport r;
  Interpreter in(sys, model);
  for (const auto& l : sys.layers) {
    auto it = model.layers.find(l.id);
    if (it == model.layers.end() || !it->second.cat) {
      r.add("model-layer", l.id, "layer has no model");
      continue;
    }
    const auto& lm = it->second;
    for (const auto& i : validate_monoidal(*lm.cat).issues) r.add(i.kind, l.id + "/" + i.location, i.message);
    for (const auto& o : l.objects) {
      auto ot = lm.objects.find(o);
      if (ot == lm.objects.end() || ot->second < 0 || ot->second >= lm.cat->cat->nobj())
        r.add("model-object", l.id + "/" + o, "object has no valid image");
    }
    if (!r.ok()) continue;
    for (const auto& g : l.generators) {
      auto gt = lm.generators.find(g.name);
      if (gt == lm.generators.end() || gt->second < 0 || gt->second >= lm.cat->cat->nmor()) {
        r.add("model-generator", l.id + "/" + g.name, "generator has no valid image");
        continue;
      }
      const auto& C = *lm.cat->cat;
      if (C.dom[gt->second] != in.word_object(l.id, g.dom) || C.cod[gt->second] != in.word_object(l.id, g.cod))
        r.add("model-generator", l.id + "/" + g.name, "image is mistyped");
    }
  }
  if (!r.ok()) return r;
  for (const auto& l : sys.layers)
    for (const auto& e : l.equations)
      if (in.internal_morphism(e.lhs) != in.internal_morphism(e.rhs))
        r.add("model-equation", l.id + "/" + e.name, "equation fails in the model");
  for (const auto& f : sys.functors) {
    auto it = model.functors.find(f.name);
    if (it == model.functors.end()) {
      r.add("model-functor", f.name, "functor has no model");
      continue;
    }
    const FinFunctor& F = it->second;
    const auto& src = *model.layers.at(f.source).cat;
    const auto& tgt = *model.layers.at(f.target).cat;
    if (!same_category(F.source, src.cat) || !same_category(F.target, tgt.cat)) {
      r.add("model-functor", f.name, "functor does not connect the layer models");
      continue;
    }
    for (const auto& i : validate_functor(F).issues) r.add(i.kind, f.name + "/" + i.location, i.message);
    if (!r.ok()) continue;
    if (!is_strict_monoidal_functor(F, src, tgt)) r.add("model-functor", f.name, "functor is not strict monoidal");
    for (const auto& [sym, img] : f.object_map)
      if (F.obj[model.layers.at(f.source).objects.at(sym)] != in.word_object(f.target, img))
        r.add("model-functor", f.name + "/" + sym, "object image disagrees with the translation");
    for (const auto& [g, img] : f.morphism_map) {
      const int m = model.layers.at(f.source).generators.at(g);
      if (F.mor[m] != in.internal_morphism(img))
        r.add("model-functor", f.name + "/" + g, "generator image disagrees with the translation");
    }
  }
  return r;
}

// ---------------------------------------------------------------- rule checks

namespace {

// For Q o P with P and Q representable in the same direction, the morphism
// each class denotes: [h,k] -> k . G(h) for Up, [h,k] -> F(k) . h for Down.
std::optional<Transformation> representable_view(const Composite& comp) {
  const Profunctor& P = *comp.first;
  const Profunctor& Q = *comp.second;
  using R = Profunctor::Rep;
  auto kind = [](const Profunctor& x) { return x.is_hom ? R::None : x.rep; };
  R dir = kind(P) != R::None ? kind(P) : kind(Q);
  if (dir == R::None) dir = R::Up;
  auto fits = [&](const Profunctor& x) { return x.rep != R::None && (x.is_hom || x.rep == dir); };
  if (!fits(P) || !fits(Q)) return std::nullopt;
  const int na = P.source->nobj(), nb = P.target->nobj(), nc = Q.target->nobj();
  Transformation view(static_cast<std::size_t>(na) * nc);
  for (int a = 0; a < na; ++a)
    for (int c = 0; c < nc; ++c)
      for (const auto& rep : comp.reps[a * nc + c]) {
        const int h = P.label[a * nb + rep.b][rep.p];
        const int k = Q.label[rep.b * nc + c][rep.q];
        int m;
        if (dir == R::Up) m = Q.functor->target->then(Q.functor->mor[h], k);
        else m = P.functor->target->then(h, P.functor->mor[k]);
        view[a * nc + c].push_back(m);
      }
  return view;
}

}  // namespace

SemanticCheck verify_rule_semantics(const SystemOfLayers& sys, const OmegaModel& model, const RuleInstance& inst,
                                    std::size_t cap) {
  SemanticCheck out;
  if (inst.rule == "X") {
    out.reason = "the faithful window collapse is outside the profunctor semantics";
    return out;
  }
  Interpreter in(sys, model);
  const PointedProfunctor L = in.interpret(inst.lhs_term);
  const PointedProfunctor R = in.interpret(inst.rhs_term);
  if (!same_category(L.prof->source, R.prof->source) || !same_category(L.prof->target, R.prof->target) ||
      L.source_point != R.source_point || L.target_point != R.target_point) {
    out.reason = "the two sides have different semantic boundaries";
    return out;
  }
  auto search = [&](const PointedProfunctor& a, const PointedProfunctor& b) {
    NatSearchOptions o;
    o.cap = cap;
    o.pin = NatSearchOptions::Pin{a.source_point, a.target_point, a.point, b.point};
    return nat_trans_search(*a.prof, *b.prof, o);
  };
  if (!search(L, R)) {
    out.reason = "no pointed transformation from the left side to the right side";
    return out;
  }
  if (is_bidirectional(inst.rule) && !search(R, L)) {
    out.reason = "no pointed transformation from the right side to the left side";
    return out;
  }
  if (inst.rule.size() == 2 && inst.rule[0] == 'F') {
    if (!L.composite || !R.composite) {
      out.reason = "functoriality instance is not a composite of two cells";
      return out;
    }
    auto vl = representable_view(*L.composite);
    auto vr = representable_view(*R.composite);
    if (!vl || !vr) {
      out.reason = "functoriality instance is not built from representables";
      return out;
    }
    Transformation alpha(vl->size());
    for (std::size_t i = 0; i < vl->size(); ++i) {
      std::map<int, int> back;
      for (std::size_t k = 0; k < (*vr)[i].size(); ++k)
        if (!back.emplace((*vr)[i][k], static_cast<int>(k)).second) {
          out.reason = "canonical map of the right side is not injective";
          return out;
        }
      if ((*vl)[i].size() != (*vr)[i].size()) {
        out.reason = "canonical maps have different images";
        return out;
      }
      for (int m : (*vl)[i]) {
        auto it = back.find(m);
        if (it == back.end()) {
          out.reason = "canonical maps have different images";
          return out;
        }
        alpha[i].push_back(it->second);
      }
    }
    const int nt = L.prof->target->nobj();
    if (!is_natural(*L.prof, *R.prof, alpha) ||
        alpha[static_cast<std::size_t>(L.source_point) * nt + L.target_point][L.point] != R.point) {
      out.reason = "canonical witness is not a pointed natural transformation";
      return out;
    }
    out.canonical_witness_checked = true;
  }
  out.ok = true;
  return out;
}

}  // namespace layerprop
