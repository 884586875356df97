#include <algorithm>

#include "layerprop/error.hpp"
#include "layerprop/internal.hpp"
#include "layerprop/semantics.hpp"

namespace layerprop {

namespace {

using MonoidalPtr = std::shared_ptr<const FinMonoidalCategory>;

// A thin category is monoidal as soon as the object operation is monotone.
MonoidalPtr thin_monoidal(FinCategory c, const std::function<int(int, int)>& op, int unit) {
  auto cat = std::make_shared<const FinCategory>(std::move(c));
  FinMonoidalCategory m;
  m.cat = cat;
  m.unit = unit;
  const int n = cat->nobj(), k = cat->nmor();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m.tensor_obj.push_back(op(a, b));
  for (int f = 0; f < k; ++f)
    for (int g = 0; g < k; ++g) {
      const auto& h = cat->hom(op(cat->dom[f], cat->dom[g]), op(cat->cod[f], cat->cod[g]));
      if (h.size() != 1) throw Error(ErrorCode::MalformedInput, "operation is not monotone");
      m.tensor_mor.push_back(h[0]);
    }
  return std::make_shared<const FinMonoidalCategory>(std::move(m));
}

GeneratorDecl gen(std::string name, Word dom, Word cod) { return {std::move(name), std::move(dom), std::move(cod)}; }

InternalDiagram path(const std::string& layer, Word dom, Word cod, const std::vector<std::string>& gens) {
  InternalDiagram d{layer, std::move(dom), std::move(cod), {}};
  for (const auto& g : gens) d.slices.push_back({0, g});
  return d;
}

void add_pair(NamedModel& nm, LayerPresentation upper, LayerPresentation lower, TranslationFunctor f) {
  upper.reindex();
  lower.reindex();
  nm.sys.layers = {std::move(upper), std::move(lower)};
  nm.sys.order = {{f.source, f.target}};
  nm.sys.functors = {std::move(f)};
}

NamedModel monoid_model() {
  NamedModel nm;
  nm.name = "monoid";
  // Z/3 as a one-object category; 1 and 2 are the non-identity elements.
  auto z3 = make_category("Z3", {"*"}, {{"1", "*", "*"}, {"2", "*", "*"}},
                          {{"1", "1", "2"}, {"1", "2", "id:*"}, {"2", "1", "id:*"}, {"2", "2", "1"}});
  auto cat = std::make_shared<const FinCategory>(std::move(z3));
  FinMonoidalCategory m;
  m.cat = cat;
  m.tensor_obj = {0};
  for (int f = 0; f < 3; ++f)
    for (int g = 0; g < 3; ++g) m.tensor_mor.push_back((f + g) % 3);
  auto mc = std::make_shared<const FinMonoidalCategory>(std::move(m));

  LayerPresentation u("U"), l("L");
  u.objects = {"A"};
  u.generators = {gen("g", {"A"}, {"A"})};
  l.objects = {"B"};
  l.generators = {gen("h", {"B"}, {"B"})};
  TranslationFunctor f{"f", "U", "L", {{"A", {"B"}}}, {{"g", path("L", {"B"}, {"B"}, {"h", "h"})}}};
  add_pair(nm, std::move(u), std::move(l), std::move(f));

  nm.model.layers["U"] = LayerModel{mc, {{"A", 0}}, {{"g", 1}}};
  nm.model.layers["L"] = LayerModel{mc, {{"B", 0}}, {{"h", 1}}};
  nm.model.functors["f"] = FinFunctor{cat, cat, {0}, {0, 2, 1}};
  return nm;
}

NamedModel arrow_model() {
  NamedModel nm;
  nm.name = "arrow";
  auto mc = thin_monoidal(preorder_category("2", {"0", "1"}, [](int a, int b) { return a <= b; }),
                          [](int a, int b) { return std::max(a, b); }, 0);
  LayerPresentation u("U"), l("L");
  u.objects = {"Z", "O"};
  u.generators = {gen("u", {"Z"}, {"O"})};
  l.objects = {"z", "o"};
  l.generators = {gen("v", {"z"}, {"o"})};
  TranslationFunctor f{"f", "U", "L", {{"Z", {"z"}}, {"O", {"o"}}}, {{"u", path("L", {"z"}, {"o"}, {"v"})}}};
  add_pair(nm, std::move(u), std::move(l), std::move(f));

  const int up = mc->cat->morphism_index("0<1");
  nm.model.layers["U"] = LayerModel{mc, {{"Z", 0}, {"O", 1}}, {{"u", up}}};
  nm.model.layers["L"] = LayerModel{mc, {{"z", 0}, {"o", 1}}, {{"v", up}}};
  nm.model.functors["f"] = identity_functor(mc->cat);
  return nm;
}

NamedModel square_model() {
  NamedModel nm;
  nm.name = "square";
  // Objects xy ordered componentwise; tensor is the join.
  auto le = [](int a, int b) { return (a & b) == a; };
  auto sq = thin_monoidal(preorder_category("2x2", {"00", "01", "10", "11"}, le), [](int a, int b) { return a | b; },
                          0);
  auto ar = thin_monoidal(preorder_category("2", {"0", "1"}, [](int a, int b) { return a <= b; }),
                          [](int a, int b) { return std::max(a, b); }, 0);
  // Object index i encodes x = i >> 1, y = i & 1.
  LayerPresentation u("U"), l("L");
  u.objects = {"P", "Q", "R", "S"};
  u.generators = {gen("a", {"P"}, {"Q"}), gen("b", {"P"}, {"R"}), gen("c", {"Q"}, {"S"}), gen("d", {"R"}, {"S"})};
  u.equations = {{"comm", path("U", {"P"}, {"S"}, {"a", "c"}), path("U", {"P"}, {"S"}, {"b", "d"})}};
  l.objects = {"z", "o"};
  l.generators = {gen("v", {"z"}, {"o"})};
  TranslationFunctor f{"f",
                       "U",
                       "L",
                       {{"P", {"z"}}, {"Q", {"z"}}, {"R", {"o"}}, {"S", {"o"}}},
                       {{"a", path("L", {"z"}, {"z"}, {})},
                        {"b", path("L", {"z"}, {"o"}, {"v"})},
                        {"c", path("L", {"z"}, {"o"}, {"v"})},
                        {"d", path("L", {"o"}, {"o"}, {})}}};
  add_pair(nm, std::move(u), std::move(l), std::move(f));

  const auto& C = *sq->cat;
  auto mor = [&](const char* n) { return C.morphism_index(n); };
  nm.model.layers["U"] = LayerModel{sq,
                                    {{"P", 0}, {"Q", 1}, {"R", 2}, {"S", 3}},
                                    {{"a", mor("00<01")}, {"b", mor("00<10")}, {"c", mor("01<11")}, {"d", mor("10<11")}}};
  nm.model.layers["L"] = LayerModel{ar, {{"z", 0}, {"o", 1}}, {{"v", ar->cat->morphism_index("0<1")}}};
  FinFunctor proj{sq->cat, ar->cat, {}, {}};
  for (int o = 0; o < C.nobj(); ++o) proj.obj.push_back(o >> 1);
  for (int m = 0; m < C.nmor(); ++m) proj.mor.push_back(ar->cat->hom(C.dom[m] >> 1, C.cod[m] >> 1).at(0));
  nm.model.functors["f"] = std::move(proj);
  return nm;
}

std::vector<Word> short_words(const LayerPresentation& l) {
  std::vector<Word> out{{}};
  for (const auto& o : l.objects) out.push_back({o});
  return out;
}

}  // namespace

std::vector<NamedModel> builtin_models() { return {monoid_model(), arrow_model(), square_model()}; }

std::vector<RuleInstance> sample_instances(const NamedModel& m, const std::set<std::string>& rules) {
  const SystemOfLayers& sys = m.sys;
  std::vector<InstanceSpec> specs;
  auto want = [&](const std::string& r) { return rules.empty() || rules.count(r) != 0; };
  for (const auto& l : sys.layers) {
    const auto words = short_words(l);
    std::vector<InternalDiagram> gens;
    for (const auto& g : l.generators) gens.push_back(internal_generator(sys, l.id, g.name));
    for (const char* r : {"A1", "A2"})
      if (want(r))
        for (const auto& a : words)
          for (const auto& b : words) specs.push_back({r, "", l.id, "", "", a, b, {}, {}, {}});
    for (const char* r : {"A5", "A6"})
      if (want(r)) specs.push_back({r, "", l.id, "", "", {}, {}, {}, {}, {}});
    for (const char* r : {"F3", "F4"})
      if (want(r))
        for (const auto& s : gens)
          for (const auto& t : gens) specs.push_back({r, "", l.id, "", "", {}, {}, {}, s, t});
    for (const char* r : {"M1", "M2"}) {
      if (!want(r)) continue;
      for (const auto& a : l.objects)
        for (const auto& b : l.objects)
          for (const auto& c : l.objects) specs.push_back({r, "", l.id, "", "", {a}, {b}, {c}, {}, {}});
      const Word x{l.objects.front()}, y{l.objects.back()};
      const std::vector<std::array<Word, 3>> edge{{Word{}, x, y}, {x, Word{}, y}, {x, y, Word{}}};
      for (const auto& t : edge) specs.push_back({r, "", l.id, "", "", t[0], t[1], t[2], {}, {}});
    }
    for (const char* r : {"M3", "M4"})
      if (want(r))
        for (const char* v : {"L", "R"})
          for (const auto& a : words) specs.push_back({r, v, l.id, "", "", a, {}, {}, {}, {}});
    if (want("E"))
      for (const auto& e : l.equations) specs.push_back({"E", "", l.id, "", e.name, {}, {}, {}, {}, {}});
  }
  for (const auto& f : sys.functors) {
    const auto& src = sys.require_layer(f.source);
    const auto words = short_words(src);
    for (const char* r : {"F1", "F2"})
      if (want(r))
        for (const auto& g : src.generators)
          specs.push_back({r, "", "", f.name, "", {}, {}, {}, internal_generator(sys, src.id, g.name), {}});
    for (const char* r : {"A3", "A4"})
      if (want(r))
        for (const auto& a : words) specs.push_back({r, "", "", f.name, "", a, {}, {}, {}, {}});
    for (const char* r : {"M5", "M6"}) {
      if (!want(r)) continue;
      specs.push_back({r, "C", "", f.name, "", {}, {}, {}, {}, {}});
      for (const auto& a : words)
        for (const auto& b : words) specs.push_back({r, "P", "", f.name, "", a, b, {}, {}, {}});
    }
  }
  std::vector<RuleInstance> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.push_back(make_instance(sys, s));
  return out;
}

}  // namespace layerprop
