#include "layerprop/theory.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "layerprop/error.hpp"
#include "layerprop/internal.hpp"

namespace layerprop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::UnknownLayer: return "UnknownLayer";
    case ErrorCode::UnknownFunctor: return "UnknownFunctor";
    case ErrorCode::SortMismatch: return "SortMismatch";
    case ErrorCode::SideConditionViolation: return "SideConditionViolation";
    case ErrorCode::StaleMatch: return "StaleMatch";
    case ErrorCode::InvalidDerivation: return "InvalidDerivation";
    case ErrorCode::BoundaryMismatch: return "BoundaryMismatch";
    case ErrorCode::ModelIncomplete: return "ModelIncomplete";
    case ErrorCode::SearchTooLarge: return "SearchTooLarge";
    case ErrorCode::VariableNotFresh: return "VariableNotFresh";
    case ErrorCode::VariableAbsent: return "VariableAbsent";
    case ErrorCode::VariableMultiple: return "VariableMultiple";
    case ErrorCode::FixtureInvalid: return "FixtureInvalid";
    case ErrorCode::SquareViolation: return "SquareViolation";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
  }
  return "Unknown";
}

void LayerPresentation::add_object(const Symbol& s) {
  if (object_index_.count(s)) return;
  object_index_[s] = objects.size();
  objects.push_back(s);
}

void LayerPresentation::add_generator(GeneratorDecl g) {
  generator_index_.emplace(g.name, generators.size());
  generators.push_back(std::move(g));
}

const GeneratorDecl* LayerPresentation::find_generator(const std::string& name) const {
  auto it = generator_index_.find(name);
  return it == generator_index_.end() ? nullptr : &generators[it->second];
}

void LayerPresentation::reindex() {
  object_index_.clear();
  generator_index_.clear();
  for (std::size_t i = 0; i < objects.size(); ++i) object_index_.emplace(objects[i], i);
  for (std::size_t i = 0; i < generators.size(); ++i) generator_index_.emplace(generators[i].name, i);
}

bool is_internal(const SignatureEntry& gen) {
  return gen.arity.size() == 1 && gen.coarity.size() == 1 &&
         gen.arity[0].layer == gen.coarity[0].layer;
}

const LayerPresentation* SystemOfLayers::layer(const std::string& id) const {
  for (const auto& l : layers)
    if (l.id == id) return &l;
  return nullptr;
}

const LayerPresentation& SystemOfLayers::require_layer(const std::string& id) const {
  const auto* l = layer(id);
  if (!l) throw Error(ErrorCode::UnknownLayer, "layer '" + id + "'");
  return *l;
}

LayerPresentation* SystemOfLayers::mutable_layer(const std::string& id) {
  for (auto& l : layers)
    if (l.id == id) return &l;
  return nullptr;
}

const TranslationFunctor* SystemOfLayers::functor(const std::string& name) const {
  for (const auto& f : functors)
    if (f.name == name) return &f;
  return nullptr;
}

const TranslationFunctor& SystemOfLayers::require_functor(const std::string& name) const {
  const auto* f = functor(name);
  if (!f) throw Error(ErrorCode::UnknownFunctor, "functor '" + name + "'");
  return *f;
}

const TranslationFunctor* SystemOfLayers::functor_between(const std::string& source,
                                                          const std::string& target) const {
  for (const auto& f : functors)
    if (f.source == source && f.target == target) return &f;
  return nullptr;
}

std::vector<const TranslationFunctor*> SystemOfLayers::functors_from(const std::string& l) const {
  std::vector<const TranslationFunctor*> out;
  for (const auto& f : functors)
    if (f.source == l) out.push_back(&f);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->name < b->name; });
  return out;
}

std::vector<const TranslationFunctor*> SystemOfLayers::functors_into(const std::string& l) const {
  std::vector<const TranslationFunctor*> out;
  for (const auto& f : functors)
    if (f.target == l) out.push_back(&f);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->name < b->name; });
  return out;
}

const SignatureEntry* SystemOfLayers::external_generator(const std::string& name) const {
  for (const auto& e : external)
    if (e.name == name) return &e;
  return nullptr;
}

bool SystemOfLayers::below(const std::string& lower, const std::string& upper) const {
  std::set<std::string> seen;
  std::vector<std::string> stack{upper};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    for (const auto& [hi, lo] : order) {
      if (hi != cur || seen.count(lo)) continue;
      if (lo == lower) return true;
      seen.insert(lo);
      stack.push_back(lo);
    }
  }
  return false;
}

bool ValidationReport::has(const std::string& kind) const {
  return std::any_of(issues.begin(), issues.end(), [&](const Issue& i) { return i.kind == kind; });
}

Word translate_word(const TranslationFunctor& f, const Word& w) {
  Word out;
  for (const auto& s : w) {
    auto it = f.object_map.find(s);
    if (it == f.object_map.end()) {
      throw Error(ErrorCode::UnknownSymbol, "object '" + s + "' not in domain of functor " + f.name);
    }
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

TranslationFunctor compose_functors(const SystemOfLayers& sys, const TranslationFunctor& f,
                                    const TranslationFunctor& g, std::string name) {
  if (f.target != g.source) {
    throw Error(ErrorCode::SortMismatch, "functors " + f.name + " and " + g.name + " do not compose");
  }
  TranslationFunctor h{std::move(name), f.source, g.target, {}, {}};
  for (const auto& [obj, img] : f.object_map) h.object_map[obj] = translate_word(g, img);
  for (const auto& [gen, img] : f.morphism_map) h.morphism_map[gen] = translate_internal(sys, g, img);
  return h;
}

std::string word_to_string(const Word& w) {
  if (w.empty()) return "[]";
  std::string out = "[";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += w[i];
  }
  return out + "]";
}

std::string sheet_to_string(const SheetType& s) { return s.layer + ":" + word_to_string(s.word); }

std::string type_to_string(const OmegaType& t) {
  if (t.empty()) return "()";
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += "; ";
    out += sheet_to_string(t[i]);
  }
  return out + ")";
}

namespace {

void check_word(const LayerPresentation& layer, const Word& w, const std::string& where,
                ValidationReport& rep) {
  for (const auto& s : w) {
    if (!layer.has_object(s)) rep.add("undeclared-symbol", where, "symbol '" + s + "' not in layer " + layer.id);
  }
}

void check_diagram(const SystemOfLayers& sys, const InternalDiagram& d, const std::string& where,
                   ValidationReport& rep) {
  try {
    check_internal(sys, d);
  } catch (const Error& e) {
    rep.add("ill-typed-diagram", where, e.what());
  }
}

}  // namespace

ValidationReport validate_system(const SystemOfLayers& sys) {
  ValidationReport rep;
  std::set<std::string> ids;
  for (const auto& l : sys.layers) {
    if (l.id.empty()) rep.add("empty-layer-id", "layers", "layer with empty id");
    if (!ids.insert(l.id).second) rep.add("duplicate-layer", l.id, "layer declared twice");
    std::set<std::string> objs;
    for (const auto& o : l.objects) {
      if (!objs.insert(o).second) rep.add("duplicate-object", l.id + "/" + o, "object declared twice");
    }
    std::set<std::string> gens;
    for (const auto& g : l.generators) {
      const std::string where = l.id + "/" + g.name;
      if (!gens.insert(g.name).second) rep.add("duplicate-generator", where, "generator name not unique");
      check_word(l, g.dom, where, rep);
      check_word(l, g.cod, where, rep);
    }
    for (const auto& eq : l.equations) {
      const std::string where = l.id + "/eq:" + eq.name;
      if (eq.lhs.layer != l.id || eq.rhs.layer != l.id) {
        rep.add("equation-layer", where, "equation sides must live in their layer");
        continue;
      }
      check_diagram(sys, eq.lhs, where + "/lhs", rep);
      check_diagram(sys, eq.rhs, where + "/rhs", rep);
      if (eq.lhs.dom != eq.rhs.dom || eq.lhs.cod != eq.rhs.cod) {
        rep.add("equation-sort", where, "lhs and rhs have different boundaries");
      }
    }
  }

  std::set<std::string> fnames;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& f : sys.functors) {
    const std::string where = "functor:" + f.name;
    if (!fnames.insert(f.name).second) rep.add("duplicate-functor", where, "functor name not unique");
    const auto* src = sys.layer(f.source);
    const auto* tgt = sys.layer(f.target);
    if (!src || !tgt) {
      rep.add("unknown-layer", where, "source or target layer missing");
      continue;
    }
    if (f.source == f.target) rep.add("order", where, "functor from a layer to itself");
    if (!pairs.insert({f.source, f.target}).second) {
      rep.add("posetality", where, "more than one functor " + f.source + " -> " + f.target);
    }
    for (const auto& o : src->objects) {
      auto it = f.object_map.find(o);
      if (it == f.object_map.end()) {
        rep.add("object-map-coverage", where + "/" + o, "no image for object");
        continue;
      }
      check_word(*tgt, it->second, where + "/" + o, rep);
    }
    for (const auto& [o, img] : f.object_map) {
      (void)img;
      if (!src->has_object(o)) rep.add("undeclared-symbol", where + "/" + o, "mapped object not in source");
    }
    for (const auto& g : src->generators) {
      auto it = f.morphism_map.find(g.name);
      const std::string gw = where + "/" + g.name;
      if (it == f.morphism_map.end()) {
        rep.add("morphism-map-coverage", gw, "no image for generator");
        continue;
      }
      if (it->second.layer != f.target) {
        rep.add("morphism-map-typing", gw, "image not in target layer");
        continue;
      }
      check_diagram(sys, it->second, gw, rep);
      try {
        if (it->second.dom != translate_word(f, g.dom) || it->second.cod != translate_word(f, g.cod)) {
          rep.add("morphism-map-typing", gw, "image boundary differs from translated generator sort");
        }
      } catch (const Error& e) {
        rep.add("morphism-map-typing", gw, e.what());
      }
    }
  }

  for (const auto& [hi, lo] : sys.order) {
    if (!sys.layer(hi) || !sys.layer(lo)) rep.add("unknown-layer", "order:" + hi + ">" + lo, "layer missing");
  }
  for (const auto& l : sys.layers) {
    if (sys.below(l.id, l.id)) rep.add("order", "order:" + l.id, "order has a cycle through " + l.id);
  }
  for (const auto& f : sys.functors) {
    if (f.source != f.target && !sys.below(f.target, f.source)) {
      rep.add("order", "functor:" + f.name, f.target + " is not below " + f.source + " in the order");
    }
  }
  for (const auto& hi : sys.layers) {
    for (const auto& lo : sys.layers) {
      if (hi.id == lo.id || !sys.below(lo.id, hi.id)) continue;
      if (!sys.functor_between(hi.id, lo.id)) {
        rep.add("order", "order:" + hi.id + ">" + lo.id, "no functor for order relation");
      }
    }
  }

  if (!rep.ok()) return rep;

  // Composition closure, compared generator-wise on canonical forms.
  for (const auto& f : sys.functors) {
    for (const auto& g : sys.functors) {
      if (f.target != g.source || f.source == g.target) continue;
      const auto* h = sys.functor_between(f.source, g.target);
      const std::string where = "closure:" + g.name + "." + f.name;
      if (!h) {
        rep.add("composition-closure", where, "composite functor missing");
        continue;
      }
      const auto& src = sys.require_layer(f.source);
      for (const auto& o : src.objects) {
        if (translate_word(g, translate_word(f, {o})) != translate_word(*h, {o})) {
          rep.add("composition-closure", where + "/" + o, "object images disagree with " + h->name);
        }
      }
      for (const auto& gen : src.generators) {
        auto composite = translate_internal(sys, g, f.morphism_map.at(gen.name));
        if (!internal_equal(sys, composite, h->morphism_map.at(gen.name))) {
          rep.add("composition-closure", where + "/" + gen.name, "generator image disagrees with " + h->name);
        }
      }
    }
  }
  return rep;
}

}  // namespace layerprop
