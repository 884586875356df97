#include "layerprop/circuits.hpp"

#include <map>
#include <set>

#include "layerprop/internal.hpp"

namespace layerprop::circuits {

// ---------------------------------------------------------------- Poly

Poly::Poly(const mpq_class& c) : c_{c} { trim(); }

Poly::Poly(std::vector<mpq_class> coeffs) : c_(std::move(coeffs)) { trim(); }

Poly Poly::s() { return Poly(std::vector<mpq_class>{0, 1}); }

void Poly::trim() {
  for (auto& x : c_) x.canonicalize();
  while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
}

Poly Poly::operator+(const Poly& o) const {
  std::vector<mpq_class> r(std::max(c_.size(), o.c_.size()), 0);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Poly(std::move(r));
}

Poly Poly::operator-() const { return scaled(-1); }

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
  if (is_zero() || o.is_zero()) return Poly();
  std::vector<mpq_class> r(c_.size() + o.c_.size() - 1, 0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Poly(std::move(r));
}

Poly Poly::scaled(const mpq_class& k) const {
  std::vector<mpq_class> r(c_);
  for (auto& x : r) x *= k;
  return Poly(std::move(r));
}

std::pair<Poly, Poly> Poly::divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw Error(ErrorCode::DivisionByZero, "polynomial division by zero");
  if (a.degree() < b.degree()) return {Poly(), a};
  std::vector<mpq_class> q(a.c_.size() - b.c_.size() + 1, 0);
  std::vector<mpq_class> r(a.c_);
  for (int d = a.degree(); d >= b.degree(); --d) {
    const mpq_class k = r[d] / b.lead();
    if (sgn(k) == 0) continue;
    q[d - b.degree()] = k;
    for (int i = 0; i <= b.degree(); ++i) r[d - b.degree() + i] -= k * b.c_[i];
  }
  return {Poly(std::move(q)), Poly(std::move(r))};
}

Poly Poly::gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  return a.scaled(mpq_class(1) / a.lead());
}

std::string Poly::to_string() const {
  if (is_zero()) return "0";
  std::string out;
  for (int d = degree(); d >= 0; --d) {
    const mpq_class& k = c_[d];
    if (sgn(k) == 0) continue;
    const mpq_class mag = abs(k);
    if (!out.empty()) out += sgn(k) < 0 ? "-" : "+";
    else if (sgn(k) < 0) out += "-";
    const bool unit = mag == 1 && d > 0;
    if (!unit) out += mag.get_str();
    if (d > 0) out += (unit ? "" : "*") + std::string("s") + (d > 1 ? "^" + std::to_string(d) : "");
  }
  return out;
}

// ---------------------------------------------------------------- RatFunc

RatFunc::RatFunc(Poly num, Poly den) {
  if (den.is_zero()) throw Error(ErrorCode::DivisionByZero, "rational function with zero denominator");
  if (num.is_zero()) {
    den_ = Poly(1);
    return;
  }
  const Poly g = Poly::gcd(num, den);
  num = Poly::divmod(num, g).first;
  den = Poly::divmod(den, g).first;
  const mpq_class k = mpq_class(1) / den.lead();
  num_ = num.scaled(k);
  den_ = den.scaled(k);
}

RatFunc RatFunc::operator+(const RatFunc& o) const { return RatFunc(num_ * o.den_ + o.num_ * den_, den_ * o.den_); }
RatFunc RatFunc::operator-(const RatFunc& o) const { return RatFunc(num_ * o.den_ - o.num_ * den_, den_ * o.den_); }
RatFunc RatFunc::operator-() const { return RatFunc(-num_, den_); }
RatFunc RatFunc::operator*(const RatFunc& o) const { return RatFunc(num_ * o.num_, den_ * o.den_); }

RatFunc RatFunc::operator/(const RatFunc& o) const {
  if (o.is_zero()) throw Error(ErrorCode::DivisionByZero, "division by the zero rational function");
  return RatFunc(num_ * o.den_, den_ * o.num_);
}

std::string RatFunc::to_string() const {
  if (den_.degree() == 0) return num_.to_string();
  return "{" + num_.to_string() + "}/{" + den_.to_string() + "}";
}

GF5 GF5::inverse() const {
  if (v == 0) throw Error(ErrorCode::DivisionByZero, "division by zero in GF(5)");
  for (int k = 1; k < 5; ++k)
    if ((v * k) % 5 == 1) return GF5(k);
  return GF5(0);
}

// ---------------------------------------------------------------- impedances

namespace {

using Row = AffineRelation::Row;

Row row(std::vector<Scalar> a, Scalar b = 0) { return Row{std::move(a), std::move(b)}; }

AffineRelation empty_relation(std::size_t in, std::size_t out) {
  return AffineRelation(in, out, {row(std::vector<Scalar>(in + out, 0), 1)});
}

}  // namespace

Impedance imp_identity(std::size_t ports) {
  std::vector<Row> rows;
  for (std::size_t k = 0; k < ports; ++k) {
    std::vector<Scalar> a(2 * ports, 0);
    a[ports + k] = 1;
    rows.push_back(row(std::move(a)));
  }
  return Impedance(ports, ports, std::move(rows));
}

Impedance imp_compose(const Impedance& z1, const Impedance& z2) {
  const std::size_t n = z1.n_in();
  if (z1.n_out() != n || z2.n_in() != n || z2.n_out() != n)
    throw Error(ErrorCode::ArityMismatch, "impedances on different numbers of ports");
  if (z1.is_empty() || z2.is_empty()) return empty_relation(n, n);
  // Variables (i, v1, v2, v): eliminate v1 and v2 with v = v1 + v2.
  std::vector<Row> rows;
  for (const auto& r : z1.rows()) {
    std::vector<Scalar> a(4 * n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = r.a[k];
      a[n + k] = r.a[n + k];
    }
    rows.push_back(row(std::move(a), r.b));
  }
  for (const auto& r : z2.rows()) {
    std::vector<Scalar> a(4 * n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = r.a[k];
      a[2 * n + k] = r.a[n + k];
    }
    rows.push_back(row(std::move(a), r.b));
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Scalar> a(4 * n, 0);
    a[n + k] = 1;
    a[2 * n + k] = 1;
    a[3 * n + k] = -1;
    rows.push_back(row(std::move(a)));
  }
  // Put the eliminated voltages first: relation (v1 v2) -> (i v), then
  // compose with nothing by reading off the rows free of them.
  std::vector<Row> reordered;
  for (auto& r : rows) {
    std::vector<Scalar> a;
    a.reserve(4 * n);
    for (std::size_t k = n; k < 3 * n; ++k) a.push_back(r.a[k]);
    for (std::size_t k = 0; k < n; ++k) a.push_back(r.a[k]);
    for (std::size_t k = 3 * n; k < 4 * n; ++k) a.push_back(r.a[k]);
    reordered.push_back(row(std::move(a), r.b));
  }
  const AffineRelation joint(2 * n, 2 * n, std::move(reordered));
  if (joint.is_empty()) return empty_relation(n, n);
  std::vector<Row> kept;
  for (const auto& r : joint.rows()) {
    bool free = true;
    for (std::size_t k = 0; k < 2 * n; ++k) free = free && r.a[k].is_zero();
    if (free) kept.push_back(row(std::vector<Scalar>(r.a.begin() + static_cast<std::ptrdiff_t>(2 * n), r.a.end()), r.b));
  }
  return Impedance(n, n, std::move(kept));
}

Impedance scalar_impedance(const Scalar& z) { return Impedance(1, 1, {row({-z, 1})}); }

std::string_view to_string(BipoleKind k) {
  switch (k) {
    case BipoleKind::Resistor: return "resistor";
    case BipoleKind::Inductor: return "inductor";
    case BipoleKind::Capacitor: return "capacitor";
    case BipoleKind::VSource: return "vsource";
    case BipoleKind::ISource: return "isource";
  }
  return "?";
}

BipoleKind bipole_kind(const std::string& name) {
  for (auto k : {BipoleKind::Resistor, BipoleKind::Inductor, BipoleKind::Capacitor, BipoleKind::VSource,
                 BipoleKind::ISource})
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::MalformedInput, "unknown bipole kind '" + name + "'");
}

std::string Bipole::name() const { return std::string(to_string(kind)) + ":" + value.to_string(); }

namespace {

// Drop across the bipole per unit current, for the three passive kinds.
Scalar passive_impedance(const Bipole& g) {
  switch (g.kind) {
    case BipoleKind::Resistor: return g.value;
    case BipoleKind::Inductor: return RatFunc::s() * g.value;
    case BipoleKind::Capacitor: return Scalar(1) / (RatFunc::s() * g.value);
    default: break;
  }
  throw Error(ErrorCode::MalformedInput, "not a passive bipole");
}

}  // namespace

AffineRelation bipole_semantics(const Bipole& g) {
  // Variables (i1, v1, i2, v2).
  std::vector<Row> rows{row({1, 0, -1, 0})};
  switch (g.kind) {
    case BipoleKind::Resistor:
    case BipoleKind::Inductor:
    case BipoleKind::Capacitor: rows.push_back(row({-passive_impedance(g), 1, 0, -1})); break;
    case BipoleKind::VSource: rows.push_back(row({0, 1, 0, -1}, g.value)); break;
    case BipoleKind::ISource: rows.push_back(row({1, 0, 0, 0}, g.value)); break;
  }
  return AffineRelation(2, 2, std::move(rows));
}

AffineRelation bipole_semantics(const BipoleTerm& t) {
  AffineRelation r = AffineRelation::identity(2);
  for (const auto& g : t) r = affine_compose(r, bipole_semantics(g));
  return r;
}

Impedance boxing_B(const Bipole& g) {
  switch (g.kind) {
    case BipoleKind::VSource: return Impedance(1, 1, {row({0, 1}, g.value)});
    case BipoleKind::ISource: return Impedance(1, 1, {row({1, 0}, g.value)});
    default: return scalar_impedance(passive_impedance(g));
  }
}

Impedance boxing_B(const BipoleTerm& t) {
  Impedance z = imp_identity();
  for (const auto& g : t) z = imp_compose(z, boxing_B(g));
  return z;
}

AffineRelation wrapping_W(const Impedance& z) {
  const std::size_t n = z.n_in();
  if (z.n_out() != n) throw Error(ErrorCode::ArityMismatch, "impedance with unequal port counts");
  if (z.is_empty()) return empty_relation(2 * n, 2 * n);
  // Port k has inputs (i1, v1) at 2k, 2k+1 and outputs (i2, v2) at 2n+2k, 2n+2k+1.
  std::vector<Row> rows;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Scalar> a(4 * n, 0);
    a[2 * k] = 1;
    a[2 * n + 2 * k] = -1;
    rows.push_back(row(std::move(a)));
  }
  for (const auto& r : z.rows()) {
    std::vector<Scalar> a(4 * n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      a[2 * k] = r.a[k];
      a[2 * k + 1] = r.a[n + k];
      a[2 * n + 2 * k + 1] = -r.a[n + k];
    }
    rows.push_back(row(std::move(a), r.b));
  }
  return AffineRelation(2 * n, 2 * n, std::move(rows));
}

// ---------------------------------------------------------------- layers

namespace {

std::string rows_key(const AffineRelation& r) {
  const std::string k = r.key();
  return k.substr(k.find(':') + 1);
}

std::string imp_name(const Impedance& z) { return "z<" + rows_key(z) + ">"; }
std::string gaa_name(const AffineRelation& r) { return "aff<" + rows_key(r) + ">"; }

InternalDiagram single(const std::string& layer, const Word& dom, const Word& cod, const std::string& gen) {
  return InternalDiagram{layer, dom, cod, {{0, gen}}};
}

InternalDiagram chain(const std::string& layer, const std::string& obj, const std::vector<std::string>& gens) {
  InternalDiagram d{layer, {obj}, {obj}, {}};
  for (const auto& g : gens) d.slices.push_back({0, g});
  return d;
}

std::vector<Bipole> default_generators(const Scalar& r1, const Scalar& r2) {
  return {{BipoleKind::Resistor, r1}, {BipoleKind::Resistor, r2}, {BipoleKind::Resistor, r1 + r2},
          {BipoleKind::Inductor, 1},  {BipoleKind::Capacitor, 1}, {BipoleKind::VSource, 1},
          {BipoleKind::ISource, 1}};
}

}  // namespace

AffineRelation evaluate(const CircuitSystem& cs, const InternalDiagram& d) {
  const auto& layer = cs.sys.require_layer(d.layer);
  const bool imp = d.layer == kImpLayer;
  const bool gaa = d.layer == kGaaLayer;
  // Wires per object: bipoles carry (i, v), impedances and GAA one each.
  const std::size_t width = imp || gaa ? 1 : 2;
  std::map<std::string, AffineRelation> sem;
  for (const auto& g : cs.generators) {
    if (imp) sem.emplace(imp_name(boxing_B(g)), boxing_B(g));
    else if (gaa) sem.emplace(gaa_name(bipole_semantics(g)), bipole_semantics(g));
    else sem.emplace(g.name(), bipole_semantics(g));
  }
  if (gaa)
    for (const auto& g : layer.generators)
      if (!sem.count(g.name)) throw Error(ErrorCode::ModelIncomplete, "no relation for " + g.name);
  auto ident = [&](std::size_t objs) {
    return imp ? imp_identity(objs) : AffineRelation::identity(objs * width);
  };
  AffineRelation acc = ident(d.dom.size());
  Word cur = d.dom;
  for (const auto& s : d.slices) {
    const auto* g = layer.find_generator(s.gen);
    if (!g) throw Error(ErrorCode::UnknownGenerator, s.gen);
    auto it = sem.find(s.gen);
    if (it == sem.end()) throw Error(ErrorCode::ModelIncomplete, "no relation for " + s.gen);
    const std::size_t right = cur.size() - s.offset - g->dom.size();
    if (g->dom.size() != g->cod.size() && imp) throw Error(ErrorCode::ArityMismatch, "impedance generators are 1 -> 1");
    AffineRelation step = affine_tensor(affine_tensor(ident(s.offset), it->second), ident(right));
    acc = imp ? imp_compose(acc, step) : affine_compose(acc, step);
    cur = apply_slice(layer, cur, s);
  }
  return acc;
}

CircuitSystem build_circuit_system(const CircuitOptions& opts) {
  CircuitSystem cs;
  const auto wrap = opts.wrapping ? opts.wrapping : &wrapping_W;
  std::vector<Bipole> gens = opts.generators.empty() ? default_generators(opts.r1, opts.r2) : opts.generators;
  std::set<std::string> seen;
  for (const auto& g : gens)
    if (seen.insert(g.name()).second) cs.generators.push_back(g);

  for (const auto& g : cs.generators)
    if (!affine_eq(wrap(boxing_B(g)), bipole_semantics(g)))
      throw Error(ErrorCode::SquareViolation, "W(B(" + g.name() + ")) differs from its circuit semantics");

  LayerPresentation bip(kBipLayer), ecirc(kECircLayer), imp(kImpLayer), gaa(kGaaLayer);
  bip.objects = ecirc.objects = {"w"};
  imp.objects = {"p"};
  gaa.objects = {"x"};
  TranslationFunctor incl{"incl", kBipLayer, kECircLayer, {{"w", {"w"}}}, {}};
  TranslationFunctor B{"B", kBipLayer, kImpLayer, {{"w", {"p"}}}, {}};
  TranslationFunctor W{"W", kImpLayer, kGaaLayer, {{"p", {"x", "x"}}}, {}};
  TranslationFunctor I{"I", kECircLayer, kGaaLayer, {{"w", {"x", "x"}}}, {}};
  TranslationFunctor WB{"WB", kBipLayer, kGaaLayer, {{"w", {"x", "x"}}}, {}};
  std::set<std::string> imp_seen, gaa_seen;
  const Word xx{"x", "x"};
  for (const auto& g : cs.generators) {
    const std::string n = g.name();
    bip.generators.push_back({n, {"w"}, {"w"}});
    ecirc.generators.push_back({n, {"w"}, {"w"}});
    const Impedance z = boxing_B(g);
    const std::string zn = imp_name(z);
    if (imp_seen.insert(zn).second) {
      imp.generators.push_back({zn, {"p"}, {"p"}});
      W.morphism_map[zn] = single(kGaaLayer, xx, xx, gaa_name(wrap(z)));
    }
    const std::string an = gaa_name(bipole_semantics(g));
    if (gaa_seen.insert(an).second) gaa.generators.push_back({an, xx, xx});
    incl.morphism_map[n] = single(kECircLayer, {"w"}, {"w"}, n);
    B.morphism_map[n] = single(kImpLayer, {"p"}, {"p"}, zn);
    I.morphism_map[n] = single(kGaaLayer, xx, xx, an);
    WB.morphism_map[n] = single(kGaaLayer, xx, xx, an);
  }

  const Bipole a{BipoleKind::Resistor, opts.r1}, b{BipoleKind::Resistor, opts.r2}, c{BipoleKind::Resistor, opts.r1 + opts.r2};
  for (const auto& g : {a, b, c})
    if (!seen.count(g.name())) throw Error(ErrorCode::FixtureInvalid, "missing generator " + g.name());
  bip.equations.push_back({"series", chain(kBipLayer, "w", {a.name(), b.name()}), chain(kBipLayer, "w", {c.name()})});
  ecirc.equations.push_back(
      {"series", chain(kECircLayer, "w", {a.name(), b.name()}), chain(kECircLayer, "w", {c.name()})});
  imp.equations.push_back({"imp-comp", chain(kImpLayer, "p", {imp_name(boxing_B(a)), imp_name(boxing_B(b))}),
                           chain(kImpLayer, "p", {imp_name(boxing_B(c))})});

  for (auto* l : {&bip, &ecirc, &imp, &gaa}) l->reindex();
  cs.sys.layers = {std::move(bip), std::move(ecirc), std::move(imp), std::move(gaa)};
  cs.sys.functors = {std::move(incl), std::move(B), std::move(W), std::move(I), std::move(WB)};
  cs.sys.order = {{kBipLayer, kECircLayer}, {kBipLayer, kImpLayer}, {kECircLayer, kGaaLayer}, {kImpLayer, kGaaLayer}};
  const auto rep = validate_system(cs.sys);
  if (!rep.ok()) {
    const auto& issue = rep.issues.front();
    const auto code = issue.location.rfind("closure:", 0) == 0 ? ErrorCode::SquareViolation : ErrorCode::FixtureInvalid;
    throw Error(code, "circuit system: " + issue.location + ": " + issue.message);
  }
  for (const auto& l : cs.sys.layers)
    for (const auto& e : l.equations)
      if (!affine_eq(evaluate(cs, e.lhs), evaluate(cs, e.rhs)))
        throw Error(ErrorCode::FixtureInvalid, "equation " + l.id + "/" + e.name + " does not hold");

  // B is faithful because the square commutes and I is faithful.
  cs.rules.faithful_functors = {"B", "I"};
  cs.mu = {kBipLayer, "series"};

  // Search with only the impedance law available, so the derivation passes
  // through Imp as in the impedance calculus.
  SystemOfLayers restricted = cs.sys;
  for (auto& l : restricted.layers)
    if (l.id != kImpLayer) l.equations.clear();
  SearchOptions so;
  so.budget = 5;
  so.rules = cs.rules;
  so.rules.faithful_functors = {"B"};
  const auto& eq = cs.sys.require_layer(kBipLayer).equations.front();
  const auto res = find_derivation(restricted, box_diagram(eq.lhs), box_diagram(eq.rhs), so);
  if (res.status != SearchStatus::Found || !res.derivation)
    throw Error(ErrorCode::FixtureInvalid, "no derivation of the series law through Imp");
  cs.eta = *res.derivation;
  return cs;
}

ExplanationVerdict check_resistor_explanation(const CircuitSystem& cs) {
  return check_explanation_2(cs.sys, cs.eta, cs.mu, cs.rules);
}

// ---------------------------------------------------------------- JSON

namespace {

json rational_to_json(const mpq_class& q) {
  if (q.get_den() == 1 && q.get_num().fits_slong_p()) return q.get_num().get_si();
  return q.get_str();
}

mpq_class rational_from_json(const json& j) {
  if (j.is_number_integer()) return mpq_class(j.get<long>());
  if (j.is_string()) {
    mpq_class q;
    if (q.set_str(j.get<std::string>(), 10) != 0 || q.get_den() == 0)
      throw Error(ErrorCode::MalformedInput, "bad rational '" + j.get<std::string>() + "'");
    q.canonicalize();
    return q;
  }
  throw Error(ErrorCode::MalformedInput, "a rational must be an integer or a \"p/q\" string");
}

json poly_to_json(const Poly& p) {
  json a = json::array();
  for (const auto& c : p.coeffs()) a.push_back(rational_to_json(c));
  return a;
}

Poly poly_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::MalformedInput, "polynomial coefficients must be a list");
  std::vector<mpq_class> c;
  for (const auto& x : j) c.push_back(rational_from_json(x));
  return Poly(std::move(c));
}

}  // namespace

json scalar_to_json(const Scalar& x) {
  if (x.is_constant()) return rational_to_json(x.num().is_zero() ? mpq_class(0) : x.num().coeffs().front());
  return {{"s_poly_num", poly_to_json(x.num())}, {"s_poly_den", poly_to_json(x.den())}};
}

Scalar scalar_from_json(const json& j) {
  if (j.is_object()) {
    if (!j.contains("s_poly_num")) throw Error(ErrorCode::MalformedInput, "rational function needs s_poly_num");
    const Poly den = j.contains("s_poly_den") ? poly_from_json(j.at("s_poly_den")) : Poly(1);
    return RatFunc(poly_from_json(j.at("s_poly_num")), den);
  }
  return Scalar(rational_from_json(j));
}

BipoleTerm circuit_from_json(const json& j) {
  const json& list = j.is_object() && j.contains("bipoles") ? j.at("bipoles") : j;
  if (!list.is_array()) throw Error(ErrorCode::MalformedInput, "a circuit is a list of bipoles");
  BipoleTerm t;
  for (const auto& e : list) {
    if (!e.is_object() || !e.contains("kind") || !e.contains("value"))
      throw Error(ErrorCode::MalformedInput, "a bipole needs kind and value");
    t.push_back({bipole_kind(e.at("kind").get<std::string>()), scalar_from_json(e.at("value"))});
    if (t.back().kind == BipoleKind::Capacitor && t.back().value.is_zero())
      throw Error(ErrorCode::DivisionByZero, "capacitor with zero capacitance");
  }
  return t;
}

json circuit_to_json(const BipoleTerm& t) {
  json a = json::array();
  for (const auto& g : t) a.push_back({{"kind", std::string(to_string(g.kind))}, {"value", scalar_to_json(g.value)}});
  return a;
}

json relation_to_json(const AffineRelation& r) {
  json rows = json::array();
  for (const auto& row : r.rows()) {
    json a = json::array();
    for (const auto& x : row.a) a.push_back(x.to_string());
    rows.push_back({{"a", a}, {"b", row.b.to_string()}});
  }
  return {{"n_in", r.n_in()}, {"n_out", r.n_out()}, {"empty", r.is_empty()}, {"rows", rows}};
}

}  // namespace layerprop::circuits
