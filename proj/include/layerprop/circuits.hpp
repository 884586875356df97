#pragma once

// Exact affine relations, the impedance calculus and the Bip, ECirc, Imp and
// GAA layers with the boxing and wrapping functors.

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "layerprop/error.hpp"
#include "layerprop/explain.hpp"
#include "layerprop/io.hpp"

namespace layerprop::circuits {

// ---------------------------------------------------------------- fields

/// Polynomial in s with rational coefficients, constant term first, no
/// trailing zeros.
class Poly {
 public:
  Poly() = default;
  Poly(int c) : Poly(mpq_class(c)) {}
  Poly(const mpq_class& c);
  explicit Poly(std::vector<mpq_class> coeffs);
  static Poly s();

  const std::vector<mpq_class>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const mpq_class& lead() const { return c_.back(); }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator-() const;
  Poly operator*(const Poly& o) const;
  Poly scaled(const mpq_class& k) const;
  bool operator==(const Poly& o) const { return c_ == o.c_; }

  /// Quotient and remainder. Throws DivisionByZero.
  static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);
  /// Monic gcd; gcd(0, 0) = 0.
  static Poly gcd(Poly a, Poly b);

  std::string to_string() const;

 private:
  std::vector<mpq_class> c_;
  void trim();
};

/// Rational function in s: gcd-reduced with a monic denominator, so equal
/// values have equal representations.
class RatFunc {
 public:
  RatFunc() : den_(1) {}
  RatFunc(int c) : RatFunc(mpq_class(c)) {}
  RatFunc(const mpq_class& c) : num_(c), den_(1) {}
  /// Throws DivisionByZero on a zero denominator.
  RatFunc(Poly num, Poly den);
  static RatFunc s() { return RatFunc(Poly::s(), Poly(1)); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }

  RatFunc operator+(const RatFunc& o) const;
  RatFunc operator-(const RatFunc& o) const;
  RatFunc operator-() const;
  RatFunc operator*(const RatFunc& o) const;
  RatFunc operator/(const RatFunc& o) const;
  bool operator==(const RatFunc& o) const { return num_ == o.num_ && den_ == o.den_; }

  std::string to_string() const;

 private:
  Poly num_, den_;
};

using Scalar = RatFunc;

/// The field with five elements, used to check elimination by enumeration.
struct GF5 {
  int v = 0;
  GF5() = default;
  GF5(int x) : v(((x % 5) + 5) % 5) {}
  GF5 operator+(GF5 o) const { return GF5(v + o.v); }
  GF5 operator-(GF5 o) const { return GF5(v - o.v); }
  GF5 operator-() const { return GF5(-v); }
  GF5 operator*(GF5 o) const { return GF5(v * o.v); }
  GF5 inverse() const;
  GF5 operator/(GF5 o) const { return *this * o.inverse(); }
  bool operator==(const GF5&) const = default;
  bool is_zero() const { return v == 0; }
  std::string to_string() const { return std::to_string(v); }
};

inline bool is_zero(const mpq_class& x) { return sgn(x) == 0; }
inline bool is_zero(const RatFunc& x) { return x.is_zero(); }
inline bool is_zero(const GF5& x) { return x.is_zero(); }
inline std::string field_string(const mpq_class& x) { return x.get_str(); }
inline std::string field_string(const RatFunc& x) { return x.to_string(); }
inline std::string field_string(const GF5& x) { return x.to_string(); }

// ---------------------------------------------------------------- relations

/// {(x, y) : A (x;y) = b} with x the n_in inputs and y the n_out outputs,
/// kept in reduced row echelon form. The empty relation is the single row
/// 0 = 1.
template <class F>
class AffineRel {
 public:
  struct Row {
    std::vector<F> a;
    F b;
    bool operator==(const Row&) const = default;
  };

  AffineRel() = default;
  AffineRel(std::size_t n_in, std::size_t n_out, std::vector<Row> rows) : in_(n_in), out_(n_out), rows_(std::move(rows)) {
    for (const auto& r : rows_)
      if (r.a.size() != in_ + out_) throw Error(ErrorCode::ArityMismatch, "row width differs from the arity");
    canonicalize();
  }

  /// The diagonal {x = y}.
  static AffineRel identity(std::size_t n) {
    std::vector<Row> rows;
    for (std::size_t k = 0; k < n; ++k) {
      Row r{std::vector<F>(2 * n, F(0)), F(0)};
      r.a[k] = F(1);
      r.a[n + k] = F(-1);
      rows.push_back(std::move(r));
    }
    return AffineRel(n, n, std::move(rows));
  }

  std::size_t n_in() const { return in_; }
  std::size_t n_out() const { return out_; }
  const std::vector<Row>& rows() const { return rows_; }
  bool is_empty() const { return rows_.size() == 1 && is_zero_row(rows_[0].a) && !is_zero(rows_[0].b); }

  bool contains(const std::vector<F>& point) const {
    if (point.size() != in_ + out_) throw Error(ErrorCode::ArityMismatch, "point width differs from the arity");
    for (const auto& r : rows_) {
      F acc(0);
      for (std::size_t k = 0; k < point.size(); ++k) acc = acc + r.a[k] * point[k];
      if (!(acc == r.b)) return false;
    }
    return true;
  }

  bool operator==(const AffineRel& o) const { return in_ == o.in_ && out_ == o.out_ && rows_ == o.rows_; }

  /// "in->out:" followed by rows "a1,a2,...=b" separated by ';'.
  std::string key() const {
    std::string s = std::to_string(in_) + "->" + std::to_string(out_) + ":";
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i) s += ";";
      for (std::size_t k = 0; k < rows_[i].a.size(); ++k) s += (k ? "," : "") + field_string(rows_[i].a[k]);
      s += "=" + field_string(rows_[i].b);
    }
    return s;
  }

 private:
  std::size_t in_ = 0, out_ = 0;
  std::vector<Row> rows_;

  static bool is_zero_row(const std::vector<F>& a) {
    for (const auto& x : a)
      if (!is_zero(x)) return false;
    return true;
  }

  void canonicalize() {
    const std::size_t n = in_ + out_;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n && rank < rows_.size(); ++col) {
      std::size_t piv = rank;
      while (piv < rows_.size() && is_zero(rows_[piv].a[col])) ++piv;
      if (piv == rows_.size()) continue;
      std::swap(rows_[rank], rows_[piv]);
      const F inv = F(1) / rows_[rank].a[col];
      for (auto& x : rows_[rank].a) x = x * inv;
      rows_[rank].b = rows_[rank].b * inv;
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (r == rank || is_zero(rows_[r].a[col])) continue;
        const F k = rows_[r].a[col];
        for (std::size_t c = 0; c < n; ++c) rows_[r].a[c] = rows_[r].a[c] - k * rows_[rank].a[c];
        rows_[r].b = rows_[r].b - k * rows_[rank].b;
      }
      ++rank;
    }
    for (std::size_t r = rank; r < rows_.size(); ++r)
      if (!is_zero(rows_[r].b)) {
        rows_ = {Row{std::vector<F>(n, F(0)), F(1)}};
        return;
      }
    rows_.resize(rank);
  }
};

/// Relational composite R ; S: eliminates the shared middle variables.
template <class F>
AffineRel<F> affine_compose(const AffineRel<F>& r, const AffineRel<F>& s) {
  if (r.n_out() != s.n_in()) throw Error(ErrorCode::ArityMismatch, "composite of relations with different middle arity");
  const std::size_t a = r.n_in(), m = r.n_out(), c = s.n_out();
  if (r.is_empty() || s.is_empty()) return AffineRel<F>(a, c, {{std::vector<F>(a + c, F(0)), F(1)}});
  // Columns: middle first so that elimination clears it, then x, then z.
  using Row = typename AffineRel<F>::Row;
  std::vector<Row> rows;
  for (const auto& row : r.rows()) {
    Row w{std::vector<F>(m + a + c, F(0)), row.b};
    for (std::size_t k = 0; k < a; ++k) w.a[m + k] = row.a[k];
    for (std::size_t k = 0; k < m; ++k) w.a[k] = row.a[a + k];
    rows.push_back(std::move(w));
  }
  for (const auto& row : s.rows()) {
    Row w{std::vector<F>(m + a + c, F(0)), row.b};
    for (std::size_t k = 0; k < m; ++k) w.a[k] = row.a[k];
    for (std::size_t k = 0; k < c; ++k) w.a[m + a + k] = row.a[m + k];
    rows.push_back(std::move(w));
  }
  const AffineRel<F> joint(m, a + c, std::move(rows));
  if (joint.is_empty()) return AffineRel<F>(a, c, {{std::vector<F>(a + c, F(0)), F(1)}});
  std::vector<Row> kept;
  for (const auto& row : joint.rows()) {
    bool free_of_middle = true;
    for (std::size_t k = 0; k < m; ++k) free_of_middle = free_of_middle && is_zero(row.a[k]);
    if (free_of_middle) kept.push_back({std::vector<F>(row.a.begin() + static_cast<std::ptrdiff_t>(m), row.a.end()), row.b});
  }
  return AffineRel<F>(a, c, std::move(kept));
}

/// Block sum: R on the first wires, S on the rest.
template <class F>
AffineRel<F> affine_tensor(const AffineRel<F>& r, const AffineRel<F>& s) {
  const std::size_t ri = r.n_in(), ro = r.n_out(), si = s.n_in(), so = s.n_out();
  const std::size_t n = ri + si + ro + so;
  using Row = typename AffineRel<F>::Row;
  std::vector<Row> rows;
  for (const auto& row : r.rows()) {
    Row w{std::vector<F>(n, F(0)), row.b};
    for (std::size_t k = 0; k < ri; ++k) w.a[k] = row.a[k];
    for (std::size_t k = 0; k < ro; ++k) w.a[ri + si + k] = row.a[ri + k];
    rows.push_back(std::move(w));
  }
  for (const auto& row : s.rows()) {
    Row w{std::vector<F>(n, F(0)), row.b};
    for (std::size_t k = 0; k < si; ++k) w.a[ri + k] = row.a[k];
    for (std::size_t k = 0; k < so; ++k) w.a[ri + si + ro + k] = row.a[si + k];
    rows.push_back(std::move(w));
  }
  return AffineRel<F>(ri + si, ro + so, std::move(rows));
}

template <class F>
bool affine_eq(const AffineRel<F>& r, const AffineRel<F>& s) {
  return r == s;
}

using AffineRelation = AffineRel<Scalar>;

// ---------------------------------------------------------------- impedances

/// An n-port impedance: a relation from the currents i_1..i_n to the
/// voltages v_1..v_n.
using Impedance = AffineRelation;

/// {v = 0} on n ports.
Impedance imp_identity(std::size_t ports = 1);
/// Series composite: shared currents, summed voltages.
Impedance imp_compose(const Impedance& z1, const Impedance& z2);
/// The scalar impedance {v = z i}.
Impedance scalar_impedance(const Scalar& z);

enum class BipoleKind { Resistor, Inductor, Capacitor, VSource, ISource };

std::string_view to_string(BipoleKind k);
BipoleKind bipole_kind(const std::string& name);

struct Bipole {
  BipoleKind kind;
  Scalar value;
  /// e.g. "resistor:2", "capacitor:1/2".
  std::string name() const;
};

/// Generators in series, left to right.
using BipoleTerm = std::vector<Bipole>;

/// Ports are (i, v) pairs; the voltage drop is positive along i_1.
AffineRelation bipole_semantics(const Bipole& g);
AffineRelation bipole_semantics(const BipoleTerm& t);
Impedance boxing_B(const Bipole& g);
Impedance boxing_B(const BipoleTerm& t);
/// {(i_1, v_1, i_2, v_2) : i_1 = i_2, (i_1, v_1 - v_2) in z}, portwise.
AffineRelation wrapping_W(const Impedance& z);

// ---------------------------------------------------------------- layers

inline constexpr const char* kBipLayer = "Bip";
inline constexpr const char* kECircLayer = "ECirc";
inline constexpr const char* kImpLayer = "Imp";
inline constexpr const char* kGaaLayer = "GAA";

struct CircuitSystem {
  SystemOfLayers sys;
  std::vector<Bipole> generators;
  /// The equation being explained and the derivation that explains it.
  EquationRef mu;
  Derivation eta;
  RuleOptions rules;
};

struct CircuitOptions {
  std::vector<Bipole> generators;
  /// The two resistances composed in series by the fixture.
  Scalar r1 = 2, r2 = 3;
  /// Replaces W; used to check that a broken square is rejected.
  AffineRelation (*wrapping)(const Impedance&) = nullptr;
};

/// Defaults: resistors r1, r2 and r1+r2, one inductor, capacitor and each
/// source. Throws SquareViolation when W(B(g)) differs from the semantics of
/// g on some generator.
CircuitSystem build_circuit_system(const CircuitOptions& opts = {});

ExplanationVerdict check_resistor_explanation(const CircuitSystem& cs);

/// Semantics of an internal diagram of any of the four layers: a bipole
/// relation for Bip and ECirc, an impedance for Imp, a relation for GAA.
AffineRelation evaluate(const CircuitSystem& cs, const InternalDiagram& d);

json scalar_to_json(const Scalar& x);
Scalar scalar_from_json(const json& j);
/// A JSON list of {"kind": ..., "value": ...}.
BipoleTerm circuit_from_json(const json& j);
json circuit_to_json(const BipoleTerm& t);
json relation_to_json(const AffineRelation& r);

}  // namespace layerprop::circuits
