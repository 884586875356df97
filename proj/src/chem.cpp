#include "layerprop/chem.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "layerprop/error.hpp"
#include "layerprop/internal.hpp"

namespace layerprop::chem {

ValenceTable ValenceTable::defaults() {
  ValenceTable t;
  t.valence = {{"H", 1},  {"Li", 1}, {"Na", 1}, {"K", 1},  {"Be", 2}, {"Mg", 2}, {"Ca", 2}, {"B", 3},
               {"Al", 3}, {"C", 4},  {"Si", 4}, {"N", 3},  {"P", 5},  {"As", 3}, {"O", 2},  {"S", 2},
               {"Se", 2}, {"F", 1},  {"Cl", 1}, {"Br", 1}, {"I", 1},  {"+", 1},  {"-", 1}};
  return t;
}

int ValenceTable::of(const NodeType& t) const {
  if (t.is_var) return 1;
  auto it = valence.find(t.symbol);
  return it == valence.end() ? -1 : it->second;
}

// ---------------------------------------------------------------- graphs

int MoleculePartition::add_vertex(NodeType t, std::string id) {
  const std::size_t n = types_.size();
  std::vector<int> next((n + 1) * (n + 1), 0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) next[a * (n + 1) + b] = adj_[a * n + b];
  adj_ = std::move(next);
  if (id.empty()) id = "v" + std::to_string(n);
  types_.push_back(std::move(t));
  ids_.push_back(std::move(id));
  return static_cast<int>(n);
}

void MoleculePartition::bond(int a, int b, int mult) {
  const int n = size();
  if (a < 0 || b < 0 || a >= n || b >= n) throw Error(ErrorCode::MalformedInput, "bond endpoint out of range");
  adj_[static_cast<std::size_t>(a) * n + b] += mult;
  if (a != b) adj_[static_cast<std::size_t>(b) * n + a] += mult;
}

int MoleculePartition::degree(int v) const {
  int d = 0;
  for (int u = 0; u < size(); ++u) d += mult(u, v);
  return d;
}

int MoleculePartition::count_var(const std::string& name) const {
  return static_cast<int>(std::count(types_.begin(), types_.end(), NodeType::var(name)));
}

bool MoleculePartition::has_var(const std::string& name) const { return count_var(name) > 0; }

MoleculePartition MoleculePartition::from_matrix(std::vector<NodeType> types, const std::vector<std::vector<int>>& m) {
  MoleculePartition p;
  const std::size_t n = types.size();
  if (m.size() != n) throw Error(ErrorCode::MalformedInput, "matrix size differs from vertex count");
  for (auto& t : types) p.add_vertex(std::move(t));
  for (std::size_t a = 0; a < n; ++a) {
    if (m[a].size() != n) throw Error(ErrorCode::MalformedInput, "matrix is not square");
    for (std::size_t b = 0; b < n; ++b) p.adj_[a * n + b] = m[a][b];
  }
  return p;
}

namespace {

std::vector<int> component(const MoleculePartition& m, int start, int cut_a = -1, int cut_b = -1) {
  std::vector<char> seen(m.size(), 0);
  std::vector<int> stack{start}, out;
  seen[start] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    out.push_back(v);
    for (int u = 0; u < m.size(); ++u) {
      if (seen[u] || m.mult(v, u) == 0) continue;
      if ((v == cut_a && u == cut_b) || (v == cut_b && u == cut_a)) continue;
      seen[u] = 1;
      stack.push_back(u);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ValidationReport validate_partition(const MoleculePartition& m, const ValenceTable& vt) {
  ValidationReport r;
  const int n = m.size();
  if (n == 0) {
    r.add("empty", "partition", "no vertices");
    return r;
  }
  for (int v = 0; v < n; ++v) {
    const std::string at = m.id(v);
    if (m.mult(v, v) != 0) r.add("irreflexive", at, "vertex bonded to itself");
    for (int u = v + 1; u < n; ++u) {
      if (m.mult(u, v) != m.mult(v, u)) r.add("symmetric", at + "," + m.id(u), "multiplicity is not symmetric");
      if (m.mult(u, v) < 0 || m.mult(v, u) < 0) r.add("multiplicity", at + "," + m.id(u), "negative multiplicity");
    }
    const int want = vt.of(m.type(v));
    if (want < 0) {
      r.add("unknown-atom", at, "no valence for " + m.type(v).symbol);
      continue;
    }
    int sum = 0;
    for (int u = 0; u < n; ++u) sum += m.mult(u, v);
    if (sum != want)
      r.add("valence", at,
            m.type(v).to_string() + " has bond order " + std::to_string(sum) + ", expected " + std::to_string(want));
  }
  if (static_cast<int>(component(m, 0).size()) != n) r.add("connected", "partition", "multigraph is not connected");
  return r;
}

bool is_molecule(const MoleculePartition& m, const ValenceTable& vt) {
  if (!validate_partition(m, vt).ok()) return false;
  for (int v = 0; v < m.size(); ++v)
    if (m.type(v).is_var) return false;
  return true;
}

// ---------------------------------------------------------------- canonical form

namespace {

class Canonicalizer {
 public:
  explicit Canonicalizer(const MoleculePartition& m) : m_(m), n_(m.size()) {
    std::vector<std::string> names;
    for (int v = 0; v < n_; ++v) names.push_back(m.type(v).to_string());
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> color(n_);
    for (int v = 0; v < n_; ++v)
      color[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), names[v]) - sorted.begin());
    type_names_ = names;
    search(refine(color));
  }

  CanonicalLabel result() const { return {best_order_, best_key_}; }

 private:
  const MoleculePartition& m_;
  int n_;
  std::vector<std::string> type_names_;
  std::vector<int> best_order_;
  std::string best_key_;
  bool have_best_ = false;

  // Ranks vertices by (colour, multiset of neighbour colours and multiplicities)
  // until stable. Colour values stay in the order of the previous colouring.
  std::vector<int> refine(std::vector<int> color) const {
    int classes = -1;
    while (true) {
      using Key = std::pair<int, std::vector<std::pair<int, int>>>;
      std::vector<Key> keys(n_);
      for (int v = 0; v < n_; ++v) {
        keys[v].first = color[v];
        for (int u = 0; u < n_; ++u)
          if (m_.mult(u, v) != 0) keys[v].second.push_back({color[u], m_.mult(u, v)});
        std::sort(keys[v].second.begin(), keys[v].second.end());
      }
      std::vector<Key> sorted = keys;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (int v = 0; v < n_; ++v)
        color[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[v]) - sorted.begin());
      if (static_cast<int>(sorted.size()) == classes) return color;
      classes = static_cast<int>(sorted.size());
    }
  }

  bool twins(int a, int b) const {
    if (!(m_.type(a) == m_.type(b))) return false;
    for (int x = 0; x < n_; ++x)
      if (x != a && x != b && m_.mult(a, x) != m_.mult(b, x)) return false;
    return true;
  }

  void leaf(const std::vector<int>& color) {
    std::vector<int> order(n_);
    for (int v = 0; v < n_; ++v) order[color[v]] = v;
    std::string key;
    for (int v : order) key += type_names_[v] + ",";
    key += ";";
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        const int k = m_.mult(order[i], order[j]);
        if (k != 0) key += std::to_string(i) + "-" + std::to_string(j) + "x" + std::to_string(k) + ",";
      }
    if (!have_best_ || key < best_key_) {
      best_key_ = std::move(key);
      best_order_ = std::move(order);
      have_best_ = true;
    }
  }

  void search(const std::vector<int>& color) {
    std::vector<int> cell_size(n_, 0);
    for (int c : color) ++cell_size[c];
    int target = -1;
    for (int c = 0; c < n_; ++c)
      if (cell_size[c] > 1) {
        target = c;
        break;
      }
    if (target < 0) {
      leaf(color);
      return;
    }
    std::vector<int> tried;
    for (int v = 0; v < n_; ++v) {
      if (color[v] != target) continue;
      if (std::any_of(tried.begin(), tried.end(), [&](int w) { return twins(v, w); })) continue;
      tried.push_back(v);
      std::vector<int> next(n_);
      for (int u = 0; u < n_; ++u) next[u] = 2 * color[u] + (u == v ? 0 : 1);
      search(refine(std::move(next)));
    }
  }
};

}  // namespace

CanonicalLabel canonical_label(const MoleculePartition& m) {
  if (m.size() == 0) return {{}, ";"};
  return Canonicalizer(m).result();
}

bool isomorphic(const MoleculePartition& a, const MoleculePartition& b) {
  return a.size() == b.size() && canonical_label(a).key == canonical_label(b).key;
}

std::string formula(const MoleculePartition& m) {
  std::map<std::string, int> atoms;
  std::vector<std::string> vars;
  int plus = 0, minus = 0;
  for (int v = 0; v < m.size(); ++v) {
    const auto& t = m.type(v);
    if (t.is_var) vars.push_back(t.symbol);
    else if (t.symbol == "+") ++plus;
    else if (t.symbol == "-") ++minus;
    else ++atoms[t.symbol];
  }
  std::string out;
  auto put = [&](const std::string& s) {
    auto it = atoms.find(s);
    if (it == atoms.end()) return;
    out += s;
    if (it->second > 1) out += std::to_string(it->second);
    atoms.erase(it);
  };
  if (atoms.count("C")) {
    put("C");
    put("H");
  }
  while (!atoms.empty()) put(atoms.begin()->first);
  auto charge = [&](int k, char c) {
    if (k > 1) out += std::to_string(k);
    if (k > 0) out += c;
  };
  charge(plus, '+');
  charge(minus, '-');
  std::sort(vars.begin(), vars.end());
  for (const auto& v : vars) out += v;
  return out;
}

// ---------------------------------------------------------------- splits

namespace {

// Single edges whose removal disconnects the multigraph.
std::set<std::pair<int, int>> bridges(const MoleculePartition& m) {
  const int n = m.size();
  std::vector<int> disc(n, -1), low(n, 0);
  std::set<std::pair<int, int>> out;
  int time = 0;
  std::function<void(int, int)> dfs = [&](int v, int parent) {
    disc[v] = low[v] = time++;
    for (int u = 0; u < n; ++u) {
      const int k = m.mult(v, u);
      if (k == 0 || u == v) continue;
      if (u == parent && k == 1) continue;
      if (disc[u] >= 0) {
        low[v] = std::min(low[v], disc[u]);
        continue;
      }
      dfs(u, v);
      low[v] = std::min(low[v], low[u]);
      if (low[u] > disc[v] && k == 1) out.insert({std::min(u, v), std::max(u, v)});
    }
  };
  for (int v = 0; v < n; ++v)
    if (disc[v] < 0) dfs(v, -1);
  return out;
}

MoleculePartition fragment(const MoleculePartition& m, const std::vector<int>& part, int attach,
                           const std::string& var) {
  MoleculePartition f;
  std::vector<int> index(m.size(), -1);
  std::set<std::string> ids;
  for (int v : part) {
    index[v] = f.add_vertex(m.type(v), m.id(v));
    ids.insert(m.id(v));
  }
  for (std::size_t i = 0; i < part.size(); ++i)
    for (std::size_t j = i + 1; j < part.size(); ++j)
      if (m.mult(part[i], part[j]) != 0) f.bond(index[part[i]], index[part[j]], m.mult(part[i], part[j]));
  std::string id = var;
  while (ids.count(id)) id += "'";
  const int a = f.add_vertex(NodeType::var(var), id);
  f.bond(index[attach], a, 1);
  return f;
}

}  // namespace

std::vector<Split> enumerate_splits(const MoleculePartition& m, const std::string& var) {
  if (m.has_var(var)) throw Error(ErrorCode::VariableNotFresh, "variable " + var + " already occurs");
  const auto label = canonical_label(m);
  std::vector<int> pos(m.size());
  for (int k = 0; k < m.size(); ++k) pos[label.order[k]] = k;
  std::vector<std::pair<int, int>> edges;
  for (const auto& [a, b] : bridges(m)) {
    if (pos[a] < pos[b]) edges.push_back({a, b});
    else edges.push_back({b, a});
  }
  std::sort(edges.begin(), edges.end(), [&](const auto& x, const auto& y) {
    return std::make_pair(pos[x.first], pos[x.second]) < std::make_pair(pos[y.first], pos[y.second]);
  });
  std::vector<Split> out;
  for (const auto& [u, v] : edges) {
    Split s{u, v, fragment(m, component(m, u, u, v), u, var), fragment(m, component(m, v, u, v), v, var)};
    out.push_back(std::move(s));
  }
  return out;
}

MoleculePartition join(const MoleculePartition& n, const MoleculePartition& k, const std::string& var) {
  auto locate = [&](const MoleculePartition& p, const char* which) {
    const int c = p.count_var(var);
    if (c == 0) throw Error(ErrorCode::VariableAbsent, std::string("variable ") + var + " absent from " + which);
    if (c > 1) throw Error(ErrorCode::VariableMultiple, std::string("variable ") + var + " repeated in " + which);
    int at = 0;
    while (!(p.type(at) == NodeType::var(var))) ++at;
    int nb = -1;
    for (int u = 0; u < p.size(); ++u) {
      if (p.mult(at, u) == 0) continue;
      if (nb >= 0 || p.mult(at, u) != 1)
        throw Error(ErrorCode::MalformedInput, std::string("variable ") + var + " is not a single bond in " + which);
      nb = u;
    }
    if (nb < 0) throw Error(ErrorCode::MalformedInput, std::string("variable ") + var + " is unbonded in " + which);
    return std::make_pair(at, nb);
  };
  const auto [na, nb] = locate(n, "the first partition");
  const auto [ka, kb] = locate(k, "the second partition");
  MoleculePartition out;
  std::set<std::string> ids;
  auto copy = [&](const MoleculePartition& p, int skip) {
    std::vector<int> index(p.size(), -1);
    for (int v = 0; v < p.size(); ++v) {
      if (v == skip) continue;
      std::string id = p.id(v);
      while (ids.count(id)) id += "'";
      ids.insert(id);
      index[v] = out.add_vertex(p.type(v), id);
    }
    for (int a = 0; a < p.size(); ++a)
      for (int b = a + 1; b < p.size(); ++b)
        if (index[a] >= 0 && index[b] >= 0 && p.mult(a, b) != 0) out.bond(index[a], index[b], p.mult(a, b));
    return index;
  };
  const auto in = copy(n, na);
  const auto ik = copy(k, ka);
  out.bond(in[nb], ik[kb], 1);
  return out;
}

// ---------------------------------------------------------------- files

json partition_to_json(const MoleculePartition& m) {
  json vs = json::array(), es = json::array();
  for (int v = 0; v < m.size(); ++v) vs.push_back({{"id", m.id(v)}, {"type", m.type(v).to_string()}});
  for (int a = 0; a < m.size(); ++a)
    for (int b = a + 1; b < m.size(); ++b)
      if (m.mult(a, b) != 0) es.push_back({{"a", m.id(a)}, {"b", m.id(b)}, {"mult", m.mult(a, b)}});
  return {{"vertices", vs}, {"edges", es}};
}

MoleculePartition partition_from_json(const json& j) {
  try {
    MoleculePartition m;
    std::map<std::string, int> index;
    for (const auto& v : j.at("vertices")) {
      const std::string id = v.at("id").get<std::string>();
      const std::string t = v.at("type").get<std::string>();
      if (t.empty()) throw Error(ErrorCode::MalformedInput, "vertex " + id + " has an empty type");
      NodeType nt = t[0] == '$' ? NodeType::var(t.substr(1)) : NodeType::atom(t);
      if (!index.emplace(id, m.size()).second) throw Error(ErrorCode::MalformedInput, "duplicate vertex id " + id);
      m.add_vertex(std::move(nt), id);
    }
    for (const auto& e : j.at("edges")) {
      const auto a = index.find(e.at("a").get<std::string>());
      const auto b = index.find(e.at("b").get<std::string>());
      if (a == index.end() || b == index.end()) throw Error(ErrorCode::MalformedInput, "edge names an unknown vertex");
      const int mult = e.value("mult", 1);
      if (mult <= 0) throw Error(ErrorCode::MalformedInput, "edge multiplicity must be positive");
      m.bond(a->second, b->second, mult);
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("molecule file: ") + e.what());
  }
}

MoleculePartition load_partition(const std::filesystem::path& p) { return partition_from_json(load_json(p.string())); }

// ---------------------------------------------------------------- the system

namespace {

std::string var_of(const MoleculePartition& m) {
  for (int v = 0; v < m.size(); ++v)
    if (m.type(v).is_var) return m.type(v).symbol;
  throw Error(ErrorCode::FixtureInvalid, "rule fragment " + formula(m) + " has no variable");
}

// Returns the two sides of a split of m, arranged as (rest, piece) when
// piece_first is false and (piece, rest) otherwise, such that piece matches
// `piece` and joining `partner` to rest gives `goal`.
std::pair<MoleculePartition, MoleculePartition> find_split(const MoleculePartition& m, const MoleculePartition& piece,
                                                           const MoleculePartition& partner,
                                                           const MoleculePartition& goal, const std::string& var,
                                                           bool piece_first, const std::string& what) {
  for (const auto& s : enumerate_splits(m, var)) {
    for (int flip = 0; flip < 2; ++flip) {
      const MoleculePartition& p = flip ? s.first : s.second;
      const MoleculePartition& rest = flip ? s.second : s.first;
      if (!isomorphic(p, piece)) continue;
      const MoleculePartition joined = piece_first ? join(partner, rest, var) : join(rest, partner, var);
      if (!isomorphic(joined, goal)) continue;
      return piece_first ? std::make_pair(p, rest) : std::make_pair(rest, p);
    }
  }
  throw Error(ErrorCode::FixtureInvalid, "no split of " + what + " fits the reaction");
}

}  // namespace

ChemSystem build_chem_system(const std::filesystem::path& dir, const ValenceTable& vt) {
  ChemSystem cs;
  const std::vector<std::pair<std::string, std::string>> names = {
      {"Glc", "glucose.json"}, {"ATP", "atp.json"}, {"G6P", "g6p.json"}, {"ADP", "adp.json"}, {"H+", "hplus.json"}};
  for (const auto& [name, file] : names) {
    MoleculePartition m = load_partition(dir / file);
    const auto rep = validate_partition(m, vt);
    if (!rep.ok())
      throw Error(ErrorCode::FixtureInvalid, file + ": " + rep.issues.front().kind + " at " + rep.issues.front().location +
                                                 ": " + rep.issues.front().message);
    if (!is_molecule(m, vt)) throw Error(ErrorCode::FixtureInvalid, file + " contains a free variable");
    cs.fixtures.push_back({name, std::move(m)});
  }

  // The generic rule A: lhs fragments [x-H, y-PO3H2], rhs [x-PO3H2, H+, y-].
  const json rule = load_json((dir / "rule.json").string());
  std::vector<MoleculePartition> lhs, rhs;
  try {
    for (const auto& p : rule.at("lhs")) lhs.push_back(partition_from_json(p));
    for (const auto& p : rule.at("rhs")) rhs.push_back(partition_from_json(p));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FixtureInvalid, std::string("rule.json: ") + e.what());
  }
  if (lhs.size() != 2 || rhs.size() != 3) throw Error(ErrorCode::FixtureInvalid, "rule.json must have 2 inputs and 3 outputs");
  for (const auto* side : {&lhs, &rhs})
    for (const auto& p : *side)
      if (!validate_partition(p, vt).ok()) throw Error(ErrorCode::FixtureInvalid, "rule fragment " + formula(p) + " is invalid");
  const std::string a = var_of(lhs[0]), b = var_of(lhs[1]);
  const auto& [glc, atp, g6p, adp, hplus] = std::tie(cs.fixtures[0].second, cs.fixtures[1].second,
                                                     cs.fixtures[2].second, cs.fixtures[3].second,
                                                     cs.fixtures[4].second);
  if (!isomorphic(rhs[1], hplus)) throw Error(ErrorCode::FixtureInvalid, "the rule must release the H+ fixture");

  // Glc -> rest (x) x-H with rest + x-PO3H2 = G6P; ATP -> y-PO3H2 (x) rest
  // with y- + rest = ADP.
  auto [glc_rest, glc_h] = find_split(glc, lhs[0], rhs[0], g6p, a, false, "glucose");
  auto [atp_p, atp_rest] = find_split(atp, lhs[1], rhs[2], adp, b, true, "ATP");

  // Symbols: molecules by formula, disambiguated by canonical form.
  std::map<std::string, std::string> by_key;
  std::set<std::string> used;
  auto symbol = [&](const MoleculePartition& m) {
    const std::string key = canonical_label(m).key;
    if (auto it = by_key.find(key); it != by_key.end()) return it->second;
    std::string s = formula(m);
    while (used.count(s)) s += "'";
    used.insert(s);
    by_key[key] = s;
    cs.objects[s] = m;
    return s;
  };
  std::vector<std::string> mol;
  for (const auto& [name, m] : cs.fixtures) mol.push_back(symbol(m));
  const std::string s_glc = mol[0], s_atp = mol[1], s_g6p = mol[2], s_adp = mol[3], s_h = mol[4];
  const std::string f_glc = symbol(glc_rest), f_h = symbol(glc_h);
  const std::string f_p = symbol(atp_p), f_adp = symbol(atp_rest);
  const std::string r_p = symbol(rhs[0]), r_minus = symbol(rhs[2]);

  LayerPresentation names_layer(kNamesLayer), mol_layer(kMolLayer), part_layer(kPartLayer);
  for (const auto& [name, m] : cs.fixtures) names_layer.objects.push_back(name);
  names_layer.generators.push_back({"rule1", {"Glc", "ATP"}, {"G6P", "ADP", "H+"}});
  mol_layer.objects = mol;
  mol_layer.generators.push_back({"rule", {s_glc, s_atp}, {s_g6p, s_adp, s_h}});
  for (const auto& [s, m] : cs.objects) part_layer.objects.push_back(s);
  const std::string split_glc = "split:" + s_glc, split_atp = "split:" + s_atp;
  const std::string join_g6p = "join:" + s_g6p, join_adp = "join:" + s_adp;
  const std::string rule_a = "A(" + a + "," + b + ")", swap = "swap:" + s_h + "," + s_adp;
  part_layer.generators = {
      {split_glc, {s_glc}, {f_glc, f_h}},
      {split_atp, {s_atp}, {f_p, f_adp}},
      {rule_a, {f_h, f_p}, {r_p, s_h, r_minus}},
      {join_g6p, {f_glc, r_p}, {s_g6p}},
      {join_adp, {r_minus, f_adp}, {s_adp}},
      {swap, {s_h, s_adp}, {s_adp, s_h}},
  };
  names_layer.reindex();
  mol_layer.reindex();
  part_layer.reindex();

  // [Glc, ATP] -> [G6P, ADP, H+], left to right.
  InternalDiagram composite{kPartLayer, {s_glc, s_atp}, {s_g6p, s_adp, s_h}, {}};
  composite.slices = {{0, split_glc}, {2, split_atp}, {1, rule_a}, {0, join_g6p}, {2, join_adp}, {1, swap}};

  TranslationFunctor t{"T", kNamesLayer, kMolLayer, {}, {}};
  for (std::size_t k = 0; k < cs.fixtures.size(); ++k) t.object_map[cs.fixtures[k].first] = {mol[k]};
  t.morphism_map["rule1"] = InternalDiagram{kMolLayer, {s_glc, s_atp}, {s_g6p, s_adp, s_h}, {{0, "rule"}}};
  TranslationFunctor i{"i", kMolLayer, kPartLayer, {}, {}};
  for (const auto& s : mol) i.object_map[s] = {s};
  i.morphism_map["rule"] = composite;

  cs.sys.layers = {std::move(names_layer), std::move(mol_layer), std::move(part_layer)};
  cs.sys.functors = {std::move(t), std::move(i)};
  cs.sys.functors.push_back(compose_functors(cs.sys, cs.sys.functors[0], cs.sys.functors[1], "iT"));
  cs.sys.order = {{kNamesLayer, kMolLayer}, {kMolLayer, kPartLayer}};
  const auto rep = validate_system(cs.sys);
  if (!rep.ok()) throw Error(ErrorCode::FixtureInvalid, "chemistry system: " + rep.issues.front().message);
  check_internal(cs.sys, composite);

  cs.sigma = box_diagram(internal_generator(cs.sys, kNamesLayer, "rule1"));
  const Word in{"Glc", "ATP"}, out{"G6P", "ADP", "H+"};
  cs.explanation = compile(cs.sys, Term::seq({Term::refine("T", in), Term::refine("i", {s_glc, s_atp}),
                                              Term::boxed(composite), Term::coarsen("i", {s_g6p, s_adp, s_h}),
                                              Term::coarsen("T", out)}));
  return cs;
}

ExplanationVerdict check_glucose_explanation(const ChemSystem& cs, const ExplainOptions& opts) {
  return check_explanation_1(cs.sys, cs.explanation, cs.sigma, opts);
}

}  // namespace layerprop::chem
