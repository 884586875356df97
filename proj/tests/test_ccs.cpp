#include <doctest.h>

#include <random>

#include "layerprop/ccs.hpp"
#include "layerprop/error.hpp"
#include "support.hpp"

using namespace layerprop;
using namespace layerprop::ccs;

namespace {

Process random_process(std::mt19937& rng, int depth) {
  static const std::vector<std::string> acts{"x", "x'", "y", "y'", "tau"};
  std::uniform_int_distribution<int> die(0, 9);
  const int r = die(rng);
  if (depth == 0 || r < 2) return Process::nil();
  if (r < 5) return Process::par(random_process(rng, depth - 1), random_process(rng, depth - 1));
  return Process::prefix(acts[static_cast<std::size_t>(die(rng)) % acts.size()], random_process(rng, depth - 1));
}

std::vector<Process> sample(unsigned seed, int n, int depth = 4) {
  std::mt19937 rng(seed);
  std::vector<Process> out;
  for (int i = 0; i < n; ++i) out.push_back(random_process(rng, depth));
  return out;
}

}  // namespace

TEST_SUITE("ccs") {
  TEST_CASE("printing and parsing round trip") {
    for (const auto& p : sample(71, 200)) {
      const auto q = parse_process(p.to_string());
      CHECK(q == p);
      CHECK(q.to_string() == p.to_string());
    }
    CHECK(parse_process("x.0|y.0|z.0") == parse_process("(x.0|(y.0|z.0))"));
    CHECK(parse_process("{x.0|y'.0}") == parse_process("(x.0|y'.0)"));
    CHECK(parse_process(" tau . 0 ").action() == kTau);
  }

  TEST_CASE("malformed processes are rejected") {
    for (const char* bad : {"", "x", "x.", "(x.0|y.0", "x.0|", "0 0", "x'.(0", "1.0", ".0"}) {
      INFO(std::string(bad));
      try {
        parse_process(bad);
        FAIL("accepted");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedInput);
      }
    }
  }

  TEST_CASE("complements") {
    CHECK(complement("x") == "x'");
    CHECK(complement("x'") == "x");
    CHECK(complement(complement("y")) == "y");
    CHECK(is_silent(kTau));
    CHECK_THROWS_AS(complement(kTau), Error);
  }

  TEST_CASE("congruence is the commutative monoid laws") {
    const auto p = parse_process("x.0|(y.0|0)");
    CHECK(congruent(p, parse_process("y.0|x.0")));
    CHECK(congruent(p, parse_process("(0|y.0)|(x.0|0)")));
    CHECK_FALSE(congruent(p, parse_process("x.0|y.(0|0)")));
    CHECK(normal_form(parse_process("0|0")) == normal_form(Process::nil()));
  }

  TEST_CASE("reductions are silent transitions") {
    for (const auto& p : sample(72, 150)) {
      std::vector<Process> taus;
      for (const auto& t : lts_transitions(p))
        if (is_silent(t.label)) taus.push_back(t.target);
      for (const auto& r : reductions(p)) {
        bool found = false;
        for (const auto& t : taus) found = found || congruent(t, r);
        CHECK_MESSAGE(found, p.to_string() << " -> " << r.to_string());
      }
    }
  }

  TEST_CASE("reduction and transition shrink the process") {
    for (const auto& p : sample(73, 150)) {
      for (const auto& r : reductions(p)) CHECK(r.size() == p.size() - 2);
      for (const auto& t : lts_transitions(p)) CHECK(t.target.size() < p.size());
    }
  }

  TEST_CASE("reducts are distinct up to congruence") {
    for (const auto& p : sample(74, 150)) {
      const auto rs = reductions(p);
      for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = i + 1; j < rs.size(); ++j) CHECK_FALSE(congruent(rs[i], rs[j]));
    }
  }

  TEST_CASE("bisimilarity is an equivalence") {
    const auto ps = sample(75, 14, 3);
    for (const auto& p : ps) CHECK(bisimilar(p, p));
    for (const auto& p : ps)
      for (const auto& q : ps) {
        CHECK(bisimilar(p, q) == bisimilar(q, p));
        if (!bisimilar(p, q)) continue;
        for (const auto& r : ps)
          if (bisimilar(q, r)) CHECK(bisimilar(p, r));
      }
  }

  TEST_CASE("bisimilarity agrees with the fixpoint oracle") {
    const auto ps = sample(76, 30, 3);
    for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
      std::size_t states = 0;
      const bool want = testkit::gfp_bisimilar(ps[i], ps[i + 1], &states);
      if (states > 30) continue;
      CHECK(bisimilar(ps[i], ps[i + 1]) == want);
    }
  }

  TEST_CASE("bisimilarity is a congruence for prefix and parallel") {
    const auto ps = sample(77, 10, 3);
    const auto ctx = sample(78, 4, 2);
    for (const auto& p : ps)
      for (const auto& q : ps) {
        if (!bisimilar(p, q)) continue;
        for (const auto& r : ctx) {
          CHECK(bisimilar(Process::par(p, r), Process::par(q, r)));
          CHECK(bisimilar(Process::par(r, p), Process::par(r, q)));
        }
        CHECK(bisimilar(Process::prefix("x", p), Process::prefix("x", q)));
      }
  }

  TEST_CASE("congruent processes are bisimilar") {
    for (const auto& p : sample(79, 60)) {
      auto parts = components(p);
      std::reverse(parts.begin(), parts.end());
      Process q = Process::nil();
      for (const auto& c : parts) q = Process::par(c, q);
      CHECK(congruent(p, q));
      CHECK(bisimilar(p, q));
    }
    CHECK_FALSE(bisimilar(parse_process("x.0|x'.0"), parse_process("x.x'.0")));
    CHECK_FALSE(bisimilar(parse_process("x.0|y.0"), parse_process("x.y.0|y.x.0")));
  }

  TEST_CASE("reachable graphs") {
    const auto g = reachable_lts(parse_process("x.0|x'.0"));
    CHECK(g.states.size() == 4);
    CHECK(g.edges.size() == 5);
    const auto dot = lts_to_dot(g);
    CHECK(dot.find("digraph") != std::string::npos);
  }

  TEST_CASE("the layered system validates") {
    const auto cs = build_ccs_system();
    CHECK(validate_system(cs.sys).ok());
    CHECK(cs.sys.below(kLtsLayer, kRedLayer));
    CHECK(red_word(parse_process("x.0|(y.0|x'.0)")).size() == 3);
    CHECK(lts_symbol(parse_process("x.0"), "x") != lts_symbol(parse_process("x.0"), kTau));
    const auto v = check_ccs_fixtures(cs);
    CHECK(v.windowed.status == VerdictStatus::Valid);
    CHECK(v.counterfactual.status == VerdictStatus::Certified);
  }

  TEST_CASE("other transitions give systems too") {
    const auto cs = build_ccs_system(parse_process("x.y.0|x'.0"), parse_process("y.0|0"));
    CHECK(validate_system(cs.sys).ok());
    const auto v = check_ccs_fixtures(cs);
    CHECK(v.windowed.status == VerdictStatus::Valid);
  }
}
