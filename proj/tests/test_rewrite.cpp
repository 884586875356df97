#include <doctest.h>

#include "layerprop/io.hpp"
#include "support.hpp"

using namespace layerprop;

namespace {

const std::set<std::string> kBidirectional{"F1", "F2", "F3", "F4", "M1", "M2", "M3", "M4", "M5", "M6", "E"};

}  // namespace

TEST_SUITE("rewrite") {
  TEST_CASE("rule applications preserve sorts") {
    const auto sys = testkit::toy_system();
    std::mt19937 rng(31);
    testkit::TermGen gen(sys, rng);
    for (int i = 0; i < 30; ++i) {
      const Diagram d = compile(sys, gen.random_bounded(1, 5, 2));
      for (const auto& s : expand(sys, d, {}, MoveSet::All).steps) {
        CHECK(s.result.sort() == d.sort());
        CHECK_NOTHROW(check_diagram(s.result));
        CHECK(s.key == canonicalize(sys, s.result).key);
      }
    }
  }

  TEST_CASE("bidirectional steps can be undone") {
    const auto sys = testkit::toy_system();
    std::mt19937 rng(32);
    testkit::TermGen gen(sys, rng);
    RuleOptions opts;
    opts.only = kBidirectional;
    opts.include_insertions = false;
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
      const Diagram d = compile(sys, gen.random_bounded(1, 4, 2));
      const auto key = canonicalize(sys, d).key;
      for (const auto& s : expand(sys, d, opts, MoveSet::Forward).steps) {
        const Orientation back = s.match.orientation == Orientation::Fwd ? Orientation::Bwd : Orientation::Fwd;
        bool found = false;
        for (const auto& r : expand(sys, s.result, {}, MoveSet::Forward, RuleFilter{s.match.rule, back}).steps)
          found = found || r.key == key;
        CHECK_MESSAGE(found, match_to_string(s.match));
        ++checked;
      }
    }
    CHECK(checked > 20);
  }

  TEST_CASE("search with bidirectional rules is symmetric") {
    const auto sys = testkit::toy_system();
    std::mt19937 rng(33);
    testkit::TermGen gen(sys, rng);
    SearchOptions so;
    so.budget = 3;
    so.rules.only = kBidirectional;
    for (int i = 0; i < 20; ++i) {
      const Term t = gen.random_bounded(1, 3, 2);
      const Diagram x = compile(sys, t);
      // a target one or two steps away, and an unrelated one
      std::vector<Diagram> ys{compile(sys, gen.random_bounded(1, 3, 2))};
      const auto steps = expand(sys, x, so.rules, MoveSet::Forward).steps;
      if (!steps.empty()) ys.push_back(steps[gen.pick(static_cast<int>(steps.size()))].result);
      for (const auto& y : ys) {
        if (x.sort() != y.sort()) continue;
        const auto there = find_derivation(sys, x, y, so);
        const auto back = find_derivation(sys, y, x, so);
        CHECK((there.status == SearchStatus::Found) == (back.status == SearchStatus::Found));
        if (there.derivation) CHECK(verify_derivation(sys, *there.derivation, so.rules));
      }
    }
  }

  TEST_CASE("expansion and search are deterministic") {
    const auto sys = testkit::toy_system();
    std::mt19937 rng(34);
    testkit::TermGen gen(sys, rng);
    for (int i = 0; i < 10; ++i) {
      const Diagram d = compile(sys, gen.random_bounded(1, 4, 2));
      const auto a = expand(sys, d, {}, MoveSet::All);
      const auto b = expand(sys, d, {}, MoveSet::All);
      REQUIRE(a.steps.size() == b.steps.size());
      for (std::size_t k = 0; k < a.steps.size(); ++k) {
        CHECK(a.steps[k].match == b.steps[k].match);
        CHECK(a.steps[k].key == b.steps[k].key);
      }
    }
    const auto inst = make_instance(sys, {"A4", "", "", "GF", "", {"A", "B"}, {}, {}, {}, {}});
    SearchOptions so;
    so.budget = 4;
    const auto r1 = find_derivation(sys, inst.lhs, inst.rhs, so);
    const auto r2 = find_derivation(sys, inst.lhs, inst.rhs, so);
    REQUIRE(r1.derivation);
    CHECK(derivation_to_json(*r1.derivation) == derivation_to_json(*r2.derivation));
    CHECK(r1.states == r2.states);
  }

  TEST_CASE("stale and tampered derivations are rejected") {
    const auto sys = testkit::toy_system();
    const auto inst = make_instance(sys, {"A3", "", "", "F", "", {"A", "B"}, {}, {}, {}, {}});
    const auto steps = expand(sys, inst.lhs, {}, MoveSet::Forward, RuleFilter{"A3", Orientation::Fwd}).steps;
    REQUIRE_FALSE(steps.empty());
    const Diagram other = compile(sys, Term::gen("M", "r"));
    try {
      apply_rule(sys, other, steps[0].match);
      FAIL("stale match applied");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StaleMatch);
    }
    Derivation dv{inst.lhs, {steps[0].match}};
    CHECK(verify_derivation(sys, dv));
    dv.steps[0].orientation = Orientation::Bwd;
    CHECK_FALSE(verify_derivation(sys, dv));
    Derivation wrong{inst.lhs, {steps[0].match}};
    wrong.steps[0].anchor = {42};
    CHECK_FALSE(verify_derivation(sys, wrong));
  }

  TEST_CASE("generating directions") {
    for (const auto& r : rule_names()) {
      CHECK(is_valid_direction(r, Orientation::Fwd));
      CHECK(is_valid_direction(r, Orientation::Bwd) == is_bidirectional(r));
    }
    CHECK(is_bidirectional("F1"));
    CHECK(is_bidirectional("M6"));
    CHECK(is_bidirectional("E"));
    CHECK_FALSE(is_bidirectional("A3"));
    CHECK_FALSE(is_bidirectional("X"));
  }

  TEST_CASE("isolation") {
    const auto sys = testkit::toy_system();
    CHECK(is_isolated(sys, compile(sys, Term::external("obs"))));
    // no functor or equation touches a lone box of H
    CHECK(is_isolated(sys, compile(sys, Term::gen("H", "f"))));
    CHECK_FALSE(is_isolated(sys, compile(sys, Term::boxed(testkit::slices("L", {"a"}, {"a"}, {{0, "p"}, {0, "q"}})))));
    CHECK_FALSE(is_isolated(sys, compile(sys, Term::seq({Term::gen("H", "f"), Term::refine("F", {"B"})}))));
    CHECK_FALSE(is_isolated(sys, empty_diagram()));
  }

  TEST_CASE("window collapse needs a faithful functor") {
    const auto sys = testkit::toy_system();
    const Diagram w = compile(sys, Term::seq({Term::refine("F", {"A"}), Term::coarsen("F", {"A"})}));
    const Diagram id = compile(sys, Term::id("H", {"A"}));
    SearchOptions so;
    so.budget = 3;
    CHECK(find_derivation(sys, w, id, so).status != SearchStatus::Found);
    so.rules.faithful_functors = {"F"};
    const auto r = find_derivation(sys, w, id, so);
    REQUIRE(r.status == SearchStatus::Found);
    CHECK(verify_derivation(sys, *r.derivation, so.rules));
    CHECK_FALSE(verify_derivation(sys, *r.derivation));
  }

  TEST_CASE("derivation JSON round trip") {
    const auto sys = testkit::toy_system();
    const auto inst = make_instance(sys, {"A1", "", "L", "", "", {"a"}, {"b"}, {}, {}, {}});
    SearchOptions so;
    so.budget = 3;
    const auto r = find_derivation(sys, inst.lhs, inst.rhs, so);
    REQUIRE(r.derivation);
    const auto j = derivation_to_json(*r.derivation);
    const auto back = derivation_from_json(sys, json::parse(j.dump()));
    CHECK(verify_derivation(sys, back));
    CHECK(derivation_to_json(back) == j);
  }
}
