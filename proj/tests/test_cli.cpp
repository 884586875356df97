#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "layerprop/cli.hpp"
#include "layerprop/io.hpp"
#include "support.hpp"

using namespace layerprop;

namespace {

namespace fs = std::filesystem;

const std::string kFixtures = LAYERPROP_FIXTURE_DIR;

/// A scratch directory holding the toy theory and a few term files.
struct Scratch {
  fs::path dir;

  Scratch() : dir(fs::temp_directory_path() / "layerprop_cli_test") {
    fs::create_directories(dir);
    std::ofstream(dir / "toy.json") << theory_to_json(testkit::toy_system()).dump(2);
    write("f.term", Term::gen("H", "f"));
    write("ff.term", Term::seq({Term::gen("H", "f"), Term::gen("H", "f")}));
    write("fg.term", Term::seq({Term::gen("H", "f"), Term::gen("H", "g")}));
    write("fg_boxed.term", Term::boxed(testkit::slices("H", {"A"}, {"A"}, {{0, "f"}, {0, "g"}})));
    write("window.term", Term::seq({Term::refine("F", {"A"}), Term::gen("L", "p"), Term::coarsen("F", {"B"})}));
    std::ofstream(dir / "broken.term") << "(seq (gen H f";
  }
  ~Scratch() { fs::remove_all(dir); }

  void write(const std::string& name, const Term& t) const { std::ofstream(dir / name) << term_to_string(t); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::string system() const { return path("toy.json"); }
};

json run_json(std::vector<std::string> args, int& code) {
  args.insert(args.begin(), "--json");
  const auto o = cli::run(args);
  code = o.code;
  return json::parse(o.out);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("reports name the verb and the exit status") {
    const Scratch s;
    int code = -1;
    const auto j = run_json({"--system", s.system(), "check-theory"}, code);
    CHECK(code == cli::kOk);
    CHECK(j.at("verb") == "check-theory");
    CHECK(j.at("exit") == 0);
    CHECK(j.at("ok") == true);
    CHECK(j.at("layers") == 3);
  }

  TEST_CASE("typecheck infers sorts") {
    const Scratch s;
    int code = -1;
    const auto j = run_json({"--system", s.system(), "typecheck", s.path("f.term"), s.path("fg.term")}, code);
    CHECK(code == cli::kOk);
    REQUIRE(j.at("diagrams").size() == 2);
    CHECK(j.at("diagrams")[0].at("dom") == type_to_json({{"H", {"A"}}}));
    CHECK(j.at("diagrams")[0].at("cod") == type_to_json({{"H", {"B"}}}));
    CHECK(j.at("diagrams")[1].at("internal") == true);
  }

  TEST_CASE("ill-sorted terms exit as malformed input") {
    const Scratch s;
    int code = -1;
    const auto j = run_json({"--system", s.system(), "typecheck", s.path("ff.term")}, code);
    CHECK(code == cli::kMalformed);
    CHECK(j.at("exit") == cli::kMalformed);
    CHECK(j.at("error").at("code") == "SortMismatch");
    const auto k = run_json({"--system", s.system(), "typecheck", s.path("broken.term")}, code);
    CHECK(code == cli::kMalformed);
    CHECK(k.at("error").at("code") == "MalformedInput");
    const auto m = run_json({"--system", s.system(), "typecheck", s.path("missing.term")}, code);
    CHECK(code == cli::kMalformed);
  }

  TEST_CASE("usage errors") {
    CHECK(cli::run({"no-such-verb"}).code == cli::kMalformed);
    CHECK(cli::run({}).code == cli::kMalformed);
    CHECK(cli::run({"explain", "--sigma", "x"}).code == cli::kMalformed);
    CHECK(cli::run({"typecheck", "file"}).code == cli::kMalformed);  // no --system
    const auto help = cli::run({"--help"});
    CHECK(help.code == cli::kOk);
    CHECK(help.out.find("typecheck") != std::string::npos);
  }

  TEST_CASE("structural equality") {
    const Scratch s;
    CHECK(cli::run({"--system", s.system(), "eq", s.path("fg.term"), s.path("fg_boxed.term")}).code == cli::kOk);
    int code = -1;
    const auto j = run_json({"--system", s.system(), "eq", s.path("f.term"), s.path("fg.term")}, code);
    CHECK(code == cli::kMalformed);
    CHECK(j.at("error").at("code") == "SortMismatch");
  }

  TEST_CASE("explanations map verdicts to exit statuses") {
    const Scratch s;
    int code = -1;
    auto j = run_json({"--system", s.system(), "explain", "--sigma", "f", "--diagram", s.path("window.term")}, code);
    CHECK(code == cli::kOk);
    CHECK(j.at("verdict").at("status") == "Valid");
    CHECK_FALSE(j.at("verdict").at("witness").is_null());
    j = run_json({"--system", s.system(), "counterfactual", "--sigma", "f", "--diagram", s.path("window.term")}, code);
    CHECK(code == cli::kFailed);
    CHECK(j.at("verdict").at("status") == "Refuted");
    j = run_json({"--system", s.system(), "explain", "--sigma", "nope", "--diagram", s.path("window.term")}, code);
    CHECK(code == cli::kMalformed);
    CHECK(j.at("error").at("code") == "UnknownGenerator");
  }

  TEST_CASE("unknown verdicts exit with 3") {
    const Scratch s;
    int code = -1;
    const auto j = run_json({"--system", s.system(), "--budget", "0", "explain", "--sigma", "f", "--diagram",
                             s.path("window.term")},
                            code);
    CHECK(code == cli::kUnknown);
    CHECK(j.at("verdict").at("status") == "Unknown");
  }

  TEST_CASE("derive finds a witness") {
    const Scratch s;
    int code = -1;
    const auto j = run_json({"--system", s.system(), "--budget", "3", "derive", s.path("f.term"), s.path("window.term")},
                            code);
    CHECK(code == cli::kOk);
    CHECK(j.at("status") == "Found");
    const auto dv = derivation_from_json(testkit::toy_system(), j.at("derivation"));
    CHECK(verify_derivation(testkit::toy_system(), dv));
  }

  TEST_CASE("fixture checks") {
    int code = -1;
    const auto e2 = run_json({"--system", kFixtures + "/circuits/circuits.json", "explain2", "--derivation",
                              kFixtures + "/circuits/resistors.json", "--equation", "Bip/series"},
                             code);
    CHECK(code == cli::kOk);
    CHECK(e2.at("verdict").at("status") == "Valid");
    const auto bad = run_json({"--system", kFixtures + "/circuits/circuits.json", "explain2", "--derivation",
                               kFixtures + "/circuits/resistors.json", "--equation", "series"},
                              code);
    CHECK(code == cli::kMalformed);
    CHECK(bad.at("error").at("code") == "MalformedInput");
    run_json({"--system", kFixtures + "/ccs/ccs.json", "counterfactual", "--sigma", "red1.json", "--diagram",
              kFixtures + "/ccs/lts2.json"},
             code);
    CHECK(code == cli::kOk);
    run_json({"ccs", "--bisim", "x.0|y.0", "y.0|x.0"}, code);
    CHECK(code == cli::kOk);
  }

  TEST_CASE("plain output is text") {
    const Scratch s;
    const auto o = cli::run({"--system", s.system(), "typecheck", s.path("f.term")});
    CHECK(o.code == cli::kOk);
    CHECK(o.out.find("f.term") != std::string::npos);
    CHECK_FALSE(o.out.starts_with("{"));
    const auto err = cli::run({"--system", s.system(), "typecheck", s.path("ff.term")});
    CHECK(err.out.empty());
    CHECK(err.err.find("SortMismatch") != std::string::npos);
  }

  TEST_CASE("timings are opt-in") {
    const Scratch s;
    int code = -1;
    CHECK_FALSE(run_json({"--system", s.system(), "check-theory"}, code).contains("elapsed_ms"));
    CHECK(run_json({"--timings", "--system", s.system(), "check-theory"}, code).contains("elapsed_ms"));
  }
}
