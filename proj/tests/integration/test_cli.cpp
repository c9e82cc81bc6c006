#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>

#include "schema_check.hpp"
#include "spurlens/payloads.hpp"
#include "support.hpp"

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("spurlens-cli-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run_cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + SPURLENS_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testing::read_text(out.string());
  r.err = testing::read_text(err.string());
  return r;
}

std::string data(const std::string& name) { return "\"" + testing::data_path(name) + "\""; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("missing --cause exits 2 with usage") {
  const auto r = run_cli("--data " + data("lalonde_psid.csv") + " --outcome re78");
  CHECK(r.code == 2);
  CHECK(r.err.find("--cause") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("validation and degenerate exit codes") {
  const auto same = run_cli("--data " + data("lalonde_psid.csv") + " --cause re78 --outcome re78");
  CHECK(same.code == 2);
  const auto err = spurlens::Json::parse(same.err);
  CHECK(err["message"] == "cause equals outcome");

  CHECK(run_cli("--data /nonexistent.csv --cause a --outcome b").code == 2);
  CHECK(run_cli("--data " + data("lalonde_psid.csv") + " --cause treat --outcome re78 --boot 10").code == 2);
  CHECK(run_cli("--data " + data("lalonde_psid.csv") + " --cause treat --outcome re78 --auto-k 3 --partition " +
                data("reversal_rules.json"))
            .code == 2);

  const fs::path flat = scratch() / "flat.csv";
  std::ofstream(flat) << "x,y,z\n0,1,5\n1,2,5\n0,3,5\n1,4,5\n0,5,5\n1,6,5\n";
  const auto degenerate = run_cli("--data \"" + flat.string() + "\" --cause x --outcome y --auto-k 2 --min-size 2");
  CHECK(degenerate.code == 3);
  CHECK(spurlens::Json::parse(degenerate.err).contains("error_code"));
}

TEST_CASE("auto partition reports are byte-identical across runs") {
  const std::string args = "--data " + data("lalonde_psid.csv") +
                           " --cause treat --outcome re78 --auto-k 4 --seed 7 --boot 200 --quiet --out ";
  const fs::path a = scratch() / "a.json", b = scratch() / "b.json";
  REQUIRE(run_cli(args + "\"" + a.string() + "\"").code == 0);
  REQUIRE(run_cli(args + "\"" + b.string() + "\"").code == 0);
  const std::string ta = testing::read_text(a.string());
  CHECK(!ta.empty());
  CHECK(ta == testing::read_text(b.string()));

  const testing::SchemaCheck schema(spurlens::Json::parse(testing::read_text(SCHEMA_PATH)));
  const auto report = spurlens::Json::parse(ta);
  const auto errs = schema.errors(report);
  CHECK_MESSAGE(errs.empty(), (errs.empty() ? "" : errs.front()));
  CHECK(report["seed"] == 7);
  CHECK(report["partition"]["subgroups"].size() == 4);
  CHECK(report["diagnoses"].size() == 5);
}

TEST_CASE("reversal fixture flags both strata") {
  const auto r = run_cli("--data " + data("reversal.csv") + " --cause treated --outcome recovered --partition " +
                         data("reversal_rules.json") + " --boot 200");
  REQUIRE(r.code == 0);
  const auto report = spurlens::Json::parse(r.out);
  const auto& d = report["diagnoses"];
  REQUIRE(d.size() == 3);
  CHECK(d[0]["simpson_warning"]["flag"] == false);
  for (int i : {1, 2}) {
    CHECK(d[i]["simpson_warning"]["flag"] == true);
    CHECK(d[i]["statistics"]["effect"].get<double>() == doctest::Approx(0.10));
  }
  CHECK(d[0]["statistics"]["effect"].get<double>() == doctest::Approx(-0.38));
}

TEST_CASE("summary table goes to stdout with --out") {
  const fs::path out = scratch() / "summary.json";
  const auto r = run_cli("--data " + data("reversal.csv") + " --cause treated --outcome recovered --partition " +
                         data("reversal_rules.json") + " --boot 200 --out \"" + out.string() + "\"");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Simpson's Paradox") != std::string::npos);
  CHECK(r.out.find("stratum") != std::string::npos);
  CHECK(fs::file_size(out) > 0);
}

}
