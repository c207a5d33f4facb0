#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qprad/commands.hpp"
#include "qprad/io/manifest.hpp"
#include "qprad/io/table.hpp"

using namespace qprad;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("qprad_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run(const std::string& verb, cli::GlobalOptions opt, cli::CommandInputs in = {}) {
  std::ostringstream err;
  return cli::run(verb, opt, in, err);
}

cli::GlobalOptions opts(const fs::path& out, std::optional<fs::path> config = std::nullopt) {
  cli::GlobalOptions o;
  o.out = out;
  o.config = std::move(config);
  o.threads = 2;
  return o;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("same seed gives byte-identical outputs") {
    TempDir d("determinism");
    auto o = opts(d.path / "a");
    o.seed = 99;
    REQUIRE(run("simulate-shield-ab", o) == cli::exit_ok);
    o.out = d.path / "b";
    o.threads = 4;
    REQUIRE(run("simulate-shield-ab", o) == cli::exit_ok);
    CHECK(io::read_file(d.path / "a" / "ab_records.csv") == io::read_file(d.path / "b" / "ab_records.csv"));
    const auto ma = read_json(d.path / "a" / "manifest.json");
    CHECK(ma["outputs_sha256"]["ab_records.csv"] == io::sha256_hex(io::read_file(d.path / "a" / "ab_records.csv")));
  }

  TEST_CASE("exposure simulate and fit") {
    TempDir d("exposure");
    REQUIRE(run("simulate-exposure", opts(d.path / "sim")) == cli::exit_ok);
    REQUIRE(run("fit-exposure", opts(d.path / "fit"), {d.path / "sim" / "exposure.csv", {}}) == cli::exit_ok);
    const auto fit = read_json(d.path / "fit" / "fit.json");
    CHECK(fit.contains("fit"));
    CHECK(fit.contains("fit_gamma_other_zero"));
    CHECK(fit["fit"]["parameters"]["a"]["value"].get<double>() == doctest::Approx(5.4e-3).epsilon(0.05));
  }

  TEST_CASE("empty inventory gives a flat series and an unidentifiable fit") {
    TempDir d("empty");
    write(d.path / "cfg.json", R"({"inventory": {"isotopes": []}, "exposure": {"noise": "none"}})");
    REQUIRE(run("simulate-exposure", opts(d.path / "sim", d.path / "cfg.json")) == cli::exit_ok);
    const auto t = io::read_csv(d.path / "sim" / "exposure.csv");
    const auto g = t.numeric("gamma1_true");
    CHECK((g == g[0]).all());
    CHECK(run("fit-exposure", opts(d.path / "fit", d.path / "cfg.json"), {d.path / "sim" / "exposure.csv", {}}) ==
          cli::exit_nonconvergence);
    CHECK(fs::exists(d.path / "fit" / "fit.json"));
  }

  TEST_CASE("malformed input leaves no output") {
    TempDir d("malformed");
    write(d.path / "bad.csv", "t_s,gamma1_measured,P_tot\n0,1,2\n1,x,3\n");
    CHECK(run("fit-exposure", opts(d.path / "out"), {d.path / "bad.csv", {}}) == cli::exit_data);
    CHECK_FALSE(fs::exists(d.path / "out"));
    write(d.path / "cfg.json", R"({"not_a_key": 1})");
    CHECK(run("simulate-exposure", opts(d.path / "out2", d.path / "cfg.json")) == cli::exit_config);
    CHECK_FALSE(fs::exists(d.path / "out2"));
    CHECK(run("no-such-verb", opts(d.path / "out3")) == cli::exit_config);
  }

  TEST_CASE("A/B analysis of real and shuffled pairings") {
    TempDir d("ab");
    REQUIRE(run("simulate-shield-ab", opts(d.path / "sim")) == cli::exit_ok);
    const auto records = d.path / "sim" / "ab_records.csv";
    REQUIRE(run("analyze-ab", opts(d.path / "real"), {records, {}}) == cli::exit_ok);
    const auto rep = read_json(d.path / "real" / "report.json");
    CHECK(rep["wilcoxon"]["p_value"].get<double>() < 0.05);
    CHECK(rep.contains("reference_values"));
    CHECK(rep.contains("internal_power"));

    write(d.path / "shuffle.json", R"({"analysis": {"pairing": "shuffled"}})");
    std::vector<double> p;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto o = opts(d.path / "shuf", d.path / "shuffle.json");
      o.seed = seed;
      REQUIRE(run("analyze-ab", o, {records, {}}) == cli::exit_ok);
      p.push_back(read_json(d.path / "shuf" / "report.json")["wilcoxon"]["p_value"].get<double>());
    }
    std::sort(p.begin(), p.end());
    CHECK(p[2] > 0.2);
  }

  TEST_CASE("null shield scenario shows no effect") {
    TempDir d("null");
    const fs::path cfg = QPRAD_SOURCE_DIR "/configs/null_shield.json";
    REQUIRE(run("simulate-shield-ab", opts(d.path / "sim", cfg)) == cli::exit_ok);
    REQUIRE(run("analyze-ab", opts(d.path / "ana", cfg), {d.path / "sim" / "ab_records.csv", {}}) == cli::exit_ok);
    CHECK(read_json(d.path / "ana" / "report.json")["wilcoxon"]["p_value"].get<double>() > 0.05);
  }

  TEST_CASE("injection ranks recombination first") {
    TempDir d("inject");
    REQUIRE(run("inject-qp", opts(d.path)) == cli::exit_ok);
    const auto fits = read_json(d.path / "fits.json");
    const std::string best = fits["ranking_by_rss"][0]["model"].get<std::string>();
    CHECK(best.rfind("recombination", 0) == 0);
  }

  TEST_CASE("spectrum round trip reports the range spread") {
    TempDir d("spectrum");
    REQUIRE(run("simulate-spectrum", opts(d.path / "sim")) == cli::exit_ok);
    CHECK(fs::exists(d.path / "sim" / "templates" / "K-40.csv"));
    const int rc = run("fit-spectrum", opts(d.path / "fit"), {d.path / "sim" / "hist.csv", d.path / "sim" / "templates"});
    CHECK(rc == cli::exit_ok);
    const auto rep = read_json(d.path / "fit" / "spectrum_fit.json");
    CHECK(rep.contains("range_systematic"));
  }
}
