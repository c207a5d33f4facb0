#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qprad/errors.hpp"
#include "qprad/io/config.hpp"
#include "qprad/io/manifest.hpp"
#include "qprad/io/table.hpp"

using namespace qprad;
namespace fs = std::filesystem;

TEST_SUITE("io") {
  TEST_CASE("csv round trip") {
    io::Table t({"name", "value"});
    t.add_row({"a,b", "1.5"});
    t.add_row({"quote\"d", "-2e-300"});
    const auto back = io::parse_csv(io::to_csv(t));
    REQUIRE(back.rows() == 2);
    CHECK(back.row(0)[0] == "a,b");
    CHECK(back.row(1)[0] == "quote\"d");
    CHECK(back.numeric("value")[1] == -2e-300);
    const auto js = io::table_from_json(io::to_json(t), "mem");
    CHECK(js.numeric("value")[0] == 1.5);
  }

  TEST_CASE("numbers round trip exactly") {
    for (double v : {0.1, 1.0 / 3, 6.02214076e23, -2.5e-300, 5.994e6}) CHECK(std::stod(io::format_double(v)) == v);
  }

  TEST_CASE("errors carry line numbers") {
    const auto t = io::parse_csv("x,y\n1,2\n3,oops\n", "data.csv");
    try {
      (void)t.numeric("y");
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("data.csv: line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(io::parse_csv("x,y\n1\n"), DataError);
    CHECK_THROWS_AS(t.require_columns({"x", "z"}), DataError);
  }

  TEST_CASE("timestamps") {
    CHECK(io::parse_iso8601_utc("1970-01-02T00:00:00Z") == 86400.0);
    CHECK(io::parse_iso8601_utc(io::iso8601_utc(1.6e9 + 0.25)) == doctest::Approx(1.6e9 + 0.25));
    CHECK(io::parse_iso8601_utc("2021-01-01") == io::parse_iso8601_utc("2021-01-01T00:00:00Z"));
    CHECK_THROWS_AS(io::parse_iso8601_utc("2021-13-01T00:00:00Z"), ConfigError);
  }

  TEST_CASE("config parsing") {
    const auto cfg = io::parse_config_text("{ // comment\n \"seed\": 5 }", "inline");
    CHECK(cfg.seed == 5);
    CHECK(cfg.qubits.size() == io::default_config().qubits.size());
    try {
      (void)io::parse_config_text(R"({"shield_ab": {"scenario": {"eta_upp": 0.4}}})", "inline");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("eta_upp") != std::string::npos);
    }
    CHECK_THROWS_AS(io::parse_config_text("{ not json", "inline"), ConfigError);
  }

  TEST_CASE("shipped default config matches the built-in defaults") {
    const auto file = io::load_config(QPRAD_SOURCE_DIR "/configs/default.json");
    const auto builtin = io::default_config();
    CHECK(file.seed == builtin.seed);
    CHECK(file.a == builtin.a);
    CHECK(file.inventory.entries().size() == builtin.inventory.entries().size());
    CHECK(file.shield_ab.scenario.eta_up == builtin.shield_ab.scenario.eta_up);
  }

  TEST_CASE("manifest and checksums") {
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const fs::path dir = fs::temp_directory_path() / "qprad_io_manifest";
    fs::remove_all(dir);
    io::RunManifest m;
    m.command = "test";
    io::commit_run(dir, {{"a.txt", "hello"}}, m);
    std::ifstream in(dir / "manifest.json");
    const auto doc = nlohmann::json::parse(in);
    CHECK(doc.dump().find(io::sha256_hex("hello")) != std::string::npos);
    fs::remove_all(dir);
  }
}
