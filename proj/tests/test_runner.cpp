#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "grushin/runner.hpp"

using namespace grushin::runner;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const fs::path& out) {
    ExperimentConfig c;
    c.output_dir = out;
    c.grid_M = 400;
    c.mode_cap = 6;
    c.levels = 3;
    c.weyl_tau_sq = 60.0;
    c.basis_mode_cap = 4;
    c.basis_lambda_max = 40.0;
    c.basis_grid_M = 300;
    c.coercivity_fields = 5;
    c.conservation_fields = 3;
    c.nt = 33;
    c.beam_h = {0.25, 0.125};
    c.centroid_h = 0.125;
    c.centroid_samples = 3;
    c.w_list = {6, 7, 8};
    c.triple_w = {8};
    c.localization_w = {10};
    c.asym_grid_M = 400;
    c.phase_w = 8;
    c.nf_h = {0.0625, 0.03125};
    c.nf_seeds = 2;
    c.nf_nx = 1024;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("grushin_runner_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("kind names") {
    for (auto k : {Kind::spectrum, Kind::observe, Kind::beam_sweep, Kind::asymptotics, Kind::normalform, Kind::all}) {
        CHECK(parse_kind(kind_name(k)) == k);
    }
    CHECK(kind_name(Kind::beam_sweep) == "beam-sweep");
    CHECK_FALSE(parse_kind("beam_sweep"));
}

TEST_CASE("config json round trip") {
    auto c = small_config("somewhere");
    c.region_arcs = {{0.5, 2.0}, {3.0, 4.0}};
    c.seed = 0xfedcba9876543210ULL;
    auto back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(back.seed == c.seed);
}

TEST_CASE("config rejection names the field") {
    auto doc = ExperimentConfig().to_json();
    doc["nt"] = 128;
    try {
        ExperimentConfig::from_json(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "nt");
        CHECK(std::string(e.what()).find("nt") != std::string::npos);
    }

    auto unknown = ExperimentConfig().to_json();
    unknown["bogus"] = 1;
    CHECK_THROWS_AS(ExperimentConfig::from_json(unknown), ConfigError);

    auto missing = ExperimentConfig().to_json();
    missing.erase("schema_version");
    CHECK_THROWS_AS(ExperimentConfig::from_json(missing), ConfigError);
    auto future = ExperimentConfig().to_json();
    future["schema_version"] = 2;
    CHECK_THROWS_AS(ExperimentConfig::from_json(future), ConfigError);

    auto typed = ExperimentConfig().to_json();
    typed["grid_M"] = "big";
    try {
        ExperimentConfig::from_json(typed);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "grid_M");
    }

    ExperimentConfig c;
    c.beam_h = {0.0625, 0.125};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig();
    c.triple_w = {15};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig();
    c.asym_grid_M = 200;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_NOTHROW(ExperimentConfig().validate());
}

TEST_CASE("load_config reports unreadable files") {
    auto dir = scratch("load");
    fs::create_directories(dir);
    CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    std::ofstream(dir / "good.json") << R"({"schema_version": 1, "nt": 65, "kind": "spectrum"})";
    auto c = load_config(dir / "good.json");
    CHECK(c.nt == 65);
    CHECK(c.kind == Kind::spectrum);
    fs::remove_all(dir);
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("contract assignment") {
    CHECK(contracts_of(Kind::all).size() == 12);
    std::size_t total = 0;
    for (auto k : {Kind::spectrum, Kind::observe, Kind::beam_sweep, Kind::asymptotics, Kind::normalform}) {
        total += contracts_of(k).size();
    }
    CHECK(total == 12);
}

TEST_CASE("small run writes artifacts deterministically") {
    auto dir_a = scratch("a"), dir_b = scratch("b");
    auto ca = small_config(dir_a), cb = small_config(dir_b);
    auto a = run(ca);
    auto b = run(cb);
    REQUIRE(a.contracts.size() == 12);
    REQUIRE(a.experiments.size() == 5);
    for (const auto& e : a.experiments) {
        CHECK_MESSAGE(!e.error, e.name << ": " << e.error.value_or(""));
        for (const auto& name : e.artifacts) {
            CHECK(fs::exists(dir_a / name));
            CHECK(slurp(dir_a / name) == slurp(dir_b / name));
        }
    }
    for (std::size_t i = 0; i < a.contracts.size(); ++i) {
        CHECK(a.contracts[i].id == static_cast<int>(i) + 1);
        CHECK(a.contracts[i].passed == b.contracts[i].passed);
        CHECK(a.contracts[i].detail == b.contracts[i].detail);
    }
    auto summary = nlohmann::json::parse(slurp(dir_a / "summary.json"));
    CHECK(summary["schema_version"] == 1);
    CHECK(summary["contracts"].size() == 12);
    CHECK(summary["kind"] == "all");
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("single kind runs only its contracts") {
    auto dir = scratch("nf");
    auto c = small_config(dir);
    c.kind = Kind::normalform;
    auto s = run(c);
    REQUIRE(s.contracts.size() == 2);
    CHECK(s.contracts[0].id == 11);
    CHECK(s.contracts[1].id == 12);
    CHECK(fs::exists(dir / "residual_sweep.csv"));
    CHECK_FALSE(fs::exists(dir / "spectrum.csv"));
    fs::remove_all(dir);
}

TEST_CASE("module errors are recorded, not thrown") {
    auto dir = scratch("err");
    auto c = small_config(dir);
    c.kind = Kind::spectrum;
    c.grid_M = 40;  // tau^2 = 2000 needs more than M/4 levels at n = 1
    c.weyl_tau_sq = 2000.0;
    auto s = run(c);
    REQUIRE(s.experiments.size() == 1);
    REQUIRE(s.experiments[0].error);
    CHECK(s.experiments[0].error->find("M/4") != std::string::npos);
    REQUIRE(s.contracts.size() == 2);
    CHECK_FALSE(s.contracts[0].passed);
    CHECK_FALSE(s.contracts[1].passed);
    CHECK_FALSE(s.all_passed());
    CHECK(fs::exists(dir / "summary.json"));
    fs::remove_all(dir);
}

TEST_CASE("the endpoint T = a is reported without a contract") {
    auto dir = scratch("endpoint");
    auto c = small_config(dir);
    c.kind = Kind::beam_sweep;
    c.T_list = {1.0};
    auto s = run(c);
    REQUIRE(s.contracts.size() == 2);
    CHECK_FALSE(s.contracts[0].passed);
    CHECK(s.contracts[0].detail.find("not scored") != std::string::npos);
    CHECK(s.contracts[0].detail.find("no T < a") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("a window without T > a fails the observability contract") {
    auto dir = scratch("window");
    auto c = small_config(dir);
    c.kind = Kind::beam_sweep;
    c.T_list = {0.5};
    auto s = run(c);
    REQUIRE(s.contracts.size() == 2);
    CHECK_FALSE(s.contracts[1].passed);
    CHECK(s.contracts[1].detail.find("no T > a") != std::string::npos);
    fs::remove_all(dir);
}
