#include "casimir/cli/config.hpp"
#include "casimir/cli/pipeline.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace casimir;
using namespace casimir::cli;
namespace fs = std::filesystem;

namespace {

std::string config_dir() {
    const char* d = std::getenv("CASIMIR_CONFIG_DIR");
    return d ? d : "configs";
}

json minimal_doc() {
    return json::parse(R"({
      "units": "reduced",
      "thermo": {"beta": 1.0},
      "slabs": {"a": 10.0, "b": 10.0,
        "A": {"species": [
          {"name": "e", "charge": -1.0, "mass": 11.111111111111111, "density": 0.039788735772973836},
          {"name": "i", "charge": 1.0, "mass": 11.111111111111111, "density": 0.039788735772973836}]}},
      "numerics": {"n_paths": 64},
      "sweep": {"d_over_lambda_screen": [100, 200, 400]},
      "seed": 3
    })");
}

// Runs the CLI binary and returns its exit status.
int run_cli(const std::string& args) {
    const char* bin = std::getenv("CASIMIR_BIN");
    REQUIRE(bin != nullptr);
    const int rc = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("casimir_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("shipped configs parse in both formats") {
    const RunConfig two = load_config(config_dir() + "/two_species.yaml");
    CHECK(two.A.species.size() == 2);
    CHECK(two.B.species.size() == 2);
    CHECK(two.d_screen == std::vector<double>{100, 200, 400});
    CHECK(two.seed == 1);
    const RunConfig three = load_config(config_dir() + "/three_species.json");
    CHECK(three.A.species.size() == 3);
    CHECK(three.seed == 7);
}

TEST_CASE("JSON and YAML spellings of one config are equivalent") {
    const json doc = minimal_doc();
    const std::string yaml = R"(
units: reduced
thermo: {beta: 1.0}
slabs:
  a: 10.0
  b: 10.0
  A:
    species:
      - {name: e, charge: -1.0, mass: 11.111111111111111, density: 0.039788735772973836}
      - {name: i, charge: 1.0, mass: 11.111111111111111, density: 0.039788735772973836}
numerics: {n_paths: 64}
sweep: {d_over_lambda_screen: [100, 200, 400]}
seed: 3
)";
    const RunConfig a = config_from_json(doc), b = config_from_json(parse_document(yaml, true));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("schema violations are reported as ConfigError") {
    auto expect_error = [](const std::function<void(json&)>& edit) {
        json doc = minimal_doc();
        edit(doc);
        CHECK_THROWS_AS(config_from_json(doc), ConfigError);
    };
    expect_error([](json& d) { d["units"] = "furlongs"; });
    expect_error([](json& d) { d["extra"] = 1; });
    expect_error([](json& d) { d.erase("slabs"); });
    expect_error([](json& d) { d.erase("sweep"); });
    expect_error([](json& d) { d["thermo"]["beta"] = -1.0; });
    expect_error([](json& d) { d["numerics"]["bogus"] = 1; });
    expect_error([](json& d) { d["numerics"]["k_levels"] = 1; });
    expect_error([](json& d) { d["slabs"]["A"]["species"][0]["density"] = 0.05; });  // not neutral
    expect_error([](json& d) { d["slabs"]["A"]["species"][0]["statistics"] = "anyon"; });
    expect_error([](json& d) { d["slabs"]["A"]["species"] = json::array(); });
    expect_error([](json& d) { d["seed"] = -4; });
    CHECK_THROWS_AS(parse_document("{not json", false), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.yaml"), ConfigError);
}

TEST_CASE("overrides, seed and separations") {
    RunConfig cfg = config_from_json(minimal_doc());
    const std::string h0 = config_hash(cfg);
    apply_overrides(cfg, "sumrule_tol=0.005, h=0.1");
    CHECK(cfg.numerics.sumrule_tol == 0.005);
    CHECK(cfg.numerics.h == 0.1);
    CHECK(config_hash(cfg) != h0);
    CHECK_THROWS_AS(apply_overrides(cfg, "nonsense=1"), ConfigError);
    CHECK_THROWS_AS(apply_overrides(cfg, "h=abc"), ConfigError);

    const std::string h1 = config_hash(cfg);
    set_seed(cfg, 99);
    CHECK(cfg.seed == 99);
    CHECK(config_hash(cfg) != h1);

    set_d_list(cfg, {50.0, 75.0});
    CHECK(cfg.d == std::vector<double>{50.0, 75.0});
    CHECK(cfg.d_screen.empty());
    CHECK_THROWS_AS(set_d_list(cfg, {-1.0}), ConfigError);
}

TEST_CASE("config hash is stable and ignores the output directory") {
    json a = minimal_doc(), b = minimal_doc();
    b["output"] = {{"dir", "somewhere/else"}};
    CHECK(config_hash(config_from_json(a)) == config_hash(config_from_json(b)));
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("physical units reduce consistently") {
    // One electron-proton plasma at 1e5 K with a 1 angstrom length unit, spelled in Gaussian and SI units.
    const double T = 1e5, n_cm3 = 1e20;
    auto doc = [&](const std::string& units, double L, double me, double mp, double e, double n) {
        json d = minimal_doc();
        d["units"] = units;
        d["thermo"] = {{"temperature", T}, {"length_unit", L}};
        d["slabs"]["a"] = 10.0 * L;
        d["slabs"]["b"] = 10.0 * L;
        d["slabs"]["A"]["species"] = json::array({
            {{"name", "e"}, {"charge", -e}, {"mass", me}, {"density", n}},
            {{"name", "p"}, {"charge", e}, {"mass", mp}, {"density", n}},
        });
        return config_from_json(d);
    };
    const RunConfig g = doc("gaussian", 1e-8, 9.1093837015e-28, 1.67262192369e-24, 4.803204712570263e-10, n_cm3);
    const RunConfig s = doc("si", 1e-10, 9.1093837015e-31, 1.67262192369e-27, 1.602176634e-19, n_cm3 * 1e6);
    CHECK(g.thermo.c == doctest::Approx(s.thermo.c).epsilon(1e-8));
    CHECK(g.a == doctest::Approx(10.0).epsilon(1e-14));
    for (std::size_t k = 0; k < 2; ++k) {
        const SpeciesSpec &x = g.A.species[k], &y = s.A.species[k];
        CHECK(x.params.mass == doctest::Approx(y.params.mass).epsilon(1e-8));
        CHECK(x.params.charge == doctest::Approx(y.params.charge).epsilon(1e-8));
        CHECK(x.number_density == doctest::Approx(y.number_density).epsilon(1e-12));
    }
    // hbar^2 / (k_B T L^2) by hand, in SI.
    const double hbar = 1.054571817e-34, kB = 1.380649e-23;
    CHECK(s.A.species[0].params.mass == doctest::Approx(9.1093837015e-31 * kB * T * 1e-20 / (hbar * hbar)).epsilon(1e-9));
    CHECK(s.A.species[0].number_density == doctest::Approx(n_cm3 * 1e-24).epsilon(1e-12));
    CHECK(s.thermo.c == doctest::Approx(299792458.0 * hbar / (kB * T * 1e-10)).epsilon(1e-9));

    const UnitScales r = unit_scales(Units::reduced, T, 1.0);
    CHECK(r.mass == 1.0);
    CHECK(r.charge == 1.0);
}

TEST_CASE("pipeline on a minimal config") {
    const RunConfig cfg = config_from_json(minimal_doc());
    const PipelineResult r = run_pipeline(cfg);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.certified);
    for (const ForceBreakdown& fb : r.rows) {
        CHECK(fb.f_assembled / fb.f_leading == doctest::Approx(1.0).epsilon(2e-2));
        CHECK(fb.capacitor_el == 0.0);
        CHECK(fb.certified);
    }
    CHECK(r.report["config_hash"] == config_hash(cfg));
    CHECK(r.report["rows"].size() == 3);
    CHECK(r.report.at("fits").at("f_assembled_vs_d").at("slope").get<double>() == doctest::Approx(-3.0).epsilon(1e-3));
    CHECK(r.sweep_csv.find("certified") != std::string::npos);

    SUBCASE("reports are byte-identical across runs") {
        CHECK(run_pipeline(cfg).report.dump() == r.report.dump());
    }
    SUBCASE("the leading force does not depend on the species masses") {
        json doc = minimal_doc();
        doc["slabs"]["A"]["species"][0]["mass"] = 30.0;
        doc["slabs"]["A"]["species"][1]["mass"] = 50.0;
        RunConfig heavy = config_from_json(doc);
        set_d_list(heavy, {r.rows[0].d, r.rows[1].d, r.rows[2].d});
        const PipelineResult h = run_pipeline(heavy);
        for (std::size_t i = 0; i < 3; ++i) CHECK(h.rows[i].f_leading == r.rows[i].f_leading);
    }
    SUBCASE("outputs land on disk") {
        const fs::path dir = scratch("outputs");
        write_outputs(r, dir.string());
        for (const char* f : {"report.json", "timings.json", "sweep.csv", "integrand.csv"}) CHECK(fs::exists(dir / f));
        std::ifstream in(dir / "report.json");
        CHECK(json::parse(in)["config_hash"] == config_hash(cfg));
    }
}

TEST_CASE("zeta3 report") {
    const json z = zeta3_report();
    CHECK(z.contains("quadrature"));
    CHECK(std::abs(z["quadrature"].get<double>() - z["series"].get<double>()) < 1e-10);
}

TEST_CASE("binary exit codes") {
    const fs::path dir = scratch("bin");
    const fs::path bad = dir / "bad.json";
    json doc = minimal_doc();
    doc["units"] = "cubits";
    std::ofstream(bad) << doc.dump();
    CHECK(run_cli("run " + bad.string() + " --out-dir " + (dir / "bad").string()) == 2);

    const fs::path good = dir / "good.json";
    std::ofstream(good) << minimal_doc().dump();
    CHECK(run_cli("run " + good.string() + " --out-dir " + (dir / "good").string()) == 0);
    CHECK(fs::exists(dir / "good" / "report.json"));
    CHECK(run_cli("zeta3") == 0);
    CHECK(run_cli("sweep " + good.string() + " --d-list 150,300 --out-dir " + (dir / "sweep").string()) == 0);
    CHECK(run_cli("run " + good.string() + " --tol-overrides nonsense=1") == 2);
}
