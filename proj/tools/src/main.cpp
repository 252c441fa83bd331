#include "casimir/cli/pipeline.hpp"
#include "casimir/errors.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

enum Exit { ok = 0, config_error = 2, solver_error = 3, not_certified = 4 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string overrides;
};

casimir::cli::RunConfig prepare(const Common& c) {
    casimir::cli::RunConfig cfg = casimir::cli::load_config(c.config);
    if (!c.overrides.empty()) casimir::cli::apply_overrides(cfg, c.overrides);
    if (c.seed) casimir::cli::set_seed(cfg, *c.seed);
    if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
    return cfg;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("config", c.config, "Run configuration (JSON or YAML)")->required();
    sub->add_option("--seed", c.seed, "Override the random seed");
    sub->add_option("--out-dir", c.out_dir, "Output directory");
    sub->add_option("--tol-overrides", c.overrides, "Numerics overrides as key=value[,key=value...]");
}

int run(casimir::cli::RunConfig cfg) {
    const casimir::cli::PipelineResult r = casimir::cli::run_pipeline(cfg);
    casimir::cli::write_outputs(r, cfg.out_dir);
    std::cout << "d,f_leading,f_assembled,rel_dev,certified\n";
    for (const auto& row : r.report["rows"])
        std::cout << row["d"].get<double>() << ',' << row["f_leading"].get<double>() << ','
                  << row["f_assembled"].get<double>() << ',' << row["rel_dev_assembled"].get<double>() << ','
                  << (row["certified"].get<bool>() ? "yes" : "no") << '\n';
    if (r.report.contains("fits"))
        std::cout << "slope(f vs d) = " << r.report["fits"]["f_assembled_vs_d"]["slope"].get<double>() << '\n';
    std::cout << "report: " << (std::filesystem::path(cfg.out_dir) / "report.json").string() << '\n';
    return r.certified ? ok : not_certified;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermal Casimir force between conducting slabs from the loop formalism"};
    app.require_subcommand(1);

    Common run_opts, sweep_opts, verify_opts;
    std::vector<double> d_list;
    CLI::App* run_cmd = app.add_subcommand("run", "Run the pipeline for the configured separations");
    add_common(run_cmd, run_opts);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run the pipeline over an explicit list of separations");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--d-list", d_list, "Separations in the config's length unit")->required()->delimiter(',');
    CLI::App* verify_cmd = app.add_subcommand("verify", "Check module invariants for a configuration");
    add_common(verify_cmd, verify_opts);
    CLI::App* zeta_cmd = app.add_subcommand("zeta3", "Compare the zeta(3)/2 quadrature with its series");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*run_cmd) return run(prepare(run_opts));
        if (*sweep_cmd) {
            casimir::cli::RunConfig cfg = prepare(sweep_opts);
            casimir::cli::set_d_list(cfg, d_list);
            return run(cfg);
        }
        if (*verify_cmd) {
            const casimir::cli::RunConfig cfg = prepare(verify_opts);
            const casimir::cli::VerifyResult v = casimir::cli::verify_suite(cfg);
            std::filesystem::create_directories(cfg.out_dir);
            std::ofstream(std::filesystem::path(cfg.out_dir) / "verify.json") << v.to_json().dump(2) << '\n';
            for (const auto& c : v.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " threshold=" << c.threshold
                          << (c.expected_fail ? " (expected to fail)" : "") << (c.note.empty() ? "" : " [" + c.note + "]")
                          << '\n';
            std::cout << (v.ok ? "verify: ok\n" : "verify: unexpected results\n");
            return v.ok ? ok : not_certified;
        }
        if (*zeta_cmd) {
            std::cout << casimir::cli::zeta3_report().dump(2) << '\n';
            return ok;
        }
    } catch (const casimir::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const casimir::ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const casimir::SolverError& e) {
        std::cerr << "solver error: " << e.what() << " (condition ~ " << e.condition() << ")\n";
        return solver_error;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return solver_error;
    }
    return ok;
}
