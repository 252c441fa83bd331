#pragma once

#include "casimir/cli/config.hpp"

#include <string>
#include <vector>

namespace casimir::cli {

struct PipelineResult {
    json report;    // deterministic for a fixed config and seed
    json timings;   // wall-clock provenance, kept apart from the report
    std::vector<ForceBreakdown> rows;
    std::string sweep_csv;
    std::string integrand_csv;
    bool certified = false;
};

// sample -> solve -> assemble for every separation of the sweep.
PipelineResult run_pipeline(const RunConfig& cfg);

// Writes report.json, sweep.csv, integrand.csv and timings.json into dir.
void write_outputs(const PipelineResult& r, const std::string& dir);

// Quadrature value of the zeta(3)/2 integral next to the series oracle.
json zeta3_report();

struct Check {
    std::string name;
    bool pass = false;
    bool expected_fail = false;  // the check is supposed to fail for this input
    double value = 0.0;
    double threshold = 0.0;
    std::string note;
};

struct VerifyResult {
    std::vector<Check> checks;
    bool ok = false;  // every check passed, or failed where failure is expected
    json to_json() const;
};

VerifyResult verify_suite(const RunConfig& cfg);

}  // namespace casimir::cli
