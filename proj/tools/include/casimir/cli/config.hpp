#pragma once

#include "casimir/force.hpp"
#include "casimir/screening.hpp"

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace casimir::cli {

using nlohmann::json;

// Schema violation in a run configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Units { reduced, gaussian, si };

struct SlabSpec {
    std::vector<SpeciesSpec> species;  // already in reduced units
    bool neutral = true;
};

struct Numerics {
    int n_steps = 32;
    int p_max = 2;
    int n_paths = 256;
    double h = 0.05;
    double k0 = 0.1;
    int k_levels = 6;
    int q_points = 81;
    double q_max = 20.0;
    double sumrule_tol = 1e-2;
    double k_cut = 10.0;
    int mag_n_steps = 64;
    int mag_points = 21;
    double mag_x_min = 5.0;
    double mag_x_max = 50.0;
    double mag_power = 4.0;  // magnetic capacitor integrand must decay faster than X^-power
    // mag_x_min / mag_x_max are in units of max(lambda_ph / 2 pi, 1 / k_cut, lambda_mat).
};

struct RunConfig {
    Units units = Units::reduced;
    ThermoState thermo;
    double a = 10.0, b = 10.0;
    SlabSpec A, B;
    Numerics numerics;
    std::vector<double> d;          // absolute separations, reduced length units
    std::vector<double> d_screen;   // separations in units of slab A's screening length
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    double length_scale = 1.0;      // input length unit per reduced length unit
    json canonical;                 // normalized document the hash is taken over
};

// Parses JSON or YAML (chosen by extension, falling back to content sniffing).
json load_document(const std::string& path);
json parse_document(const std::string& text, bool yaml);

// Validates and converts to reduced units.
RunConfig config_from_json(const json& doc);
RunConfig load_config(const std::string& path);

// key=value list, comma or whitespace separated; keys are Numerics fields.
void apply_overrides(RunConfig& cfg, const std::string& overrides);
void set_seed(RunConfig& cfg, std::uint64_t seed);
// Separations in the config's input length unit.
void set_d_list(RunConfig& cfg, const std::vector<double>& d);

// Re-derives the canonical document after programmatic edits.
void refresh_canonical(RunConfig& cfg);

// 64-bit FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);

// Reduced-unit conversion scales for a physical system at temperature T with length unit L.
struct UnitScales {
    double length = 1.0;   // L in the input system's length unit
    double energy = 1.0;   // k_B T in the input energy unit
    double mass = 1.0;     // hbar^2 / (k_B T L^2)
    double charge = 1.0;   // sqrt(k_B T L) (Gaussian) or sqrt(4 pi eps0 k_B T L) (SI)
    double c = 1.0;        // reduced speed of light c hbar / (k_B T L)
};
UnitScales unit_scales(Units u, double temperature, double length_unit);

}  // namespace casimir::cli
