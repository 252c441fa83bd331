#include "casimir/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace casimir::cli {

namespace {

json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto& e : n) arr.push_back(yaml_to_json(e));
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto& kv : n) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return obj;
        }
        case YAML::NodeType::Scalar: break;
    }
    const std::string s = n.Scalar();
    if (n.Tag() == "!") return s;  // quoted scalar stays a string
    bool b = false;
    if (YAML::convert<bool>::decode(n, b) && s != "0" && s != "1") return b;
    long long i = 0;
    if (YAML::convert<long long>::decode(n, i)) return i;
    double d = 0.0;
    if (YAML::convert<double>::decode(n, d)) return d;
    return s;
}

bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

// Field accessors that turn type mismatches into schema errors with a path.
const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
    return x;
}

double positive(const json& v, const std::string& where) {
    const double x = number(v, where);
    if (!(x > 0.0)) throw ConfigError(where + ": must be positive");
    return x;
}

int positive_int(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() <= 0) throw ConfigError(where + ": expected a positive integer");
    return static_cast<int>(v.get<long long>());
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected a mapping");
    for (const auto& [k, v] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

constexpr double kKbCgs = 1.380649e-16, kHbarCgs = 1.054571817e-27, kCCgs = 2.99792458e10;
constexpr double kKbSi = 1.380649e-23, kHbarSi = 1.054571817e-34, kCSi = 2.99792458e8, kEps0 = 8.8541878128e-12;

// Numerics fields by name, shared by the schema reader and the override parser.
struct Knob {
    const char* name;
    std::function<void(Numerics&, const json&, const std::string&)> set;
    std::function<json(const Numerics&)> get;
};

#define CASIMIR_INT_KNOB(f) \
    Knob{#f, [](Numerics& n, const json& v, const std::string& w) { n.f = positive_int(v, w); }, \
         [](const Numerics& n) { return json(n.f); }}
#define CASIMIR_POS_KNOB(f) \
    Knob{#f, [](Numerics& n, const json& v, const std::string& w) { n.f = positive(v, w); }, \
         [](const Numerics& n) { return json(n.f); }}

const std::vector<Knob>& knobs() {
    static const std::vector<Knob> k{
        CASIMIR_INT_KNOB(n_steps),     CASIMIR_INT_KNOB(p_max),      CASIMIR_INT_KNOB(n_paths),
        CASIMIR_POS_KNOB(h),           CASIMIR_POS_KNOB(k0),         CASIMIR_INT_KNOB(k_levels),
        CASIMIR_INT_KNOB(q_points),    CASIMIR_POS_KNOB(q_max),      CASIMIR_POS_KNOB(sumrule_tol),
        CASIMIR_POS_KNOB(k_cut),       CASIMIR_INT_KNOB(mag_n_steps), CASIMIR_INT_KNOB(mag_points),
        CASIMIR_POS_KNOB(mag_x_min),   CASIMIR_POS_KNOB(mag_x_max),  CASIMIR_POS_KNOB(mag_power),
    };
    return k;
}

#undef CASIMIR_INT_KNOB
#undef CASIMIR_POS_KNOB

const Knob* find_knob(const std::string& name) {
    for (const Knob& k : knobs())
        if (name == k.name) return &k;
    return nullptr;
}

void check_numerics(const Numerics& n) {
    if (n.k_levels < 2) throw ConfigError("numerics.k_levels: need at least 2 levels for extrapolation");
    if (n.n_steps < 2) throw ConfigError("numerics.n_steps: must be >= 2");
    if (n.mag_n_steps < 2) throw ConfigError("numerics.mag_n_steps: must be >= 2");
    if (n.q_points < 2) throw ConfigError("numerics.q_points: must be >= 2");
    if (n.mag_points < 3) throw ConfigError("numerics.mag_points: must be >= 3");
    if (!(n.mag_x_max > n.mag_x_min)) throw ConfigError("numerics.mag_x_max: must exceed mag_x_min");
}

struct Scales {
    UnitScales u;
    double density = 1.0;  // multiply input densities by L^3
};

SlabSpec read_slab(const json& s, const std::string& where, const ThermoState& th, const Scales& sc) {
    check_keys(s, {"species", "neutral"}, where);
    SlabSpec out;
    if (s.contains("neutral")) {
        if (!s["neutral"].is_boolean()) throw ConfigError(where + ".neutral: expected a boolean");
        out.neutral = s["neutral"].get<bool>();
    }
    const json& list = require(s, "species", where);
    if (!list.is_array() || list.empty()) throw ConfigError(where + ".species: expected a non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string w = where + ".species[" + std::to_string(i) + "]";
        const json& e = list[i];
        check_keys(e, {"name", "charge", "mass", "spin", "statistics", "density"}, w);
        SpeciesSpec sp;
        sp.name = e.value("name", "species" + std::to_string(i));
        const double charge = number(require(e, "charge", w), w + ".charge") / sc.u.charge;
        const double mass = positive(require(e, "mass", w), w + ".mass") / sc.u.mass;
        const double spin = e.contains("spin") ? number(e["spin"], w + ".spin") : 0.5;
        int eta = -1;
        if (e.contains("statistics")) {
            const std::string st = e["statistics"].is_string() ? e["statistics"].get<std::string>() : "";
            if (st == "boson") eta = 1;
            else if (st == "fermion") eta = -1;
            else throw ConfigError(w + ".statistics: expected 'boson' or 'fermion'");
        }
        sp.number_density = positive(require(e, "density", w), w + ".density") * sc.density;
        try {
            sp.params = SpeciesParams::make(th, charge, mass, spin, eta);
        } catch (const std::exception& ex) {
            throw ConfigError(w + ": " + ex.what());
        }
        out.species.push_back(sp);
    }
    if (out.neutral) {
        double net = 0.0, scale = 0.0;
        for (const SpeciesSpec& sp : out.species) {
            net += sp.params.charge * sp.number_density;
            scale += std::abs(sp.params.charge) * sp.number_density;
        }
        if (std::abs(net) > 1e-10 * scale) throw ConfigError(where + ": neutral = true but sum of charge * density is not 0");
    }
    return out;
}

json slab_json(const SlabSpec& s) {
    json arr = json::array();
    for (const SpeciesSpec& sp : s.species)
        arr.push_back({{"name", sp.name},
                       {"charge", sp.params.charge},
                       {"mass", sp.params.mass},
                       {"spin", sp.params.spin},
                       {"eta", sp.params.eta},
                       {"density", sp.number_density}});
    return {{"neutral", s.neutral}, {"species", arr}};
}

}  // namespace

json parse_document(const std::string& text, bool yaml) {
    try {
        if (yaml) return yaml_to_json(YAML::Load(text));
        return json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

json load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    bool yaml = ends_with(path, ".yaml") || ends_with(path, ".yml");
    if (!yaml && !ends_with(path, ".json")) {
        const auto first = text.find_first_not_of(" \t\r\n");
        yaml = first == std::string::npos || text[first] != '{';
    }
    return parse_document(text, yaml);
}

UnitScales unit_scales(Units u, double T, double L) {
    UnitScales s;
    if (u == Units::reduced) return s;
    const bool si = u == Units::si;
    const double kT = (si ? kKbSi : kKbCgs) * T, hbar = si ? kHbarSi : kHbarCgs, c = si ? kCSi : kCCgs;
    s.length = L;
    s.energy = kT;
    s.mass = hbar * hbar / (kT * L * L);
    s.charge = std::sqrt((si ? 4.0 * M_PI * kEps0 : 1.0) * kT * L);
    s.c = c * hbar / (kT * L);
    return s;
}

RunConfig config_from_json(const json& doc) {
    check_keys(doc, {"units", "thermo", "slabs", "numerics", "sweep", "seed", "output"}, "config");
    RunConfig cfg;
    const json& units = require(doc, "units", "config");
    const std::string us = units.is_string() ? units.get<std::string>() : "";
    if (us == "reduced") cfg.units = Units::reduced;
    else if (us == "gaussian") cfg.units = Units::gaussian;
    else if (us == "si") cfg.units = Units::si;
    else throw ConfigError("config.units: expected 'reduced', 'gaussian' or 'si'");

    Scales sc;
    const json& th = require(doc, "thermo", "config");
    if (cfg.units == Units::reduced) {
        check_keys(th, {"beta", "hbar", "c"}, "thermo");
        cfg.thermo.beta = th.contains("beta") ? positive(th["beta"], "thermo.beta") : 1.0;
        cfg.thermo.hbar = th.contains("hbar") ? positive(th["hbar"], "thermo.hbar") : 1.0;
        cfg.thermo.c = th.contains("c") ? positive(th["c"], "thermo.c") : 1.0;
    } else {
        check_keys(th, {"temperature", "length_unit"}, "thermo");
        const double T = positive(require(th, "temperature", "thermo"), "thermo.temperature");
        const double L = positive(require(th, "length_unit", "thermo"), "thermo.length_unit");
        sc.u = unit_scales(cfg.units, T, L);
        sc.density = L * L * L;
        cfg.thermo.c = sc.u.c;
    }
    cfg.thermo.validate();

    const json& slabs = require(doc, "slabs", "config");
    check_keys(slabs, {"a", "b", "A", "B"}, "slabs");
    cfg.a = positive(require(slabs, "a", "slabs"), "slabs.a") / sc.u.length;
    cfg.b = positive(require(slabs, "b", "slabs"), "slabs.b") / sc.u.length;
    cfg.A = read_slab(require(slabs, "A", "slabs"), "slabs.A", cfg.thermo, sc);
    cfg.B = slabs.contains("B") ? read_slab(slabs["B"], "slabs.B", cfg.thermo, sc) : cfg.A;

    if (doc.contains("numerics")) {
        const json& n = doc["numerics"];
        if (!n.is_object()) throw ConfigError("numerics: expected a mapping");
        for (const auto& [k, v] : n.items()) {
            const Knob* knob = find_knob(k);
            if (!knob) throw ConfigError("numerics: unknown key '" + k + "'");
            knob->set(cfg.numerics, v, "numerics." + k);
        }
    }
    check_numerics(cfg.numerics);
    if (cfg.numerics.h > std::min(cfg.a, cfg.b)) throw ConfigError("numerics.h: larger than a slab thickness");

    const json& sweep = require(doc, "sweep", "config");
    check_keys(sweep, {"d", "d_over_lambda_screen"}, "sweep");
    auto read_list = [](const json& v, const std::string& w, double scale) {
        if (!v.is_array() || v.empty()) throw ConfigError(w + ": expected a non-empty list");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(positive(v[i], w + "[" + std::to_string(i) + "]") / scale);
        return out;
    };
    if (sweep.contains("d")) cfg.d = read_list(sweep["d"], "sweep.d", sc.u.length);
    if (sweep.contains("d_over_lambda_screen"))
        cfg.d_screen = read_list(sweep["d_over_lambda_screen"], "sweep.d_over_lambda_screen", 1.0);
    if (cfg.d.empty() && cfg.d_screen.empty()) throw ConfigError("sweep: give 'd' or 'd_over_lambda_screen'");

    if (doc.contains("seed")) {
        const json& s = doc["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("seed: expected a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("output")) {
        check_keys(doc["output"], {"dir"}, "output");
        if (doc["output"].contains("dir")) {
            if (!doc["output"]["dir"].is_string()) throw ConfigError("output.dir: expected a string");
            cfg.out_dir = doc["output"]["dir"].get<std::string>();
        }
    }
    cfg.length_scale = sc.u.length;
    refresh_canonical(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) { return config_from_json(load_document(path)); }

void refresh_canonical(RunConfig& cfg) {
    json n = json::object();
    for (const Knob& k : knobs()) n[k.name] = k.get(cfg.numerics);
    cfg.canonical = {
        {"thermo", {{"beta", cfg.thermo.beta}, {"hbar", cfg.thermo.hbar}, {"c", cfg.thermo.c}}},
        {"slabs", {{"a", cfg.a}, {"b", cfg.b}, {"A", slab_json(cfg.A)}, {"B", slab_json(cfg.B)}}},
        {"numerics", n},
        {"sweep", {{"d", cfg.d}, {"d_over_lambda_screen", cfg.d_screen}}},
        {"seed", cfg.seed},
    };
}

void apply_overrides(RunConfig& cfg, const std::string& overrides) {
    std::string s = overrides;
    for (char& ch : s)
        if (ch == ',' || ch == ';') ch = ' ';
    std::istringstream is(s);
    std::string item;
    while (is >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--tol-overrides: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        const Knob* knob = find_knob(key);
        if (!knob) throw ConfigError("--tol-overrides: unknown key '" + key + "'");
        json v;
        try {
            v = json::parse(val);
        } catch (const std::exception&) {
            throw ConfigError("--tol-overrides: value for '" + key + "' is not a number");
        }
        knob->set(cfg.numerics, v, "--tol-overrides " + key);
    }
    check_numerics(cfg.numerics);
    refresh_canonical(cfg);
}

void set_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    refresh_canonical(cfg);
}

void set_d_list(RunConfig& cfg, const std::vector<double>& d) {
    for (double x : d)
        if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("--d-list: separations must be positive");
    cfg.d.clear();
    for (double x : d) cfg.d.push_back(x / cfg.length_scale);
    cfg.d_screen.clear();
    refresh_canonical(cfg);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical.dump())));
    return buf;
}

}  // namespace casimir::cli
