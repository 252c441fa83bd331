#include "casimir/cli/pipeline.hpp"

#include "casimir/errors.hpp"

#include <chrono>
#include <cmath>
#include <algorithm>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace casimir::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CellOptions cell_options(const Numerics& n, std::uint64_t seed) {
    CellOptions c;
    c.p_max = n.p_max;
    c.n_steps = n.n_steps;
    c.n_paths = n.n_paths;
    c.seed = seed;
    return c;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

json fit_json(const num::LinearFit& f) { return {{"slope", f.slope}, {"slope_stderr", f.slope_stderr}}; }

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
    const auto t_start = Clock::now();
    const Numerics& nm = cfg.numerics;
    const ThermoState& th = cfg.thermo;
    PipelineResult out;
    json& tm = out.timings;

    auto t0 = Clock::now();
    const DensityProfile A = DensityProfile::build(th, cfg.A.species, cell_options(nm, derive_seed(cfg.seed, 0)), cfg.A.neutral);
    const DensityProfile B = DensityProfile::build(th, cfg.B.species, cell_options(nm, derive_seed(cfg.seed, 1)), cfg.B.neutral);
    tm["sample"] = seconds_since(t0);

    const double lam_s = A.lambda_screen();
    if (!std::isfinite(lam_s)) throw SolverError("pipeline: slab A has no screening (kappa = 0)");
    std::vector<double> ds = cfg.d;
    for (double r : cfg.d_screen) ds.push_back(r * lam_s);

    // Probe loops of the first species in the middle of each slab for the screening-cloud test.
    const BridgeSampler probes(nm.n_steps, derive_seed(cfg.seed, 2));
    const Loop probe_A{{-0.5 * cfg.a, 0.0, 0.0}, A.species[0].params, probes.sample(1, 0)};
    const Loop probe_B{{0.5 * cfg.b, 0.0, 0.0}, B.species[0].params, probes.sample(1, 1)};

    SlabGeometry g;
    g.a = cfg.a;
    g.b = cfg.b;
    g.h = nm.h;
    g.d = ds.front();
    t0 = Clock::now();
    const UrsellLeading u = leading_ursell(A, B, g, th, probe_A, probe_B, KSequence{nm.k0, nm.k_levels});
    tm["screening"] = seconds_since(t0);

    // Zero in-plane wavevector magnetic capacitor term on a sampled pair.
    t0 = Clock::now();
    const FormFactor ff{nm.k_cut};
    const BridgeSampler mag_s(nm.mag_n_steps, derive_seed(cfg.seed, 3));
    MagneticFixture mag{Loop{{0, 0, 0}, A.species[0].params, mag_s.sample(1, 0)},
                        Loop{{0, 0, 0}, B.species[0].params, mag_s.sample(1, 1)}, th, ff, {}};
    // The window is measured in the kernel's own range: photon thermal length over 2 pi, cutoff or de Broglie length.
    const double mag_unit = std::max({th.lambda_ph() / (2.0 * M_PI), 1.0 / nm.k_cut, A.lambda_mat(), B.lambda_mat()});
    for (int i = 0; i < nm.mag_points; ++i)
        mag.X.push_back(mag_unit * nm.mag_x_min *
                        std::pow(nm.mag_x_max / nm.mag_x_min, static_cast<double>(i) / (nm.mag_points - 1)));
    const CapacitorResult cap = capacitor_force(A, cfg.a, B, cfg.b, mag);
    tm["capacitor"] = seconds_since(t0);
    const bool mag_ok = cap.magnetic.exponent > nm.mag_power;

    // Loop pairs for the O(d^-2) magnetic-force remainder estimate.
    const BridgeSampler rem_s(nm.n_steps, derive_seed(cfg.seed, 4));
    std::vector<std::pair<Loop, Loop>> pairs;
    for (int m = 0; m < 8; ++m)
        pairs.emplace_back(Loop{{-0.5 * cfg.a, 0, 0}, A.species[0].params, rem_s.sample(1, 2 * m)},
                           Loop{{0.5 * cfg.b, 0, 0}, B.species[0].params, rem_s.sample(1, 2 * m + 1)});

    t0 = Clock::now();
    AssemblyOptions opt;
    opt.sumrule_tol = nm.sumrule_tol;
    opt.q_max_table = nm.q_max;
    opt.q_points = nm.q_points;
    json rows = json::array();
    std::vector<double> fd, fa, dev_fin;
    bool all_certified = true;
    std::ostringstream csv;
    csv << "d,d_over_lambda_screen,alpha,regime,f_leading,f_assembled,f_finite_d,rel_dev_assembled,rel_dev_finite_d,"
           "capacitor_el,magnetic_remainder_bound,eq2,eq3,eq4,eq5,certified\n";
    for (double d : ds) {
        g.d = d;
        double s2 = 0.0;
        for (const auto& [li, lj] : pairs)
            s2 += std::norm(wm_partial_far(li, lj, {1.0 / d, 0.0}, d, th, ff).dx1);
        opt.dwm_rms = std::sqrt(s2 / static_cast<double>(pairs.size()));
        ForceBreakdown fb = assemble_force(g, u, th, opt);
        fb.capacitor_el = cap.electrostatic;
        fb.capacitor_mag_exponent = cap.magnetic.exponent;
        fb.capacitor_mag_bound_only = cap.magnetic.bound_only;
        fb.certified = fb.certified && mag_ok && std::isfinite(fb.capacitor_el);
        all_certified = all_certified && fb.certified;

        const double rel_a = fb.f_assembled / fb.f_leading - 1.0;
        const double rel_f = fb.f_finite_d / fb.f_leading - 1.0;
        fd.push_back(d);
        fa.push_back(std::abs(fb.f_assembled));
        dev_fin.push_back(std::abs(rel_f));
        const LifshitzTable& L = fb.lifshitz;
        rows.push_back({{"d", d},
                        {"d_over_lambda_screen", d / lam_s},
                        {"alpha", fb.regime.alpha},
                        {"regime", to_string(fb.regime.regime)},
                        {"f_leading", fb.f_leading},
                        {"f_assembled", fb.f_assembled},
                        {"f_finite_d", fb.f_finite_d},
                        {"rel_dev_assembled", rel_a},
                        {"rel_dev_finite_d", rel_f},
                        {"capacitor_el", fb.capacitor_el},
                        {"capacitor_mag_exponent", fb.capacitor_mag_exponent},
                        {"magnetic_remainder_bound", fb.magnetic_remainder_bound},
                        {"lifshitz", {{"eq2", L.eq2}, {"eq3", L.eq3}, {"eq4", L.eq4}, {"eq5", L.eq5}}},
                        {"residuals",
                         {{"bracket_A", fb.bracket_A + 1.0},
                          {"bracket_B", fb.bracket_B + 1.0},
                          {"bracket_err_A", fb.bracket_err_A},
                          {"bracket_err_B", fb.bracket_err_B},
                          {"w_term_A", fb.w_term_A},
                          {"w_term_B", fb.w_term_B}}},
                        {"certified", fb.certified}});
        csv << fmt(d) << ',' << fmt(d / lam_s) << ',' << fmt(fb.regime.alpha) << ',' << to_string(fb.regime.regime) << ','
            << fmt(fb.f_leading) << ',' << fmt(fb.f_assembled) << ',' << fmt(fb.f_finite_d) << ',' << fmt(rel_a) << ','
            << fmt(rel_f) << ',' << fmt(fb.capacitor_el) << ',' << fmt(fb.magnetic_remainder_bound) << ','
            << fmt(L.eq2) << ',' << fmt(L.eq3) << ',' << fmt(L.eq4) << ',' << fmt(L.eq5) << ','
            << (fb.certified ? 1 : 0) << '\n';
        out.rows.push_back(std::move(fb));
    }
    tm["assemble"] = seconds_since(t0);

    std::ostringstream icsv;
    icsv << "q,integrand\n";
    const ForceBreakdown& first = out.rows.front();
    for (std::size_t i = 0; i < first.q_grid.size(); ++i) icsv << fmt(first.q_grid[i]) << ',' << fmt(first.integrand[i]) << '\n';

    json& rep = out.report;
    rep["config_hash"] = config_hash(cfg);
    rep["seed"] = cfg.seed;
    rep["lambda_screen"] = {{"A", lam_s}, {"B", B.lambda_screen()}};
    rep["lambda_mat"] = {{"A", A.lambda_mat()}, {"B", B.lambda_mat()}};
    rep["lambda_ph"] = th.lambda_ph();
    const Hierarchy hier = g.hierarchy(nm.k_cut, std::max(A.lambda_mat(), B.lambda_mat()), th.lambda_ph(),
                                       std::max(lam_s, B.lambda_screen()));
    rep["hierarchy"] = {{"quantum_ordered", hier.quantum_ordered}, {"screening_ordered", hier.screening_ordered}};
    rep["residuals"] = {{"bracket_A", u.A.value.value + 1.0},
                        {"bracket_B", u.B.value.value + 1.0},
                        {"bracket_err_A", u.A.value.error},
                        {"bracket_err_B", u.B.value.error},
                        {"w_term_A", first.w_term_A},
                        {"w_term_B", first.w_term_B},
                        {"hnn", u.hnn},
                        {"tolerance", nm.sumrule_tol}};
    rep["f_leading"] = first.f_leading;
    rep["capacitor_el"] = cap.electrostatic;
    rep["capacitor_mag_exponent"] = cap.magnetic.exponent;
    rep["capacitor_mag_bound_only"] = cap.magnetic.bound_only;
    rep["capacitor_mag_points_used"] = cap.magnetic.points_used;
    rep["capacitor_mag_window"] = {mag.X.front(), mag.X.back()};
    rep["lifshitz"] = {{"eq2", first.lifshitz.eq2}, {"eq3", first.lifshitz.eq3}, {"eq4", first.lifshitz.eq4},
                       {"eq5", first.lifshitz.eq5}};
    rep["rows"] = rows;
    if (fd.size() >= 2) {
        rep["fits"] = {{"f_assembled_vs_d", fit_json(num::loglog_fit(fd, fa))},
                       {"finite_d_deviation_vs_d", fit_json(num::loglog_fit(fd, dev_fin))}};
    }
    rep["certified"] = all_certified;
    out.certified = all_certified;
    out.sweep_csv = csv.str();
    out.integrand_csv = icsv.str();

    tm["total"] = seconds_since(t_start);
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    tm["finished_at"] = stamp;
    tm["config_hash"] = rep["config_hash"];
    return out;
}

void write_outputs(const PipelineResult& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream os(std::filesystem::path(dir) / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + name + " in " + dir);
        os << text;
    };
    put("report.json", r.report.dump(2) + "\n");
    put("timings.json", r.timings.dump(2) + "\n");
    put("sweep.csv", r.sweep_csv);
    put("integrand.csv", r.integrand_csv);
}

json zeta3_report() {
    const num::QuadResult q = zeta3_quadrature();
    const SeriesOracle s = zeta3_half_series();
    return {{"quadrature", q.value},
            {"quadrature_error", q.abserr},
            {"series", s.value},
            {"series_tail_bound", s.tail_bound},
            {"abs_difference", std::abs(q.value - s.value)},
            {"zeta3_over_2", kZeta3 / 2.0}};
}

}  // namespace casimir::cli
