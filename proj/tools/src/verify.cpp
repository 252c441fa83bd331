#include "casimir/cli/pipeline.hpp"

#include "casimir/errors.hpp"

#include <cmath>
#include <random>

namespace casimir::cli {

json VerifyResult::to_json() const {
    json arr = json::array();
    for (const Check& c : checks)
        arr.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"expected_fail", c.expected_fail},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"note", c.note}});
    return {{"checks", arr}, {"ok", ok}};
}

namespace {

Check below(std::string name, double value, double threshold, std::string note = {}) {
    return Check{std::move(name), std::isfinite(value) && value < threshold, false, value, threshold, std::move(note)};
}

// Lighter versions of the module invariants, sized from the run configuration.
void sampling_checks(const RunConfig& cfg, std::vector<Check>& out) {
    const int n = cfg.numerics.n_steps;
    const BridgeSampler bs(n, derive_seed(cfg.seed, 10));
    const int N = 20000;
    const int ka = n / 4, kb = (3 * n) / 4;
    const double sa = static_cast<double>(ka) / n, sb = static_cast<double>(kb) / n;
    double m = 0.0, m2 = 0.0, ito = 0.0;
    for (int i = 0; i < N; ++i) {
        const Path P = bs.sample(1, static_cast<std::uint64_t>(i));
        const double v = P.X[static_cast<std::size_t>(ka)][0] * P.X[static_cast<std::size_t>(kb)][0];
        m += v;
        m2 += v * v;
        if (i < 32) ito = std::max(ito, std::abs(line_integral(P, [](double, const Vec3&) { return Vec3{1.0, -2.0, 0.5}; })));
    }
    m /= N;
    const double se = std::sqrt((m2 / N - m * m) / N);
    const double expect = std::min(sa, sb) - sa * sb;
    out.push_back(below("bridge_covariance_in_se", std::abs(m - expect) / se, 3.0, "s = 1/4, s' = 3/4, 2e4 samples"));
    out.push_back(Check{"ito_closure", ito == 0.0, false, ito, 0.0, "constant integrand gives exactly 0"});

    std::mt19937_64 rng(derive_seed(cfg.seed, 11));
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    double proj = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 K{U(rng), U(rng), U(rng)};
        const Mat3 P = transverse_delta(K);
        const Eigen::Vector3d k(K[0], K[1], K[2]);
        proj = std::max({proj, (P * P - P).cwiseAbs().maxCoeff(), (P * k).cwiseAbs().maxCoeff() / k.norm()});
    }
    out.push_back(below("projector_law", proj, 1e-14));
}

void kernel_checks(const RunConfig& cfg, std::vector<Check>& out) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 12));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double e1 = 0.0, e2 = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double x1 = -U(rng), x2 = U(rng), q = 0.1 + 3.0 * U(rng), d = 5.0 + 20.0 * U(rng);
        const double exact = coulomb_force_kernel(x1, x2, q, d);
        e1 = std::max(e1, std::abs(exact - oracle::coulomb_force_kernel(x1, x2, q, d)) / std::abs(exact));
        const double x = 2.0 * U(rng) - 1.0;
        const Vec2 qv{0.2 + U(rng), 0.2 + U(rng)};
        for (int mu = 1; mu <= 3; ++mu)
            for (int nu = 1; nu <= 3; ++nu) {
                const cplx c = v_transverse_partial(x, qv, mu, nu);
                const double scale = std::abs(v_transverse_partial(x, qv, 1, 1));
                e2 = std::max(e2, std::abs(c - oracle::v_transverse_partial(x, qv, mu, nu)) / scale);
            }
    }
    out.push_back(below("coulomb_kernel_oracle", e1, 1e-6));
    out.push_back(below("v_transverse_oracle", e2, 1e-8));
}

void screening_checks(const RunConfig& cfg, const DensityProfile& A, std::vector<Check>& out) {
    const ThermoState& th = cfg.thermo;
    const Numerics& nm = cfg.numerics;
    const KSequence ks{nm.k0, nm.k_levels};
    const Region plate{-cfg.a, 0.0, &A, 0.0};

    const BracketResult br = border_bracket(plate, th, 0.0, ks, {nm.h});
    out.push_back(below("border_bracket_sum_rule", std::abs(br.value.value + 1.0), nm.sumrule_tol));

    const BridgeSampler bs(nm.n_steps, derive_seed(cfg.seed, 13));
    const Loop probe{{-0.5 * cfg.a, 0.0, 0.0}, A.species[0].params, bs.sample(1, 0)};
    const SumRuleResult sr = check_perfect_screening({plate}, th, probe, ks, {nm.h}, nm.sumrule_tol);
    out.push_back(below("slab_sum_rule", std::abs(sr.residual), nm.sumrule_tol));

    // Grid doubling at the smallest k of the sequence.
    const double k = ks.values().back();
    const Loop src = point_loop({-0.5, 0.0, 0.0}, A.species[0].params, 1, 2);
    const cplx f1 = ScreeningSolver({plate}, th, k, {nm.h}).solve(src).field(-1.0);
    const cplx f2 = ScreeningSolver({plate}, th, k, {0.5 * nm.h}).solve(src).field(-1.0);
    out.push_back(below("grid_doubling", std::abs(f1 - f2) / std::abs(f2), 1e-3));

    // Factorization of the coupled two-slab solve at q = 1.
    const double ls = A.lambda_screen();
    const double pa = phi0_border(plate, th, 0.0, ks, {nm.h}).value;
    std::vector<double> ds, dev;
    for (double r : {40.0, 80.0, 160.0}) {
        SlabGeometry g{cfg.a, cfg.a, r * ls, nm.h};
        ds.push_back(g.d);
        dev.push_back(std::abs(coupled_phi_AB(A, A, g, th, 1.0).real() / factorize_phi_AB(1.0, g.d, pa, pa) - 1.0));
    }
    out.push_back(below("factorization_slope_error", std::abs(num::loglog_fit(ds, dev).slope + 1.0), 0.1));

    // Without charges nothing screens: the sum rule must fail.
    DensityProfile empty = A;
    for (LoopCell& c : empty.cells) c.rho = 0.0;
    const Region bare{-cfg.a, 0.0, &empty, 0.0};
    const SumRuleResult s0 = check_perfect_screening({bare}, th, probe, ks, {nm.h}, nm.sumrule_tol);
    Check c0{"sum_rule_kappa_zero", s0.converged && std::abs(s0.residual) < nm.sumrule_tol, true, s0.residual,
             nm.sumrule_tol, s0.divergent ? "divergent: no screening cloud" : ""};
    out.push_back(c0);
}

void scaling_checks(const RunConfig& cfg, const DensityProfile& A, std::vector<Check>& out) {
    const ThermoState& th = cfg.thermo;
    const FormFactor ff{cfg.numerics.k_cut};
    const BridgeSampler bs(cfg.numerics.n_steps, derive_seed(cfg.seed, 14));
    std::vector<double> ds, w, dw;
    for (double d : {10.0, 31.6227766016838, 100.0, 316.227766016838, 1000.0}) {
        double s1 = 0.0, s2 = 0.0;
        for (int m = 0; m < 4; ++m) {
            const Loop i{{0, 0, 0}, A.species[0].params, bs.sample(1, 2 * m)};
            const Loop j{{0, 0, 0}, A.species[0].params, bs.sample(1, 2 * m + 1)};
            s1 += std::norm(wm_partial_far(i, j, {1.0 / d, 0.0}, d, th, ff, {false, false}).value);
            s2 += std::norm(wm_partial_far(i, j, {1.0 / d, 0.0}, d, th, ff).dx1);
        }
        ds.push_back(d);
        w.push_back(std::sqrt(s1));
        dw.push_back(std::sqrt(s2));
    }
    out.push_back(below("w_ab_slope_error", std::abs(num::loglog_fit(ds, w).slope + 1.0), 0.05));
    out.push_back(below("dwm_ab_slope_error", std::abs(num::loglog_fit(ds, dw).slope + 2.0), 0.1));
}

void force_checks(const RunConfig& cfg, const DensityProfile& A, std::vector<Check>& out) {
    const json z = zeta3_report();
    out.push_back(below("zeta3_quadrature_vs_series", z["abs_difference"].get<double>(), 1e-10));
    const LifshitzTable t = lifshitz_table(cfg.thermo, 1e3 * cfg.thermo.lambda_ph());
    out.push_back(Check{"lifshitz_ratio_high_T", t.eq4 / t.eq5 == 2.0, false, t.eq4 / t.eq5, 2.0, "exact"});
    const std::vector<double> c(11, A.charge_density(0.0));
    const double cap = capacitor_electrostatic(c, 0.1, c, 0.1);
    const bool neutral = cfg.A.neutral && cfg.B.neutral;
    out.push_back(Check{"capacitor_neutral_zero", !neutral || cap == 0.0, false, cap, 0.0,
                        neutral ? "neutral slabs" : "slabs not neutral: skipped"});
}

}  // namespace

VerifyResult verify_suite(const RunConfig& cfg) {
    VerifyResult r;
    auto guarded = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            r.checks.push_back(Check{name, false, false, 0.0, 0.0, std::string("exception: ") + e.what()});
        }
    };
    CellOptions co;
    co.p_max = cfg.numerics.p_max;
    co.n_steps = cfg.numerics.n_steps;
    co.n_paths = cfg.numerics.n_paths;
    co.seed = derive_seed(cfg.seed, 0);
    const DensityProfile A = DensityProfile::build(cfg.thermo, cfg.A.species, co, cfg.A.neutral);

    guarded("sampling", [&] { sampling_checks(cfg, r.checks); });
    guarded("kernels", [&] { kernel_checks(cfg, r.checks); });
    guarded("screening", [&] { screening_checks(cfg, A, r.checks); });
    guarded("scaling", [&] { scaling_checks(cfg, A, r.checks); });
    guarded("force", [&] { force_checks(cfg, A, r.checks); });
    r.ok = true;
    for (const Check& c : r.checks) r.ok = r.ok && (c.pass != c.expected_fail);
    return r;
}

}  // namespace casimir::cli
