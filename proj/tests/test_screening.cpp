#include "casimir/errors.hpp"
#include "casimir/screening.hpp"

#include <doctest.h>

#include <cmath>

using namespace casimir;

namespace {

const ThermoState th{};

std::vector<SpeciesSpec> two_species() {
    const double n = 1.0 / (8.0 * M_PI);
    return {{"e", SpeciesParams::make(th, -1.0, 1.0 / 0.09), n}, {"i", SpeciesParams::make(th, 1.0, 1.0 / 0.09), n}};
}

std::vector<SpeciesSpec> three_species() {
    const double n = 1.0 / (32.0 * M_PI);
    return {{"e", SpeciesParams::make(th, -1.0, 1.0 / 0.09), 3.0 * n},
            {"i1", SpeciesParams::make(th, 1.0, 25.0), n},
            {"i2", SpeciesParams::make(th, 2.0, 1.0 / 0.0225, 0.0, 1), n}};
}

const DensityProfile& plasma() {
    static const DensityProfile p = DensityProfile::build(th, two_species(), CellOptions{}, true);
    return p;
}

const DensityProfile& mixture() {
    CellOptions co;
    co.seed = 7;
    static const DensityProfile p = DensityProfile::build(th, three_species(), co, true);
    return p;
}

const DensityProfile& classical() {
    CellOptions co;
    co.point_loops = true;
    co.p_max = 1;
    static const DensityProfile p = DensityProfile::build(th, two_species(), co, true);
    return p;
}

Loop probe(const DensityProfile& prof, double x, std::uint64_t seed, int p = 1) {
    return Loop{{x, 0.0, 0.0}, prof.species[0].params, sample_bridge(p, 32, seed)};
}

}  // namespace

TEST_CASE("density profile: fugacity, loop densities and screening length") {
    const DensityProfile& p = plasma();
    CHECK(p.cells.size() == 4);
    for (std::size_t g = 0; g < p.species.size(); ++g) {
        double n = 0.0;
        for (const LoopCell& c : p.cells)
            if (c.species == static_cast<int>(g)) n += c.p * c.rho;
        CHECK(n == doctest::Approx(p.species[g].number_density).epsilon(1e-12));
    }
    // Fermion exchange cycles of even length enter with negative weight.
    CHECK(p.cells[1].p == 2);
    CHECK(p.cells[1].rho < 0.0);
    CHECK(p.lambda_screen() == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(p.neutral());
    CHECK(p.charge_density(-3.0) == 0.0);
    const ScreeningField f = screening_field({-2.0, 0.0, &p, 0.0}, 0.5);
    CHECK(f.kappa.size() == 5);
    for (double k : f.kappa) CHECK(k == doctest::Approx(std::sqrt(p.kappa2())));
}

TEST_CASE("density profile: neutrality request is checked") {
    auto sp = two_species();
    sp[0].number_density *= 1.5;
    CHECK_THROWS_AS(DensityProfile::build(th, sp, CellOptions{}, true), ParameterError);
    const DensityProfile charged = DensityProfile::build(th, sp, CellOptions{});
    CHECK(charged.charge_density(-1.0) == doctest::Approx(-0.5 / (8.0 * M_PI)));
}

TEST_CASE("slab geometry validation and hierarchy flags") {
    SlabGeometry g;
    CHECK_NOTHROW(g.validate());
    g.d = -1.0;
    CHECK_THROWS_AS(g.validate(), ParameterError);
    g = SlabGeometry{};
    const Hierarchy h = g.hierarchy(10.0, 0.3, 1.0, 1.0);
    CHECK(h.quantum_ordered);
    CHECK(h.screening_ordered);
    CHECK_FALSE(g.hierarchy(1.0, 0.3, 1.0, 1.0).quantum_ordered);
}

TEST_CASE("homogeneous bulk: Nystrom solution against the analytic Yukawa form") {
    const DensityProfile& p = classical();
    const double kap = std::sqrt(p.kappa2());
    const Region bulk{-25.0, 25.0, &p, 0.0};
    const Loop src = point_loop({0, 0, 0}, p.species[0].params, 1, 2);
    for (double k : {0.5, 0.01}) {
        const double c = ScreeningSolver({bulk}, th, k, {0.1}).solve(src).field(1.0).real();
        const double f = ScreeningSolver({bulk}, th, k, {0.05}).solve(src).field(1.0).real();
        const double exact = bulk_yukawa(1.0, k, kap);
        // The discretization error is O(h^2); one Richardson step removes it.
        CHECK(std::abs((4.0 * f - c) / 3.0 / exact - 1.0) < 1e-4);
        CHECK(std::abs(f / exact - 1.0) < 1e-3);
    }
}

TEST_CASE("no screening: Phi reduces to V^el exactly") {
    DensityProfile empty = plasma();
    for (LoopCell& c : empty.cells) c.rho = 0.0;
    const Region r{-10.0, 0.0, &empty, 0.0};
    const Loop i = probe(empty, -2.0, 1), j = probe(empty, -4.0, 2, 2);
    for (double k : {0.05, 0.7}) {
        const cplx phi = ScreeningSolver({r}, th, k, {0.1}).solve(j).phi(i);
        const cplx vel = vel_fourier(i, j, {k, 0.0});
        CHECK(std::abs(phi - vel) < 1e-12 * std::abs(vel));
    }
}

TEST_CASE("screened potential stays bounded as k -> 0") {
    const Region r{-10.0, 0.0, &plasma(), 0.0};
    const Loop j = probe(plasma(), -5.0, 3);
    const double k_small = 1e-3 / plasma().lambda_screen();
    const double phi = std::abs(ScreeningSolver({r}, th, k_small, {0.1}).solve(j).field(-4.0));
    const double phi10 = std::abs(ScreeningSolver({r}, th, 10.0 * k_small, {0.1}).solve(j).field(-4.0));
    CHECK(phi < 1e-2 * 2.0 * M_PI / k_small);
    CHECK(phi == doctest::Approx(phi10).epsilon(1e-2));
}

TEST_CASE("solver input errors") {
    const Region r{-10.0, 0.0, &plasma(), 0.0};
    CHECK_THROWS_AS(ScreeningSolver({r}, th, 0.0), SingularArgument);
    CHECK_THROWS_AS(ScreeningSolver({Region{-1.0, 0.0, nullptr, 0.0}}, th, 0.1), DependencyError);
    CHECK_THROWS_AS(ScreeningSolver({}, th, 0.1), ParameterError);
}

TEST_CASE("grid doubling changes Phi by less than 1e-3") {
    const Region r{-10.0, 0.0, &plasma(), 0.0};
    const Loop j = probe(plasma(), -3.0, 4), i = probe(plasma(), -2.2, 5);
    for (double k : {0.1, 1.0}) {
        const cplx a = ScreeningSolver({r}, th, k, {0.05}).solve(j).phi(i);
        const cplx b = ScreeningSolver({r}, th, k, {0.025}).solve(j).phi(i);
        CHECK(std::abs(a - b) < 1e-3 * std::abs(b));
    }
}

TEST_CASE("F and F^R bonds") {
    CHECK(build_F_bond(cplx(0.3, 0.0), 1.0, -2.0, 1.5) == doctest::Approx(0.9));
    CHECK(build_F_bond(cplx(0.3, 0.0), -1.0, -2.0, 1.5) == doctest::Approx(-0.9));
    const SpeciesParams a = SpeciesParams::make(th, 1.0, 1.0), b = SpeciesParams::make(th, -1.0, 1.0);
    CHECK(build_F_bond(cplx(0.2, 0.1), a, b, 1.0) == -build_F_bond(cplx(0.2, 0.1), a, a, 1.0));

    for (double phi : {1e-2, 1e-3, 1e-4}) {
        const FRBond fr = build_FR_bond(phi, 0.0, 1.0, 1.0, 1.0);
        CHECK(fr.value == doctest::Approx(0.5 * phi * phi).epsilon(2.0 * phi));
        CHECK_FALSE(fr.clamped);
    }
    const FRBond big = build_FR_bond(-1e4, 0.0, 1.0, 1.0, 1.0);
    CHECK(big.clamped);
    CHECK(std::isfinite(big.value));
}

TEST_CASE("F^R reduces to -beta e e W at large separation") {
    // Real-space bulk screened potential e^{-r / lambda_s} / r and the dipolar W^c of a loop pair.
    const SpeciesParams sp = SpeciesParams::make(th, 1.0, 1.0);
    const Path pa = sample_bridge(1, 32, 61), pb = sample_bridge(1, 32, 62);
    const double ls = plasma().lambda_screen();
    for (double r : {20.0, 40.0, 80.0}) {
        const Loop i{{0, 0, 0}, sp, pa}, j{{0, r * ls, 0}, sp, pb};
        const double W = wc_pair(i, j);
        const double phi = std::exp(-r) / (r * ls);
        const FRBond fr = build_FR_bond(phi, W, 1.0, 1.0, 1.0);
        CHECK(fr.value / (-W) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("perfect screening: bulk, slab and the unscreened case") {
    const KSequence ks;
    const Loop src = point_loop({0, 0, 0}, classical().species[0].params, 1, 2);
    const SumRuleResult bulk = check_perfect_screening({{-25.0, 25.0, &classical(), 0.0}}, th, src, ks, {0.1});
    CHECK(std::abs(bulk.residual) < 1e-3);
    CHECK(bulk.converged);
    CHECK_FALSE(bulk.divergent);

    // Analytic bulk oracle: the induced charge is kappa^2 / (k^2 + kappa^2).
    const double k2 = classical().kappa2();
    std::vector<double> q;
    for (double k : ks.values()) q.push_back(k2 / (k * k + k2));
    CHECK(std::abs(num::richardson(q, 2.0, 2, 2).value - 1.0) < 1e-3);

    const Region slab{-10.0, 0.0, &plasma(), 0.0};
    for (int p : {1, 2}) {
        const SumRuleResult s = check_perfect_screening({slab}, th, probe(plasma(), -5.0, 10 + p, p), ks, {0.05});
        CHECK(std::abs(s.residual) < 1e-2);
        CHECK(s.converged);
    }
    // A loop at the border, straddling nothing: still screened.
    const SumRuleResult edge = check_perfect_screening({slab}, th, point_loop({0, 0, 0}, plasma().species[1].params, 1, 2), ks);
    CHECK(std::abs(edge.residual) < 1e-2);

    DensityProfile empty = plasma();
    for (LoopCell& c : empty.cells) c.rho = 0.0;
    const SumRuleResult none = check_perfect_screening({{-10.0, 0.0, &empty, 0.0}}, th, probe(empty, -5.0, 13), ks);
    CHECK(none.divergent);
    CHECK_FALSE(none.converged);
    CHECK(none.residual == doctest::Approx(1.0));
}

TEST_CASE("sum rule is universal across species compositions") {
    const KSequence ks;
    const SumRuleResult a = check_perfect_screening({{-10.0, 0.0, &plasma(), 0.0}}, th, probe(plasma(), -5.0, 21), ks);
    const SumRuleResult b = check_perfect_screening({{-10.0, 0.0, &mixture(), 0.0}}, th, probe(mixture(), -5.0, 21), ks);
    CHECK(std::abs(a.residual - b.residual) < 1e-2);
    CHECK(std::abs(b.residual) < 1e-2);
}

TEST_CASE("traversing-chain series") {
    const double q = 1.0, d = 50.0;
    CHECK(traversing_series(q, d, 3.0, 5.0, 60) == doctest::Approx(factorize_phi_AB(q, d, 3.0, 5.0)).epsilon(1e-15));
    const double two = traversing_series(q, d, 3.0, 5.0, 2), closed = factorize_phi_AB(q, d, 3.0, 5.0);
    CHECK(std::abs(two / closed - 1.0) < std::exp(-2.0 * q));
    CHECK(std::abs(two / closed - 1.0) == doctest::Approx(std::exp(-4.0 * q)).epsilon(1e-12));
}

TEST_CASE("bare kernel already factorizes across the gap") {
    const SpeciesParams sp = SpeciesParams::make(th, 1.0, 1.0 / 0.09);
    const double d = 30.0, k = 0.2;
    const Loop i{{-2.0, 0.3, 0}, sp, sample_bridge(1, 16, 71)};
    const Loop jB{{2.0, -0.1, 0}, sp, sample_bridge(2, 16, 72)};  // in B's own frame
    Loop j = jB;
    j.r[0] += d;
    const Loop zero = point_loop({0, 0, 0}, sp, 1, 16);
    const cplx ab = vel_fourier(i, j, {k, 0});
    const cplx fac = k * std::exp(-k * d) / (2.0 * M_PI) * vel_fourier(i, zero, {k, 0}) * vel_fourier(zero, jB, {k, 0});
    CHECK(std::abs(ab - fac) < 1e-8 * std::abs(ab));
}

TEST_CASE("coupled two-slab solve approaches the factorized form as 1/d") {
    const Region A{-10.0, 0.0, &plasma(), 0.0}, B{0.0, 10.0, &plasma(), 0.0};
    const double pa = phi0_border(A, th, 0.0).value, pb = phi0_border(B, th, 0.0).value;
    CHECK(pa > 0.0);
    CHECK(pa == doctest::Approx(pb).epsilon(1e-2));
    std::vector<double> ds, dev;
    for (double r : {40.0, 80.0, 160.0}) {
        SlabGeometry g;
        g.d = r * plasma().lambda_screen();
        const cplx c = coupled_phi_AB(plasma(), plasma(), g, th, 1.0);
        CHECK(std::abs(c.imag()) < 1e-8 * std::abs(c.real()));
        ds.push_back(g.d);
        dev.push_back(std::abs(c.real() / factorize_phi_AB(1.0, g.d, pa, pb) - 1.0));
    }
    CHECK(std::abs(num::loglog_fit(ds, dev).slope + 1.0) < 0.1);
}

TEST_CASE("factorization only sees the inner faces") {
    const double ls = plasma().lambda_screen();
    const Region A{-10.0, 0.0, &plasma(), 0.0};
    DensityProfile bumped = plasma();
    bumped.shape = [](double x) { return x < -9.0 ? 1.5 : 1.0; };
    const Region Ab{-10.0, 0.0, &bumped, 0.0};
    const double a = phi0_border(A, th, 0.0).value, b = phi0_border(Ab, th, 0.0).value;
    CHECK(std::abs(b / a - 1.0) < std::exp(-2.0 * 9.0 / ls));

    bumped.shape = [](double x) { return x > -1.0 ? 1.5 : 1.0; };
    const double c = phi0_border(Ab, th, 0.0).value;
    CHECK(std::abs(c / a - 1.0) > 1e-3);
}

TEST_CASE("leading Ursell structure: brackets and the W-term") {
    SlabGeometry g;
    const UrsellLeading u = leading_ursell(plasma(), mixture(), g, th, probe(plasma(), -5.0, 31), probe(mixture(), 5.0, 32));
    CHECK(u.A.value.value == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK(u.B.value.value == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK(std::abs(u.w_term_A) < 1e-2 * u.w_term_A_scale);
    CHECK(std::abs(u.w_term_B) < 1e-2 * u.w_term_B_scale);
    CHECK(u.hnn == 0.0);
    // The cloud profile integrates to minus the bracket.
    double s = 0.0;
    for (double v : u.A.cloud) s += v;
    CHECK(-s == doctest::Approx(u.A.value.value).epsilon(1e-6));

    CHECK_THROWS_AS(leading_ursell(DensityProfile{}, plasma(), g, th, probe(plasma(), -5, 1), probe(plasma(), 5, 2)),
                    DependencyError);
}

TEST_CASE("h_AB leading piece scales as 1/d") {
    std::vector<double> ds, h;
    for (double d : {50.0, 100.0, 200.0, 400.0}) {
        ds.push_back(d);
        h.push_back(h_AB_leading(1.0, d, 1.0, -1.0, -1.0, 1.0, 1.0));
    }
    CHECK(num::loglog_fit(ds, h).slope == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK(h[0] < 0.0);
}

TEST_CASE("multipole integrability: trivial, bulk Yukawa and slab") {
    const std::vector<double> radii{30.0, 40.0, 60.0, 80.0};
    const double kap = 1.0;
    auto yuk = [kap](double x) { return [kap, x](double k) { return bulk_yukawa(x, k, kap); }; };

    const MultipoleReport zero = multipole_integrability_check(yuk(1.0), yuk(1.0), 0.0, radii);
    CHECK(zero.integrable);
    for (double I : zero.I) CHECK(std::abs(I) < 1e-12);

    // Normal offset 0.3 and in-plane offset 0.4: the plane integral tends to (2 pi / kappa) (e^{-1.3} - e^{-1}).
    const MultipoleReport bulk = multipole_integrability_check(yuk(1.3), yuk(1.0), 0.4, radii);
    const double exact = 2.0 * M_PI / kap * (std::exp(-1.3 * kap) - std::exp(-kap));
    CHECK(bulk.integrable);
    CHECK(std::abs(bulk.I.back() - exact) < 1e-6 * std::abs(exact));

    const auto base = slab_phi_class(classical(), 10.0, th, -1.0, -2.0, {0.1});
    const auto shifted = slab_phi_class(classical(), 10.0, th, -1.0, -2.3, {0.1});
    // Near a wall the image term is linear in |k|: a dipolar in-plane tail, so I(R) converges as 1/R.
    const MultipoleReport slab = multipole_integrability_check(shifted, base, 0.4, {160.0, 320.0, 640.0, 1280.0});
    CHECK(slab.integrable);
    const double limit = shifted(0.0) - base(0.0);
    for (std::size_t i = 2; i < slab.I.size(); ++i) {
        const double r = (slab.I[i] - slab.I[i - 1]) / (slab.I[i - 1] - slab.I[i - 2]);
        CHECK(r == doctest::Approx(0.5).epsilon(0.1));
    }
    CHECK(std::abs(slab.I.back() - limit) < 2.0 * std::abs(slab.I.back() - slab.I[slab.I.size() - 2]));
}
