#include "casimir/errors.hpp"
#include "casimir/numerics.hpp"
#include "casimir/potentials.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace casimir;

namespace {

ThermoState unit_thermo() { return ThermoState{}; }

SpeciesParams light(const ThermoState& th, double e = 1.0) { return SpeciesParams::make(th, e, 1.0 / 0.09); }

}  // namespace

TEST_CASE("transverse delta: axis projector and k1 independence") {
    const Mat3 P = transverse_delta({1.0, 0.0, 0.0});
    CHECK(P(0, 0) == 0.0);
    CHECK(P(1, 1) == 1.0);
    CHECK(P(2, 2) == 1.0);
    CHECK(P(0, 1) == 0.0);
    for (double k1 : {1e-6, 0.3, 50.0}) CHECK((transverse_delta({k1, 0.0, 0.0}) - P).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(transverse_delta({0.0, 0.0, 0.0}), SingularArgument);
}

TEST_CASE("transverse delta is an orthogonal projector") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> N(0.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 K{N(rng), N(rng), N(rng)};
        const Mat3 P = transverse_delta(K);
        const Eigen::Vector3d k(K[0], K[1], K[2]);
        CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((P * k).norm() < 1e-14 * k.norm());
        CHECK((P - P.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(P.trace() == doctest::Approx(2.0).epsilon(1e-15));
    }
}

TEST_CASE("Q kernel limits and periodicity") {
    for (double ds : {0.0, 0.1, 0.5, 0.93}) CHECK(eval_Q(1e-12, ds, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double x : {0.1, 1.0, 7.0, 40.0}) {
        CHECK(eval_Q(x, 0.5, 1.0) == doctest::Approx(x / (2.0 * std::sinh(x / 2.0))).epsilon(1e-13));
    }
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double k = 20.0 * U(rng), ds = 3.0 * U(rng) - 1.5;
        CHECK(eval_Q(k, ds + 1.0, 0.7) == doctest::Approx(eval_Q(k, ds, 0.7)).epsilon(1e-12));
        CHECK(eval_Q(k, -ds, 0.7) == doctest::Approx(eval_Q(k, ds, 0.7)).epsilon(1e-12));
    }
    // Large argument stays finite.
    CHECK(std::isfinite(eval_Q(2000.0, 0.0, 1.0)));
}

TEST_CASE("form factor") {
    const FormFactor ff{4.0};
    CHECK(ff.g(0.0) == 1.0);
    CHECK(ff.g(4.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(ff.g(-2.0) == ff.g(2.0));
    CHECK(ff.g(40.0) < 1e-40);
}

TEST_CASE("Coulomb pair potentials for point loops") {
    const ThermoState th = unit_thermo();
    const SpeciesParams sp = light(th);
    const Loop a = point_loop({0, 0, 0}, sp, 1, 16), b = point_loop({3, 4, 0}, sp, 1, 16);
    CHECK(vc_pair(a, b) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(vel_pair(a, b) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(wc_pair(a, b) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    const Loop a2 = point_loop({0, 0, 0}, sp, 2, 16), b3 = point_loop({3, 4, 0}, sp, 3, 16);
    CHECK(vel_pair(a2, b3) == doctest::Approx(6.0 * 0.2).epsilon(1e-14));
}

TEST_CASE("Coulomb pair potentials: symmetry, sign, origin shifts, regularization") {
    const ThermoState th = unit_thermo();
    const SpeciesParams sp = light(th);
    const Loop a{{0, 0, 0}, sp, sample_bridge(2, 16, 1)}, b{{0.4, 0.1, 0}, sp, sample_bridge(1, 16, 2)};
    CHECK(vc_pair(a, b) == doctest::Approx(vc_pair(b, a)).epsilon(1e-13));
    CHECK(vel_pair(a, b) == doctest::Approx(vel_pair(b, a)).epsilon(1e-13));
    CHECK(vel_pair(a, b) > 0.0);
    for (int m : {1, 5, 16}) {
        const double u = m / 16.0;
        CHECK(vc_pair(shift_origin(a, u), shift_origin(b, u)) == doctest::Approx(vc_pair(a, b)).epsilon(1e-12));
    }
    CHECK(std::isfinite(vc_pair(a, a)));
    CHECK(std::isfinite(vel_pair(a, a)));
    const Loop c{{0, 0, 0}, sp, sample_bridge(1, 8, 3)};
    CHECK_THROWS(vc_pair(a, c));
}

TEST_CASE("W^c decays as a dipolar r^-3") {
    const ThermoState th = unit_thermo();
    const SpeciesParams sp = SpeciesParams::make(th, 1.0, 1.0);
    const Path pa = sample_bridge(1, 32, 11), pb = sample_bridge(1, 32, 12);
    std::vector<double> r, w;
    for (double R = 20.0; R <= 320.0; R *= 2.0) {
        const Loop a{{0, 0, 0}, sp, pa}, b{{R * 0.6, R * 0.8, 0}, sp, pb};
        r.push_back(R);
        w.push_back(wc_pair(a, b));
    }
    CHECK(std::abs(num::loglog_fit(r, w).slope + 3.0) < 0.2);
}

TEST_CASE("V^el in-plane transform") {
    const ThermoState th = unit_thermo();
    const SpeciesParams sp = light(th);
    const Loop a = point_loop({0.3, 0, 0}, sp, 1, 8), b = point_loop({-0.4, 0, 0}, sp, 1, 8);
    const double k = 0.8;
    CHECK(vel_fourier(a, b, {k, 0.0}).real() == doctest::Approx(2 * M_PI / k * std::exp(-k * 0.7)).epsilon(1e-14));
    CHECK_THROWS_AS(vel_fourier(a, b, {0.0, 0.0}), SingularArgument);

    // k -> 0 ratio equals the ratio of charge numbers.
    const Loop i{{0.0, 0, 0}, sp, sample_bridge(1, 16, 4)};
    const Loop one{{1.0, 0.2, 0}, sp, sample_bridge(1, 16, 5)};
    const Loop j{{2.0, -0.3, 0}, sp, sample_bridge(3, 16, 6)};
    std::vector<double> ratio;
    for (double kk : {1e-2, 5e-3, 2.5e-3, 1.25e-3})
        ratio.push_back((vel_fourier(i, one, {kk, 0}) / vel_fourier(i, j, {kk, 0})).real());
    CHECK(num::richardson(ratio).value == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    // Oracle: Hankel transform of the node-pair Coulomb sum.
    const Loop x{{0.1, 0, 0}, sp, sample_bridge(1, 8, 7)}, y{{1.4, 0.3, -0.2}, sp, sample_bridge(1, 8, 8)};
    for (const Vec2& kv : {Vec2{0.7, 0.0}, Vec2{0.3, 0.4}}) {
        const cplx v = vel_fourier(x, y, kv), o = oracle::vel_fourier(x, y, kv);
        CHECK(std::abs(v - o) / std::abs(o) < 1e-6);
    }
}

TEST_CASE("magnetic potential: exchange symmetry and classical limit") {
    ThermoState th = unit_thermo();
    const SpeciesParams sp = light(th);
    const FormFactor ff{10.0};
    const Loop i{{0, 0, 0}, sp, sample_bridge(1, 16, 9)}, j{{0.2, 0.1, 0}, sp, sample_bridge(2, 16, 10)};
    const Vec3 K{0.7, -0.4, 1.1}, mK{-0.7, 0.4, -1.1};
    const cplx a = wm_pair_fourier(i, j, K, th, ff), b = wm_pair_fourier(j, i, mK, th, ff);
    CHECK(std::abs(a - b) < 1e-13 * std::abs(a));

    ThermoState cold = th;
    cold.c = 1e-9;  // lambda_ph -> 0 at fixed species lengths
    const SpeciesParams sc = SpeciesParams::make(cold, 1.0, 1.0 / 0.09);
    const Loop ic{i.r, sc, i.path}, jc{j.r, sc, j.path};
    const cplx q = wm_pair_fourier(ic, jc, K, cold, ff), cl = wm_pair_fourier(ic, jc, K, cold, ff, true);
    CHECK(std::abs(q - cl) < 1e-8 * std::abs(cl));
}

TEST_CASE("magnetic potential at zero in-plane wavevector uses only transverse components") {
    const ThermoState th = unit_thermo();
    const SpeciesParams sp = light(th);
    // Paths moving only along the normal: every mu, nu != 1 line integral vanishes.
    Path p1 = sample_bridge(1, 16, 21), p2 = sample_bridge(1, 16, 22);
    for (Path* p : {&p1, &p2})
        for (Vec3& v : p->X) v[1] = v[2] = 0.0;
    const Loop i{{0, 0, 0}, sp, p1}, j{{0, 0, 0}, sp, p2};
    CHECK(std::abs(wm_pair_fourier(i, j, {0.9, 0.0, 0.0}, th, FormFactor{})) == 0.0);
    CHECK(std::abs(wm_pair_fourier(i, j, {0.9, 0.3, 0.0}, th, FormFactor{})) > 0.0);
}

TEST_CASE("Coulomb force kernel closed form") {
    CHECK(coulomb_force_kernel(-0.3, 0.2, 0.0, 10.0) == doctest::Approx(2 * M_PI));
    CHECK(coulomb_force_kernel(0.0, 0.0, 1.5, 10.0) == doctest::Approx(2 * M_PI * std::exp(-1.5)));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int n = 0; n < 20; ++n) {
        const double x1 = -2.0 * U(rng), x2 = 2.0 * U(rng), q = 4.0 * U(rng), d = 3.0 + 30.0 * U(rng);
        const double v = coulomb_force_kernel(x1, x2, q, d);
        CHECK(std::abs(v - oracle::coulomb_force_kernel(x1, x2, q, d)) < 1e-6 * std::abs(v));
    }
}

TEST_CASE("transverse Coulomb partial transform") {
    CHECK(v_transverse_partial(0.0, {0.8, 0.6}, 1, 1).real() == doctest::Approx(M_PI));
    for (double x : {-1.0, 0.0, 0.4}) CHECK(std::abs(v_transverse_partial(x, {1.3, 0.0}, 2, 3)) == 0.0);
    const Vec2 q{1.3 * 0.6, 1.3 * 0.8};
    for (int mu = 1; mu <= 3; ++mu)
        for (int nu = 1; nu <= 3; ++nu) {
            const cplx v = v_transverse_partial(0.7, q, mu, nu), o = oracle::v_transverse_partial(0.7, q, mu, nu);
            CHECK(std::abs(v - o) < 1e-8 * std::max(1.0, std::abs(v)));
            if (mu != 1 && nu != 1) CHECK(std::abs(v - v_transverse_partial(0.7, q, nu, mu)) < 1e-15);
        }
    CHECK_THROWS_AS(v_transverse_partial(0.5, {0.0, 0.0}, 1, 1), SingularArgument);
}

TEST_CASE("inter-slab magnetic potential: asymptotic form") {
    const ThermoState th = unit_thermo();
    const SpeciesParams sp = light(th);
    const Loop i{{-0.5, 0, 0}, sp, sample_bridge(1, 16, 31)}, j{{0.5, 0.2, 0}, sp, sample_bridge(1, 16, 32)};
    const Vec2 q{0.6, 0.8};

    const Loop pi = point_loop(i.r, sp, 1, 16), pj = point_loop(j.r, sp, 1, 16);
    CHECK(std::abs(wab_asymptotic(pi, pj, q, 100.0, th)) == 0.0);

    std::vector<double> ds, w;
    for (double d : {10.0, 31.6227766016838, 100.0, 316.227766016838, 1000.0}) {
        ds.push_back(d);
        w.push_back(std::abs(wab_asymptotic(i, j, q, d, th)));
    }
    CHECK(std::abs(num::loglog_fit(ds, w).slope + 1.0) < 0.05);

    const cplx a = wab_asymptotic(i, j, q, 200.0, th), o = oracle::wab_fourier3d(i, j, q, 200.0, th);
    CHECK(std::abs(a - o) < 0.05 * std::abs(o));
}

TEST_CASE("inter-slab magnetic potential: far-field closed form against direct quadrature") {
    const ThermoState th = unit_thermo();
    const SpeciesParams sp = light(th);
    const FormFactor ff{10.0};
    const Loop i{{-0.3, 0, 0}, sp, sample_bridge(1, 16, 41)}, j{{0.2, 0, 0}, sp, sample_bridge(1, 16, 42)};
    for (double d : {5.0, 10.0}) {
        const cplx far = wm_partial_far(i, j, {0.3, 0.2}, d, th, ff).value;
        const cplx orc = oracle::wm_partial(i, j, {0.3, 0.2}, d, th, ff);
        CHECK(std::abs(far - orc) < 1e-8 * std::abs(orc));
    }
}

TEST_CASE("inter-slab magnetic potential and its normal derivative scale as d^-1 and d^-2") {
    const ThermoState th = unit_thermo();
    const SpeciesParams sp = light(th);
    const FormFactor ff{10.0};
    const BridgeSampler bs(16, 7);
    std::vector<double> ds, w, dw;
    for (double d : {10.0, 31.6227766016838, 100.0, 316.227766016838, 1000.0}) {
        double s1 = 0.0, s2 = 0.0;
        for (int m = 0; m < 8; ++m) {
            const Loop i{{0, 0, 0}, sp, bs.sample(1, 100 + 2 * m)}, j{{0, 0, 0}, sp, bs.sample(1, 101 + 2 * m)};
            s1 += std::norm(wm_partial_far(i, j, {1.0 / d, 0}, d, th, ff, {false, false}).value);
            s2 += std::norm(wm_partial_far(i, j, {1.0 / d, 0}, d, th, ff).dx1);
        }
        ds.push_back(d);
        w.push_back(std::sqrt(s1));
        dw.push_back(std::sqrt(s2));
    }
    CHECK(std::abs(num::loglog_fit(ds, w).slope + 1.0) < 0.05);
    CHECK(std::abs(num::loglog_fit(ds, dw).slope + 2.0) < 0.1);
}

TEST_CASE("zero-wavevector magnetic capacitor integrand decays faster than X^-4") {
    ThermoState th;
    th.c = 20.0;
    const SpeciesParams sp = SpeciesParams::make(th, 1.0, 1.0);
    const BridgeSampler bs(64, 11);
    const Loop i{{0, 0, 0}, sp, bs.sample(1, 0)}, j{{0, 0, 0}, sp, bs.sample(1, 1)};
    std::vector<double> X;
    for (int n = 0; n <= 20; ++n) X.push_back(5.0 * std::pow(10.0, n / 20.0));
    double floor = 0.0;
    const auto I = magnetic_capacitor_integrand(i, j, X, th, FormFactor{4.0}, &floor);
    const DecayFit fit = fit_decay_exponent(X, I, floor);
    CHECK_FALSE(fit.bound_only);
    CHECK(fit.exponent > 4.0);
}

TEST_CASE("decay fit reports a bound when the tail is below round-off") {
    std::vector<double> X{1, 2, 4, 8};
    std::vector<cplx> I{1.0, 1e-4, 1e-20, 0.0};
    const DecayFit f = fit_decay_exponent(X, I);
    CHECK(f.bound_only);
    CHECK(f.exponent > 4.0);
    std::vector<cplx> P{1.0, 0.25, 0.0625, 0.015625};
    const DecayFit g = fit_decay_exponent(X, P);
    CHECK_FALSE(g.bound_only);
    CHECK(g.exponent == doctest::Approx(2.0));
}
