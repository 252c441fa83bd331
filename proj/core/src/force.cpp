#include "casimir/force.hpp"

#include "casimir/errors.hpp"

#include <cmath>

namespace casimir {

namespace {
constexpr double kPi = M_PI;
}

double zeta3_integrand(double q) {
    if (q <= 0.0) return 0.0;
    // e^{-q} / sinh q = 2 e^{-2q} / (1 - e^{-2q})
    return q * q * 2.0 * std::exp(-2.0 * q) / (-std::expm1(-2.0 * q));
}

num::QuadResult zeta3_quadrature() {
    return num::integrate_to_inf([](double q) { return zeta3_integrand(q); }, 0.0, {1e-15, 1e-14, 4000});
}

SeriesOracle zeta3_half_series(long n_max) {
    if (n_max < 1) throw ParameterError("zeta3_half_series: n_max must be >= 1");
    num::NeumaierAccumulator acc;
    for (long n = n_max; n >= 1; --n) {
        const double x = static_cast<double>(n);
        acc.add(0.5 / (x * x * x));
    }
    const double N = static_cast<double>(n_max);
    SeriesOracle out;
    // sum_{n > N} 1/(2 n^3) lies between 1/(4 (N+1)^2) and 1/(4 N^2); the midpoint rule estimate is 1/(4 (N+1/2)^2).
    out.value = acc.value() + 0.25 / ((N + 0.5) * (N + 0.5));
    out.tail_bound = 0.25 / (N * N);
    return out;
}

double leading_force(const ThermoState& th, double d) {
    if (!(d > 0.0)) throw ParameterError("leading_force: d must be positive");
    if (!(th.beta > 0.0)) throw ParameterError("leading_force: beta must be positive");
    return -kZeta3 / (8.0 * kPi * th.beta * d * d * d);
}

ForceRegimeParams ForceRegimeParams::make(const ThermoState& th, double d, const RegimeThresholds& t) {
    if (!(d > 0.0)) throw ParameterError("ForceRegimeParams: d must be positive");
    ForceRegimeParams out;
    out.alpha = th.hbar * th.c * th.beta / d;
    if (!(out.alpha > 0.0)) throw ParameterError("ForceRegimeParams: alpha must be positive");
    out.regime = out.alpha > t.low_T_alpha ? Regime::low_T
                 : out.alpha < t.high_T_alpha ? Regime::high_T
                                              : Regime::intermediate;
    return out;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::low_T: return "low_T";
        case Regime::high_T: return "high_T";
        default: return "intermediate";
    }
}

LifshitzValue lifshitz_reference(const ThermoState& th, double d, TEMode mode, Regime regime,
                                 const RegimeThresholds& t) {
    const ForceRegimeParams rp = ForceRegimeParams::make(th, d, t);
    LifshitzValue out;
    out.regime_mismatch = rp.regime != regime;
    const double high_rte0 = -kZeta3 / (8.0 * kPi * th.beta * d * d * d);
    if (regime == Regime::low_T) {
        out.value = -kPi * kPi * th.hbar * th.c / (240.0 * d * d * d * d);
        if (mode == TEMode::rTE0) {
            out.repulsive_correction = -high_rte0;
            out.value += out.repulsive_correction;
        }
    } else if (regime == Regime::high_T) {
        out.value = mode == TEMode::rTE0 ? high_rte0 : 2.0 * high_rte0;
    } else {
        throw ParameterError("lifshitz_reference: no closed form in the intermediate regime");
    }
    return out;
}

LifshitzTable lifshitz_table(const ThermoState& th, double d) {
    LifshitzTable t;
    t.eq2 = lifshitz_reference(th, d, TEMode::rTE1, Regime::low_T).value;
    t.eq3 = lifshitz_reference(th, d, TEMode::rTE0, Regime::low_T).value;
    t.eq4 = lifshitz_reference(th, d, TEMode::rTE1, Regime::high_T).value;
    t.eq5 = lifshitz_reference(th, d, TEMode::rTE0, Regime::high_T).value;
    return t;
}

double capacitor_electrostatic(const std::vector<double>& c_A, double h_A, const std::vector<double>& c_B,
                               double h_B) {
    auto trap = [](const std::vector<double>& c, double h) {
        if (c.size() < 2) throw ParameterError("capacitor_electrostatic: need at least two samples");
        num::NeumaierAccumulator acc;
        for (std::size_t i = 0; i < c.size(); ++i) acc.add((i == 0 || i + 1 == c.size() ? 0.5 : 1.0) * c[i]);
        return acc.value() * h;
    };
    return 2.0 * kPi * trap(c_A, h_A) * trap(c_B, h_B);
}

CapacitorResult capacitor_force(const DensityProfile& A, double a, const DensityProfile& B, double b,
                                const MagneticFixture& mag, double h) {
    auto sample = [h](const DensityProfile& p, double lo, double hi, double& step) {
        const int n = std::max(1, static_cast<int>(std::lround((hi - lo) / h)));
        step = (hi - lo) / n;
        std::vector<double> c;
        for (int i = 0; i <= n; ++i) c.push_back(p.charge_density(lo + i * step));
        return c;
    };
    double hA = 0.0, hB = 0.0;
    const std::vector<double> cA = sample(A, -a, 0.0, hA), cB = sample(B, 0.0, b, hB);
    CapacitorResult out;
    out.electrostatic = capacitor_electrostatic(cA, hA, cB, hB);
    if (!mag.X.empty()) {
        double floor = 0.0;
        const std::vector<cplx> I = magnetic_capacitor_integrand(mag.i, mag.j, mag.X, mag.th, mag.ff, &floor);
        out.magnetic = fit_decay_exponent(mag.X, I, floor);
    }
    return out;
}

double assemble_with_brackets(const ThermoState& th, double d, double bracket_A, double bracket_B) {
    return -1.0 / (4.0 * kPi * th.beta * d * d * d) * zeta3_quadrature().value * bracket_A * bracket_B;
}

ForceBreakdown assemble_force(const SlabGeometry& g, const UrsellLeading& u, const ThermoState& th,
                              const AssemblyOptions& opt) {
    g.validate();
    if (u.A.cloud.empty() || u.B.cloud.empty()) throw DependencyError("assemble_force: brackets not computed");
    const double d = g.d;
    ForceBreakdown out;
    out.d = d;
    out.regime = ForceRegimeParams::make(th, d);
    out.f_leading = leading_force(th, d);
    out.bracket_A = u.A.value.value;
    out.bracket_B = u.B.value.value;
    out.bracket_err_A = u.A.value.error;
    out.bracket_err_B = u.B.value.error;
    out.w_term_A = u.w_term_A_scale > 0.0 ? u.w_term_A / u.w_term_A_scale : 0.0;
    out.w_term_B = u.w_term_B_scale > 0.0 ? u.w_term_B / u.w_term_B_scale : 0.0;
    out.f_assembled = assemble_with_brackets(th, d, out.bracket_A, out.bracket_B);

    // Finite-d kernel 2 pi e^{-q} e^{-q (x2 - x1) / d} acting on the screening clouds.
    auto moment = [](const BracketResult& br, double kx) {
        num::NeumaierAccumulator acc;
        for (std::size_t n = 0; n < br.x.size(); ++n) acc.add(-br.cloud[n] * std::exp(kx * br.x[n]));
        return acc.value();
    };
    const double pre = -1.0 / (4.0 * kPi * th.beta * d * d * d);
    const num::RealFn fin = [&](double q) {
        return zeta3_integrand(q) * moment(u.A, q / d) * moment(u.B, -q / d);
    };
    out.f_finite_d = pre * num::integrate_to_inf(fin, 0.0, {1e-15, 1e-11, 4000}).value;

    for (int i = 0; i < opt.q_points; ++i) {
        const double q = opt.q_max_table * i / (opt.q_points - 1);
        out.q_grid.push_back(q);
        out.integrand.push_back(zeta3_integrand(q) * out.bracket_A * out.bracket_B);
    }
    out.lifshitz = lifshitz_table(th, d);
    if (opt.dwm_rms >= 0.0)
        out.magnetic_remainder_bound = std::abs(out.f_leading) * opt.dwm_rms / (2.0 * kPi * std::exp(-1.0));
    const bool brackets_ok = std::abs(out.bracket_A + 1.0) < opt.sumrule_tol &&
                             std::abs(out.bracket_B + 1.0) < opt.sumrule_tol &&
                             out.bracket_err_A < opt.sumrule_tol && out.bracket_err_B < opt.sumrule_tol;
    const bool w_ok = std::abs(out.w_term_A) < opt.sumrule_tol && std::abs(out.w_term_B) < opt.sumrule_tol;
    out.certified = brackets_ok && w_ok && std::isfinite(out.f_assembled);
    return out;
}

namespace {

// d/dx_1 of the equal-time Coulomb potential between two loops.
double vc_force_x(const Loop& i, const Loop& j) {
    if (i.path.n_steps != j.path.n_steps) throw ParameterError("monopole_reduction: loops need a common n_steps");
    const int n = i.path.n_steps;
    num::NeumaierAccumulator acc;
    for (int a = 0; a < i.path.segments(); ++a) {
        const Vec3 ra = i.node(a);
        for (int b = a % n; b < j.path.segments(); b += n) {
            const Vec3 rb = j.node(b);
            const double dx = ra[0] - rb[0], dy = ra[1] - rb[1], dz = ra[2] - rb[2];
            const double r2 = dx * dx + dy * dy + dz * dz;
            acc.add(-dx / (r2 * std::sqrt(r2)));
        }
    }
    return acc.value() / n;
}

double monopole_force_x(const Vec3& r1, const Vec3& r2) {
    const double dx = r1[0] - r2[0], dy = r1[1] - r2[1], dz = r1[2] - r2[2];
    const double r2n = dx * dx + dy * dy + dz * dz;
    return -dx / (r2n * std::sqrt(r2n));
}

}  // namespace

MonopoleCheck monopole_reduction(const std::vector<Loop>& A, const std::vector<Loop>& B, double d) {
    MonopoleCheck out;
    num::NeumaierAccumulator full, mono;
    for (const Loop& la : A)
        for (const Loop& lb0 : B) {
            Loop lb = lb0;
            lb.r[0] += d;
            const double ee = la.species.charge * lb.species.charge;
            const int Na = la.path.segments(), Nb = lb.path.segments();
            num::NeumaierAccumulator f, m;
            // Every loop is represented by all its origin-shifted copies with equal weight.
            for (int ua = 0; ua < Na; ++ua) {
                const Loop sa = shift_origin(la, static_cast<double>(ua) / la.path.n_steps);
                for (int ub = 0; ub < Nb; ++ub) {
                    const Loop sb = shift_origin(lb, static_cast<double>(ub) / lb.path.n_steps);
                    f.add(vc_force_x(sa, sb));
                    m.add(la.p() * lb.p() * monopole_force_x(sa.r, sb.r));
                }
            }
            const double norm = 1.0 / (static_cast<double>(Na) * Nb);
            full.add(ee * f.value() * norm);
            mono.add(ee * m.value() * norm);
        }
    out.full = full.value();
    out.monopole = mono.value();
    return out;
}

}  // namespace casimir
