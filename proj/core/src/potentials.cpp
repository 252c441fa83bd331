#include "casimir/potentials.hpp"

#include "casimir/errors.hpp"
#include "casimir/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace casimir {

namespace {

constexpr double kPi = M_PI;
constexpr cplx kI{0.0, 1.0};

double dist(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double inv_r(const Vec3& a, const Vec3& b, double eps) {
    const double r = dist(a, b);
    return r < eps ? 1.0 / eps : 1.0 / r;
}

double reg_eps(const Loop& i, const Loop& j, const CoulombReg& reg) {
    return reg.eps_rel * std::min(i.lambda(), j.lambda());
}

// In-plane component q_mu for mu in {2, 3}.
double qc(const Vec2& q, int mu) { return q[static_cast<std::size_t>(mu - 2)]; }

void check_index(int mu) {
    if (mu < 1 || mu > 3) throw ParameterError("tensor index must be 1, 2 or 3");
}

// Periodic fractional time difference in [0, 1).
double frac(double ds) { return ds - std::floor(ds); }

// Coefficients of the second-order lambda_ph, k_cut expansion of g^2 Q.
double dipolar_remainder(double dtil, double lambda_ph, const FormFactor& ff, const FarFieldOptions& opt) {
    double h1 = 0.0;
    if (opt.form_factor) h1 += ff.g2_curvature();
    if (opt.quantum) h1 += lambda_ph * lambda_ph * (0.5 * (dtil * dtil - dtil) + 1.0 / 12.0);
    return 4.0 * kPi * h1;
}

struct KernelPair {
    cplx f, df;
};

// v^{mu nu}(x, k) and its x-derivative for x != 0.
KernelPair v_and_dv(double x, const Vec2& k, double kmag, int mu, int nu) {
    const double ax = std::abs(x), sg = x > 0 ? 1.0 : -1.0;
    const double e = std::exp(-kmag * ax);
    if (mu == 1 && nu == 1) return {kPi / kmag * e * (1.0 + kmag * ax), -kPi * kmag * x * e};
    if (mu == 1 || nu == 1) {
        const double km = qc(k, mu == 1 ? nu : mu);
        return {-kI * kPi * km / kmag * x * e, -kI * kPi * (km / kmag) * (1.0 - kmag * ax) * e};
    }
    const double c = qc(k, mu) * qc(k, nu) / (kmag * kmag);
    const double delta = mu == nu ? 1.0 : 0.0;
    return {kPi / kmag * e * (2.0 * delta - (1.0 + kmag * ax) * c), kPi * sg * e * (-2.0 * delta + kmag * ax * c)};
}

// Partial transform of K_mu K_nu / K^2 and its x-derivative for x != 0.
KernelPair t_and_dt(double x, const Vec2& k, double kmag, int mu, int nu) {
    const double sg = x > 0 ? 1.0 : -1.0;
    const double e = std::exp(-kmag * std::abs(x));
    if (mu == 1 && nu == 1) return {-0.5 * kmag * e, 0.5 * kmag * kmag * sg * e};
    if (mu == 1 || nu == 1) {
        const double km = qc(k, mu == 1 ? nu : mu);
        return {0.5 * kI * km * sg * e, -0.5 * kI * km * kmag * e};
    }
    const double kk = qc(k, mu) * qc(k, nu);
    return {0.5 * kk / kmag * e, -0.5 * kk * sg * e};
}

struct Moments {
    Vec3 P{0, 0, 0};  // sum dX^mu X^1
    Vec3 R{0, 0, 0};  // sum dX^mu (q . Y)
};

Moments moments(const Path& path, const Vec2& q) {
    const Segments seg = segments(path);
    Moments m;
    for (std::size_t a = 0; a < seg.s.size(); ++a) {
        const double qy = q[0] * seg.X[a][1] + q[1] * seg.X[a][2];
        for (int mu = 0; mu < 3; ++mu) {
            m.P[mu] += seg.dX[a][mu] * seg.X[a][0];
            m.R[mu] += seg.dX[a][mu] * qy;
        }
    }
    return m;
}

}  // namespace

double FormFactor::g(double k) const {
    const double t = k / k_cut;
    return std::exp(-t * t);
}

Mat3 transverse_delta(const Vec3& K) {
    const double k2 = K[0] * K[0] + K[1] * K[1] + K[2] * K[2];
    if (!(k2 > 0.0)) throw SingularArgument("transverse_delta: K = 0 has no unique transverse projector");
    Mat3 m;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) m(a, b) = (a == b ? 1.0 : 0.0) - K[a] * K[b] / k2;
    return m;
}

double eval_Q(double kmag, double ds, double lambda_ph) {
    if (kmag < 0.0) throw ParameterError("eval_Q: |k| must be non-negative");
    const double x = lambda_ph * kmag;
    const double t = frac(ds);
    if (x == 0.0) return 1.0;
    if (x < 1e-4) {
        // series through x^2: 1 + x^2 ((t - 1/2)^2 / 2 - 1/24)
        const double u = t - 0.5;
        return 1.0 + x * x * (0.5 * u * u - 1.0 / 24.0);
    }
    // x [e^{x (t - 1)} + e^{-x t}] / (2 (1 - e^{-x})), overflow free
    return x * (std::exp(x * (t - 1.0)) + std::exp(-x * t)) / (-2.0 * std::expm1(-x));
}

double vc_pair(const Loop& i, const Loop& j, const CoulombReg& reg) {
    if (i.path.n_steps != j.path.n_steps)
        throw ParameterError("vc_pair: equal-time pairing needs a common n_steps");
    const int n = i.path.n_steps;
    const int Ni = i.path.segments(), Nj = j.path.segments();
    const double eps = reg_eps(i, j, reg);
    num::NeumaierAccumulator acc;
    for (int a = 0; a < Ni; ++a) {
        const Vec3 ra = i.node(a);
        for (int b = a % n; b < Nj; b += n) acc.add(inv_r(ra, j.node(b), eps));
    }
    return acc.value() / n;
}

double vel_pair(const Loop& i, const Loop& j, const CoulombReg& reg) {
    const int Ni = i.path.segments(), Nj = j.path.segments();
    const double eps = reg_eps(i, j, reg);
    num::NeumaierAccumulator acc;
    for (int a = 0; a < Ni; ++a) {
        const Vec3 ra = i.node(a);
        for (int b = 0; b < Nj; ++b) acc.add(inv_r(ra, j.node(b), eps));
    }
    return acc.value() * i.path.ds() * j.path.ds();
}

double wc_pair(const Loop& i, const Loop& j, const CoulombReg& reg) { return vc_pair(i, j, reg) - vel_pair(i, j, reg); }

cplx vel_fourier(const Loop& i, const Loop& j, const Vec2& k) {
    const double km = std::hypot(k[0], k[1]);
    if (!(km > 0.0)) throw SingularArgument("vel_fourier: k = 0 diverges");
    const int Ni = i.path.segments(), Nj = j.path.segments();
    const double li = i.lambda(), lj = j.lambda();
    std::vector<double> xb(Nj);
    std::vector<cplx> pb(Nj);
    for (int b = 0; b < Nj; ++b) {
        const Vec3& X = j.path.X[b];
        xb[b] = j.r[0] + lj * X[0];
        pb[b] = std::exp(-kI * lj * (k[0] * X[1] + k[1] * X[2]));
    }
    cplx acc = 0.0;
    for (int a = 0; a < Ni; ++a) {
        const Vec3& X = i.path.X[a];
        const double xa = i.r[0] + li * X[0];
        const cplx pa = std::exp(kI * li * (k[0] * X[1] + k[1] * X[2]));
        cplx row = 0.0;
        for (int b = 0; b < Nj; ++b) row += pb[b] * std::exp(-km * std::abs(xa - xb[b]));
        acc += pa * row;
    }
    return acc * (2.0 * kPi / km) * i.path.ds() * j.path.ds();
}

double magnetic_prefactor(const SpeciesParams& a, const SpeciesParams& b, const ThermoState& th) {
    return 1.0 / (th.beta * std::sqrt(a.mass * b.mass) * th.c * th.c);
}

cplx wm_pair_fourier(const Loop& i, const Loop& j, const Vec3& K, const ThermoState& th, const FormFactor& ff,
                     bool classical) {
    const Mat3 D = transverse_delta(K);
    const double km = std::sqrt(K[0] * K[0] + K[1] * K[1] + K[2] * K[2]);
    const double g = ff.g(km);
    const double pref = magnetic_prefactor(i.species, j.species, th) * 4.0 * kPi * g * g / (km * km);
    const Segments si = segments(i.path), sj = segments(j.path);
    const double li = i.lambda(), lj = j.lambda();

    auto phase = [&](const Vec3& X, double l, double sign) {
        return std::exp(sign * kI * l * (K[0] * X[0] + K[1] * X[1] + K[2] * X[2]));
    };
    std::vector<CVec3> u(si.s.size()), w(sj.s.size());
    for (std::size_t a = 0; a < si.s.size(); ++a) {
        const cplx ph = phase(si.X[a], li, 1.0);
        for (int m = 0; m < 3; ++m) {
            double t = 0.0;
            for (int n = 0; n < 3; ++n) t += D(m, n) * si.dX[a][n];
            u[a][m] = t * ph;
        }
    }
    for (std::size_t b = 0; b < sj.s.size(); ++b) {
        const cplx ph = phase(sj.X[b], lj, -1.0);
        for (int m = 0; m < 3; ++m) w[b][m] = sj.dX[b][m] * ph;
    }
    auto dot = [](const CVec3& x, const CVec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; };

    cplx acc = 0.0;
    if (classical) {
        CVec3 U{}, W{};
        for (const auto& x : u)
            for (int m = 0; m < 3; ++m) U[m] += x[m];
        for (const auto& x : w)
            for (int m = 0; m < 3; ++m) W[m] += x[m];
        acc = dot(U, W);
    } else if (i.path.n_steps == j.path.n_steps) {
        const int n = i.path.n_steps;
        std::vector<CVec3> U(n, CVec3{}), W(n, CVec3{});
        for (std::size_t a = 0; a < u.size(); ++a)
            for (int m = 0; m < 3; ++m) U[a % n][m] += u[a][m];
        for (std::size_t b = 0; b < w.size(); ++b)
            for (int m = 0; m < 3; ++m) W[b % n][m] += w[b][m];
        std::vector<double> Qd(2 * n - 1);
        for (int r = -(n - 1); r <= n - 1; ++r) Qd[r + n - 1] = eval_Q(km, static_cast<double>(r) / n, th.lambda_ph());
        for (int ra = 0; ra < n; ++ra)
            for (int rb = 0; rb < n; ++rb) acc += Qd[ra - rb + n - 1] * dot(U[ra], W[rb]);
    } else {
        for (std::size_t a = 0; a < u.size(); ++a)
            for (std::size_t b = 0; b < w.size(); ++b)
                acc += eval_Q(km, si.s[a] - sj.s[b], th.lambda_ph()) * dot(u[a], w[b]);
    }
    return pref * acc;
}

double coulomb_force_kernel(double x1, double x2, double q, double d) {
    return 2.0 * kPi * std::exp(-q) * std::exp(-q * (x2 - x1) / d);
}

cplx v_transverse_partial(double x, const Vec2& q, int mu, int nu) {
    check_index(mu);
    check_index(nu);
    const double qm = std::hypot(q[0], q[1]);
    if (!(qm > 0.0)) throw SingularArgument("v_transverse_partial: q = 0 diverges");
    const double ax = std::abs(x);
    const double pre = kPi / qm * std::exp(-qm * ax);
    if (mu == 1 && nu == 1) return pre * (1.0 + qm * ax);
    if (mu == 1 || nu == 1) return pre * (-kI * qc(q, mu == 1 ? nu : mu) * x);
    const double delta = mu == nu ? 1.0 : 0.0;
    return pre * (2.0 * delta - (1.0 + qm * ax) * qc(q, mu) * qc(q, nu) / (qm * qm));
}

cplx wab_asymptotic(const Loop& i, const Loop& j, const Vec2& q, double d, const ThermoState& th) {
    const double qm = std::hypot(q[0], q[1]);
    if (!(qm > 0.0)) throw SingularArgument("wab_asymptotic: q = 0");
    const Moments m1 = moments(i.path, q), m2 = moments(j.path, q);
    const double e = std::exp(-qm);  // evaluated at x = 1
    cplx acc = 0.0;
    for (int mu = 1; mu <= 3; ++mu)
        for (int nu = 1; nu <= 3; ++nu) {
            // reflected kernel v(-x) = (pi/q) e^{-q x} (alpha + beta x) for x > 0
            cplx alpha, beta;
            if (mu == 1 && nu == 1) {
                alpha = 1.0;
                beta = qm;
            } else if (mu == 1 || nu == 1) {
                alpha = 0.0;
                beta = kI * qc(q, mu == 1 ? nu : mu);
            } else {
                const double c = qc(q, mu) * qc(q, nu) / (qm * qm);
                alpha = (mu == nu ? 2.0 : 0.0) - c;
                beta = -qm * c;
            }
            const cplx f0 = (alpha + beta) * e;
            const cplx f1 = (beta - qm * (alpha + beta)) * e;
            const cplx f2 = (qm * qm * (alpha + beta) - 2.0 * qm * beta) * e;
            const double P1 = m1.P[mu - 1], P2 = m2.P[nu - 1], R1 = m1.R[mu - 1], R2 = m2.R[nu - 1];
            acc += (kPi / qm) * (-P1 * P2 * f2 + kI * (P1 * R2 + R1 * P2) * f1 + R1 * R2 * f0);
        }
    return magnetic_prefactor(i.species, j.species, th) * i.lambda() * j.lambda() / d * acc;
}

FarField wm_partial_far(const Loop& i, const Loop& j, const Vec2& k, double d, const ThermoState& th,
                        const FormFactor& ff, const FarFieldOptions& opt) {
    const double km = std::hypot(k[0], k[1]);
    if (!(km > 0.0)) throw SingularArgument("wm_partial_far: k = 0");
    const Segments si = segments(i.path), sj = segments(j.path);
    const double li = i.lambda(), lj = j.lambda();
    const std::size_t Na = si.s.size(), Nb = sj.s.size();
    std::vector<double> xa(Na), xb(Nb);
    std::vector<cplx> pa(Na), pb(Nb);
    for (std::size_t a = 0; a < Na; ++a) {
        xa[a] = i.r[0] + li * si.X[a][0];
        pa[a] = std::exp(kI * li * (k[0] * si.X[a][1] + k[1] * si.X[a][2]));
    }
    for (std::size_t b = 0; b < Nb; ++b) {
        xb[b] = j.r[0] + d + lj * sj.X[b][0];
        pb[b] = std::exp(-kI * lj * (k[0] * sj.X[b][1] + k[1] * sj.X[b][2]));
    }
    FarField out{0.0, 0.0};
    for (std::size_t a = 0; a < Na; ++a)
        for (std::size_t b = 0; b < Nb; ++b) {
            const double x = xa[a] - xb[b];
            if (x == 0.0) throw SingularArgument("wm_partial_far: coincident normal coordinates");
            const double a0 = dipolar_remainder(frac(si.s[a] - sj.s[b]), th.lambda_ph(), ff, opt);
            const cplx ph = pa[a] * pb[b];
            cplx f = 0.0, df = 0.0;
            for (int mu = 1; mu <= 3; ++mu) {
                const double u = si.dX[a][mu - 1];
                if (u == 0.0) continue;
                for (int nu = 1; nu <= 3; ++nu) {
                    const double w = sj.dX[b][nu - 1];
                    const KernelPair v = v_and_dv(x, k, km, mu, nu);
                    const KernelPair t = t_and_dt(x, k, km, mu, nu);
                    f += u * w * (v.f - a0 * t.f);
                    df += u * w * (v.df - a0 * t.df);
                }
            }
            out.value += ph * f;
            out.dx1 += ph * df;
        }
    const double C = magnetic_prefactor(i.species, j.species, th);
    out.value *= C;
    out.dx1 *= C;
    return out;
}

std::vector<cplx> magnetic_capacitor_integrand(const Loop& i, const Loop& j, const std::vector<double>& X,
                                               const ThermoState& th, const FormFactor& ff, double* noise_floor) {
    double xmax = 0.0;
    for (double x : X) xmax = std::max(xmax, std::abs(x));
    const double kmax = ff.k_cut * std::sqrt(0.5 * std::log(1e18));
    // Poles of Q sit at |k1| = 2 pi n / lambda_ph; the midpoint rule aliases at period 2 pi / h.
    const double omega1 = 2.0 * kPi / std::max(th.lambda_ph(), 1e-300);
    double h = 2.0 * kPi / (2.0 * xmax + 80.0 / std::min(omega1, ff.k_cut));
    h = std::min(h, kmax / 400.0);
    const long M = static_cast<long>(std::ceil(kmax / h));
    std::vector<double> ks;
    std::vector<cplx> vals;
    ks.reserve(2 * M);
    vals.reserve(2 * M);
    for (long n = -M; n < M; ++n) {
        const double k1 = (n + 0.5) * h;
        ks.push_back(k1);
        vals.push_back(kI * k1 * wm_pair_fourier(i, j, Vec3{k1, 0.0, 0.0}, th, ff));
    }
    if (noise_floor) {
        num::NeumaierAccumulator l1;
        for (const cplx& v : vals) l1.add(std::abs(v));
        // Round-off level of the Fourier sum: values below it carry no information.
        *noise_floor = 100.0 * std::numeric_limits<double>::epsilon() * l1.value() * h / (2.0 * kPi);
    }
    std::vector<cplx> out;
    out.reserve(X.size());
    for (double x : X) {
        cplx acc = 0.0;
        for (std::size_t n = 0; n < ks.size(); ++n) acc += std::exp(kI * ks[n] * x) * vals[n];
        out.push_back(acc * h / (2.0 * kPi));
    }
    return out;
}

DecayFit fit_decay_exponent(const std::vector<double>& X, const std::vector<cplx>& I, double noise_floor) {
    double peak = 0.0;
    for (const cplx& v : I) peak = std::max(peak, std::abs(v));
    const double floor = std::max(1e-11 * peak, noise_floor);
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < X.size(); ++n)
        if (std::abs(I[n]) > floor) {
            xs.push_back(X[n]);
            ys.push_back(std::abs(I[n]));
        }
    DecayFit fit;
    fit.points_used = static_cast<int>(xs.size());
    if (xs.size() >= 3 && xs.size() == X.size()) {
        fit.exponent = -num::loglog_fit(xs, ys).slope;
        return fit;
    }
    // Part of the window is below round-off: bound the exponent from the first point and the floor.
    fit.bound_only = true;
    const double x0 = X.front(), x1 = X.back();
    const double y0 = std::max(std::abs(I.front()), floor);
    fit.exponent = std::log(y0 / std::max(floor, 1e-300)) / std::log(x1 / x0);
    if (xs.size() >= 3) fit.exponent = std::max(fit.exponent, -num::loglog_fit(xs, ys).slope);
    return fit;
}

namespace oracle {

double coulomb_force_kernel(double x1, double x2, double q, double d) {
    const double X = std::abs(x1 - x2 - d);
    const num::RealFn f = [X](double y) { return X / std::pow(X * X + y * y, 1.5); };
    if (q == 0.0) {
        const num::RealFn g = [&](double y) { return y * f(y); };
        return 2.0 * kPi * num::integrate_to_inf(g, 0.0, {1e-14, 1e-12, 4000}).value;
    }
    return 2.0 * kPi * num::hankel0(f, q / d, 400, {1e-15, 1e-13, 4000}).value;
}

cplx v_transverse_partial(double x, const Vec2& q, int mu, int nu) {
    check_index(mu);
    check_index(nu);
    const num::CplxFn g = [&](double k1) -> cplx {
        const Mat3 D = transverse_delta(Vec3{k1, q[0], q[1]});
        const double K2 = k1 * k1 + q[0] * q[0] + q[1] * q[1];
        return 4.0 * kPi / K2 * D(mu - 1, nu - 1);
    };
    return num::inverse_fourier_1d(g, x, {1e-15, 1e-13, 4000});
}

cplx vel_fourier(const Loop& i, const Loop& j, const Vec2& k) {
    const double km = std::hypot(k[0], k[1]);
    if (!(km > 0.0)) throw SingularArgument("oracle::vel_fourier: k = 0");
    cplx acc = 0.0;
    for (int a = 0; a < i.path.segments(); ++a)
        for (int b = 0; b < j.path.segments(); ++b) {
            const Vec3 &Xa = i.path.X[a], &Xb = j.path.X[b];
            const double x = i.r[0] + i.lambda() * Xa[0] - j.r[0] - j.lambda() * Xb[0];
            const num::RealFn f = [x](double y) { return 1.0 / std::sqrt(x * x + y * y); };
            const double radial = 2.0 * kPi * num::hankel0(f, km, 600, {1e-15, 1e-13, 4000}).value;
            const double shift = i.lambda() * (k[0] * Xa[1] + k[1] * Xa[2]) - j.lambda() * (k[0] * Xb[1] + k[1] * Xb[2]);
            acc += std::exp(kI * shift) * radial;
        }
    return acc * i.path.ds() * j.path.ds();
}

cplx wab_fourier3d(const Loop& i, const Loop& j, const Vec2& q, double d, const ThermoState& th) {
    const Moments m1 = moments(i.path, q), m2 = moments(j.path, q);
    double c_inf = 0.0;
    for (int mu = 1; mu < 3; ++mu) c_inf += 4.0 * kPi * m1.P[mu] * m2.P[mu];
    const num::CplxFn g = [&](double q1) -> cplx {
        const Mat3 D = transverse_delta(Vec3{q1, q[0], q[1]});
        const double K2 = q1 * q1 + q[0] * q[0] + q[1] * q[1];
        double acc = 0.0;
        for (int mu = 0; mu < 3; ++mu)
            for (int nu = 0; nu < 3; ++nu) {
                const double M = q1 * q1 * m1.P[mu] * m2.P[nu] + q1 * (m1.P[mu] * m2.R[nu] + m1.R[mu] * m2.P[nu]) +
                                 m1.R[mu] * m2.R[nu];
                acc += M * 4.0 * kPi / K2 * D(mu, nu);
            }
        return acc - c_inf;
    };
    const cplx integral = num::inverse_fourier_1d(g, -1.0, {1e-14, 1e-12, 4000});
    return magnetic_prefactor(i.species, j.species, th) * i.lambda() * j.lambda() / d * integral;
}

cplx wm_partial(const Loop& i, const Loop& j, const Vec2& k, double d, const ThermoState& th,
                const FormFactor& ff) {
    const num::CplxFn g = [&](double k1) { return wm_pair_fourier(i, j, Vec3{k1, k[0], k[1]}, th, ff); };
    return num::inverse_fourier_1d(g, i.r[0] - j.r[0] - d, {1e-16, 1e-12, 4000});
}

}  // namespace oracle

}  // namespace casimir
