#include "casimir/screening.hpp"

#include "casimir/errors.hpp"

#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace casimir {

namespace {

constexpr double kPi = M_PI;
constexpr cplx kI{0.0, 1.0};

double green(double x, double k) { return 2.0 * kPi / k * std::exp(-k * std::abs(x)); }

// Cloud-in-cell deposit of one loop shape onto offsets -R..R, with phases exp(i k lambda Y).
Eigen::VectorXcd deposit(const Path& path, double lambda, double k, double h, int R) {
    Eigen::VectorXcd D = Eigen::VectorXcd::Zero(2 * R + 1);
    const double ds = path.ds();
    for (int a = 0; a < path.segments(); ++a) {
        const Vec3& X = path.X[static_cast<std::size_t>(a)];
        const double t = lambda * X[0] / h;
        const double fl = std::floor(t);
        const int i0 = static_cast<int>(fl) + R;
        const double f = t - fl;
        const cplx w = ds * std::exp(kI * k * lambda * X[1]);
        D[i0] += w * (1.0 - f);
        if (f > 0.0) D[i0 + 1] += w * f;
    }
    return D;
}

int reach(const DensityProfile& prof, double h) {
    double ext = 0.0;
    for (const LoopCell& c : prof.cells) {
        const double l = prof.species[static_cast<std::size_t>(c.species)].params.lambda;
        for (const Path& p : c.paths)
            for (const Vec3& X : p.X) ext = std::max(ext, l * std::abs(X[0]));
    }
    return static_cast<int>(std::ceil(ext / h)) + 1;
}

// integral over [lo, hi] of the unit hat centred on l
double hat_overlap(double l, double lo, double hi) {
    double acc = 0.0;
    const double a0 = std::max(lo, l - 1.0), a1 = std::min(hi, l);
    if (a1 > a0) acc += (a1 - a0) - 0.5 * ((l - a0) * (l - a0) - (l - a1) * (l - a1));
    const double b0 = std::max(lo, l), b1 = std::min(hi, l + 1.0);
    if (b1 > b0) acc += (b1 - b0) - 0.5 * ((b1 - l) * (b1 - l) - (b0 - l) * (b0 - l));
    return acc;
}

// Path-integrated polarizability of one slab on its padded grid. A loop is admitted only where its whole
// path lies inside the slab; the admitted interval of the loop position is integrated exactly against the
// piecewise-linear interpolant of the nodal values.
Eigen::MatrixXcd slab_polarizability(const Region& r, double k, double h, int nl, int R) {
    const DensityProfile& prof = *r.profile;
    const int n = nl + 2 * R + 1, w = 2 * R + 1;
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n, n);
    struct Sample {
        Eigen::VectorXcd D;
        double coef, tL, tU;
    };
    std::vector<Sample> samples;
    for (const LoopCell& c : prof.cells) {
        if (c.paths.empty() || c.rho == 0.0) continue;
        const SpeciesParams& sp = prof.species[static_cast<std::size_t>(c.species)].params;
        const double coef = prof.beta * sp.charge * sp.charge * c.rho / static_cast<double>(c.paths.size());
        for (const Path& path : c.paths) {
            double xmin = 0.0, xmax = 0.0;
            for (const Vec3& X : path.X) {
                xmin = std::min(xmin, sp.lambda * X[0]);
                xmax = std::max(xmax, sp.lambda * X[0]);
            }
            const double tL = -xmin / h, tU = nl - xmax / h;
            if (tU <= tL) continue;  // loop wider than the slab
            samples.push_back({deposit(path, sp.lambda, k, h, R), coef, tL, tU});
        }
    }
    // Positions where every sample carries the full interior weight share one aggregated pattern.
    int full_lo = 0, full_hi = nl;
    for (const Sample& s : samples) {
        full_lo = std::max(full_lo, static_cast<int>(std::ceil(s.tL)) + 1);
        full_hi = std::min(full_hi, static_cast<int>(std::floor(s.tU)) - 1);
    }
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(w, w);
    for (const Sample& s : samples) P.noalias() += s.coef * s.D.conjugate() * s.D.transpose();
    for (int l = full_lo; l <= full_hi; ++l)
        K.block(l, l, w, w) += h * prof.shape_at(r.x_lo + l * h - r.origin) * P;
    for (const Sample& s : samples) {
        const Eigen::MatrixXcd Ps = s.coef * s.D.conjugate() * s.D.transpose();
        const int lo = std::max(0, static_cast<int>(std::floor(s.tL)));
        const int hi = std::min(nl, static_cast<int>(std::ceil(s.tU)));
        for (int l = lo; l <= hi; ++l) {
            if (l >= full_lo && l <= full_hi) continue;
            const double wl = h * hat_overlap(l, s.tL, s.tU);
            if (wl > 0.0) K.block(l, l, w, w) += wl * prof.shape_at(r.x_lo + l * h - r.origin) * Ps;
        }
    }
    return K;
}

}  // namespace

namespace {

double newton_fugacity(double n, double g, int eta, double lambda, int p_max) {
    auto f = [&](double z, double& df) {
        double v = 0.0;
        df = 0.0;
        for (int p = 1; p <= p_max; ++p) {
            const double sign = (p % 2 == 1) ? 1.0 : eta;
            const double c = g * sign / std::pow(2.0 * kPi * p * lambda * lambda, 1.5);
            v += c * std::pow(z, p);
            df += c * p * std::pow(z, p - 1);
        }
        return v;
    };
    double z = n * std::pow(2.0 * kPi * lambda * lambda, 1.5) / g;
    for (int it = 0; it < 100; ++it) {
        double df = 0.0;
        const double r = f(z, df) - n;
        if (!(df > 0.0)) break;
        const double step = r / df;
        z -= step;
        if (std::abs(step) <= 1e-15 * std::abs(z)) {
            double d2 = 0.0;
            f(z, d2);
            if (z > 0.0 && d2 > 0.0) return z;
            break;
        }
    }
    throw ParameterError("DensityProfile: no dilute fugacity solution; reduce n lambda^3 or p_max");
}

}  // namespace

void SlabGeometry::validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !(d > 0.0)) throw ParameterError("SlabGeometry: a, b, d must be positive");
    if (!(h > 0.0) || h > std::min(a, b)) throw ParameterError("SlabGeometry: grid spacing out of range");
}

Hierarchy SlabGeometry::hierarchy(double k_cut, double lambda_mat, double lambda_ph, double lambda_screen) const {
    Hierarchy out;
    out.quantum_ordered = 1.0 / k_cut < lambda_mat && lambda_mat < lambda_ph && lambda_ph < d;
    out.screening_ordered = lambda_screen < std::min(a, b) && std::max(a, b) < d;
    return out;
}

DensityProfile DensityProfile::build(const ThermoState& th, const std::vector<SpeciesSpec>& species,
                                     const CellOptions& opt, bool neutral) {
    th.validate();
    if (opt.p_max < 1 || opt.n_steps < 2 || opt.n_paths < 1) throw ParameterError("CellOptions: knobs must be positive");
    DensityProfile prof;
    prof.beta = th.beta;
    prof.species = species;
    int cell_index = 0;
    for (std::size_t g = 0; g < species.size(); ++g) {
        SpeciesSpec& spec = prof.species[g];
        spec.params.validate(th);
        if (spec.number_density < 0.0) throw ParameterError("DensityProfile: negative number density");
        const double deg = 2.0 * spec.params.spin + 1.0;
        double z = 0.0;
        if (spec.number_density > 0.0)
            z = newton_fugacity(spec.number_density, deg, spec.params.eta, spec.params.lambda, opt.p_max);
        if (z > 0.0) spec.params.mu = std::log(z) / th.beta;
        for (int p = 1; p <= opt.p_max; ++p, ++cell_index) {
            LoopCell cell;
            cell.species = static_cast<int>(g);
            cell.p = p;
            const double sign = (p % 2 == 1) ? 1.0 : spec.params.eta;
            const double l2 = spec.params.lambda * spec.params.lambda;
            cell.rho = deg * sign * std::pow(z, p) / (p * std::pow(2.0 * kPi * p * l2, 1.5));
            if (opt.point_loops) {
                cell.paths.push_back(point_path(p, opt.n_steps));
            } else {
                const BridgeSampler sampler(opt.n_steps, derive_seed(opt.seed, static_cast<std::uint64_t>(cell_index)));
                for (int m = 0; m < opt.n_paths; ++m) cell.paths.push_back(sampler.sample(p, static_cast<std::uint64_t>(m)));
            }
            prof.cells.push_back(std::move(cell));
        }
    }
    if (neutral) {
        if (!prof.neutral(1e-10)) throw ParameterError("DensityProfile: neutrality requested but sum e n != 0");
        prof.neutral_mode = true;
    }
    return prof;
}

double DensityProfile::charge_density(double x) const {
    if (neutral_mode) return 0.0;
    double c = 0.0;
    for (const SpeciesSpec& s : species) c += s.params.charge * s.number_density;
    return c * shape_at(x);
}

double DensityProfile::kappa2() const {
    double k2 = 0.0;
    for (const LoopCell& c : cells) {
        const double e = species[static_cast<std::size_t>(c.species)].params.charge;
        k2 += e * e * c.p * c.p * c.rho;
    }
    return 4.0 * kPi * beta * k2;
}

double DensityProfile::lambda_screen() const {
    const double k2 = kappa2();
    return k2 > 0.0 ? 1.0 / std::sqrt(k2) : std::numeric_limits<double>::infinity();
}

double DensityProfile::lambda_mat() const {
    double l = 0.0;
    for (const SpeciesSpec& s : species) l = std::max(l, s.params.lambda);
    return l;
}

bool DensityProfile::neutral(double tol) const {
    double net = 0.0, scale = 0.0;
    for (const SpeciesSpec& s : species) {
        net += s.params.charge * s.number_density;
        scale += std::abs(s.params.charge) * s.number_density;
    }
    return std::abs(net) <= tol * std::max(scale, 1e-300);
}

ScreeningField screening_field(const Region& region, double h) {
    if (!region.profile) throw DependencyError("screening_field: region has no density profile");
    ScreeningField out;
    const int n = std::max(1, static_cast<int>(std::lround((region.x_hi - region.x_lo) / h)));
    const double hr = (region.x_hi - region.x_lo) / n;
    const double k2 = region.profile->kappa2();
    for (int i = 0; i <= n; ++i) {
        const double x = region.x_lo + i * hr;
        out.x.push_back(x);
        out.kappa.push_back(std::sqrt(std::max(0.0, k2 * region.profile->shape_at(x - region.origin))));
    }
    return out;
}

ScreenedPotential::ScreenedPotential(std::shared_ptr<const KernelMatrix> km, Loop source, Eigen::VectorXcd induced)
    : km_(std::move(km)), source_(std::move(source)), induced_(std::move(induced)) {}

cplx ScreenedPotential::source_field(double x) const {
    const double k = km_->k;
    const Path& P = source_.path;
    cplx acc = 0.0;
    for (int b = 0; b < P.segments(); ++b) {
        const Vec3& X = P.X[static_cast<std::size_t>(b)];
        acc += std::exp(-kI * k * source_.lambda() * X[1]) * green(x - source_.r[0] - source_.lambda() * X[0], k);
    }
    return acc * P.ds();
}

cplx ScreenedPotential::field(double x) const {
    cplx acc = source_field(x);
    const double k = km_->k;
    for (std::size_t n = 0; n < km_->x.size(); ++n) acc -= green(x - km_->x[n], k) * induced_[static_cast<Eigen::Index>(n)];
    return acc;
}

cplx ScreenedPotential::phi(const Loop& i) const {
    const Path& P = i.path;
    cplx acc = 0.0;
    for (int a = 0; a < P.segments(); ++a) {
        const Vec3& X = P.X[static_cast<std::size_t>(a)];
        acc += std::exp(kI * km_->k * i.lambda() * X[1]) * field(i.r[0] + i.lambda() * X[0]);
    }
    return acc * P.ds();
}

ScreeningSolver::ScreeningSolver(std::vector<Region> regions, const ThermoState& th, double k, const GridOptions& grid) {
    th.validate();
    if (!(k > 0.0)) throw SingularArgument("ScreeningSolver: k must be positive (V^el diverges at k = 0)");
    if (!(grid.h > 0.0)) throw ParameterError("ScreeningSolver: grid spacing must be positive");
    auto km = std::make_shared<KernelMatrix>();
    km->k = k;

    struct Block {
        Eigen::Index offset, size;
        Eigen::MatrixXcd K;
    };
    std::vector<Block> blocks;
    for (const Region& r : regions) {
        if (!r.profile) throw DependencyError("ScreeningSolver: region has no density profile");
        if (!(r.x_hi > r.x_lo)) throw ParameterError("ScreeningSolver: empty region");
        const int nl = std::max(1, static_cast<int>(std::lround((r.x_hi - r.x_lo) / grid.h)));
        const double hr = (r.x_hi - r.x_lo) / nl;
        const int R = reach(*r.profile, hr);
        const int n = nl + 2 * R + 1;
        Block blk{static_cast<Eigen::Index>(km->x.size()), n, slab_polarizability(r, k, hr, nl, R)};
        for (int i = 0; i < n; ++i) km->x.push_back(r.x_lo + (i - R) * hr);
        blocks.push_back(std::move(blk));
    }
    const Eigen::Index N = static_cast<Eigen::Index>(km->x.size());
    if (N == 0) throw ParameterError("ScreeningSolver: no regions");
    Eigen::MatrixXd G(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) G(i, j) = green(km->x[i] - km->x[j], k);
    km->K = Eigen::MatrixXcd::Zero(N, N);
    km->A = Eigen::MatrixXcd::Identity(N, N);
    for (const Block& b : blocks) {
        km->K.block(b.offset, b.offset, b.size, b.size) = b.K;
        km->A.middleCols(b.offset, b.size).noalias() += G.middleCols(b.offset, b.size).cast<cplx>() * b.K;
    }
    lu_.compute(km->A);
    rcond_ = lu_.rcond();
    if (!(rcond_ > 1e-15)) throw SolverError("ScreeningSolver: discretized operator is singular", 1.0 / rcond_);
    km_ = std::move(km);
}

ScreenedPotential ScreeningSolver::solve(const Loop& source) const {
    const Eigen::Index N = static_cast<Eigen::Index>(km_->x.size());
    ScreenedPotential bare(km_, source, Eigen::VectorXcd::Zero(N));
    Eigen::VectorXcd s(N);
    for (Eigen::Index n = 0; n < N; ++n) s[n] = bare.field(km_->x[static_cast<std::size_t>(n)]);
    const Eigen::VectorXcd phi = lu_.solve(s);
    if (!phi.allFinite()) throw SolverError("ScreeningSolver: non-finite solution", 1.0 / rcond_);
    return ScreenedPotential(km_, source, km_->K * phi);
}

ScreenedPotential solve_screened_potential(const std::vector<Region>& regions, const ThermoState& th, double k,
                                           const Loop& source, const GridOptions& grid) {
    return ScreeningSolver(regions, th, k, grid).solve(source);
}

double bulk_yukawa(double x, double k, double kappa) {
    const double K = std::hypot(k, kappa);
    return 2.0 * kPi / K * std::exp(-K * std::abs(x));
}

double build_F_bond(cplx phi, double e_i, double e_j, double beta) { return -beta * e_i * e_j * phi.real(); }

cplx build_F_bond(cplx phi, const SpeciesParams& i, const SpeciesParams& j, double beta) {
    return -beta * i.charge * j.charge * phi;
}

FRBond build_FR_bond(double phi, double W, double e_i, double e_j, double beta) {
    const double u = -beta * e_i * e_j * (phi + W);
    constexpr double cap = 700.0;
    FRBond out;
    if (u > cap) out.clamped = true;
    const double uc = std::min(u, cap);
    // e^u - 1 - u_phi with u_phi = -beta e e phi; expm1 keeps the small-coupling regime exact.
    out.value = std::expm1(uc) + beta * e_i * e_j * phi;
    return out;
}

std::vector<double> KSequence::values() const {
    if (!(k0 > 0.0) || levels < 2) throw ParameterError("KSequence: need k0 > 0 and at least two levels");
    std::vector<double> ks;
    for (int n = 0; n < levels; ++n) ks.push_back(k0 * std::ldexp(1.0, -n));
    return ks;
}

SumRuleResult check_perfect_screening(const std::vector<Region>& regions, const ThermoState& th, const Loop& source,
                                      const KSequence& ks, const GridOptions& grid, double tol) {
    SumRuleResult out;
    out.k = ks.values();
    double phi_self_kmin = 0.0;
    bool any_screening = false;
    for (double k : out.k) {
        const ScreeningSolver solver(regions, th, k, grid);
        any_screening = any_screening || solver.kernel().K.cwiseAbs().maxCoeff() > 0.0;
        const ScreenedPotential sp = solver.solve(source);
        out.induced.push_back(sp.induced_charge().real());
        phi_self_kmin = std::abs(sp.phi(source));
    }
    const double pj = source.p();
    out.divergent = !any_screening || out.k.back() * phi_self_kmin > 0.1 * 2.0 * kPi * pj * pj;
    const num::Extrapolation q0 = num::richardson(out.induced, 2.0, 1, 1);
    out.residual = 1.0 - q0.value / pj;
    out.error = q0.error / pj;
    out.converged = !out.divergent && out.error < 0.1 * tol;
    return out;
}

num::Extrapolation phi0_border(const Region& plate, const ThermoState& th, double border_x, const KSequence& ks,
                               const GridOptions& grid) {
    const Loop zero = point_loop({border_x, 0.0, 0.0}, SpeciesParams::make(th, 1.0, 1.0), 1, 2);
    std::vector<double> v;
    for (double k : ks.values())
        v.push_back(ScreeningSolver({plate}, th, k, grid).solve(zero).field(border_x).real());
    return num::richardson(v, 2.0, 1, 1);
}

double factorize_phi_AB(double q, double d, double phiA_i0, double phiB_0j) {
    return q / (4.0 * kPi * std::sinh(q)) / d * phiA_i0 * phiB_0j;
}

double traversing_series(double q, double d, double phiA_i0, double phiB_0j, int n_terms) {
    double acc = 0.0;
    for (int n = 0; n < n_terms; ++n) acc += std::exp(-2.0 * n * q);
    return acc * q * std::exp(-q) / (2.0 * kPi * d) * phiA_i0 * phiB_0j;
}

cplx coupled_phi_AB(const DensityProfile& A, const DensityProfile& B, const SlabGeometry& g, const ThermoState& th,
                    double q) {
    g.validate();
    const std::vector<Region> regions{{-g.a, 0.0, &A, 0.0}, {g.d, g.d + g.b, &B, g.d}};
    const Loop zeroB = point_loop({g.d, 0.0, 0.0}, SpeciesParams::make(th, 1.0, 1.0), 1, 2);
    return ScreeningSolver(regions, th, q / g.d, {g.h}).solve(zeroB).field(0.0);
}

BracketResult border_bracket(const Region& plate, const ThermoState& th, double border_x, const KSequence& ks,
                             const GridOptions& grid) {
    const Loop zero = point_loop({border_x, 0.0, 0.0}, SpeciesParams::make(th, 1.0, 1.0), 1, 2);
    BracketResult out;
    std::vector<double> total;
    std::vector<std::vector<double>> profiles;
    for (double k : ks.values()) {
        const ScreenedPotential sp = ScreeningSolver({plate}, th, k, grid).solve(zero);
        total.push_back(-sp.induced_charge().real());
        std::vector<double> prof(static_cast<std::size_t>(sp.induced().size()));
        for (Eigen::Index n = 0; n < sp.induced().size(); ++n) prof[static_cast<std::size_t>(n)] = sp.induced()[n].real();
        profiles.push_back(std::move(prof));
        out.x = sp.nodes();
    }
    out.value = num::richardson(total, 2.0, 1, 1);
    out.cloud.resize(out.x.size());
    std::vector<double> col(profiles.size());
    for (std::size_t n = 0; n < out.x.size(); ++n) {
        for (std::size_t l = 0; l < profiles.size(); ++l) col[l] = profiles[l][n];
        out.cloud[n] = num::richardson(col, 2.0, 1, 1).value;
    }
    return out;
}

UrsellLeading leading_ursell(const DensityProfile& A, const DensityProfile& B, const SlabGeometry& g,
                             const ThermoState& th, const Loop& probe_A, const Loop& probe_B, const KSequence& ks) {
    g.validate();
    if (A.cells.empty() || B.cells.empty()) throw DependencyError("leading_ursell: single-plate tables missing");
    const Region ra{-g.a, 0.0, &A, 0.0};
    const Region rb{0.0, g.b, &B, 0.0};
    UrsellLeading out;
    out.A = border_bracket(ra, th, 0.0, ks, {g.h});
    out.B = border_bracket(rb, th, 0.0, ks, {g.h});
    auto w_term = [&](const Region& r, const Loop& probe, double& value, double& scale) {
        const SumRuleResult s = check_perfect_screening({r}, th, probe, ks, {g.h});
        const double e = probe.species.charge, p = probe.p();
        const double induced = p * (1.0 - s.residual);
        value = e * (p - induced);
        scale = std::abs(e) * (std::abs(induced) + p);
    };
    w_term(ra, probe_A, out.w_term_A, out.w_term_A_scale);
    w_term(rb, probe_B, out.w_term_B, out.w_term_B_scale);
    return out;
}

double h_AB_leading(double q, double d, double beta, double G_A, double G_B, double e_A0, double e_B0) {
    return -1.0 / (beta * d) * q / (4.0 * kPi * std::sinh(q)) * (G_A / e_A0) * (G_B / e_B0);
}

MultipoleReport multipole_integrability_check(const std::function<double(double)>& phi_shifted,
                                              const std::function<double(double)>& phi_base, double c_y,
                                              const std::vector<double>& radii, double tol) {
    MultipoleReport out;
    out.R = radii;
    const num::RealFn f = [&](double k) { return phi_shifted(k) * gsl_sf_bessel_J0(k * c_y) - phi_base(k); };
    for (double R : radii) out.I.push_back(R * num::bessel_j1_integral(f, R, 400, {1e-13, 1e-11, 4000}).value);
    for (std::size_t i = 1; i < out.I.size(); ++i)
        out.cauchy = std::max(out.cauchy, std::abs(out.I[i] - out.I[i - 1]));
    out.integrable = std::isfinite(out.cauchy) && out.cauchy < tol;
    return out;
}

std::function<double(double)> slab_phi_class(const DensityProfile& profile, double a, const ThermoState& th,
                                             double x1, double x2, const GridOptions& grid) {
    const Region plate{-a, 0.0, &profile, 0.0};
    const Loop src = point_loop({x2, 0.0, 0.0}, SpeciesParams::make(th, 1.0, 1.0), 1, 2);
    auto value = [&](double k) { return ScreeningSolver({plate}, th, k, grid).solve(src).field(x1).real(); };

    const KSequence ks{1e-2, 6};
    std::vector<double> small;
    for (double k : ks.values()) small.push_back(value(k));
    std::vector<double> kk{0.0}, vv{num::richardson(small, 2.0, 1, 1).value};
    const double kmin = 1e-3, kmax = 40.0;
    const int n = 240;
    for (int i = 0; i < n; ++i) {
        const double k = kmin * std::pow(kmax / kmin, static_cast<double>(i) / (n - 1));
        kk.push_back(k);
        vv.push_back(value(k));
    }
    std::shared_ptr<gsl_interp_accel> acc(gsl_interp_accel_alloc(), gsl_interp_accel_free);
    std::shared_ptr<gsl_spline> spl(gsl_spline_alloc(gsl_interp_cspline, kk.size()), gsl_spline_free);
    gsl_spline_init(spl.get(), kk.data(), vv.data(), kk.size());
    return [acc, spl, kmax](double k) { return k > kmax ? 0.0 : gsl_spline_eval(spl.get(), k, acc.get()); };
}

}  // namespace casimir
