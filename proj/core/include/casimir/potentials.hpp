#pragma once

#include "casimir/loopspace.hpp"

#include <Eigen/Core>
#include <array>
#include <complex>
#include <vector>

namespace casimir {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;  // in-plane (y, z) components
using Mat3 = Eigen::Matrix3d;

// Smooth spherically symmetric form factor with g(0) = 1; default Gaussian cutoff.
struct FormFactor {
    double k_cut = 10.0;
    double g(double k) const;
    // lim_{k->0} (g(k)^2 - 1) / k^2
    double g2_curvature() const { return -2.0 / (k_cut * k_cut); }
};

// delta_{mu nu} - K_mu K_nu / |K|^2; K = 0 is singular.
Mat3 transverse_delta(const Vec3& K);

// lambda_ph k / (2 sinh(lambda_ph k / 2)) cosh[lambda_ph k (|ds mod 1| - 1/2)]
double eval_Q(double kmag, double ds, double lambda_ph);

struct CoulombReg {
    double eps_rel = 1e-8;  // coincidence radius in units of the de Broglie length
};

// Equal-time Coulomb potential; requires a common n_steps.
double vc_pair(const Loop& i, const Loop& j, const CoulombReg& reg = {});
// Unconstrained double time sum (uniformly charged wires).
double vel_pair(const Loop& i, const Loop& j, const CoulombReg& reg = {});
double wc_pair(const Loop& i, const Loop& j, const CoulombReg& reg = {});

// Transverse (in-plane) Fourier transform of V^el at in-plane wavevector k != 0.
cplx vel_fourier(const Loop& i, const Loop& j, const Vec2& k);

// 1 / (beta sqrt(m_i m_j) c^2)
double magnetic_prefactor(const SpeciesParams& a, const SpeciesParams& b, const ThermoState& th);

// Fourier-space magnetic potential between loop shapes at 3-wavevector K = (k1, k2, k3).
// classical = true sets Q = 1 (lambda_ph -> 0).
cplx wm_pair_fourier(const Loop& i, const Loop& j, const Vec3& K, const ThermoState& th, const FormFactor& ff,
                     bool classical = false);

// Partial in-plane transform of d/dx1 |r1 - r2|^{-1}, slabs separated by d, q = k d.
double coulomb_force_kernel(double x1, double x2, double q, double d);

// integral dk1/2pi e^{i k1 x} 4 pi / (k1^2 + q^2) delta^tr_{mu nu}(k1, q); indices 1..3, 1 = slab normal.
cplx v_transverse_partial(double x, const Vec2& q, int mu, int nu);

// Large-d form of the dipolar inter-slab potential at in-plane q / d (classical small-K kernel).
cplx wab_asymptotic(const Loop& i, const Loop& j, const Vec2& q, double d, const ThermoState& th);

struct FarFieldOptions {
    bool quantum = true;       // keep the photon-mode dipolar remainder (lambda_ph^2 term)
    bool form_factor = true;   // keep the form-factor dipolar remainder (k_cut^-2 term)
};

struct FarField {
    cplx value;    // W^m_AB(1, 2, k)
    cplx dx1;      // d/dx1 W^m_AB(1, 2, k)
};

// Partial-transform magnetic potential between loop i in slab A and loop j in slab B
// (loop j's x measured from B's inner face), valid when the separation is much larger
// than lambda_ph and 1 / k_cut. Short-range remainders are exponentially small there.
FarField wm_partial_far(const Loop& i, const Loop& j, const Vec2& k, double d, const ThermoState& th,
                        const FormFactor& ff, const FarFieldOptions& opt = {});

// Zero in-plane wavevector magnetic capacitor integrand
// integral dk1/2pi e^{i k1 X} i k1 W^m(chi_i, chi_j, k1, 0), tabulated on X values.
// noise_floor, if given, receives the round-off level of the k1 sum.
std::vector<cplx> magnetic_capacitor_integrand(const Loop& i, const Loop& j, const std::vector<double>& X,
                                               const ThermoState& th, const FormFactor& ff,
                                               double* noise_floor = nullptr);

struct DecayFit {
    double exponent = 0.0;  // -slope of log|I| vs log X
    int points_used = 0;
    bool bound_only = false;  // integrand fell below round-off; exponent is a lower bound
};
// Values below max(1e-11 peak, noise_floor) are treated as unresolved.
DecayFit fit_decay_exponent(const std::vector<double>& X, const std::vector<cplx>& I, double noise_floor = 0.0);

namespace oracle {
// Hankel-transform quadrature of the y-integral.
double coulomb_force_kernel(double x1, double x2, double q, double d);
// 1D adaptive quadrature with Fourier tail.
cplx v_transverse_partial(double x, const Vec2& q, int mu, int nu);
// Node-pair Hankel quadrature of the in-plane transform of V^el.
cplx vel_fourier(const Loop& i, const Loop& j, const Vec2& k);
// k1-quadrature of the large-d inter-slab potential with the small-K magnetic kernel.
cplx wab_fourier3d(const Loop& i, const Loop& j, const Vec2& q, double d, const ThermoState& th);
// Direct k1-quadrature of the full Fourier-space magnetic kernel.
cplx wm_partial(const Loop& i, const Loop& j, const Vec2& k, double d, const ThermoState& th,
                const FormFactor& ff);
}  // namespace oracle

}  // namespace casimir
