#pragma once

#include "casimir/loopspace.hpp"
#include "casimir/numerics.hpp"
#include "casimir/potentials.hpp"
#include "casimir/screening.hpp"

#include <string>
#include <vector>

namespace casimir {

inline constexpr double kZeta3 = 1.2020569031595942853997;

// q^2 e^{-q} / sinh q, continuous at q = 0 with value 0 (behaves like q).
double zeta3_integrand(double q);
// Adaptive quadrature of the integrand over [0, inf); equals zeta(3) / 2.
num::QuadResult zeta3_quadrature();

struct SeriesOracle {
    double value = 0.0;       // partial sum plus the integral estimate of the tail
    double tail_bound = 0.0;  // the tail lies in (0, tail_bound]
};
// sum_{n >= 1} 1 / (2 n^3)
SeriesOracle zeta3_half_series(long n_max = 1000000);

// -zeta(3) / (8 pi beta d^3); depends on beta and d only.
double leading_force(const ThermoState& th, double d);

enum class Regime { low_T, high_T, intermediate };
enum class TEMode { rTE1, rTE0 };

struct RegimeThresholds {
    double low_T_alpha = 10.0;   // alpha above this: low temperature / small separation
    double high_T_alpha = 0.1;   // alpha below this: high temperature / large separation
};

struct ForceRegimeParams {
    double alpha = 0.0;  // hbar c / (kB T d)
    Regime regime = Regime::intermediate;
    static ForceRegimeParams make(const ThermoState& th, double d, const RegimeThresholds& t = {});
};

std::string to_string(Regime r);

struct LifshitzValue {
    double value = 0.0;
    double repulsive_correction = 0.0;  // + zeta(3) kB T / (8 pi d^3) inside the low-T rTE0 form, else 0
    bool regime_mismatch = false;
};
LifshitzValue lifshitz_reference(const ThermoState& th, double d, TEMode mode, Regime regime,
                                 const RegimeThresholds& t = {});

struct LifshitzTable {
    double eq2 = 0.0;  // low T, r_TE = 1
    double eq3 = 0.0;  // low T, r_TE = 0
    double eq4 = 0.0;  // high T, r_TE = 1
    double eq5 = 0.0;  // high T, r_TE = 0
};
LifshitzTable lifshitz_table(const ThermoState& th, double d);

// 2 pi [int c_A][int c_B] from sampled charge densities on uniform grids (trapezoid, compensated sums).
double capacitor_electrostatic(const std::vector<double>& c_A, double h_A, const std::vector<double>& c_B,
                               double h_B);

struct MagneticFixture {
    Loop i, j;
    ThermoState th;
    FormFactor ff;
    std::vector<double> X;
};

struct CapacitorResult {
    double electrostatic = 0.0;
    DecayFit magnetic;
};
CapacitorResult capacitor_force(const DensityProfile& A, double a, const DensityProfile& B, double b,
                                const MagneticFixture& mag, double h = 0.01);

struct ForceBreakdown {
    double d = 0.0;
    ForceRegimeParams regime;
    double f_leading = 0.0;
    double f_assembled = 0.0;   // factorized leading form with the computed brackets
    double f_finite_d = 0.0;    // same with the full finite-d Coulomb kernel
    std::vector<double> q_grid, integrand;
    double capacitor_el = 0.0;
    double capacitor_mag_exponent = 0.0;
    bool capacitor_mag_bound_only = false;
    double magnetic_remainder_bound = 0.0;  // order-of-magnitude O(d^-5) estimate, never added
    LifshitzTable lifshitz;
    double bracket_A = 0.0, bracket_B = 0.0, bracket_err_A = 0.0, bracket_err_B = 0.0;
    double w_term_A = 0.0, w_term_B = 0.0;
    bool certified = false;
};

struct AssemblyOptions {
    double sumrule_tol = 1e-2;
    double q_max_table = 20.0;
    int q_points = 81;
    double dwm_rms = -1.0;  // |d/dx1 W^m_AB| at q = 1 for the magnetic remainder estimate; < 0 disables
};

// Force per area from the leading Ursell pieces.
ForceBreakdown assemble_force(const SlabGeometry& g, const UrsellLeading& u, const ThermoState& th,
                              const AssemblyOptions& opt = {});

// Same with explicit bracket values substituted.
double assemble_with_brackets(const ThermoState& th, double d, double bracket_A, double bracket_B);

struct MonopoleCheck {
    double full = 0.0;      // equal-time loop Coulomb force, averaged over path origins
    double monopole = 0.0;  // p1 p2 e1 e2 d/dx1 |r1 - r2|^-1, averaged the same way
};
// Loops of B are given in B's own coordinates and shifted by d along x.
MonopoleCheck monopole_reduction(const std::vector<Loop>& A, const std::vector<Loop>& B, double d);

}  // namespace casimir
