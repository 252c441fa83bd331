#pragma once

#include "casimir/loopspace.hpp"
#include "casimir/numerics.hpp"
#include "casimir/potentials.hpp"

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace casimir {

// Length-scale ordering flags for a two-slab configuration.
struct Hierarchy {
    bool quantum_ordered = false;    // 1/k_cut << lambda_mat << lambda_ph << d
    bool screening_ordered = false;  // lambda_screen << a, b << d
};

struct SlabGeometry {
    double a = 10.0;  // thickness of A = [-a, 0]
    double b = 10.0;  // thickness of B = [0, b] in its own coordinates
    double d = 100.0;
    double h = 0.05;  // x-grid spacing
    void validate() const;
    Hierarchy hierarchy(double k_cut, double lambda_mat, double lambda_ph, double lambda_screen) const;
};

struct SpeciesSpec {
    std::string name;
    SpeciesParams params;
    double number_density = 0.0;  // particles per volume
};

// Discretized internal-degree integral for one (species, p) cell: rho is the loop density
// (negative for even p of fermions), paths the bridge samples averaged with equal weight.
struct LoopCell {
    int species = 0;
    int p = 1;
    double rho = 0.0;
    std::vector<Path> paths;
};

struct CellOptions {
    int p_max = 2;
    int n_steps = 32;
    int n_paths = 256;
    std::uint64_t seed = 1;
    bool point_loops = false;  // classical charges: all shapes zero
};

class DensityProfile {
public:
    // Fixes each species' fugacity so that sum_p p rho_p equals its number density.
    // neutral = true verifies sum_gamma e_gamma n_gamma = 0 and then pins the charge density to exactly 0.
    static DensityProfile build(const ThermoState& th, const std::vector<SpeciesSpec>& species,
                                const CellOptions& opt, bool neutral = false);

    std::vector<SpeciesSpec> species;
    std::vector<LoopCell> cells;
    double beta = 1.0;
    bool neutral_mode = false;
    // Multiplier on all densities as a function of the slab coordinate; default 1 (step profile).
    std::function<double(double)> shape;

    double shape_at(double x) const { return shape ? shape(x) : 1.0; }
    double charge_density(double x) const;  // sum_gamma e_gamma n_gamma at x
    double kappa2() const;                  // 4 pi beta sum e^2 p^2 rho at unit shape
    double lambda_screen() const;
    double lambda_mat() const;              // largest de Broglie length
    bool neutral(double tol = 1e-12) const;
};

// A slab occupying [x_lo, x_hi]; slab coordinate = x - origin.
struct Region {
    double x_lo = 0.0;
    double x_hi = 0.0;
    const DensityProfile* profile = nullptr;
    double origin = 0.0;
};

struct ScreeningField {
    std::vector<double> x;
    std::vector<double> kappa;
};
ScreeningField screening_field(const Region& region, double h);

struct GridOptions {
    double h = 0.05;
};

// Path-integrated polarizability on the x-grid at fixed in-plane k, with
// quadrature and Monte Carlo weights absorbed, and the Nystrom operator I + G K.
struct KernelMatrix {
    double k = 0.0;
    std::vector<double> x;
    Eigen::MatrixXcd K;
    Eigen::MatrixXcd A;
};

// Screened potential generated by a fixed source loop j at in-plane k.
class ScreenedPotential {
public:
    ScreenedPotential(std::shared_ptr<const KernelMatrix> km, Loop source, Eigen::VectorXcd induced);
    // Potential field phi_j(x) felt by a unit point charge at x.
    cplx field(double x) const;
    // Phi(i, j, k) for a loop i.
    cplx phi(const Loop& i) const;
    // Total induced charge (in units of e_j, weighted by beta e^2) and its profile on the grid.
    cplx induced_charge() const { return induced_.sum(); }
    const Eigen::VectorXcd& induced() const { return induced_; }
    const std::vector<double>& nodes() const { return km_->x; }
    double k() const { return km_->k; }

private:
    cplx source_field(double x) const;
    std::shared_ptr<const KernelMatrix> km_;
    Loop source_;
    Eigen::VectorXcd induced_;
};

class ScreeningSolver {
public:
    ScreeningSolver(std::vector<Region> regions, const ThermoState& th, double k, const GridOptions& grid = {});
    ScreenedPotential solve(const Loop& source) const;
    const KernelMatrix& kernel() const { return *km_; }
    double rcond() const { return rcond_; }

private:
    std::shared_ptr<KernelMatrix> km_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    double rcond_ = 0.0;
};

// One-shot solve of the transverse-Fourier integral equation.
ScreenedPotential solve_screened_potential(const std::vector<Region>& regions, const ThermoState& th, double k,
                                           const Loop& source, const GridOptions& grid = {});

// Analytic bulk solution (2 pi / K) exp(-K |x|), K = sqrt(k^2 + kappa^2).
double bulk_yukawa(double x, double k, double kappa);

double build_F_bond(cplx phi, double e_i, double e_j, double beta);
cplx build_F_bond(cplx phi, const SpeciesParams& i, const SpeciesParams& j, double beta);

struct FRBond {
    double value = 0.0;
    bool clamped = false;  // exponent clipped: strong coupling
};
FRBond build_FR_bond(double phi, double W, double e_i, double e_j, double beta);

struct KSequence {
    double k0 = 0.1;
    int levels = 6;
    std::vector<double> values() const;
};

struct SumRuleResult {
    double residual = 0.0;        // (int p1 e1 rho F(1, j, 0) + p_j e_j) / (p_j e_j)
    double error = 0.0;           // Richardson error estimate of the k -> 0 limit
    bool converged = false;
    bool divergent = false;       // Phi grows like 1/k: nothing screens the source
    std::vector<double> k;
    std::vector<double> induced;  // real part of the induced charge at each k
};

SumRuleResult check_perfect_screening(const std::vector<Region>& regions, const ThermoState& th, const Loop& source,
                                      const KSequence& ks = {}, const GridOptions& grid = {}, double tol = 1e-2);

// Phi^0(0, 0, k -> 0) for the border point charge of a single plate.
num::Extrapolation phi0_border(const Region& plate, const ThermoState& th, double border_x, const KSequence& ks = {},
                               const GridOptions& grid = {});

// (1/d) q / (4 pi sinh q) Phi_A^0(i, 0, 0) Phi_B^0(0, j, 0)
double factorize_phi_AB(double q, double d, double phiA_i0, double phiB_0j);
// Partial sum of the traversing-chain series, n_terms odd-bond orders.
double traversing_series(double q, double d, double phiA_i0, double phiB_0j, int n_terms);

// Phi_AB between border point charges of A (at 0) and B (at d) from one coupled Nystrom solve.
cplx coupled_phi_AB(const DensityProfile& A, const DensityProfile& B, const SlabGeometry& g, const ThermoState& th,
                    double q);

struct BracketResult {
    num::Extrapolation value;     // int p1 e1 rho G^0(1, 0, 0) / e_0, limit -1
    std::vector<double> x;        // grid
    std::vector<double> cloud;    // k -> 0 screening-cloud profile (per node), sums to -value
};

struct UrsellLeading {
    BracketResult A, B;
    // int d1 p1 e1 rho[h^0(1, i) + delta / rho] for a generic loop i: vanishes by perfect screening.
    double w_term_A = 0.0, w_term_A_scale = 0.0;
    double w_term_B = 0.0, w_term_B_scale = 0.0;
    // Under the Debye-Hueckel closure the non-nodal part h^nn vanishes identically.
    double hnn = 0.0;
};

BracketResult border_bracket(const Region& plate, const ThermoState& th, double border_x, const KSequence& ks,
                             const GridOptions& grid);

UrsellLeading leading_ursell(const DensityProfile& A, const DensityProfile& B, const SlabGeometry& g,
                             const ThermoState& th, const Loop& probe_A, const Loop& probe_B,
                             const KSequence& ks = {});

// Single F_AB piece of h_AB between loop 1 in A and 2 in B at q / d.
double h_AB_leading(double q, double d, double beta, double G_A, double G_B, double e_A0, double e_B0);

struct MultipoleReport {
    std::vector<double> R;
    std::vector<double> I;    // plane integral of the shifted-minus-unshifted potential within radius R
    double cauchy = 0.0;      // largest change between consecutive radii
    bool integrable = false;
};

// phi_hat(k) are partial transforms for the shifted (normal offset applied) and unshifted pairs; c_y is the
// in-plane offset length.
MultipoleReport multipole_integrability_check(const std::function<double(double)>& phi_shifted,
                                              const std::function<double(double)>& phi_base, double c_y,
                                              const std::vector<double>& radii, double tol = 1e-3);

// Tabulates Phi_class(x1, x2, k) of a single plate with point loops and returns a spline in k >= 0.
std::function<double(double)> slab_phi_class(const DensityProfile& profile, double a, const ThermoState& th,
                                             double x1, double x2, const GridOptions& grid = {});

}  // namespace casimir
