#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace casimir {

using Vec3 = std::array<double, 3>;
using CVec3 = std::array<std::complex<double>, 3>;

// Physical constants and temperature. Reduced units use kB = 1.
struct ThermoState {
    double beta = 1.0;
    double hbar = 1.0;
    double c = 1.0;
    double kB = 1.0;

    double lambda_ph() const { return beta * hbar * c; }
    double temperature() const { return 1.0 / (kB * beta); }
    void validate() const;
};

struct SpeciesParams {
    double charge = 1.0;
    double mass = 1.0;
    double spin = 0.5;
    int eta = -1;  // +1 boson, -1 fermion
    double mu = 0.0;
    double lambda = 0.0;  // de Broglie length hbar sqrt(beta / m)

    static SpeciesParams make(const ThermoState& th, double charge, double mass, double spin = 0.5, int eta = -1,
                              double mu = 0.0);
    void validate(const ThermoState& th) const;
};

// Brownian-bridge shape on the grid s_k = k / n_steps, k = 0 .. p * n_steps.
struct Path {
    int p = 1;
    int n_steps = 64;
    std::vector<Vec3> X;

    double ds() const { return 1.0 / n_steps; }
    int segments() const { return p * n_steps; }
    bool closed() const;
};

struct Loop {
    Vec3 r{0.0, 0.0, 0.0};
    SpeciesParams species;
    Path path;

    int p() const { return path.p; }
    double lambda() const { return species.lambda; }
    // r^{[s_k]} = r + lambda X(s_k)
    Vec3 node(int k) const;
};

// Point loop: path identically zero (classical charge).
Path point_path(int p, int n_steps);
Loop point_loop(const Vec3& r, const SpeciesParams& sp, int p = 1, int n_steps = 64);

// Walk with i.i.d. N(0, p/N) increments, then the linear drift (s/p) X_walk(p) removed.
Path sample_bridge(int p, int n_steps, std::uint64_t seed);

class BridgeSampler {
public:
    BridgeSampler(int n_steps, std::uint64_t seed);
    // Independent sample number `index`; sub-seeds are disjoint per index.
    Path sample(int p, std::uint64_t index) const;
    int n_steps() const { return n_steps_; }
    std::uint64_t seed() const { return seed_; }

private:
    int n_steps_;
    std::uint64_t seed_;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Midpoint-rule data for stochastic line integrals: one entry per grid segment.
struct Segments {
    std::vector<double> s;   // midpoint times
    std::vector<Vec3> X;     // midpoint positions (dimensionless shape)
    std::vector<Vec3> dX;    // increments
};
Segments segments(const Path& path);

using LineIntegrand = std::function<Vec3(double s, const Vec3& X)>;
using ComplexLineIntegrand = std::function<CVec3(double s, const Vec3& X)>;

// sum_k f(s_mid, X_mid) . (X_{k+1} - X_k), summed by parts so that an
// s-independent integrand gives exactly zero on a closed path.
double line_integral(const Path& path, const LineIntegrand& f);
std::complex<double> line_integral(const Path& path, const ComplexLineIntegrand& f);

double loop_activity(const Loop& loop, const ThermoState& th, double self_energy);

// L^{[u]}: X(s + u) - X(u), origin moved by lambda X(u). u must be on the grid.
Loop shift_origin(const Loop& loop, double u);

void write_path(std::ostream& os, const Path& path);
Path read_path(std::istream& is);

}  // namespace casimir
