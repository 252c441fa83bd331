#include "casimir/loopspace.hpp"

#include "casimir/errors.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

namespace casimir {

void ThermoState::validate() const {
    if (!(beta > 0.0) || !(hbar > 0.0) || !(c > 0.0) || !(kB > 0.0))
        throw ParameterError("ThermoState: beta, hbar, c and kB must be strictly positive");
}

SpeciesParams SpeciesParams::make(const ThermoState& th, double charge, double mass, double spin, int eta,
                                  double mu) {
    SpeciesParams sp{charge, mass, spin, eta, mu, 0.0};
    if (!(mass > 0.0)) throw ParameterError("SpeciesParams: mass must be positive");
    sp.lambda = th.hbar * std::sqrt(th.beta / mass);
    sp.validate(th);
    return sp;
}

void SpeciesParams::validate(const ThermoState& th) const {
    if (eta != 1 && eta != -1) throw ParameterError("SpeciesParams: eta must be +1 or -1");
    if (!(mass > 0.0)) throw ParameterError("SpeciesParams: mass must be positive");
    if (spin < 0.0 || std::abs(2.0 * spin - std::round(2.0 * spin)) > 1e-12)
        throw ParameterError("SpeciesParams: spin must be a non-negative half-integer");
    const double expect = th.hbar * std::sqrt(th.beta / mass);
    if (std::abs(lambda - expect) > 4.0 * std::numeric_limits<double>::epsilon() * expect)
        throw ParameterError("SpeciesParams: lambda inconsistent with hbar sqrt(beta/m)");
}

bool Path::closed() const {
    if (X.size() != static_cast<std::size_t>(p * n_steps + 1)) return false;
    const Vec3 zero{0.0, 0.0, 0.0};
    return X.front() == zero && X.back() == zero;
}

Vec3 Loop::node(int k) const {
    const Vec3& x = path.X[static_cast<std::size_t>(k)];
    const double l = species.lambda;
    return {r[0] + l * x[0], r[1] + l * x[1], r[2] + l * x[2]};
}

namespace {

void check_grid(int p, int n_steps) {
    if (p < 1) throw ParameterError("charge number p must be >= 1, got " + std::to_string(p));
    if (n_steps < 2) throw ParameterError("n_steps must be >= 2, got " + std::to_string(n_steps));
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

Path point_path(int p, int n_steps) {
    check_grid(p, n_steps);
    Path path{p, n_steps, {}};
    path.X.assign(static_cast<std::size_t>(p * n_steps + 1), Vec3{0.0, 0.0, 0.0});
    return path;
}

Loop point_loop(const Vec3& r, const SpeciesParams& sp, int p, int n_steps) {
    return Loop{r, sp, point_path(p, n_steps)};
}

Path sample_bridge(int p, int n_steps, std::uint64_t seed) {
    check_grid(p, n_steps);
    const int N = p * n_steps;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(static_cast<double>(p) / N));
    Path path{p, n_steps, std::vector<Vec3>(static_cast<std::size_t>(N + 1))};
    path.X[0] = {0.0, 0.0, 0.0};
    for (int k = 1; k <= N; ++k)
        for (int m = 0; m < 3; ++m) path.X[k][m] = path.X[k - 1][m] + gauss(rng);
    const Vec3 end = path.X[N];
    for (int k = 1; k < N; ++k) {
        const double t = static_cast<double>(k) / N;
        for (int m = 0; m < 3; ++m) path.X[k][m] -= t * end[m];
    }
    path.X[N] = {0.0, 0.0, 0.0};
    return path;
}

BridgeSampler::BridgeSampler(int n_steps, std::uint64_t seed) : n_steps_(n_steps), seed_(seed) {
    check_grid(1, n_steps);
}

Path BridgeSampler::sample(int p, std::uint64_t index) const {
    return sample_bridge(p, n_steps_, derive_seed(seed_, index));
}

Segments segments(const Path& path) {
    const int N = path.segments();
    Segments seg;
    seg.s.resize(N);
    seg.X.resize(N);
    seg.dX.resize(N);
    for (int k = 0; k < N; ++k) {
        seg.s[k] = (k + 0.5) * path.ds();
        for (int m = 0; m < 3; ++m) {
            seg.X[k][m] = 0.5 * (path.X[k][m] + path.X[k + 1][m]);
            seg.dX[k][m] = path.X[k + 1][m] - path.X[k][m];
        }
    }
    return seg;
}

namespace {

template <class Value, class F>
Value by_parts(const Path& path, const F& f) {
    if (!path.closed()) throw ContractViolation("line_integral: path is not a closed bridge");
    const int N = path.segments();
    std::vector<decltype(f(0.0, Vec3{}))> vals(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        Vec3 mid;
        for (int m = 0; m < 3; ++m) mid[m] = 0.5 * (path.X[k][m] + path.X[k + 1][m]);
        vals[k] = f((k + 0.5) * path.ds(), mid);
    }
    // sum_k f_k . (X_{k+1} - X_k) = sum_{k=1}^{N-1} X_k . (f_{k-1} - f_k) for X_0 = X_N = 0
    Value acc{};
    for (int k = 1; k < N; ++k)
        for (int m = 0; m < 3; ++m) acc += path.X[k][m] * (vals[k - 1][m] - vals[k][m]);
    return acc;
}

}  // namespace

double line_integral(const Path& path, const LineIntegrand& f) { return by_parts<double>(path, f); }

std::complex<double> line_integral(const Path& path, const ComplexLineIntegrand& f) {
    return by_parts<std::complex<double>>(path, f);
}

double loop_activity(const Loop& loop, const ThermoState& th, double self_energy) {
    const int p = loop.p();
    if (p < 1) throw ParameterError("loop_activity: p must be >= 1");
    const SpeciesParams& sp = loop.species;
    const double sign = (p % 2 == 1) ? 1.0 : static_cast<double>(sp.eta);
    const double l2 = sp.lambda * sp.lambda;
    const double norm = std::pow(2.0 * M_PI * p * l2, 1.5);
    return (2.0 * sp.spin + 1.0) * sign * std::exp(th.beta * sp.mu * p) / (p * norm) *
           std::exp(-0.5 * th.beta * sp.charge * sp.charge * self_energy);
}

Loop shift_origin(const Loop& loop, double u) {
    const Path& P = loop.path;
    const int N = P.segments();
    const double pos = u * P.n_steps;
    const long m = std::lround(pos);
    if (std::abs(pos - static_cast<double>(m)) > 1e-9 || m < 0 || m > N)
        throw ParameterError("shift_origin: u is not on the time grid");
    const int mm = static_cast<int>(m % N);
    Loop out = loop;
    const Vec3 Xu = P.X[mm];
    for (int k = 0; k <= N; ++k) {
        const Vec3& src = P.X[(k + mm) % N];
        for (int c = 0; c < 3; ++c) out.path.X[k][c] = src[c] - Xu[c];
    }
    out.path.X[N] = {0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) out.r[c] = loop.r[c] + loop.lambda() * Xu[c];
    return out;
}

void write_path(std::ostream& os, const Path& path) {
    const std::int32_t header[2] = {path.n_steps, path.p};
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    for (const Vec3& v : path.X) os.write(reinterpret_cast<const char*>(v.data()), sizeof(double) * 3);
}

Path read_path(std::istream& is) {
    std::int32_t header[2] = {0, 0};
    is.read(reinterpret_cast<char*>(header), sizeof header);
    if (!is) throw ParameterError("read_path: truncated header");
    check_grid(header[1], header[0]);
    Path path{header[1], header[0], std::vector<Vec3>(static_cast<std::size_t>(header[0] * header[1] + 1))};
    for (Vec3& v : path.X) is.read(reinterpret_cast<char*>(v.data()), sizeof(double) * 3);
    if (!is) throw ParameterError("read_path: truncated body");
    return path;
}

}  // namespace casimir
