#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace casimir::num {

using cplx = std::complex<double>;
using RealFn = std::function<double(double)>;
using CplxFn = std::function<cplx(double)>;

struct QuadResult {
    double value = 0.0;
    double abserr = 0.0;
    int status = 0;  // GSL status code, 0 on success
};

struct QuadOptions {
    double epsabs = 1e-12;
    double epsrel = 1e-10;
    std::size_t limit = 2000;
};

// Adaptive Gauss-Kronrod (21 point) on [a, b].
QuadResult integrate(const RealFn& f, double a, double b, const QuadOptions& opt = {});

// Integral over [a, +inf).
QuadResult integrate_to_inf(const RealFn& f, double a, const QuadOptions& opt = {});

// Integral over [a, +inf) of f(k) cos(k x) or f(k) sin(k x), x > 0.
enum class Weight { cos, sin };
QuadResult fourier_tail(const RealFn& f, double x, double a, Weight w, const QuadOptions& opt = {});

// (1/2pi) * integral over the whole line of exp(i k x) g(k).
// Body on [0, 40/|x|] by adaptive quadrature, tail by the cycle-extrapolated Fourier rule.
cplx inverse_fourier_1d(const CplxFn& g, double x, const QuadOptions& opt = {});

// Hankel transform of order zero: integral_0^inf y J0(k y) f(y) dy, k > 0.
// Integrates between consecutive zeros of J0 and accelerates the alternating
// partial sums with the Levin u-transform.
QuadResult hankel0(const RealFn& f, double k, std::size_t max_cycles = 400, const QuadOptions& opt = {});

// integral_0^inf J1(R k) f(k) dk, R > 0, by the same zero-to-zero scheme.
QuadResult bessel_j1_integral(const RealFn& f, double R, std::size_t max_cycles = 400, const QuadOptions& opt = {});

struct Extrapolation {
    double value = 0.0;
    double error = 0.0;  // difference between the last two diagonal entries
};

// Richardson extrapolation of samples taken at h_n = h_0 / ratio^n with an
// error expansion in integer powers h^order, h^{order+step}, ...
Extrapolation richardson(std::span<const double> samples, double ratio = 2.0, int order = 1, int step = 1);
std::complex<double> richardson_complex(std::span<const cplx> samples, double ratio = 2.0, int order = 1, int step = 1);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);
// Fit of log|y| against log x.
LinearFit loglog_fit(std::span<const double> x, std::span<const double> y);

// Compensated (Neumaier) summation, deterministic in input order.
double stable_sum(std::span<const double> v);

class NeumaierAccumulator {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace casimir::num
