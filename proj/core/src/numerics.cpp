#include "casimir/numerics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sum.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace casimir::num {

namespace {

void silence_gsl() {
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

double trampoline(double x, void* p) { return (*static_cast<const RealFn*>(p))(x); }

struct Workspace {
    explicit Workspace(std::size_t n) : w(gsl_integration_workspace_alloc(n)) {}
    ~Workspace() { gsl_integration_workspace_free(w); }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
    gsl_integration_workspace* w;
};

}  // namespace

QuadResult integrate(const RealFn& f, double a, double b, const QuadOptions& opt) {
    silence_gsl();
    Workspace ws(opt.limit);
    gsl_function F{&trampoline, const_cast<RealFn*>(&f)};
    QuadResult r;
    r.status = gsl_integration_qag(&F, a, b, opt.epsabs, opt.epsrel, opt.limit, GSL_INTEG_GAUSS21, ws.w,
                                   &r.value, &r.abserr);
    return r;
}

QuadResult integrate_to_inf(const RealFn& f, double a, const QuadOptions& opt) {
    silence_gsl();
    Workspace ws(opt.limit);
    gsl_function F{&trampoline, const_cast<RealFn*>(&f)};
    QuadResult r;
    r.status = gsl_integration_qagiu(&F, a, opt.epsabs, opt.epsrel, opt.limit, ws.w, &r.value, &r.abserr);
    return r;
}

QuadResult fourier_tail(const RealFn& f, double x, double a, Weight w, const QuadOptions& opt) {
    silence_gsl();
    if (!(x > 0.0)) throw std::invalid_argument("fourier_tail: x must be positive");
    Workspace ws(opt.limit), cyc(opt.limit);
    gsl_integration_qawo_table* tab = gsl_integration_qawo_table_alloc(
        x, 1.0, w == Weight::cos ? GSL_INTEG_COSINE : GSL_INTEG_SINE, 50);
    gsl_function F{&trampoline, const_cast<RealFn*>(&f)};
    QuadResult r;
    r.status = gsl_integration_qawf(&F, a, opt.epsabs, opt.limit, ws.w, cyc.w, tab, &r.value, &r.abserr);
    gsl_integration_qawo_table_free(tab);
    return r;
}

cplx inverse_fourier_1d(const CplxFn& g, double x, const QuadOptions& opt) {
    const RealFn even_re = [&](double k) { return (g(k) + g(-k)).real(); };
    const RealFn even_im = [&](double k) { return (g(k) + g(-k)).imag(); };
    const RealFn odd_re = [&](double k) { return (g(k) - g(-k)).real(); };
    const RealFn odd_im = [&](double k) { return (g(k) - g(-k)).imag(); };
    constexpr double inv2pi = 0.5 / M_PI;

    if (x == 0.0) {
        const double re = integrate_to_inf(even_re, 0.0, opt).value;
        const double im = integrate_to_inf(even_im, 0.0, opt).value;
        return inv2pi * cplx(re, im);
    }
    const double ax = std::abs(x);
    const double sgn = x > 0 ? 1.0 : -1.0;
    const double split = 40.0 / ax;
    auto body = [&](const RealFn& h, bool cosine) {
        const RealFn w = [&](double k) { return h(k) * (cosine ? std::cos(k * ax) : std::sin(k * ax)); };
        return integrate(w, 0.0, split, opt).value +
               fourier_tail(h, ax, split, cosine ? Weight::cos : Weight::sin, opt).value;
    };
    const double c_re = body(even_re, true);
    const double c_im = body(even_im, true);
    const double s_re = sgn * body(odd_re, false);
    const double s_im = sgn * body(odd_im, false);
    // cos part plus i * sin part
    return inv2pi * cplx(c_re - s_im, c_im + s_re);
}

namespace {

// Sum zero-to-zero panels: the first few directly, the alternating rest by Levin u.
QuadResult panel_sum(const RealFn& integrand, const std::function<double(unsigned)>& zero, std::size_t max_cycles,
                     const QuadOptions& opt) {
    std::vector<double> terms;
    terms.reserve(max_cycles);
    double lo = 0.0;
    for (std::size_t s = 1; s <= max_cycles; ++s) {
        const double hi = zero(static_cast<unsigned>(s));
        terms.push_back(integrate(integrand, lo, hi, opt).value);
        lo = hi;
    }
    // The first cycles are not yet in the asymptotic alternating regime.
    const std::size_t head = std::min<std::size_t>(8, terms.size());
    double direct = 0.0;
    for (std::size_t i = 0; i < head; ++i) direct += terms[i];
    QuadResult r;
    const std::size_t n = terms.size() - head;
    if (n < 2) {
        r.value = direct;
        return r;
    }
    gsl_sum_levin_u_workspace* w = gsl_sum_levin_u_alloc(n);
    double acc = 0.0, err = 0.0;
    r.status = gsl_sum_levin_u_accel(terms.data() + head, n, w, &acc, &err);
    gsl_sum_levin_u_free(w);
    r.value = direct + acc;
    r.abserr = err;
    return r;
}

}  // namespace

QuadResult hankel0(const RealFn& f, double k, std::size_t max_cycles, const QuadOptions& opt) {
    silence_gsl();
    if (!(k > 0.0)) throw std::invalid_argument("hankel0: k must be positive");
    const RealFn integrand = [&](double y) { return y * gsl_sf_bessel_J0(k * y) * f(y); };
    return panel_sum(integrand, [k](unsigned s) { return gsl_sf_bessel_zero_J0(s) / k; }, max_cycles, opt);
}

QuadResult bessel_j1_integral(const RealFn& f, double R, std::size_t max_cycles, const QuadOptions& opt) {
    silence_gsl();
    if (!(R > 0.0)) throw std::invalid_argument("bessel_j1_integral: R must be positive");
    const RealFn integrand = [&](double k) { return gsl_sf_bessel_J1(R * k) * f(k); };
    return panel_sum(integrand, [R](unsigned s) { return gsl_sf_bessel_zero_J1(s) / R; }, max_cycles, opt);
}

Extrapolation richardson(std::span<const double> s, double ratio, int order, int step) {
    const std::size_t n = s.size();
    if (n == 0) throw std::invalid_argument("richardson: no samples");
    std::vector<std::vector<double>> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i].resize(i + 1);
        t[i][0] = s[i];
        for (std::size_t j = 1; j <= i; ++j) {
            const double f = std::pow(ratio, order + static_cast<int>(j - 1) * step);
            t[i][j] = t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (f - 1.0);
        }
    }
    Extrapolation e;
    e.value = t[n - 1][n - 1];
    e.error = n > 1 ? std::abs(t[n - 1][n - 1] - t[n - 1][n - 2]) : std::abs(s[0]);
    return e;
}

cplx richardson_complex(std::span<const cplx> s, double ratio, int order, int step) {
    std::vector<double> re(s.size()), im(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        re[i] = s[i].real();
        im[i] = s[i].imag();
    }
    return {richardson(re, ratio, order, step).value, richardson(im, ratio, order, step).value};
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("linear_fit: need matching samples, n >= 2");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            ss += r * r;
        }
        fit.slope_stderr = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) lx[i] = std::log(x[i]);
    for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(std::abs(y[i]));
    return linear_fit(lx, ly);
}

void NeumaierAccumulator::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

double stable_sum(std::span<const double> v) {
    NeumaierAccumulator acc;
    for (double x : v) acc.add(x);
    return acc.value();
}

}  // namespace casimir::num
