#include "chfront/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace chfront::spectral {

namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

Plan make_r2c(std::size_t n, double* in, fftw_complex* out) {
    std::lock_guard lock(planner_mutex());
    return Plan(fftw_plan_dft_r2c_1d(int(n), in, out, FFTW_ESTIMATE));
}

Plan make_c2r(std::size_t n, fftw_complex* in, double* out) {
    std::lock_guard lock(planner_mutex());
    return Plan(fftw_plan_dft_c2r_1d(int(n), in, out, FFTW_ESTIMATE));
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<cplx> forward(std::span<const double> u) {
    const std::size_t n = u.size();
    if (n == 0) throw std::invalid_argument("spectral::forward: empty input");
    std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
    std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
    Plan plan = make_r2c(n, in.get(), out.get());
    std::copy(u.begin(), u.end(), in.get());
    fftw_execute(plan.get());
    std::vector<cplx> c(n / 2 + 1);
    for (std::size_t q = 0; q <= n / 2; ++q) {
        c[q] = cplx(out.get()[q][0], out.get()[q][1]) / double(n);
    }
    return c;
}

std::vector<double> backward(std::span<const cplx> c, std::size_t n) {
    std::unique_ptr<fftw_complex, FftwFree> in(fftw_alloc_complex(n / 2 + 1));
    std::unique_ptr<double, FftwFree> out(fftw_alloc_real(n));
    Plan plan = make_c2r(n, in.get(), out.get());
    for (std::size_t q = 0; q <= n / 2; ++q) {
        const cplx v = q < c.size() ? c[q] : cplx(0.0);
        in.get()[q][0] = v.real();
        in.get()[q][1] = v.imag();
    }
    if (n % 2 == 0) in.get()[n / 2][1] = 0.0;
    fftw_execute(plan.get());
    return std::vector<double>(out.get(), out.get() + n);
}

std::vector<double> resample(std::span<const double> u, std::size_t n_out) {
    const std::size_t n_in = u.size();
    auto c = forward(u);
    // The input Nyquist mode is counted once by forward(); on a finer grid it
    // becomes an ordinary +-q pair, so split it.
    if (n_in % 2 == 0 && n_out > n_in) c[n_in / 2] *= 0.5;
    if (n_out / 2 + 1 < c.size()) c.resize(n_out / 2 + 1);
    return backward(c, n_out);
}

std::vector<double> derivative(std::span<const double> u, double L, int p) {
    const std::size_t n = u.size();
    auto c = forward(u);
    const double k0 = 2.0 * std::numbers::pi / L;
    for (std::size_t q = 0; q < c.size(); ++q) {
        // The Nyquist mode of an even grid has no well-defined odd derivative.
        if (n % 2 == 0 && q == n / 2 && p % 2 == 1) {
            c[q] = 0.0;
            continue;
        }
        c[q] *= std::pow(cplx(0.0, k0 * double(q)), p);
    }
    return backward(c, n);
}

double interpolate(std::span<const cplx> half_spectrum, std::size_t n, double L, double x) {
    const double k0 = 2.0 * std::numbers::pi / L;
    double acc = half_spectrum[0].real();
    for (std::size_t q = 1; q < half_spectrum.size(); ++q) {
        const double w = (n % 2 == 0 && q == n / 2) ? 1.0 : 2.0;
        acc += w * (half_spectrum[q] * std::exp(cplx(0.0, k0 * double(q) * x))).real();
    }
    return acc;
}

}  // namespace chfront::spectral
