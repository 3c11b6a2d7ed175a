#pragma once

#include <complex>
#include <mutex>
#include <span>
#include <vector>

namespace chfront::spectral {

using cplx = std::complex<double>;

/// Held around every FFTW plan creation and destruction in the library.
std::mutex& planner_mutex();

/// Real-to-half-complex transform of n samples, normalized so that
/// u(x_j) = sum_q c_q e^{2 pi i q j / n} (c has n/2 + 1 entries).
std::vector<cplx> forward(std::span<const double> u);

/// Inverse of `forward` for an output grid of n points. Entries of c beyond
/// n/2 are dropped; missing ones are treated as zero.
std::vector<double> backward(std::span<const cplx> c, std::size_t n);

/// Trigonometric resampling of periodic samples onto n_out uniform points.
std::vector<double> resample(std::span<const double> u, std::size_t n_out);

/// p-th derivative of periodic samples over a period of length L.
std::vector<double> derivative(std::span<const double> u, double L, int p);

/// Evaluates the trigonometric interpolant of periodic samples (period L) at x.
double interpolate(std::span<const cplx> half_spectrum, std::size_t n, double L, double x);

}  // namespace chfront::spectral
