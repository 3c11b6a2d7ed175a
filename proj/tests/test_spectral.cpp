#include "chfront/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace chfront;

TEST_CASE("forward/backward round trip") {
    for (std::size_t n : {15u, 16u, 64u}) {
        std::vector<double> u(n);
        for (std::size_t j = 0; j < n; ++j) u[j] = std::sin(0.3 * j) + std::cos(1.7 * j * j);
        const auto c = spectral::forward(u);
        const auto back = spectral::backward(c, n);
        for (std::size_t j = 0; j < n; ++j) CHECK(back[j] == doctest::Approx(u[j]).epsilon(1e-13));
    }
}

TEST_CASE("derivative and resampling of a trigonometric polynomial") {
    const double L = 7.0;
    const std::size_t n = 32;
    const double k = 2 * M_PI / L;
    std::vector<double> u(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = L * j / n;
        u[j] = 0.3 + std::cos(k * x) + 0.5 * std::sin(3 * k * x);
    }
    const auto d2 = spectral::derivative(u, L, 2);
    const auto fine = spectral::resample(u, 100);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = L * j / n;
        CHECK(d2[j] == doctest::Approx(-k * k * std::cos(k * x) - 4.5 * k * k * std::sin(3 * k * x)).epsilon(1e-12));
    }
    const auto c = spectral::forward(u);
    for (std::size_t j = 0; j < 100; ++j) {
        const double x = L * j / 100;
        const double exact = 0.3 + std::cos(k * x) + 0.5 * std::sin(3 * k * x);
        CHECK(fine[j] == doctest::Approx(exact).epsilon(1e-12));
        CHECK(spectral::interpolate(c, n, L, x) == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("Nyquist mode survives upsampling") {
    std::vector<double> u(8);
    for (std::size_t j = 0; j < 8; ++j) u[j] = (j % 2 == 0) ? 1.0 : -1.0;
    const auto fine = spectral::resample(u, 16);
    for (std::size_t j = 0; j < 8; ++j) CHECK(fine[2 * j] == doctest::Approx(u[j]));
}
