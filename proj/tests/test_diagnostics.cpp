#include "chfront/diagnostics.hpp"
#include "chfront/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace chfront;

namespace {

constexpr double kPi = std::numbers::pi;

// Pattern cos(k x) on [0, front), tanh edge into u = m beyond it.
Snapshot wake_snapshot(double L, int n, double m, double k, double front, double shift = 0.0) {
    Snapshot s;
    s.L = L;
    s.u.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        const double x = i * L / n;
        const double env = 0.5 * (1.0 - std::tanh((x - front - shift) / 2.0));
        s.u[std::size_t(i)] = m + 0.8 * env * std::cos(k * (x - shift));
    }
    return s;
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected chfront::Error");
    return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("uniform field has no front") {
    Snapshot s{0.0, 100.0, std::vector<double>(512, 0.2)};
    CHECK(code_of([&] { front_position(s, 0.2); }) == ErrorCode::NoFront);
    s.u[10] = 0.2 + 0.049;
    CHECK(code_of([&] { front_position(s, 0.2); }) == ErrorCode::NoFront);
}

TEST_CASE("step profile: interpolated crossing") {
    const int n = 1000;
    Snapshot s{0.0, 100.0, std::vector<double>(n, 0.0)};
    // Linear ramp |u - m| = 1 - (x - 40) / 10 on [40, 50].
    for (int i = 0; i < n; ++i) {
        const double x = i * 0.1;
        s.u[std::size_t(i)] = x < 40.0 ? 1.0 : std::max(0.0, 1.0 - (x - 40.0) / 10.0);
    }
    CHECK(front_position(s, 0.0, 0.05) == doctest::Approx(49.5).epsilon(1e-9));
    CHECK(front_position(s, 0.0, 0.5) == doctest::Approx(45.0).epsilon(1e-9));
    s.x_max = 42.0;
    CHECK(front_position(s, 0.0, 0.05) < 42.0);
}

TEST_CASE("translation equivariance of position and wavenumber") {
    const double L = 400.0, k = 0.7, m = 0.1;
    const int n = 8192;
    const Snapshot a = wake_snapshot(L, n, m, k, 200.0);
    const double shift = 25.0 * L / n;
    const Snapshot b = wake_snapshot(L, n, m, k, 200.0, shift);
    CHECK(front_position(b, m) - front_position(a, m) == doctest::Approx(shift).epsilon(1e-6));
    const WakeEstimate wa = wake_wavenumber(a, 40.0, 180.0);
    const WakeEstimate wb = wake_wavenumber(b, 40.0 + shift, 180.0 + shift);
    CHECK(wa.k == doctest::Approx(wb.k).epsilon(1e-9));
    CHECK(wa.k_spectral == doctest::Approx(wb.k_spectral).epsilon(1e-9));
}

TEST_CASE("speed fit is exact on affine data") {
    std::vector<double> t, x;
    for (int i = 0; i < 50; ++i) {
        t.push_back(2.0 * i);
        x.push_back(3.0 + 1.25 * t.back());
    }
    const SpeedFit f = fit_speed(t, x, 20.0);
    CHECK(f.speed == doctest::Approx(1.25).epsilon(1e-13));
    CHECK(f.intercept == doctest::Approx(3.0).epsilon(1e-11));
    CHECK(f.stderr_ < 1e-10);
    CHECK(f.samples == 40);
    CHECK(f.short_span);

    FrontTrack tr;
    tr.times = t;
    tr.positions = x;
    CHECK(front_speed(tr).samples == 40);
}

TEST_CASE("speed fit under i.i.d. noise: unbiased, stderr matches the scatter") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 0.5);
    const int trials = 400;
    double mean_speed = 0.0, mean_err = 0.0, var = 0.0;
    std::vector<double> speeds;
    for (int k = 0; k < trials; ++k) {
        std::vector<double> t, x;
        for (int i = 0; i < 40; ++i) {
            t.push_back(i);
            x.push_back(0.8 * i + noise(rng));
        }
        const SpeedFit f = fit_speed(t, x, 0.0);
        speeds.push_back(f.speed);
        mean_err += f.stderr_ / trials;
    }
    for (double s : speeds) mean_speed += s / trials;
    for (double s : speeds) var += (s - mean_speed) * (s - mean_speed) / (trials - 1);
    // Exact OLS standard error: sigma / sqrt(sum (t - mean t)^2).
    const double expected = 0.5 / std::sqrt(40.0 * (40.0 * 40.0 - 1.0) / 12.0);
    CHECK(std::abs(mean_speed - 0.8) < 4.0 * expected / std::sqrt(double(trials)));
    CHECK(std::sqrt(var) == doctest::Approx(expected).epsilon(0.1));
    CHECK(mean_err == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("too few samples") {
    std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7, 8}, x = t;
    CHECK(code_of([&] { fit_speed(t, x, 0.0); }) == ErrorCode::InsufficientData);
    CHECK(code_of([&] { front_speed(FrontTrack{}); }) == ErrorCode::InsufficientData);
}

TEST_CASE("sine wavenumber: zero crossings and spectral peak agree") {
    for (double k : {0.45, 0.6543, 0.75, 1.1}) {
        const Snapshot s = wake_snapshot(600.0, 16384, 0.2, k, 400.0);
        const WakeEstimate w = wake_wavenumber_behind(s, 400.0);
        CHECK(w.k == doctest::Approx(k).epsilon(2e-3));
        CHECK(w.k_spectral == doctest::Approx(k).epsilon(5e-3));
        CHECK(std::abs(w.k / w.k_spectral - 1.0) < 0.03);
        CHECK(w.x_lo == doctest::Approx(160.0).epsilon(1e-3));
    }
}

TEST_CASE("short window reports too few oscillations") {
    const Snapshot s = wake_snapshot(600.0, 16384, 0.2, 0.5, 400.0);
    CHECK(code_of([&] { wake_wavenumber(s, 100.0, 115.0); }) == ErrorCode::TooFewOscillations);
    CHECK(code_of([&] { wake_wavenumber(s, 100.0, 100.1); }) == ErrorCode::TooFewOscillations);
}

TEST_CASE("secondary position: edge of the doubled region") {
    const double L = 800.0, kp = 0.6, m = 0.45;
    const int n = 16384;
    Snapshot s{0.0, L, std::vector<double>(n, m)};
    // Wavelength doubled on [0, 300), primary wavelength on [300, 600), then u = m.
    const double lp = 2.0 * kPi / kp;
    const double x_switch = std::round(300.0 / (2.0 * lp)) * 2.0 * lp;
    for (int i = 0; i < n; ++i) {
        const double x = i * L / n;
        if (x < x_switch) s.u[std::size_t(i)] = m + 0.8 * std::sin(0.5 * kp * x);
        else if (x < 600.0) s.u[std::size_t(i)] = m + 0.8 * std::sin(kp * x);
    }
    const double pos = secondary_position(s, m, 600.0, kp);
    CHECK(std::abs(pos - x_switch) < lp);

    Snapshot plain = wake_snapshot(L, n, m, kp, 600.0);
    CHECK(code_of([&] { secondary_position(plain, m, 600.0, kp); }) == ErrorCode::NoFront);

    FrontTrack primary;
    primary.times = {0.0};
    primary.positions = {600.0};
    const FrontTrack sec = detect_secondary_front({s}, primary, m, kp);
    REQUIRE(sec.positions.size() == 1);
    CHECK(sec.positions[0] == pos);
    CHECK_FALSE(sec.fit.has_value());

    std::ostringstream os;
    write_track_csv(os, primary, &sec);
    CHECK(os.str().rfind("t,primary_position,secondary_position\n0,600,", 0) == 0);
}
