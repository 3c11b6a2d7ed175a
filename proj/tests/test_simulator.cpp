#include "chfront/error.hpp"
#include "chfront/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace chfront;

namespace {

SimConfig small_config(double m, double dt) {
    SimConfig c;
    c.domain_length = 32.0 * std::numbers::pi;
    c.n_modes = 256;
    c.dt = dt;
    c.m = m;
    c.wedge.reset();
    return c;
}

// Rate of the single mode q over one step of size dt, measured on the solver.
double measured_rate(double m, int q, double dt) {
    SimConfig c = small_config(m, dt);
    c.ic = SingleMode{q, 1e-8};
    Simulator sim(c);
    const double a0 = std::abs(sim.spectrum()[std::size_t(q)]);
    for (int i = 0; i < 10; ++i) sim.step();
    return std::log(std::abs(sim.spectrum()[std::size_t(q)]) / a0) / (10 * dt);
}

// Largest per-step increase of the free energy over t in [0, 40].
double worst_energy_increase(double dt) {
    SimConfig c = small_config(0.1, dt);
    c.noise = 0.2;
    c.seed = 5;
    c.ic = SingleMode{1, 0.0};
    Simulator sim(c);
    double worst = 0.0, prev = sim.free_energy();
    while (sim.t() < 40.0 - 1e-9) {
        sim.step();
        const double e = sim.free_energy();
        worst = std::max(worst, e - prev);
        prev = e;
    }
    return worst;
}

}  // namespace

TEST_CASE("config validation") {
    SimConfig c;
    c.n_modes = 1000;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SimConfig{};
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SimConfig{};
    c.m = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_NOTHROW(SimConfig{}.validate());
}

TEST_CASE("mass mode is bit-constant without the wedge") {
    SimConfig c = small_config(0.2, 0.1);
    c.noise = 0.1;
    Simulator sim(c);
    const std::complex<double> c0 = sim.spectrum()[0];
    bool same = true;
    for (int i = 0; i < 2000; ++i) {
        sim.step();
        same = same && sim.spectrum()[0] == c0;
    }
    CHECK(same);
    CHECK(sim.mean() == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("free energy: per-step increases vanish as dt shrinks") {
    // The scheme is not unconditionally stable; violations show up only at
    // large steps and are gone well before the desk-scale dt = 0.1.
    std::vector<double> worst;
    for (double dt : {2.0, 1.75, 1.5, 1.25, 1.0, 0.1}) worst.push_back(worst_energy_increase(dt));
    MESSAGE("worst increases " << worst[0] << " " << worst[1] << " " << worst[2] << " " << worst[3]);
    CHECK(worst.front() > 0.0);
    for (std::size_t i = 1; i < worst.size(); ++i) CHECK(worst[i] <= worst[i - 1]);
    CHECK(worst.back() == 0.0);
}

TEST_CASE("single-mode growth converges to q^2 (alpha - q^2) at first order") {
    const double m = 0.2, alpha = 1.0 - 3.0 * m * m;
    for (int q : {8, 11, 20}) {
        const double kq = 2.0 * q / 32.0;
        const double exact = kq * kq * (alpha - kq * kq);
        const double e1 = std::abs(measured_rate(m, q, 0.04) - exact);
        const double e2 = std::abs(measured_rate(m, q, 0.02) - exact);
        const double e3 = std::abs(measured_rate(m, q, 0.01) - exact);
        CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
        CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("u = m is a fixed point and the field stays real") {
    SimConfig c = small_config(0.3, 0.1);
    c.ic = SingleMode{1, 0.0};
    Simulator sim(c);
    for (int i = 0; i < 200; ++i) sim.step();
    for (double u : sim.field()) CHECK(std::abs(u - 0.3) < 1e-14);

    c.noise = 0.05;
    Simulator noisy(c);
    for (int i = 0; i < 50; ++i) noisy.step();
    // Half spectrum of a real field: zero-mode and Nyquist entries stay real.
    const auto& sp = noisy.spectrum();
    CHECK(sp.front().imag() == 0.0);
    CHECK(sp.back() == std::complex<double>(0.0));
}

TEST_CASE("initial bump has exact mean") {
    SimConfig c;
    c.m = 0.25;
    const auto u = initial_field(c);
    double sum = 0.0;
    for (double v : u) sum += v;
    CHECK(sum / double(u.size()) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("wedge is a no-op before the fronts approach the midpoint and idempotent after") {
    SimConfig c;
    c.domain_length = 64.0 * std::numbers::pi;
    c.n_modes = 2048;
    c.m = 0.2;
    Simulator sim(c);
    const auto u0 = sim.field();
    CHECK(sim.apply_wedge() == 0.0);
    const auto u0b = sim.field();
    for (std::size_t i = 0; i < u0.size(); ++i) CHECK(std::abs(u0b[i] - u0[i]) < 1e-14);

    for (int i = 0; i < 300; ++i) sim.step();
    sim.apply_wedge();
    const auto u1 = sim.field();
    const double start = sim.forced_start();
    sim.apply_wedge();
    const auto u2 = sim.field();
    double worst = 0.0;
    for (std::size_t i = 0; i < u1.size(); ++i) worst = std::max(worst, std::abs(u1[i] - u2[i]));
    CHECK(worst < 1e-12);
    CHECK(sim.forced_start() == start);
}

TEST_CASE("snapshot files round trip") {
    SimConfig c = small_config(0.2, 0.1);
    c.noise = 0.1;
    Simulator sim(c);
    for (int i = 0; i < 5; ++i) sim.step();
    const Snapshot s = sim.snapshot();
    const auto dir = std::filesystem::temp_directory_path() / "chfront_snap_test";
    std::filesystem::remove_all(dir);
    write_snapshots(dir, {s});
    CHECK(std::filesystem::exists(dir / "index.json"));
    const Snapshot r = read_snapshot(dir / "snap_00000.bin");
    CHECK(r.t == s.t);
    CHECK(r.L == s.L);
    CHECK(r.u == s.u);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(read_snapshot(dir / "missing.bin"), Error);
}

TEST_CASE("run records a monotone front track at m = 0.2") {
    SimConfig c;
    c.domain_length = 64.0 * std::numbers::pi;
    c.n_modes = 2048;
    c.m = 0.2;
    c.t_end = 60.0;
    c.snapshot_every = 20;
    const SimResult r = run(c);
    REQUIRE(r.track.times.size() >= 10);
    CHECK(r.track.monotone);
    for (std::size_t i = 1; i < r.energy.size(); ++i) CHECK(std::isfinite(r.energy[i]));
    CHECK(r.track.positions.back() > r.track.positions.front());
}

TEST_CASE("index keeps x_max; resumed run continues the original to round-off") {
    SimConfig c;
    c.domain_length = 64.0 * std::numbers::pi;
    c.n_modes = 2048;
    c.m = 0.2;
    c.t_end = 40.0;
    c.snapshot_every = 50;
    const auto dir = std::filesystem::temp_directory_path() / "chfront_resume_test";
    std::filesystem::remove_all(dir);
    SnapshotWriter w(dir);
    const SimResult full = run(c, [&](const Snapshot& s) { w.add(s); });
    const auto back = read_snapshots(dir);
    REQUIRE(back.size() == full.snapshots.size());
    CHECK(back[3].x_max == full.snapshots[3].x_max);
    CHECK(back[3].u == full.snapshots[3].u);

    const SimResult tail = run(c, {}, &back[4]);
    REQUIRE(tail.snapshots.size() == full.snapshots.size() - 5);
    double worst = 0.0;
    const auto& a = tail.snapshots.back().u;
    const auto& b = full.snapshots.back().u;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    CHECK(worst < 1e-8);

    SnapshotWriter more(dir, true);
    CHECK(more.size() == back.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("default run length keeps the front short of the midpoint") {
    const double L = 256.0 * std::numbers::pi;
    CHECK(default_t_end(0.2, L) * 1.33903 == doctest::Approx(0.37 * L).epsilon(1e-4));
    CHECK_THROWS_AS(default_t_end(0.7, L), Error);
}
