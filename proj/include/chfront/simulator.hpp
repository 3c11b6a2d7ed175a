#pragma once

#include "chfront/diagnostics.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chfront {

/// u = m + A exp(-(x - c)^2 / w^2), with the excess mass removed by a wider
/// Gaussian around the same center.
struct LocalizedBump {
    double amplitude = 0.1;
    double width = 2.0;
    double center = 0.0;
};

/// u = m + A cos(2 pi q x / L)
struct SingleMode {
    int q = 1;
    double amplitude = 1e-6;
};

/// Whitespace-separated samples, resampled to the grid; the mean is shifted to m.
struct CustomIC {
    std::string path;
};

using InitialCondition = std::variant<LocalizedBump, SingleMode, CustomIC>;

/// Keeps the unstable state ahead of both fronts from nucleating: a strip
/// of u = m starting `margin` ahead of the front, then u = -1.
struct WedgeConfig {
    double pre_speed = 0.0;   // expected front speed; 0 -> s_lin(alpha)
    double margin = 0.0;      // 0 -> max(50, 20 / |Re nu_lin|)
    double buffer = 0.0;      // length of the u = m strip; 0 -> 1.5 margin
    double ramp = 10.0;       // width of the smooth blend into the template
    int every = 100;          // steps between applications
};

struct SimConfig {
    double domain_length = 256.0 * 3.141592653589793;
    int n_modes = 8192;
    double dt = 0.1;
    double t_end = 100.0;
    double m = 0.2;
    InitialCondition ic = LocalizedBump{};
    std::optional<WedgeConfig> wedge = WedgeConfig{};
    int snapshot_every = 100;
    double front_threshold = 0.05;
    // Uniform noise of this amplitude added to the initial state (mean kept).
    double noise = 0.0;
    std::uint64_t seed = 1;

    /// Throws Error{ConfigError}.
    void validate() const;
};

/// Semi-implicit first-order solver for u_t = -(u_xx + u - u^3)_xx on a
/// periodic grid of n_modes points. The spectrum uses the normalization
/// u(x_j) = sum_q c_q e^{i k_q x_j}; the Nyquist entry is kept at zero.
class Simulator {
public:
    explicit Simulator(const SimConfig& cfg);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    /// One step of (c - dt k^2 (u^3)_k) / (1 + dt (k^4 - k^2)) with the cubic
    /// dealiased on a 2n grid. Throws Error{NonFinite}.
    void step();

    /// Resets the strips ahead of the right front (measured from x = 0) and
    /// of its mirror image (measured from x = L). Returns the change in
    /// mean. No-op while the fronts are closer than margin to L/2.
    double apply_wedge();

    double t() const { return t_; }
    long steps() const { return steps_; }
    const std::vector<std::complex<double>>& spectrum() const { return c_; }
    std::vector<double> field() const;
    void set_field(const std::vector<double>& u);
    /// Field, clock and forced zone from a stored snapshot. The step count is
    /// t / dt rounded; the spectrum matches the original run to round-off.
    void restore(const Snapshot& snap);
    Snapshot snapshot() const;
    double mean() const { return c_[0].real(); }
    /// Integral of u_x^2 / 2 - u^2 / 2 + u^4 / 4 over the domain.
    double free_energy() const;

    /// Start of the forced zone on the right half, L/2 when inactive.
    double forced_start() const { return forced_start_; }
    double margin() const { return margin_; }
    double buffer() const { return buffer_; }
    const SimConfig& config() const { return cfg_; }

private:
    struct Fft;
    SimConfig cfg_;
    std::unique_ptr<Fft> fft_;
    std::vector<std::complex<double>> c_;
    std::vector<double> k2_, denom_;
    double t_ = 0.0;
    long steps_ = 0;
    double margin_ = 0.0, buffer_ = 0.0, pre_speed_ = 0.0;
    double forced_start_ = 0.0;
};

/// Initial field on n points; exact mean m.
std::vector<double> initial_field(const SimConfig& cfg);

struct MassEvent {
    double t = 0.0;
    double delta = 0.0;
};

struct SimResult {
    std::vector<Snapshot> snapshots;
    FrontTrack track;
    std::vector<MassEvent> mass_log;   // wedge-induced mean changes
    std::vector<double> energy;        // free energy per snapshot
    double margin = 0.0;
};

/// Steps to t_end, storing a snapshot (and the primary front, when one is
/// found) every snapshot_every steps. `on_snapshot` sees each snapshot as
/// it is taken. With `resume`, stepping continues from that snapshot and
/// only later snapshots are produced.
SimResult run(const SimConfig& cfg, const std::function<void(const Snapshot&)>& on_snapshot = {},
              const Snapshot* resume = nullptr);

/// Time at which a front started at x = 0 has covered 0.37 L at s_lin, which
/// keeps it clear of the midpoint. Throws Error{ConfigError} when alpha <= 0.
double default_t_end(double m, double domain_length);

/// snap_NNNNN.bin files (t, n, L as little-endian doubles, then n samples)
/// plus index.json, which also records x_max. The index is rewritten after
/// every file, so an interrupted run leaves a consistent prefix.
class SnapshotWriter {
public:
    /// With `append`, continues an existing index.
    explicit SnapshotWriter(std::filesystem::path dir, bool append = false);
    void add(const Snapshot& snap);
    std::size_t size() const;

private:
    struct Entry {
        std::string file;
        double t, L, x_max;
        std::size_t n;
    };
    std::filesystem::path dir_;
    std::vector<Entry> entries_;
    void write_index() const;
};

void write_snapshots(const std::filesystem::path& dir, const std::vector<Snapshot>& snaps);
Snapshot read_snapshot(const std::filesystem::path& file);
/// All snapshots listed in dir/index.json, with x_max restored.
std::vector<Snapshot> read_snapshots(const std::filesystem::path& dir);

}  // namespace chfront
