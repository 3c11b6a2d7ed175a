#include "chfront/simulator.hpp"

#include "chfront/core.hpp"
#include "chfront/dispersion.hpp"
#include "chfront/error.hpp"
#include "chfront/spectral.hpp"

#include <fftw3.h>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

namespace chfront {

using cplx = std::complex<double>;

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw Error(ErrorCode::ConfigError, "dt must be positive");
    if (!(domain_length > 0.0)) throw Error(ErrorCode::ConfigError, "domain_length must be positive");
    if (n_modes < 16 || !std::has_single_bit(unsigned(n_modes)))
        throw Error(ErrorCode::ConfigError, "n_modes must be a power of two >= 16");
    if (!(t_end >= 0.0)) throw Error(ErrorCode::ConfigError, "t_end must be non-negative");
    if (snapshot_every < 1) throw Error(ErrorCode::ConfigError, "snapshot_every must be >= 1");
    if (wedge && wedge->every < 1) throw Error(ErrorCode::ConfigError, "wedge.every must be >= 1");
    if (!std::isfinite(m) || std::abs(m) >= 1.0) throw Error(ErrorCode::ConfigError, "m must lie in (-1, 1)");
}

struct Simulator::Fft {
    int n = 0;
    double* u = nullptr;          // n
    fftw_complex* c = nullptr;    // n/2 + 1
    double* up = nullptr;         // 2n
    fftw_complex* cp = nullptr;   // n + 1
    fftw_plan to_phys = nullptr, to_spec = nullptr, pad_to_phys = nullptr, pad_to_spec = nullptr;

    explicit Fft(int n_) : n(n_) {
        u = fftw_alloc_real(std::size_t(n));
        c = fftw_alloc_complex(std::size_t(n / 2 + 1));
        up = fftw_alloc_real(std::size_t(2 * n));
        cp = fftw_alloc_complex(std::size_t(n + 1));
        // ESTIMATE plans do not depend on timings, so reruns are bit-identical.
        std::lock_guard lock(spectral::planner_mutex());
        to_phys = fftw_plan_dft_c2r_1d(n, c, u, FFTW_ESTIMATE);
        to_spec = fftw_plan_dft_r2c_1d(n, u, c, FFTW_ESTIMATE);
        pad_to_phys = fftw_plan_dft_c2r_1d(2 * n, cp, up, FFTW_ESTIMATE);
        pad_to_spec = fftw_plan_dft_r2c_1d(2 * n, up, cp, FFTW_ESTIMATE);
    }
    ~Fft() {
        std::lock_guard lock(spectral::planner_mutex());
        fftw_destroy_plan(to_phys);
        fftw_destroy_plan(to_spec);
        fftw_destroy_plan(pad_to_phys);
        fftw_destroy_plan(pad_to_spec);
        fftw_free(u);
        fftw_free(c);
        fftw_free(up);
        fftw_free(cp);
    }
};

namespace {

double smooth_step(double x, double center, double width) {
    return 0.5 * (1.0 + std::tanh((x - center) / width));
}

}  // namespace

std::vector<double> initial_field(const SimConfig& cfg) {
    const int n = cfg.n_modes;
    const double L = cfg.domain_length;
    const double dx = L / n;
    std::vector<double> u(std::size_t(n), cfg.m);

    if (const auto* b = std::get_if<LocalizedBump>(&cfg.ic)) {
        const double wide = 4.0 * b->width;
        std::vector<double> g(u.size()), h(u.size());
        double sg = 0.0, sh = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = std::remainder(i * dx - b->center, L);
            g[std::size_t(i)] = std::exp(-d * d / (b->width * b->width));
            h[std::size_t(i)] = std::exp(-d * d / (wide * wide));
            sg += g[std::size_t(i)];
            sh += h[std::size_t(i)];
        }
        const double beta = b->amplitude * sg / sh;
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += b->amplitude * g[i] - beta * h[i];
    } else if (const auto* s = std::get_if<SingleMode>(&cfg.ic)) {
        for (int i = 0; i < n; ++i) u[std::size_t(i)] += s->amplitude * std::cos(2.0 * std::numbers::pi * s->q * i / n);
    } else {
        const auto& path = std::get<CustomIC>(cfg.ic).path;
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::ConfigError, "cannot open initial condition " + path);
        std::vector<double> v{std::istream_iterator<double>(in), std::istream_iterator<double>()};
        if (v.size() < 2) throw Error(ErrorCode::ConfigError, "initial condition file has fewer than 2 samples");
        u = v.size() == u.size() ? v : spectral::resample(v, u.size());
    }

    if (cfg.noise > 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> dist(-cfg.noise, cfg.noise);
        for (double& v : u) v += dist(rng);
    }
    double mean = 0.0;
    for (double v : u) mean += v;
    mean /= n;
    for (double& v : u) v += cfg.m - mean;
    return u;
}

Simulator::Simulator(const SimConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int n = cfg_.n_modes;
    fft_ = std::make_unique<Fft>(n);
    c_.assign(std::size_t(n / 2 + 1), 0.0);
    k2_.resize(c_.size());
    denom_.resize(c_.size());
    const double k0 = 2.0 * std::numbers::pi / cfg_.domain_length;
    for (std::size_t q = 0; q < c_.size(); ++q) {
        const double k2 = (k0 * q) * (k0 * q);
        k2_[q] = k2;
        denom_[q] = 1.0 + cfg_.dt * (k2 * k2 - k2);
    }
    forced_start_ = 0.5 * cfg_.domain_length;
    if (cfg_.wedge) {
        const double alpha = params_from_mass(cfg_.m).alpha;
        std::optional<DoubleRoot> lin;
        if (alpha > 0.0) lin = spreading_speed(alpha);
        pre_speed_ = cfg_.wedge->pre_speed > 0.0 ? cfg_.wedge->pre_speed : (lin ? lin->s : 0.0);
        margin_ = cfg_.wedge->margin > 0.0 ? cfg_.wedge->margin
                                            : std::max(50.0, lin ? 20.0 / std::abs(lin->nu.real()) : 50.0);
        // The u = -1 edge launches its own invasion into the strip; its tail
        // has to decay across the strip before the next reset.
        buffer_ = cfg_.wedge->buffer > 0.0 ? cfg_.wedge->buffer : 1.5 * margin_;
    }
    set_field(initial_field(cfg_));
}

Simulator::~Simulator() = default;

void Simulator::set_field(const std::vector<double>& u) {
    const int n = cfg_.n_modes;
    if (int(u.size()) != n) throw Error(ErrorCode::ConfigError, "field size does not match n_modes");
    std::copy(u.begin(), u.end(), fft_->u);
    fftw_execute(fft_->to_spec);
    for (std::size_t q = 0; q < c_.size(); ++q) c_[q] = cplx(fft_->c[q][0], fft_->c[q][1]) / double(n);
    c_.back() = 0.0;
}

std::vector<double> Simulator::field() const {
    for (std::size_t q = 0; q < c_.size(); ++q) {
        fft_->c[q][0] = c_[q].real();
        fft_->c[q][1] = c_[q].imag();
    }
    fftw_execute(fft_->to_phys);
    return std::vector<double>(fft_->u, fft_->u + cfg_.n_modes);
}

void Simulator::step() {
    const int n = cfg_.n_modes;
    const std::size_t half = std::size_t(n / 2);
    for (std::size_t q = 0; q <= std::size_t(n); ++q) {
        const cplx v = q < half ? c_[q] : cplx(0.0);
        fft_->cp[q][0] = v.real();
        fft_->cp[q][1] = v.imag();
    }
    fftw_execute(fft_->pad_to_phys);
    for (int i = 0; i < 2 * n; ++i) {
        const double v = fft_->up[i];
        fft_->up[i] = v * v * v;
    }
    fftw_execute(fft_->pad_to_spec);
    const double norm = 1.0 / (2.0 * n);
    const double dt = cfg_.dt;
    double check = 0.0;
    for (std::size_t q = 1; q < half; ++q) {
        const cplx cube(fft_->cp[q][0] * norm, fft_->cp[q][1] * norm);
        c_[q] = (c_[q] - dt * k2_[q] * cube) / denom_[q];
        check += std::abs(c_[q]);
    }
    if (!std::isfinite(check)) throw Error(ErrorCode::NonFinite, "spectrum is not finite at t = " + std::to_string(t_));
    ++steps_;
    t_ = steps_ * dt;
}

double Simulator::apply_wedge() {
    if (!cfg_.wedge) return 0.0;
    const auto& w = *cfg_.wedge;
    const int n = cfg_.n_modes;
    const double L = cfg_.domain_length;
    const double dx = L / n;
    const double before = mean();
    std::vector<double> u = field();

    // Right half as measured from 0, left half mirrored about 0.
    auto locate = [&](const std::vector<double>& v) -> double {
        Snapshot s{t_, L, v, forced_start_};
        try {
            return front_position(s, cfg_.m, cfg_.front_threshold);
        } catch (const Error&) {
            return 0.0;
        }
    };
    std::vector<double> mirror(u.size());
    for (int i = 0; i < n; ++i) mirror[std::size_t(i)] = u[std::size_t((n - i) % n)];
    const double offset = margin_ + pre_speed_ * w.every * cfg_.dt;
    const double a_right = locate(u) + offset;
    const double a_left = locate(mirror) + offset;
    forced_start_ = std::min(a_right, 0.5 * L);

    bool touched = false;
    for (int i = 0; i < n; ++i) {
        const double x = i * dx;
        const bool right = x < 0.5 * L;
        const double y = right ? x : L - x;
        const double a = right ? a_right : a_left;
        if (y < a - w.ramp) continue;
        const double target = cfg_.m + (-1.0 - cfg_.m) * smooth_step(y, a + buffer_, 2.0);
        const double chi = smooth_step(y, a + 0.5 * w.ramp, 0.125 * w.ramp);
        double& v = u[std::size_t(i)];
        v += chi * (target - v);
        touched = true;
    }
    if (!touched) return 0.0;
    set_field(u);
    return mean() - before;
}

void Simulator::restore(const Snapshot& snap) {
    if (snap.L != cfg_.domain_length) throw Error(ErrorCode::ConfigError, "snapshot domain does not match the config");
    set_field(snap.u);
    steps_ = std::lround(snap.t / cfg_.dt);
    t_ = steps_ * cfg_.dt;
    forced_start_ = std::isfinite(snap.x_max) ? snap.x_max : 0.5 * cfg_.domain_length;
}

Snapshot Simulator::snapshot() const {
    return Snapshot{t_, cfg_.domain_length, field(), forced_start_};
}

double Simulator::free_energy() const {
    const double L = cfg_.domain_length;
    double grad = 0.0;
    for (std::size_t q = 1; q < c_.size(); ++q) grad += k2_[q] * std::norm(c_[q]);
    // Each q > 0 stands for the pair +-q.
    double e = L * grad;
    const auto u = field();
    const double dx = L / cfg_.n_modes;
    for (double v : u) e += dx * (-0.5 * v * v + 0.25 * v * v * v * v);
    return e;
}

SimResult run(const SimConfig& cfg, const std::function<void(const Snapshot&)>& on_snapshot,
              const Snapshot* resume) {
    Simulator sim(cfg);
    SimResult out;
    out.margin = sim.margin();
    const long total = std::lround(cfg.t_end / cfg.dt);
    const int wedge_every = cfg.wedge ? cfg.wedge->every : 0;
    long first = 0;
    if (resume) {
        sim.restore(*resume);
        first = sim.steps();
        if (first > total) throw Error(ErrorCode::ConfigError, "resume snapshot lies beyond t_end");
    }
    for (long i = first;; ++i) {
        if (wedge_every && i % wedge_every == 0) {
            const double dm = sim.apply_wedge();
            if (dm != 0.0) out.mass_log.push_back({sim.t(), dm});
        }
        if ((i % cfg.snapshot_every == 0 || i == total) && !(resume && i == first)) {
            Snapshot s = sim.snapshot();
            try {
                const double x = front_position(s, cfg.m, cfg.front_threshold);
                out.track.times.push_back(s.t);
                out.track.positions.push_back(x);
            } catch (const Error&) {
            }
            out.energy.push_back(sim.free_energy());
            if (on_snapshot) on_snapshot(s);
            out.snapshots.push_back(std::move(s));
        }
        if (i == total) break;
        sim.step();
    }
    auto& tr = out.track;
    if (!tr.times.empty()) {
        const double t_from = tr.times.front() + 0.2 * (tr.times.back() - tr.times.front());
        for (std::size_t i = 1; i < tr.positions.size(); ++i) {
            if (tr.times[i] > t_from && tr.positions[i] < tr.positions[i - 1]) tr.monotone = false;
        }
        try {
            tr.fit = front_speed(tr);
        } catch (const Error&) {
        }
    }
    return out;
}

namespace {

void put_le(std::ostream& os, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((bits >> (8 * i)) & 0xff);
    os.write(b, 8);
}

double get_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw Error(ErrorCode::ConfigError, "truncated snapshot file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

double default_t_end(double m, double domain_length) {
    const double alpha = params_from_mass(m).alpha;
    if (!(alpha > 0.0)) throw Error(ErrorCode::ConfigError, "no spinodal instability at this m");
    return 0.37 * domain_length / spreading_speed(alpha).s;
}

SnapshotWriter::SnapshotWriter(std::filesystem::path dir, bool append) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    if (!append || !std::filesystem::exists(dir_ / "index.json")) return;
    for (const Snapshot& s : read_snapshots(dir_)) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%05zu.bin", entries_.size());
        entries_.push_back({name, s.t, s.L, s.x_max, s.u.size()});
    }
}

std::size_t SnapshotWriter::size() const { return entries_.size(); }

void SnapshotWriter::add(const Snapshot& s) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.bin", entries_.size());
    std::ofstream os(dir_ / name, std::ios::binary);
    put_le(os, s.t);
    put_le(os, double(s.u.size()));
    put_le(os, s.L);
    for (double v : s.u) put_le(os, v);
    if (!os) throw Error(ErrorCode::ConfigError, std::string("cannot write ") + name);
    entries_.push_back({name, s.t, s.L, s.x_max, s.u.size()});
    write_index();
}

void SnapshotWriter::write_index() const {
    nlohmann::json index = nlohmann::json::array();
    for (const auto& e : entries_) {
        nlohmann::json j = {{"file", e.file}, {"t", e.t}, {"n", e.n}, {"L", e.L}};
        j["x_max"] = std::isfinite(e.x_max) ? nlohmann::json(e.x_max) : nlohmann::json(nullptr);
        index.push_back(std::move(j));
    }
    const auto tmp = dir_ / "index.json.tmp";
    {
        std::ofstream os(tmp);
        os << index.dump(2) << '\n';
        if (!os) throw Error(ErrorCode::ConfigError, "cannot write snapshot index");
    }
    std::filesystem::rename(tmp, dir_ / "index.json");
}

void write_snapshots(const std::filesystem::path& dir, const std::vector<Snapshot>& snaps) {
    std::filesystem::remove(dir / "index.json");
    SnapshotWriter w(dir);
    for (const auto& s : snaps) w.add(s);
}

Snapshot read_snapshot(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw Error(ErrorCode::ConfigError, "cannot open " + file.string());
    Snapshot s;
    s.t = get_le(is);
    const auto n = std::size_t(get_le(is));
    s.L = get_le(is);
    s.u.resize(n);
    for (auto& v : s.u) v = get_le(is);
    return s;
}

std::vector<Snapshot> read_snapshots(const std::filesystem::path& dir) {
    std::ifstream is(dir / "index.json");
    if (!is) throw Error(ErrorCode::ConfigError, "cannot open " + (dir / "index.json").string());
    nlohmann::json index;
    try {
        index = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("snapshot index: ") + e.what());
    }
    std::vector<Snapshot> out;
    for (const auto& e : index) {
        Snapshot s = read_snapshot(dir / e.at("file").get<std::string>());
        if (e.contains("x_max") && e["x_max"].is_number()) s.x_max = e["x_max"].get<double>();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace chfront
