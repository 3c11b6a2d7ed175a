// chfront: command-line driver for the dispersion, equilibria, Bloch,
// simulation and traveling-wave modules.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 failed check.

#include "run_config.hpp"
#include "svg.hpp"

#include "chfront/bloch.hpp"
#include "chfront/core.hpp"
#include "chfront/diagnostics.hpp"
#include "chfront/dispersion.hpp"
#include "chfront/equilibria.hpp"
#include "chfront/error.hpp"
#include "chfront/galerkin_tw.hpp"
#include "chfront/simulator.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace chfront;
using namespace chfront::cli;

namespace {

constexpr int kOk = 0, kConfig = 2, kNumerical = 3, kCheckFailed = 4;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double alpha_of(std::optional<double> m, std::optional<double> alpha) {
    if (m && alpha) throw Error(ErrorCode::ConfigError, "give either --m or --alpha, not both");
    const double a = alpha ? *alpha : params_from_mass(m.value_or(0.0)).alpha;
    if (!(a > 0.0)) {
        std::ostringstream os;
        os << "no spinodal instability (alpha = " << a << ")";
        throw Error(ErrorCode::ConfigError, os.str());
    }
    return a;
}

json double_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

void write_file(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    write_text_atomic(file, text);
}

// ---------------------------------------------------------------- disperse

struct DisperseArgs {
    std::optional<double> m, alpha;
    bool check_decay = false;
    int lmax = 32;
    std::string out;
};

int cmd_disperse(const DisperseArgs& a) {
    const double alpha = alpha_of(a.m, a.alpha);
    json cfg = {{"alpha", alpha}, {"check_decay", a.check_decay}, {"lmax", a.lmax}};
    if (a.m) cfg["m"] = *a.m;
    if (!a.out.empty()) write_manifest(a.out, "disperse", cfg, 0);

    const WavenumberTable t = wavenumber_table(alpha);
    const ClosedForms cf = closed_forms(alpha);
    const DoubleRoot r = spreading_speed(alpha);

    std::printf("alpha = %.6g\n", alpha);
    std::printf("%-10s %-10s %-10s %-10s\n", "k_temp", "k_max", "k_lin", "Im nu_lin");
    std::printf("%-10.4f %-10.4f %-10.4f %-10.4f\n\n", t.k_temp, t.k_max, t.k_lin, t.im_nu_lin);
    std::printf("%-10s %-20s %-20s %s\n", "", "closed form", "newton", "|diff|");
    auto row = [](const char* name, double c, double n) {
        std::printf("%-10s %-20.14f %-20.14f %.2e\n", name, c, n, std::abs(c - n));
    };
    row("s_lin", cf.s, r.s);
    row("omega_lin", cf.omega, r.omega);
    row("Re nu_lin", cf.nu.real(), r.nu.real());
    row("Im nu_lin", cf.nu.imag(), r.nu.imag());
    row("k_lin", cf.k_lin, r.k_lin);
    std::printf("residual %.2e, pinched: %s\n", r.residual, r.pinched ? "yes" : "no");

    json result = {{"alpha", alpha},
                   {"k_temp", t.k_temp},
                   {"k_max", t.k_max},
                   {"k_lin", t.k_lin},
                   {"im_nu_lin", t.im_nu_lin},
                   {"s_lin", r.s},
                   {"omega_lin", r.omega},
                   {"nu_lin", {r.nu.real(), r.nu.imag()}},
                   {"closed_form", {{"s", cf.s}, {"omega", cf.omega}, {"nu", {cf.nu.real(), cf.nu.imag()}}}},
                   {"pinched", r.pinched}};

    bool failed = false;
    if (a.check_decay) {
        const DecayReport d = critical_decay_check(alpha, r.omega, r.s, a.lmax);
        const DecayReport sub = critical_decay_check(alpha, 0.5 * r.omega, r.s, a.lmax);
        std::printf("critical decay: %s (l_max %d, %zu decaying roots, %zu violations)\n", d.pass ? "PASS" : "FAIL",
                    a.lmax, d.stable_roots.size(), d.violations.size());
        std::printf("subharmonic omega/2: %zu strip violations\n", sub.violations.size());
        result["critical_decay"] = {{"pass", d.pass}, {"violations", d.violations.size()},
                                    {"subharmonic_violations", sub.violations.size()}};
        failed = !d.pass;
    }
    if (!a.out.empty()) write_file(fs::path(a.out) / "disperse.json", result.dump(2) + "\n");
    return failed ? kCheckFailed : kOk;
}

// -------------------------------------------------------------- equilibria

struct EquilibriaArgs {
    double m = 0.2;
    int jmax = 3;
    double l_hi = 0.0;   // 0 -> (jmax + 3) L_min
    std::string out;
};

struct BranchSet {
    std::vector<std::vector<BranchPoint>> branches;   // j = 1..jmax
    std::vector<BranchPoint> trivial;
};

BranchSet compute_branches(double m, int jmax, double l_hi) {
    const Parameters p = params_from_mass(m);
    if (!(p.alpha > 0.0)) throw Error(ErrorCode::ConfigError, "no spinodal instability at this m");
    if (l_hi <= 0.0) l_hi = (jmax + 3) * p.L_min;
    BranchSet out;
    for (int j = 1; j <= jmax; ++j) out.branches.push_back(continue_branch(m, j, 0.3 * p.L_min, l_hi));
    out.trivial = trivial_branch(m, 0.3 * p.L_min, l_hi, 200);
    return out;
}

std::string morse_label(const BranchPoint& b) {
    return std::to_string(b.morse.n_unstable) + " unstable, " + std::to_string(b.morse.n_zero) + " zero";
}

// Point nearest L = 1.5 j L_min. Far out along a branch the pattern is a
// chain of nearly independent interfaces and the interaction eigenvalues
// fall below the zero tolerance.
const BranchPoint& representative(const std::vector<BranchPoint>& br, int j, double L_min) {
    const double target = 1.5 * j * L_min;
    std::size_t best = 0;
    for (std::size_t i = 1; i < br.size(); ++i) {
        if (std::abs(br[i].L - target) < std::abs(br[best].L - target)) best = i;
    }
    return br[best];
}

void emit_branches(const fs::path& dir, double m, const BranchSet& set, const std::string& stem) {
    PlotSpec plot{"periodic equilibria, m = " + std::to_string(m), "L", "amplitude", {}};
    for (std::size_t i = 0; i < set.branches.size(); ++i) {
        std::ostringstream csv;
        write_branch_csv(csv, set.branches[i]);
        write_file(dir / (stem + "_j" + std::to_string(i + 1) + ".csv"), csv.str());
        Series s{"j = " + std::to_string(i + 1), {}, {}, false};
        for (const auto& b : set.branches[i]) {
            s.x.push_back(b.L);
            s.y.push_back(b.amplitude);
        }
        plot.series.push_back(std::move(s));
    }
    std::ostringstream csv;
    write_branch_csv(csv, set.trivial);
    write_file(dir / (stem + "_trivial.csv"), csv.str());
    Series s{"u = m", {}, {}, false};
    for (const auto& b : set.trivial) {
        s.x.push_back(b.L);
        s.y.push_back(0.0);
    }
    plot.series.push_back(std::move(s));
    write_svg(dir / (stem + ".svg"), plot);
}

int cmd_equilibria(const EquilibriaArgs& a) {
    if (a.jmax < 1) throw Error(ErrorCode::ConfigError, "--jmax must be >= 1");
    const json cfg = {{"m", a.m}, {"jmax", a.jmax}, {"L_hi", a.l_hi}};
    if (!a.out.empty()) write_manifest(a.out, "equilibria", cfg, 0);
    const BranchSet set = compute_branches(a.m, a.jmax, a.l_hi);
    const Parameters p = params_from_mass(a.m);
    std::printf("m = %.4g, alpha = %.6g, regime %s, L_min = %.6f\n", a.m, p.alpha,
                std::string(to_string(p.regime)).c_str(), p.L_min);
    for (std::size_t i = 0; i < set.branches.size(); ++i) {
        const auto& br = set.branches[i];
        if (br.empty()) continue;
        const BranchPoint& rep = representative(br, int(i + 1), p.L_min);
        std::printf("j = %zu: %zu points, L in [%.4f, %.4f], %d fold(s); at L = %.4f: %s\n", i + 1, br.size(),
                    br.front().L, br.back().L, count_folds(br), rep.L, morse_label(rep).c_str());
    }
    if (!a.out.empty()) emit_branches(a.out, a.m, set, "branches");
    return kOk;
}

// ------------------------------------------------------------------- bloch

struct BlochArgs {
    std::optional<double> m;
    double m_lo = 0.2, m_hi = 0.52;
    int steps = 32;
    bool no_pinch_check = false;
    std::string out;
};

void emit_curve(const fs::path& dir, const CoarseningCurve& c, const std::string& stem) {
    std::ostringstream csv;
    write_curve_csv(csv, c);
    write_file(dir / (stem + ".csv"), csv.str());
    Series sc{"s_coars", {}, {}, false}, sl{"s_lin", {}, {}, false};
    for (const auto& p : c.points) {
        sc.x.push_back(p.m);
        sc.y.push_back(p.s_coars);
        sl.x.push_back(p.m);
        sl.y.push_back(p.s_lin);
    }
    write_svg(dir / (stem + ".svg"), {"coarsening and linear spreading speeds", "m", "speed", {sc, sl}});
}

void print_prediction(const CoarseningPrediction& p) {
    std::printf("%-7.4f %-12.8f %-12.8f %-12.8f %-9.5f %-10.5f %-10.5f %-7s %s\n", p.m, p.s_coars, p.s_lin,
                p.omega_coars, p.ratio, p.dk1, p.dk2, p.doubled ? "yes" : "no", p.pinched ? "yes" : "no");
}

int cmd_bloch(const BlochArgs& a) {
    CurveOptions opt;
    opt.check_pinching = !a.no_pinch_check;
    json cfg = {{"check_pinching", opt.check_pinching}};
    double lo = a.m_lo, hi = a.m_hi;
    int steps = a.steps;
    if (a.m) {
        cfg["m"] = *a.m;
    } else {
        cfg["m_lo"] = lo;
        cfg["m_hi"] = hi;
        cfg["steps"] = steps;
    }
    if (!a.out.empty()) write_manifest(a.out, "bloch", cfg, 0);

    std::printf("%-7s %-12s %-12s %-12s %-9s %-10s %-10s %-7s %s\n", "m", "s_coars", "s_lin", "omega", "ratio", "dk1",
                "dk2", "doubled", "pinched");
    if (a.m && *a.m <= 0.25) {
        // Close to the homotopy start: no continuation needed.
        const PeriodicPattern p = wake_pattern(*a.m);
        const CoarseningPrediction c =
            coarsening_double_root(p, homotopy_seed(p), RootMode::General, opt.check_pinching);
        print_prediction(c);
        if (!a.out.empty()) emit_curve(a.out, CoarseningCurve{{c}, {}, {}}, "curve");
        return kOk;
    }
    if (a.m) {
        lo = 0.2;
        hi = *a.m;
        steps = std::max(1, int(std::ceil((hi - lo) / 0.01)));
    }
    const CoarseningCurve c = coarsening_curve(lo, hi, steps, opt);
    if (a.m) {
        print_prediction(c.points.back());
    } else {
        for (const auto& p : c.points) print_prediction(p);
        std::printf("doubling transition: %s\n",
                    c.m_doubling ? std::to_string(*c.m_doubling).c_str() : "not in range");
        std::printf("speed crossover: %s\n", c.m_crossover ? std::to_string(*c.m_crossover).c_str() : "not in range");
    }
    if (!a.out.empty()) emit_curve(a.out, c, "curve");
    return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimArgs {
    std::string config;
    std::optional<double> m, domain, dt, tend, noise;
    std::optional<int> modes, snapshot_every;
    std::optional<std::uint64_t> seed;
    bool no_wedge = false;
    bool resume = false;
    std::string out;
};

json summarize(const SimConfig& cfg, const SimResult& r) {
    json s;
    const double alpha = params_from_mass(cfg.m).alpha;
    std::optional<DoubleRoot> lin;
    if (alpha > 0.0) lin = spreading_speed(alpha);
    s["s_lin"] = lin ? json(lin->s) : json(nullptr);
    s["k_lin"] = lin ? json(lin->k_lin) : json(nullptr);
    s["monotone"] = r.track.monotone;
    s["wedge_events"] = r.mass_log.size();
    if (r.track.fit) {
        s["speed"] = r.track.fit->speed;
        s["speed_stderr"] = r.track.fit->stderr_;
        s["span"] = r.track.fit->span;
        s["short_span"] = r.track.fit->short_span;
    }
    if (!r.track.positions.empty() && !r.snapshots.empty() && r.snapshots.back().t == r.track.times.back()) {
        try {
            const WakeEstimate w = wake_wavenumber_behind(r.snapshots.back(), r.track.positions.back());
            s["wake_k"] = w.k;
            s["wake_k_spectral"] = w.k_spectral;
        } catch (const Error&) {
        }
    }
    return s;
}

void write_sim_outputs(const fs::path& dir, const SimConfig& cfg, const SimResult& r) {
    std::ostringstream track;
    write_track_csv(track, r.track, nullptr);
    write_file(dir / "track.csv", track.str());
    std::ostringstream en;
    en.precision(12);
    en << "t,free_energy\n";
    for (std::size_t i = 0; i < r.energy.size() && i < r.snapshots.size(); ++i)
        en << r.snapshots[i].t << ',' << r.energy[i] << '\n';
    write_file(dir / "energy.csv", en.str());
    write_file(dir / "summary.json", summarize(cfg, r).dump(2) + "\n");
    Series s{"front", r.track.times, r.track.positions, false};
    write_svg(dir / "track.svg", {"primary front, m = " + std::to_string(cfg.m), "t", "x", {s}});
}

int cmd_simulate(const SimArgs& a) {
    if (a.out.empty()) throw Error(ErrorCode::ConfigError, "--out is required");
    const fs::path dir = a.out;
    json cj;
    if (a.resume) {
        cj = read_config_file(dir / "manifest.json");
    } else if (!a.config.empty()) {
        cj = read_config_file(a.config);
    } else {
        cj = json::object();
    }
    if (!a.resume) {
        if (a.m) cj["m"] = *a.m;
        if (a.domain) cj["domain_length"] = *a.domain;
        if (a.dt) cj["dt"] = *a.dt;
        if (a.tend) cj["t_end"] = *a.tend;
        if (a.noise) cj["noise"] = *a.noise;
        if (a.modes) cj["n_modes"] = *a.modes;
        if (a.snapshot_every) cj["snapshot_every"] = *a.snapshot_every;
        if (a.seed) cj["seed"] = *a.seed;
        if (a.no_wedge) cj["wedge"] = nullptr;
    }
    const SimConfig cfg = sim_config_from_json(cj);
    const json resolved = to_json(cfg);

    std::vector<Snapshot> previous;
    if (a.resume) {
        previous = read_snapshots(dir / "snapshots");
        if (previous.empty()) throw Error(ErrorCode::ConfigError, "nothing to resume from");
    } else {
        fs::remove_all(dir / "snapshots");
        write_manifest(dir, "simulate", resolved, cfg.seed);
    }

    SnapshotWriter writer(dir / "snapshots", a.resume);
    SimResult r = run(cfg, [&](const Snapshot& s) { writer.add(s); }, a.resume ? &previous.back() : nullptr);

    if (a.resume) {
        // Fronts of the stored prefix, then the resumed tail.
        SimResult merged;
        merged.margin = r.margin;
        merged.mass_log = r.mass_log;
        for (const auto& s : previous) {
            try {
                const double x = front_position(s, cfg.m, cfg.front_threshold);
                merged.track.times.push_back(s.t);
                merged.track.positions.push_back(x);
            } catch (const Error&) {
            }
            merged.energy.push_back(nan());
        }
        merged.snapshots = std::move(previous);
        for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
            merged.snapshots.push_back(std::move(r.snapshots[i]));
            merged.energy.push_back(r.energy[i]);
        }
        for (std::size_t i = 0; i < r.track.times.size(); ++i) {
            merged.track.times.push_back(r.track.times[i]);
            merged.track.positions.push_back(r.track.positions[i]);
        }
        try {
            merged.track.fit = front_speed(merged.track);
        } catch (const Error&) {
        }
        r = std::move(merged);
    }
    write_sim_outputs(dir, cfg, r);
    const json s = summarize(cfg, r);
    std::cout << s.dump(2) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------- tw

struct TwArgs {
    int n = 8;
    double m = 0.2;
    double tend = 40.0;
    std::uint64_t seed = 1;
    bool check_identities = false;
    std::string out;
};

int cmd_tw(const TwArgs& a) {
    if (a.n < 0) throw Error(ErrorCode::ConfigError, "--n must be non-negative");
    const double alpha = alpha_of(a.m, std::nullopt);
    const json cfg = {{"n", a.n}, {"m", a.m}, {"xi_end", a.tend}, {"seed", a.seed},
                      {"check_identities", a.check_identities}};
    if (!a.out.empty()) write_manifest(a.out, "tw", cfg, a.seed);
    const DoubleRoot lin = spreading_speed(alpha);
    const Frame frame(lin.s, lin.omega);

    const ExplorationResult ex = explore_from_trivial(a.n, frame, a.m, a.tend, 1e-4, a.seed);
    static const char* const names[] = {"blowup", "near trivial", "near pattern", "undetermined"};
    std::printf("frame s = %.8f, omega = %.8f, n = %d\n", frame.s(), frame.omega(), a.n);
    std::printf("exploration: %s after %zu samples; distance to u = m %.3e, to the pattern %.3e\n",
                names[int(ex.halt)], ex.trajectory.samples.size(), ex.distance_trivial, ex.distance_pattern);
    if (ex.trajectory.blowup_xi) std::printf("left the cap at xi = %.4f\n", *ex.trajectory.blowup_xi);
    if (!a.out.empty()) {
        std::ostringstream csv;
        write_tw_csv(csv, ex.trajectory);
        write_file(fs::path(a.out) / "tw.csv", csv.str());
        Series e{"E", {}, {}, false};
        for (const auto& s : ex.trajectory.samples) {
            e.x.push_back(s.xi);
            e.y.push_back(s.E);
        }
        write_svg(fs::path(a.out) / "tw_energy.svg", {"energy along the spatial flow", "xi", "E", {e}});
    }

    if (!a.check_identities) return kOk;
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> N;
    double worst_res = 0.0, worst_drift = 0.0;
    int segments = 0;
    for (int draw = 0; draw < 200 && segments < 20; ++draw) {
        TWState st = trivial_tw_state(a.n, frame, a.m);
        for (double& v : st.y) v += 0.02 * N(rng);
        // The bounded part of the trajectory, up to the cap.
        const TWTrajectory t = integrate_tw(st, 3.0, 30);
        if (t.samples.size() < 5) continue;
        const EnergyCheck e = verify_energy_identity(t);
        worst_res = std::max(worst_res, e.residual);
        worst_drift = std::max(worst_drift, e.i_drift);
        ++segments;
    }
    const bool pass = segments == 20 && worst_res < 1e-6 && worst_drift < 1e-10;
    std::printf("energy balance residual %.3e (< 1e-6), I drift %.3e (< 1e-10) over %d segments\n", worst_res,
                worst_drift, segments);
    std::printf("identities: %s\n", pass ? "PASS" : "FAIL");
    return pass ? kOk : kCheckFailed;
}

// ------------------------------------------------------------------ figure

struct FigureArgs {
    std::string name;
    std::string out = "figures";
    double m = 0.2;
    int jobs = 1;
};

struct SweepRow {
    double m = 0.0, speed = nan(), stderr_ = nan(), s_lin = nan(), wake_k = nan(), k_lin = nan();
};

SweepRow sweep_point(double m) {
    SimConfig c;
    c.m = m;
    c.t_end = default_t_end(m, c.domain_length);
    c.snapshot_every = 20;
    const SimResult r = run(c);
    const DoubleRoot lin = spreading_speed(params_from_mass(m).alpha);
    SweepRow row;
    row.m = m;
    row.s_lin = lin.s;
    row.k_lin = lin.k_lin;
    if (r.track.fit) {
        row.speed = r.track.fit->speed;
        row.stderr_ = r.track.fit->stderr_;
    }
    try {
        row.wake_k = wake_wavenumber_behind(r.snapshots.back(), r.track.positions.back()).k;
    } catch (const Error&) {
    }
    return row;
}

int cmd_figure(const FigureArgs& a) {
    const fs::path dir = a.out;
    const json cfg = {{"name", a.name}, {"m", a.m}, {"jobs", a.jobs}};
    if (a.name != "fig1" && a.name != "fig4" && a.name != "fig5" && a.name != "fig6")
        throw Error(ErrorCode::ConfigError, "unknown figure '" + a.name + "' (fig1, fig4, fig5, fig6)");
    write_manifest(dir, "figure", cfg, 0);

    if (a.name == "fig1") {
        const BranchSet set = compute_branches(a.m, 3, 0.0);
        emit_branches(dir, a.m, set, "fig1");
        const double L_min = params_from_mass(a.m).L_min;
        for (std::size_t i = 0; i < set.branches.size(); ++i) {
            if (set.branches[i].empty()) continue;
            const BranchPoint& rep = representative(set.branches[i], int(i + 1), L_min);
            std::printf("j = %zu at L = %.4f: %s\n", i + 1, rep.L, morse_label(rep).c_str());
        }
        return kOk;
    }
    if (a.name == "fig4") {
        const CoarseningCurve c = coarsening_curve(0.2, 0.52, 32);
        emit_curve(dir, c, "fig4");
        std::printf("doubling transition %s, crossover %s\n",
                    c.m_doubling ? std::to_string(*c.m_doubling).c_str() : "none",
                    c.m_crossover ? std::to_string(*c.m_crossover).c_str() : "none");
        return kOk;
    }

    std::vector<double> ms;
    for (int i = 0; i < 8; ++i) ms.push_back(0.1 + 0.05 * i);
    std::vector<SweepRow> rows(ms.size());
    {
        // Independent runs; each writes only its own row.
        std::vector<std::future<void>> pending;
        std::size_t next = 0;
        const std::size_t jobs = std::size_t(std::max(1, a.jobs));
        while (next < ms.size() || !pending.empty()) {
            while (next < ms.size() && pending.size() < jobs) {
                const std::size_t i = next++;
                pending.push_back(std::async(std::launch::async, [&, i] { rows[i] = sweep_point(ms[i]); }));
            }
            pending.front().get();
            pending.erase(pending.begin());
        }
    }
    std::ostringstream csv;
    csv.precision(10);
    csv << "m,speed,speed_stderr,s_lin,wake_k,k_lin\n";
    for (const auto& r : rows)
        csv << r.m << ',' << r.speed << ',' << r.stderr_ << ',' << r.s_lin << ',' << r.wake_k << ',' << r.k_lin << '\n';
    write_file(dir / (a.name + ".csv"), csv.str());

    Series theory{"", {}, {}, false}, measured{"measured", {}, {}, true};
    for (double m = 0.05; m <= 0.5; m += 0.005) {
        const DoubleRoot lin = spreading_speed(params_from_mass(m).alpha);
        theory.x.push_back(m);
        theory.y.push_back(a.name == "fig5" ? lin.s : lin.k_lin);
    }
    for (const auto& r : rows) {
        measured.x.push_back(r.m);
        measured.y.push_back(a.name == "fig5" ? r.speed : r.wake_k);
    }
    theory.name = a.name == "fig5" ? "s_lin" : "k_lin";
    if (a.name == "fig5")
        write_svg(dir / "fig5.svg", {"front speed", "m", "speed", {theory, measured}});
    else
        write_svg(dir / "fig6.svg", {"wake wavenumber", "m", "k", {theory, measured}});
    for (const auto& r : rows)
        std::printf("m %.2f  speed %.5f (s_lin %.5f)  wake k %.5f (k_lin %.5f)\n", r.m, r.speed, r.s_lin, r.wake_k,
                    r.k_lin);
    return kOk;
}

// ------------------------------------------------------------------- track

struct TrackArgs {
    std::string in;
    std::optional<double> m;
    std::string out;
};

int cmd_track(const TrackArgs& a) {
    const fs::path in = a.in;
    std::optional<double> m = a.m;
    double threshold = 0.05;
    if (fs::exists(in / "manifest.json")) {
        const json c = read_config_file(in / "manifest.json");
        if (!m && c.contains("m")) m = c.at("m").get<double>();
        if (c.contains("front_threshold")) threshold = c.at("front_threshold").get<double>();
    }
    if (!m) throw Error(ErrorCode::ConfigError, "field 'm': missing (no manifest and no --m)");
    const fs::path snap_dir = fs::exists(in / "snapshots" / "index.json") ? in / "snapshots" : in;
    const std::vector<Snapshot> snaps = read_snapshots(snap_dir);

    FrontTrack primary;
    for (const auto& s : snaps) {
        try {
            const double x = front_position(s, *m, threshold);
            primary.times.push_back(s.t);
            primary.positions.push_back(x);
        } catch (const Error&) {
        }
    }
    primary.fit = front_speed(primary);
    const double alpha = params_from_mass(*m).alpha;
    if (!(alpha > 0.0)) throw Error(ErrorCode::ConfigError, "no spinodal instability at this m");
    const DoubleRoot lin = spreading_speed(alpha);
    const CoarseningAnalysis an = analyze_coarsening(snaps, primary, *m, lin.k_lin);

    std::printf("primary speed %.5f +- %.2g (s_lin %.5f)\n", an.primary.speed, an.primary.stderr_, lin.s);
    if (an.secondary) {
        std::printf("secondary speed %.5f +- %.2g, %s\n", an.secondary->speed, an.secondary->stderr_,
                    an.locked ? "locked" : "unlocked");
    } else {
        std::printf("no secondary front\n");
    }
    if (an.ratio) std::printf("wake wavenumber ratio %.4f\n", *an.ratio);

    if (!a.out.empty()) {
        FrontTrack secondary;
        const FrontTrack* sec = nullptr;
        try {
            secondary = detect_secondary_front(snaps, primary, *m, lin.k_lin);
            sec = &secondary;
        } catch (const Error&) {
        }
        std::ostringstream csv;
        write_track_csv(csv, primary, sec);
        write_file(fs::path(a.out) / "track.csv", csv.str());
        json j = {{"m", *m},
                  {"primary_speed", an.primary.speed},
                  {"primary_stderr", an.primary.stderr_},
                  {"secondary_speed", an.secondary ? json(an.secondary->speed) : json(nullptr)},
                  {"locked", an.locked},
                  {"k_primary", double_or_null(an.k_primary)},
                  {"k_secondary", double_or_null(an.k_secondary)},
                  {"ratio", double_or_null(an.ratio)},
                  {"s_lin", lin.s},
                  {"k_lin", lin.k_lin}};
        write_file(fs::path(a.out) / "track_summary.json", j.dump(2) + "\n");
        std::vector<Series> series{{"primary", primary.times, primary.positions, false}};
        if (sec) series.push_back({"secondary", sec->times, sec->positions, false});
        write_svg(fs::path(a.out) / "track.svg", {"fronts, m = " + std::to_string(*m), "t", "x", series});
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fronts of spinodal decomposition in the Cahn-Hilliard equation"};
    app.require_subcommand(1);

    DisperseArgs da;
    auto* dis = app.add_subcommand("disperse", "linear spreading speed and wavenumber table of u = m");
    dis->add_option("--m", da.m, "mass");
    dis->add_option("--alpha", da.alpha, "alpha = 1 - 3 m^2");
    dis->add_flag("--check-decay", da.check_decay, "scan the strip for roots decaying slower than Re nu_lin");
    dis->add_option("--lmax", da.lmax, "largest |l| in the decay scan")->capture_default_str();
    dis->add_option("--out", da.out, "output directory");

    EquilibriaArgs ea;
    auto* eq = app.add_subcommand("equilibria", "branches of periodic equilibria with Morse indices");
    eq->add_option("--m", ea.m, "mass")->capture_default_str();
    eq->add_option("--jmax", ea.jmax, "largest number of maxima per period")->capture_default_str();
    eq->add_option("--L-hi", ea.l_hi, "largest period (0: (jmax + 3) L_min)");
    eq->add_option("--out", ea.out, "output directory");

    BlochArgs ba;
    auto* bl = app.add_subcommand("bloch", "coarsening double roots of the wake pattern");
    bl->add_option("--m", ba.m, "single mass");
    bl->add_option("--m-lo", ba.m_lo, "curve start")->capture_default_str();
    bl->add_option("--m-hi", ba.m_hi, "curve end")->capture_default_str();
    bl->add_option("--steps", ba.steps, "curve intervals")->capture_default_str();
    bl->add_flag("--no-pinch-check", ba.no_pinch_check, "skip the pinching verification");
    bl->add_option("--out", ba.out, "output directory");

    SimArgs sa;
    auto* sim = app.add_subcommand("simulate", "direct simulation with front tracking");
    sim->add_option("--config", sa.config, "JSON config (or a manifest from an earlier run)");
    sim->add_option("--m", sa.m, "mass");
    sim->add_option("--domain", sa.domain, "domain length");
    sim->add_option("--modes", sa.modes, "grid points (power of two)");
    sim->add_option("--dt", sa.dt, "time step");
    sim->add_option("--tend", sa.tend, "final time");
    sim->add_option("--noise", sa.noise, "uniform noise amplitude in the initial state");
    sim->add_option("--seed", sa.seed, "noise seed");
    sim->add_option("--snapshot-every", sa.snapshot_every, "steps between snapshots");
    sim->add_flag("--no-wedge", sa.no_wedge, "disable the stabilization ahead of the fronts");
    sim->add_flag("--resume", sa.resume, "continue the run in --out from its last snapshot");
    sim->add_option("--out", sa.out, "output directory")->required();

    TwArgs ta;
    auto* tw = app.add_subcommand("tw", "Galerkin-truncated modulated traveling waves");
    tw->add_option("--n", ta.n, "Fourier truncation |l| <= n")->capture_default_str();
    tw->add_option("--m", ta.m, "mass")->capture_default_str();
    tw->add_option("--tend", ta.tend, "final xi")->capture_default_str();
    tw->add_option("--seed", ta.seed, "seed for the initial perturbation")->capture_default_str();
    tw->add_flag("--check-identities", ta.check_identities, "energy balance and I conservation on 20 segments");
    tw->add_option("--out", ta.out, "output directory");

    FigureArgs fa;
    auto* fig = app.add_subcommand("figure", "data and SVG for fig1, fig4, fig5 or fig6");
    fig->add_option("name", fa.name, "fig1 | fig4 | fig5 | fig6")->required();
    fig->add_option("--out", fa.out, "output directory")->capture_default_str();
    fig->add_option("--m", fa.m, "mass for fig1")->capture_default_str();
    fig->add_option("--jobs", fa.jobs, "parallel simulations for fig5/fig6")->capture_default_str();

    TrackArgs tra;
    auto* tr = app.add_subcommand("track", "primary and secondary fronts from stored snapshots");
    tr->add_option("--in", tra.in, "run directory or snapshot directory")->required();
    tr->add_option("--m", tra.m, "mass (default: from the manifest)");
    tr->add_option("--out", tra.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*dis) return cmd_disperse(da);
        if (*eq) return cmd_equilibria(ea);
        if (*bl) return cmd_bloch(ba);
        if (*sim) return cmd_simulate(sa);
        if (*tw) return cmd_tw(ta);
        if (*fig) return cmd_figure(fa);
        if (*tr) return cmd_track(tra);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::ConfigError ? kConfig : kNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
