#include "chfront/equilibria.hpp"
#include "chfront/core.hpp"
#include "chfront/error.hpp"
#include "chfront/spectral.hpp"

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace chfront {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kTol = 1e-12;       // integrator abs/rel tolerance
constexpr double kMaxHalfPeriod = 1e4;
constexpr double kMorseTol = 1e-6;
// Beyond this level the energy gap to the separatrix (ratio ~ e^-sigma) is
// below what the integrator resolves; branches end there.
constexpr double kSigmaMax = 20.0;

// (u, v, I, u_mu, v_mu, I_mu, u_a, v_a, I_a): orbit, running integral of u and
// the variations with respect to mu and the start value a = u0.
using State9 = std::array<double, 9>;

struct OrbitSystem {
    double mu;
    void operator()(const State9& y, State9& dy, double) const {
        const double u = y[0];
        const double lin = -1.0 + 3.0 * u * u;
        dy[0] = y[1];
        dy[1] = mu - u + u * u * u;
        dy[2] = u;
        dy[3] = y[4];
        dy[4] = 1.0 + lin * y[3];
        dy[5] = y[3];
        dy[6] = y[7];
        dy[7] = lin * y[6];
        dy[8] = y[6];
    }
};

using State2 = std::array<double, 2>;

struct PlaneSystem {
    double mu;
    void operator()(const State2& y, State2& dy, double) const {
        dy[0] = y[1];
        dy[1] = mu - y[0] + y[0] * y[0] * y[0];
    }
};

double potential(double u, double mu) { return 0.5 * u * u - 0.25 * u * u * u * u - mu * u; }

// Real roots of u^3 - u + mu = 0 in increasing order.
std::vector<double> equilibria_of(double mu) {
    const double crit = 2.0 / (3.0 * std::sqrt(3.0));
    if (std::abs(mu) >= crit) {
        // One real root (Cardano).
        const double q = mu / 2.0;
        const double disc = std::sqrt(q * q - 1.0 / 27.0);
        return {std::cbrt(-q + disc) + std::cbrt(-q - disc)};
    }
    const double theta = std::acos(-1.5 * std::sqrt(3.0) * mu);
    std::vector<double> r(3);
    for (int k = 0; k < 3; ++k) {
        r[k] = 2.0 / std::sqrt(3.0) * std::cos(theta / 3.0 - 2.0 * std::numbers::pi * k / 3.0);
    }
    std::sort(r.begin(), r.end());
    return r;
}

void check_closed(double mu, double u0) {
    const auto r = equilibria_of(mu);
    if (r.size() != 3) throw Error(ErrorCode::NotClosed, "no center: phase plane has a single saddle");
    const double center = r[1];
    if (std::abs(u0 - center) < 1e-10) throw Error(ErrorCode::Degenerate, "start point is the center");
    if (u0 < center) throw Error(ErrorCode::NotClosed, "start point lies left of the center");
    if (u0 >= r[2]) throw Error(ErrorCode::NotClosed, "start point beyond the right saddle");
    if (potential(u0, mu) >= potential(r[0], mu)) {
        throw Error(ErrorCode::NotClosed, "level set reaches the left saddle");
    }
}

}  // namespace

std::optional<double> phase_center(double mu) {
    const auto r = equilibria_of(mu);
    if (r.size() != 3) return std::nullopt;
    return r[1];
}

Orbit shoot_orbit(double mu, double u0, std::size_t n_samples) {
    check_closed(mu, u0);

    const OrbitSystem sys{mu};
    auto stepper = odeint::make_dense_output(kTol, kTol, odeint::runge_kutta_dopri5<State9>());
    State9 y0{u0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    stepper.initialize(y0, 0.0, 1e-2);

    double T = 0.0;
    State9 yT{};
    bool found = false;
    while (stepper.current_time() < kMaxHalfPeriod) {
        const auto [t0, t1] = stepper.do_step(sys);
        const State9& y1 = stepper.current_state();
        if (!std::isfinite(y1[0])) break;
        if (t0 > 0.0 && y1[1] >= 0.0) {
            // u' crosses zero from below: bisect on the dense-output interpolant.
            double a = t0, b = t1;
            State9 ya{};
            for (int it = 0; it < 80 && b - a > 1e-15 * b; ++it) {
                const double mid = 0.5 * (a + b);
                stepper.calc_state(mid, ya);
                (ya[1] < 0.0 ? a : b) = mid;
            }
            T = 0.5 * (a + b);
            stepper.calc_state(T, yT);
            found = true;
            break;
        }
    }
    if (!found) throw Error(ErrorCode::NotClosed, "no return to u' = 0 within the integration window");

    Orbit o;
    o.mu = mu;
    o.u0 = u0;
    o.u_min = yT[0];
    const double acc = mu - yT[0] + yT[0] * yT[0] * yT[0];
    // Small residual velocity from the bisection is folded into T.
    T -= yT[1] / acc;
    const double dT_dmu = -yT[4] / acc;
    const double dT_da = -yT[7] / acc;
    const double I = yT[2] + yT[0] * (-yT[1] / acc);
    o.period = 2.0 * T;
    o.mass = I / T;
    o.dperiod_dmu = 2.0 * dT_dmu;
    o.dperiod_du0 = 2.0 * dT_da;
    o.dmass_dmu = (yT[5] + yT[0] * dT_dmu) / T - o.mass * dT_dmu / T;
    o.dmass_du0 = (yT[8] + yT[0] * dT_da) / T - o.mass * dT_da / T;

    if (n_samples > 0) {
        const double P = o.period;
        std::vector<double> times;
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double x = P * double(i) / double(n_samples);
            times.push_back(x <= T ? x : P - x);
        }
        std::vector<double> sorted = times;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

        std::vector<State2> values(sorted.size());
        auto plane = odeint::make_dense_output(kTol, kTol, odeint::runge_kutta_dopri5<State2>());
        State2 z{u0, 0.0};
        std::size_t idx = 0;
        odeint::integrate_times(plane, PlaneSystem{mu}, z, sorted.begin(), sorted.end(), 1e-2,
                                [&](const State2& s, double) { values[idx++] = s; });

        o.x.resize(n_samples);
        o.u.resize(n_samples);
        o.du.resize(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double x = P * double(i) / double(n_samples);
            const auto pos = std::lower_bound(sorted.begin(), sorted.end(), times[i]) - sorted.begin();
            o.x[i] = x;
            o.u[i] = values[pos][0];
            o.du[i] = x <= T ? values[pos][1] : -values[pos][1];
        }
    }
    return o;
}

namespace {

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// Closed orbits are labelled by (mu, sigma): sigma is the logit of the
// energy level between the center (sigma -> -inf) and the lower saddle
// (sigma -> +inf). The period grows linearly in sigma near the separatrix,
// where (mu, u0) would be exponentially ill-conditioned.
struct Level {
    double u0;
    double du0_dmu;      // at fixed sigma
    double du0_dsigma;
};

struct Saddles {
    double center, saddle, v_center, v_saddle;
};

std::optional<Saddles> saddles_of(double mu) {
    const auto r = equilibria_of(mu);
    if (r.size() != 3) return std::nullopt;
    const bool left = potential(r[0], mu) < potential(r[2], mu);
    const double rs = left ? r[0] : r[2];
    return Saddles{r[1], rs, potential(r[1], mu), potential(rs, mu)};
}

std::optional<Level> level_to_u0(double mu, double sigma) {
    const auto sd = saddles_of(mu);
    if (!sd) return std::nullopt;
    const double right = equilibria_of(mu)[2];
    const double l = logistic(sigma);
    const double h = sd->v_saddle - (sd->v_saddle - sd->v_center) * logistic(-sigma);
    // V increases on (center, right saddle).
    double a = sd->center, b = right;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        (potential(mid, mu) < h ? a : b) = mid;
    }
    const double u0 = 0.5 * (a + b);
    const double vp = u0 - u0 * u0 * u0 - mu;
    if (!(vp > 0.0)) return std::nullopt;
    const double dh_dsigma = (sd->v_saddle - sd->v_center) * l * (1.0 - l);
    // dV(r(mu); mu)/dmu = -r at an equilibrium r.
    const double dh_dmu = -sd->center * (1.0 - l) - sd->saddle * l;
    return Level{u0, (dh_dmu + u0) / vp, dh_dsigma / vp};
}

double sigma_from_u0(double mu, double u0) {
    const auto sd = saddles_of(mu);
    if (!sd) throw Error(ErrorCode::NotClosed, "no center at this mu");
    const double v = potential(u0, mu);
    return std::log((v - sd->v_center) / (sd->v_saddle - v));
}

struct LevelOrbit {
    Orbit orbit;
    double sigma = 0.0;
    double dP_dmu = 0.0, dP_dsigma = 0.0, dM_dmu = 0.0, dM_dsigma = 0.0;
};

LevelOrbit shoot_level(double mu, double sigma) {
    const auto lv = level_to_u0(mu, sigma);
    if (!lv) throw Error(ErrorCode::NotClosed, "energy level has no closed orbit");
    LevelOrbit lo;
    lo.orbit = shoot_orbit(mu, lv->u0);
    lo.sigma = sigma;
    const Orbit& o = lo.orbit;
    lo.dP_dmu = o.dperiod_dmu + o.dperiod_du0 * lv->du0_dmu;
    lo.dP_dsigma = o.dperiod_du0 * lv->du0_dsigma;
    lo.dM_dmu = o.dmass_dmu + o.dmass_du0 * lv->du0_dmu;
    lo.dM_dsigma = o.dmass_du0 * lv->du0_dsigma;
    return lo;
}

// Mean value m at fixed level sigma: Newton in mu with step halving.
std::optional<LevelOrbit> solve_mass(double sigma, double m, double mu_guess) {
    double mu = mu_guess;
    for (int it = 0; it < 40; ++it) {
        LevelOrbit o;
        try {
            o = shoot_level(mu, sigma);
        } catch (const Error&) {
            return std::nullopt;
        }
        const double F = o.orbit.mass - m;
        if (std::abs(F) < 1e-13) return o;
        double step = -F / o.dM_dmu;
        bool ok = false;
        for (int h = 0; h < 30; ++h) {
            try {
                const LevelOrbit trial = shoot_level(mu + step, sigma);
                if (std::abs(trial.orbit.mass - m) < std::abs(F)) {
                    ok = true;
                    break;
                }
            } catch (const Error&) {
            }
            step *= 0.5;
        }
        if (!ok) {
            // Stalled at the integration noise floor.
            if (std::abs(F) < 1e-11) return o;
            return std::nullopt;
        }
        mu += step;
    }
    return std::nullopt;
}

struct Root {
    double mu, sigma;
};

// Newton on (period/P - 1, mass - m) in (mu, sigma) with deflation of known roots.
std::optional<Root> deflated_newton(Root x, double P, double m, const std::vector<Root>& known) {
    auto residual = [&](const LevelOrbit& o) {
        return Eigen::Vector2d((o.orbit.period - P) / P, o.orbit.mass - m);
    };
    auto deflation = [&](const Root& r, Eigen::Vector2d* grad) {
        double eta = 1.0;
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        for (const Root& k : known) {
            const Eigen::Vector2d d(r.mu - k.mu, r.sigma - k.sigma);
            const double n2 = d.squaredNorm();
            const double f = 1.0 / n2 + 1.0;
            const Eigen::Vector2d gf = -2.0 * d / (n2 * n2);
            g = g * f + eta * gf;
            eta *= f;
        }
        if (grad) *grad = g;
        return eta;
    };

    for (int it = 0; it < 60; ++it) {
        LevelOrbit o;
        try {
            o = shoot_level(x.mu, x.sigma);
        } catch (const Error&) {
            return std::nullopt;
        }
        const Eigen::Vector2d F = residual(o);
        if (F.lpNorm<Eigen::Infinity>() < 1e-11) return x;
        Eigen::Matrix2d J;
        J << o.dP_dmu / P, o.dP_dsigma / P, o.dM_dmu, o.dM_dsigma;
        Eigen::Vector2d step = J.fullPivLu().solve(-F);
        if (!step.allFinite()) return std::nullopt;
        if (!known.empty()) {
            Eigen::Vector2d g;
            const double eta = deflation(x, &g);
            const double denom = 1.0 - g.dot(step) / eta;
            if (std::abs(denom) > 1e-14) step /= denom;
        }
        const double merit = deflation(x, nullptr) * F.norm();
        bool ok = false;
        for (int h = 0; h < 40; ++h) {
            const Root trial{x.mu + step[0], x.sigma + step[1]};
            try {
                const LevelOrbit ot = shoot_level(trial.mu, trial.sigma);
                if (deflation(trial, nullptr) * residual(ot).norm() < merit) {
                    x = trial;
                    ok = true;
                    break;
                }
            } catch (const Error&) {
            }
            step *= 0.5;
        }
        if (!ok) {
            if (F.lpNorm<Eigen::Infinity>() < 1e-10) return x;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

namespace {

// Continued branch with the level coordinate of each point.
struct Trace {
    std::vector<BranchPoint> points;
    std::vector<double> sigma;
    bool reached_separatrix = false;
};

Trace trace_branch(double m, int j, double L_lo, double L_hi, const ContinuationOptions& opt);

PeriodicPattern build_pattern(const Orbit& o, double L, double m, int j, std::size_t per_copy) {
    const Orbit full = shoot_orbit(o.mu, o.u0, per_copy);
    PeriodicPattern p;
    p.L = L;
    p.k_p = 2.0 * std::numbers::pi / L;
    p.m = m;
    p.mu = o.mu;
    p.j = j;
    p.amplitude = 0.5 * (o.u0 - full.u_min);
    const std::size_t n = per_copy * std::size_t(j);
    p.x.resize(n);
    p.u.resize(n);
    p.du.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.x[i] = L * double(i) / double(n);
        p.u[i] = full.u[i % per_copy];
        p.du[i] = full.du[i % per_copy];
    }
    return p;
}

}  // namespace

std::vector<PeriodicPattern> find_equilibria(double L, double m, int j, const EquilibriumOptions& opt) {
    if (!(L > 0.0) || j < 1 || !std::isfinite(m)) throw std::invalid_argument("find_equilibria: need L > 0, j >= 1");
    const double P = L / double(j);
    const Parameters par = params_from_mass(m);
    // Patterns here are reached only through the bifurcation from u = m.
    if (!(par.alpha > 0.0)) return {};

    // Seeds come from the continued j = 1 branch, whose period is monotone in
    // arclength between folds. Periods between L_min and the first branch
    // point are seeded from that first point.
    ContinuationOptions copt;
    copt.with_morse = false;
    const Trace trace = trace_branch(m, 1, 0.2 * par.L_min, P + 0.5 * par.L_min, copt);
    if (trace.points.empty()) return {};
    if (trace.reached_separatrix && trace.points.back().L < P) {
        throw Error(ErrorCode::NonConvergence, "period lies beyond the resolvable range near the separatrix");
    }
    std::vector<Root> path{{trace.points.front().mu, trace.sigma.front()}};
    std::vector<double> periods{par.L_min};
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        path.push_back({trace.points[i].mu, trace.sigma[i]});
        periods.push_back(trace.points[i].L);
    }

    std::vector<Root> roots;
    auto add_root = [&](const Root& r) {
        for (const Root& k : roots) {
            if (std::hypot(k.mu - r.mu, k.sigma - r.sigma) < 1e-7) return;
        }
        roots.push_back(r);
    };
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double f0 = periods[i] - P;
        const double f1 = periods[i + 1] - P;
        if (f0 * f1 > 0.0) continue;
        const double t = f0 == f1 ? 0.5 : f0 / (f0 - f1);
        const Root seed{path[i].mu + t * (path[i + 1].mu - path[i].mu),
                        path[i].sigma + t * (path[i + 1].sigma - path[i].sigma)};
        const auto r = deflated_newton(seed, P, m, roots);
        if (!r) throw Error(ErrorCode::NonConvergence, "Newton failed from a bracketed seed");
        add_root(*r);
    }
    // A second deflated pass from each root catches pairs inside one bracket.
    const std::vector<Root> first = roots;
    for (const Root& r : first) {
        for (double ds : {-0.5, 0.5}) {
            if (const auto extra = deflated_newton({r.mu, r.sigma + ds}, P, m, roots)) add_root(*extra);
        }
    }

    std::vector<PeriodicPattern> out;
    for (const Root& r : roots) {
        const Orbit o = shoot_level(r.mu, r.sigma).orbit;
        PeriodicPattern p = build_pattern(o, L, m, j, opt.samples_per_copy);
        if (opt.with_morse) p.morse = temporal_morse_index(p, default_morse_modes(L));
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(),
              [](const PeriodicPattern& a, const PeriodicPattern& b) { return a.amplitude < b.amplitude; });
    return out;
}

PeriodicPattern find_equilibrium(double L, double m, int j, const EquilibriumOptions& opt) {
    auto all = find_equilibria(L, m, j, opt);
    if (all.empty()) throw Error(ErrorCode::NoSolution, "no nontrivial periodic equilibrium at this period");
    return opt.select == BranchSelect::Upper ? all.back() : all.front();
}

PeriodicPattern trivial_pattern(double L, double m, std::size_t n) {
    PeriodicPattern p;
    p.L = L;
    p.k_p = 2.0 * std::numbers::pi / L;
    p.m = m;
    p.mu = m - m * m * m;
    p.amplitude = 0.0;
    p.x.resize(n);
    p.u.assign(n, m);
    p.du.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) p.x[i] = L * double(i) / double(n);
    return p;
}

double pattern_residual(const PeriodicPattern& p) {
    const auto d2 = spectral::derivative(p.u, p.L, 2);
    double r = 0.0;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double u = p.u[i];
        r = std::max(r, std::abs(d2[i] + u - u * u * u - p.mu));
    }
    return r;
}

int default_morse_modes(double L) { return std::max(16, int(std::ceil(1.6 * L))); }

namespace {

MorseCounts morse_once(const PeriodicPattern& p, int n) {
    std::size_t N = p.u.size();
    std::vector<double> u = p.u;
    const std::size_t need = 4 * std::size_t(n) + 4;
    if (N < need) {
        u = spectral::resample(p.u, need);
        N = need;
    }
    std::vector<double> u2(N);
    for (std::size_t i = 0; i < N; ++i) u2[i] = u[i] * u[i];
    const auto c = spectral::forward(u2);
    auto coeff = [&](int d) { return d >= 0 ? c[std::size_t(d)] : std::conj(c[std::size_t(-d)]); };

    std::vector<int> modes;
    for (int l = -n; l <= n; ++l) {
        if (l != 0) modes.push_back(l);
    }
    const int dim = int(modes.size());
    Eigen::MatrixXcd B(dim, dim);
    std::vector<double> q(dim);
    for (int a = 0; a < dim; ++a) q[a] = p.k_p * modes[a];
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            std::complex<double> s = -3.0 * coeff(modes[a] - modes[b]);
            if (a == b) s += 1.0 - q[a] * q[a];
            B(a, b) = std::abs(q[a]) * s * std::abs(q[b]);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(B, Eigen::EigenvaluesOnly);
    MorseCounts mc;
    for (int a = 0; a < dim; ++a) {
        const double ev = solver.eigenvalues()[a];
        if (ev > kMorseTol) {
            ++mc.n_unstable;
        } else if (std::abs(ev) <= kMorseTol) {
            ++mc.n_zero;
        }
    }
    mc.n_zero_full = mc.n_zero + 1;
    return mc;
}

}  // namespace

MorseCounts temporal_morse_index(const PeriodicPattern& p, int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("temporal_morse_index: n_modes must be >= 1");
    const MorseCounts a = morse_once(p, n_modes);
    const MorseCounts b = morse_once(p, 2 * n_modes);
    if (a.n_unstable != b.n_unstable || a.n_zero != b.n_zero) {
        throw Error(ErrorCode::Unresolved, "Morse counts change when the truncation doubles");
    }
    return a;
}

namespace {

Trace trace_branch(double m, int j, double L_lo, double L_hi, const ContinuationOptions& opt) {
    const Parameters par = params_from_mass(m);
    if (!(par.alpha > 0.0)) throw std::invalid_argument("continue_branch: no bifurcation from u = m when alpha <= 0");
    if (j < 1) throw std::invalid_argument("continue_branch: j must be >= 1");
    const double P0 = par.L_min;

    // Unknowns y = (mu, sigma, P / P0).
    auto jacobian = [&](const LevelOrbit& o) {
        Eigen::Matrix<double, 2, 3> J;
        J << o.dP_dmu / P0, o.dP_dsigma / P0, -1.0, o.dM_dmu, o.dM_dsigma, 0.0;
        return J;
    };
    auto tangent_of = [&](const LevelOrbit& o, const Eigen::Vector3d& prev) {
        const auto J = jacobian(o);
        Eigen::Vector3d t = Eigen::Vector3d(J.row(0).transpose()).cross(Eigen::Vector3d(J.row(1).transpose()));
        t.normalize();
        if (t.dot(prev) < 0.0) t = -t;
        return t;
    };
    auto make_point = [&](const Orbit& o, double L) {
        BranchPoint bp;
        bp.L = L;
        bp.mu = o.mu;
        bp.u0 = o.u0;
        bp.amplitude = 0.5 * (o.u0 - o.u_min);
        if (opt.with_morse) {
            const PeriodicPattern p = build_pattern(o, L, m, j, 256);
            bp.morse = temporal_morse_index(p, default_morse_modes(L));
        }
        return bp;
    };

    const double a0 = opt.initial_amplitude;
    const double mu_guess = m - m * m * m - 1.5 * m * a0 * a0;
    const auto start = solve_mass(sigma_from_u0(mu_guess, m + a0), m, mu_guess);
    if (!start) throw Error(ErrorCode::StepFailure, "could not start the branch near the bifurcation point");

    Eigen::Vector3d y_cur(start->orbit.mu, start->sigma, start->orbit.period / P0);
    Eigen::Vector3d t = tangent_of(*start, Eigen::Vector3d(0.0, 1.0, 0.0));

    Trace trace;
    const double L_start = j * start->orbit.period;
    if (L_start >= L_lo && L_start <= L_hi) {
        trace.points.push_back(make_point(start->orbit, L_start));
        trace.sigma.push_back(start->sigma);
    }

    double ds = opt.step;
    while (int(trace.points.size()) < opt.max_points) {
        const Eigen::Vector3d pred = y_cur + ds * t;
        Eigen::Vector3d y = pred;
        bool ok = false;
        int iters = 0;
        LevelOrbit o;
        try {
            for (iters = 0; iters < 15; ++iters) {
                o = shoot_level(y[0], y[1]);
                const Eigen::Vector3d F(o.orbit.period / P0 - y[2], o.orbit.mass - m, t.dot(y - pred));
                if (F.lpNorm<Eigen::Infinity>() < 1e-10) {
                    ok = true;
                    break;
                }
                Eigen::Matrix3d A;
                A.topRows<2>() = jacobian(o);
                A.row(2) = t.transpose();
                const Eigen::Vector3d dy = A.fullPivLu().solve(-F);
                if (!dy.allFinite()) break;
                // Near the separatrix the residual bottoms out around 1e-9
                // (integration error amplified at the saddle).
                if (F.lpNorm<Eigen::Infinity>() < 1e-8 && dy.norm() < 1e-8) {
                    ok = true;
                    break;
                }
                y += dy;
            }
        } catch (const Error&) {
            ok = false;
        }
        if (!ok) {
            ds *= 0.5;
            if (ds < opt.min_step) throw Error(ErrorCode::StepFailure, "continuation step size collapsed");
            continue;
        }
        if (y[1] > kSigmaMax) {
            trace.reached_separatrix = true;
            break;
        }
        const Eigen::Vector3d t_new = tangent_of(o, t);
        const bool fold = (t_new[2] > 0.0) != (t[2] > 0.0);
        const double L = j * o.orbit.period;
        if (L < L_lo || L > L_hi) break;
        BranchPoint bp = make_point(o.orbit, L);
        bp.fold = fold;
        trace.points.push_back(bp);
        trace.sigma.push_back(y[1]);
        y_cur = y;
        t = t_new;
        if (iters <= 3) ds = std::min(1.5 * ds, opt.max_step);
    }
    return trace;
}

}  // namespace

std::vector<BranchPoint> continue_branch(double m, int j, double L_lo, double L_hi, const ContinuationOptions& opt) {
    return trace_branch(m, j, L_lo, L_hi, opt).points;
}

std::vector<BranchPoint> trivial_branch(double m, double L_lo, double L_hi, int n_points) {
    const double alpha = 1.0 - 3.0 * m * m;
    std::vector<BranchPoint> out;
    for (int i = 0; i < n_points; ++i) {
        const double L = n_points == 1 ? L_lo : L_lo + (L_hi - L_lo) * i / (n_points - 1);
        BranchPoint bp;
        bp.L = L;
        bp.mu = m - m * m * m;
        bp.u0 = m;
        const int n = default_morse_modes(L);
        for (int l = 1; l <= n; ++l) {
            const double q = 2.0 * std::numbers::pi * l / L;
            const double ev = q * q * (alpha - q * q);
            if (ev > kMorseTol) bp.morse.n_unstable += 2;
            else if (std::abs(ev) <= kMorseTol) bp.morse.n_zero += 2;
        }
        bp.morse.n_zero_full = bp.morse.n_zero + 1;
        out.push_back(bp);
    }
    return out;
}

int count_folds(const std::vector<BranchPoint>& branch) {
    return int(std::count_if(branch.begin(), branch.end(), [](const BranchPoint& b) { return b.fold; }));
}

void write_branch_csv(std::ostream& os, const std::vector<BranchPoint>& branch) {
    os << "L,amplitude,mu,n_unstable,n_zero\n";
    os.precision(12);
    for (const auto& b : branch) {
        os << b.L << ',' << b.amplitude << ',' << b.mu << ',' << b.morse.n_unstable << ',' << b.morse.n_zero << '\n';
    }
}

}  // namespace chfront
