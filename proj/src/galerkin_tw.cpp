#include "chfront/galerkin_tw.hpp"

#include "chfront/error.hpp"
#include "chfront/spectral.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace chfront {

namespace odeint = boost::numeric::odeint;
using cplx = std::complex<double>;

namespace {

int offset(int n, int field, int l) {
    const int base = field * (2 * n + 1);
    return l == 0 ? base : base + 2 * l - 1;
}

// Collocation on M = 3 (2n + 1) points: exact for P_n of cubics and for
// means of quartics of fields with |l| <= n.
struct Grid {
    int n = 0, M = 0;
    std::vector<double> c, s;   // cos / sin(l tau_j), row-major [l][j]

    explicit Grid(int n_) : n(n_), M(3 * (2 * n_ + 1)) {
        c.resize(std::size_t((n + 1) * M));
        s.resize(c.size());
        for (int l = 0; l <= n; ++l) {
            for (int j = 0; j < M; ++j) {
                const double t = 2.0 * std::numbers::pi * double(l) * j / M;
                c[std::size_t(l * M + j)] = std::cos(t);
                s[std::size_t(l * M + j)] = std::sin(t);
            }
        }
    }

    std::vector<double> values(const std::vector<double>& y, int field) const {
        std::vector<double> out(std::size_t(M), y[std::size_t(offset(n, field, 0))]);
        for (int l = 1; l <= n; ++l) {
            const double re = y[std::size_t(offset(n, field, l))];
            const double im = y[std::size_t(offset(n, field, l) + 1)];
            for (int j = 0; j < M; ++j) {
                out[std::size_t(j)] += 2.0 * (re * c[std::size_t(l * M + j)] - im * s[std::size_t(l * M + j)]);
            }
        }
        return out;
    }

    cplx project(const std::vector<double>& g, int l) const {
        double re = 0.0, im = 0.0;
        for (int j = 0; j < M; ++j) {
            re += g[std::size_t(j)] * c[std::size_t(l * M + j)];
            im -= g[std::size_t(j)] * s[std::size_t(l * M + j)];
        }
        return cplx(re, im) / double(M);
    }
};

// mean over tau of a b for real fields given by coefficients
double mean_product(const TWState& st, int fa, int fb) {
    double out = st.coef(fa, 0).real() * st.coef(fb, 0).real();
    for (int l = 1; l <= st.n; ++l) out += 2.0 * (st.coef(fa, l) * std::conj(st.coef(fb, l))).real();
    return out;
}

double u_norm(const std::vector<double>& y, int n) {
    double sum = y[std::size_t(offset(n, kU, 0))] * y[std::size_t(offset(n, kU, 0))];
    for (int l = 1; l <= n; ++l) {
        const double re = y[std::size_t(offset(n, kU, l))], im = y[std::size_t(offset(n, kU, l) + 1)];
        sum += 2.0 * (re * re + im * im);
    }
    return std::sqrt(sum);
}

void rhs_into(const Grid& g, double s, double omega, const std::vector<double>& y, std::vector<double>& dy) {
    const int n = g.n;
    auto u = g.values(y, kU);
    for (double& v : u) v = v * v * v;
    auto get = [&](int f, int l) {
        const int o = offset(n, f, l);
        return l == 0 ? cplx(y[std::size_t(o)], 0.0) : cplx(y[std::size_t(o)], y[std::size_t(o + 1)]);
    };
    auto put = [&](int f, int l, cplx v) {
        const int o = offset(n, f, l);
        dy[std::size_t(o)] = v.real();
        if (l > 0) dy[std::size_t(o + 1)] = v.imag();
    };
    for (int l = 0; l <= n; ++l) {
        const cplx ul = get(kU, l), vl = get(kV, l), th = get(kTheta, l), wl = get(kW, l);
        put(kU, l, vl);
        put(kV, l, g.project(u, l) - ul + th);
        put(kTheta, l, wl);
        put(kW, l, s * vl - omega * cplx(0.0, double(l)) * ul);
    }
}

}  // namespace

TWState::TWState(int n_, const Frame& f) : n(n_), frame(f), y(std::size_t(dim(n_)), 0.0) {
    if (n_ < 0) throw std::invalid_argument("TWState: n must be >= 0");
}

cplx TWState::coef(int field, int l) const {
    const int o = offset(n, field, std::abs(l));
    const cplx c = l == 0 ? cplx(y[std::size_t(o)], 0.0) : cplx(y[std::size_t(o)], y[std::size_t(o + 1)]);
    return l < 0 ? std::conj(c) : c;
}

void TWState::set_coef(int field, int l, cplx c) {
    const int o = offset(n, field, l);
    y[std::size_t(o)] = c.real();
    if (l > 0) y[std::size_t(o + 1)] = c.imag();
}

std::vector<double> tw_rhs(const TWState& state) {
    std::vector<double> dy(state.y.size(), 0.0);
    rhs_into(Grid(state.n), state.frame.s(), state.frame.omega(), state.y, dy);
    return dy;
}

Eigen::MatrixXd tw_jacobian(const TWState& state) {
    const Grid g(state.n);
    const int d = TWState::dim(state.n);
    Eigen::MatrixXd J(d, d);
    const double h = 1e-6;
    std::vector<double> yp = state.y, ym = state.y, fp(state.y.size()), fm(state.y.size());
    for (int j = 0; j < d; ++j) {
        yp[std::size_t(j)] += h;
        ym[std::size_t(j)] -= h;
        rhs_into(g, state.frame.s(), state.frame.omega(), yp, fp);
        rhs_into(g, state.frame.s(), state.frame.omega(), ym, fm);
        for (int i = 0; i < d; ++i) J(i, j) = (fp[std::size_t(i)] - fm[std::size_t(i)]) / (2.0 * h);
        yp[std::size_t(j)] = state.y[std::size_t(j)];
        ym[std::size_t(j)] = state.y[std::size_t(j)];
    }
    return J;
}

double energy(const TWState& st) {
    const Grid g(st.n);
    const auto u = g.values(st.y, kU);
    double G = 0.0;
    for (double v : u) G += -0.5 * v * v + 0.25 * v * v * v * v;
    G /= g.M;
    // mean of v u_tau, with (u_tau)_l = i l u_l
    double vut = 0.0;
    for (int l = 1; l <= st.n; ++l) vut += 2.0 * (st.coef(kV, l) * std::conj(cplx(0.0, l) * st.coef(kU, l))).real();
    const double s = st.frame.s();
    return 0.5 * mean_product(st, kV, kV) - G - st.frame.k() * vut - mean_product(st, kTheta, kW) / s;
}

double first_integral(const TWState& st) {
    return st.coef(kW, 0).real() - st.frame.s() * st.coef(kU, 0).real();
}

double dissipation(const TWState& st) {
    return mean_product(st, kW, kW) / st.frame.s();
}

double equilibrium_distance(const TWState& st) {
    double r = mean_product(st, kW, kW);
    const double s = st.frame.s(), omega = st.frame.omega();
    r += std::pow(s * st.coef(kV, 0).real(), 2);
    for (int l = 1; l <= st.n; ++l) r += 2.0 * std::norm(s * st.coef(kV, l) - omega * cplx(0.0, l) * st.coef(kU, l));
    return std::sqrt(r);
}

TWState trivial_tw_state(int n, const Frame& frame, double m) {
    TWState st(n, frame);
    st.set_coef(kU, 0, m);
    st.set_coef(kTheta, 0, m - m * m * m);
    return st;
}

TWState embed_pattern(const PeriodicPattern& p, int n, const Frame& frame) {
    if (p.u.empty()) throw std::invalid_argument("embed_pattern: empty pattern");
    const double k = frame.k();
    if (std::abs(p.k_p - k) > 1e-9 * k) throw std::invalid_argument("embed_pattern: pattern wavenumber differs from omega / s");
    const auto c = spectral::forward(p.u);
    const Grid g(n);
    // The pattern is even about x = 0, so its coefficients are real. Refine
    // them to an exact equilibrium of the truncation: k^2 U'' + U - P_n U^3
    // constant, mean fixed.
    Eigen::VectorXd a(n);
    for (int l = 1; l <= n; ++l) a[l - 1] = l < int(c.size()) ? c[std::size_t(l)].real() : 0.0;
    auto pack = [&](const Eigen::VectorXd& v) {
        TWState st(n, frame);
        st.set_coef(kU, 0, p.m);
        for (int l = 1; l <= n; ++l) st.set_coef(kU, l, v[l - 1]);
        return st;
    };
    auto residual = [&](const Eigen::VectorXd& v) {
        const TWState st = pack(v);
        auto u3 = g.values(st.y, kU);
        for (double& x : u3) x = x * x * x;
        Eigen::VectorXd r(n);
        for (int l = 1; l <= n; ++l) r[l - 1] = (1.0 - k * k * l * l) * v[l - 1] - g.project(u3, l).real();
        return r;
    };
    for (int it = 0; it < 30 && n > 0; ++it) {
        const Eigen::VectorXd r = residual(a);
        if (r.norm() < 1e-14) break;
        Eigen::MatrixXd J(n, n);
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd ap = a, am = a;
            ap[j] += 1e-7;
            am[j] -= 1e-7;
            J.col(j) = (residual(ap) - residual(am)) / 2e-7;
        }
        a -= J.fullPivLu().solve(r);
    }
    TWState st = pack(a);
    auto u3 = g.values(st.y, kU);
    for (double& x : u3) x = x * x * x;
    for (int l = 0; l <= n; ++l) {
        const cplx ul = st.coef(kU, l);
        const cplx il(0.0, l * k);
        const cplx theta = -(l * k) * (l * k) * ul + ul - g.project(u3, l);
        st.set_coef(kV, l, il * ul);
        st.set_coef(kTheta, l, theta);
        st.set_coef(kW, l, l == 0 ? cplx(0.0) : il * theta);
    }
    return st;
}

namespace {

TWSample sample_of(const TWState& st, double xi, double dissipated) {
    return TWSample{xi, energy(st), first_integral(st), dissipation(st), equilibrium_distance(st), dissipated};
}

}  // namespace

TWTrajectory integrate_tw(const TWState& state0, double xi_end, int n_out, const TWOptions& opt) {
    if (n_out < 1 || !(xi_end > 0.0)) throw std::invalid_argument("integrate_tw: need xi_end > 0 and n_out >= 1");
    const int n = state0.n;
    const int d = TWState::dim(n);
    const double s = state0.frame.s(), omega = state0.frame.omega();
    const Grid g(n);
    using State = std::vector<double>;

    auto system = [&](const State& y, State& dy, double) {
        dy.resize(y.size());
        rhs_into(g, s, omega, y, dy);
        double w2 = y[std::size_t(offset(n, kW, 0))] * y[std::size_t(offset(n, kW, 0))];
        for (int l = 1; l <= n; ++l) {
            const double re = y[std::size_t(offset(n, kW, l))], im = y[std::size_t(offset(n, kW, l) + 1)];
            w2 += 2.0 * (re * re + im * im);
        }
        dy[std::size_t(d)] = w2 / s;
    };

    State y = state0.y;
    y.push_back(0.0);
    auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(y, 0.0, 1e-3);

    TWTrajectory traj{{}, std::nullopt, state0};
    TWState cur = state0;
    auto record = [&](const State& z, double xi) {
        cur.y.assign(z.begin(), z.begin() + d);
        traj.samples.push_back(sample_of(cur, xi, z[std::size_t(d)]));
    };
    record(y, 0.0);
    int next = 1;
    State z(y.size());
    while (next <= n_out) {
        const auto [t0, t1] = stepper.do_step(system);
        const State& y1 = stepper.current_state();
        const double norm = u_norm(y1, n);
        if (!std::isfinite(norm) || norm > opt.cap) {
            traj.blowup_xi = t0;
            break;
        }
        while (next <= n_out) {
            const double xi = xi_end * next / n_out;
            if (xi > t1) break;
            stepper.calc_state(xi, z);
            record(z, xi);
            ++next;
        }
    }
    traj.final_state = cur;
    return traj;
}

TWTrajectory integrate_tw_or_throw(const TWState& state0, double xi_end, int n_out, const TWOptions& opt) {
    TWTrajectory t = integrate_tw(state0, xi_end, n_out, opt);
    if (t.blowup_xi) throw Error(ErrorCode::Blowup, "trajectory left the cap after xi = " + std::to_string(*t.blowup_xi));
    return t;
}

EnergyCheck verify_energy_identity(const TWTrajectory& traj) {
    EnergyCheck out;
    const auto& s = traj.samples;
    if (s.empty()) return out;
    double e_scale = 0.0;
    for (const auto& x : s) e_scale = std::max(e_scale, std::abs(x.E));
    if (e_scale == 0.0) e_scale = 1.0;
    const double i_scale = std::max(std::abs(s.front().I), 1.0);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double bal = s[i].E - s[i - 1].E + (s[i].dissipated - s[i - 1].dissipated);
        out.residual = std::max(out.residual, std::abs(bal) / e_scale);
        out.i_drift = std::max(out.i_drift, std::abs(s[i].I - s.front().I) / i_scale);
    }
    out.total_dissipated = s.back().dissipated;
    return out;
}

ExplorationResult explore_from_trivial(int n, const Frame& frame, double m, double xi_end, double amplitude,
                                       std::uint64_t seed) {
    const double alpha = 1.0 - 3.0 * m * m;
    const double s = frame.s(), omega = frame.omega();
    TWState st = trivial_tw_state(n, frame, m);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;

    TWState dir(n, frame);
    for (int l = 0; l <= n; ++l) {
        Eigen::Matrix4cd A = Eigen::Matrix4cd::Zero();
        A(0, 1) = 1.0;
        A(1, 0) = -alpha;
        A(1, 2) = 1.0;
        A(2, 3) = 1.0;
        A(3, 0) = -omega * cplx(0.0, l);
        A(3, 1) = s;
        Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(A);
        for (int e = 0; e < 4; ++e) {
            if (es.eigenvalues()[e].real() <= 1e-9) continue;
            Eigen::Vector4cd vec = es.eigenvectors().col(e);
            const cplx z = l == 0 ? cplx(normal(rng), 0.0) : cplx(normal(rng), normal(rng));
            if (l == 0) vec = vec.real().cast<cplx>();
            for (int f = 0; f < 4; ++f) dir.set_coef(f, l, dir.coef(f, l) + z * vec[f]);
        }
    }
    double norm = 0.0;
    for (double v : dir.y) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (std::size_t i = 0; i < st.y.size(); ++i) st.y[i] += amplitude * dir.y[i] / norm;
    }

    ExplorationResult out;
    out.trajectory = integrate_tw(st, xi_end, 200);
    if (out.trajectory.blowup_xi) {
        out.halt = HaltKind::Blowup;
        return out;
    }
    const TWState& fin = out.trajectory.final_state;
    double dt = std::pow(fin.coef(kU, 0).real() - m, 2);
    for (int l = 1; l <= n; ++l) dt += 2.0 * std::norm(fin.coef(kU, l));
    out.distance_trivial = std::sqrt(dt);
    out.distance_pattern = std::numeric_limits<double>::infinity();
    try {
        const auto p = find_equilibrium(2.0 * std::numbers::pi / frame.k(), m, 1);
        const auto c = spectral::forward(p.u);
        double dp = std::pow(fin.coef(kU, 0).real() - m, 2);
        for (int l = 1; l <= n; ++l) {
            const double ref = l < int(c.size()) ? std::abs(c[std::size_t(l)]) : 0.0;
            dp += 2.0 * std::pow(std::abs(fin.coef(kU, l)) - ref, 2);
        }
        out.distance_pattern = std::sqrt(dp);
    } catch (const Error&) {
    }
    const double best = std::min(out.distance_trivial, out.distance_pattern);
    if (best < 0.1) out.halt = out.distance_trivial <= out.distance_pattern ? HaltKind::NearTrivial : HaltKind::NearPattern;
    return out;
}

void write_tw_csv(std::ostream& os, const TWTrajectory& traj) {
    os << "xi,E,I,dissipation,distance\n";
    os.precision(12);
    for (const auto& s : traj.samples) os << s.xi << ',' << s.E << ',' << s.I << ',' << s.dissipation << ',' << s.distance << '\n';
}

}  // namespace chfront
