#include "chfront/bloch.hpp"

#include "chfront/error.hpp"
#include "chfront/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace chfront {

namespace {

constexpr double kNuStep = 2e-3;       // stencil half-width in nu
constexpr double kLambdaStep = 1e-3;   // central difference in lambda (Jacobians only)
constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 40;
constexpr double kSegmentLength = 2.0;  // shooting segment for the determinant

const cplx I1(0.0, 1.0);

// Result of one evaluation of the double-root system at (lambda, nu, s).
struct System {
    cplx g1;    // d_s
    cplx g2;    // d/dnu d_s
    cplx g2n;   // d^2/dnu^2 d_s
};

System eval_system(const BlochOperator& op, double s, cplx lambda, cplx nu, bool with_g1 = true) {
    const double h = kNuStep;
    const cplx fp = op.d_comoving(s, lambda, nu + h);
    const cplx fm = op.d_comoving(s, lambda, nu - h);
    const cplx fip = op.d_comoving(s, lambda, nu + I1 * h);
    const cplx fim = op.d_comoving(s, lambda, nu - I1 * h);
    System out;
    out.g1 = with_g1 ? op.d_comoving(s, lambda, nu) : cplx(0.0);
    out.g2 = ((fp - fm) - I1 * (fip - fim)) / (4.0 * h);
    out.g2n = ((fp + fm) - (fip + fim)) / (2.0 * h * h);
    return out;
}

}  // namespace

BlochOperator::BlochOperator(const PeriodicPattern& p, double step)
    : L_(p.L), k_(2.0 * std::numbers::pi / p.L), m_(p.m) {
    if (p.u.empty() || !(p.L > 0.0)) throw std::invalid_argument("BlochOperator: empty pattern");
    if (!(step > 0.0)) throw std::invalid_argument("BlochOperator: step must be positive");
    n_ = std::max(8, int(std::ceil(L_ / step)));
    const std::size_t n4 = std::size_t(4 * n_);
    const auto u = spectral::resample(p.u, n4);
    const auto u1 = spectral::derivative(u, L_, 1);
    const auto u2 = spectral::derivative(u, L_, 2);
    f_.resize(n4);
    fp_.resize(n4);
    fpp_.resize(n4);
    for (std::size_t i = 0; i < n4; ++i) {
        f_[i] = 1.0 - 3.0 * u[i] * u[i];
        fp_[i] = -6.0 * u[i] * u1[i];
        fpp_[i] = -6.0 * (u1[i] * u1[i] + u[i] * u2[i]);
    }
    const int n_seg = std::max(1, int(std::lround(L_ / kSegmentLength)));
    for (int i = 0; i <= n_seg; ++i) bounds_.push_back(int(std::lround(double(i) * n_ / n_seg)));
}

Eigen::Matrix4cd BlochOperator::integrate(cplx lambda, cplx nu, int t_begin, int t_end, int stride) const {
    // Coarse steps [t_begin, t_end); stride 1 halves the step.
    const int n4 = 4 * n_;
    const int sub = 2 / stride;
    const double h = L_ / double(n_ * sub);
    const cplx nu2 = nu * nu, nu3 = nu2 * nu, nu4 = nu2 * nu2;
    const cplx c3 = -4.0 * nu;

    auto apply = [&](int i, const Eigen::Matrix4cd& M) {
        const int j = i % n4;
        const double f = f_[j], fp = fp_[j], fpp = fpp_[j];
        const cplx c2 = -(6.0 * nu2 + f);
        const cplx c1 = -(2.0 * fp + 4.0 * nu3 + 2.0 * nu * f);
        const cplx c0 = -(fpp + 2.0 * nu * fp + nu4 + nu2 * f + lambda);
        Eigen::Matrix4cd out;
        out.topRows<3>() = M.bottomRows<3>();
        out.row(3) = c0 * M.row(0) + c1 * M.row(1) + c2 * M.row(2) + c3 * M.row(3);
        return out;
    };

    Eigen::Matrix4cd phi = Eigen::Matrix4cd::Identity();
    for (int t = t_begin * sub; t < t_end * sub; ++t) {
        const int i0 = 2 * stride * t;
        const Eigen::Matrix4cd k1 = apply(i0, phi);
        const Eigen::Matrix4cd k2 = apply(i0 + stride, phi + 0.5 * h * k1);
        const Eigen::Matrix4cd k3 = apply(i0 + stride, phi + 0.5 * h * k2);
        const Eigen::Matrix4cd k4 = apply(i0 + 2 * stride, phi + h * k3);
        phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!phi.allFinite()) throw Error(ErrorCode::IntegrationFailure, "monodromy overflow");
    return phi;
}

std::vector<Eigen::Matrix4cd> BlochOperator::segments(cplx lambda, cplx nu) const {
    std::vector<Eigen::Matrix4cd> out;
    const int n_seg = int(bounds_.size()) - 1;
    out.reserve(std::size_t(n_seg));
    for (int i = 0; i < n_seg; ++i) {
        const Eigen::Matrix4cd coarse = integrate(lambda, nu, bounds_[i], bounds_[i + 1], 2);
        const Eigen::Matrix4cd fine = integrate(lambda, nu, bounds_[i], bounds_[i + 1], 1);
        out.push_back((16.0 * fine - coarse) / 15.0);
    }
    return out;
}

Monodromy BlochOperator::monodromy(cplx lambda, cplx nu) const {
    Monodromy out;
    out.phi = Eigen::Matrix4cd::Identity();
    for (const auto& seg : segments(lambda, nu)) out.phi = seg * out.phi;
    out.lambda = lambda;
    out.nu = nu;
    out.L = L_;
    return out;
}

cplx BlochOperator::d(cplx lambda, cplx nu) const {
    // det(Phi_S ... Phi_1 - I) equals the determinant of the cyclic block
    // matrix with Phi_i on the diagonal, -I on the superdiagonal and -I in
    // the bottom-left corner, up to the sign (-1)^{4 (S - 1)} = 1. The block
    // form avoids multiplying the segments together.
    const auto seg = segments(lambda, nu);
    const int n_seg = int(seg.size());
    if (n_seg == 1) return (seg[0] - Eigen::Matrix4cd::Identity()).partialPivLu().determinant();
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(4 * n_seg, 4 * n_seg);
    for (int i = 0; i < n_seg; ++i) {
        B.block<4, 4>(4 * i, 4 * i) = seg[std::size_t(i)];
        const int j = (i + 1) % n_seg;
        B.block<4, 4>(4 * i, 4 * j) = -Eigen::Matrix4cd::Identity();
    }
    return B.partialPivLu().determinant();
}

cplx BlochOperator::d_comoving(double s, cplx lambda, cplx nu) const { return d(lambda - s * nu, nu); }

cplx BlochOperator::d_comoving_dnu(double s, cplx lambda, cplx nu) const {
    return eval_system(*this, s, lambda, nu, false).g2;
}

cplx BlochOperator::d_comoving_dnu2(double s, cplx lambda, cplx nu) const {
    return eval_system(*this, s, lambda, nu, false).g2n;
}

cplx BlochOperator::d_comoving_dlambda(double s, cplx lambda, cplx nu) const {
    const double h = kLambdaStep;
    return (d_comoving(s, lambda + h, nu) - d_comoving(s, lambda - h, nu)) / (2.0 * h);
}

Monodromy monodromy(const PeriodicPattern& p, cplx lambda, cplx nu) {
    Monodromy out = BlochOperator(p).monodromy(lambda, nu);
    return out;
}

cplx bloch_d(const PeriodicPattern& p, cplx lambda, cplx nu) { return BlochOperator(p).d(lambda, nu); }

cplx bloch_d_comoving(const PeriodicPattern& p, double s, cplx lambda, cplx nu) {
    return BlochOperator(p).d_comoving(s, lambda, nu);
}

PeriodicPattern blend_with_mean(const PeriodicPattern& p, double tau) {
    PeriodicPattern out = p;
    for (std::size_t i = 0; i < out.u.size(); ++i) {
        out.u[i] = (1.0 - tau) * p.m + tau * p.u[i];
        if (i < out.du.size()) out.du[i] = tau * p.du[i];
    }
    out.amplitude = tau * p.amplitude;
    out.morse.reset();
    return out;
}

BlochRoot solve_bloch_double_root(const BlochOperator& op, BlochRoot seed, RootMode mode) {
    const double k = op.k();
    if (mode == RootMode::Pinned) {
        // Floquet representative with Im nu = k/2, omega = k s / 2.
        seed.nu = cplx(seed.nu.real(), 0.5 * k);
        seed.omega = 0.5 * k * seed.s;
    }
    double step_norm = 0.0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        const cplx nu = seed.nu;
        const double s = seed.s;
        const cplx lambda = I1 * seed.omega;
        const System c = eval_system(op, s, lambda, nu);
        const System lp = eval_system(op, s, lambda + kLambdaStep, nu);
        const System lm = eval_system(op, s, lambda - kLambdaStep, nu);
        const cplx g1l = (lp.g1 - lm.g1) / (2.0 * kLambdaStep);
        const cplx g2l = (lp.g2 - lm.g2) / (2.0 * kLambdaStep);
        // Complex derivative columns of (g1, g2).
        const cplx dnu1 = c.g2, dnu2 = c.g2n;
        const cplx ds1 = -nu * g1l, ds2 = -g1l - nu * g2l;

        Eigen::VectorXd dx;
        if (mode == RootMode::General) {
            Eigen::Matrix4d J;
            Eigen::Vector4d F(c.g1.real(), c.g1.imag(), c.g2.real(), c.g2.imag());
            const cplx cols1[4] = {dnu1, I1 * dnu1, I1 * g1l, ds1};
            const cplx cols2[4] = {dnu2, I1 * dnu2, I1 * g2l, ds2};
            for (int j = 0; j < 4; ++j) {
                J(0, j) = cols1[j].real();
                J(1, j) = cols1[j].imag();
                J(2, j) = cols2[j].real();
                J(3, j) = cols2[j].imag();
            }
            dx = -J.fullPivLu().solve(F);
            const double cap = 0.1 * (1.0 + std::abs(nu));
            if (dx.norm() > cap) dx *= cap / dx.norm();
            seed.nu += cplx(dx[0], dx[1]);
            seed.omega += dx[2];
            seed.s += dx[3];
        } else {
            // omega = k s / 2 moves with s.
            Eigen::Matrix2d J;
            Eigen::Vector2d F(c.g1.real(), c.g2.real());
            const cplx s1 = ds1 + I1 * 0.5 * k * g1l;
            const cplx s2 = ds2 + I1 * 0.5 * k * g2l;
            J << dnu1.real(), s1.real(), dnu2.real(), s2.real();
            dx = -J.fullPivLu().solve(F);
            const double cap = 0.1 * (1.0 + std::abs(nu));
            if (dx.norm() > cap) dx *= cap / dx.norm();
            seed.nu += dx[0];
            seed.s += dx[1];
            seed.omega = 0.5 * k * seed.s;
        }
        if (!dx.allFinite() || !(seed.s > 0.0)) break;
        step_norm = dx.norm();
        if (step_norm < kNewtonTol * (1.0 + std::abs(seed.nu) + seed.s)) {
            seed.residual = step_norm;
            return seed;
        }
    }
    // Accept a root sitting at the noise floor of the determinant.
    if (step_norm < 1e-8 && seed.s > 0.0) {
        seed.residual = step_norm;
        return seed;
    }
    throw Error(ErrorCode::NoConvergence, "Bloch double-root Newton did not converge");
}

namespace {

// Tracks the two roots nu_+-(lambda) that split from the double root along
// lambda = lambda* + r (1 + i tilt), r: 0 -> 10 s. On the symmetric line the
// relation is real and roots collide there robustly, so the path is tilted
// slightly off the real direction.
std::optional<bool> track_pinching(const BlochOperator& op, const BlochRoot& root, double tilt) {
    const double s = root.s;
    const cplx lambda0 = I1 * root.omega;
    const cplx dir(1.0, tilt);
    const double r_end = 10.0 * s;

    auto polish = [&](cplx lambda, cplx nu, bool& ok) {
        ok = false;
        for (int it = 0; it < 12; ++it) {
            System c;
            try {
                c = eval_system(op, s, lambda, nu);
            } catch (const Error&) {
                return nu;   // wandered far into the decaying half plane
            }
            const cplx dnu = -c.g1 / c.g2;
            if (!std::isfinite(dnu.real()) || !std::isfinite(dnu.imag())) return nu;
            nu += dnu;
            // Tracking needs far less than the determinant's noise floor.
            if (std::abs(dnu) < 1e-8 * (1.0 + std::abs(nu))) {
                ok = true;
                return nu;
            }
        }
        return nu;
    };

    // Quadratic splitting nu - nu* = +-sqrt(-2 d_lambda (lambda - lambda*) / d_nunu).
    const System c = eval_system(op, s, lambda0, root.nu);
    const cplx gl = op.d_comoving_dlambda(s, lambda0, root.nu);
    const cplx ratio = -2.0 * gl * dir / c.g2n;
    const double split0 = 0.02;
    double r = split0 * split0 / std::abs(ratio);
    const cplx delta = std::sqrt(ratio * r);
    std::array<cplx, 2> tracked{root.nu + delta, root.nu - delta};
    for (auto& t : tracked) {
        bool ok = false;
        t = polish(lambda0 + r * dir, t, ok);
        if (!ok) return std::nullopt;
    }
    if (std::abs(tracked[0] - tracked[1]) < 0.5 * std::abs(delta)) return std::nullopt;
    std::array<cplx, 2> prev{root.nu, root.nu};
    double r_prev = 0.0;

    double dr = r;
    while (r < r_end) {
        const double step = std::min(dr, r_end - r);
        const double r_next = r + step;
        std::array<cplx, 2> next{};
        bool ok = true;
        const double sep = std::abs(tracked[0] - tracked[1]);
        for (int b = 0; b < 2 && ok; ++b) {
            // Linear extrapolation, or square-root scaling off the double root.
            cplx guess = tracked[b] + (tracked[b] - prev[b]) * (step / (r - r_prev));
            if (r_prev == 0.0) guess = root.nu + (tracked[b] - root.nu) * std::sqrt(r_next / r);
            bool conv = false;
            next[b] = polish(lambda0 + r_next * dir, guess, conv);
            if (!conv || std::abs(next[b] - guess) > 0.25 * std::min(sep, 0.1)) ok = false;
        }
        if (ok && std::abs(next[0] - next[1]) < 0.25 * sep) ok = false;
        if (!ok) {
            dr *= 0.5;
            if (dr < 1e-9 * (1.0 + r)) return std::nullopt;
            continue;
        }
        prev = tracked;
        r_prev = r;
        tracked = next;
        r = r_next;
        dr = std::min(dr * 1.5, 0.05 * (1.0 + r));
    }
    return tracked[0].real() * tracked[1].real() < 0.0;
}

}  // namespace

bool verify_bloch_pinching(const BlochOperator& op, const BlochRoot& root) {
    // Paths tilted to either side must agree; a disagreement means a branch
    // point sits between them.
    for (double tilt : {0.05, 0.2}) {
        const auto up = track_pinching(op, root, tilt);
        const auto down = track_pinching(op, root, -tilt);
        if (up && down) return *up && *down;
    }
    return false;
}

BlochRoot homotopy_seed(const PeriodicPattern& p, int steps) {
    const double alpha = 1.0 - 3.0 * p.m * p.m;
    if (!(alpha > 0.0)) throw std::invalid_argument("homotopy_seed: pattern mean outside the unstable range");
    if (steps < 1) throw std::invalid_argument("homotopy_seed: steps must be positive");
    const DoubleRoot lin = spreading_speed(alpha);
    BlochRoot cur{lin.nu, lin.omega, lin.s, 0.0};
    BlochRoot before = cur;
    double tau = 0.0, tau_before = 0.0;
    double dtau = 1.0 / steps;
    {
        BlochOperator op(blend_with_mean(p, 0.0));
        cur = solve_bloch_double_root(op, cur, RootMode::General);
        before = cur;
    }
    while (tau < 1.0) {
        const double t_next = std::min(1.0, tau + dtau);
        BlochRoot guess = cur;
        if (tau > tau_before) {
            const double w = (t_next - tau) / (tau - tau_before);
            guess.nu += (cur.nu - before.nu) * w;
            guess.omega += (cur.omega - before.omega) * w;
            guess.s += (cur.s - before.s) * w;
        }
        try {
            BlochOperator op(blend_with_mean(p, t_next));
            BlochRoot next = solve_bloch_double_root(op, guess, RootMode::General);
            // A jump in the root this large means Newton switched branches.
            const double jump = std::abs(next.nu - guess.nu) + std::abs(next.s - guess.s);
            if (jump > 0.05) throw Error(ErrorCode::NoConvergence, "homotopy jumped");
            before = cur;
            tau_before = tau;
            cur = next;
            tau = t_next;
            dtau = std::min(2.0 / steps, dtau * 1.5);
        } catch (const Error&) {
            dtau *= 0.5;
            if (dtau < 1e-4 / steps) throw Error(ErrorCode::NoConvergence, "homotopy step collapsed");
        }
    }
    return cur;
}

namespace {

CoarseningPrediction predict(const BlochOperator& op, const PeriodicPattern& p, const BlochRoot& root,
                             RootMode mode, bool check_pinching) {
    const double k = op.k();
    CoarseningPrediction out;
    out.m = p.m;
    out.k_p = k;
    out.s_coars = root.s;
    out.omega_coars = root.omega;
    out.nu_coars = root.nu;
    out.ratio = k * root.s / root.omega;
    out.doubled = mode == RootMode::Pinned;
    out.residual = root.residual;
    const double alpha = 1.0 - 3.0 * p.m * p.m;
    out.s_lin = alpha > 0.0 ? spreading_speed(alpha).s : 0.0;

    if (mode == RootMode::General) {
        // Partner under (lambda, nu) -> (conj lambda + i k s, conj nu + i k),
        // solved for rather than written down.
        BlochRoot partner{std::conj(root.nu) + I1 * k, k * root.s - root.omega, root.s, 0.0};
        partner.nu += cplx(1e-4, -1e-4);
        partner.omega *= 1.0 + 1e-4;
        const BlochRoot other = solve_bloch_double_root(op, partner, RootMode::General);
        out.dk1 = k * root.s / root.omega;
        out.dk2 = k * other.s / other.omega;
    }
    if (check_pinching) out.pinched = verify_bloch_pinching(op, root);
    return out;
}

bool on_symmetric_line(const BlochOperator& op, const BlochRoot& r) {
    return std::abs(r.omega / (op.k() * r.s) - 0.5) < 1e-4;
}

BlochRoot extrapolate(const BlochRoot& a, double ma, const BlochRoot& b, double mb, double m) {
    if (mb == ma) return b;
    const double w = (m - mb) / (mb - ma);
    return BlochRoot{b.nu + (b.nu - a.nu) * w, b.omega + (b.omega - a.omega) * w, b.s + (b.s - a.s) * w, 0.0};
}

std::optional<BlochRoot> try_solve(const PeriodicPattern& p, const BlochRoot& guess, RootMode mode) {
    try {
        return solve_bloch_double_root(BlochOperator(p), guess, mode);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

CoarseningPrediction coarsening_double_root(const PeriodicPattern& p, const BlochRoot& seed, RootMode mode,
                                            bool check_pinching) {
    const BlochOperator op(p);
    const BlochRoot root = solve_bloch_double_root(op, seed, mode);
    CoarseningPrediction out = predict(op, p, root, mode, check_pinching);
    if (check_pinching && !out.pinched)
        throw Error(ErrorCode::NotPinched, "coarsening double root fails the pinching test");
    return out;
}

CoarseningCurve coarsening_curve(double m_lo, double m_hi, int steps, const CurveOptions& opt) {
    if (!(m_lo < m_hi) || steps < 1) throw std::invalid_argument("coarsening_curve: need m_lo < m_hi and steps >= 1");
    if (!(m_lo > 0.0) || !(1.0 - 3.0 * m_hi * m_hi > 0.0))
        throw std::invalid_argument("coarsening_curve: range must lie inside (0, 1/sqrt 3)");

    CoarseningCurve curve;
    RootMode mode = RootMode::General;
    BlochRoot cur = homotopy_seed(wake_pattern(m_lo), opt.homotopy_steps);
    BlochRoot prev = cur;
    double m_cur = m_lo, m_prev = m_lo;

    for (int i = 0; i <= steps; ++i) {
        const double m = m_lo + (m_hi - m_lo) * i / steps;
        const PeriodicPattern p = wake_pattern(m);
        const BlochOperator op(p);
        BlochRoot guess = extrapolate(prev, m_prev, cur, m_cur, m);
        // The extrapolation is only trusted within one mode.
        if (i > 0 && mode == RootMode::General && on_symmetric_line(op, guess)) guess = cur;

        BlochRoot root;
        bool switched = false;
        if (mode == RootMode::General) {
            std::optional<BlochRoot> r;
            try {
                r = solve_bloch_double_root(op, guess, RootMode::General);
            } catch (const Error&) {
            }
            if (r && !on_symmetric_line(op, *r)) {
                root = *r;
            } else {
                root = solve_bloch_double_root(op, r ? *r : guess, RootMode::Pinned);
                switched = true;
            }
        } else {
            root = solve_bloch_double_root(op, guess, RootMode::Pinned);
        }

        if (switched) {
            // Bisect on whether the on-line system still has a root.
            double lo = m_cur, hi = m;
            BlochRoot on_line = root;
            while (hi - lo > opt.bisection_tol) {
                const double mid = 0.5 * (lo + hi);
                const auto r = try_solve(wake_pattern(mid), on_line, RootMode::Pinned);
                if (r && std::abs(r->s - on_line.s) < 0.05) {
                    hi = mid;
                    on_line = *r;
                } else {
                    lo = mid;
                }
            }
            curve.m_doubling = 0.5 * (lo + hi);
            mode = RootMode::Pinned;
            prev = root;
            m_prev = m;
        } else {
            prev = cur;
            m_prev = m_cur;
        }
        cur = root;
        m_cur = m;
        curve.points.push_back(predict(op, p, root, mode, opt.check_pinching));
    }

    // Crossover: first sign change of s_coars - s_lin between valid neighbours.
    const auto& pts = curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto& a = pts[i - 1];
        const auto& b = pts[i];
        if (opt.check_pinching && !(a.pinched && b.pinched)) continue;
        if (a.doubled != b.doubled) continue;
        const double fa = a.s_coars - a.s_lin, fb = b.s_coars - b.s_lin;
        if ((fa < 0.0) == (fb < 0.0)) continue;
        const RootMode md = b.doubled ? RootMode::Pinned : RootMode::General;
        double lo = a.m, hi = b.m, f_lo = fa;
        BlochRoot r{b.nu_coars, b.omega_coars, b.s_coars, 0.0};
        while (hi - lo > opt.bisection_tol) {
            const double mid = 0.5 * (lo + hi);
            const auto sol = try_solve(wake_pattern(mid), r, md);
            if (!sol) break;
            r = *sol;
            const double f = r.s - spreading_speed(1.0 - 3.0 * mid * mid).s;
            if ((f < 0.0) == (f_lo < 0.0)) {
                lo = mid;
                f_lo = f;
            } else {
                hi = mid;
            }
        }
        curve.m_crossover = 0.5 * (lo + hi);
        break;
    }
    return curve;
}

PeriodicPattern wake_pattern(double m) {
    const Parameters par = params_from_mass(m);
    if (!(par.alpha > 0.0)) throw Error(ErrorCode::NoSolution, "no wake pattern outside the spinodal range");
    const double k_lin = closed_forms(par.alpha).k_lin;
    return find_equilibrium(2.0 * std::numbers::pi / k_lin, m, 1);
}

void write_curve_csv(std::ostream& os, const CoarseningCurve& curve) {
    os << "m,s_coars,s_lin,omega,ratio,dk1,dk2,doubled,pinched\n";
    os.precision(10);
    for (const auto& p : curve.points) {
        os << p.m << ',' << p.s_coars << ',' << p.s_lin << ',' << p.omega_coars << ',' << p.ratio << ',' << p.dk1
           << ',' << p.dk2 << ',' << (p.doubled ? 1 : 0) << ',' << (p.pinched ? 1 : 0) << '\n';
    }
}

}  // namespace chfront
