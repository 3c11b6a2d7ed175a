#include "chfront/dispersion.hpp"
#include "chfront/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chfront {

namespace {

constexpr double kNeutralTol = 1e-9;

cplx horner(const cplx* c, int degree, cplx z) {
    cplx acc = c[degree];
    for (int i = degree - 1; i >= 0; --i) acc = acc * z + c[i];
    return acc;
}

cplx horner_derivative(const cplx* c, int degree, cplx z) {
    cplx acc = double(degree) * c[degree];
    for (int i = degree - 1; i >= 1; --i) acc = acc * z + double(i) * c[i];
    return acc;
}

// Companion-matrix roots of c[0] + ... + c[degree] z^degree.
std::vector<cplx> polynomial_roots(const cplx* c, int degree) {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -c[i] / c[degree];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    std::vector<cplx> roots(solver.eigenvalues().data(), solver.eigenvalues().data() + degree);

    // One or two Newton corrections, kept only when they shrink the residual.
    for (auto& z : roots) {
        for (int it = 0; it < 2; ++it) {
            const cplx p = horner(c, degree, z);
            const cplx dp = horner_derivative(c, degree, z);
            if (std::abs(dp) < 1e-8 * (1.0 + std::abs(z))) break;
            const cplx candidate = z - p / dp;
            if (std::abs(horner(c, degree, candidate)) < std::abs(p)) {
                z = candidate;
            } else {
                break;
            }
        }
    }
    return roots;
}

struct NewtonResult {
    Eigen::Vector4d x;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Residual of the double-root system in (Re nu, Im nu, omega, s).
Eigen::Vector4d double_root_residual(const Eigen::Vector4d& x, double alpha) {
    const cplx nu(x[0], x[1]);
    const cplx lambda(0.0, x[2]);
    const cplx d = d_comoving(lambda, nu, alpha, x[3]);
    const cplx g = d_comoving_dnu(nu, alpha, x[3]);
    return {d.real(), d.imag(), g.real(), g.imag()};
}

Eigen::Matrix4d double_root_jacobian(const Eigen::Vector4d& x, double alpha) {
    const cplx nu(x[0], x[1]);
    const double s = x[3];
    const cplx g = d_comoving_dnu(nu, alpha, s);
    const cplx dg = -12.0 * nu * nu - 2.0 * alpha;
    Eigen::Matrix4d J;
    // d/dRe(nu) = f', d/dIm(nu) = i f' for holomorphic f.
    J(0, 0) = g.real();   J(1, 0) = g.imag();
    J(2, 0) = dg.real();  J(3, 0) = dg.imag();
    J(0, 1) = -g.imag();  J(1, 1) = g.real();
    J(2, 1) = -dg.imag(); J(3, 1) = dg.real();
    J(0, 2) = 0.0;        J(1, 2) = -1.0;
    J(2, 2) = 0.0;        J(3, 2) = 0.0;
    J(0, 3) = nu.real();  J(1, 3) = nu.imag();
    J(2, 3) = 1.0;        J(3, 3) = 0.0;
    return J;
}

NewtonResult damped_newton(Eigen::Vector4d x, double alpha) {
    NewtonResult out;
    double norm = double_root_residual(x, alpha).norm();
    for (int it = 0; it < 60; ++it) {
        const Eigen::Vector4d F = double_root_residual(x, alpha);
        norm = F.norm();
        if (norm < 1e-14) break;
        const Eigen::Matrix4d J = double_root_jacobian(x, alpha);
        const Eigen::Vector4d step = J.fullPivLu().solve(-F);
        if (!step.allFinite()) break;
        double damping = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            const Eigen::Vector4d trial = x + damping * step;
            if (double_root_residual(trial, alpha).norm() < norm) {
                x = trial;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if (!accepted) break;
    }
    const Eigen::Vector4d F = double_root_residual(x, alpha);
    out.x = x;
    out.residual = F.cwiseAbs().maxCoeff();
    out.converged = out.residual < 1e-12 && x.allFinite();
    return out;
}

}  // namespace

cplx d0(cplx lambda, cplx nu, double alpha) {
    const cplx nu2 = nu * nu;
    return -nu2 * (nu2 + alpha) - lambda;
}

cplx d_comoving(cplx lambda, cplx nu, double alpha, double s) {
    return d0(lambda - s * nu, nu, alpha);
}

cplx d_comoving_dnu(cplx nu, double alpha, double s) {
    return -4.0 * nu * nu * nu - 2.0 * alpha * nu + s;
}

double temporal_growth(double q, double alpha) {
    const double q2 = q * q;
    return q2 * (alpha - q2);
}

std::array<cplx, 4> quartic_roots(const std::array<cplx, 5>& c) {
    if (c[4] == cplx(0.0)) throw std::invalid_argument("quartic_roots: leading coefficient is zero");
    const auto roots = polynomial_roots(c.data(), 4);
    return {roots[0], roots[1], roots[2], roots[3]};
}

std::array<cplx, 4> spatial_roots(cplx lambda, double alpha, double s) {
    // d_s = 0  <=>  nu^4 + alpha nu^2 - s nu + lambda = 0
    return quartic_roots({lambda, cplx(-s), cplx(alpha), cplx(0.0), cplx(1.0)});
}

ClosedForms closed_forms(double alpha) {
    const double r7 = std::sqrt(7.0);
    ClosedForms cf;
    cf.s = 2.0 / (3.0 * std::sqrt(6.0)) * (2.0 + r7) * std::sqrt(r7 - 1.0) * std::pow(alpha, 1.5);
    cf.nu = cplx(-std::sqrt((r7 - 1.0) / 24.0), std::sqrt((r7 + 3.0) / 8.0)) * std::sqrt(alpha);
    const cplx nu2 = cf.nu * cf.nu;
    cf.omega = (3.0 * nu2 * nu2 + alpha * nu2).imag();
    cf.k_lin = cf.omega / cf.s;
    cf.quoted_omega = (3.0 + r7) * std::sqrt((2.0 + r7) / 96.0) * alpha * alpha;
    cf.quoted_k_lin = 2.0 * (r7 + 3.0) / (8.0 * std::sqrt((r7 - 1.0) * (r7 + 2.0))) * std::sqrt(alpha);
    return cf;
}

bool verify_pinching(cplx lambda, cplx nu, double alpha, double s) {
    const double r_end = 10.0 * s;
    double r = 1e-8 * (1.0 + std::abs(lambda));

    auto nearest_two = [&](const std::array<cplx, 4>& roots) {
        std::array<int, 4> idx{0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return std::abs(roots[a] - nu) < std::abs(roots[b] - nu);
        });
        return std::array<cplx, 2>{roots[idx[0]], roots[idx[1]]};
    };

    std::array<cplx, 2> tracked = nearest_two(spatial_roots(lambda + r, alpha, s));
    double step = r;
    while (r < r_end) {
        const double dr = std::min(step, r_end - r);
        const auto roots = spatial_roots(lambda + (r + dr), alpha, s);
        std::array<cplx, 2> next{};
        bool ok = true;
        std::array<int, 2> chosen{-1, -1};
        for (int b = 0; b < 2 && ok; ++b) {
            std::array<double, 4> dist{};
            for (int i = 0; i < 4; ++i) dist[i] = std::abs(roots[i] - tracked[b]);
            const int best = int(std::min_element(dist.begin(), dist.end()) - dist.begin());
            double second = std::numeric_limits<double>::infinity();
            for (int i = 0; i < 4; ++i) {
                if (i != best) second = std::min(second, dist[i]);
            }
            // Unambiguous match: the nearest root is well separated from the rest.
            if (dist[best] > 0.3 * second) ok = false;
            chosen[b] = best;
            next[b] = roots[best];
        }
        if (ok && chosen[0] == chosen[1]) ok = false;
        if (!ok) {
            step *= 0.25;
            if (step < 1e-14 * (1.0 + r)) return false;
            continue;
        }
        tracked = next;
        r += dr;
        step *= 2.0;
    }
    return tracked[0].real() * tracked[1].real() < 0.0;
}

DoubleRoot spreading_speed(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("spreading_speed requires alpha > 0");
    const ClosedForms cf = closed_forms(alpha);
    const Eigen::Vector4d base(cf.nu.real(), cf.nu.imag(), cf.omega, cf.s);

    std::vector<NewtonResult> found;
    for (int seed = 0; seed < 8; ++seed) {
        Eigen::Vector4d x0 = base;
        for (int c = 0; c < 3; ++c) {
            const double sign = ((seed >> c) & 1) ? 1.0 : -1.0;
            x0[c] *= 1.0 + 0.05 * sign;
        }
        x0[3] *= 1.0 + 0.03 * (seed % 2 ? 1.0 : -1.0);
        const NewtonResult res = damped_newton(x0, alpha);
        if (!res.converged) continue;
        // Representative with Im lambda > 0, decaying leading edge, forward speed.
        if (res.x[2] <= 0.0 || res.x[0] >= 0.0 || res.x[3] <= 0.0) continue;
        found.push_back(res);
    }
    if (found.empty()) {
        throw Error(ErrorCode::NoConvergence, "double-root Newton failed from all seeds");
    }
    const auto best = std::max_element(found.begin(), found.end(),
                                       [](const NewtonResult& a, const NewtonResult& b) { return a.x[3] < b.x[3]; });

    DoubleRoot dr;
    dr.nu = cplx(best->x[0], best->x[1]);
    dr.omega = best->x[2];
    dr.s = best->x[3];
    dr.lambda = cplx(0.0, dr.omega);
    dr.k_lin = dr.omega / dr.s;
    dr.residual = best->residual;
    dr.pinched = verify_pinching(dr.lambda, dr.nu, alpha, dr.s);
    if (!dr.pinched) throw Error(ErrorCode::NotPinched, "critical double root fails the pinching test");
    return dr;
}

WavenumberTable wavenumber_table(double alpha) {
    const DoubleRoot dr = spreading_speed(alpha);
    WavenumberTable t;
    t.k_temp = std::sqrt(alpha / 2.0);
    t.k_max = std::sqrt(alpha);
    t.k_lin = dr.k_lin;
    t.im_nu_lin = dr.nu.imag();
    return t;
}

namespace {

// Roots of d_s(i omega l, nu) = 0 with the trivial root nu = 0 removed at l = 0.
std::vector<cplx> frame_roots(int l, double omega, double alpha, double s) {
    if (l == 0) {
        const std::array<cplx, 4> cubic{cplx(-s), cplx(alpha), cplx(0.0), cplx(1.0)};
        return polynomial_roots(cubic.data(), 3);
    }
    const auto r = spatial_roots(cplx(0.0, omega * l), alpha, s);
    return {r.begin(), r.end()};
}

}  // namespace

int count_unstable_spatial_roots(const Frame& frame, double alpha, int n) {
    if (n < 0) throw std::invalid_argument("count_unstable_spatial_roots: n must be >= 0");
    if (frame.omega() == 0.0) throw std::invalid_argument("count_unstable_spatial_roots: omega must be nonzero");
    int count = 0;
    for (int l = -n; l <= n; ++l) {
        for (const cplx& nu : frame_roots(l, frame.omega(), alpha, frame.s())) {
            if (std::abs(nu.real()) < kNeutralTol) {
                throw Error(ErrorCode::NeutralRoot, "root on the imaginary axis at l = " + std::to_string(l));
            }
            if (nu.real() > 0.0) ++count;
        }
    }
    return count;
}

DecayReport critical_decay_check(double alpha, double omega, double s, int l_max) {
    const DoubleRoot lin = spreading_speed(alpha);
    if (std::abs(s - lin.s) > 1e-8 * lin.s) {
        throw std::invalid_argument("critical_decay_check: s must equal s_lin(alpha)");
    }
    DecayReport report;
    report.re_nu_lin = lin.nu.real();
    // Roots of a double root come out of the companion matrix split by
    // O(sqrt(eps)); anything that close to nu_lin counts as the double root.
    const double same_tol = 1e-6 * (1.0 + std::abs(lin.nu));
    const double strip_tol = 1e-9;
    for (int l = -l_max; l <= l_max; ++l) {
        for (const cplx& nu : frame_roots(l, omega, alpha, s)) {
            if (!(nu.real() < 0.0)) continue;
            StripRoot root{l, nu, false};
            root.at_double_root = std::abs(nu - lin.nu) < same_tol || std::abs(nu - std::conj(lin.nu)) < same_tol;
            report.stable_roots.push_back(root);
            if (root.at_double_root) {
                if (std::abs(l) != 1) {
                    report.violations.push_back(root);
                    report.pass = false;
                }
                continue;
            }
            if (nu.real() > report.re_nu_lin + strip_tol) {
                report.violations.push_back(root);
                report.pass = false;
            }
        }
    }
    return report;
}

}  // namespace chfront
