#pragma once

#include "chfront/dispersion.hpp"
#include "chfront/equilibria.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <vector>

namespace chfront {

/// Period map of lambda w = -(d + nu)^2 ((d + nu)^2 w + (1 - 3 u_p^2) w) over one
/// period of u_p, for the jet (w, w', w'', w''').
struct Monodromy {
    Eigen::Matrix4cd phi;
    cplx lambda;
    cplx nu;
    double L = 0.0;
};

/// Coefficients of the Bloch problem for one pattern, sampled once.
///
/// The period map is computed with fixed-step RK4 at N and 2N steps and
/// Richardson-extrapolated, so the result is a polynomial in (lambda, nu):
/// finite differences in nu and lambda see an analytic function.
class BlochOperator {
public:
    /// `step` is the coarse RK4 step; the fine pass uses step / 2.
    explicit BlochOperator(const PeriodicPattern& p, double step = 0.02);

    Monodromy monodromy(cplx lambda, cplx nu) const;

    /// det(Phi - I)
    cplx d(cplx lambda, cplx nu) const;
    /// d(lambda - s nu, nu)
    cplx d_comoving(double s, cplx lambda, cplx nu) const;
    /// d/dnu and d^2/dnu^2 of d_comoving at fixed lambda (analytic stencils).
    cplx d_comoving_dnu(double s, cplx lambda, cplx nu) const;
    cplx d_comoving_dnu2(double s, cplx lambda, cplx nu) const;
    /// d/dlambda of d_comoving at fixed nu.
    cplx d_comoving_dlambda(double s, cplx lambda, cplx nu) const;

    double L() const { return L_; }
    double k() const { return k_; }
    double m() const { return m_; }
    int steps() const { return n_; }

private:
    Eigen::Matrix4cd integrate(cplx lambda, cplx nu, int t_begin, int t_end, int stride) const;
    std::vector<Eigen::Matrix4cd> segments(cplx lambda, cplx nu) const;

    double L_ = 0.0;
    double k_ = 0.0;
    double m_ = 0.0;
    int n_ = 0;                            // coarse step count
    std::vector<double> f_, fp_, fpp_;     // 1 - 3u^2 and derivatives on 4n points
    std::vector<int> bounds_;              // segment ends in coarse steps
};

Monodromy monodromy(const PeriodicPattern& p, cplx lambda, cplx nu);
cplx bloch_d(const PeriodicPattern& p, cplx lambda, cplx nu);
cplx bloch_d_comoving(const PeriodicPattern& p, double s, cplx lambda, cplx nu);

/// u^tau = (1 - tau) m + tau u_p on the same grid.
PeriodicPattern blend_with_mean(const PeriodicPattern& p, double tau);

/// Double root (lambda = i omega, nu) of the comoving Bloch relation.
struct BlochRoot {
    cplx nu;
    double omega = 0.0;
    double s = 0.0;
    double residual = 0.0;
};

enum class RootMode {
    General,   // unknowns (Re nu, Im nu, omega, s)
    Pinned,    // Im nu = k/2 (mod k), omega = k s / 2; unknowns (Re nu, s)
};

/// Newton solve for a double root from a nearby seed.
/// Throws Error{NoConvergence}.
BlochRoot solve_bloch_double_root(const BlochOperator& op, BlochRoot seed, RootMode mode);

/// Follows the two roots nu_+-(lambda) that collide at the double root as
/// Re lambda grows to 10 s; true when they end in opposite half planes.
bool verify_bloch_pinching(const BlochOperator& op, const BlochRoot& root);

/// Continues the linear spreading root of u = m along u^tau, tau: 0 -> 1.
/// Throws Error{NoConvergence} if a homotopy step cannot be completed.
BlochRoot homotopy_seed(const PeriodicPattern& p, int steps = 40);

struct CoarseningPrediction {
    double m = 0.0;
    double k_p = 0.0;
    double s_coars = 0.0;
    double omega_coars = 0.0;
    cplx nu_coars;
    double ratio = 0.0;        // k_p s / omega
    bool doubled = false;
    // Conjugate exponents k_p / k_j with k_j = omega_j / s; (0, 0) when doubled.
    double dk1 = 0.0, dk2 = 0.0;
    double s_lin = 0.0;
    bool pinched = false;
    double residual = 0.0;
};

/// Newton refinement of `seed` at pattern p, then the pinching check. In
/// Pinned mode the result has doubled = true and ratio = 2. In General mode
/// the partner root (conj lambda + i k s, conj nu + i k) is solved for
/// independently to fill dk1, dk2. Throws Error{NoConvergence} or
/// Error{NotPinched}.
CoarseningPrediction coarsening_double_root(const PeriodicPattern& p, const BlochRoot& seed,
                                            RootMode mode = RootMode::General, bool check_pinching = true);

/// The wake pattern used for coarsening predictions: the j = 1 equilibrium
/// with wavenumber k_lin(m).
PeriodicPattern wake_pattern(double m);

struct CoarseningCurve {
    std::vector<CoarseningPrediction> points;
    std::optional<double> m_doubling;    // pinned root turns into a triple root
    std::optional<double> m_crossover;   // s_coars = s_lin
};

struct CurveOptions {
    int homotopy_steps = 40;
    bool check_pinching = true;          // at every output point
    double bisection_tol = 1e-4;
};

/// Continuation in m over [m_lo, m_hi] (steps + 1 points), starting from a
/// homotopy at m_lo. Switches to the pinned system once the conjugate pair
/// reaches the symmetric line and locates the transition and the crossover
/// by bisection.
CoarseningCurve coarsening_curve(double m_lo, double m_hi, int steps, const CurveOptions& opt = {});

/// CSV with header m,s_coars,s_lin,omega,ratio,dk1,dk2,doubled,pinched.
void write_curve_csv(std::ostream& os, const CoarseningCurve& curve);

}  // namespace chfront
