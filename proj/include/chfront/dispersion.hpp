#pragma once

#include "chfront/core.hpp"

#include <array>
#include <complex>
#include <vector>

namespace chfront {

using cplx = std::complex<double>;

/// Dispersion relation of u = m in the steady frame:
/// d0(lambda, nu) = -nu^2 (nu^2 + alpha) - lambda.
cplx d0(cplx lambda, cplx nu, double alpha);

/// Comoving relation d_s(lambda, nu) = d0(lambda - s nu, nu) and its nu-derivative.
cplx d_comoving(cplx lambda, cplx nu, double alpha, double s);
cplx d_comoving_dnu(cplx nu, double alpha, double s);

/// Growth rate of e^{iqx} at u = m: q^2 (alpha - q^2).
double temporal_growth(double q, double alpha);

/// Roots of c[0] + c[1] z + ... + c[4] z^4 (c[4] != 0) from the eigenvalues of
/// the companion matrix, each polished by a Newton step when that helps.
std::array<cplx, 4> quartic_roots(const std::array<cplx, 5>& c);

/// The four roots nu of d_s(lambda, nu) = 0.
std::array<cplx, 4> spatial_roots(cplx lambda, double alpha, double s);

/// Pinched double root of the comoving relation with Re lambda = 0.
struct DoubleRoot {
    cplx lambda;
    cplx nu;
    double s = 0.0;
    double omega = 0.0;
    double k_lin = 0.0;
    bool pinched = false;
    double residual = 0.0;       // max(|d_s|, |d_s'|) at the returned root
};

/// Closed-form values of the critical double root. `omega` and `k_lin` are
/// derived from the closed-form nu via omega = Im(3 nu^4 + alpha nu^2).
/// `quoted_omega` is (3 + sqrt7) sqrt((2 + sqrt7)/96) alpha^2, which agrees.
/// `quoted_k_lin` is 2 (sqrt7 + 3) / (8 sqrt((sqrt7 - 1)(sqrt7 + 2))) sqrt(alpha),
/// a commonly quoted expression that does NOT equal omega / s (0.5104 vs
/// 0.7657 at alpha = 1); it is kept only so reports can show the mismatch.
struct ClosedForms {
    double s = 0.0;
    cplx nu;
    double omega = 0.0;
    double k_lin = 0.0;
    double quoted_k_lin = 0.0;
    double quoted_omega = 0.0;
};

ClosedForms closed_forms(double alpha);

/// Critical pinched double root (linear spreading speed) for alpha > 0.
/// Throws Error{NoConvergence} or Error{NotPinched}.
DoubleRoot spreading_speed(double alpha);

/// Follows the two roots that collide at (lambda, nu) as Re lambda grows to
/// 10 s and reports whether they end up in opposite half planes.
bool verify_pinching(cplx lambda, cplx nu, double alpha, double s);

struct WavenumberTable {
    double k_temp = 0.0;
    double k_max = 0.0;
    double k_lin = 0.0;
    double im_nu_lin = 0.0;
};

WavenumberTable wavenumber_table(double alpha);

/// Number of roots with Re nu > 0 of d_s(i omega l, nu) = 0 over |l| <= n.
/// At l = 0 the root nu = 0 (conserved first integral) is factored out.
/// Throws Error{NeutralRoot} if any remaining root has |Re nu| < 1e-9.
int count_unstable_spatial_roots(const Frame& frame, double alpha, int n);

struct StripRoot {
    int l = 0;
    cplx nu;
    bool at_double_root = false;
};

struct DecayReport {
    bool pass = true;
    double re_nu_lin = 0.0;
    std::vector<StripRoot> stable_roots;   // all roots with Re nu < 0
    std::vector<StripRoot> violations;     // roots inside (Re nu_lin, 0)
};

/// Scans l in [-l_max, l_max] at speed s (which must be s_lin(alpha)) and
/// checks that no decaying root is weaker than the critical rate Re nu_lin,
/// except the double root itself at l = +-1.
DecayReport critical_decay_check(double alpha, double omega, double s, int l_max);

}  // namespace chfront
