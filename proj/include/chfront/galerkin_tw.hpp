#pragma once

#include "chfront/core.hpp"
#include "chfront/equilibria.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace chfront {

/// Galerkin truncation |l| <= n of
///   u' = v, v' = P_n G'(u) + theta, theta' = w, w' = s v - omega u_tau,
/// with G(u) = -u^2/2 + u^4/4 and ' = d/dxi. Each field is stored as
/// Re f_0, then (Re f_l, Im f_l) for l = 1..n, where f(tau) = sum f_l e^{i l tau}
/// and f_{-l} = conj(f_l). Fields come in the order u, v, theta, w.
struct TWState {
    int n = 0;
    Frame frame{1.0, 1.0};
    std::vector<double> y;

    TWState() = default;
    TWState(int n_, const Frame& f);

    static int dim(int n) { return 4 * (2 * n + 1); }
    std::complex<double> coef(int field, int l) const;
    void set_coef(int field, int l, std::complex<double> c);
};

enum TWField { kU = 0, kV = 1, kTheta = 2, kW = 3 };

/// d y / d xi. The cubic is evaluated on 3 (2n + 1) collocation points,
/// which makes P_n(u^3) exact.
std::vector<double> tw_rhs(const TWState& state);

/// Central-difference Jacobian of tw_rhs (the right-hand side is a cubic
/// polynomial, so the error is O(h^2) with h = 1e-6).
Eigen::MatrixXd tw_jacobian(const TWState& state);

/// mean over tau of v^2/2 - G(u) - k v u_tau - theta w / s
double energy(const TWState& state);
/// mean over tau of w - s u
double first_integral(const TWState& state);
/// mean over tau of w^2, divided by s
double dissipation(const TWState& state);
/// sqrt(mean(w^2) + mean((s v - omega u_tau)^2)); zero exactly on relative equilibria.
double equilibrium_distance(const TWState& state);

/// u = m, theta = m - m^3, v = w = 0.
TWState trivial_tw_state(int n, const Frame& frame, double m);

/// u(xi, tau) = u_p(xi + tau / k), truncated to |l| <= n. Requires the
/// pattern wavenumber to equal frame.k() (relative 1e-9).
TWState embed_pattern(const PeriodicPattern& p, int n, const Frame& frame);

struct TWSample {
    double xi = 0.0;
    double E = 0.0;
    double I = 0.0;
    double dissipation = 0.0;
    double distance = 0.0;
    double dissipated = 0.0;   // integral of dissipation from the start
};

struct TWOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double cap = 50.0;         // L2(tau) norm of u that counts as blowup
};

struct TWTrajectory {
    std::vector<TWSample> samples;
    std::optional<double> blowup_xi;   // last xi with ||u|| <= cap
    TWState final_state;
};

/// Dense-output dopri5 from state0 over [0, xi_end], sampled at n_out + 1
/// equally spaced points. The dissipation integral is carried as an extra
/// component. Stops early on blowup; the throwing variant is
/// integrate_tw_or_throw.
TWTrajectory integrate_tw(const TWState& state0, double xi_end, int n_out, const TWOptions& opt = {});
/// As integrate_tw, but throws Error{Blowup} naming the last valid xi.
TWTrajectory integrate_tw_or_throw(const TWState& state0, double xi_end, int n_out, const TWOptions& opt = {});

struct EnergyCheck {
    double residual = 0.0;   // max |E(b) - E(a) + int_a^b dissipation| / max |E|
    double i_drift = 0.0;    // max |I - I(0)| / max(|I(0)|, 1)
    double total_dissipated = 0.0;
};

EnergyCheck verify_energy_identity(const TWTrajectory& traj);

enum class HaltKind { Blowup, NearTrivial, NearPattern, Undetermined };

struct ExplorationResult {
    TWTrajectory trajectory;
    HaltKind halt = HaltKind::Undetermined;
    double distance_trivial = 0.0;   // L2(tau) distance of u to m
    double distance_pattern = 0.0;   // distance of |u_l| profiles to the j = 1 pattern
};

/// Starts at amplitude `amplitude` on a random combination of the unstable
/// eigenvectors of u = m and integrates forward, then names the nearest
/// equilibrium family at the end.
ExplorationResult explore_from_trivial(int n, const Frame& frame, double m, double xi_end,
                                       double amplitude = 1e-4, std::uint64_t seed = 1);

/// CSV with header xi,E,I,dissipation,distance.
void write_tw_csv(std::ostream& os, const TWTrajectory& traj);

}  // namespace chfront
