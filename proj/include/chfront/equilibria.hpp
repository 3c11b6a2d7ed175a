#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

namespace chfront {

/// Temporal Morse data of a periodic steady state.
/// n_zero counts zero eigenvalues on the mass-constrained space (mean-zero
/// perturbations); n_zero_full adds the neutral mass mode that every
/// L-periodic state has in the unconstrained space.
struct MorseCounts {
    int n_unstable = 0;
    int n_zero = 0;
    int n_zero_full = 0;
};

/// L-periodic steady state u'' + u - u^3 = mu with mean m, sampled on a
/// uniform grid with a maximum at x = 0.
struct PeriodicPattern {
    double L = 0.0;
    double k_p = 0.0;      // 2 pi / L
    double m = 0.0;
    double mu = 0.0;
    int j = 1;             // maxima per period
    double amplitude = 0.0;
    std::vector<double> x, u, du;
    std::optional<MorseCounts> morse;

    bool trivial() const { return amplitude == 0.0; }
};

/// Half-orbit shooting result for u'' = mu - u + u^3 started at (u0, 0).
struct Orbit {
    double mu = 0.0;
    double u0 = 0.0;
    double u_min = 0.0;
    double period = 0.0;
    double mass = 0.0;
    // Sensitivities from the variational equations.
    double dperiod_dmu = 0.0, dperiod_du0 = 0.0;
    double dmass_dmu = 0.0, dmass_du0 = 0.0;
    std::vector<double> x, u, du;   // n_samples uniform points over one period
};

/// Integrates from the maximum (u0, 0) to the next minimum, where u' returns
/// to zero, and doubles by reflection. Throws Error{NotClosed} when (u0, 0)
/// is not on a closed orbit around the center, Error{Degenerate} at the center.
Orbit shoot_orbit(double mu, double u0, std::size_t n_samples = 0);

/// Center of the phase plane (the equilibrium with 1 - 3u^2 > 0), if any.
std::optional<double> phase_center(double mu);

enum class BranchSelect { Lower, Upper };  // smaller / larger amplitude

struct EquilibriumOptions {
    BranchSelect select = BranchSelect::Upper;
    std::size_t samples_per_copy = 256;
    bool with_morse = false;
};

/// Nontrivial pattern with j copies per period L and mean m. Throws
/// Error{NoSolution} when no pattern exists, Error{NonConvergence} when a
/// bracketed solution cannot be refined or L/j is too close to the
/// heteroclinic limit to resolve. Only the branch bifurcating from u = m is
/// searched, so alpha <= 0 yields NoSolution.
PeriodicPattern find_equilibrium(double L, double m, int j, const EquilibriumOptions& opt = {});

/// All nontrivial solutions at (L, m, j), sorted by amplitude.
std::vector<PeriodicPattern> find_equilibria(double L, double m, int j, const EquilibriumOptions& opt = {});

/// u = m sampled on n points.
PeriodicPattern trivial_pattern(double L, double m, std::size_t n = 64);

/// Max over grid points of |u'' + u - u^3 - mu| with u'' computed spectrally.
double pattern_residual(const PeriodicPattern& p);

/// Counts of the linearization -(w'' + w - 3 u^2 w)'' in 2 n_modes + 1 Fourier
/// modes. Repeats the count at 2 n_modes and throws Error{Unresolved} if
/// the counts differ.
MorseCounts temporal_morse_index(const PeriodicPattern& p, int n_modes);

/// Default truncation for temporal_morse_index: about ten units of wavenumber.
int default_morse_modes(double L);

struct BranchPoint {
    double L = 0.0;
    double amplitude = 0.0;
    double mu = 0.0;
    double u0 = 0.0;
    MorseCounts morse;
    bool fold = false;   // the L-direction reversed between this point and the previous one
};

struct ContinuationOptions {
    double initial_amplitude = 0.02;
    double step = 0.02;
    double max_step = 0.15;
    double min_step = 1e-7;
    int max_points = 4000;
    bool with_morse = true;
};

/// Pseudo-arclength continuation of the j-branch in (mu, energy level, L)
/// starting next to the bifurcation at L = j L_min, until L leaves
/// [L_lo, L_hi] or the orbit comes within ~e^-20 (relative energy) of the
/// separatrix. Throws Error{StepFailure} if the step size collapses.
std::vector<BranchPoint> continue_branch(double m, int j, double L_lo, double L_hi,
                                         const ContinuationOptions& opt = {});

/// The trivial branch on [L_lo, L_hi] with Morse counts from the explicit
/// eigenvalues q^2 (alpha - q^2).
std::vector<BranchPoint> trivial_branch(double m, double L_lo, double L_hi, int n_points);

int count_folds(const std::vector<BranchPoint>& branch);

/// CSV with header L,amplitude,mu,n_unstable,n_zero.
void write_branch_csv(std::ostream& os, const std::vector<BranchPoint>& branch);

}  // namespace chfront
