#pragma once

#include <cmath>
#include <numbers>
#include <string_view>

namespace chfront {

/// Mass-dependent regimes of u_t = -(u_xx + u - u^3)_xx around u = m.
enum class Regime { Unstable, Transitional, Stable };

std::string_view to_string(Regime regime);

inline const double kUnstableBound = 1.0 / std::sqrt(5.0);
inline const double kSpinodalBound = 1.0 / std::sqrt(3.0);

/// Parameters derived from the mass m. alpha = 1 - 3 m^2 is the coefficient
/// of the linearized operator at u = m; all selected wavenumbers scale with
/// sqrt(alpha).
struct Parameters {
    double m = 0.0;
    double alpha = 1.0;
    double k_max = 1.0;   // sqrt(alpha) when alpha > 0, else 0
    double L_min = 2.0 * std::numbers::pi;  // 2 pi / k_max, +inf when stable
    Regime regime = Regime::Unstable;
    // Set when |m| sits on 1/sqrt(5) or 1/sqrt(3). Regime boundaries are open
    // intervals, so such masses are tagged with the neighbouring regime of
    // smaller |m| and flagged here.
    bool boundary = false;
};

Parameters params_from_mass(double m);

/// Comoving frame of a modulated traveling wave u(x - s t, omega t).
class Frame {
public:
    Frame(double s, double omega);

    static Frame from_wavenumber(double s, double k) { return Frame(s, k * s); }

    double s() const noexcept { return s_; }
    double omega() const noexcept { return omega_; }
    double k() const noexcept { return k_; }

private:
    double s_;
    double omega_;
    double k_;
};

}  // namespace chfront
