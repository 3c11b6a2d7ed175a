#include "chfront/core.hpp"
#include "chfront/error.hpp"

#include <limits>
#include <stdexcept>

namespace chfront {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotPinched: return "NotPinched";
        case ErrorCode::NeutralRoot: return "NeutralRoot";
        case ErrorCode::NotClosed: return "NotClosed";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::NoSolution: return "NoSolution";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::Unresolved: return "Unresolved";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::IntegrationFailure: return "IntegrationFailure";
        case ErrorCode::Blowup: return "Blowup";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NoFront: return "NoFront";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::TooFewOscillations: return "TooFewOscillations";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::Unstable: return "unstable";
        case Regime::Transitional: return "transitional";
        case Regime::Stable: return "stable";
    }
    return "unknown";
}

namespace {

bool on_bound(double abs_m, double bound) {
    return std::abs(abs_m - bound) <= 1e-14 * bound;
}

}  // namespace

Parameters params_from_mass(double m) {
    Parameters p;
    p.m = m;
    p.alpha = 1.0 - 3.0 * m * m;
    if (p.alpha > 0.0) {
        p.k_max = std::sqrt(p.alpha);
        p.L_min = 2.0 * std::numbers::pi / p.k_max;
    } else {
        p.k_max = 0.0;
        p.L_min = std::numeric_limits<double>::infinity();
    }

    const double a = std::abs(m);
    if (on_bound(a, kUnstableBound)) {
        p.regime = Regime::Unstable;
        p.boundary = true;
    } else if (on_bound(a, kSpinodalBound)) {
        p.regime = Regime::Transitional;
        p.boundary = true;
    } else if (a < kUnstableBound) {
        p.regime = Regime::Unstable;
    } else if (a < kSpinodalBound) {
        p.regime = Regime::Transitional;
    } else {
        p.regime = Regime::Stable;
    }
    return p;
}

Frame::Frame(double s, double omega) : s_(s), omega_(omega), k_(omega / s) {
    if (!(s > 0.0) || !std::isfinite(s) || !std::isfinite(omega)) {
        throw std::invalid_argument("Frame requires finite s > 0");
    }
}

}  // namespace chfront
