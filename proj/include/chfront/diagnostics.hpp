#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace chfront {

/// One real field on the uniform grid x_i = i L / n, i < n.
struct Snapshot {
    double t = 0.0;
    double L = 0.0;
    std::vector<double> u;
    // Fronts are searched on [0, x_max); the simulator sets this to the
    // start of the forced zone (or L/2).
    double x_max = std::numeric_limits<double>::infinity();

    double dx() const { return L / double(u.size()); }
};

/// Largest x in [0, x_max) with |u(x) - m| > threshold, refined by linear
/// interpolation of |u - m| across the crossing. Throws Error{NoFront}.
double front_position(const Snapshot& snap, double m, double threshold = 0.05);

struct SpeedFit {
    double speed = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0;
    int samples = 0;
    double span = 0.0;       // distance covered inside the window
    bool short_span = false; // span < 500 length units
};

/// OLS slope of x against t over samples with t >= t_from. Throws
/// Error{InsufficientData} with fewer than 10 samples.
SpeedFit fit_speed(const std::vector<double>& t, const std::vector<double>& x, double t_from);

struct FrontTrack {
    std::vector<double> times;
    std::vector<double> positions;
    std::optional<SpeedFit> fit;
    bool monotone = true;   // after the transient
};

/// Fit over the trailing 80% of the track's time range.
SpeedFit front_speed(const FrontTrack& track);

struct WakeEstimate {
    double k = 0.0;          // from zero crossings (authoritative)
    double k_spectral = 0.0; // spectral peak of the windowed field
    int crossings = 0;
    double x_lo = 0.0, x_hi = 0.0;
};

/// Wavenumber of u - mean on [x_lo, x_hi]. Throws Error{TooFewOscillations}
/// with fewer than 6 sign changes.
WakeEstimate wake_wavenumber(const Snapshot& snap, double x_lo, double x_hi);

/// Default window [front - 0.6 front, front - 0.1 front] with the origin at x = 0.
WakeEstimate wake_wavenumber_behind(const Snapshot& snap, double front);

struct SecondaryOptions {
    double deviation = 0.3;     // relative wavelength deviation that counts as coarsened
    double guard = 1.0;         // primary wavelengths skipped behind the primary front
};

/// Right edge of the region behind the primary front whose local
/// wavelength differs from 2 pi / k_primary. Throws Error{NoFront}.
double secondary_position(const Snapshot& snap, double m, double primary_front, double k_primary,
                          const SecondaryOptions& opt = {});

/// Secondary-front track over a run. Snapshots where the primary or the
/// secondary front is missing are skipped. Throws Error{NoFront} if nothing
/// is found.
FrontTrack detect_secondary_front(const std::vector<Snapshot>& snaps, const FrontTrack& primary, double m,
                                  double k_primary, const SecondaryOptions& opt = {});

struct CoarseningAnalysis {
    SpeedFit primary;
    std::optional<SpeedFit> secondary;   // over the last 40% of the secondary track
    std::optional<double> k_primary;     // wake between the two fronts, last snapshot
    std::optional<double> k_secondary;   // behind the secondary front, last snapshot
    std::optional<double> ratio;         // k_primary / k_secondary
    bool locked = false;                 // speeds agree within lock_tol
};

/// Primary and secondary fronts of one run. Throws Error{InsufficientData}
/// when the primary track cannot be fitted; a missing secondary front
/// leaves the optional fields empty.
CoarseningAnalysis analyze_coarsening(const std::vector<Snapshot>& snaps, const FrontTrack& primary, double m,
                                      double k_primary, double lock_tol = 0.03,
                                      const SecondaryOptions& opt = {});

/// CSV with header t,primary_position,secondary_position. Missing secondary
/// samples are left empty.
void write_track_csv(std::ostream& os, const FrontTrack& primary, const FrontTrack* secondary);

}  // namespace chfront
