#include "chfront/diagnostics.hpp"

#include "chfront/error.hpp"
#include "chfront/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace chfront {

namespace {

int last_index_below(const Snapshot& snap) {
    const int n = int(snap.u.size());
    if (!std::isfinite(snap.x_max)) return n;
    return std::clamp(int(std::ceil(snap.x_max / snap.dx())), 0, n);
}

}  // namespace

double front_position(const Snapshot& snap, double m, double threshold) {
    const int end = last_index_below(snap);
    const double dx = snap.dx();
    for (int i = end - 1; i >= 0; --i) {
        const double d = std::abs(snap.u[std::size_t(i)] - m);
        if (d <= threshold) continue;
        if (i + 1 >= int(snap.u.size()) || i + 1 >= end) return double(i) * dx;
        const double d_next = std::abs(snap.u[std::size_t(i + 1)] - m);
        return (double(i) + (d - threshold) / (d - d_next)) * dx;
    }
    throw Error(ErrorCode::NoFront, "no point exceeds the front threshold");
}

SpeedFit fit_speed(const std::vector<double>& t, const std::vector<double>& x, double t_from) {
    std::vector<double> tt, xx;
    for (std::size_t i = 0; i < t.size() && i < x.size(); ++i) {
        if (t[i] >= t_from) {
            tt.push_back(t[i]);
            xx.push_back(x[i]);
        }
    }
    const int n = int(tt.size());
    if (n < 10) throw Error(ErrorCode::InsufficientData, "fewer than 10 samples in the fit window");
    double mt = 0.0, mx = 0.0;
    for (int i = 0; i < n; ++i) {
        mt += tt[i];
        mx += xx[i];
    }
    mt /= n;
    mx /= n;
    double stt = 0.0, stx = 0.0;
    for (int i = 0; i < n; ++i) {
        stt += (tt[i] - mt) * (tt[i] - mt);
        stx += (tt[i] - mt) * (xx[i] - mx);
    }
    if (!(stt > 0.0)) throw Error(ErrorCode::InsufficientData, "fit window has no time spread");
    SpeedFit fit;
    fit.speed = stx / stt;
    fit.intercept = mx - fit.speed * mt;
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = xx[i] - fit.intercept - fit.speed * tt[i];
        rss += r * r;
    }
    fit.stderr_ = n > 2 ? std::sqrt(rss / (n - 2) / stt) : 0.0;
    fit.samples = n;
    fit.span = std::abs(xx.back() - xx.front());
    fit.short_span = fit.span < 500.0;
    return fit;
}

SpeedFit front_speed(const FrontTrack& track) {
    if (track.times.empty()) throw Error(ErrorCode::InsufficientData, "empty track");
    const double t0 = track.times.front(), t1 = track.times.back();
    return fit_speed(track.times, track.positions, t0 + 0.2 * (t1 - t0));
}

WakeEstimate wake_wavenumber(const Snapshot& snap, double x_lo, double x_hi) {
    const double dx = snap.dx();
    const int n = int(snap.u.size());
    const int i0 = std::clamp(int(std::ceil(x_lo / dx)), 0, n - 1);
    const int i1 = std::clamp(int(std::floor(x_hi / dx)), 0, n - 1);
    if (i1 - i0 < 8) throw Error(ErrorCode::TooFewOscillations, "wake window too short");

    std::vector<double> w(snap.u.begin() + i0, snap.u.begin() + i1 + 1);
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= double(w.size());
    for (double& v : w) v -= mean;

    // Sign changes, with the first and last located to sub-cell accuracy so
    // the count is measured over the span they actually cover.
    std::vector<double> zeros;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if ((w[i] < 0.0) != (w[i + 1] < 0.0)) zeros.push_back((double(i) + w[i] / (w[i] - w[i + 1])) * dx);
    }
    WakeEstimate est;
    est.crossings = int(zeros.size());
    est.x_lo = double(i0) * dx;
    est.x_hi = double(i1) * dx;
    if (zeros.size() < 6) throw Error(ErrorCode::TooFewOscillations, "fewer than 6 sign changes in the wake window");
    // (c - 1) half periods between the first and the last crossing.
    est.k = std::numbers::pi * double(zeros.size() - 1) / (zeros.back() - zeros.front());

    // Spectral peak of the Hann-windowed field, zero-padded 8x, refined by a
    // parabola through the three largest bins.
    const std::size_t nw = w.size();
    std::vector<double> padded(8 * nw, 0.0);
    for (std::size_t i = 0; i < nw; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(nw - 1));
        padded[i] = w[i] * hann;
    }
    const auto c = spectral::forward(padded);
    std::size_t best = 1;
    for (std::size_t q = 1; q + 1 < c.size(); ++q) {
        if (std::abs(c[q]) > std::abs(c[best])) best = q;
    }
    double shift = 0.0;
    if (best > 1 && best + 1 < c.size()) {
        const double a = std::abs(c[best - 1]), b = std::abs(c[best]), g = std::abs(c[best + 1]);
        const double den = a - 2.0 * b + g;
        if (den != 0.0) shift = 0.5 * (a - g) / den;
    }
    est.k_spectral = 2.0 * std::numbers::pi * (double(best) + shift) / (double(padded.size()) * dx);
    return est;
}

WakeEstimate wake_wavenumber_behind(const Snapshot& snap, double front) {
    return wake_wavenumber(snap, 0.4 * front, 0.9 * front);
}

double secondary_position(const Snapshot& snap, double m, double primary_front, double k_primary,
                          const SecondaryOptions& opt) {
    const double dx = snap.dx();
    const double lambda_p = 2.0 * std::numbers::pi / k_primary;
    const int end = std::min(int(snap.u.size()), int(primary_front / dx));
    // Upward crossings of u - m; spacing between consecutive ones is the
    // local wavelength, independent of the asymmetry of the plateaus.
    std::vector<double> up;
    for (int i = 0; i + 1 < end; ++i) {
        const double a = snap.u[std::size_t(i)] - m, b = snap.u[std::size_t(i + 1)] - m;
        if (a < 0.0 && b >= 0.0) up.push_back((double(i) + a / (a - b)) * dx);
    }
    const double limit = primary_front - opt.guard * lambda_p;
    double pos = -1.0;
    for (std::size_t j = 0; j + 1 < up.size(); ++j) {
        if (up[j + 1] > limit) break;
        const double lam = up[j + 1] - up[j];
        if (std::abs(lam / lambda_p - 1.0) > opt.deviation) pos = up[j + 1];
    }
    if (pos < 0.0) throw Error(ErrorCode::NoFront, "no coarsened region behind the primary front");
    return pos;
}

FrontTrack detect_secondary_front(const std::vector<Snapshot>& snaps, const FrontTrack& primary, double m,
                                  double k_primary, const SecondaryOptions& opt) {
    std::map<double, double> front_at;
    for (std::size_t i = 0; i < primary.times.size(); ++i) front_at[primary.times[i]] = primary.positions[i];
    FrontTrack out;
    for (const auto& s : snaps) {
        const auto it = front_at.find(s.t);
        if (it == front_at.end()) continue;
        try {
            const double x = secondary_position(s, m, it->second, k_primary, opt);
            out.times.push_back(s.t);
            out.positions.push_back(x);
        } catch (const Error&) {
        }
    }
    if (out.times.empty()) throw Error(ErrorCode::NoFront, "no secondary front in any snapshot");
    for (std::size_t i = 1; i < out.positions.size(); ++i) {
        if (out.times[i] > out.times.front() + 0.2 * (out.times.back() - out.times.front()) &&
            out.positions[i] < out.positions[i - 1]) {
            out.monotone = false;
        }
    }
    try {
        out.fit = front_speed(out);
    } catch (const Error&) {
    }
    return out;
}

CoarseningAnalysis analyze_coarsening(const std::vector<Snapshot>& snaps, const FrontTrack& primary, double m,
                                      double k_primary, double lock_tol, const SecondaryOptions& opt) {
    CoarseningAnalysis out;
    out.primary = primary.fit ? *primary.fit : front_speed(primary);
    FrontTrack sec;
    try {
        sec = detect_secondary_front(snaps, primary, m, k_primary, opt);
        const double t0 = sec.times.front(), t1 = sec.times.back();
        out.secondary = fit_speed(sec.times, sec.positions, t0 + 0.6 * (t1 - t0));
    } catch (const Error&) {
        return out;
    }
    out.locked = std::abs(out.secondary->speed / out.primary.speed - 1.0) < lock_tol;

    const Snapshot& last = snaps.back();
    if (sec.times.back() != last.t || primary.times.empty() || primary.times.back() != last.t) return out;
    const double xs = sec.positions.back(), xp = primary.positions.back();
    try {
        out.k_secondary = wake_wavenumber(last, 0.1 * xs, 0.9 * xs).k;
        out.k_primary = wake_wavenumber(last, xs + 0.1 * (xp - xs), xs + 0.9 * (xp - xs)).k;
        out.ratio = *out.k_primary / *out.k_secondary;
    } catch (const Error&) {
    }
    return out;
}

void write_track_csv(std::ostream& os, const FrontTrack& primary, const FrontTrack* secondary) {
    std::map<double, double> sec;
    if (secondary) {
        for (std::size_t i = 0; i < secondary->times.size(); ++i) sec[secondary->times[i]] = secondary->positions[i];
    }
    os << "t,primary_position,secondary_position\n";
    os.precision(10);
    for (std::size_t i = 0; i < primary.times.size(); ++i) {
        os << primary.times[i] << ',' << primary.positions[i] << ',';
        const auto it = sec.find(primary.times[i]);
        if (it != sec.end()) os << it->second;
        os << '\n';
    }
}

}  // namespace chfront
