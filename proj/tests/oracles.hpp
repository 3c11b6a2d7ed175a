// Independent reference computations for tests. Nothing here calls the library.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// Durand-Kerner iteration for a monic polynomial z^n + c[n-1] z^{n-1} + ... + c[0].
inline std::vector<cplx> durand_kerner(const std::vector<cplx>& c) {
    const std::size_t n = c.size();
    std::vector<cplx> z(n);
    const cplx seed(0.4, 0.9);
    for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(seed, double(i)) * 1.3;
    auto p = [&](cplx x) {
        cplx acc = 1.0;
        for (std::size_t i = n; i-- > 0;) acc = acc * x + c[i];
        return acc;
    };
    for (int it = 0; it < 2000; ++it) {
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx den = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) den *= (z[i] - z[j]);
            }
            const cplx dz = p(z[i]) / den;
            z[i] -= dz;
            change = std::max(change, std::abs(dz));
        }
        if (change < 1e-15) break;
    }
    return z;
}

/// Roots of nu^4 + alpha nu^2 - s nu + lambda = 0.
inline std::vector<cplx> comoving_roots(cplx lambda, double alpha, double s) {
    return durand_kerner({lambda, cplx(-s), cplx(alpha), cplx(0.0)});
}

/// Critical double root at alpha = 1 from the relations s = 4 nu^3 + 2 nu and
/// lambda = 3 nu^4 + nu^2 with real s and Re lambda = 0, written in closed form.
struct Linear {
    double s, omega;
    cplx nu;
};

inline Linear linear_alpha1() {
    const double r7 = std::sqrt(7.0);
    const cplx nu(-std::sqrt((r7 - 1.0) / 24.0), std::sqrt((r7 + 3.0) / 8.0));
    const cplx s = 4.0 * nu * nu * nu + 2.0 * nu;
    const cplx lam = 3.0 * nu * nu * nu * nu + nu * nu;
    return {s.real(), lam.imag(), nu};
}

}  // namespace oracle
