#include "flamekit/sync.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "flamekit/errors.hpp"

namespace flamekit {

namespace {

double poly(int n, double q, double y) {
    return (1.0 - 2.0 * q) * std::pow(y, n) + q * q * std::pow(y, n - 1) + q * y - q;
}

double poly_deriv(int n, double q, double y) {
    return n * (1.0 - 2.0 * q) * std::pow(y, n - 1)
         + (n - 1) * q * q * std::pow(y, n - 2) + q;
}

}  // namespace

double loss_prob_b(double f) {
    if (!(f > 0.0))
        throw std::invalid_argument("fractional delay f must be positive");
    return -std::expm1(-1.0 / f);
}

double solve_Y(int n, double q) {
    if (n < 1)
        throw std::invalid_argument("n_sources must be >= 1");
    if (!(q > 0.0) || !(q < 0.5))
        throw std::invalid_argument("q must be in (0, 0.5)");

    constexpr double eps = 1e-12;
    double lo = eps, hi = 1.0 - eps;
    double flo = poly(n, q, lo);
    if (poly(n, q, hi) * flo >= 0.0)
        throw numeric_error("root bracketing failed on (0, 1) for n=" + std::to_string(n));

    // Bisect to ~1e-8, then polish with Newton.
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (poly(n, q, mid) * flo <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = poly(n, q, lo);
        }
    }
    double y = 0.5 * (lo + hi);
    for (int i = 0; i < 50; ++i) {
        const double step = poly(n, q, y) / poly_deriv(n, q, y);
        y -= step;
        if (std::abs(step) < 1e-16 * y) break;
    }

    const double scale = std::max(std::abs(1.0 - 2.0 * q), q);
    if (!(y > 0.0) || !(y < 1.0) || std::abs(poly(n, q, y)) / scale > 1e-14)
        throw numeric_error("root polish failed for n=" + std::to_string(n));
    return y;
}

double readout_rate_R(int n, double q, const RPolicy& policy) {
    switch (policy.kind) {
        case RPolicyKind::literal_value:
            return policy.value;
        case RPolicyKind::root_as_stated:
            return std::pow(solve_Y(n, q), n);
        case RPolicyKind::root_table_consistent:
            return std::pow(solve_Y(n, q), n - 1);
        case RPolicyKind::table_default:
            if (n == 6 && std::abs(q - 1e-3) <= 1e-15) return 0.0024;
            return std::pow(solve_Y(n, q), n - 1);
    }
    throw std::invalid_argument("unknown R policy");
}

double enhancement_factor(double eta0, double q, double R, double b) {
    const double denom = b + (R + q - 2.0 * R * q) * (1.0 - b);
    if (!(denom > 0.0))
        throw std::domain_error("enhancement denominator must be positive");
    return 1.0 + (1.0 - R) * (1.0 - q) * eta0 / denom;
}

RateResult n_photon_rate(const SyncParams& p) {
    if (p.n_sources < 1)
        throw std::invalid_argument("n_sources must be >= 1");
    if (!(p.tau_c > 0.0))
        throw std::invalid_argument("tau_c must be positive");
    if (p.eta0 < 0.0 || p.eta0 > 1.0)
        throw std::invalid_argument("eta0 must be in [0, 1]");
    if (!(p.f > 0.0))
        throw std::invalid_argument("fractional delay f must be positive");

    RateResult r;
    r.b = loss_prob_b(p.f);
    r.Y = solve_Y(p.n_sources, p.q);
    r.R = readout_rate_R(p.n_sources, p.q, p.r_policy);
    r.enhancement = enhancement_factor(p.eta0, p.q, r.R, r.b);
    r.rate_hz = std::pow(p.q * r.enhancement, p.n_sources) / p.tau_c;
    r.rate_per_min = 60.0 * r.rate_hz;
    return r;
}

}  // namespace flamekit
