#pragma once

// Core model of a fast ladder memory (FLAME): retrieval-efficiency decay with
// residual hyperfine beats, the derived figure-of-merit definitions, and the
// small closed-form budget estimates used alongside them.
//
// Conventions used throughout the library:
//   - all times are in seconds,
//   - all stored frequencies are cyclic (Hz); factors of 2*pi are applied
//     inside the operations, never baked into stored values.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flamekit {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Default beat notes between the storage coherence and its hyperfine
// neighbours (cyclic Hz).
inline constexpr double default_omega43_hz = 28.82e6;
inline constexpr double default_omega42_hz = 51.77e6;

// Parameters of the efficiency-decay model
//
//   eta(t) = eta0 * exp(-[(x - tau_s)(x + tau_bar)/(tau_s tau_bar) + 1])
//            * |1 + A e^{-i w43 x} + B e^{-i w42 x}|^2 / (1 + A + B)^2
//
// with x = t - t0 and w = 2*pi*f. The stored coherences are taken in-phase
// at the time of storage, so A and B are real and non-negative.
struct DecayModelParams {
    double eta0 = 0.0;     // external efficiency at t = t0, in (0, 1]
    double tau_s = 0.0;    // 1/e storage lifetime, s
    double tau_bar = 0.0;  // complementary envelope parameter, s; must exceed tau_s
    double t0 = 0.0;       // storage reference time, s
    double A = 0.0;        // beat amplitude, >= 0
    double B = 0.0;        // beat amplitude, >= 0
    double omega43_hz = default_omega43_hz;  // cyclic beat frequency, Hz
    double omega42_hz = default_omega42_hz;  // cyclic beat frequency, Hz
};

inline void validate(const DecayModelParams& p) {
    if (!(p.eta0 > 0.0) || p.eta0 > 1.0)
        throw std::invalid_argument("eta0 must be in (0, 1]");
    if (!(p.tau_s > 0.0))
        throw std::invalid_argument("tau_s must be positive");
    if (!(p.tau_bar > 0.0))
        throw std::invalid_argument("tau_bar must be positive");
    if (!(p.tau_bar > p.tau_s))
        throw std::domain_error("tau_bar must exceed tau_s (no positive homogeneous decay time otherwise)");
    if (p.A < 0.0 || p.B < 0.0)
        throw std::invalid_argument("beat amplitudes A, B must be non-negative");
    if (!(p.omega43_hz > 0.0) || !(p.omega42_hz > 0.0))
        throw std::invalid_argument("beat frequencies must be positive");
}

struct EnvelopeTimes {
    double tau_gamma;  // homogeneous decay time, s
    double tau_sigma;  // inhomogeneous decay time, s
};

// tau_gamma = tau_s tau_bar / (tau_bar - tau_s), tau_sigma = sqrt(tau_s tau_bar / 2)
inline EnvelopeTimes derived_times(double tau_s, double tau_bar) {
    if (!(tau_s > 0.0) || !(tau_bar > tau_s))
        throw std::domain_error("derived_times requires tau_bar > tau_s > 0");
    return {tau_s * tau_bar / (tau_bar - tau_s), std::sqrt(0.5 * tau_s * tau_bar)};
}

// Inverse of derived_times; returns {tau_s, tau_bar}.
inline std::pair<double, double> invert_times(const EnvelopeTimes& e) {
    if (!(e.tau_gamma > 0.0) || !(e.tau_sigma > 0.0))
        throw std::domain_error("invert_times requires positive envelope times");
    const double d = 2.0 * e.tau_sigma * e.tau_sigma / e.tau_gamma;  // tau_bar - tau_s
    const double tau_s = 0.5 * (-d + std::sqrt(d * d + 8.0 * e.tau_sigma * e.tau_sigma));
    return {tau_s, tau_s + d};
}

namespace detail {

// Beat interference factor, normalized to 1 at x = 0.
inline double beat_factor(const DecayModelParams& p, double x) {
    const std::complex<double> c = 1.0
        + p.A * std::polar(1.0, -two_pi * p.omega43_hz * x)
        + p.B * std::polar(1.0, -two_pi * p.omega42_hz * x);
    const double s = 1.0 + p.A + p.B;
    return std::norm(c) / (s * s);
}

// Full model without the validity check; used inside the fitter where trial
// parameters may transiently violate tau_bar > tau_s (the expression stays
// finite there).
inline double efficiency_unchecked(const DecayModelParams& p, double t) {
    const double x = t - p.t0;
    const double expo = -((x - p.tau_s) * (x + p.tau_bar) / (p.tau_s * p.tau_bar) + 1.0);
    return p.eta0 * std::exp(expo) * beat_factor(p, x);
}

}  // namespace detail

// Beat-free envelope eta0 exp(-x/tau_gamma) exp(-x^2/(2 tau_sigma^2)).
inline double envelope_efficiency(const DecayModelParams& p, double t) {
    validate(p);
    const EnvelopeTimes e = derived_times(p.tau_s, p.tau_bar);
    const double x = t - p.t0;
    return p.eta0 * std::exp(-x / e.tau_gamma)
                  * std::exp(-x * x / (2.0 * e.tau_sigma * e.tau_sigma));
}

// Full decay model; equals eta0 exactly at t = t0 for any A, B.
inline double efficiency_at(const DecayModelParams& p, double t) {
    validate(p);
    return detail::efficiency_unchecked(p, t);
}

// External efficiency as the product of internal efficiency and setup
// transmission.
inline double external_efficiency(double eta_int, double t_setup) {
    if (eta_int < 0.0 || eta_int > 1.0)
        throw std::invalid_argument("eta_int must be in [0, 1]");
    if (t_setup < 0.0 || t_setup > 1.0)
        throw std::invalid_argument("t_setup must be in [0, 1]");
    return eta_int * t_setup;
}

struct FractionalDelays {
    double f_prime;    // tau_s / tau_c, in clock cycles
    double f_prime_e;  // eta0 * f_prime
};

inline FractionalDelays fractional_delays(double eta0, double tau_s, double tau_c) {
    if (!(tau_c > 0.0))
        throw std::invalid_argument("tau_c must be positive");
    const double f = tau_s / tau_c;
    return {f, eta0 * f};
}

// mu1 = nu / eta0: noise photons per retrieval attempt over external
// efficiency; the input-photon number at which output SNR reaches 1.
inline double noise_to_signal(double nu, double eta0) {
    if (nu < 0.0)
        throw std::invalid_argument("nu must be non-negative");
    if (!(eta0 > 0.0))
        throw std::domain_error("noise_to_signal requires eta0 > 0");
    return nu / eta0;
}

// One dephasing/decay channel per component: label plus a cyclic rate in Hz
// (the f in w = 2*pi*f).
struct RateBudget {
    std::vector<std::pair<std::string, double>> components;
};

// Reciprocal of 2*pi times the summed cyclic rates.
inline double lifetime_budget(const RateBudget& budget) {
    if (budget.components.empty())
        throw std::invalid_argument("rate budget needs at least one component");
    double total = 0.0;
    for (const auto& [label, rate_hz] : budget.components) {
        if (rate_hz < 0.0)
            throw std::invalid_argument("negative rate for budget component '" + label + "'");
        total += rate_hz;
    }
    if (!(total > 0.0))
        throw std::domain_error("total budget rate must be positive");
    return 1.0 / (two_pi * total);
}

// Dimensionless storage coupling strength (Omega/Delta) sqrt(tau_p gamma OD) / 4.
// gamma_od_hz is the gamma*OD product as a cyclic rate in Hz, converted to
// angular internally. Values >= 1 indicate the estimate has saturated; this
// function reports the raw number and leaves interpretation to the caller.
inline double coupling_parameter(double omega_over_delta, double tau_p, double gamma_od_hz) {
    if (omega_over_delta < 0.0)
        throw std::invalid_argument("omega_over_delta must be non-negative");
    if (!(tau_p > 0.0) || !(gamma_od_hz > 0.0))
        throw std::invalid_argument("tau_p and gamma_od_hz must be positive");
    return omega_over_delta * std::sqrt(tau_p * two_pi * gamma_od_hz) / 4.0;
}

// Collected fraction of isotropic fluorescence through an aperture of
// numerical aperture na after demagnification by demag: (na/demag)^2 / 4.
inline double fluorescence_collection_fraction(double na, double demag) {
    if (!(na > 0.0))
        throw std::invalid_argument("numerical aperture must be positive");
    if (demag < 1.0)
        throw std::invalid_argument("demagnification must be >= 1");
    const double r = na / demag;
    return 0.25 * r * r;
}

}  // namespace flamekit
