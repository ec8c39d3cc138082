#pragma once

// Nonlinear least-squares estimation of DecayModelParams from (time,
// efficiency) samples, with 1-sigma parameter uncertainties from the local
// curvature at the optimum.
//
// Residual sign convention: model - data. Weights are 1/sigma per sample
// when a sigma is given, 1 otherwise; the objective is the sum of squared
// weighted residuals.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flamekit/core_model.hpp"

namespace flamekit {

struct DecaySample {
    double t = 0.0;    // s
    double eta = 0.0;  // measured efficiency, >= 0
    std::optional<double> sigma{};  // standard error, > 0 when present
};

// Box constraints applied during the fit. Lifetimes are fitted in log space,
// which enforces positivity; t0 is unconstrained.
struct FitBounds {
    double eta0_lo = 0.0, eta0_hi = 1.0;
    double ab_lo = 0.0, ab_hi = 2.0;
};

struct FitResult {
    DecayModelParams params;
    // 1-sigma uncertainties, ordered eta0, tau_s, tau_bar, t0, A, B.
    std::array<double, 6> stderrs{};
    double residual_norm = 0.0;  // sqrt(sum of squared weighted residuals)
    bool converged = false;
    int iterations = 0;
    bool singular = false;      // curvature not positive definite at the optimum
    bool params_valid = false;  // fitted params satisfy the model invariants
};

// Model curve plus Gaussian noise of width noise_sigma, clamped at 0.
// Samples carry sigma = noise_sigma when it is positive. Deterministic
// per seed.
std::vector<DecaySample> generate_synthetic(const DecayModelParams& p,
                                            const std::vector<double>& times,
                                            double noise_sigma, std::uint64_t seed);

// Weighted residuals (model - data), in sample order.
std::vector<double> residuals(const DecayModelParams& p,
                              const std::vector<DecaySample>& samples);

// Documented deterministic starting point: eta0 = max sample, t0 = argmax
// time, tau_s = time where the (window-5) smoothed data first crosses
// eta0/e past the peak, tau_bar = 2 tau_s, A = 0.1, B = 0.01.
DecayModelParams default_initial_guess(const std::vector<DecaySample>& samples,
                                       double omega43_hz = default_omega43_hz,
                                       double omega42_hz = default_omega42_hz);

// Damped least squares (Levenberg-Marquardt) over the six free parameters;
// beat frequencies stay fixed. Needs at least 7 samples spanning more than
// one time. Non-convergence is reported through the result, not thrown.
FitResult fit_decay(const std::vector<DecaySample>& samples,
                    double omega43_hz = default_omega43_hz,
                    double omega42_hz = default_omega42_hz,
                    const std::optional<DecayModelParams>& init = {},
                    const FitBounds& bounds = {});

// CSV with header "t_s,eta,sigma" (the sigma column is optional).
std::vector<DecaySample> load_samples_csv(const std::string& path);
void save_samples_csv(const std::string& path, const std::vector<DecaySample>& samples);

}  // namespace flamekit
