#pragma once

// Analytic N-photon synchronization rate for an array of probabilistic
// sources backed by memories, run repeat-until-success:
//
//   r_N = tau_c^-1 q^N (1 + (1-R)(1-q) eta0 / (b + (R+q-2Rq)(1-b)))^N
//
// b = 1 - exp(-1/f) is the per-clock-cycle loss probability and R is the
// steady-state readout-attempt rate per cycle.
//
// A note on R: the published operating-point value R = 0.0024 (N = 6,
// q = 0.001) matches Y^(N-1) of the stated root Y, while the accompanying
// formula says R = Y^N (which evaluates to 7.0e-4). Both readings are
// provided, plus a literal override; the default reproduces the published
// numbers at the flagship operating point and uses Y^(N-1) elsewhere.

namespace flamekit {

enum class RPolicyKind {
    table_default,           // literal 0.0024 at (N=6, q=1e-3); Y^(N-1) elsewhere
    root_as_stated,          // R = Y^N
    root_table_consistent,   // R = Y^(N-1)
    literal_value,           // R = value
};

struct RPolicy {
    RPolicyKind kind = RPolicyKind::table_default;
    double value = 0.0;  // used by literal_value only

    static RPolicy as_stated() { return {RPolicyKind::root_as_stated, 0.0}; }
    static RPolicy table_consistent() { return {RPolicyKind::root_table_consistent, 0.0}; }
    static RPolicy literal(double v) { return {RPolicyKind::literal_value, v}; }
};

struct SyncParams {
    int n_sources = 6;
    double q = 1e-3;      // pair-emission probability per cycle, in (0, 0.5)
    double tau_c = 0.0;   // clock cycle, s
    double eta0 = 0.0;    // short-time external efficiency, [0, 1]
    double f = 0.0;       // fractional delay in clock cycles, > 0
    RPolicy r_policy{};
};

struct RateResult {
    double rate_hz = 0.0;
    double rate_per_min = 0.0;
    double enhancement = 0.0;  // per-unit factor; rate = q^N enh^N / tau_c
    double b = 0.0;
    double R = 0.0;
    double Y = 0.0;
};

// b = 1 - exp(-1/f); requires f > 0.
double loss_prob_b(double f);

// Positive real root in (0, 1) of (1-2q)Y^N + q^2 Y^(N-1) + qY - q = 0.
// Bracketed bisection then Newton polish; requires n >= 1, 0 < q < 0.5.
double solve_Y(int n, double q);

double readout_rate_R(int n, double q, const RPolicy& policy);

// 1 + (1-R)(1-q) eta0 / (b + (R+q-2Rq)(1-b)); domain error if the
// denominator is not positive.
double enhancement_factor(double eta0, double q, double R, double b);

RateResult n_photon_rate(const SyncParams& p);

}  // namespace flamekit
