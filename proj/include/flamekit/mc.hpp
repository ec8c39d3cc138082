#pragma once

// Seeded Monte-Carlo discrete-event simulation of N source-memory units
// running repeat-until-success synchronization. Serves as an independent
// oracle for the analytic rate model.
//
// Per clock cycle: photons stored in earlier cycles are lost independently
// with probability b, then each empty unit gains a photon with probability q,
// then, if all N units are full, a readout attempt occurs in which each unit
// retrieves with probability eta0; the attempt succeeds iff all N retrieve.
// Same-cycle emissions are not exposed to that cycle's loss step, so with
// b = 1 the success rate is exactly q^N at eta0 = 1. After any readout
// attempt all units reset to empty (retrieval is treated as destructive);
// keep_unretrieved instead retains photons that failed to retrieve.

#include <cstdint>
#include <vector>

namespace flamekit {

struct SimConfig {
    int n_sources = 2;
    double q = 0.0;     // per-cycle emission probability
    double b = 0.0;     // per-cycle loss probability (callers map f -> b)
    double eta0 = 1.0;  // per-unit retrieval probability at readout
    std::uint64_t n_cycles = 0;  // cycles simulated per replica
    std::uint64_t seed = 0;
    int replicas = 1;   // independent streams; totals sum over replicas
    bool keep_unretrieved = false;
};

struct SimResult {
    SimConfig config;
    std::uint64_t n_successes = 0;
    std::uint64_t n_readout_attempts = 0;
    std::uint64_t cycles_elapsed = 0;    // n_cycles * replicas
    std::uint64_t occupancy_count = 0;   // occupied units summed over every cycle's readout stage
    double rate_per_cycle = 0.0;         // n_successes / cycles_elapsed
    double ci95 = 0.0;                   // binomial 95% half-width on rate_per_cycle
    double unit_availability = 0.0;      // occupancy_count / (n_sources * cycles_elapsed)
};

// Deterministic for fixed (seed, replicas, config); replica k's stream does
// not depend on the replica count.
SimResult simulate(const SimConfig& cfg);

// Pool results from identical configs run with different seeds. Counts are
// summed and the rate and CI recomputed, so the CI shrinks ~1/sqrt(k).
SimResult merge(const std::vector<SimResult>& results);

}  // namespace flamekit
