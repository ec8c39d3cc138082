#include "flamekit/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flamekit/rng.hpp"

namespace flamekit {

namespace {

enum Draw : std::uint64_t { kLoss = 1, kEmit = 2, kReadout = 3 };

void validate(const SimConfig& cfg) {
    if (cfg.n_sources < 1)
        throw std::invalid_argument("n_sources must be >= 1");
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(cfg.q) || !prob(cfg.b) || !prob(cfg.eta0))
        throw std::invalid_argument("q, b, eta0 must lie in [0, 1]");
    if (cfg.n_cycles < 1)
        throw std::invalid_argument("n_cycles must be >= 1");
    if (cfg.replicas < 1)
        throw std::invalid_argument("replicas must be >= 1");
}

void finalize(SimResult& r) {
    const double n = static_cast<double>(r.cycles_elapsed);
    const double p = static_cast<double>(r.n_successes) / n;
    r.rate_per_cycle = p;
    r.ci95 = 1.96 * std::sqrt(p * (1.0 - p) / n);
    r.unit_availability = static_cast<double>(r.occupancy_count)
        / (static_cast<double>(r.config.n_sources) * n);
}

}  // namespace

SimResult simulate(const SimConfig& cfg) {
    validate(cfg);
    const int n = cfg.n_sources;

    SimResult out;
    out.config = cfg;
    std::vector<unsigned char> full(static_cast<std::size_t>(n));

    for (int rep = 0; rep < cfg.replicas; ++rep) {
        const StreamKey rep_key = fork(stream(cfg.seed), static_cast<std::uint64_t>(rep));
        const StreamKey loss_key = fork(rep_key, kLoss);
        const StreamKey emit_key = fork(rep_key, kEmit);
        const StreamKey read_key = fork(rep_key, kReadout);
        std::fill(full.begin(), full.end(), 0);

        for (std::uint64_t c = 0; c < cfg.n_cycles; ++c) {
            const StreamKey loss_c = fork(loss_key, c);
            const StreamKey emit_c = fork(emit_key, c);

            int occupied = 0;
            for (int u = 0; u < n; ++u) {
                if (full[u] && u01(fork(loss_c, u)) < cfg.b) full[u] = 0;
                if (!full[u] && u01(fork(emit_c, u)) < cfg.q) full[u] = 1;
                occupied += full[u];
            }
            out.occupancy_count += static_cast<std::uint64_t>(occupied);

            if (occupied == n) {
                ++out.n_readout_attempts;
                const StreamKey read_c = fork(read_key, c);
                bool success = true;
                for (int u = 0; u < n; ++u) {
                    const bool retrieved = u01(fork(read_c, u)) < cfg.eta0;
                    success = success && retrieved;
                    full[u] = (cfg.keep_unretrieved && !retrieved) ? 1 : 0;
                }
                if (success) ++out.n_successes;
            }
        }
    }

    out.cycles_elapsed = cfg.n_cycles * static_cast<std::uint64_t>(cfg.replicas);
    finalize(out);
    return out;
}

SimResult merge(const std::vector<SimResult>& results) {
    if (results.empty())
        throw std::invalid_argument("merge needs at least one result");

    const SimConfig& ref = results.front().config;
    SimResult out;
    out.config = ref;
    for (const SimResult& r : results) {
        const SimConfig& c = r.config;
        const bool same = c.n_sources == ref.n_sources && c.q == ref.q && c.b == ref.b
            && c.eta0 == ref.eta0 && c.n_cycles == ref.n_cycles
            && c.replicas == ref.replicas && c.keep_unretrieved == ref.keep_unretrieved;
        if (!same)
            throw std::invalid_argument("merge requires identical configs (seeds may differ)");
        out.n_successes += r.n_successes;
        out.n_readout_attempts += r.n_readout_attempts;
        out.cycles_elapsed += r.cycles_elapsed;
        out.occupancy_count += r.occupancy_count;
    }
    finalize(out);
    return out;
}

}  // namespace flamekit
