// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// check fails. Tolerances are pinned against published table values and
// frozen calibration constants; see README for the provenance of each.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flamekit/bench.hpp"
#include "flamekit/core_model.hpp"
#include "flamekit/fit.hpp"
#include "flamekit/mc.hpp"
#include "flamekit/rng.hpp"
#include "flamekit/sync.hpp"

using namespace flamekit;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const char* what, const std::string& details) {
    std::printf("[%2d] %s %s (%s)\n", idx, ok ? "PASS" : "FAIL", what, details.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

double round_2sf(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1e", v);
    return std::strtod(buf, nullptr);
}

// Published survey-table values: clock cycle, external efficiency, fractional
// delay, effective fractional delay, noise-to-signal, and the quoted
// six-photon rate (per minute) with its per-row tolerance.
struct PublishedRow {
    const char* label;
    double tau_c, eta0, f_prime, f_prime_e, mu1, r6, r6_tol;
};

const PublishedRow kPublished[] = {
    {"Oxford 15", 3.6e-10, 0.0185, 4167, 77, 0.71, 0.009, 0.10},
    {"Oxford 16", 3.2e-10, 0.00097, 297, 0.29, 0.16, 4e-7, 0.10},
    {"NRC 15", 2e-11, 0.009, 0.175, 0.0016, 0.033, 3.2e-6, 0.10},
    {"NRC 16", 2e-11, 0.024, 4.25, 0.1, 0.21, 5.7e-6, 0.10},
    {"Basel 17", 6.7e-10, 0.058, 101, 5.8, 0.16, 0.0022, 0.10},
    {"Georgia 05", 1.6e-7, 0.112, 69, 7.7, 0.19, 5.6e-5, 0.10},
    {"NTHU 13", 8.8e-7, 0.53, 105, 56, 0.0026, 0.38, 0.03},
    {"Stony-Brook 17", 5e-7, 0.005, 28, 0.14, 0.018, 2.5e-10, 0.10},
    {"ANU 11", 3e-6, 0.64, 7.3, 4.7, 0.011, 8.4e-7, 0.10},
    {"ANU 16", 6.66e-6, 0.72, 50, 36, 0.0125, 0.0094, 0.10},
    {"Geneva 10", 4.5e-7, 0.01, 36, 0.36, 0.1, 7.1e-10, 0.10},
    {"ICFO 17", 6.3e-8, 0.04, 286, 11.4, 0.048, 9.7e-5, 0.10},
    {"Urbana 17", 1e-8, 0.083, 83, 6.9, 1.2e-5, 0.0004, 0.10},
    {"Oxford 17", 4.4e-10, 0.066, 12.3, 0.8, 2.7e-5, 4.8e-6, 0.10},
    {"This work (off-res)", 1.7e-9, 0.251, 50.6, 12.6, 2.3e-4, 0.102, 0.02},
    {"This work (on-res)", 1.85e-9, 0.171, 44.3, 7.6, 0.0011, 0.0066, 0.10},
};
constexpr int kRows = 16;

// The two published decay-trace parameter sets (off- and on-resonance).
DecayModelParams table_row(int which) {
    DecayModelParams p;
    if (which == 0) {
        p.eta0 = 0.251; p.tau_s = 86e-9; p.tau_bar = 101e-9;
        p.t0 = -1.0e-9; p.A = 0.160; p.B = 0.006;
    } else {
        p.eta0 = 0.171; p.tau_s = 82e-9; p.tau_bar = 337e-9;
        p.t0 = 9.2e-9; p.A = 0.032; p.B = 0.007;
    }
    return p;
}

// 1: six-photon rate column from the published (rounded) inputs.
void check_1() {
    bool ok = true;
    double worst = 0.0;
    const char* worst_row = "";
    for (const PublishedRow& row : kPublished) {
        SyncParams p = default_sync_template();  // N = 6, q = 1e-3, R = 0.0024
        p.tau_c = row.tau_c;
        p.eta0 = row.eta0;
        p.f = row.f_prime;
        const double r6 = n_photon_rate(p).rate_per_min;
        const double dev = rel(r6, row.r6);
        if (dev > worst) { worst = dev; worst_row = row.label; }
        ok = ok && dev <= row.r6_tol;
    }
    report(1, ok, "six-photon rate column reproduced from quoted inputs",
           "16 rows, named-row tolerances 2%/3%/10%, worst dev " + fmt("%.2f", 100 * worst)
               + "% at " + worst_row);
}

// 2: every derived metric of the bundled dataset vs the published columns.
void check_2() {
    const auto records = load_dataset(bundled_dataset_path());
    const SyncParams tmpl = default_sync_template();
    bool ok = records.size() == kRows;
    double worst = 0.0;
    std::string worst_at = "none";
    for (std::size_t i = 0; ok && i < records.size(); ++i) {
        const PublishedRow& row = kPublished[i];
        ok = records[i].label == row.label;
        if (!ok) { worst_at = "row-order mismatch"; break; }
        const DerivedMetrics m = derive(records[i], tmpl);
        const struct { const char* what; double got, want; } cols[] = {
            {"tau_c", m.tau_c, row.tau_c}, {"eta0", m.eta0, row.eta0},
            {"f_prime", m.f_prime, row.f_prime}, {"f_prime_e", m.f_prime_e, row.f_prime_e},
            {"mu1", m.mu1, row.mu1},
        };
        for (const auto& c : cols) {
            const double dev = rel(c.got, c.want);
            if (dev > worst) { worst = dev; worst_at = std::string(row.label) + " " + c.what; }
            ok = ok && dev <= 0.02;
        }
    }
    report(2, ok, "derived metrics within 2% of published columns for all rows",
           "tau_c, eta0, f', f'_e, mu1; worst dev " + fmt("%.2f", 100 * worst) + "% at "
               + worst_at);
}

// 3: decay-model identities on random draws.
void check_3() {
    const int kDraws = 10000;
    StreamKey root = stream(777);
    bool ok = true;
    double worst_eq = 0.0, worst_inv_e = 0.0;
    int exact_at_t0 = 0;
    for (int i = 0; ok && i < kDraws; ++i) {
        const StreamKey d = fork(root, i);
        DecayModelParams p;
        p.tau_s = 1e-9 * std::pow(10.0, 3.0 * u01(fork(d, 1)));
        p.tau_bar = p.tau_s * (1.05 + 18.95 * u01(fork(d, 2)));
        p.eta0 = 1.0 - u01(fork(d, 3));  // (0, 1]
        p.t0 = (2.0 * u01(fork(d, 4)) - 1.0) * 1e-7;
        p.A = 2.0 * u01(fork(d, 5));
        p.B = 2.0 * u01(fork(d, 6));
        p.omega43_hz = 1e6 * std::pow(10.0, 2.0 * u01(fork(d, 7)));
        p.omega42_hz = 1e6 * std::pow(10.0, 2.0 * u01(fork(d, 8)));

        const EnvelopeTimes e = derived_times(p.tau_s, p.tau_bar);
        const double x = 5.0 * e.tau_sigma * u01(fork(d, 9));
        const double t = p.t0 + x;

        const double direct = efficiency_at(p, t);
        const double factored = envelope_efficiency(p, t) * detail::beat_factor(p, x);
        if (factored != 0.0) worst_eq = std::max(worst_eq, rel(direct, factored));

        exact_at_t0 += efficiency_at(p, p.t0) == p.eta0 ? 1 : 0;

        const double at_life = envelope_efficiency(p, p.t0 + p.tau_s);
        worst_inv_e = std::max(worst_inv_e, std::abs(at_life * std::exp(1.0) / p.eta0 - 1.0));

        ok = worst_eq <= 1e-12 && exact_at_t0 == i + 1 && worst_inv_e <= 1e-12;
    }
    report(3, ok, "model identities on 1e4 random draws",
           "factored-vs-direct worst rel " + fmt("%.2g", worst_eq) + ", eta(t0)==eta0 exact "
               + std::to_string(exact_at_t0) + "/10000, 1/e-point worst rel "
               + fmt("%.2g", worst_inv_e));
}

// 4: envelope time relations vs quoted uncertainties.
void check_4() {
    const EnvelopeTimes a = derived_times(86e-9, 101e-9);
    const EnvelopeTimes b = derived_times(82e-9, 337e-9);
    const double a_ns = a.tau_sigma * 1e9;
    const double b_ns = b.tau_sigma * 1e9;
    const bool ok = std::abs(a_ns - 65.9) < 0.05 && std::abs(a_ns - 65.0) < 4.0
                    && std::abs(b_ns - 117.5) < 0.05 && std::abs(b_ns - 117.0) < 7.0;
    report(4, ok, "Gaussian envelope times match the quoted 65(4) and 117(7) ns",
           "tau_sigma " + fmt("%.4f", a_ns) + " ns and " + fmt("%.4f", b_ns) + " ns");
}

// 5: lifetime budget vs the quoted 102 ns and 84 ns.
void check_5() {
    RateBudget two;
    two.components = {{"ground-state dephasing", 1.22e6}, {"control scattering", 0.34e6}};
    RateBudget three = two;
    three.components.emplace_back("spectator-state leakage", 0.33e6);
    const double t2 = lifetime_budget(two) * 1e9;
    const double t3 = lifetime_budget(three) * 1e9;
    const bool ok = std::abs(t2 - 102.0) <= 1.0 && std::abs(t3 - 84.0) <= 1.0;
    report(5, ok, "lifetime budget totals within 1 ns of quoted values",
           fmt("%.2f", t2) + " ns vs 102 ns; " + fmt("%.2f", t3) + " ns vs 84 ns");
}

// 6: coupling parameter at the quoted operating point.
void check_6() {
    const double c = coupling_parameter(0.36, 1.7e-9, 5e9);
    const bool ok = std::abs(c - 0.66) <= 0.01;
    report(6, ok, "coupling parameter equals 0.66 +- 0.01", "computed " + fmt("%.4f", c));
}

// 7: fit round trips and noise consistency.
void check_7() {
    const auto t_start = std::chrono::steady_clock::now();

    auto max_rel = [](const DecayModelParams& got, const DecayModelParams& want) {
        double m = 0.0;
        m = std::max(m, rel(got.eta0, want.eta0));
        m = std::max(m, rel(got.tau_s, want.tau_s));
        m = std::max(m, rel(got.tau_bar, want.tau_bar));
        m = std::max(m, rel(got.t0, want.t0));
        m = std::max(m, rel(got.A, want.A));
        m = std::max(m, rel(got.B, want.B));
        return m;
    };

    bool ok = true;
    double worst_truth = 0.0, worst_perturbed = 0.0;
    for (int r = 0; r < 2; ++r) {
        const DecayModelParams truth = table_row(r);
        std::vector<double> times;
        for (int i = 0; i <= 100; ++i) times.push_back(truth.t0 + 200e-9 * i / 100.0);
        const auto clean = generate_synthetic(truth, times, 0.0, 1);

        const FitResult from_truth =
            fit_decay(clean, default_omega43_hz, default_omega42_hz, truth);
        const double dev_truth = max_rel(from_truth.params, truth);
        worst_truth = std::max(worst_truth, dev_truth);
        ok = ok && from_truth.converged && dev_truth <= 1e-4;

        for (double scale : {1.2, 0.8}) {
            DecayModelParams init = truth;
            init.eta0 *= scale; init.tau_s *= scale; init.tau_bar *= scale;
            init.t0 *= scale; init.A *= scale; init.B *= scale;
            const FitResult res = fit_decay(clean, default_omega43_hz, default_omega42_hz, init);
            const double dev = max_rel(res.params, truth);
            worst_perturbed = std::max(worst_perturbed, dev);
            ok = ok && res.converged && dev <= 1e-2;
        }
    }

    // noise consistency: 200 seeds, sigma = 0.005, heuristic initial guess
    const DecayModelParams truth = table_row(0);
    std::vector<double> times;
    for (int i = 0; i <= 100; ++i) times.push_back(truth.t0 + 200e-9 * i / 100.0);
    double bias_sum = 0.0, stderr_sum = 0.0;
    int converged = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto noisy = generate_synthetic(truth, times, 0.005, seed);
        const FitResult res = fit_decay(noisy);
        if (!res.converged || !res.params_valid) continue;
        ++converged;
        bias_sum += res.params.tau_s - truth.tau_s;
        stderr_sum += res.stderrs[1];
    }
    const double mean_bias = std::abs(bias_sum / converged);
    const double mean_stderr = stderr_sum / converged;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    ok = ok && converged >= 180 && mean_bias < mean_stderr && secs < 60.0;
    report(7, ok, "fit round trips and 200-seed noise consistency",
           "from-truth worst rel " + fmt("%.2g", worst_truth) + ", +-20% worst rel "
               + fmt("%.2g", worst_perturbed) + "; |mean tau_s bias| " + fmt("%.3f", mean_bias * 1e9)
               + " ns < mean stderr " + fmt("%.3f", mean_stderr * 1e9) + " ns over "
               + std::to_string(converged) + "/200 converged; " + fmt("%.1f", secs) + " s");
}

// 8: root solver residuals and the published-R reading.
void check_8() {
    bool ok = true;
    double worst_resid = 0.0;
    for (int n = 1; n <= 8; ++n) {
        for (double q : {1e-4, 1e-3, 1e-2, 0.1, 0.2}) {
            const double y = solve_Y(n, q);
            const double p = (1.0 - 2.0 * q) * std::pow(y, n) + q * q * std::pow(y, n - 1)
                             + q * y - q;
            const double scaled = std::abs(p) / std::max(std::abs(1.0 - 2.0 * q), q);
            worst_resid = std::max(worst_resid, scaled);
            ok = ok && scaled < 1e-14 && y > 0.0 && y < 1.0;
        }
    }
    const double y = solve_Y(6, 1e-3);
    const double from_pow5 = std::pow(y, 5);
    const double from_pow6 = std::pow(y, 6);
    // The quoted operating-point R = 0.0024 matches Y^5, not the stated Y^6;
    // both readings are exposed as policies and the mismatch is asserted here.
    ok = ok && round_2sf(from_pow5) == 0.0024 && round_2sf(from_pow6) != 0.0024
         && readout_rate_R(6, 1e-3, RPolicy{}) == 0.0024;
    report(8, ok, "root residuals at solver precision; quoted R matches Y^(N-1) only",
           "worst scaled residual " + fmt("%.2g", worst_resid) + "; Y^5 = "
               + fmt("%.4g", from_pow5) + " rounds to 0.0024, Y^6 = " + fmt("%.4g", from_pow6)
               + " does not");
}

// 9: Monte-Carlo oracle: baseline, monotonicity, determinism, agreement grid.
void check_9() {
    const auto t_start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string fail_what;

    // baseline exactness: immediate loss, perfect retrieval
    {
        SimConfig cfg;
        cfg.n_sources = 2;
        cfg.q = 0.2;
        cfg.b = 1.0;
        cfg.eta0 = 1.0;
        cfg.n_cycles = 10000000;
        cfg.seed = 2024;
        const SimResult r = simulate(cfg);
        if (std::abs(r.rate_per_cycle - 0.04) > 3.0 * r.ci95) {
            ok = false;
            fail_what += " baseline";
        }
    }

    // per-seed monotonicity in eta0 (exact under common random numbers)
    for (std::uint64_t seed = 1; ok && seed <= 5; ++seed) {
        SimConfig cfg;
        cfg.n_sources = 2;
        cfg.q = 0.02;
        cfg.b = 0.1;
        cfg.n_cycles = 30000;
        cfg.seed = seed;
        std::uint64_t prev = 0;
        for (double eta0 : {0.25, 0.5, 0.75, 1.0}) {
            cfg.eta0 = eta0;
            const std::uint64_t got = simulate(cfg).n_successes;
            if (got < prev) { ok = false; fail_what += " eta0-monotonicity"; break; }
            prev = got;
        }
    }

    // per-seed monotonicity in b (statistical; seeds pinned)
    for (std::uint64_t seed = 9; ok && seed <= 13; ++seed) {
        SimConfig cfg;
        cfg.n_sources = 2;
        cfg.q = 0.02;
        cfg.eta0 = 1.0;
        cfg.n_cycles = 300000;
        cfg.seed = seed;
        double prev = 2.0;
        for (double b : {0.05, 0.3, 0.9}) {
            cfg.b = b;
            const double rate = simulate(cfg).rate_per_cycle;
            if (rate >= prev) { ok = false; fail_what += " b-monotonicity"; break; }
            prev = rate;
        }
    }

    // determinism: bit-identical replay, order-invariant merge
    {
        SimConfig cfg;
        cfg.n_sources = 3;
        cfg.q = 0.05;
        cfg.b = 0.3;
        cfg.eta0 = 0.7;
        cfg.n_cycles = 100000;
        cfg.seed = 99;
        const SimResult a = simulate(cfg);
        const SimResult b = simulate(cfg);
        bool same = a.n_successes == b.n_successes
                    && a.n_readout_attempts == b.n_readout_attempts
                    && a.occupancy_count == b.occupancy_count
                    && a.rate_per_cycle == b.rate_per_cycle && a.ci95 == b.ci95;
        SimConfig c2 = cfg;
        c2.seed = 100;
        const SimResult c = simulate(c2);
        const SimResult m1 = merge({a, c});
        const SimResult m2 = merge({c, b});
        same = same && m1.n_successes == m2.n_successes
               && m1.rate_per_cycle == m2.rate_per_cycle
               && m1.unit_availability == m2.unit_availability;
        if (!same) { ok = false; fail_what += " determinism"; }
    }

    // agreement with the analytic rate: frozen constants per grid point,
    // each seed within 3 CI half-widths of constant * analytic, and the
    // seed-to-seed spread below 5%.
    struct GridPoint {
        int n;
        double q, f, eta0;
        std::uint64_t cycles;
        double constant;
    };
    const GridPoint kGrid[] = {
        {2, 0.01, 20, 0.25, 63760544ull, 0.2487},
        {2, 0.01, 20, 0.50, 15954896ull, 0.3911},
        {2, 0.01, 100, 0.25, 30878563ull, 0.3540},
        {2, 0.01, 100, 0.50, 7970691ull, 0.5066},
        {2, 0.05, 20, 0.25, 6389518ull, 0.2270},
        {2, 0.05, 20, 0.50, 1597198ull, 0.4580},
        {2, 0.05, 100, 0.25, 5113293ull, 0.2531},
        {2, 0.05, 100, 0.50, 1275216ull, 0.4925},
        {3, 0.01, 20, 0.25, 1006711409ull, 0.2339},
        {3, 0.01, 20, 0.50, 126503118ull, 0.3781},
        {3, 0.01, 100, 0.25, 211640211ull, 0.3710},
        {3, 0.01, 100, 0.50, 26704190ull, 0.5146},
        {3, 0.05, 20, 0.25, 40120099ull, 0.2080},
        {3, 0.05, 20, 0.50, 5161886ull, 0.4690},
        {3, 0.05, 100, 0.25, 25686311ull, 0.2404},
        {3, 0.05, 100, 0.50, 3235779ull, 0.4904},
    };
    double c_lo = 1.0, c_hi = 0.0, worst_spread = 0.0;
    for (const GridPoint& g : kGrid) {
        if (!ok) break;
        SyncParams sp;
        sp.n_sources = g.n;
        sp.q = g.q;
        sp.tau_c = 1.0;  // rate_hz is then per cycle
        sp.eta0 = g.eta0;
        sp.f = g.f;
        const double analytic = n_photon_rate(sp).rate_hz;

        SimConfig cfg;
        cfg.n_sources = g.n;
        cfg.q = g.q;
        cfg.b = loss_prob_b(g.f);
        cfg.eta0 = g.eta0;
        cfg.n_cycles = g.cycles;
        double lo = 2.0, hi = 0.0;
        for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
            cfg.seed = seed;
            const SimResult r = simulate(cfg);
            const double ratio = r.rate_per_cycle / analytic;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            if (std::abs(r.rate_per_cycle - g.constant * analytic) > 3.0 * r.ci95) {
                ok = false;
                fail_what += " grid-constant";
            }
        }
        const double spread = (hi - lo) / (0.5 * (hi + lo));
        worst_spread = std::max(worst_spread, spread);
        if (spread >= 0.05) { ok = false; fail_what += " grid-spread"; }
        c_lo = std::min(c_lo, g.constant);
        c_hi = std::max(c_hi, g.constant);
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    ok = ok && secs < 300.0;
    report(9, ok, "simulator baseline, monotonicity, determinism, and agreement grid",
           ok ? "agreement constants " + fmt("%.2f", c_lo) + ".." + fmt("%.2f", c_hi)
                    + " across 16 grid points, worst seed spread " + fmt("%.1f", 100 * worst_spread)
                    + "%; " + fmt("%.0f", secs) + " s"
              : "failed:" + fail_what);
}

// 10: dataset integrity and the NG transmission flag.
void check_10() {
    const std::string tmp = "acceptance_dataset_tmp.csv";
    bool ok = true;
    std::string details;
    try {
        const auto records = load_dataset(bundled_dataset_path());
        ok = records.size() == kRows;

        save_dataset(tmp, records);
        const auto back = load_dataset(tmp);
        ok = ok && back.size() == records.size();
        for (std::size_t i = 0; ok && i < records.size(); ++i) {
            ok = back[i].label == records[i].label && back[i].tau_p == records[i].tau_p
                 && back[i].tau_s == records[i].tau_s && back[i].eta_int == records[i].eta_int
                 && back[i].t_setup == records[i].t_setup && back[i].nu == records[i].nu
                 && back[i].prov_tau_p == records[i].prov_tau_p
                 && back[i].prov_tau_s == records[i].prov_tau_s
                 && back[i].prov_eta == records[i].prov_eta
                 && back[i].prov_t == records[i].prov_t
                 && back[i].prov_nu == records[i].prov_nu
                 && back[i].footnote == records[i].footnote;
        }

        int flagged = 0;
        for (const MemoryRecord& r : records) {
            if (r.t_setup_not_given()) {
                ++flagged;
                ok = ok && r.t_setup == 1.0;
            }
        }
        ok = ok && flagged == 3;

        // the flag must travel into emitted outputs
        const SyncParams tmpl = default_sync_template();
        std::vector<DerivedMetrics> metrics;
        for (const MemoryRecord& r : records) metrics.push_back(derive(r, tmpl));
        emit_plot_data(records, metrics, "acceptance_plot_tmp.txt", "acceptance_plot_tmp.json");
        std::ifstream jin("acceptance_plot_tmp.json");
        nlohmann::json j;
        jin >> j;
        int flagged_out = 0;
        for (const auto& pt : j["points"])
            if (pt["t_setup_upper_bound"].get<bool>()) ++flagged_out;
        ok = ok && j["points"].size() == kRows && flagged_out == 3;
        details = "16 records, lossless round trip, " + std::to_string(flagged_out)
                  + " upper-bound flags preserved in plot data";
        std::remove("acceptance_plot_tmp.txt");
        std::remove("acceptance_plot_tmp.json");
        std::remove(tmp.c_str());
    } catch (const std::exception& e) {
        ok = false;
        details = std::string("exception: ") + e.what();
    }
    report(10, ok, "dataset integrity and upper-bound flag propagation", details);
}

}  // namespace

int main() {
    std::printf("acceptance checks\n");
    check_1();
    check_2();
    check_3();
    check_4();
    check_5();
    check_6();
    check_7();
    check_8();
    check_9();
    check_10();
    if (g_failures == 0) {
        std::printf("all 10 checks passed\n");
    } else {
        std::printf("%d check(s) FAILED\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
