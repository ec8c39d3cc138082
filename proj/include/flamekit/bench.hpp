#pragma once

// Survey-dataset kit: ingest the bundled table of published quantum-memory
// parameters, compute every derived column, rank entries, and emit the
// noise-vs-rate plot data.
//
// Provenance codes carried per numeric field:
//   MT  quoted in the source's main text        MS  measured by that group
//   SM  supplementary material                  EFn extracted from figure n
//   C   calculated / recalibrated here          NG  not given (upper bound used)
// A t_setup marked NG is evaluated as 1.0, making eta0 an upper bound; the
// flag travels into all outputs.

#include <cstddef>
#include <string>
#include <vector>

#include "flamekit/sync.hpp"

namespace flamekit {

struct MemoryRecord {
    std::string label;
    double tau_p = 0.0;    // signal pulse duration (or the device clock when footnoted), s
    double tau_s = 0.0;    // 1/e storage time, s
    double eta_int = 0.0;  // internal efficiency at zero storage time
    double t_setup = 1.0;  // setup transmission
    double nu = 0.0;       // noise photons per retrieval attempt
    std::string prov_tau_p, prov_tau_s, prov_eta, prov_t, prov_nu;
    std::string footnote;

    bool t_setup_not_given() const { return prov_t == "NG"; }
};

struct DerivedMetrics {
    double tau_c = 0.0;       // clock cycle, s
    double eta0 = 0.0;        // external efficiency
    double f_prime = 0.0;     // fractional delay
    double f_prime_e = 0.0;   // effective fractional delay
    double mu1 = 0.0;         // noise-to-signal at one input photon
    double r6_per_min = 0.0;  // 6-photon synchronization rate
};

inline constexpr double default_clock_floor = 20e-12;  // synchronization electronics response

// max(tau_p, floor)
double clock_cycle(double tau_p, double floor = default_clock_floor);

// Template used for the r6 column: N = 6, q = 1e-3, default R policy.
SyncParams default_sync_template();

DerivedMetrics derive(const MemoryRecord& rec, const SyncParams& sync_defaults);

// CSV with header
// label,tau_p_s,tau_s_s,eta_int,t_setup,nu,prov_tau_p,prov_tau_s,prov_eta,prov_t,prov_nu,footnote
// Quoted fields are supported; numeric fields round-trip losslessly.
std::vector<MemoryRecord> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<MemoryRecord>& records);

// Bundled dataset location: the FLAMEKIT_DATASET environment variable wins,
// otherwise the copy shipped with the source tree.
std::string bundled_dataset_path();

enum class SortKey { r6, mu1, fe };

// Row indices ordered best-first: descending r6 or f'_e, ascending mu1.
std::vector<std::size_t> rank(const std::vector<DerivedMetrics>& metrics, SortKey key);

// Writes a plain-text table (label, mu1, r6, f'_e) and a JSON file with
// axis metadata (log-log, mu1 reference line at 1e-3) and one point per
// record, including the upper-bound flag for NG-transmission rows.
void emit_plot_data(const std::vector<MemoryRecord>& records,
                    const std::vector<DerivedMetrics>& metrics,
                    const std::string& text_path, const std::string& json_path);

}  // namespace flamekit
