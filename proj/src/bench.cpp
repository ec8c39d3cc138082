#include "flamekit/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "flamekit/core_model.hpp"
#include "flamekit/errors.hpp"

#ifndef FLAMEKIT_DATA_DIR
#define FLAMEKIT_DATA_DIR "data"
#endif

namespace flamekit {

namespace {

const char* kHeader =
    "label,tau_p_s,tau_s_s,eta_int,t_setup,nu,"
    "prov_tau_p,prov_tau_s,prov_eta,prov_t,prov_nu,footnote";

const std::regex kProvPattern("MT|MS|SM|C|NG|EF[0-9]+[a-z]?(,[0-9]+[a-z]?)*");

// One CSV line -> cells, honoring double quotes with "" escapes.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string quote_csv(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

double parse_cell(const std::string& text, const std::string& path, int row, const char* col) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw data_error(path + ": row " + std::to_string(row) + ", column " + col
                         + ": bad number '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size())
        throw data_error(path + ": row " + std::to_string(row) + ", column " + col
                         + ": bad number '" + text + "'");
    return v;
}

void check_prov(const std::string& code, const std::string& path, int row, const char* col) {
    if (!std::regex_match(code, kProvPattern))
        throw data_error(path + ": row " + std::to_string(row) + ", column " + col
                         + ": unknown provenance code '" + code + "'");
}

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double clock_cycle(double tau_p, double floor) {
    if (!(tau_p > 0.0))
        throw std::invalid_argument("tau_p must be positive");
    return std::max(tau_p, floor);
}

SyncParams default_sync_template() {
    SyncParams p;
    p.n_sources = 6;
    p.q = 1e-3;
    p.r_policy = RPolicy{};  // table-default resolution
    return p;
}

DerivedMetrics derive(const MemoryRecord& rec, const SyncParams& sync_defaults) {
    DerivedMetrics m;
    m.tau_c = clock_cycle(rec.tau_p);
    m.eta0 = external_efficiency(rec.eta_int, rec.t_setup);
    const FractionalDelays fd = fractional_delays(m.eta0, rec.tau_s, m.tau_c);
    m.f_prime = fd.f_prime;
    m.f_prime_e = fd.f_prime_e;
    m.mu1 = noise_to_signal(rec.nu, m.eta0);

    SyncParams sp = sync_defaults;
    sp.tau_c = m.tau_c;
    sp.eta0 = m.eta0;
    sp.f = m.f_prime;
    m.r6_per_min = n_photon_rate(sp).rate_per_min;
    return m;
}

std::vector<MemoryRecord> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) {
        std::cerr << "warning: dataset file is empty: " << path << "\n";
        return {};
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw data_error(path + ": row 1: unexpected header");

    std::vector<MemoryRecord> out;
    std::set<std::string> seen;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv(line);
        if (cells.size() != 12)
            throw data_error(path + ": row " + std::to_string(row) + ": expected 12 fields, got "
                             + std::to_string(cells.size()));

        MemoryRecord r;
        r.label = cells[0];
        if (r.label.empty())
            throw data_error(path + ": row " + std::to_string(row) + ", column label: empty");
        if (!seen.insert(r.label).second)
            throw data_error(path + ": row " + std::to_string(row) + ": duplicate label '"
                             + r.label + "'");

        r.tau_p = parse_cell(cells[1], path, row, "tau_p_s");
        r.tau_s = parse_cell(cells[2], path, row, "tau_s_s");
        r.eta_int = parse_cell(cells[3], path, row, "eta_int");
        r.prov_tau_p = cells[6];
        r.prov_tau_s = cells[7];
        r.prov_eta = cells[8];
        r.prov_t = cells[9];
        r.prov_nu = cells[10];
        r.footnote = cells[11];
        check_prov(r.prov_tau_p, path, row, "prov_tau_p");
        check_prov(r.prov_tau_s, path, row, "prov_tau_s");
        check_prov(r.prov_eta, path, row, "prov_eta");
        check_prov(r.prov_t, path, row, "prov_t");
        check_prov(r.prov_nu, path, row, "prov_nu");

        // A transmission that was never given is evaluated at the upper
        // bound 1.0, whatever the numeric cell holds.
        if (r.t_setup_not_given() && (cells[4].empty() || cells[4] == "NG"))
            r.t_setup = 1.0;
        else
            r.t_setup = parse_cell(cells[4], path, row, "t_setup");
        if (r.t_setup_not_given()) r.t_setup = 1.0;

        r.nu = parse_cell(cells[5], path, row, "nu");

        if (!(r.tau_p > 0.0))
            throw data_error(path + ": row " + std::to_string(row) + ", column tau_p_s: must be positive");
        if (!(r.tau_s > 0.0))
            throw data_error(path + ": row " + std::to_string(row) + ", column tau_s_s: must be positive");
        if (r.eta_int < 0.0 || r.eta_int > 1.0)
            throw data_error(path + ": row " + std::to_string(row) + ", column eta_int: must be in [0, 1]");
        if (r.t_setup < 0.0 || r.t_setup > 1.0)
            throw data_error(path + ": row " + std::to_string(row) + ", column t_setup: must be in [0, 1]");
        if (r.nu < 0.0)
            throw data_error(path + ": row " + std::to_string(row) + ", column nu: must be non-negative");

        out.push_back(std::move(r));
    }
    return out;
}

void save_dataset(const std::string& path, const std::vector<MemoryRecord>& records) {
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot write dataset: " + path);
    out << kHeader << "\n";
    for (const MemoryRecord& r : records) {
        out << quote_csv(r.label) << ','
            << format_num(r.tau_p) << ',' << format_num(r.tau_s) << ','
            << format_num(r.eta_int) << ',' << format_num(r.t_setup) << ','
            << format_num(r.nu) << ','
            << quote_csv(r.prov_tau_p) << ',' << quote_csv(r.prov_tau_s) << ','
            << quote_csv(r.prov_eta) << ',' << quote_csv(r.prov_t) << ','
            << quote_csv(r.prov_nu) << ',' << quote_csv(r.footnote) << "\n";
    }
    if (!out)
        throw data_error("write failed: " + path);
}

std::string bundled_dataset_path() {
    if (const char* env = std::getenv("FLAMEKIT_DATASET"); env && *env)
        return env;
    return std::string(FLAMEKIT_DATA_DIR) + "/memories.csv";
}

std::vector<std::size_t> rank(const std::vector<DerivedMetrics>& metrics, SortKey key) {
    std::vector<std::size_t> order(metrics.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        switch (key) {
            case SortKey::r6: return metrics[a].r6_per_min > metrics[b].r6_per_min;
            case SortKey::fe: return metrics[a].f_prime_e > metrics[b].f_prime_e;
            case SortKey::mu1: return metrics[a].mu1 < metrics[b].mu1;
        }
        return false;
    });
    return order;
}

void emit_plot_data(const std::vector<MemoryRecord>& records,
                    const std::vector<DerivedMetrics>& metrics,
                    const std::string& text_path, const std::string& json_path) {
    if (records.size() != metrics.size())
        throw std::invalid_argument("records and metrics must align");

    {
        std::ofstream out(text_path);
        if (!out)
            throw data_error("cannot write plot table: " + text_path);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-24s %12s %14s %10s\n", "label", "mu1", "r6_per_min", "fpe");
        out << buf;
        for (std::size_t i = 0; i < records.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%-24s %12.4g %14.4g %10.4g%s\n",
                          records[i].label.c_str(), metrics[i].mu1, metrics[i].r6_per_min,
                          metrics[i].f_prime_e, records[i].t_setup_not_given() ? " *" : "");
            out << buf;
        }
        out << "* setup transmission not given; eta0 (hence mu1, r6, fpe) is an upper bound\n";
        if (!out)
            throw data_error("write failed: " + text_path);
    }

    {
        std::ofstream out(json_path);
        if (!out)
            throw data_error("cannot write plot data: " + json_path);
        out << "{\n"
            << "  \"x_axis\": {\"quantity\": \"mu1\", \"scale\": \"log\",\n"
            << "             \"reference_line\": {\"value\": 0.001, "
               "\"note\": \"single-photon emission probability benchmark\"}},\n"
            << "  \"y_axis\": {\"quantity\": \"r6_per_min\", \"scale\": \"log\", \"unit\": \"1/min\"},\n"
            << "  \"points\": [\n";
        for (std::size_t i = 0; i < records.size(); ++i) {
            out << "    {\"label\": \"" << records[i].label << "\", \"mu1\": "
                << format_num(metrics[i].mu1) << ", \"r6_per_min\": "
                << format_num(metrics[i].r6_per_min) << ", \"fpe\": "
                << format_num(metrics[i].f_prime_e) << ", \"t_setup_upper_bound\": "
                << (records[i].t_setup_not_given() ? "true" : "false") << "}"
                << (i + 1 < records.size() ? ",\n" : "\n");
        }
        out << "  ]\n}\n";
        if (!out)
            throw data_error("write failed: " + json_path);
    }
}

}  // namespace flamekit
