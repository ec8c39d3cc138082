// flamekit: command-line front end for the memory-decay model, decay fitter,
// synchronization-rate model, Monte-Carlo simulator, survey benchmark, and
// lifetime budget.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flamekit/bench.hpp"
#include "flamekit/core_model.hpp"
#include "flamekit/errors.hpp"
#include "flamekit/fit.hpp"
#include "flamekit/mc.hpp"
#include "flamekit/sync.hpp"
#include "flamekit/units.hpp"
#include "flamekit/version.hpp"

namespace fk = flamekit;
using nlohmann::json;

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

json base_manifest(const std::string& subcommand) {
    json m;
    m["tool"] = "flamekit";
    m["version"] = FLAMEKIT_VERSION;
    m["subcommand"] = subcommand;
    m["defaults"] = {
        {"clock_floor_s", fk::default_clock_floor},
        {"omega43_hz", fk::default_omega43_hz},
        {"omega42_hz", fk::default_omega42_hz},
        {"r_policy", "table-default (literal 0.0024 at N=6, q=1e-3; Y^(N-1) elsewhere)"},
    };
    return m;
}

void write_manifest_file(const std::string& path, const json& manifest) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out)
        throw fk::data_error("cannot write manifest: " + path);
    out << manifest.dump(2) << "\n";
}

// Shared output plumbing: results go to stdout or --out; JSON embeds the
// manifest so every run is replayable from its own record.
struct Emitter {
    std::string format = "table";
    std::string out_path;
    std::string manifest_path;

    void deliver(const std::string& table_text, json body, const json& manifest) const {
        write_manifest_file(manifest_path, manifest);
        std::string payload;
        if (format == "json") {
            body["manifest"] = manifest;
            payload = body.dump(2) + "\n";
        } else {
            payload = table_text;
        }
        if (out_path.empty()) {
            std::cout << payload;
        } else {
            std::ofstream out(out_path);
            if (!out)
                throw fk::data_error("cannot write output: " + out_path);
            out << payload;
        }
    }
};

json params_to_json(const fk::DecayModelParams& p) {
    return {
        {"eta0", p.eta0},       {"tau_s_s", p.tau_s}, {"tau_bar_s", p.tau_bar},
        {"t0_s", p.t0},         {"A", p.A},           {"B", p.B},
        {"omega43_hz", p.omega43_hz}, {"omega42_hz", p.omega42_hz},
    };
}

fk::DecayModelParams params_from_json(const json& j) {
    const json& src = j.contains("params") ? j.at("params") : j;
    fk::DecayModelParams p;
    p.eta0 = src.at("eta0").get<double>();
    p.tau_s = src.at("tau_s_s").get<double>();
    p.tau_bar = src.at("tau_bar_s").get<double>();
    p.t0 = src.value("t0_s", 0.0);
    p.A = src.value("A", 0.0);
    p.B = src.value("B", 0.0);
    p.omega43_hz = src.value("omega43_hz", fk::default_omega43_hz);
    p.omega42_hz = src.value("omega42_hz", fk::default_omega42_hz);
    return p;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw fk::data_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw fk::data_error(path + ": " + e.what());
    }
    return j;
}

// ---------------------------------------------------------------- model ----

struct ModelArgs {
    std::string params_path;
    std::string eta0, tau_s, tau_bar, t0 = "0", a, b;
    std::string f43 = "28.82MHz", f42 = "51.77MHz";
    std::vector<std::string> t_points;
    std::string grid;
    bool envelope = false;
    bool derived = false;
    std::string coupling;
    std::string collection;
    Emitter emit;
};

int run_model(const ModelArgs& args) {
    json manifest = base_manifest("model");
    json params_m = json::object();
    json body = json::object();
    std::string table;

    const bool needs_params =
        !args.t_points.empty() || !args.grid.empty() || args.derived || args.envelope;

    if (!needs_params && args.coupling.empty() && args.collection.empty())
        throw std::invalid_argument(
            "model: nothing to do (give --t/--grid/--derived, --coupling, or --collection)");

    if (needs_params) {
        fk::DecayModelParams p;
        if (!args.params_path.empty())
            p = params_from_json(load_json_file(args.params_path));
        if (!args.eta0.empty()) p.eta0 = std::stod(args.eta0);
        if (!args.tau_s.empty()) p.tau_s = fk::parse_time(args.tau_s);
        if (!args.tau_bar.empty()) p.tau_bar = fk::parse_time(args.tau_bar);
        if (!args.t0.empty()) p.t0 = fk::parse_time(args.t0);
        if (!args.a.empty()) p.A = std::stod(args.a);
        if (!args.b.empty()) p.B = std::stod(args.b);
        p.omega43_hz = fk::parse_frequency(args.f43);
        p.omega42_hz = fk::parse_frequency(args.f42);
        fk::validate(p);
        params_m["model"] = params_to_json(p);
        body["params"] = params_to_json(p);

        if (args.derived) {
            const fk::EnvelopeTimes e = fk::derived_times(p.tau_s, p.tau_bar);
            body["derived_times"] = {{"tau_gamma_s", e.tau_gamma}, {"tau_sigma_s", e.tau_sigma}};
            table += "tau_gamma_s " + fmt("%.6g", e.tau_gamma) + "\n";
            table += "tau_sigma_s " + fmt("%.6g", e.tau_sigma) + "\n";
        }

        std::vector<double> times;
        for (const std::string& t : args.t_points) times.push_back(fk::parse_time(t));
        if (!args.grid.empty()) {
            const std::vector<std::string> parts = split(args.grid, ',');
            if (parts.size() != 3)
                throw std::invalid_argument("--grid expects start,stop,count");
            const double start = fk::parse_time(parts[0]);
            const double stop = fk::parse_time(parts[1]);
            const long n = std::stol(parts[2]);
            if (n < 2 || stop <= start)
                throw std::invalid_argument("--grid needs count >= 2 and stop > start");
            for (long i = 0; i < n; ++i)
                times.push_back(start + (stop - start) * static_cast<double>(i) / (n - 1));
        }
        if (!times.empty()) {
            json points = json::array();
            table += "t_s            eta\n";
            for (double t : times) {
                const double eta =
                    args.envelope ? fk::envelope_efficiency(p, t) : fk::efficiency_at(p, t);
                points.push_back({{"t_s", t}, {"eta", eta}});
                table += fmt("%-14.8g", t) + std::string(" ") + fmt("%.8g", eta) + "\n";
            }
            body["points"] = points;
            params_m["envelope_only"] = args.envelope;
        }
    }

    if (!args.coupling.empty()) {
        const std::vector<std::string> parts = split(args.coupling, ',');
        if (parts.size() != 3)
            throw std::invalid_argument("--coupling expects ratio,tau_p,gamma_od");
        const double ratio = std::stod(parts[0]);
        const double tau_p = fk::parse_time(parts[1]);
        const double god = fk::parse_frequency(parts[2]);
        const double c = fk::coupling_parameter(ratio, tau_p, god);
        body["coupling_parameter"] = c;
        table += "coupling_parameter " + fmt("%.6g", c) + "\n";
        if (c >= 1.0)
            table += "note: coupling estimate saturated (>= 1); treat as approaching unity\n";
        params_m["coupling"] = {{"omega_over_delta", ratio}, {"tau_p_s", tau_p}, {"gamma_od_hz", god}};
    }

    if (!args.collection.empty()) {
        const std::vector<std::string> parts = split(args.collection, ',');
        if (parts.size() != 2)
            throw std::invalid_argument("--collection expects na,demagnification");
        const double na = std::stod(parts[0]);
        const double demag = std::stod(parts[1]);
        const double zeta = fk::fluorescence_collection_fraction(na, demag);
        body["collection_fraction"] = zeta;
        table += "collection_fraction " + fmt("%.6g", zeta) + "\n";
        params_m["collection"] = {{"na", na}, {"demag", demag}};
    }

    manifest["parameters"] = params_m;
    args.emit.deliver(table, body, manifest);
    return 0;
}

// ----------------------------------------------------------------- rate ----

struct RateArgs {
    int n = 6;
    double q = 1e-3;
    std::string tau_c;
    double eta0 = 0.0;
    double f = 0.0;
    std::string policy = "default";
    double r_value = 0.0;
    bool r_value_given = false;
    Emitter emit;
};

fk::RPolicy resolve_policy(const std::string& name, bool value_given, double value) {
    if (name == "default") return fk::RPolicy{};
    if (name == "as-stated") return fk::RPolicy::as_stated();
    if (name == "table-consistent") return fk::RPolicy::table_consistent();
    if (name == "literal") {
        if (!value_given)
            throw std::invalid_argument("--r-policy literal requires --r-value");
        return fk::RPolicy::literal(value);
    }
    throw std::invalid_argument("unknown R policy '" + name + "'");
}

int run_rate(const RateArgs& args) {
    fk::SyncParams p;
    p.n_sources = args.n;
    p.q = args.q;
    p.tau_c = fk::parse_time(args.tau_c);
    p.eta0 = args.eta0;
    p.f = args.f;
    p.r_policy = resolve_policy(args.policy, args.r_value_given, args.r_value);

    const fk::RateResult r = fk::n_photon_rate(p);

    json manifest = base_manifest("rate");
    manifest["parameters"] = {
        {"n", p.n_sources}, {"q", p.q},   {"tau_c_s", p.tau_c},
        {"eta0", p.eta0},   {"f", p.f},   {"r_policy", args.policy},
    };
    if (args.r_value_given) manifest["parameters"]["r_value"] = args.r_value;

    json body = {
        {"rate_hz", r.rate_hz},   {"rate_per_min", r.rate_per_min},
        {"enhancement", r.enhancement}, {"b", r.b}, {"R", r.R}, {"Y", r.Y},
    };
    std::string table;
    table += "rate_hz      " + fmt("%.6g", r.rate_hz) + "\n";
    table += "rate_per_min " + fmt("%.6g", r.rate_per_min) + "\n";
    table += "enhancement  " + fmt("%.6g", r.enhancement) + "\n";
    table += "b            " + fmt("%.6g", r.b) + "\n";
    table += "R            " + fmt("%.6g", r.R) + "\n";
    table += "Y            " + fmt("%.6g", r.Y) + "\n";
    args.emit.deliver(table, body, manifest);
    return 0;
}

// ------------------------------------------------------------------ fit ----

struct FitArgs {
    std::string data_path;
    std::string init_path;
    std::string f43 = "28.82MHz", f42 = "51.77MHz";
    Emitter emit;
};

int run_fit(const FitArgs& args) {
    const std::vector<fk::DecaySample> samples = fk::load_samples_csv(args.data_path);
    std::optional<fk::DecayModelParams> init;
    if (!args.init_path.empty())
        init = params_from_json(load_json_file(args.init_path));

    const double w43 = fk::parse_frequency(args.f43);
    const double w42 = fk::parse_frequency(args.f42);
    const fk::FitResult r = fk::fit_decay(samples, w43, w42, init);

    json manifest = base_manifest("fit");
    manifest["parameters"] = {
        {"data", args.data_path},
        {"n_samples", samples.size()},
        {"omega43_hz", w43},
        {"omega42_hz", w42},
        {"init", args.init_path.empty() ? json("default heuristic") : json(args.init_path)},
    };

    json body = {
        {"params", params_to_json(r.params)},
        {"stderrs",
         {{"eta0", r.stderrs[0]},
          {"tau_s_s", r.stderrs[1]},
          {"tau_bar_s", r.stderrs[2]},
          {"t0_s", r.stderrs[3]},
          {"A", r.stderrs[4]},
          {"B", r.stderrs[5]}}},
        {"residual_norm", r.residual_norm},
        {"converged", r.converged},
        {"iterations", r.iterations},
        {"singular", r.singular},
        {"params_valid", r.params_valid},
    };

    const fk::DecayModelParams& p = r.params;
    std::string table;
    table += "eta0      " + fmt("%.8g", p.eta0) + " +- " + fmt("%.3g", r.stderrs[0]) + "\n";
    table += "tau_s_s   " + fmt("%.8g", p.tau_s) + " +- " + fmt("%.3g", r.stderrs[1]) + "\n";
    table += "tau_bar_s " + fmt("%.8g", p.tau_bar) + " +- " + fmt("%.3g", r.stderrs[2]) + "\n";
    table += "t0_s      " + fmt("%.8g", p.t0) + " +- " + fmt("%.3g", r.stderrs[3]) + "\n";
    table += "A         " + fmt("%.8g", p.A) + " +- " + fmt("%.3g", r.stderrs[4]) + "\n";
    table += "B         " + fmt("%.8g", p.B) + " +- " + fmt("%.3g", r.stderrs[5]) + "\n";
    table += "residual_norm " + fmt("%.6g", r.residual_norm) + "\n";
    table += std::string("converged ") + (r.converged ? "yes" : "NO") + " in "
             + std::to_string(r.iterations) + " iterations\n";
    if (r.singular) table += "warning: singular curvature at optimum; uncertainties unreliable\n";
    args.emit.deliver(table, body, manifest);

    if (!r.converged)
        throw fk::numeric_error("fit did not converge within the iteration cap");
    return 0;
}

// ------------------------------------------------------------- simulate ----

struct SimulateArgs {
    int n = 2;
    double q = 0.0;
    double b = -1.0;
    double f = -1.0;
    double eta0 = 1.0;
    std::uint64_t cycles = 0;
    std::uint64_t seed = 12345;
    int replicas = 1;
    bool keep = false;
    Emitter emit;
};

int run_simulate(const SimulateArgs& args) {
    if ((args.b < 0.0) == (args.f < 0.0))
        throw std::invalid_argument("give exactly one of --b or --f");
    fk::SimConfig cfg;
    cfg.n_sources = args.n;
    cfg.q = args.q;
    cfg.b = args.b >= 0.0 ? args.b : fk::loss_prob_b(args.f);
    cfg.eta0 = args.eta0;
    cfg.n_cycles = args.cycles;
    cfg.seed = args.seed;
    cfg.replicas = args.replicas;
    cfg.keep_unretrieved = args.keep;

    const fk::SimResult r = fk::simulate(cfg);

    json manifest = base_manifest("simulate");
    manifest["parameters"] = {
        {"n", cfg.n_sources},       {"q", cfg.q},
        {"b", cfg.b},               {"eta0", cfg.eta0},
        {"cycles", cfg.n_cycles},   {"replicas", cfg.replicas},
        {"keep_unretrieved", cfg.keep_unretrieved},
    };
    if (args.f >= 0.0) manifest["parameters"]["f"] = args.f;
    manifest["seed"] = cfg.seed;

    json body = {
        {"config",
         {{"n", cfg.n_sources},
          {"q", cfg.q},
          {"b", cfg.b},
          {"eta0", cfg.eta0},
          {"cycles", cfg.n_cycles},
          {"seed", cfg.seed},
          {"replicas", cfg.replicas},
          {"keep_unretrieved", cfg.keep_unretrieved}}},
        {"n_successes", r.n_successes},
        {"n_readout_attempts", r.n_readout_attempts},
        {"cycles_elapsed", r.cycles_elapsed},
        {"rate_per_cycle", r.rate_per_cycle},
        {"ci95", r.ci95},
        {"unit_availability", r.unit_availability},
    };
    std::string table;
    table += "successes         " + std::to_string(r.n_successes) + "\n";
    table += "readout_attempts  " + std::to_string(r.n_readout_attempts) + "\n";
    table += "cycles_elapsed    " + std::to_string(r.cycles_elapsed) + "\n";
    table += "rate_per_cycle    " + fmt("%.8g", r.rate_per_cycle) + "\n";
    table += "ci95              " + fmt("%.3g", r.ci95) + "\n";
    table += "unit_availability " + fmt("%.6g", r.unit_availability) + "\n";
    args.emit.deliver(table, body, manifest);
    return 0;
}

// ---------------------------------------------------------------- bench ----

struct BenchArgs {
    std::string dataset;
    std::string sort;
    std::string plot_prefix;
    Emitter emit;
};

int run_bench(const BenchArgs& args) {
    const std::string path = args.dataset.empty() ? fk::bundled_dataset_path() : args.dataset;
    const std::vector<fk::MemoryRecord> records = fk::load_dataset(path);
    const fk::SyncParams tmpl = fk::default_sync_template();

    std::vector<fk::DerivedMetrics> metrics;
    metrics.reserve(records.size());
    for (const fk::MemoryRecord& r : records) metrics.push_back(fk::derive(r, tmpl));

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (!args.sort.empty()) {
        fk::SortKey key;
        if (args.sort == "r6") key = fk::SortKey::r6;
        else if (args.sort == "mu1") key = fk::SortKey::mu1;
        else if (args.sort == "fe") key = fk::SortKey::fe;
        else throw std::invalid_argument("--sort must be one of r6, mu1, fe");
        order = fk::rank(metrics, key);
    }

    json manifest = base_manifest("bench");
    manifest["parameters"] = {
        {"dataset", path},
        {"sort", args.sort.empty() ? "input-order" : args.sort},
        {"n_records", records.size()},
    };

    std::string table;
    json rows = json::array();
    {
        char buf[240];
        std::snprintf(buf, sizeof buf, "%-24s %10s %9s %10s %10s %10s %12s\n", "label",
                      "tau_c_s", "eta0", "f_prime", "fpe", "mu1", "r6_per_min");
        table += buf;
        for (std::size_t idx : order) {
            const fk::MemoryRecord& r = records[idx];
            const fk::DerivedMetrics& m = metrics[idx];
            std::snprintf(buf, sizeof buf, "%-24s %10.3g %9.3g %10.4g %10.3g %10.3g %12.3g%s\n",
                          r.label.c_str(), m.tau_c, m.eta0, m.f_prime, m.f_prime_e, m.mu1,
                          m.r6_per_min, r.t_setup_not_given() ? " *" : "");
            table += buf;
            rows.push_back({
                {"label", r.label},
                {"tau_c_s", m.tau_c},
                {"eta0", m.eta0},
                {"f_prime", m.f_prime},
                {"f_prime_e", m.f_prime_e},
                {"mu1", m.mu1},
                {"r6_per_min", m.r6_per_min},
                {"t_setup_upper_bound", r.t_setup_not_given()},
            });
        }
        table += "* setup transmission not given; eta0 is an upper bound\n";
    }

    if (args.emit.format == "csv") {
        std::string csv =
            "label,tau_c_s,eta0,f_prime,f_prime_e,mu1,r6_per_min,t_setup_upper_bound\n";
        for (std::size_t idx : order) {
            const fk::MemoryRecord& r = records[idx];
            const fk::DerivedMetrics& m = metrics[idx];
            csv += r.label.find(',') == std::string::npos ? r.label : "\"" + r.label + "\"";
            csv += "," + fk::format_si(m.tau_c) + "," + fk::format_si(m.eta0) + ","
                   + fk::format_si(m.f_prime) + "," + fk::format_si(m.f_prime_e) + ","
                   + fk::format_si(m.mu1) + "," + fk::format_si(m.r6_per_min) + ","
                   + (r.t_setup_not_given() ? "true" : "false") + "\n";
        }
        table = csv;  // csv replaces the human table on both stdout and --out
    }

    json body = {{"dataset", path}, {"rows", rows}};
    args.emit.deliver(table, body, manifest);

    if (!args.plot_prefix.empty()) {
        std::vector<fk::MemoryRecord> ordered_r;
        std::vector<fk::DerivedMetrics> ordered_m;
        for (std::size_t idx : order) {
            ordered_r.push_back(records[idx]);
            ordered_m.push_back(metrics[idx]);
        }
        fk::emit_plot_data(ordered_r, ordered_m, args.plot_prefix + ".txt",
                           args.plot_prefix + ".json");
        std::cerr << "plot data written to " << args.plot_prefix << ".txt and "
                  << args.plot_prefix << ".json\n";
    }
    return 0;
}

// --------------------------------------------------------------- budget ----

struct BudgetArgs {
    std::string rates;
    std::string labels;
    Emitter emit;
};

int run_budget(const BudgetArgs& args) {
    const std::vector<std::string> rate_cells = split(args.rates, ',');
    std::vector<std::string> label_cells;
    if (!args.labels.empty()) {
        label_cells = split(args.labels, ',');
        if (label_cells.size() != rate_cells.size())
            throw std::invalid_argument("--labels must match --rates in count");
    }

    fk::RateBudget budget;
    for (std::size_t i = 0; i < rate_cells.size(); ++i) {
        const std::string label =
            i < label_cells.size() ? label_cells[i] : "channel " + std::to_string(i + 1);
        budget.components.emplace_back(label, fk::parse_frequency(rate_cells[i]));
    }
    const double lifetime = fk::lifetime_budget(budget);

    json manifest = base_manifest("budget");
    json comps = json::array();
    std::string table;
    double total = 0.0;
    for (const auto& [label, rate_hz] : budget.components) {
        comps.push_back({{"label", label}, {"rate_hz", rate_hz}});
        table += label + "  " + fmt("%.6g", rate_hz) + " Hz\n";
        total += rate_hz;
    }
    manifest["parameters"] = {{"components", comps}};
    table += "total_rate_hz " + fmt("%.6g", total) + "\n";
    table += "lifetime_s    " + fmt("%.6g", lifetime) + "\n";
    table += "lifetime_ns   " + fmt("%.4f", lifetime * 1e9) + "\n";

    json body = {{"components", comps}, {"total_rate_hz", total}, {"lifetime_s", lifetime}};
    args.emit.deliver(table, body, manifest);
    return 0;
}

void add_emitter_flags(CLI::App* cmd, Emitter& e, bool with_csv = false) {
    const std::string choices = with_csv ? "table,json,csv" : "table,json";
    cmd->add_option("--format", e.format, "output format (" + choices + ")")
        ->check(with_csv ? CLI::IsMember({"table", "json", "csv"})
                         : CLI::IsMember({"table", "json"}));
    cmd->add_option("--out", e.out_path, "write results to a file instead of stdout");
    cmd->add_option("--manifest", e.manifest_path, "also write the run manifest to this file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flamekit: fast-ladder-memory decay modeling, fitting, "
                 "synchronization rates, simulation, and benchmarks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FLAMEKIT_VERSION);
    app.failure_message(CLI::FailureMessage::simple);

    ModelArgs model;
    CLI::App* cmd_model = app.add_subcommand("model", "evaluate the efficiency-decay model");
    cmd_model->add_option("--params", model.params_path, "JSON file with model parameters");
    cmd_model->add_option("--eta0", model.eta0, "external efficiency at t0");
    cmd_model->add_option("--tau-s", model.tau_s, "1/e lifetime, e.g. 86ns");
    cmd_model->add_option("--tau-bar", model.tau_bar, "complementary envelope time, e.g. 101ns");
    cmd_model->add_option("--t0", model.t0, "storage reference time (default 0)");
    cmd_model->add_option("--A", model.a, "beat amplitude A");
    cmd_model->add_option("--B", model.b, "beat amplitude B");
    cmd_model->add_option("--f43", model.f43, "beat frequency (default 28.82MHz)");
    cmd_model->add_option("--f42", model.f42, "beat frequency (default 51.77MHz)");
    cmd_model->add_option("--t", model.t_points, "evaluation time (repeatable)");
    cmd_model->add_option("--grid", model.grid, "time grid start,stop,count");
    cmd_model->add_flag("--envelope", model.envelope, "evaluate the beat-free envelope");
    cmd_model->add_flag("--derived", model.derived, "print tau_gamma and tau_sigma");
    cmd_model->add_option("--coupling", model.coupling,
                          "coupling parameter from ratio,tau_p,gamma_od (e.g. 0.36,1.7ns,5GHz)");
    cmd_model->add_option("--collection", model.collection,
                          "fluorescence collection fraction from na,demagnification");
    add_emitter_flags(cmd_model, model.emit);

    RateArgs rate;
    CLI::App* cmd_rate = app.add_subcommand("rate", "analytic N-photon synchronization rate");
    cmd_rate->add_option("--n", rate.n, "number of sources");
    cmd_rate->add_option("--q", rate.q, "pair-emission probability per cycle");
    cmd_rate->add_option("--tau-c", rate.tau_c, "clock cycle, e.g. 1.7ns")->required();
    cmd_rate->add_option("--eta0", rate.eta0, "short-time external efficiency")->required();
    cmd_rate->add_option("--f", rate.f, "fractional delay in clock cycles")->required();
    cmd_rate->add_option("--r-policy", rate.policy,
                         "R policy: default, as-stated, table-consistent, literal");
    CLI::Option* rv = cmd_rate->add_option("--r-value", rate.r_value, "literal R value");
    add_emitter_flags(cmd_rate, rate.emit);

    FitArgs fit;
    CLI::App* cmd_fit = app.add_subcommand("fit", "fit the decay model to samples");
    cmd_fit->add_option("--data", fit.data_path, "CSV with header t_s,eta[,sigma]")->required();
    cmd_fit->add_option("--init", fit.init_path, "JSON file with the initial guess");
    cmd_fit->add_option("--f43", fit.f43, "fixed beat frequency (default 28.82MHz)");
    cmd_fit->add_option("--f42", fit.f42, "fixed beat frequency (default 51.77MHz)");
    add_emitter_flags(cmd_fit, fit.emit);

    SimulateArgs sim;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "Monte-Carlo synchronization simulation");
    cmd_sim->add_option("--n", sim.n, "number of source-memory units")->required();
    cmd_sim->add_option("--q", sim.q, "per-cycle emission probability")->required();
    cmd_sim->add_option("--b", sim.b, "per-cycle loss probability");
    cmd_sim->add_option("--f", sim.f, "fractional delay (mapped to b = 1 - exp(-1/f))");
    cmd_sim->add_option("--cycles", sim.cycles, "clock cycles per replica")->required();
    cmd_sim->add_option("--eta0", sim.eta0, "retrieval probability per unit");
    cmd_sim->add_option("--seed", sim.seed, "RNG seed");
    cmd_sim->add_option("--replicas", sim.replicas, "independent replicas");
    cmd_sim->add_flag("--keep-unretrieved", sim.keep,
                      "keep photons that fail to retrieve at a readout attempt");
    add_emitter_flags(cmd_sim, sim.emit);

    BenchArgs bench;
    CLI::App* cmd_bench = app.add_subcommand("bench", "derived metrics for the survey dataset");
    cmd_bench->add_option("--dataset", bench.dataset,
                          "dataset CSV (default: bundled; FLAMEKIT_DATASET overrides)");
    cmd_bench->add_option("--sort", bench.sort, "rank rows by r6, mu1, or fe");
    cmd_bench->add_option("--plot", bench.plot_prefix,
                          "write plot data to <prefix>.txt and <prefix>.json");
    add_emitter_flags(cmd_bench, bench.emit, /*with_csv=*/true);

    BudgetArgs budget;
    CLI::App* cmd_budget = app.add_subcommand("budget", "lifetime from summed dephasing rates");
    cmd_budget->add_option("--rates", budget.rates, "comma-separated cyclic rates, e.g. 1.22MHz,0.34MHz")
        ->required();
    cmd_budget->add_option("--labels", budget.labels, "comma-separated channel labels");
    add_emitter_flags(cmd_budget, budget.emit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    rate.r_value_given = rv->count() > 0;

    try {
        if (cmd_model->parsed()) return run_model(model);
        if (cmd_rate->parsed()) return run_rate(rate);
        if (cmd_fit->parsed()) return run_fit(fit);
        if (cmd_sim->parsed()) return run_simulate(sim);
        if (cmd_bench->parsed()) return run_bench(bench);
        if (cmd_budget->parsed()) return run_budget(budget);
    } catch (const fk::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const fk::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
