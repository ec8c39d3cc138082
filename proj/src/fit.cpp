#include "flamekit/fit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "flamekit/errors.hpp"
#include "flamekit/rng.hpp"

namespace flamekit {

namespace {

constexpr int kN = 6;  // free parameters: eta0, ln tau_s, ln tau_bar, t0, A, B
using Vec6 = std::array<double, kN>;
using Mat6 = std::array<std::array<double, kN>, kN>;

constexpr std::uint64_t kSynthPurpose = 0x5e7;

// Internal coordinates: lifetimes in log space so positivity needs no
// constraint machinery.
Vec6 pack(const DecayModelParams& p) {
    return {p.eta0, std::log(p.tau_s), std::log(p.tau_bar), p.t0, p.A, p.B};
}

DecayModelParams unpack(const Vec6& z, double w43, double w42) {
    DecayModelParams p;
    p.eta0 = z[0];
    p.tau_s = std::exp(z[1]);
    p.tau_bar = std::exp(z[2]);
    p.t0 = z[3];
    p.A = z[4];
    p.B = z[5];
    p.omega43_hz = w43;
    p.omega42_hz = w42;
    return p;
}

void clamp_to_box(Vec6& z, const FitBounds& b) {
    z[0] = std::clamp(z[0], b.eta0_lo, b.eta0_hi);
    // Keep log-lifetimes inside a generous sane range (1e-18 s .. 1e6 s).
    z[1] = std::clamp(z[1], std::log(1e-18), std::log(1e6));
    z[2] = std::clamp(z[2], std::log(1e-18), std::log(1e6));
    z[4] = std::clamp(z[4], b.ab_lo, b.ab_hi);
    z[5] = std::clamp(z[5], b.ab_lo, b.ab_hi);
}

double weight_of(const DecaySample& s) {
    if (s.sigma) {
        if (!(*s.sigma > 0.0))
            throw std::invalid_argument("sample sigma must be positive");
        return 1.0 / *s.sigma;
    }
    return 1.0;
}

void weighted_residuals(const DecayModelParams& p, const std::vector<DecaySample>& samples,
                        std::vector<double>& out) {
    out.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out[i] = weight_of(samples[i]) * (detail::efficiency_unchecked(p, samples[i].t) - samples[i].eta);
}

double cost_of(const std::vector<double>& r) {
    double c = 0.0;
    for (double v : r) c += v * v;
    return c;
}

// Cholesky solve of (M) x = rhs for a symmetric positive definite M.
// Returns false if M is not positive definite.
bool cholesky_solve(Mat6 M, Vec6 rhs, Vec6& x) {
    for (int i = 0; i < kN; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = M[i][j];
            for (int k = 0; k < j; ++k) s -= M[i][k] * M[j][k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                M[i][i] = std::sqrt(s);
            } else {
                M[i][j] = s / M[j][j];
            }
        }
    }
    for (int i = 0; i < kN; ++i) {  // forward substitution
        double s = rhs[i];
        for (int k = 0; k < i; ++k) s -= M[i][k] * x[k];
        x[i] = s / M[i][i];
    }
    for (int i = kN - 1; i >= 0; --i) {  // back substitution
        double s = x[i];
        for (int k = i + 1; k < kN; ++k) s -= M[k][i] * x[k];
        x[i] = s / M[i][i];
    }
    return true;
}

// Full inverse via Cholesky; false if not positive definite.
bool cholesky_inverse(const Mat6& M, Mat6& inv) {
    for (int j = 0; j < kN; ++j) {
        Vec6 e{};
        e[j] = 1.0;
        Vec6 col;
        if (!cholesky_solve(M, e, col)) return false;
        for (int i = 0; i < kN; ++i) inv[i][j] = col[i];
    }
    return true;
}

double time_span(const std::vector<DecaySample>& samples) {
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                        [](const DecaySample& a, const DecaySample& b) { return a.t < b.t; });
    return hi->t - lo->t;
}

// Finite-difference Jacobian of the weighted residual vector in internal
// coordinates; relative step 1e-6, with t0 stepped relative to the data span
// so the fit is invariant under time-axis shifts.
void jacobian(const Vec6& z, double w43, double w42, const std::vector<DecaySample>& samples,
              double span, const std::vector<double>& r0, std::vector<std::vector<double>>& J) {
    const Vec6 scale = {1.0, 1.0, 1.0, span, 1.0, 1.0};
    std::vector<double> r1;
    J.assign(kN, {});
    for (int j = 0; j < kN; ++j) {
        const double h = 1e-6 * std::max(std::abs(z[j]), scale[j]);
        Vec6 zj = z;
        zj[j] += h;
        weighted_residuals(unpack(zj, w43, w42), samples, r1);
        J[j].resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            J[j][i] = (r1[i] - r0[i]) / h;
    }
}

// Jacobian with respect to the original parameters (eta0, tau_s, tau_bar,
// t0, A, B) at a point, for the covariance estimate.
void jacobian_original(const DecayModelParams& p, const std::vector<DecaySample>& samples,
                       double span, std::vector<std::vector<double>>& J) {
    const std::array<double, kN> base = {p.eta0, p.tau_s, p.tau_bar, p.t0, p.A, p.B};
    const std::array<double, kN> scale = {1.0, p.tau_s, p.tau_bar, span, 1.0, 1.0};
    std::vector<double> r0, r1;
    weighted_residuals(p, samples, r0);
    J.assign(kN, {});
    for (int j = 0; j < kN; ++j) {
        const double h = 1e-6 * std::max(std::abs(base[j]), std::abs(scale[j]));
        DecayModelParams pj = p;
        switch (j) {
            case 0: pj.eta0 += h; break;
            case 1: pj.tau_s += h; break;
            case 2: pj.tau_bar += h; break;
            case 3: pj.t0 += h; break;
            case 4: pj.A += h; break;
            case 5: pj.B += h; break;
        }
        weighted_residuals(pj, samples, r1);
        J[j].resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            J[j][i] = (r1[i] - r0[i]) / h;
    }
}

}  // namespace

std::vector<DecaySample> generate_synthetic(const DecayModelParams& p,
                                            const std::vector<double>& times,
                                            double noise_sigma, std::uint64_t seed) {
    validate(p);
    if (noise_sigma < 0.0)
        throw std::invalid_argument("noise_sigma must be non-negative");
    std::vector<DecaySample> out;
    out.reserve(times.size());
    const StreamKey base = fork(fork(stream(seed), 0), kSynthPurpose);
    std::optional<double> sigma;
    if (noise_sigma > 0.0) sigma = noise_sigma;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double clean = detail::efficiency_unchecked(p, times[i]);
        const double noisy = clean + noise_sigma * gauss(fork(base, i));
        out.push_back({times[i], std::max(0.0, noisy), sigma});
    }
    return out;
}

std::vector<double> residuals(const DecayModelParams& p, const std::vector<DecaySample>& samples) {
    validate(p);
    std::vector<double> r;
    weighted_residuals(p, samples, r);
    return r;
}

DecayModelParams default_initial_guess(const std::vector<DecaySample>& samples,
                                       double omega43_hz, double omega42_hz) {
    if (samples.size() < 2)
        throw std::invalid_argument("need at least two samples for an initial guess");

    std::vector<DecaySample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(),
              [](const DecaySample& a, const DecaySample& b) { return a.t < b.t; });

    std::size_t peak = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].eta > sorted[peak].eta) peak = i;
    const double eta0 = std::clamp(sorted[peak].eta, 1e-6, 1.0);
    const double t0 = sorted[peak].t;

    // Moving average, window 5, clamped at the edges.
    auto smoothed = [&](std::size_t i) {
        const std::size_t lo = i >= 2 ? i - 2 : 0;
        const std::size_t hi = std::min(i + 2, sorted.size() - 1);
        double s = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) s += sorted[k].eta;
        return s / static_cast<double>(hi - lo + 1);
    };

    const double target = eta0 / std::numbers::e;
    double tau_s = 0.0;
    for (std::size_t i = peak + 1; i < sorted.size(); ++i) {
        const double cur = smoothed(i);
        if (cur <= target) {
            const double prev = smoothed(i - 1);
            double tc = sorted[i].t;
            if (prev > cur)  // linear interpolation between the straddling points
                tc = sorted[i - 1].t + (prev - target) / (prev - cur) * (sorted[i].t - sorted[i - 1].t);
            tau_s = tc - t0;
            break;
        }
    }
    const double span = sorted.back().t - sorted.front().t;
    if (!(tau_s > 0.0)) tau_s = span > 0.0 ? span / 3.0 : 1e-9;

    DecayModelParams p;
    p.eta0 = eta0;
    p.tau_s = tau_s;
    p.tau_bar = 2.0 * tau_s;
    p.t0 = t0;
    p.A = 0.1;
    p.B = 0.01;
    p.omega43_hz = omega43_hz;
    p.omega42_hz = omega42_hz;
    return p;
}

FitResult fit_decay(const std::vector<DecaySample>& samples, double omega43_hz,
                    double omega42_hz, const std::optional<DecayModelParams>& init,
                    const FitBounds& bounds) {
    if (samples.size() < kN + 1)
        throw std::invalid_argument("need at least 7 samples to fit 6 parameters");
    const double span = time_span(samples);
    if (!(span > 0.0))
        throw std::invalid_argument("sample times must not all be equal");

    DecayModelParams start = init ? *init : default_initial_guess(samples, omega43_hz, omega42_hz);
    start.omega43_hz = omega43_hz;  // beat frequencies are fixed, never fitted
    start.omega42_hz = omega42_hz;

    Vec6 z = pack(start);
    clamp_to_box(z, bounds);

    std::vector<double> r, r_try;
    weighted_residuals(unpack(z, omega43_hz, omega42_hz), samples, r);
    double cost = cost_of(r);

    std::vector<std::vector<double>> J;
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    for (iter = 1; iter <= 500; ++iter) {
        jacobian(z, omega43_hz, omega42_hz, samples, span, r, J);

        Mat6 H{};
        Vec6 g{};
        for (int a = 0; a < kN; ++a) {
            for (int b = a; b < kN; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < r.size(); ++i) s += J[a][i] * J[b][i];
                H[a][b] = H[b][a] = s;
            }
            double s = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) s += J[a][i] * r[i];
            g[a] = s;
        }
        double max_diag = 0.0;
        for (int a = 0; a < kN; ++a) max_diag = std::max(max_diag, H[a][a]);
        if (!(max_diag > 0.0)) max_diag = 1.0;

        bool accepted = false;
        double step_size = 0.0, cost_new = cost;
        while (lambda <= 1e12) {
            Mat6 M = H;
            for (int a = 0; a < kN; ++a)
                M[a][a] += lambda * std::max(H[a][a], 1e-12 * max_diag);
            Vec6 neg_g, delta;
            for (int a = 0; a < kN; ++a) neg_g[a] = -g[a];
            if (!cholesky_solve(M, neg_g, delta)) {
                lambda *= 10.0;
                continue;
            }
            Vec6 z_try = z;
            for (int a = 0; a < kN; ++a) z_try[a] += delta[a];
            clamp_to_box(z_try, bounds);
            weighted_residuals(unpack(z_try, omega43_hz, omega42_hz), samples, r_try);
            const double c_try = cost_of(r_try);
            if (std::isfinite(c_try) && c_try <= cost) {
                step_size = 0.0;
                for (int a = 0; a < kN; ++a)
                    step_size = std::max(step_size, std::abs(z_try[a] - z[a]) / std::max(1.0, std::abs(z[a])));
                z = z_try;
                r.swap(r_try);
                cost_new = c_try;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) break;  // no downhill step found at any damping

        const double rel_drop = (cost - cost_new) / std::max(cost, std::numeric_limits<double>::min());
        cost = cost_new;
        if (step_size < 1e-10 || rel_drop < 1e-12) {
            converged = true;
            break;
        }
    }

    FitResult res;
    res.params = unpack(z, omega43_hz, omega42_hz);
    res.residual_norm = std::sqrt(cost);
    res.converged = converged;
    res.iterations = std::min(iter, 500);
    try {
        validate(res.params);
        res.params_valid = true;
    } catch (const std::exception&) {
        res.params_valid = false;
    }

    // Covariance from the curvature with respect to the original parameters.
    // With per-sample sigmas the weighted residuals are already unit
    // variance; otherwise scale by the usual variance estimate RSS/(m - n).
    jacobian_original(res.params, samples, span, J);
    Mat6 H{};
    for (int a = 0; a < kN; ++a)
        for (int b = a; b < kN; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) s += J[a][i] * J[b][i];
            H[a][b] = H[b][a] = s;
        }
    bool any_sigma = false;
    for (const DecaySample& s : samples) any_sigma = any_sigma || s.sigma.has_value();
    const double dof = static_cast<double>(samples.size()) - kN;
    const double s2 = any_sigma ? 1.0 : cost / dof;

    Mat6 cov;
    if (!cholesky_inverse(H, cov)) {
        res.singular = true;
        double max_diag = 0.0;
        for (int a = 0; a < kN; ++a) max_diag = std::max(max_diag, H[a][a]);
        Mat6 ridged = H;
        for (int a = 0; a < kN; ++a)
            ridged[a][a] += std::max(1e-12 * max_diag, 1e-300);
        if (!cholesky_inverse(ridged, cov)) {
            res.stderrs.fill(std::numeric_limits<double>::infinity());
            return res;
        }
    }
    for (int a = 0; a < kN; ++a)
        res.stderrs[a] = std::sqrt(std::max(0.0, cov[a][a] * s2));
    return res;
}

std::vector<DecaySample> load_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open sample file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw data_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    bool has_sigma_col;
    if (line == "t_s,eta,sigma") {
        has_sigma_col = true;
    } else if (line == "t_s,eta") {
        has_sigma_col = false;
    } else {
        throw data_error(path + ": expected header 't_s,eta[,sigma]', got '" + line + "'");
    }

    std::vector<DecaySample> out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2 || cells.size() > (has_sigma_col ? 3u : 2u))
            throw data_error(path + ": row " + std::to_string(row) + ": wrong field count");
        auto strict_stod = [&](const std::string& text) {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
            if (used != text.size())
                throw data_error(path + ": row " + std::to_string(row) + ": bad number '" + text + "'");
            return v;
        };
        try {
            DecaySample s;
            s.t = strict_stod(cells[0]);
            s.eta = strict_stod(cells[1]);
            if (cells.size() == 3 && !cells[2].empty()) s.sigma = strict_stod(cells[2]);
            if (s.eta < 0.0)
                throw data_error(path + ": row " + std::to_string(row) + ": eta must be non-negative");
            if (s.sigma && !(*s.sigma > 0.0))
                throw data_error(path + ": row " + std::to_string(row) + ": sigma must be positive");
            out.push_back(s);
        } catch (const data_error&) {
            throw;
        } catch (const std::exception&) {
            throw data_error(path + ": row " + std::to_string(row) + ": cannot parse '" + line + "'");
        }
    }
    return out;
}

void save_samples_csv(const std::string& path, const std::vector<DecaySample>& samples) {
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot write sample file: " + path);
    bool any_sigma = false;
    for (const DecaySample& s : samples) any_sigma = any_sigma || s.sigma.has_value();
    out << (any_sigma ? "t_s,eta,sigma\n" : "t_s,eta\n");
    char buf[96];
    for (const DecaySample& s : samples) {
        if (any_sigma && s.sigma)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t, s.eta, *s.sigma);
        else if (any_sigma)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,\n", s.t, s.eta);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.t, s.eta);
        out << buf;
    }
    if (!out)
        throw data_error("write failed: " + path);
}

}  // namespace flamekit
