#pragma once

// Monte-Carlo harness: single protocol runs, parameter sweeps over mu or N,
// and replication of the published experimental table.
//
// Every trial draws from its own generator seeded by
// derive_seed(master, axis value, trial index), so results do not depend on
// the number of worker threads or on scheduling order.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "npqv/errors.hpp"
#include "npqv/photonics.hpp"
#include "npqv/protocol.hpp"
#include "npqv/rng.hpp"
#include "npqv/satgen.hpp"

namespace npqv {

enum class TrialMode { Instance, AssignmentLevel };

inline const char* to_string(TrialMode m) {
    return m == TrialMode::Instance ? "instance" : "assignment";
}

inline TrialMode trial_mode_from_string(const std::string& s) {
    if (s == "instance") return TrialMode::Instance;
    if (s == "assignment") return TrialMode::AssignmentLevel;
    throw InputError("unknown mode '" + s + "' (expected instance or assignment)");
}

struct RunReport {
    std::string role = "honest";
    std::string mode = "assignment";
    std::size_t n = 0;
    std::size_t m = 0;
    double nu = 0.0;
    double mu = 0.0;
    double delta = 0.0;
    std::size_t total_single_clicks = 0;
    std::size_t correct_clicks = 0;
    std::size_t double_clicks = 0;
    std::size_t missing_bits = 0;
    double threshold = 0.0;
    std::size_t satisfied_clauses = 0;
    bool verdict = false;
    double completeness_lb = 0.0;
    double soundness_ub = 1.0;
    double gap = -1.0;
    double log2_classical_ops = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

// Expected satisfied-clause count from measured click tallies, as used when
// no concrete instance is materialized: rates c/n, (s-c)/n and dc/n stand in
// for p_c, p_w and p_dc.
inline ClickProbabilities rates_from_counts(std::size_t n, std::size_t single, std::size_t correct, std::size_t dbl) {
    if (n == 0 || correct > single || single + dbl > n) {
        throw InputError("inconsistent click counts");
    }
    const double nd = static_cast<double>(n);
    ClickProbabilities p;
    p.p_c = static_cast<double>(correct) / nd;
    p.p_w = static_cast<double>(single - correct) / nd;
    p.p_dc = static_cast<double>(dbl) / nd;
    p.p_h = p.p_c + p.p_w + p.p_dc;
    p.p_none = 1.0 - p.p_h;
    return p;
}

inline double expected_satisfied_from_counts(std::size_t n, std::size_t m, std::size_t single, std::size_t correct,
                                             std::size_t dbl) {
    return static_cast<double>(m) * p_yes(rates_from_counts(n, single, correct, dbl));
}

inline std::size_t satisfied_from_counts(std::size_t n, std::size_t m, std::size_t single, std::size_t correct,
                                         std::size_t dbl) {
    return static_cast<std::size_t>(std::llround(expected_satisfied_from_counts(n, m, single, correct, dbl)));
}

// One honest protocol run. Instance mode plays the planted assignment of
// `formula` and counts clauses directly; assignment-level mode plays a
// uniformly random proof and estimates the satisfied count from the rates.
inline RunReport run_trial(const ProtocolParams& params, TrialMode mode, std::uint64_t seed,
                           const Formula* formula = nullptr) {
    params.validate();
    if (mode == TrialMode::Instance) {
        if (formula == nullptr || !formula->planted()) {
            throw InputError("instance mode needs a formula with a planted assignment");
        }
        if (formula->n() != params.n || formula->m() != params.m) {
            throw InputError("formula size (n=" + std::to_string(formula->n()) + ", m=" + std::to_string(formula->m()) +
                             ") does not match parameters (n=" + std::to_string(params.n) +
                             ", m=" + std::to_string(params.m) + ")");
        }
    } else if (formula != nullptr) {
        throw InputError("assignment-level mode does not take a formula");
    }
    const auto bounds = analyze(params);
    Rng rng(seed);
    const Assignment proof = mode == TrialMode::Instance ? *formula->planted() : Assignment::random(params.n, rng);
    const auto phases = merlin_encode(proof, params.n, params.optical.mu);
    const auto trace = arthur_measure(phases, params.optical, rng);
    const auto pa = arthur_assign(trace, rng);

    RunReport r;
    r.mode = to_string(mode);
    r.n = params.n;
    r.m = params.m;
    r.nu = params.optical.nu;
    r.mu = params.optical.mu;
    r.delta = params.delta;
    r.total_single_clicks = pa.s_clk;
    r.double_clicks = pa.dc_clk;
    for (std::size_t k = 0; k < params.n; ++k) {
        if (pa.provenance[k] == Provenance::SingleClick && (pa.values[k] == 1) == proof[k]) {
            ++r.correct_clicks;
        }
    }
    r.missing_bits = params.n - pa.s_clk;
    r.threshold = bounds.T;
    if (mode == TrialMode::Instance) {
        r.satisfied_clauses = arthur_verdict(pa, *formula, bounds.T).satisfied;
    } else {
        r.satisfied_clauses = satisfied_from_counts(params.n, params.m, r.total_single_clicks, r.correct_clicks, r.double_clicks);
    }
    r.verdict = static_cast<double>(r.satisfied_clauses) >= bounds.T;
    r.completeness_lb = bounds.completeness_lb;
    r.soundness_ub = bounds.soundness_ub;
    r.gap = bounds.gap;
    r.log2_classical_ops = classical_cost(params.n, pa.s_clk, params.gamma).log2_ops;
    r.seed = seed;
    return r;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware).
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += threads) {
                fn(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

enum class SweepAxis { Mu, N };

inline const char* to_string(SweepAxis a) {
    return a == SweepAxis::Mu ? "mu" : "n";
}

struct SweepSpec {
    SweepAxis axis = SweepAxis::Mu;
    std::vector<double> grid;
    ProtocolParams fixed{};
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    TrialMode mode = TrialMode::AssignmentLevel;
    std::size_t degree = kDefaultDegree;  // N axis: m = n * degree / 4
    unsigned threads = 0;

    void validate() const {
        if (grid.empty()) {
            throw InputError("sweep grid is empty");
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (!(grid[i] > grid[i - 1])) {
                throw InputError("sweep grid must be strictly increasing");
            }
        }
        if (trials == 0) {
            throw InputError("sweep needs at least one trial per point");
        }
        if (axis == SweepAxis::N) {
            for (double v : grid) {
                if (v < 1.0 || v != std::floor(v)) {
                    throw InputError("N-axis grid values must be positive integers");
                }
                if ((static_cast<std::size_t>(v) * degree) % 4 != 0) {
                    throw InputError("n * degree must be divisible by 4 on every N-axis point");
                }
            }
        }
        fixed.validate();
    }

    ProtocolParams at(double value) const {
        ProtocolParams p = fixed;
        if (axis == SweepAxis::Mu) {
            p.optical.mu = value;
        } else {
            p.n = static_cast<std::size_t>(value);
            p.m = p.n * degree / 4;
        }
        return p;
    }
};

struct SweepRow {
    double axis_value = 0.0;
    ProtocolParams params;
    AnalyticBounds bounds;
    std::size_t trials = 0;
    double mean_single_clicks = 0.0;
    double mean_correct_clicks = 0.0;
    double mean_double_clicks = 0.0;
    double mean_total_clicks = 0.0;
    double mean_correct_bits = 0.0;  // correct singles plus half the doubles
    double mean_satisfied = 0.0;
    double accept_rate = 0.0;
    double sd_single_clicks = 0.0;   // sample standard deviation across trials
    double sd_double_clicks = 0.0;
    // Poissonian error bars, twice the root of the mean count.
    double err_total_clicks = 0.0;
    double err_correct_bits = 0.0;
    double err_single_clicks = 0.0;
};

inline double poisson_error_bar(double clicks) {
    return 2.0 * std::sqrt(clicks);
}

namespace detail {

inline SweepRow aggregate(double value, const ProtocolParams& p, const std::vector<RunReport>& runs) {
    SweepRow row;
    row.axis_value = value;
    row.params = p;
    row.bounds = analyze(p);
    row.trials = runs.size();
    const double t = static_cast<double>(runs.size());
    double s2 = 0.0;
    double d2 = 0.0;
    std::size_t accepted = 0;
    for (const auto& r : runs) {
        row.mean_single_clicks += static_cast<double>(r.total_single_clicks);
        row.mean_correct_clicks += static_cast<double>(r.correct_clicks);
        row.mean_double_clicks += static_cast<double>(r.double_clicks);
        row.mean_satisfied += static_cast<double>(r.satisfied_clauses);
        s2 += static_cast<double>(r.total_single_clicks) * static_cast<double>(r.total_single_clicks);
        d2 += static_cast<double>(r.double_clicks) * static_cast<double>(r.double_clicks);
        accepted += r.verdict ? 1 : 0;
    }
    row.mean_single_clicks /= t;
    row.mean_correct_clicks /= t;
    row.mean_double_clicks /= t;
    row.mean_satisfied /= t;
    row.mean_total_clicks = row.mean_single_clicks + row.mean_double_clicks;
    row.mean_correct_bits = row.mean_correct_clicks + 0.5 * row.mean_double_clicks;
    row.accept_rate = static_cast<double>(accepted) / t;
    if (runs.size() > 1) {
        row.sd_single_clicks = std::sqrt(std::max(0.0, (s2 - t * row.mean_single_clicks * row.mean_single_clicks) / (t - 1)));
        row.sd_double_clicks = std::sqrt(std::max(0.0, (d2 - t * row.mean_double_clicks * row.mean_double_clicks) / (t - 1)));
    }
    row.err_total_clicks = poisson_error_bar(row.mean_total_clicks);
    row.err_correct_bits = poisson_error_bar(row.mean_correct_bits);
    row.err_single_clicks = poisson_error_bar(row.mean_single_clicks);
    return row;
}

} // namespace detail

// Trials for one parameter point, each with its own derived seed.
inline std::vector<RunReport> run_trials(const ProtocolParams& p, TrialMode mode, std::size_t trials,
                                         std::uint64_t master_seed, double axis_value, unsigned threads,
                                         const Formula* formula = nullptr) {
    std::vector<RunReport> runs(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        runs[i] = run_trial(p, mode, derive_seed(master_seed, axis_value, i), formula);
    });
    return runs;
}

inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<SweepRow> rows;
    rows.reserve(spec.grid.size());
    for (double value : spec.grid) {
        const auto p = spec.at(value);
        std::optional<Formula> formula;
        if (spec.mode == TrialMode::Instance) {
            formula = gen_balanced_planted(p.n, p.m * 4 / p.n, derive_seed(spec.seed, value, ~std::uint64_t{0}),
                                           static_cast<std::uint32_t>(std::lround(p.delta * 1000.0)));
        }
        const auto runs = run_trials(p, spec.mode, spec.trials, spec.seed, value, spec.threads,
                                     formula ? &*formula : nullptr);
        rows.push_back(detail::aggregate(value, p, runs));
    }
    return rows;
}

// ---- CSV --------------------------------------------------------------------

inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis, std::ostream& os) {
    os << "axis,value,n,m,mu,nu,delta,p_c,p_w,p_dc,p_h,p_Y,p_N,T_C,T_S,T,completeness_lb,soundness_ub,gap,"
          "trials,mean_single_clicks,mean_correct_clicks,mean_double_clicks,mean_total_clicks,mean_correct_bits,"
          "mean_satisfied,accept_rate,err_total_clicks,err_correct_bits,err_single_clicks\n";
    for (const auto& r : rows) {
        const auto& b = r.bounds;
        const double cols[] = {r.params.optical.mu, r.params.optical.nu, r.params.delta, b.clicks.p_c, b.clicks.p_w,
                               b.clicks.p_dc, b.clicks.p_h, b.p_Y, b.p_N, b.T_C, b.T_S, b.T, b.completeness_lb,
                               b.soundness_ub, b.gap};
        os << to_string(axis) << ',' << format_double(r.axis_value) << ',' << r.params.n << ',' << r.params.m;
        for (double c : cols) {
            os << ',' << format_double(c);
        }
        os << ',' << r.trials;
        const double emp[] = {r.mean_single_clicks, r.mean_correct_clicks, r.mean_double_clicks, r.mean_total_clicks,
                              r.mean_correct_bits, r.mean_satisfied, r.accept_rate, r.err_total_clicks,
                              r.err_correct_bits, r.err_single_clicks};
        for (double c : emp) {
            os << ',' << format_double(c);
        }
        os << '\n';
    }
}

// ---- published experimental table ----------------------------------------------

struct PublishedRun {
    std::size_t n;
    double nu;
    double mu;
    std::size_t single_clicks;
    std::size_t correct_clicks;
    std::size_t double_clicks;
    std::size_t missing_bits;
    std::size_t threshold;
    std::size_t satisfied_clauses;
};

inline constexpr std::array<PublishedRun, 10> kPublishedRuns{{
    {5000, 0.87, 1.29, 3657, 3505, 964, 1343, 2254, 2227},
    {6000, 0.93, 1.30, 4834, 4741, 719, 1166, 2717, 3231},
    {7000, 0.94, 1.34, 5670, 5582, 848, 1330, 3232, 3904},
    {8000, 0.92, 1.29, 6203, 6062, 1195, 1797, 3613, 4030},
    {9000, 0.92, 1.30, 6974, 6813, 1363, 2026, 4088, 4546},
    {10000, 0.95, 1.15, 8045, 7929, 947, 1955, 4111, 5082},
    {11000, 0.93, 1.30, 8675, 8524, 1515, 2325, 4996, 5789},
    {12000, 0.93, 1.30, 9632, 9466, 1476, 2368, 5437, 6471},
    {13000, 0.95, 1.30, 10636, 10496, 1405, 2364, 5902, 7320},
    {14000, 0.94, 1.29, 11135, 10950, 1807, 2865, 6801, 7437},
}};

// Nominal settings held fixed in the analysis of the table.
inline constexpr double kNominalNu = 0.93;
inline constexpr double kNominalMu = 1.31;
inline constexpr double kNominalDelta = 0.15;

inline constexpr double kPublishedClickTolerance = 0.10;

struct PublishedReplication {
    PublishedRun row{};
    double analytic_single = 0.0;      // n * (p_c + p_w) at the row's (nu, mu)
    double sim_mean_single = 0.0;
    double sim_sigma_mean = 0.0;       // binomial sigma of the simulated mean
    bool sim_within_3sigma = false;
    double rel_error_vs_published = 0.0;   // |analytic - paper| / paper
    bool within_published_tolerance = false;
    double satisfied_from_rates = 0.0; // n * p_Y from the row's measured counts
    bool missing_identity = false;
};

inline std::vector<PublishedReplication> replicate_published_runs(std::span<const PublishedRun> rows, std::size_t trials,
                                                         std::uint64_t seed, unsigned threads = 0) {
    if (rows.empty()) {
        throw InputError("no table rows given");
    }
    if (trials == 0) {
        throw InputError("trials must be >= 1");
    }
    std::vector<PublishedReplication> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        ProtocolParams p;
        p.n = row.n;
        p.m = row.n;
        p.optical = {row.mu, row.nu, 0.0};
        p.delta = kNominalDelta;
        const auto clicks = click_probabilities(p.optical);
        PublishedReplication rep;
        rep.row = row;
        const double ps = clicks.p_c + clicks.p_w;
        rep.analytic_single = static_cast<double>(row.n) * ps;
        const auto runs = run_trials(p, TrialMode::AssignmentLevel, trials, seed, static_cast<double>(row.n), threads);
        double sum = 0.0;
        for (const auto& r : runs) {
            sum += static_cast<double>(r.total_single_clicks);
        }
        rep.sim_mean_single = sum / static_cast<double>(trials);
        rep.sim_sigma_mean = std::sqrt(static_cast<double>(row.n) * ps * (1.0 - ps) / static_cast<double>(trials));
        rep.sim_within_3sigma = std::abs(rep.sim_mean_single - rep.analytic_single) <= 3.0 * rep.sim_sigma_mean;
        rep.rel_error_vs_published = std::abs(rep.analytic_single - static_cast<double>(row.single_clicks)) /
                                 static_cast<double>(row.single_clicks);
        rep.within_published_tolerance = rep.rel_error_vs_published < kPublishedClickTolerance;
        rep.satisfied_from_rates =
            expected_satisfied_from_counts(row.n, row.n, row.single_clicks, row.correct_clicks, row.double_clicks);
        rep.missing_identity = row.n - row.single_clicks == row.missing_bits;
        out.push_back(rep);
    }
    return out;
}

} // namespace npqv
