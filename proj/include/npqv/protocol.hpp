#pragma once

// Verifier/prover roles and the analytic completeness/soundness machinery.
//
// Merlin encodes proof bit x_k as the phase of pulse k; Arthur interferes it
// with his own pulse, reads the detectors, assigns values, and accepts iff at
// least T measured clauses are satisfied, with T the midpoint between the
// expected YES and NO counts.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npqv/errors.hpp"
#include "npqv/photonics.hpp"
#include "npqv/rng.hpp"
#include "npqv/satgen.hpp"

namespace npqv {

struct Targets {
    double c_min = 0.9;
    double s_max = 0.6;
};

struct ProtocolParams {
    std::size_t n = 10000;
    std::size_t m = 10000;
    OpticalParams optical{};
    double delta = 0.15;
    double gamma = 0.4;
    Targets targets{};
    std::size_t advantage_margin = 1000;

    void validate() const {
        optical.validate();
        if (n < 1) {
            throw InputError("n must be >= 1");
        }
        if (m < 1) {
            throw InputError("m must be >= 1");
        }
        if (!(delta > 0.0 && delta <= 1.0)) {
            throw InputError("delta must lie in (0, 1]");
        }
        if (!(gamma > 0.0 && gamma <= 1.0)) {
            throw InputError("gamma must lie in (0, 1]");
        }
        if (!(targets.c_min > 0.0 && targets.c_min < 1.0 && targets.s_max > 0.0 && targets.s_max < 1.0)) {
            throw InputError("completeness/soundness targets must lie in (0, 1)");
        }
    }
};

struct AnalyticBounds {
    ClickProbabilities clicks;
    double p_Y = 0.0;
    double p_N = 0.0;
    double T_C = 0.0;
    double T_S = 0.0;
    double T = 0.0;
    double completeness_lb = 0.0;
    double soundness_ub = 1.0;
    double gap = -1.0;
    // False when T_C <= T_S: no Chernoff separation exists and the bounds
    // above hold the trivial values 0 and 1.
    bool separated = false;
};

// ---- Merlin ---------------------------------------------------------------

// Phase bits of the pulse train; bit k set means phase pi on pulse k.
struct PhaseSequence {
    std::vector<std::uint8_t> bits;
    double mu_per_pulse = 0.0;

    std::size_t size() const noexcept { return bits.size(); }
    double total_mean_photons() const noexcept { return mu_per_pulse * static_cast<double>(bits.size()); }
};

inline PhaseSequence merlin_encode(const Assignment& proof, std::size_t n, double mu) {
    if (proof.size() != n) {
        throw InputError("proof length " + std::to_string(proof.size()) + " differs from n = " + std::to_string(n));
    }
    return PhaseSequence{proof.bits(), mu};
}

// ---- Arthur ---------------------------------------------------------------

inline ClickTrace arthur_measure(const PhaseSequence& phases, const OpticalParams& optical, Rng& rng) {
    const auto probs = click_probabilities(optical);
    ClickTrace trace;
    trace.reserve(phases.size());
    for (auto b : phases.bits) {
        trace.push_back(sample_click(probs, b != 0, rng));
    }
    return trace;
}

enum class Provenance : std::uint8_t { Undefined, SingleClick, RandomFromDouble };

struct PartialAssignment {
    static constexpr std::int8_t kUndefined = -1;

    std::vector<std::int8_t> values;  // 0, 1 or kUndefined
    std::vector<Provenance> provenance;
    std::size_t s_clk = 0;   // single clicks
    std::size_t dc_clk = 0;  // double clicks

    std::size_t size() const noexcept { return values.size(); }
    std::size_t t_clk() const noexcept { return s_clk + dc_clk; }
    bool defined(std::size_t i) const { return values[i] != kUndefined; }
};

inline PartialAssignment arthur_assign(const ClickTrace& trace, Rng& rng) {
    PartialAssignment pa;
    pa.values.resize(trace.size(), PartialAssignment::kUndefined);
    pa.provenance.resize(trace.size(), Provenance::Undefined);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        switch (trace[k]) {
        case ClickOutcome::None:
            break;
        case ClickOutcome::D0:
            pa.values[k] = 0;
            pa.provenance[k] = Provenance::SingleClick;
            ++pa.s_clk;
            break;
        case ClickOutcome::D1:
            pa.values[k] = 1;
            pa.provenance[k] = Provenance::SingleClick;
            ++pa.s_clk;
            break;
        case ClickOutcome::Both:
            pa.values[k] = coin(rng) ? 1 : 0;
            pa.provenance[k] = Provenance::RandomFromDouble;
            ++pa.dc_clk;
            break;
        }
    }
    return pa;
}

struct Verdict {
    bool accept = false;
    std::size_t satisfied = 0;    // measured and satisfied
    std::size_t unsatisfied = 0;  // measured and unsatisfied
    std::size_t unmeasured = 0;   // some variable undefined
};

// A clause counts only when all four of its variables are defined; the run
// is accepted iff the satisfied-measured count reaches T.
inline Verdict arthur_verdict(const PartialAssignment& pa, const Formula& f, double threshold) {
    if (pa.size() != f.n()) {
        throw InputError("partial assignment length differs from formula n");
    }
    Verdict v;
    for (const auto& c : f.clauses()) {
        int ones = 0;
        bool measured = true;
        for (auto var : c) {
            const auto val = pa.values[var - 1];
            if (val == PartialAssignment::kUndefined) {
                measured = false;
                break;
            }
            ones += val;
        }
        if (!measured) {
            ++v.unmeasured;
        } else if (ones == 2) {
            ++v.satisfied;
        } else {
            ++v.unsatisfied;
        }
    }
    v.accept = static_cast<double>(v.satisfied) >= threshold;
    return v;
}

// ---- analytics ------------------------------------------------------------

// Probability that a satisfied clause is measured and still reads satisfied:
// four right, four wrong, or two of each. A double click yields the right
// value half the time, so it splits evenly between a and b.
inline double p_yes(const ClickProbabilities& p) {
    const double a = p.p_c + 0.5 * p.p_dc;
    const double b = p.p_w + 0.5 * p.p_dc;
    const double a2 = a * a;
    const double b2 = b * b;
    return a2 * a2 + b2 * b2 + 4.0 * a2 * b2;
}

// Upper bound on the probability of measuring a satisfied clause in a NO
// instance: a delta fraction of clauses reads satisfied only through errors.
// Algebraically equal to delta * p_h^4 + (1 - 2 delta) * p_Y.
inline double p_no_bound(const ClickProbabilities& p, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw InputError("delta must lie in [0, 1]");
    }
    const double ph2 = p.p_h * p.p_h;
    const double ph4 = ph2 * ph2;
    const double py = p_yes(p);
    return ph4 - delta * py - (1.0 - delta) * (ph4 - py);
}

struct Thresholds {
    double T_C = 0.0;
    double T_S = 0.0;
    double T = 0.0;
};

inline Thresholds thresholds(double p_Y, double p_N, std::size_t m) {
    if (m < 1) {
        throw InputError("clause count must be >= 1");
    }
    const double md = static_cast<double>(m);
    Thresholds t{md * p_Y, md * p_N, 0.0};
    t.T = 0.5 * (t.T_C + t.T_S);
    return t;
}

struct ChernoffBounds {
    double completeness_lb = 0.0;
    double soundness_ub = 1.0;

    double gap() const noexcept { return completeness_lb - soundness_ub; }
};

inline ChernoffBounds chernoff_bounds(double T_C, double T_S) {
    if (!(T_S > 0.0) || !(T_C > T_S)) {
        throw OrderingError("Chernoff bounds need T_C > T_S > 0 (T_C = " + std::to_string(T_C) +
                            ", T_S = " + std::to_string(T_S) + ")");
    }
    const double d2 = (T_C - T_S) * (T_C - T_S);
    return ChernoffBounds{-std::expm1(-d2 / (4.0 * T_C)), std::exp(-d2 / (4.0 * T_S))};
}

inline AnalyticBounds analyze(const ProtocolParams& params) {
    params.validate();
    AnalyticBounds b;
    b.clicks = click_probabilities(params.optical);
    b.p_Y = p_yes(b.clicks);
    b.p_N = p_no_bound(b.clicks, params.delta);
    const auto t = thresholds(b.p_Y, b.p_N, params.m);
    b.T_C = t.T_C;
    b.T_S = t.T_S;
    b.T = t.T;
    if (b.T_S > 0.0 && b.T_C > b.T_S) {
        const auto cb = chernoff_bounds(b.T_C, b.T_S);
        b.completeness_lb = cb.completeness_lb;
        b.soundness_ub = cb.soundness_ub;
        b.separated = true;
    }
    b.gap = b.completeness_lb - b.soundness_ub;
    return b;
}

inline bool meets_targets(const AnalyticBounds& b, const Targets& targets) {
    return b.separated && b.completeness_lb > targets.c_min && b.soundness_ub < targets.s_max;
}

// Ideal-detector bounds. Completeness: some clause gets all four values;
// soundness: no unsatisfied clause is ever fully measured.
inline double ideal_completeness_bound(double mu, std::size_t n_clauses) {
    if (!(mu >= 0.0)) {
        throw InputError("mu must be >= 0");
    }
    const double ph = -std::expm1(-2.0 * mu);
    const double ph4 = ph * ph * ph * ph;
    return -std::expm1(static_cast<double>(n_clauses) * std::log1p(-ph4));
}

inline double ideal_soundness_bound(double mu, double delta, std::size_t n_clauses) {
    if (!(mu >= 0.0)) {
        throw InputError("mu must be >= 0");
    }
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw InputError("delta must lie in (0, 1]");
    }
    const double pd = -std::expm1(-mu);
    const double pd4 = pd * pd * pd * pd;
    return std::exp(static_cast<double>(n_clauses) * std::log1p(-delta * pd4));
}

struct MuWindow {
    double mu_min = 0.0;
    double mu_max = 0.0;
    // The feasible region reached the top of the search range.
    bool open_above = false;
};

struct MuWindowOptions {
    double mu_hi = 10.0;
    std::size_t scan_points = 10000;
    double tolerance = 1e-4;
    double p_dark = 0.0;
};

// Range of mu where the Chernoff bounds meet both targets. A coarse scan
// locates the first feasible run; each boundary is then refined by bisection.
inline std::optional<MuWindow> mu_window(std::size_t n, double nu, double delta, std::size_t m, const Targets& targets,
                                         const MuWindowOptions& opt = {}) {
    ProtocolParams base;
    base.n = n;
    base.m = m;
    base.delta = delta;
    base.targets = targets;
    base.optical = {0.0, nu, opt.p_dark};
    base.validate();
    auto feasible = [&](double mu) {
        auto p = base;
        p.optical.mu = mu;
        return meets_targets(analyze(p), targets);
    };
    auto bisect = [&](double outside, double inside) {
        while (std::abs(inside - outside) > 0.25 * opt.tolerance) {
            const double mid = 0.5 * (outside + inside);
            (feasible(mid) ? inside : outside) = mid;
        }
        return inside;
    };
    const double step = opt.mu_hi / static_cast<double>(opt.scan_points);
    std::optional<std::size_t> first;
    std::size_t last = 0;
    for (std::size_t i = 1; i <= opt.scan_points; ++i) {
        const bool ok = feasible(step * static_cast<double>(i));
        if (ok && !first) {
            first = i;
        }
        if (ok) {
            last = i;
        } else if (first) {
            break;
        }
    }
    if (!first) {
        return std::nullopt;
    }
    MuWindow w;
    w.mu_min = *first == 1 ? step : bisect(step * static_cast<double>(*first - 1), step * static_cast<double>(*first));
    if (last == opt.scan_points) {
        w.mu_max = opt.mu_hi;
        w.open_above = true;
    } else {
        w.mu_max = bisect(step * static_cast<double>(last + 1), step * static_cast<double>(last));
    }
    return w;
}

struct ClassicalCost {
    std::size_t missing_bits = 0;
    double log2_ops = 0.0;

    double log10_ops() const noexcept { return log2_ops * std::log10(2.0); }
    // Overflows to +inf beyond ~1024 bits of work.
    double ops() const noexcept { return std::exp2(log2_ops); }
};

// Residual classical work once Arthur knows s_clk bits: 2^(gamma * (n - s_clk)).
inline ClassicalCost classical_cost(std::size_t n, std::size_t s_clk, double gamma) {
    if (s_clk > n) {
        throw InputError("single clicks exceed n");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw InputError("gamma must lie in (0, 1]");
    }
    const std::size_t missing = n - s_clk;
    return ClassicalCost{missing, gamma * static_cast<double>(missing)};
}

} // namespace npqv
