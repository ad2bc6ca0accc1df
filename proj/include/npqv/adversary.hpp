#pragma once

// Dishonest-Merlin strategies under the unentangled, fixed-photon-number
// model: Merlin can only pick which classical assignment to encode, or send
// nothing at all (vacuum), in which case Arthur's own pulse still clicks.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "npqv/errors.hpp"
#include "npqv/photonics.hpp"
#include "npqv/protocol.hpp"
#include "npqv/rng.hpp"
#include "npqv/satgen.hpp"

namespace npqv {

enum class StrategyKind { BestExhaustive, BestLocalSearch, FixedAssignment, VacuumFloor };

inline const char* to_string(StrategyKind k) {
    switch (k) {
    case StrategyKind::BestExhaustive: return "exhaustive";
    case StrategyKind::BestLocalSearch: return "local-search";
    case StrategyKind::FixedAssignment: return "fixed";
    case StrategyKind::VacuumFloor: return "vacuum";
    }
    return "?";
}

inline StrategyKind strategy_from_string(const std::string& s) {
    if (s == "exhaustive") return StrategyKind::BestExhaustive;
    if (s == "local-search") return StrategyKind::BestLocalSearch;
    if (s == "fixed") return StrategyKind::FixedAssignment;
    if (s == "vacuum") return StrategyKind::VacuumFloor;
    throw InputError("unknown strategy '" + s + "'");
}

struct AdversaryStrategy {
    StrategyKind kind = StrategyKind::BestExhaustive;
    std::optional<Assignment> payload;  // FixedAssignment only
    std::size_t restarts = 20;          // BestLocalSearch only
};

// Maximizes satisfied clauses; ties go to the lowest binary value (x_1 = LSB).
inline Assignment best_assignment_exhaustive(const Formula& f) {
    return Assignment::from_mask(exhaustive_max_satisfied(f).best_mask, f.n());
}

namespace detail {

// Per-clause count of true literals plus an indexable set of unsatisfied
// clauses, so a flip costs O(degree).
class ClauseState {
public:
    ClauseState(const Formula& f, const Assignment& a)
        : f_(&f), a_(a), ones_(f.m(), 0), pos_(f.m(), kAbsent), occ_(f.n()) {
        for (std::size_t ci = 0; ci < f.m(); ++ci) {
            for (auto v : f.clauses()[ci]) {
                occ_[v - 1].push_back(static_cast<std::uint32_t>(ci));
                ones_[ci] += a[v - 1] ? 1 : 0;
            }
            update(ci);
        }
    }

    std::size_t satisfied() const noexcept { return f_->m() - unsat_.size(); }
    std::size_t unsatisfied() const noexcept { return unsat_.size(); }
    const Assignment& assignment() const noexcept { return a_; }

    std::uint32_t random_unsatisfied(Rng& rng) const { return unsat_[uniform_below(rng, unsat_.size())]; }

    int gain(std::size_t var) const {
        const int d = a_[var] ? -1 : 1;
        int g = 0;
        for (auto ci : occ_[var]) {
            g += (ones_[ci] + d == 2 ? 1 : 0) - (ones_[ci] == 2 ? 1 : 0);
        }
        return g;
    }

    void flip(std::size_t var) {
        const int d = a_[var] ? -1 : 1;
        for (auto ci : occ_[var]) {
            ones_[ci] = static_cast<std::int8_t>(ones_[ci] + d);
            update(ci);
        }
        a_.flip(var);
    }

private:
    static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();

    void update(std::size_t ci) {
        const bool sat = ones_[ci] == 2;
        if (!sat && pos_[ci] == kAbsent) {
            pos_[ci] = static_cast<std::uint32_t>(unsat_.size());
            unsat_.push_back(static_cast<std::uint32_t>(ci));
        } else if (sat && pos_[ci] != kAbsent) {
            const auto last = unsat_.back();
            unsat_[pos_[ci]] = last;
            pos_[last] = pos_[ci];
            unsat_.pop_back();
            pos_[ci] = kAbsent;
        }
    }

    const Formula* f_;
    Assignment a_;
    std::vector<std::int8_t> ones_;
    std::vector<std::uint32_t> pos_;
    std::vector<std::uint32_t> unsat_;
    std::vector<std::vector<std::uint32_t>> occ_;
};

// Focused single-flip walk: pick an unsatisfied clause, flip one of its four
// variables, the best-gain one or with probability `noise` a random one.
// Returns the best assignment visited.
inline Assignment focused_walk(const Formula& f, Assignment start, std::size_t max_flips, double noise, Rng& rng) {
    ClauseState st(f, start);
    Assignment best = st.assignment();
    std::size_t best_unsat = st.unsatisfied();
    std::array<std::size_t, 4> ties{};
    for (std::size_t t = 0; t < max_flips && st.unsatisfied() > 0; ++t) {
        const auto& clause = f.clauses()[st.random_unsatisfied(rng)];
        std::size_t var = 0;
        if (uniform01(rng) < noise) {
            var = clause[uniform_below(rng, 4)] - 1;
        } else {
            int best_gain = std::numeric_limits<int>::min();
            std::size_t count = 0;
            for (auto v1 : clause) {
                const int g = st.gain(v1 - 1);
                if (g > best_gain) {
                    best_gain = g;
                    count = 0;
                }
                if (g == best_gain) {
                    ties[count++] = v1 - 1;
                }
            }
            var = ties[uniform_below(rng, count)];
        }
        st.flip(var);
        if (st.unsatisfied() < best_unsat) {
            best_unsat = st.unsatisfied();
            best = st.assignment();
        }
    }
    return best;
}

} // namespace detail

struct LocalSearchOptions {
    std::size_t flips_per_n = 1000;  // flip budget per restart is flips_per_n * n
    double noise = 0.2;
};

// Heuristic only: the first walk starts from `start` (or a random
// assignment), later restarts from fresh random points. The result never
// satisfies fewer clauses than the start point. Zero restarts returns the
// start point unchanged.
inline Assignment best_assignment_local_search(const Formula& f, std::size_t restarts, Rng& rng,
                                               std::optional<Assignment> start = std::nullopt,
                                               const LocalSearchOptions& opt = {}) {
    Assignment best = start ? *start : Assignment::random(f.n(), rng);
    if (best.size() != f.n()) {
        throw InputError("start assignment length differs from formula n");
    }
    std::size_t best_sat = count_satisfied(f, best);
    for (std::size_t r = 0; r < restarts && best_sat < f.m(); ++r) {
        Assignment from = r == 0 ? best : Assignment::random(f.n(), rng);
        auto walked = detail::focused_walk(f, std::move(from), opt.flips_per_n * f.n(), opt.noise, rng);
        const auto sat = count_satisfied(f, walked);
        if (sat > best_sat) {
            best = std::move(walked);
            best_sat = sat;
        }
    }
    return best;
}

struct SoundnessEstimate {
    std::size_t trials = 0;
    std::size_t accepted = 0;
    double mean_clicks_per_pulse = 0.0;
    double mean_satisfied = 0.0;
    double threshold = 0.0;
    std::optional<Assignment> played;  // absent for vacuum

    double frequency() const noexcept { return trials ? static_cast<double>(accepted) / trials : 0.0; }
    double sigma() const noexcept {
        const double p = frequency();
        return trials ? std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) : 0.0;
    }
};

// Throws PromiseViolation when the formula is known to be satisfiable: a
// planted assignment is attached, exhaustive search finds one (n <= 26), or
// a larger formula carries no delta promise.
inline void require_no_instance(const Formula& f) {
    if (f.planted()) {
        throw PromiseViolation("formula carries a planted satisfying assignment");
    }
    if (f.n() <= kMaxExhaustiveN) {
        if (min_unsatisfied(f) == 0) {
            throw PromiseViolation("formula is satisfiable");
        }
    } else if (f.delta_milli() == 0) {
        throw PromiseViolation("formula has no unsatisfiability promise (delta = 0)");
    }
}

inline std::optional<Assignment> resolve_strategy(const Formula& f, const AdversaryStrategy& s, Rng& rng) {
    switch (s.kind) {
    case StrategyKind::BestExhaustive:
        return best_assignment_exhaustive(f);
    case StrategyKind::BestLocalSearch:
        return best_assignment_local_search(f, s.restarts, rng);
    case StrategyKind::FixedAssignment:
        if (!s.payload || s.payload->size() != f.n()) {
            throw InputError("fixed strategy needs an assignment of length n");
        }
        return s.payload;
    case StrategyKind::VacuumFloor:
        return std::nullopt;
    }
    return std::nullopt;
}

// Fraction of runs Arthur accepts while Merlin plays `strategy` on a
// NO-instance. The threshold comes from the analytic bounds for `params`
// with m and n taken from the formula.
inline SoundnessEstimate empirical_soundness(const Formula& f, const AdversaryStrategy& strategy, ProtocolParams params,
                                             std::size_t trials, Rng& rng) {
    if (trials == 0) {
        throw InputError("trials must be >= 1");
    }
    require_no_instance(f);
    params.n = f.n();
    params.m = f.m();
    const auto bounds = analyze(params);
    SoundnessEstimate est;
    est.trials = trials;
    est.threshold = bounds.T;
    est.played = resolve_strategy(f, strategy, rng);

    const auto honest = click_probabilities(params.optical);
    const auto vacuum = vacuum_click_probabilities(params.optical);
    std::size_t clicks = 0;
    double sat_sum = 0.0;
    ClickTrace trace(f.n());
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t k = 0; k < f.n(); ++k) {
            trace[k] = est.played ? sample_click(honest, (*est.played)[k], rng) : sample_click(vacuum, std::nullopt, rng);
        }
        const auto pa = arthur_assign(trace, rng);
        clicks += pa.t_clk();
        const auto v = arthur_verdict(pa, f, bounds.T);
        sat_sum += static_cast<double>(v.satisfied);
        est.accepted += v.accept ? 1 : 0;
    }
    est.mean_clicks_per_pulse = static_cast<double>(clicks) / (static_cast<double>(trials) * static_cast<double>(f.n()));
    est.mean_satisfied = sat_sum / static_cast<double>(trials);
    return est;
}

} // namespace npqv
