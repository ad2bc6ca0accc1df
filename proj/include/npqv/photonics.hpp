#pragma once

// Click statistics of the interferometric measurement: Merlin's pulse
// |(-1)^x alpha> meets Arthur's |alpha> on a balanced beam splitter, and two
// threshold detectors D0, D1 watch the outputs. Amplitudes are never
// represented; for coherent inputs the per-detector click events are
// independent, so sampling clicks directly is exact.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "npqv/errors.hpp"
#include "npqv/rng.hpp"

namespace npqv {

struct OpticalParams {
    double mu = 1.31;     // mean photon number per pulse, after loss pre-compensation
    double nu = 0.93;     // interference visibility
    double p_dark = 0.0;  // dark-count probability per detector per gate

    void validate() const {
        if (!(mu >= 0.0) || !std::isfinite(mu)) {
            throw InputError("mu must be a finite value >= 0");
        }
        if (!(nu >= 0.0 && nu <= 1.0)) {
            throw InputError("nu must lie in [0, 1]");
        }
        if (!(p_dark >= 0.0 && p_dark < 1.0)) {
            throw InputError("p_dark must lie in [0, 1)");
        }
    }
};

struct ClickProbabilities {
    double p_c = 0.0;     // correct detector only
    double p_w = 0.0;     // wrong detector only
    double p_dc = 0.0;    // both detectors
    double p_none = 1.0;  // neither
    double p_h = 0.0;     // any click, p_c + p_w + p_dc
    double p_d = 0.0;     // Merlin-independent floor, 1 - exp(-mu)
    double p_dark = 0.0;  // kept for the vacuum-input sampler
};

enum class ClickOutcome : std::uint8_t { None, D0, D1, Both };

using ClickTrace = std::vector<ClickOutcome>;

struct DetectorPair {
    double d0 = 0.0;
    double d1 = 0.0;
};

// Ideal per-detector click probabilities for phase bit x_k: the detector
// matching x_k receives mean photon number 2*mu, the other none.
inline DetectorPair ideal_detect_prob(double mu, bool x_k) {
    if (!(mu >= 0.0)) {
        throw InputError("mu must be >= 0");
    }
    const double on = -std::expm1(-2.0 * mu);
    return x_k ? DetectorPair{0.0, on} : DetectorPair{on, 0.0};
}

namespace detail {

// A threshold detector fires iff an optical click or a dark count occurs.
inline double with_dark(double optical, double p_dark) {
    return 1.0 - (1.0 - optical) * (1.0 - p_dark);
}

inline ClickProbabilities from_detector_rates(double correct, double wrong, double p_dark, double mu) {
    ClickProbabilities p;
    p.p_c = correct * (1.0 - wrong);
    p.p_w = wrong * (1.0 - correct);
    p.p_dc = correct * wrong;
    p.p_none = (1.0 - correct) * (1.0 - wrong);
    p.p_h = p.p_c + p.p_w + p.p_dc;
    p.p_d = -std::expm1(-mu);
    p.p_dark = p_dark;
    return p;
}

} // namespace detail

// Honest-Merlin click probabilities with visibility nu: the correct detector
// sees mean 2*nu*mu, the wrong one 2*(1-nu)*mu.
inline ClickProbabilities click_probabilities(const OpticalParams& op) {
    op.validate();
    const double correct = detail::with_dark(-std::expm1(-2.0 * op.nu * op.mu), op.p_dark);
    const double wrong = detail::with_dark(-std::expm1(-2.0 * (1.0 - op.nu) * op.mu), op.p_dark);
    return detail::from_detector_rates(correct, wrong, op.p_dark, op.mu);
}

// Probabilities when Merlin sends vacuum: Arthur's own pulse splits evenly,
// so each detector sees mu/2 and the total click probability is exactly the
// floor 1 - exp(-mu) (plus dark counts). p_c/p_w are labelled D0/D1.
inline ClickProbabilities vacuum_click_probabilities(const OpticalParams& op) {
    op.validate();
    const double each = detail::with_dark(-std::expm1(-0.5 * op.mu), op.p_dark);
    return detail::from_detector_rates(each, each, op.p_dark, op.mu);
}

// One categorical draw. With an honest bit b the correct detector is D_b.
// Without a bit (vacuum from Merlin) the detectors fire independently at the
// floor rate implied by p_d and p_dark.
inline ClickOutcome sample_click(const ClickProbabilities& p, std::optional<bool> honest_bit, Rng& rng) {
    if (!honest_bit) {
        const double each = detail::with_dark(1.0 - std::sqrt(1.0 - p.p_d), p.p_dark);
        const bool d0 = uniform01(rng) < each;
        const bool d1 = uniform01(rng) < each;
        if (d0 && d1) {
            return ClickOutcome::Both;
        }
        return d0 ? ClickOutcome::D0 : (d1 ? ClickOutcome::D1 : ClickOutcome::None);
    }
    const double u = uniform01(rng);
    const auto correct = *honest_bit ? ClickOutcome::D1 : ClickOutcome::D0;
    const auto wrong = *honest_bit ? ClickOutcome::D0 : ClickOutcome::D1;
    if (u < p.p_c) {
        return correct;
    }
    if (u < p.p_c + p.p_w) {
        return wrong;
    }
    if (u < p.p_c + p.p_w + p.p_dc) {
        return ClickOutcome::Both;
    }
    return ClickOutcome::None;
}

struct TraceCounts {
    std::size_t none = 0;
    std::size_t d0 = 0;
    std::size_t d1 = 0;
    std::size_t both = 0;

    std::size_t singles() const noexcept { return d0 + d1; }
    std::size_t clicks() const noexcept { return d0 + d1 + both; }
};

inline TraceCounts count_outcomes(const ClickTrace& trace) {
    TraceCounts c;
    for (auto o : trace) {
        switch (o) {
        case ClickOutcome::None: ++c.none; break;
        case ClickOutcome::D0: ++c.d0; break;
        case ClickOutcome::D1: ++c.d1; break;
        case ClickOutcome::Both: ++c.both; break;
        }
    }
    return c;
}

// Visibility estimate from a trace of the all-zeros proof: the D1-only rate
// estimates p_w, which is strictly decreasing in nu on [0, 1], so it is
// inverted by bisection. No wrong clicks gives exactly 1.
inline double calibrate_visibility(const ClickTrace& trace, double mu, double p_dark = 0.0) {
    if (trace.empty()) {
        throw InputError("calibration trace is empty");
    }
    if (!(mu > 0.0)) {
        throw InputError("calibration needs mu > 0");
    }
    const auto counts = count_outcomes(trace);
    if (counts.d1 == 0) {
        return 1.0;
    }
    const double target = static_cast<double>(counts.d1) / static_cast<double>(trace.size());
    auto wrong_rate = [&](double nu) { return click_probabilities({mu, nu, p_dark}).p_w; };
    double lo = 0.0;
    double hi = 1.0;
    if (target >= wrong_rate(0.0)) {
        return 0.0;
    }
    if (target <= wrong_rate(1.0)) {
        return 1.0;
    }
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (wrong_rate(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// --- trace CSV: "pulse_index,outcome" with outcome in {N,0,1,B} -------------

inline char outcome_code(ClickOutcome o) {
    switch (o) {
    case ClickOutcome::None: return 'N';
    case ClickOutcome::D0: return '0';
    case ClickOutcome::D1: return '1';
    case ClickOutcome::Both: return 'B';
    }
    return '?';
}

inline void write_trace_csv(const ClickTrace& trace, std::ostream& os) {
    os << "pulse_index,outcome\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        os << (i + 1) << ',' << outcome_code(trace[i]) << '\n';
    }
}

inline ClickTrace read_trace_csv(std::istream& is) {
    std::string raw;
    std::size_t line = 0;
    if (!std::getline(is, raw)) {
        throw ParseError(1, "missing header 'pulse_index,outcome'");
    }
    ++line;
    if (raw != "pulse_index,outcome") {
        throw ParseError(line, "expected header 'pulse_index,outcome'");
    }
    ClickTrace trace;
    while (std::getline(is, raw)) {
        ++line;
        if (raw.empty()) {
            continue;
        }
        const auto comma = raw.find(',');
        if (comma == std::string::npos || comma + 2 != raw.size()) {
            throw ParseError(line, "expected '<index>,<N|0|1|B>'");
        }
        std::size_t idx = 0;
        try {
            std::size_t used = 0;
            idx = std::stoull(raw.substr(0, comma), &used);
            if (used != comma) {
                throw std::invalid_argument("trailing");
            }
        } catch (const std::exception&) {
            throw ParseError(line, "malformed pulse index");
        }
        if (idx != trace.size() + 1) {
            throw ParseError(line, "pulse indices must be consecutive from 1");
        }
        switch (raw.back()) {
        case 'N': trace.push_back(ClickOutcome::None); break;
        case '0': trace.push_back(ClickOutcome::D0); break;
        case '1': trace.push_back(ClickOutcome::D1); break;
        case 'B': trace.push_back(ClickOutcome::Both); break;
        default: throw ParseError(line, "unknown outcome code");
        }
    }
    return trace;
}

} // namespace npqv
