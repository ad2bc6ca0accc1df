#pragma once

// Balanced 2-out-of-4 SAT instances: model, planted generator, exhaustive
// certification, and the text instance format.
//
// A clause (i, j, k, l) is satisfied iff exactly two of x_i, x_j, x_k, x_l are
// true. Variable indices are 1-based throughout, matching the file format.

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "npqv/errors.hpp"
#include "npqv/rng.hpp"

namespace npqv {

class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}
    explicit Assignment(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        for (auto& b : bits_) {
            b = b ? 1 : 0;
        }
    }

    static Assignment from_string(std::string_view s) {
        std::vector<std::uint8_t> bits;
        bits.reserve(s.size());
        for (char ch : s) {
            if (ch != '0' && ch != '1') {
                throw InputError("assignment string may only contain '0' and '1'");
            }
            bits.push_back(ch == '1' ? 1 : 0);
        }
        return Assignment(std::move(bits));
    }

    static Assignment random(std::size_t n, Rng& rng) {
        Assignment a(n);
        for (auto& b : a.bits_) {
            b = coin(rng) ? 1 : 0;
        }
        return a;
    }

    // Bit i (0-based) is bit i of `value`; x_1 is the least significant bit.
    static Assignment from_mask(std::uint64_t value, std::size_t n) {
        Assignment a(n);
        for (std::size_t i = 0; i < n; ++i) {
            a.bits_[i] = static_cast<std::uint8_t>((value >> i) & 1U);
        }
        return a;
    }

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
    void flip(std::size_t i) { bits_[i] ^= 1U; }

    std::size_t count_ones() const noexcept {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }

    Assignment complemented() const {
        Assignment a(*this);
        for (auto& b : a.bits_) {
            b ^= 1U;
        }
        return a;
    }

    std::string to_string() const {
        std::string s(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            s[i] = bits_[i] ? '1' : '0';
        }
        return s;
    }

    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

using Clause = std::array<std::uint32_t, 4>;

inline bool check_clause(const Assignment& a, const Clause& c) {
    int ones = 0;
    for (auto v : c) {
        if (v == 0 || v > a.size()) {
            throw InputError("clause index " + std::to_string(v) + " outside [1, " + std::to_string(a.size()) + "]");
        }
        ones += a[v - 1] ? 1 : 0;
    }
    return ones == 2;
}

// Immutable balanced formula. The constructor enforces every invariant:
// distinct in-range indices, M = n*r/4, each variable in exactly r clauses,
// and a planted assignment (when present) satisfying all clauses.
class Formula {
public:
    Formula(std::size_t n, std::size_t degree, std::uint32_t delta_milli, std::vector<Clause> clauses,
            std::optional<Assignment> planted = std::nullopt)
        : n_(n), degree_(degree), delta_milli_(delta_milli), clauses_(std::move(clauses)), planted_(std::move(planted)) {
        if (n_ == 0) {
            throw InputError("formula needs at least one variable");
        }
        if (degree_ == 0) {
            throw InputError("degree must be at least 1");
        }
        if (delta_milli_ > 1000) {
            throw InputError("delta must lie in [0, 1]");
        }
        if ((n_ * degree_) % 4 != 0 || clauses_.size() != n_ * degree_ / 4) {
            throw InputError("clause count must equal n*r/4 (n=" + std::to_string(n_) + ", r=" +
                             std::to_string(degree_) + ", M=" + std::to_string(clauses_.size()) + ")");
        }
        std::vector<std::size_t> occ(n_, 0);
        for (std::size_t ci = 0; ci < clauses_.size(); ++ci) {
            const auto& c = clauses_[ci];
            for (std::size_t p = 0; p < 4; ++p) {
                if (c[p] == 0 || c[p] > n_) {
                    throw InputError("clause " + std::to_string(ci + 1) + " references variable " + std::to_string(c[p]) +
                                     " outside [1, " + std::to_string(n_) + "]");
                }
                for (std::size_t q = 0; q < p; ++q) {
                    if (c[q] == c[p]) {
                        throw InputError("clause " + std::to_string(ci + 1) + " repeats variable " + std::to_string(c[p]));
                    }
                }
                ++occ[c[p] - 1];
            }
        }
        for (std::size_t v = 0; v < n_; ++v) {
            if (occ[v] != degree_) {
                throw InputError("unbalanced: variable " + std::to_string(v + 1) + " occurs " + std::to_string(occ[v]) +
                                 " times, expected " + std::to_string(degree_));
            }
        }
        if (planted_) {
            if (planted_->size() != n_) {
                throw InputError("planted assignment length differs from n");
            }
            for (std::size_t ci = 0; ci < clauses_.size(); ++ci) {
                if (!check_clause(*planted_, clauses_[ci])) {
                    throw InputError("planted assignment violates clause " + std::to_string(ci + 1));
                }
            }
        }
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return clauses_.size(); }
    std::size_t degree() const noexcept { return degree_; }
    std::uint32_t delta_milli() const noexcept { return delta_milli_; }
    double delta() const noexcept { return delta_milli_ / 1000.0; }
    const std::vector<Clause>& clauses() const noexcept { return clauses_; }
    const std::optional<Assignment>& planted() const noexcept { return planted_; }

    friend bool operator==(const Formula&, const Formula&) = default;

private:
    std::size_t n_;
    std::size_t degree_;
    std::uint32_t delta_milli_;
    std::vector<Clause> clauses_;
    std::optional<Assignment> planted_;
};

inline constexpr std::uint32_t kDefaultDeltaMilli = 150;
inline constexpr std::size_t kDefaultDegree = 4;

inline std::vector<std::size_t> occurrence_counts(const Formula& f) {
    std::vector<std::size_t> occ(f.n(), 0);
    for (const auto& c : f.clauses()) {
        for (auto v : c) {
            ++occ[v - 1];
        }
    }
    return occ;
}

inline std::size_t count_satisfied(const Formula& f, const Assignment& a) {
    if (a.size() != f.n()) {
        throw InputError("assignment length differs from formula n");
    }
    std::size_t sat = 0;
    for (const auto& c : f.clauses()) {
        sat += check_clause(a, c) ? 1 : 0;
    }
    return sat;
}

namespace detail {

// Pairs up a shuffled occurrence list so that no pair holds the same variable
// twice. Swaps count against `budget`.
inline void repair_pairs(std::vector<std::uint32_t>& occ, Rng& rng, std::size_t& budget) {
    const std::size_t pairs = occ.size() / 2;
    auto bad = [&](std::size_t p) { return occ[2 * p] == occ[2 * p + 1]; };
    for (std::size_t p = 0; p < pairs; ++p) {
        while (bad(p)) {
            if (budget == 0) {
                throw GenerationError("swap-repair budget exhausted");
            }
            --budget;
            const std::size_t j = uniform_below(rng, occ.size());
            const std::size_t q = j / 2;
            if (q == p) {
                continue;
            }
            const std::size_t partner = j ^ 1U;
            // After swapping occ[2p+1] <-> occ[j], pair p holds (occ[2p], occ[j])
            // and pair q holds (occ[partner], occ[2p+1]).
            if (occ[j] == occ[2 * p] || occ[partner] == occ[2 * p + 1]) {
                continue;
            }
            std::swap(occ[2 * p + 1], occ[j]);
        }
    }
}

} // namespace detail

// Random balanced formula with a planted satisfying assignment.
//
// Exactly-two-true clauses together with balance force the planted assignment
// to have exactly n/2 true variables, so it is drawn uniformly among those.
// True and false occurrence multisets (each variable r times) are shuffled,
// paired without repeats by bounded swap-repair, and one true pair plus one
// false pair form each clause.
inline Formula gen_balanced_planted(std::size_t n, std::size_t r, std::uint64_t seed,
                                    std::uint32_t delta_milli = kDefaultDeltaMilli) {
    if (n < 8) {
        throw GenerationError("n must be at least 8");
    }
    if (r < 1) {
        throw GenerationError("degree must be at least 1");
    }
    if ((n * r) % 4 != 0) {
        throw GenerationError("n*r = " + std::to_string(n * r) + " is not divisible by 4");
    }
    if (n % 2 != 0) {
        throw GenerationError("a balanced planted instance needs even n (the planted assignment has n/2 ones)");
    }
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw GenerationError("n too large");
    }
    Rng rng(seed);
    const std::size_t m = n * r / 4;

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = static_cast<std::uint32_t>(i + 1);
    }
    shuffle(order.begin(), order.end(), rng);
    Assignment planted(n);
    for (std::size_t i = 0; i < n / 2; ++i) {
        planted.set(order[i] - 1, true);
    }

    std::vector<std::uint32_t> true_occ;
    std::vector<std::uint32_t> false_occ;
    true_occ.reserve(2 * m);
    false_occ.reserve(2 * m);
    for (std::size_t round = 0; round < r; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            (i < n / 2 ? true_occ : false_occ).push_back(order[i]);
        }
    }
    shuffle(true_occ.begin(), true_occ.end(), rng);
    shuffle(false_occ.begin(), false_occ.end(), rng);

    std::size_t budget = 100 * m;
    detail::repair_pairs(true_occ, rng, budget);
    detail::repair_pairs(false_occ, rng, budget);

    std::vector<Clause> clauses(m);
    for (std::size_t i = 0; i < m; ++i) {
        Clause c{true_occ[2 * i], true_occ[2 * i + 1], false_occ[2 * i], false_occ[2 * i + 1]};
        shuffle(c.begin(), c.end(), rng);
        clauses[i] = c;
    }
    return Formula(n, r, delta_milli, std::move(clauses), std::move(planted));
}

// Exhaustive scans use one bit mask per clause; x_1 is bit 0.
inline constexpr std::size_t kMaxExhaustiveN = 26;

namespace detail {

inline std::vector<std::uint32_t> clause_masks(const Formula& f) {
    std::vector<std::uint32_t> masks;
    masks.reserve(f.m());
    for (const auto& c : f.clauses()) {
        std::uint32_t mask = 0;
        for (auto v : c) {
            mask |= 1U << (v - 1);
        }
        masks.push_back(mask);
    }
    return masks;
}

inline std::size_t satisfied_by_mask(const std::vector<std::uint32_t>& masks, std::uint32_t x) {
    std::size_t sat = 0;
    for (auto mk : masks) {
        sat += std::popcount(x & mk) == 2 ? 1 : 0;
    }
    return sat;
}

inline void require_exhaustive(const Formula& f) {
    if (f.n() > kMaxExhaustiveN) {
        throw RefusalError("exhaustive scan refused for n = " + std::to_string(f.n()) + " > " +
                           std::to_string(kMaxExhaustiveN));
    }
}

} // namespace detail

struct ExhaustiveResult {
    std::uint32_t best_mask = 0;   // lowest binary value among maximizers
    std::size_t max_satisfied = 0;
};

// Scans all assignments. Exactly-two-true is invariant under complementing
// every variable, so only assignments with x_n = 0 are visited; the
// complement of any maximizer has a larger binary value, which keeps the
// lowest-value tie rule intact.
inline ExhaustiveResult exhaustive_max_satisfied(const Formula& f) {
    detail::require_exhaustive(f);
    const auto masks = detail::clause_masks(f);
    const std::uint64_t half = std::uint64_t{1} << (f.n() - 1);
    ExhaustiveResult best{0, detail::satisfied_by_mask(masks, 0)};
    for (std::uint64_t x = 1; x < half && best.max_satisfied < f.m(); ++x) {
        const auto sat = detail::satisfied_by_mask(masks, static_cast<std::uint32_t>(x));
        if (sat > best.max_satisfied) {
            best = {static_cast<std::uint32_t>(x), sat};
        }
    }
    return best;
}

inline std::size_t min_unsatisfied(const Formula& f) {
    return f.m() - exhaustive_max_satisfied(f).max_satisfied;
}

// Minimum over all assignments of the unsatisfied-clause fraction.
inline double brute_force_delta(const Formula& f) {
    return static_cast<double>(min_unsatisfied(f)) / static_cast<double>(f.m());
}

// Turns a planted instance into a certified NO-instance by swapping variable
// occurrences between random clause pairs (balance is preserved) until the
// exhaustive minimum of unsatisfied clauses reaches `min_unsat`. Swaps that
// lower the current minimum are undone. The returned formula has no planted
// assignment and delta = floor(1000 * min_unsat / M) in milli-units, so the
// recorded promise never overstates the certified gap.
inline Formula perturb_to_unsat(const Formula& f, std::size_t min_unsat, Rng& rng, std::size_t max_swaps = 10000) {
    detail::require_exhaustive(f);
    if (min_unsat == 0 || min_unsat > f.m()) {
        throw InputError("min_unsat must lie in [1, M]");
    }
    if (f.m() < 2) {
        throw GenerationError("need at least two clauses to perturb");
    }
    std::vector<Clause> clauses = f.clauses();
    std::size_t current = min_unsatisfied(f);
    std::size_t swaps = 0;
    while (swaps < max_swaps) {
        const auto a = uniform_below(rng, clauses.size());
        const auto b = uniform_below(rng, clauses.size());
        if (a == b) {
            continue;
        }
        const auto pa = uniform_below(rng, 4);
        const auto pb = uniform_below(rng, 4);
        const auto va = clauses[a][pa];
        const auto vb = clauses[b][pb];
        auto contains = [](const Clause& c, std::uint32_t v) { return std::find(c.begin(), c.end(), v) != c.end(); };
        if (va == vb || contains(clauses[a], vb) || contains(clauses[b], va)) {
            continue;
        }
        std::swap(clauses[a][pa], clauses[b][pb]);
        ++swaps;
        const auto unsat = min_unsatisfied(Formula(f.n(), f.degree(), 0, clauses));
        if (unsat >= min_unsat) {
            const auto milli = static_cast<std::uint32_t>((1000 * unsat) / f.m());
            return Formula(f.n(), f.degree(), milli, std::move(clauses));
        }
        if (unsat < current) {
            std::swap(clauses[a][pa], clauses[b][pb]);
        } else {
            current = unsat;
        }
    }
    throw GenerationError("could not reach " + std::to_string(min_unsat) + " unsatisfiable clauses within " +
                          std::to_string(max_swaps) + " swaps");
}

// `copies` disjoint copies of f on fresh variables. Copies share no variable,
// so the minimum number of unsatisfied clauses scales by `copies` and the
// unsatisfiable fraction, hence delta_milli, carries over unchanged.
inline Formula replicate(const Formula& f, std::size_t copies) {
    if (copies == 0) {
        throw InputError("copies must be >= 1");
    }
    std::vector<Clause> clauses;
    clauses.reserve(f.m() * copies);
    for (std::size_t k = 0; k < copies; ++k) {
        const auto shift = static_cast<std::uint32_t>(k * f.n());
        for (auto c : f.clauses()) {
            for (auto& v : c) {
                v += shift;
            }
            clauses.push_back(c);
        }
    }
    std::optional<Assignment> planted;
    if (f.planted()) {
        std::string bits;
        for (std::size_t k = 0; k < copies; ++k) {
            bits += f.planted()->to_string();
        }
        planted = Assignment::from_string(bits);
    }
    return Formula(f.n() * copies, f.degree(), f.delta_milli(), std::move(clauses), std::move(planted));
}

// --- text format -----------------------------------------------------------
//
//   p 2in4 <N> <M> <r> <delta-milli>
//   a <bitstring>            (optional)
//   c i j k l                (M lines, 1-based)

inline void serialize(const Formula& f, std::ostream& os) {
    os << "p 2in4 " << f.n() << ' ' << f.m() << ' ' << f.degree() << ' ' << f.delta_milli() << '\n';
    if (f.planted()) {
        os << "a " << f.planted()->to_string() << '\n';
    }
    for (const auto& c : f.clauses()) {
        os << "c " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
    }
}

inline std::string serialize(const Formula& f) {
    std::ostringstream os;
    serialize(f, os);
    return os.str();
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') {
            ++i;
        }
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ') {
            ++j;
        }
        if (j > i) {
            out.push_back(s.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

inline std::uint64_t parse_uint(std::string_view tok, std::size_t line, const char* what) {
    if (tok.empty() || tok.size() > 19) {
        throw ParseError(line, std::string("malformed ") + what);
    }
    std::uint64_t v = 0;
    for (char ch : tok) {
        if (ch < '0' || ch > '9') {
            throw ParseError(line, std::string("malformed ") + what + " '" + std::string(tok) + "'");
        }
        v = v * 10 + static_cast<std::uint64_t>(ch - '0');
    }
    return v;
}

} // namespace detail

inline Formula parse_formula(std::istream& is) {
    std::string raw;
    std::size_t line = 0;
    std::optional<std::array<std::uint64_t, 4>> header;  // n, m, r, delta-milli
    std::optional<Assignment> planted;
    std::vector<Clause> clauses;

    while (std::getline(is, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r') {
            throw ParseError(line, "CR line endings are not accepted");
        }
        const auto toks = detail::split_ws(raw);
        if (toks.empty()) {
            continue;
        }
        if (!header) {
            if (toks.size() != 6 || toks[0] != "p" || toks[1] != "2in4") {
                throw ParseError(line, "expected header 'p 2in4 <N> <M> <r> <delta-milli>'");
            }
            header = std::array<std::uint64_t, 4>{
                detail::parse_uint(toks[2], line, "N"), detail::parse_uint(toks[3], line, "M"),
                detail::parse_uint(toks[4], line, "r"), detail::parse_uint(toks[5], line, "delta-milli")};
            if ((*header)[0] == 0 || (*header)[0] > std::numeric_limits<std::uint32_t>::max()) {
                throw ParseError(line, "N out of range");
            }
            if ((*header)[3] > 1000) {
                throw ParseError(line, "delta-milli must be at most 1000");
            }
            continue;
        }
        const auto n = (*header)[0];
        if (toks[0] == "a") {
            if (planted || !clauses.empty()) {
                throw ParseError(line, "assignment line must appear once, before clauses");
            }
            if (toks.size() != 2 || toks[1].size() != n) {
                throw ParseError(line, "assignment must be a single bitstring of length N");
            }
            try {
                planted = Assignment::from_string(toks[1]);
            } catch (const InputError& e) {
                throw ParseError(line, e.what());
            }
            continue;
        }
        if (toks[0] == "c") {
            if (toks.size() != 5) {
                throw ParseError(line, "clause must list exactly 4 variables, got " + std::to_string(toks.size() - 1));
            }
            Clause c{};
            for (std::size_t p = 0; p < 4; ++p) {
                const auto v = detail::parse_uint(toks[p + 1], line, "variable index");
                if (v == 0 || v > n) {
                    throw ParseError(line, "variable index " + std::to_string(v) + " outside [1, " + std::to_string(n) + "]");
                }
                c[p] = static_cast<std::uint32_t>(v);
                for (std::size_t q = 0; q < p; ++q) {
                    if (c[q] == c[p]) {
                        throw ParseError(line, "duplicate variable index " + std::to_string(v));
                    }
                }
            }
            if (clauses.size() == (*header)[1]) {
                throw ParseError(line, "more clause lines than header M = " + std::to_string((*header)[1]));
            }
            clauses.push_back(c);
            continue;
        }
        throw ParseError(line, "unknown line type '" + std::string(toks[0]) + "'");
    }
    if (!header) {
        throw ParseError(line + 1, "missing header");
    }
    if (clauses.size() != (*header)[1]) {
        throw ParseError(line + 1, "header declares M = " + std::to_string((*header)[1]) + " but " +
                                       std::to_string(clauses.size()) + " clause lines follow");
    }
    try {
        return Formula((*header)[0], (*header)[2], static_cast<std::uint32_t>((*header)[3]), std::move(clauses),
                       std::move(planted));
    } catch (const InputError& e) {
        throw ParseError(line + 1, e.what());
    }
}

inline Formula parse_formula(std::string_view text) {
    std::istringstream is{std::string(text)};
    return parse_formula(is);
}

} // namespace npqv
