#include <gtest/gtest.h>

#include <sstream>

#include "npqv/satgen.hpp"
#include "oracles.hpp"

using namespace npqv;

TEST(CheckClause, ExactlyTwoTrue) {
    const Clause c{1, 2, 3, 4};
    EXPECT_TRUE(check_clause(Assignment::from_string("1100"), c));
    EXPECT_FALSE(check_clause(Assignment::from_string("1110"), c));
    EXPECT_FALSE(check_clause(Assignment::from_string("0000"), c));
    EXPECT_FALSE(check_clause(Assignment::from_string("1000"), c));
    EXPECT_TRUE(check_clause(Assignment::from_string("0101"), c));
}

TEST(CheckClause, OutOfRangeIsInputError) {
    EXPECT_THROW(check_clause(Assignment::from_string("1100"), Clause{1, 2, 3, 5}), InputError);
    EXPECT_THROW(check_clause(Assignment::from_string("1100"), Clause{0, 2, 3, 4}), InputError);
}

TEST(CheckClause, ComplementSymmetryProperty) {
    Rng rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto a = Assignment::random(12, rng);
        std::vector<std::uint32_t> vars{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
        shuffle(vars.begin(), vars.end(), rng);
        const Clause c{vars[0], vars[1], vars[2], vars[3]};
        EXPECT_EQ(check_clause(a, c), check_clause(a.complemented(), c));
    }
}

TEST(Formula, RejectsUnbalancedAndDuplicates) {
    EXPECT_THROW(Formula(4, 1, 150, {Clause{1, 1, 2, 3}}), InputError);
    EXPECT_THROW(Formula(8, 1, 150, {Clause{1, 2, 3, 4}, Clause{1, 6, 7, 8}}), InputError);
    EXPECT_THROW(Formula(8, 1, 150, {Clause{1, 2, 3, 4}}), InputError);
    EXPECT_THROW(Formula(4, 1, 150, {Clause{1, 2, 3, 4}}, Assignment::from_string("1110")), InputError);
    EXPECT_NO_THROW(Formula(4, 1, 150, {Clause{1, 2, 3, 4}}, Assignment::from_string("1100")));
}

TEST(Generator, SmallestInstance) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto f = gen_balanced_planted(8, 1, seed);
        EXPECT_EQ(f.m(), 2u);
        ASSERT_TRUE(f.planted());
        for (auto occ : occurrence_counts(f)) {
            EXPECT_EQ(occ, 1u);
        }
        EXPECT_EQ(count_satisfied(f, *f.planted()), 2u);
    }
}

TEST(Generator, LargeBalancedInstance) {
    const auto f = gen_balanced_planted(10000, 4, 7);
    EXPECT_EQ(f.m(), 10000u);
    std::vector<std::size_t> occ(f.n(), 0);
    for (const auto& c : f.clauses()) {
        for (auto v : c) {
            ++occ[v - 1];
        }
    }
    for (auto o : occ) {
        ASSERT_EQ(o, 4u);
    }
    EXPECT_EQ(count_satisfied(f, *f.planted()), f.m());
    EXPECT_EQ(f.planted()->count_ones(), 5000u);
}

TEST(Generator, InfeasibleParameters) {
    EXPECT_THROW(gen_balanced_planted(7, 1, 0), GenerationError);
    EXPECT_THROW(gen_balanced_planted(9, 4, 0), GenerationError);  // odd n cannot plant n/2 ones
    EXPECT_THROW(gen_balanced_planted(6, 2, 0), GenerationError);
    EXPECT_THROW(gen_balanced_planted(10, 0, 0), GenerationError);
}

TEST(Generator, DeterministicGivenSeed) {
    EXPECT_EQ(gen_balanced_planted(200, 4, 99), gen_balanced_planted(200, 4, 99));
    EXPECT_NE(gen_balanced_planted(200, 4, 99), gen_balanced_planted(200, 4, 100));
}

// Balance, plantedness, zero delta and serialize/parse identity over many
// generated instances.
TEST(Generator, InvariantsProperty) {
    Rng pick(5);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 8 + 2 * uniform_below(pick, 8);  // even, 8..22
        std::size_t r = 2 * (1 + uniform_below(pick, 3));  // 2, 4, 6
        const auto f = gen_balanced_planted(n, r, pick());
        for (auto occ : occurrence_counts(f)) {
            ASSERT_EQ(occ, r);
        }
        for (const auto& c : f.clauses()) {
            ASSERT_TRUE(check_clause(*f.planted(), c));
        }
        if (n <= 16) {
            EXPECT_EQ(brute_force_delta(f), 0.0);
        }
        EXPECT_EQ(parse_formula(serialize(f)), f);
    }
}

TEST(BruteForce, SingleClause) {
    const Formula f(4, 1, 150, {Clause{1, 2, 3, 4}});
    EXPECT_EQ(brute_force_delta(f), 0.0);
}

TEST(BruteForce, PlantedIsZero) {
    EXPECT_EQ(brute_force_delta(gen_balanced_planted(20, 4, 3)), 0.0);
}

TEST(BruteForce, PerturbedInstanceMatchesIndependentScan) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Rng rng(seed);
        const auto planted = gen_balanced_planted(16, 4, seed);
        const auto f = perturb_to_unsat(planted, 1, rng);
        const double delta = brute_force_delta(f);
        EXPECT_GT(delta, 0.0);
        EXPECT_DOUBLE_EQ(delta, oracle::delta(f));
        EXPECT_LE(f.delta(), delta);
        EXPECT_FALSE(f.planted());
        for (auto occ : occurrence_counts(f)) {
            EXPECT_EQ(occ, 4u);
        }
    }
}

TEST(BruteForce, ExhaustiveMaximizerMatchesOracle) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(100 + seed);
        const auto f = perturb_to_unsat(gen_balanced_planted(14, 4, seed), 2, rng);
        const auto lib = exhaustive_max_satisfied(f);
        const auto ref = oracle::exhaustive_scan(f);
        EXPECT_EQ(lib.max_satisfied, ref.max_satisfied);
        EXPECT_EQ(lib.best_mask, ref.lowest_maximizer);
    }
}

TEST(BruteForce, RefusesLargeN) {
    const auto f = gen_balanced_planted(30, 2, 1);
    EXPECT_THROW(brute_force_delta(f), RefusalError);
}

TEST(Format, ExactLayout) {
    const Formula f(8, 1, 150, {Clause{1, 2, 3, 4}, Clause{5, 6, 7, 8}}, Assignment::from_string("11000011"));
    EXPECT_EQ(serialize(f), "p 2in4 8 2 1 150\na 11000011\nc 1 2 3 4\nc 5 6 7 8\n");
}

TEST(Format, ParseErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_formula(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("p 2in4 8 2 1 150\nc 1 2 3\nc 5 6 7 8\n"), 2u);      // arity
    EXPECT_EQ(line_of("p 2in4 8 3 1 150\nc 1 2 3 4\nc 5 6 7 8\n"), 4u);    // M vs clause count
    EXPECT_EQ(line_of("p 2in4 8 2 1 150\nc 1 2 3 4\nc 5 6 6 8\n"), 3u);    // duplicate index
    EXPECT_EQ(line_of("p 2in3 8 2 1 150\n"), 1u);                          // header
    EXPECT_EQ(line_of("c 1 2 3 4\n"), 1u);                                 // missing header
    EXPECT_EQ(line_of("p 2in4 8 2 1 150\nc 1 2 3 9\nc 5 6 7 8\n"), 2u);    // range
    EXPECT_EQ(line_of("p 2in4 8 2 1 150\na 1100\nc 1 2 3 4\nc 5 6 7 8\n"), 2u);
    EXPECT_EQ(line_of("p 2in4 8 2 1 150\nc 1 2 3 4\nc 5 6 7 8\nc 1 5 2 6\n"), 4u);
    EXPECT_EQ(line_of("p 2in4 8 2 1 150\nc 1 2 3 4\r\nc 5 6 7 8\n"), 2u);
    EXPECT_EQ(line_of("p 2in4 8 2 1 150\nc 1 2 3 4\nc 5 6 7 8\n"), 0u);
}

TEST(Format, UnbalancedFileRejected) {
    EXPECT_THROW(parse_formula("p 2in4 8 2 1 150\nc 1 2 3 4\nc 1 6 7 8\n"), ParseError);
}
