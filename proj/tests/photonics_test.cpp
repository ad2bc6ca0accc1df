#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "npqv/photonics.hpp"
#include "npqv/protocol.hpp"
#include "oracles.hpp"

using namespace npqv;

TEST(IdealDetect, Examples) {
    auto vac = ideal_detect_prob(0.0, false);
    EXPECT_EQ(vac.d0, 0.0);
    EXPECT_EQ(vac.d1, 0.0);
    auto big = ideal_detect_prob(50.0, false);
    EXPECT_DOUBLE_EQ(big.d0, 1.0);
    EXPECT_EQ(big.d1, 0.0);
    // 1 - exp(-2.62), 40-digit reference
    EXPECT_NEAR(ideal_detect_prob(1.31, false).d0, 0.9271971371725644069, 1e-15);
    EXPECT_NEAR(ideal_detect_prob(1.31, true).d1, 0.9271971371725644069, 1e-15);
    EXPECT_THROW(ideal_detect_prob(-0.1, false), InputError);
}

TEST(ClickProbabilities, PerfectVisibilityCollapse) {
    for (double mu : {0.0, 0.1, 0.7, 1.31, 4.0}) {
        const auto p = click_probabilities({mu, 1.0, 0.0});
        EXPECT_EQ(p.p_w, 0.0);
        EXPECT_EQ(p.p_dc, 0.0);
        EXPECT_NEAR(p.p_c, 1.0 - std::exp(-2.0 * mu), 1e-15);
        EXPECT_NEAR(p.p_h, ideal_detect_prob(mu, false).d0, 1e-15);
    }
}

TEST(ClickProbabilities, FrozenHighPrecisionValues) {
    // mu = 1.15, nu = 0.95, 40-digit evaluation
    const auto p = click_probabilities({1.15, 0.95, 0.0});
    EXPECT_NEAR(p.p_c, 0.79110730018402763464, 1e-14);
    EXPECT_NEAR(p.p_w, 0.01221888993148584434, 1e-14);
    EXPECT_NEAR(p.p_dc, 0.09641496616168278729, 1e-14);
    EXPECT_NEAR(p.p_d, 1.0 - std::exp(-1.15), 1e-15);

    const auto q = click_probabilities({1.30, 0.93, 0.0});
    EXPECT_NEAR(q.p_c + q.p_w, 0.77415382264322912988, 1e-14);
}

TEST(ClickProbabilities, SimplexAndRangeProperty) {
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        const OpticalParams op{5.0 * uniform01(rng), uniform01(rng), 0.01 * uniform01(rng)};
        const auto p = click_probabilities(op);
        EXPECT_NEAR(p.p_c + p.p_w + p.p_dc + p.p_none, 1.0, 1e-12);
        EXPECT_DOUBLE_EQ(p.p_h, p.p_c + p.p_w + p.p_dc);
        for (double v : {p.p_c, p.p_w, p.p_dc, p.p_none, p.p_h, p.p_d}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(ClickProbabilities, Monotonicity) {
    for (double mu : {0.3, 1.0, 1.31, 2.5}) {
        double prev_c = -1.0;
        double prev_w = 2.0;
        for (int i = 0; i <= 100; ++i) {
            const double nu = 0.5 + 0.005 * i;
            const auto p = click_probabilities({mu, nu, 0.0});
            EXPECT_GT(p.p_c, prev_c);
            EXPECT_LT(p.p_w, prev_w);
            prev_c = p.p_c;
            prev_w = p.p_w;
        }
    }
    double prev_h = -1.0;
    for (int i = 1; i <= 200; ++i) {
        const auto p = click_probabilities({0.02 * i, 0.93, 0.0});
        EXPECT_GT(p.p_h, prev_h);
        prev_h = p.p_h;
    }
}

TEST(ClickProbabilities, FloorHoldsForHonestAndVacuumInputs) {
    for (double mu : {0.05, 0.5, 1.31, 3.0}) {
        for (double nu : {0.5, 0.8, 0.93, 1.0}) {
            const auto h = click_probabilities({mu, nu, 0.0});
            EXPECT_GE(h.p_h, h.p_d - 1e-15);
        }
        const auto v = vacuum_click_probabilities({mu, 0.93, 0.0});
        EXPECT_NEAR(v.p_h, 1.0 - std::exp(-mu), 1e-14);
    }
}

TEST(ClickProbabilities, DarkCountsAreNegligibleAtOperatingPoint) {
    const auto clean = click_probabilities({1.31, 0.93, 0.0});
    const auto dark = click_probabilities({1.31, 0.93, 1e-3});
    EXPECT_LT(std::abs(p_yes(dark) - p_yes(clean)) / p_yes(clean), 5e-3);
    EXPECT_LT(std::abs(dark.p_h - clean.p_h), 2e-3);
    EXPECT_GT(dark.p_h, clean.p_h);
}

TEST(ClickProbabilities, RejectsInvalidParams) {
    EXPECT_THROW(click_probabilities({-1.0, 0.9, 0.0}), InputError);
    EXPECT_THROW(click_probabilities({1.0, 1.1, 0.0}), InputError);
    EXPECT_THROW(click_probabilities({1.0, 0.9, 1.0}), InputError);
}

TEST(SampleClick, DegenerateCategorical) {
    const auto p = click_probabilities({40.0, 1.0, 0.0});
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(sample_click(p, false, rng), ClickOutcome::D0);
        EXPECT_EQ(sample_click(p, true, rng), ClickOutcome::D1);
    }
}

TEST(SampleClick, ChiSquareAtOneMillionDraws) {
    const auto p = click_probabilities({1.31, 0.93, 0.0});
    Rng rng(2024);
    std::array<double, 4> obs{};
    const int draws = 1'000'000;
    for (int i = 0; i < draws; ++i) {
        switch (sample_click(p, false, rng)) {
        case ClickOutcome::D0: obs[0] += 1; break;
        case ClickOutcome::D1: obs[1] += 1; break;
        case ClickOutcome::Both: obs[2] += 1; break;
        case ClickOutcome::None: obs[3] += 1; break;
        }
    }
    const std::array<double, 4> prob{p.p_c, p.p_w, p.p_dc, p.p_none};
    double chi2 = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double expected = draws * prob[k];
        chi2 += (obs[k] - expected) * (obs[k] - expected) / expected;
        EXPECT_LE(std::abs(obs[k] - expected), 4.0 * oracle::binom_sigma(draws, prob[k]));
    }
    // chi-square with 3 degrees of freedom, upper 0.001 quantile
    EXPECT_LT(chi2, 16.266);
}

TEST(SampleClick, VacuumFloorMonteCarlo) {
    const double mu = 0.8;
    const auto v = vacuum_click_probabilities({mu, 0.93, 0.0});
    Rng rng(77);
    const int draws = 400'000;
    int clicks = 0;
    for (int i = 0; i < draws; ++i) {
        clicks += sample_click(v, std::nullopt, rng) != ClickOutcome::None ? 1 : 0;
    }
    const double floor = 1.0 - std::exp(-mu);
    EXPECT_GE(clicks, draws * floor - 4.0 * oracle::binom_sigma(draws, floor));
    EXPECT_NEAR(static_cast<double>(clicks) / draws, floor, 4.0 * oracle::binom_sigma(draws, floor) / draws);
}

namespace {

ClickTrace zeros_trace(double mu, double nu, std::size_t n, std::uint64_t seed) {
    const auto p = click_probabilities({mu, nu, 0.0});
    Rng rng(seed);
    ClickTrace t(n);
    for (auto& o : t) {
        o = sample_click(p, false, rng);
    }
    return t;
}

} // namespace

TEST(CalibrateVisibility, PerfectVisibility) {
    EXPECT_EQ(calibrate_visibility(zeros_trace(1.31, 1.0, 10000, 4), 1.31), 1.0);
}

TEST(CalibrateVisibility, RecoversNominalVisibility) {
    const double est = calibrate_visibility(zeros_trace(1.31, 0.93, 1'000'000, 5), 1.31);
    EXPECT_GE(est, 0.9285);
    EXPECT_LE(est, 0.9315);
}

TEST(CalibrateVisibility, EmptyTraceRejected) {
    EXPECT_THROW(calibrate_visibility({}, 1.31), InputError);
}

TEST(TraceCsv, RoundTripAndErrors) {
    const auto t = zeros_trace(1.0, 0.8, 500, 6);
    std::stringstream ss;
    write_trace_csv(t, ss);
    EXPECT_EQ(read_trace_csv(ss), t);

    std::istringstream bad_code("pulse_index,outcome\n1,N\n2,X\n");
    EXPECT_THROW(read_trace_csv(bad_code), ParseError);
    std::istringstream bad_index("pulse_index,outcome\n1,N\n3,0\n");
    EXPECT_THROW(read_trace_csv(bad_index), ParseError);
    std::istringstream bad_header("index,outcome\n");
    EXPECT_THROW(read_trace_csv(bad_header), ParseError);
}
