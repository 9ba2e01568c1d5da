#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cmtsketch/cml.hpp"

namespace {

using namespace cmt;

SketchConfig cml_config(double base, std::uint32_t bits, std::uint32_t depth, std::uint64_t width,
                        std::uint64_t seed) {
    SketchConfig c = bits == 8 ? cmls8_cu_config(depth, width, seed) : cmls16_cu_config(depth, width, seed);
    c.cml.base = base;
    return c;
}

struct Moments {
    double mean;
    double se;
};

Moments estimate_moments(double base, std::uint32_t bits, std::uint64_t n, int runs) {
    std::vector<double> est;
    for (int seed = 1; seed <= runs; ++seed) {
        CountMinLogSketch s(cml_config(base, bits, 4, 1024, seed));
        s.update("key", n);
        est.push_back(s.estimate("key"));
    }
    double mean = 0;
    for (double e : est) mean += e;
    mean /= runs;
    double var = 0;
    for (double e : est) var += (e - mean) * (e - mean);
    var /= runs - 1;
    return {mean, std::sqrt(var / runs)};
}

TEST(CmlPointValue, Examples) {
    EXPECT_EQ(CountMinLogSketch::point_value(0, 1.08), 0.0);
    EXPECT_DOUBLE_EQ(CountMinLogSketch::point_value(1, 1.08), 1.0);
    EXPECT_NEAR(CountMinLogSketch::point_value(2, 1.08), 2.08, 1e-12);
    EXPECT_NEAR(CountMinLogSketch::point_value(3, 1.08), 1 + 1.08 + 1.08 * 1.08, 1e-12);
}

TEST(CmlPointValue, MatchesGeometricSumForSmallBase) {
    const double b = 1.00025;
    double sum = 0;
    double term = 1;
    for (std::uint32_t c = 1; c <= 2000; ++c) {
        sum += term;
        term *= b;
        ASSERT_NEAR(CountMinLogSketch::point_value(c, b), sum, sum * 1e-11);
    }
}

TEST(CmlFires, Probability) {
    EXPECT_TRUE(CountMinLogSketch::fires(0, 0.999999, 1.08));
    EXPECT_TRUE(CountMinLogSketch::fires(3, 0.5, 1.08));  // 1.08^-3 ~ 0.794
    EXPECT_FALSE(CountMinLogSketch::fires(3, 0.8, 1.08));
}

TEST(Cml, EstimateUsesMinimumExponent) {
    CountMinLogSketch s(cml_config(1.08, 8, 2, 64, 1));
    const KeyDigest d = s.hasher().digest("K");
    s.set_exponent(0, s.hasher().cell(d, 0), 2);
    s.set_exponent(1, s.hasher().cell(d, 1), 4);
    EXPECT_NEAR(s.estimate(d), 2.08, 1e-12);
}

TEST(Cml, OnlyMinimumRowsAdvance) {
    CountMinLogSketch s(cml_config(1.08, 8, 2, 64, 1));
    const KeyDigest d = s.hasher().digest("K");
    const auto c0 = s.hasher().cell(d, 0);
    const auto c1 = s.hasher().cell(d, 1);
    s.set_exponent(0, c0, 3);
    s.set_exponent(1, c1, 5);
    s.increment_with_draw(d, 0.5);
    EXPECT_EQ(s.exponent(0, c0), 4u);
    EXPECT_EQ(s.exponent(1, c1), 5u);
    s.increment_with_draw(d, 0.99);
    EXPECT_EQ(s.exponent(0, c0), 4u);
}

TEST(Cml, SetExponentRejectsOverflow) {
    CountMinLogSketch s(cml_config(1.08, 8, 1, 4, 1));
    EXPECT_THROW(s.set_exponent(0, 0, 256), std::out_of_range);
}

TEST(Cml, SaturatedCellsStayPut) {
    CountMinLogSketch s(cml_config(1.08, 8, 2, 4, 1));
    for (std::uint32_t r = 0; r < 2; ++r)
        for (std::uint64_t c = 0; c < 4; ++c) s.set_exponent(r, c, 255);
    s.update("K", 100);
    EXPECT_EQ(s.min_exponent(s.hasher().digest("K")), 255u);
    EXPECT_DOUBLE_EQ(s.estimate("K"), CountMinLogSketch::point_value(255, 1.08));
}

TEST(Cml, FirstIncrementIsExact) {
    CountMinLogSketch s(cml_config(1.08, 8, 4, 1024, 3));
    s.increment("x");
    EXPECT_EQ(s.estimate("x"), 1.0);
}

TEST(Cml, DeterministicForSeed) {
    CountMinLogSketch a(cml_config(1.08, 8, 4, 256, 42));
    CountMinLogSketch b(cml_config(1.08, 8, 4, 256, 42));
    for (int i = 0; i < 5000; ++i) {
        const std::string k = "k" + std::to_string(i % 97);
        a.increment(k);
        b.increment(k);
    }
    EXPECT_TRUE(std::ranges::equal(a.cell_bytes(), b.cell_bytes()));
    EXPECT_EQ(a.rng_state(), b.rng_state());
}

class CmlUnbiased : public ::testing::TestWithParam<std::tuple<double, std::uint32_t, std::uint64_t>> {};

TEST_P(CmlUnbiased, MeanWithinThreeStandardErrors) {
    const auto [base, bits, n] = GetParam();
    const Moments m = estimate_moments(base, bits, n, 100);
    EXPECT_LE(std::abs(m.mean - static_cast<double>(n)), std::max(3 * m.se, 1e-9 * n))
        << "mean " << m.mean << " se " << m.se;
}

INSTANTIATE_TEST_SUITE_P(Bases, CmlUnbiased,
                         ::testing::Values(std::make_tuple(1.08, 8u, 100ull), std::make_tuple(1.08, 8u, 10000ull),
                                           std::make_tuple(1.00025, 16u, 100ull),
                                           std::make_tuple(1.00025, 16u, 10000ull)));

TEST(Cml, LargeCountMeanWithinFifteenPercent) {
    const Moments m = estimate_moments(1.08, 8, 100000, 20);
    EXPECT_NEAR(m.mean, 1e5, 0.15e5);
}

TEST(Cml, CoarseBaseKeepsResidualErrorAtAnyWidth) {
    for (std::uint64_t width : {1u << 18, 1u << 20}) {
        CountMinLogSketch s(cml_config(1.08, 8, 4, width, 7));
        constexpr int kKeys = 10000;
        for (int rep = 0; rep < 1000; ++rep)
            for (int k = 0; k < kKeys; ++k) s.increment("key" + std::to_string(k));
        double are = 0;
        for (int k = 0; k < kKeys; ++k) are += std::abs(s.estimate("key" + std::to_string(k)) - 1000.0) / 1000.0;
        are /= kKeys;
        EXPECT_GT(are, 0.01) << "width " << width;
    }
}

}  // namespace
