#include <gtest/gtest.h>

#include <map>
#include <random>
#include <string>
#include <vector>

#include "cmtsketch/cms.hpp"
#include "cmtsketch/sketch.hpp"

namespace {

using namespace cmt;

std::vector<std::string> key_pool(std::size_t n) {
    std::vector<std::string> keys;
    for (std::size_t i = 0; i < n; ++i) keys.push_back("k" + std::to_string(i));
    return keys;
}

TEST(Cms, EmptyEstimatesZero) {
    CountMinSketch s(cms_cu_config(4, 1024, 1));
    EXPECT_EQ(s.estimate("anything"), 0u);
}

TEST(Cms, SingleUpdateSetsEveryRow) {
    CountMinSketch s(cms_cu_config(4, 1024, 1));
    s.increment("K");
    const KeyDigest d = s.hasher().digest("K");
    for (std::uint32_t r = 0; r < 4; ++r) EXPECT_EQ(s.cell(r, s.hasher().cell(d, r)), 1u);
    EXPECT_EQ(s.estimate("K"), 1u);
}

TEST(Cms, ConservativeStepOnlyRaisesMinimum) {
    CountMinSketch s(cms_cu_config(3, 64, 7));
    const KeyDigest d = s.hasher().digest("K");
    const std::uint64_t start[3] = {5, 7, 9};
    for (std::uint32_t r = 0; r < 3; ++r) s.mutable_cells()[r * 64 + s.hasher().cell(d, r)] = start[r];
    s.increment(d);
    EXPECT_EQ(s.cell(0, s.hasher().cell(d, 0)), 6u);
    EXPECT_EQ(s.cell(1, s.hasher().cell(d, 1)), 7u);
    EXPECT_EQ(s.cell(2, s.hasher().cell(d, 2)), 9u);
}

TEST(Cms, FullCollisionSharesCell) {
    CountMinSketch s(cms_cu_config(1, 1, 3));
    s.increment("a");
    s.increment("b");
    EXPECT_EQ(s.cell(0, 0), 2u);
}

TEST(Cms, CollidingRowIsNotRaisedPastMinPlusOne) {
    // row 0: K shares a cell already at 5; row 1: K's private cell.
    CountMinSketch s(cms_cu_config(2, 1 << 12, 17));
    const KeyDigest d = s.hasher().digest("K");
    const auto c0 = s.hasher().cell(d, 0);
    const auto c1 = s.hasher().cell(d, 1);
    s.mutable_cells()[c0] = 5;
    s.increment(d);
    s.increment(d);
    EXPECT_EQ(s.cell(0, c0), 5u);
    EXPECT_EQ(s.cell(1, c1), 2u);
    EXPECT_EQ(s.estimate(d), 2u);
}

TEST(Cms, SaturatesSilently) {
    CountMinSketch s(cms_cu_config(2, 8, 1));
    s.update("K", CountMinSketch::kMaxCell - 1);
    s.update("K", 5);
    EXPECT_EQ(s.estimate("K"), CountMinSketch::kMaxCell);
    s.increment("K");
    EXPECT_EQ(s.estimate("K"), CountMinSketch::kMaxCell);
}

TEST(Cms, IsolatedIncrementsAreExact) {
    CountMinSketch s(cms_cu_config(4, 1 << 16, 5));
    for (int i = 0; i < 37; ++i) s.increment("only");
    EXPECT_EQ(s.estimate("only"), 37u);
}

TEST(Cms, MostDistinctSingletonsExactOnWideSketch) {
    CountMinSketch s(cms_cu_config(4, 1 << 16, 9));
    const auto keys = key_pool(10000);
    for (const auto& k : keys) s.increment(k);
    std::size_t exact = 0;
    for (const auto& k : keys) exact += s.estimate(k) == 1;
    EXPECT_GE(exact, 9900u);
}

// Property: never underestimates, for random streams over many seeds.
TEST(Cms, NeverUnderestimates) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        CountMinSketch s(cms_cu_config(3, 500, seed));
        std::mt19937_64 gen(seed * 31);
        const auto keys = key_pool(3000);
        std::map<std::string, std::uint64_t> truth;
        for (int i = 0; i < 10000; ++i) {
            const auto& k = keys[gen() % keys.size()];
            s.increment(k);
            ++truth[k];
        }
        for (const auto& [k, n] : truth) ASSERT_GE(s.estimate(k), n) << k;
    }
}

// Property: conservative cells are pointwise <= plain-update cells.
TEST(Cms, ConservativeUpdateDominatedByPlain) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const SketchConfig c = cms_cu_config(4, 256, seed);
        CountMinSketch cu(c);
        CountMinSketch plain(c, CountMinSketch::UpdateRule::Plain);
        std::mt19937_64 gen(seed);
        const auto keys = key_pool(2000);
        for (int i = 0; i < 20000; ++i) {
            const auto& k = keys[gen() % keys.size()];
            cu.increment(k);
            plain.increment(k);
        }
        for (std::size_t i = 0; i < cu.cells().size(); ++i) ASSERT_LE(cu.cells()[i], plain.cells()[i]);
    }
}

// Property: update(k, n) equals n single increments.
TEST(Cms, BatchedUpdateMatchesRepeatedIncrements) {
    const SketchConfig c = cms_cu_config(3, 64, 77);
    CountMinSketch batched(c);
    CountMinSketch single(c);
    std::mt19937_64 gen(5);
    const auto keys = key_pool(300);
    for (int i = 0; i < 2000; ++i) {
        const auto& k = keys[gen() % keys.size()];
        const std::uint64_t n = 1 + gen() % 5;
        batched.update(k, n);
        for (std::uint64_t j = 0; j < n; ++j) single.increment(k);
    }
    EXPECT_TRUE(std::equal(batched.cells().begin(), batched.cells().end(), single.cells().begin()));
}

TEST(Cms, DispatcherMatchesDirectQuery) {
    Sketch wrapped(cms_cu_config(4, 128, 3));
    CountMinSketch direct(cms_cu_config(4, 128, 3));
    const auto keys = key_pool(500);
    for (const auto& k : keys) {
        wrapped.update(k);
        direct.increment(k);
    }
    for (const auto& k : keys) EXPECT_EQ(wrapped.estimate(k), static_cast<double>(direct.estimate(k)));
    EXPECT_THROW(wrapped.update("x", 0), std::invalid_argument);
}

}  // namespace
