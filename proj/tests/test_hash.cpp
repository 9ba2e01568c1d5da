#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cmtsketch/config.hpp"
#include "cmtsketch/hash.hpp"

namespace {

using namespace cmt;

std::vector<std::string> random_keys(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::string> keys;
    keys.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = 1 + gen() % 24;
        std::string k(len, '\0');
        for (char& c : k) c = static_cast<char>('a' + gen() % 26);
        keys.push_back(std::move(k) + std::to_string(i));
    }
    return keys;
}

TEST(HashCell, Deterministic) {
    const SketchConfig c = cms_cu_config(4, 1000, 99);
    EXPECT_EQ(hash_cell("token", 0, c), hash_cell("token", 0, c));
    EXPECT_EQ(hash_cell("token", 3, c), hash_cell("token", 3, c));
    EXPECT_EQ(hash_bytes("token", 7), hash_bytes("token", 7));
}

TEST(HashCell, RowOutOfRangeThrows) {
    const SketchConfig c = cms_cu_config(2, 16, 1);
    EXPECT_THROW(hash_cell("k", 2, c), std::out_of_range);
}

TEST(HashCell, CellsStayInRange) {
    const SketchConfig c = cms_cu_config(3, 37, 5);
    for (const auto& k : random_keys(2000, 1)) {
        for (std::uint32_t r = 0; r < 3; ++r) EXPECT_LT(hash_cell(k, r, c).cell, 37u);
    }
}

TEST(HashCell, SeedChangesCells) {
    const SketchConfig a = cms_cu_config(1, 1024, 1);
    const SketchConfig b = cms_cu_config(1, 1024, 2);
    const auto keys = random_keys(10000, 3);
    std::size_t differ = 0;
    for (const auto& k : keys) differ += hash_cell(k, 0, a).cell != hash_cell(k, 0, b).cell;
    EXPECT_GE(differ, keys.size() * 40 / 100);
}

TEST(HashCell, RowsAreIndependentlySeeded) {
    const SketchConfig c = cms_cu_config(2, 1024, 11);
    const auto keys = random_keys(10000, 4);
    std::size_t same = 0;
    for (const auto& k : keys) same += hash_cell(k, 0, c).cell == hash_cell(k, 1, c).cell;
    // about 10^4 / 1024 coincidences expected
    EXPECT_LT(same, 40u);
}

TEST(HashCell, UniformLoadChiSquare) {
    constexpr std::size_t kKeys = 100000;
    constexpr std::uint64_t kWidth = 1024;
    const SketchConfig c = cms_cu_config(1, kWidth, 2024);
    std::vector<std::size_t> load(kWidth, 0);
    for (const auto& k : random_keys(kKeys, 5)) ++load[hash_cell(k, 0, c).cell];

    const double expected = static_cast<double>(kKeys) / kWidth;
    const double p = 1.0 / kWidth;
    const double sigma = std::sqrt(kKeys * p * (1 - p));
    double chi2 = 0.0;
    for (std::size_t l : load) {
        EXPECT_LE(std::abs(static_cast<double>(l) - expected), 5 * sigma);
        chi2 += (l - expected) * (l - expected) / expected;
    }
    // Wilson-Hilferty upper quantile of chi^2 with 1023 dof at alpha = 0.001
    const double dof = kWidth - 1;
    const double z = 3.090232;
    const double t = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
    const double critical = dof * t * t * t;
    EXPECT_LT(chi2, critical);
}

TEST(HashBytes, TailLengthMatters) {
    EXPECT_NE(hash_bytes(std::string("a"), 1), hash_bytes(std::string("a\0", 2), 1));
    EXPECT_NE(hash_bytes("", 1), hash_bytes("", 2));
    EXPECT_NE(hash_bytes("abcdefgh", 1), hash_bytes("abcdefgi", 1));
}

}  // namespace
