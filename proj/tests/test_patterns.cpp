#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "ffil/patterns.hpp"
#include "oracles.hpp"

using namespace ffil;

namespace {

std::set<std::vector<bool>> brute_zero_patterns(const std::vector<MultiPoly>& fs) {
    std::set<std::vector<bool>> out;
    const auto p = fs.front().ctx().characteristic();
    for_each_point(p, fs.front().nvars(), default_enumeration_cap, [&](const Point& x) {
        std::vector<bool> z;
        for (const auto& f : fs) z.push_back(f.evaluate(x).is_zero());
        out.insert(z);
    });
    return out;
}

std::uint64_t brute_shatter(const SetSystem& f, std::size_t k) {
    std::uint64_t best = 0;
    oracle::for_each_subset(f.ground_size, k, [&](const std::vector<std::size_t>& a) {
        std::set<std::vector<bool>> traces;
        for (const auto& m : f.members) {
            std::vector<bool> t;
            for (auto i : a) t.push_back(m.test(i));
            traces.insert(t);
        }
        best = std::max<std::uint64_t>(best, traces.size());
        return false;
    });
    return best;
}

std::vector<MultiPoly> random_system(CounterRng& rng, std::uint32_t p, std::size_t vars, std::size_t k,
                                     std::size_t delta) {
    std::vector<MultiPoly> fs;
    for (std::size_t i = 0; i < k; ++i) fs.push_back(sample_uniform(FieldCtx::prime(p), vars, delta, rng));
    return fs;
}

}  // namespace

TEST(ZeroPatterns, LineAndShiftedLine) {
    const std::vector<MultiPoly> fs{parse_poly("p=3; vars=1; x0"), parse_poly("p=3; vars=1; x0 - 1")};
    const auto fam = zero_patterns(fs);
    EXPECT_EQ(fam.size(), 3u);
    EXPECT_TRUE(fam.contains({0}));
    EXPECT_TRUE(fam.contains({1}));
    EXPECT_TRUE(fam.contains({}));
    EXPECT_FALSE(fam.contains({0, 1}));
    EXPECT_EQ(zero_pattern_bound_rbg(2, 1, 1), 3u);
    EXPECT_EQ(zero_pattern_bound_short(2, 1, 1), 2u);  // the short form would be violated here
    EXPECT_TRUE(witness_rank_check(fs, fam.witnesses()));
}

TEST(ZeroPatterns, MatchesBruteForceAndBound) {
    CounterRng rng(404);
    for (int t = 0; t < 60; ++t) {
        const std::uint32_t p = t % 2 ? 5 : 7;
        const std::size_t vars = 1 + rng.uniform_below(2), k = 1 + rng.uniform_below(5), delta = 1 + rng.uniform_below(2);
        const auto fs = random_system(rng, p, vars, k, delta);
        const auto fam = zero_patterns(fs);
        const auto brute = brute_zero_patterns(fs);
        ASSERT_EQ(fam.size(), brute.size());
        for (const auto& [subset, x] : fam.patterns) {
            for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(subset.test(i), fs[i].evaluate(x).is_zero());
        }
        EXPECT_LE(fam.size(), zero_pattern_bound_rbg(k, delta, vars));
        EXPECT_TRUE(witness_rank_check(fs, fam.witnesses()));
    }
}

TEST(ZeroPatterns, WitnessIsLexFirst) {
    const std::vector<MultiPoly> fs{parse_poly("p=5; vars=2; x0 - x1")};
    const auto fam = zero_patterns(fs);
    ASSERT_EQ(fam.size(), 2u);
    DynamicBitset on(1);
    on.set(0);
    EXPECT_EQ(fam.patterns.at(on), (Point{0, 0}));
    EXPECT_EQ(fam.patterns.at(DynamicBitset(1)), (Point{0, 1}));
}

TEST(ZeroPatterns, Errors) {
    EXPECT_THROW(zero_patterns(std::vector<MultiPoly>{}), DomainError);
    const std::vector<MultiPoly> mixed{parse_poly("p=3; vars=1; x0"), parse_poly("p=5; vars=1; x0")};
    EXPECT_THROW(zero_patterns(mixed), DomainError);
}

TEST(RankCheck, RejectsDuplicatePatterns) {
    const std::vector<MultiPoly> fs{parse_poly("p=3; vars=1; x0")};
    EXPECT_THROW(witness_rank_check(fs, std::vector<Point>{{1}, {2}}), DomainError);
}

TEST(Containment, SingletonSystemsEqualZeroPatterns) {
    CounterRng rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto fs = random_system(rng, 5, 2, 4, 2);
        std::vector<PolySystem> vs;
        for (const auto& f : fs) vs.push_back({f});
        EXPECT_EQ(containment_patterns(vs).patterns.size(), zero_patterns(fs).patterns.size());
    }
}

TEST(Containment, BoundedByZeroPatternsOfAllPolynomials) {
    CounterRng rng(13);
    for (int t = 0; t < 20; ++t) {
        std::vector<PolySystem> vs;
        std::vector<MultiPoly> flat;
        for (int j = 0; j < 4; ++j) {
            auto sys = random_system(rng, 5, 3, 2, 2);
            flat.insert(flat.end(), sys.begin(), sys.end());
            vs.push_back(std::move(sys));
        }
        EXPECT_LE(containment_patterns(vs).size(), zero_patterns(flat).size());
    }
    EXPECT_THROW(containment_patterns(std::vector<PolySystem>{{}}), DomainError);
}

TEST(Report, Fields) {
    const std::vector<MultiPoly> fs{parse_poly("p=3; vars=1; x0"), parse_poly("p=3; vars=1; x0 - 1")};
    const auto j = family_report(zero_patterns(fs), 1, 3, 1);
    EXPECT_EQ(j["pattern_count"], 3);
    EXPECT_EQ(j["bound_rbg"], 3);
    EXPECT_EQ(j["bound_short"], 2);
    EXPECT_EQ(j["patterns"].size(), 3u);
    EXPECT_EQ(j["patterns"][0]["subset"], nlohmann::json::array());
}

TEST(Shatter, MatchesBruteForce) {
    CounterRng rng(55);
    for (int t = 0; t < 40; ++t) {
        const auto g = oracle::random_graph(3 + rng.uniform_below(10), 3 + rng.uniform_below(8), 0.5, rng);
        const auto sys = neighborhood_system(g);
        for (std::size_t k = 1; k <= std::min<std::size_t>(4, sys.ground_size); ++k)
            EXPECT_EQ(shatter_function(sys, k), brute_shatter(sys, k));
    }
}

TEST(Shatter, Examples) {
    // all subsets of a 3-set shatter everything
    SetSystem power{3, {}};
    for (unsigned m = 0; m < 8; ++m) {
        DynamicBitset b(3);
        for (unsigned i = 0; i < 3; ++i)
            if (m >> i & 1) b.set(i);
        power.members.push_back(b);
    }
    EXPECT_EQ(shatter_function(power, 3), 8u);
    // intervals on a line: pi(2) = 4, pi(3) = 7
    SetSystem intervals{6, {}};
    for (std::size_t i = 0; i <= 6; ++i) {
        for (std::size_t j = i; j <= 6; ++j) {
            DynamicBitset b(6);
            for (std::size_t x = i; x < j; ++x) b.set(x);
            intervals.members.push_back(b);
        }
    }
    EXPECT_EQ(shatter_function(intervals, 2), 4u);
    EXPECT_EQ(shatter_function(intervals, 3), 7u);
    EXPECT_EQ(shatter_function(SetSystem{4, {}}, 2), 0u);
    EXPECT_THROW(shatter_function(power, 4), DomainError);
    EXPECT_THROW(shatter_function(SetSystem{60, {DynamicBitset(60)}}, 30, 1000), ResourceError);
}

TEST(Shatter, PatternSystem) {
    const std::vector<MultiPoly> fs{parse_poly("p=3; vars=1; x0"), parse_poly("p=3; vars=1; x0 - 1")};
    const auto sys = pattern_system(zero_patterns(fs));
    EXPECT_EQ(sys.ground_size, 2u);
    EXPECT_EQ(shatter_function(sys, 2), 3u);
}
