#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "ffil/constructions.hpp"
#include "oracles.hpp"

using namespace ffil;

namespace {

nlohmann::json without_timing(nlohmann::json j) {
    j.erase("wall_seconds");
    return j;
}

// points of pts on the line through x and y, by pairwise parallelism
std::size_t brute_max_line(const std::vector<Point>& pts, std::uint32_t p) {
    std::size_t best = std::min<std::size_t>(pts.size(), 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            std::size_t on = 0;
            for (const auto& z : pts) {
                bool hit = false;
                for (std::uint32_t t = 0; t < p && !hit; ++t) {
                    bool eq = true;
                    for (std::size_t c = 0; c < z.size() && eq; ++c)
                        eq = z[c] == (pts[i][c] + t * ((pts[j][c] + p - pts[i][c]) % p)) % p;
                    hit = eq;
                }
                on += hit;
            }
            best = std::max(best, on);
        }
    }
    return best;
}

}  // namespace

TEST(Helpers, IntegerRoot) {
    EXPECT_EQ(integer_root(343, 3), 7u);
    EXPECT_EQ(integer_root(342, 3), 6u);
    EXPECT_EQ(integer_root(343, 2), 18u);
    EXPECT_EQ(integer_root(1, 5), 1u);
    for (std::uint64_t n = 1; n < 3000; ++n) {
        const auto r = integer_root(n, 2);
        EXPECT_TRUE(r * r <= n && (r + 1) * (r + 1) > n) << n;
    }
}

TEST(Helpers, ParallelTrialsIsOrderedAndDeterministic) {
    auto fn = [](std::size_t i) {
        CounterRng rng(derive_seed(9, i));
        return rng();
    };
    const auto one = parallel_trials(std::size_t{100}, std::size_t{1}, fn);
    EXPECT_EQ(parallel_trials(std::size_t{100}, std::size_t{4}, fn), one);
    EXPECT_EQ(parallel_trials(std::size_t{100}, std::size_t{16}, fn), one);
    EXPECT_THROW(parallel_trials(std::size_t{50}, std::size_t{4},
                                 [](std::size_t i) -> int {
                                     if (i == 17) throw DomainError("boom");
                                     return 0;
                                 }),
                 DomainError);
}

TEST(ZeroCount, CountsMatchPerTrialPolynomials) {
    const auto r = zero_count_experiment(5, 3, 3, 40, 77, 3);
    ASSERT_EQ(r.counts.size(), 40u);
    EXPECT_DOUBLE_EQ(r.threshold, 12.5);
    for (std::size_t i = 0; i < 40; i += 7) {
        CounterRng rng(derive_seed(77, i));
        EXPECT_EQ(r.counts[i], zero_count(sample_uniform(FieldCtx::prime(5), 3, 3, rng)));
    }
    EXPECT_EQ(r.successes, static_cast<std::size_t>(std::count_if(r.counts.begin(), r.counts.end(),
                                                                  [&](auto c) { return c >= r.threshold; })));
    // each point is a zero with probability exactly 1/p
    EXPECT_NEAR(r.mean_count, 25.0, 4.0);
    EXPECT_EQ(zero_count_experiment(5, 3, 3, 40, 77, 1).counts, r.counts);
}

TEST(ZeroCount, Validation) {
    EXPECT_THROW(zero_count_experiment(3, 3, 3, 10, 1), DomainError);
    EXPECT_THROW(zero_count_experiment(5, 2, 3, 10, 1), DomainError);
    EXPECT_THROW(zero_count_experiment(5, 3, 2, 10, 1), DomainError);
    EXPECT_THROW(zero_count_experiment(5, 3, 3, 0, 1), DomainError);
    EXPECT_THROW(zero_count_experiment(5, 3, 3, 1, 1, 1, 100), ResourceError);
}

TEST(AlgebraicGraph, MatchesDirectEvaluation) {
    CounterRng rng(6);
    const auto f = sample_uniform(FieldCtx::prime(5), 3, 4, rng);
    const auto g = algebraic_graph(f, 1, 2);
    ASSERT_EQ(g.a_size(), 5u);
    ASSERT_EQ(g.b_size(), 25u);
    for (std::uint32_t a = 0; a < 5; ++a) {
        for (std::uint64_t b = 0; b < 25; ++b) {
            const Point y = point_from_index(5, 2, b);
            EXPECT_EQ(g.has_edge(a, b), f.eval_residue(Point{a, y[0], y[1]}) == 0);
        }
    }
    EXPECT_THROW(algebraic_graph(f, 1, 1), DomainError);
}

TEST(AlgebraicGraph, EdgeDensityIsOneOverP) {
    CounterRng rng(8);
    double total = 0;
    for (int t = 0; t < 200; ++t) total += algebraic_graph(sample_uniform(FieldCtx::prime(7), 2, 4, rng), 1, 1).edge_count();
    EXPECT_NEAR(total / 200, 7.0, 1.0);
}

TEST(RandomAlgebraicGraph, FullSizeKeepsBaseGraph) {
    const auto ag = random_algebraic_graph(7, 1, 1, 7, 7, 1);
    EXPECT_EQ(ag.graph, ag.base);
    EXPECT_EQ(ag.a_indices, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
    const auto& rep = ag.report;
    EXPECT_EQ(rep.verification, Verification::verified_free);
    EXPECT_GE(static_cast<double>(rep.achieved), 49.0 / 14.0);
    EXPECT_EQ(rep.achieved, ag.graph.edge_count());
    EXPECT_FALSE(oracle::has_kss(ag.graph, 2));
    EXPECT_EQ(algebraic_graph(ag.f, 1, 1), ag.base);
    EXPECT_EQ(rep.s_prescribed, 2u);
    EXPECT_EQ(rep.parameters["Delta"], 4);
}

TEST(RandomAlgebraicGraph, SubsampleIsInducedAndVerifiedByBruteForce) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ag = random_algebraic_graph(5, 1, 2, 5, 12, seed);
        EXPECT_EQ(ag.graph, ag.base.induced(ag.a_indices, ag.b_indices));
        EXPECT_EQ(ag.report.verification, Verification::verified_free);
        EXPECT_FALSE(oracle::has_kss(ag.graph, 3));
        EXPECT_GE(static_cast<double>(ag.report.achieved), 60.0 / 10.0);
        // s^2 = 9 > sqrt(5)
        EXPECT_TRUE(std::any_of(ag.report.warnings.begin(), ag.report.warnings.end(),
                                [](const std::string& w) { return w.find("s^2") != std::string::npos; }));
    }
}

TEST(RandomAlgebraicGraph, ReplayIsDeterministic) {
    const auto a = random_algebraic_graph(5, 1, 2, 5, 20, 42);
    const auto b = random_algebraic_graph(5, 1, 2, 5, 20, 42);
    EXPECT_EQ(a.f, b.f);
    EXPECT_EQ(a.graph, b.graph);
    EXPECT_EQ(without_timing(a.report.to_json()), without_timing(b.report.to_json()));
}

TEST(RandomAlgebraicGraph, FailureCarriesBestAttempt) {
    AlgebraicGraphOptions opt;
    opt.s = 1;  // any edge is a K_{1,1}
    opt.poly_retries = 3;
    try {
        random_algebraic_graph(7, 1, 1, 7, 7, 3, opt);
        FAIL() << "expected ConstructionFailure";
    } catch (const ConstructionFailure& e) {
        EXPECT_EQ(e.best().retries, 3u);
        EXPECT_EQ(e.best().extra["attempts"].size(), 3u);
        EXPECT_GT(e.best().achieved, 0u);
    }
    EXPECT_THROW(random_algebraic_graph(7, 1, 1, 8, 7, 1), DomainError);
    EXPECT_THROW(random_algebraic_graph(8, 1, 1, 4, 4, 1), DomainError);
}

TEST(PointVariety, SmallInstance) {
    const auto inst = point_variety_instance(49, 1.0, 2, 1);
    EXPECT_EQ(inst.report.parameters["p"], 11);
    EXPECT_EQ(inst.points.size(), 49u);
    EXPECT_EQ(inst.varieties.size(), 49u);
    EXPECT_EQ(inst.incidence, inst.graph.graph);
    EXPECT_TRUE(inst.report.extra["incidences_cover_edges"].get<bool>());
    EXPECT_TRUE(inst.report.extra["hypersurface_bound_holds"].get<bool>());
    EXPECT_LE(inst.report.extra["max_hypersurface_points"].get<std::uint64_t>(), 16u * 11u);
    EXPECT_EQ(inst.report.verification, Verification::verified_free);
    // recount from scratch
    std::uint64_t inc = 0;
    for (const auto& x : inst.points)
        for (const auto& v : inst.varieties) inc += v.front().evaluate(x).is_zero();
    EXPECT_EQ(inc, inst.incidences);
    EXPECT_THROW(point_variety_instance(1, 1.0, 2, 1), DomainError);
    EXPECT_THROW(point_variety_instance(49, 0.0, 2, 1), DomainError);
}

TEST(Evasive, MapImageIsAGraphOverTheFirstCoordinates) {
    CounterRng rng(2);
    for (auto [p, d, k] : {std::tuple{5u, 3u, 1u}, {7u, 4u, 2u}, {3u, 5u, 2u}}) {
        const auto pts = evasive_set_generate(p, d, k, EvasiveStrategy::map_image, rng);
        EXPECT_EQ(pts.size(), saturating_pow(p, d - k));
        EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
        std::set<Point> heads;
        for (const auto& x : pts) heads.insert(Point(x.begin(), x.begin() + (d - k)));
        EXPECT_EQ(heads.size(), pts.size());
    }
    const auto r = evasive_set_generate(5, 3, 1, EvasiveStrategy::random, rng);
    EXPECT_EQ(std::set<Point>(r.begin(), r.end()).size(), 25u);
    EXPECT_THROW(evasive_set_generate(5, 3, 3, EvasiveStrategy::map_image, rng), DomainError);
    EXPECT_THROW(parse_evasive_strategy("bogus"), DomainError);
    EXPECT_EQ(parse_evasive_strategy("map-image"), EvasiveStrategy::map_image);
}

TEST(Evasive, LineAuditMatchesBruteForce) {
    CounterRng rng(10);
    for (int t = 0; t < 10; ++t) {
        const auto pts = evasive_set_generate(5, 3, 1, t % 2 ? EvasiveStrategy::random : EvasiveStrategy::map_image, rng);
        EXPECT_EQ(max_line_intersection(pts, 5, 3), brute_max_line(pts, 5));
    }
    EXPECT_EQ(max_line_intersection({{0, 0}, {1, 1}, {2, 2}, {0, 1}}, 3, 2), 3u);
}

TEST(UnitDistance, WholePlaneAtSevenWithOverride) {
    UnitDistanceOptions opt;
    opt.prime = 7;
    const auto inst = unit_distance_instance(49, 2, 1, opt);
    EXPECT_EQ(inst.points.size(), 49u);
    EXPECT_EQ(inst.unit_distances, 196u);  // 49 * 8 / 2
    EXPECT_FALSE(inst.embedded);
    EXPECT_EQ(inst.report.verification, Verification::verified_free);
    EXPECT_FALSE(std::all_of(inst.shift.begin(), inst.shift.end(), [](const auto& c) { return c.is_zero(); }));
    EXPECT_GE(static_cast<double>(inst.unit_distances), inst.report.target);
}

TEST(UnitDistance, PrimeSelection) {
    UnitDistanceOptions quick;
    quick.check_kss = false;
    EXPECT_EQ(unit_distance_instance(343, 2, 1, quick).report.parameters["p"], 19);
    EXPECT_THROW(unit_distance_instance(30, 2, 1), DomainError);
    UnitDistanceOptions bad;
    bad.prime = 13;
    EXPECT_THROW(unit_distance_instance(49, 2, 1, bad), DomainError);
}

TEST(UnitDistance, FiveDimensionalEmbedding) {
    UnitDistanceOptions opt;
    opt.prime = 3;
    const auto inst = unit_distance_instance(120, 5, 4, opt);
    EXPECT_TRUE(inst.embedded);
    EXPECT_FALSE(inst.form.ctx().is_prime_field());
    EXPECT_EQ(inst.points.size(), std::min<std::size_t>(120, inst.report.extra["union_size"].get<std::size_t>()));
    const auto base = unit_distance_graph(inst.base_points, BilinearForm::twisted(FieldCtx::prime(3), 5));
    EXPECT_EQ(base.edge_count, inst.unit_distances);
    EXPECT_EQ(inst.evasive_size, 81u);
}

TEST(UnitDistance, ReplayIsDeterministic) {
    UnitDistanceOptions opt;
    opt.prime = 11;
    const auto a = unit_distance_instance(100, 2, 5, opt);
    const auto b = unit_distance_instance(100, 2, 5, opt);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(without_timing(a.report.to_json()), without_timing(b.report.to_json()));
}

TEST(Hypergraphs, RandomEdgesAreDistinct) {
    CounterRng rng(3);
    const auto h = random_hypergraph(10, 45, 2, rng);
    std::set<std::vector<std::size_t>> s(h.edges.begin(), h.edges.end());
    EXPECT_EQ(s.size(), 45u);
    EXPECT_THROW(random_hypergraph(10, 46, 2, rng), DomainError);
}
