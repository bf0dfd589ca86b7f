#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ffil/geometry.hpp"
#include "oracles.hpp"

using namespace ffil;

namespace {

FieldVector vec(const FieldCtx& ctx, std::initializer_list<std::int64_t> xs) {
    FieldVector v;
    for (auto x : xs) v.push_back(ctx.from_int(x));
    return v;
}

FieldVector random_vec(const FieldCtx& ctx, std::size_t d, CounterRng& rng) {
    FieldVector v;
    for (std::size_t i = 0; i < d; ++i) v.push_back(ctx.element(rng.uniform_below(ctx.order())));
    return v;
}

std::vector<std::uint64_t> key(const FieldVector& x) {
    std::vector<std::uint64_t> k;
    for (const auto& c : x) k.push_back(c.index());
    return k;
}

std::uint64_t gaussian_binomial(std::uint64_t q, std::size_t d, std::size_t k) {
    std::uint64_t num = 1, den = 1;
    for (std::size_t i = 0; i < k; ++i) {
        num *= saturating_pow(q, d - i) - 1;
        den *= saturating_pow(q, i + 1) - 1;
    }
    return num / den;
}

}  // namespace

TEST(BilinearForm, Examples) {
    const auto f7 = FieldCtx::prime(7);
    const auto std2 = BilinearForm::standard(f7, 2);
    EXPECT_EQ(std2.inner(vec(f7, {1, 2}), vec(f7, {3, 1})), f7.make(5));
    const auto tw = BilinearForm::twisted(f7, 5);
    EXPECT_EQ(tw.signature_string(), "++++-");
    EXPECT_EQ(tw.norm_sq(vec(f7, {0, 0, 0, 0, 1})), -f7.one());
    EXPECT_EQ(BilinearForm::twisted(f7, 3), BilinearForm::standard(f7, 3));
    EXPECT_THROW(BilinearForm::standard(FieldCtx::prime(2), 2), DomainError);
    EXPECT_THROW(BilinearForm(f7, {1, 2}), DomainError);
    EXPECT_THROW(std2.inner(vec(f7, {1}), vec(f7, {1, 2})), DomainError);
}

TEST(BilinearForm, SymmetricAndBilinear) {
    CounterRng rng(3);
    const auto ctx = FieldCtx::quadratic(7);
    const auto form = BilinearForm::twisted(ctx, 5);
    for (int t = 0; t < 200; ++t) {
        const auto u = random_vec(ctx, 5, rng), v = random_vec(ctx, 5, rng), w = random_vec(ctx, 5, rng);
        const auto c = ctx.element(rng.uniform_below(ctx.order()));
        EXPECT_EQ(form.inner(u, v), form.inner(v, u));
        EXPECT_EQ(form.inner(c * u + v, w), c * form.inner(u, w) + form.inner(v, w));
    }
}

TEST(Sphere, Sizes) {
    for (auto [p, expect] : {std::pair<std::uint32_t, std::size_t>{7, 8}, {5, 4}, {11, 12}, {13, 12}}) {
        const auto ctx = FieldCtx::prime(p);
        const Sphere s{BilinearForm::standard(ctx, 2), zero_vector(ctx, 2)};
        EXPECT_EQ(sphere_points(s).size(), expect) << p;
    }
    CounterRng rng(9);
    const auto ctx = FieldCtx::prime(5);
    const auto form = BilinearForm::twisted(ctx, 5);
    const auto w = random_vec(ctx, 5, rng);
    EXPECT_EQ(sphere_points(Sphere{form, w}), oracle::sphere_scan(form, w));
}

TEST(SphereIntersection, TwoCirclesGiveVerticalLine) {
    const auto f5 = FieldCtx::prime(5);
    const auto form = BilinearForm::standard(f5, 2);
    const std::vector<Sphere> ss{{form, vec(f5, {0, 0})}, {form, vec(f5, {1, 0})}};
    const auto r = intersect_spheres_to_flat(ss);
    ASSERT_FALSE(r.flat.is_empty());
    EXPECT_EQ(r.flat.dim(), 1u);
    for (std::int64_t y = 0; y < 5; ++y) {
        EXPECT_TRUE(r.flat.contains(vec(f5, {3, y})));
        EXPECT_FALSE(r.flat.contains(vec(f5, {2, y})));
    }
}

TEST(SphereIntersection, DuplicateCentersAndEmpty) {
    const auto f7 = FieldCtx::prime(7);
    const auto form = BilinearForm::standard(f7, 2);
    const std::vector<Sphere> dup{{form, vec(f7, {1, 1})}, {form, vec(f7, {1, 1})}};
    const auto r = intersect_spheres_to_flat(dup);
    EXPECT_EQ(r.duplicates_removed, 1u);
    EXPECT_EQ(r.flat.dim(), 2u);
    // three collinear centers: the two equations are inconsistent
    const std::vector<Sphere> col{{form, vec(f7, {0, 0})}, {form, vec(f7, {1, 0})}, {form, vec(f7, {2, 0})}};
    EXPECT_TRUE(intersect_spheres_to_flat(col).flat.is_empty());
    const std::vector<Sphere> mixed{{form, vec(f7, {0, 0})}, {BilinearForm(f7, {1, -1}), vec(f7, {1, 0})}};
    EXPECT_THROW(intersect_spheres_to_flat(mixed), DomainError);
}

TEST(SphereIntersection, MatchesScanOnRandomTriples) {
    CounterRng rng(50);
    for (std::uint32_t p : {5u, 7u}) {
        const auto ctx = FieldCtx::prime(p);
        const auto form = BilinearForm::standard(ctx, 3);
        for (int t = 0; t < 50; ++t) {
            std::vector<Sphere> ss;
            for (int j = 0; j < 3; ++j) ss.push_back({form, random_vec(ctx, 3, rng)});
            std::set<std::vector<std::uint64_t>> brute;
            for (const auto& x : oracle::sphere_scan(form, ss[0].center))
                if (ss[1].contains(x) && ss[2].contains(x)) brute.insert(key(x));
            const auto r = intersect_spheres_to_flat(ss);
            std::set<std::vector<std::uint64_t>> via_flat;
            for (const auto& x : sphere_points(ss[0]))
                if (r.flat.contains(x)) via_flat.insert(key(x));
            EXPECT_EQ(via_flat, brute);
        }
    }
}

TEST(AffineFlat, Basics) {
    const auto f5 = FieldCtx::prime(5);
    EXPECT_THROW(AffineFlat(vec(f5, {0, 0}), {vec(f5, {1, 2}), vec(f5, {2, 4})}), DomainError);
    const AffineFlat line(vec(f5, {1, 0}), {vec(f5, {1, 2})});
    EXPECT_EQ(line.points().size(), 5u);
    EXPECT_TRUE(line.contains(vec(f5, {3, 4})));
    EXPECT_FALSE(line.contains(vec(f5, {0, 0})));
    const auto form = BilinearForm::standard(f5, 2);
    EXPECT_TRUE(is_totally_isotropic(form, line));  // 1 + 4 = 0
    EXPECT_FALSE(is_totally_isotropic(form, AffineFlat(vec(f5, {0, 0}), {vec(f5, {1, 0})})));
}

TEST(Subspaces, CountMatchesGaussianBinomial) {
    for (auto [p, d, k] : {std::tuple{3u, 4u, 2u}, {5u, 3u, 1u}, {2u, 5u, 2u}, {3u, 3u, 0u}, {3u, 3u, 3u}}) {
        const auto ctx = FieldCtx::prime(p);
        std::uint64_t budget = 1'000'000, count = 0;
        std::set<std::set<std::vector<std::uint64_t>>> distinct;
        for_each_subspace(ctx, d, k, budget, [&](const std::vector<FieldVector>& basis) {
            ++count;
            std::set<std::vector<std::uint64_t>> pts;
            for (const auto& x : AffineFlat(zero_vector(ctx, d), basis).points()) pts.insert(key(x));
            distinct.insert(pts);
            return false;
        });
        EXPECT_EQ(count, gaussian_binomial(p, d, k)) << p << " " << d << " " << k;
        EXPECT_EQ(distinct.size(), count);
    }
    std::uint64_t tiny = 2;
    EXPECT_THROW(for_each_subspace(FieldCtx::prime(3), 3, 1, tiny, [](const auto&) { return false; }), ResourceError);
}

TEST(FlatsInSphere, CircleHasNoLines) {
    for (std::uint32_t p : {5u, 7u}) {
        const auto ctx = FieldCtx::prime(p);
        const auto rep = flats_in_sphere_check(Sphere{BilinearForm::standard(ctx, 2), zero_vector(ctx, 2)}, 2);
        EXPECT_EQ(rep.count_by_dim[1], 0u);
        EXPECT_EQ(rep.count_by_dim[2], 0u);
        EXPECT_TRUE(rep.all_pass());
    }
}

TEST(FlatsInSphere, LinesInSphereMatchBruteForce) {
    const auto ctx = FieldCtx::prime(5);
    const auto form = BilinearForm::standard(ctx, 3);
    const Sphere s{form, vec(ctx, {1, 2, 0})};
    const auto on = oracle::sphere_scan(form, s.center);
    std::set<std::set<std::vector<std::uint64_t>>> lines;
    for (const auto& x : on) {
        for_each_field_point(ctx, 3, 1000, [&](const FieldVector& v) {
            if (std::all_of(v.begin(), v.end(), [](const FieldElement& c) { return c.is_zero(); })) return;
            std::set<std::vector<std::uint64_t>> line;
            for (std::uint64_t t = 0; t < 5; ++t) {
                const auto y = x + ctx.element(t) * v;
                if (!s.contains(y)) return;
                line.insert(key(y));
            }
            lines.insert(line);
        });
    }
    const auto rep = flats_in_sphere_check(s, 2);
    EXPECT_GT(lines.size(), 0u);
    EXPECT_EQ(rep.count_by_dim[1], lines.size());
    EXPECT_EQ(rep.count_by_dim[0], on.size());
    EXPECT_EQ(rep.count_by_dim[2], 0u);
    EXPECT_TRUE(rep.all_pass());
}

TEST(IsotropicUnitPair, NoneWhenMinusOneIsNotASquare) {
    for (std::uint32_t p : {3u, 7u, 11u}) {
        const auto ctx = FieldCtx::prime(p);
        EXPECT_FALSE(isotropic_unit_pair_search(BilinearForm::twisted(ctx, 3))) << p;
    }
    for (std::uint32_t p : {3u, 7u}) {
        const auto ctx = FieldCtx::prime(p);
        EXPECT_FALSE(isotropic_unit_pair_search(BilinearForm::twisted(ctx, 5))) << p;
    }
}

TEST(IsotropicUnitPair, FoundWhenMinusOneIsASquare) {
    const auto ctx = FieldCtx::prime(5);
    const auto form = BilinearForm::standard(ctx, 3);
    const auto hit = isotropic_unit_pair_search(form);
    ASSERT_TRUE(hit);
    EXPECT_TRUE(is_totally_isotropic(form, hit->flat));
    EXPECT_TRUE(form.norm_sq(hit->w).is_one());
    for (const auto& b : hit->flat.basis()) EXPECT_TRUE(form.inner(b, hit->w).is_zero());
    EXPECT_THROW(isotropic_unit_pair_search(BilinearForm::standard(ctx, 2)), DomainError);
    EXPECT_THROW(isotropic_unit_pair_search(BilinearForm::twisted(FieldCtx::prime(3), 5), 10), ResourceError);
}

TEST(UnitDistance, WholePlane) {
    const auto ctx = FieldCtx::prime(7);
    std::vector<FieldVector> pts;
    for_each_field_point(ctx, 2, 1000, [&](const FieldVector& x) { pts.push_back(x); });
    const auto form = BilinearForm::standard(ctx, 2);
    const auto g = unit_distance_graph(pts, form);
    EXPECT_EQ(g.edge_count, 196u);
    EXPECT_EQ(g.doubled.edge_count(), 392u);
    const auto inc = point_sphere_incidence(pts, pts, form);
    EXPECT_EQ(inc, g.doubled);
}

TEST(PhiEmbed, PreservesUnitDistances) {
    CounterRng rng(21);
    const auto base = FieldCtx::prime(3);
    const auto ext = FieldCtx::quadratic(3);
    const auto alpha = solve_unit_alpha(ext);
    std::vector<FieldVector> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(random_vec(base, 5, rng));
    const auto lifted = phi_embed(pts, alpha);
    const auto tw = BilinearForm::twisted(base, 5);
    const auto st = BilinearForm::standard(ext, 5);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const auto a = tw.norm_sq(pts[i] - pts[j]);
            const auto b = st.norm_sq(lifted[i] - lifted[j]);
            EXPECT_EQ(ext.make(a.re()), b);
        }
    }
    EXPECT_EQ(unit_distance_graph(pts, tw).edge_count, unit_distance_graph(lifted, st).edge_count);
    EXPECT_THROW(phi_embed(pts, ext.one()), DomainError);
}

TEST(PointSet, FixtureRoundTrip) {
    CounterRng rng(4);
    const auto ctx = FieldCtx::prime(11);
    PointSet ps{BilinearForm::twisted(ctx, 5), {}};
    for (int i = 0; i < 10; ++i) ps.points.push_back(random_vec(ctx, 5, rng));
    std::istringstream in(to_fixture(ps));
    const auto back = parse_point_set(in);
    EXPECT_EQ(back.form, ps.form);
    EXPECT_EQ(back.points, ps.points);
    std::istringstream bad("7 2 ++\n1 2 3\n");
    EXPECT_THROW(parse_point_set(bad), ParseError);
    std::istringstream bad_sig("7 2 +\n");
    EXPECT_THROW(parse_point_set(bad_sig), ParseError);
}
