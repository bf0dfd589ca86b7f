#pragma once

// Zero-patterns of polynomial sequences, containment patterns of variety sequences,
// shatter functions, and the evaluation-matrix witness check behind the
// polynomial-method pattern bound.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ffil/bigraph.hpp"
#include "ffil/bitset.hpp"
#include "ffil/error.hpp"
#include "ffil/linalg.hpp"
#include "ffil/mpoly.hpp"

namespace ffil {

/// Realized index subsets of [k], each with the lexicographically first point realizing it.
struct PatternFamily {
    std::size_t k = 0;
    std::map<DynamicBitset, Point> patterns;

    std::size_t size() const noexcept { return patterns.size(); }

    bool contains(const std::vector<std::size_t>& subset) const {
        DynamicBitset key(k);
        for (auto i : subset) key.set(i);
        return patterns.count(key) != 0;
    }

    std::vector<Point> witnesses() const {
        std::vector<Point> out;
        for (const auto& [s, x] : patterns) out.push_back(x);
        return out;
    }
};

/// A variety given by its defining polynomials; x is on it iff all of them vanish at x.
using PolySystem = std::vector<MultiPoly>;

namespace detail {

inline void check_common_ring(std::span<const MultiPoly> fs) {
    for (const auto& f : fs) {
        if (!(f.ctx() == fs.front().ctx()) || f.nvars() != fs.front().nvars()) {
            throw DomainError("polynomials must share field and variable count");
        }
    }
}

}  // namespace detail

inline PatternFamily zero_patterns(std::span<const MultiPoly> fs, std::uint64_t cap = default_enumeration_cap) {
    if (fs.empty()) throw DomainError("zero_patterns: empty polynomial list");
    detail::check_common_ring(fs);
    PatternFamily fam;
    fam.k = fs.size();
    for_each_point(fs.front().ctx().characteristic(), fs.front().nvars(), cap, [&](const Point& x) {
        DynamicBitset z(fs.size());
        for (std::size_t i = 0; i < fs.size(); ++i)
            if (fs[i].eval_residue(x) == 0) z.set(i);
        fam.patterns.try_emplace(std::move(z), x);  // first point in lex order wins
    });
    return fam;
}

inline PatternFamily containment_patterns(std::span<const PolySystem> varieties,
                                          std::uint64_t cap = default_enumeration_cap) {
    if (varieties.empty()) throw DomainError("containment_patterns: empty variety list");
    std::vector<MultiPoly> all;
    for (const auto& v : varieties) {
        if (v.empty()) throw DomainError("containment_patterns: variety without defining polynomials");
        all.insert(all.end(), v.begin(), v.end());
    }
    detail::check_common_ring(all);
    PatternFamily fam;
    fam.k = varieties.size();
    for_each_point(all.front().ctx().characteristic(), all.front().nvars(), cap, [&](const Point& x) {
        DynamicBitset z(varieties.size());
        for (std::size_t i = 0; i < varieties.size(); ++i) {
            const bool on = std::all_of(varieties[i].begin(), varieties[i].end(),
                                        [&](const MultiPoly& f) { return f.eval_residue(x) == 0; });
            if (on) z.set(i);
        }
        fam.patterns.try_emplace(std::move(z), x);
    });
    return fam;
}

/// C(k*Delta + D, D): the bound in the form that survives the (x, x-1) over F_3 check.
inline std::uint64_t zero_pattern_bound_rbg(std::size_t k, std::size_t delta, std::size_t dim) {
    return binomial(static_cast<std::uint64_t>(k) * delta + dim, dim);
}

/// C(k*Delta, D), reported alongside for comparison only.
inline std::uint64_t zero_pattern_bound_short(std::size_t k, std::size_t delta, std::size_t dim) {
    return binomial(static_cast<std::uint64_t>(k) * delta, dim);
}

inline nlohmann::json family_report(const PatternFamily& fam, std::size_t dim, std::uint32_t p, std::size_t delta) {
    nlohmann::json pats = nlohmann::json::array();
    for (const auto& [subset, witness] : fam.patterns) {
        // 1-based indices, matching the usual [k] convention
        std::vector<std::size_t> idx;
        for (auto i : subset.indices()) idx.push_back(i + 1);
        pats.push_back({{"subset", idx}, {"witness", witness}});
    }
    return {{"k", fam.k},
            {"D", dim},
            {"p", p},
            {"Delta", delta},
            {"pattern_count", fam.size()},
            {"bound_rbg", zero_pattern_bound_rbg(fam.k, delta, dim)},
            {"bound_short", zero_pattern_bound_short(fam.k, delta, dim)},
            {"patterns", pats}};
}

// ---------------------------------------------------------------------------
// Set systems and shatter functions

struct SetSystem {
    std::size_t ground_size = 0;
    std::vector<DynamicBitset> members;

    void validate() const {
        for (const auto& m : members)
            if (m.size() != ground_size) throw DomainError("set system member has wrong ground size");
    }
};

/// Neighborhoods of the A-vertices of g, as subsets of B.
inline SetSystem neighborhood_system(const BipartiteGraph& g) { return {g.b_size(), g.a_rows()}; }

/// From a pattern family over [k]: each realized pattern becomes a member.
inline SetSystem pattern_system(const PatternFamily& fam) {
    SetSystem s{fam.k, {}};
    for (const auto& [subset, x] : fam.patterns) s.members.push_back(subset);
    return s;
}

/// pi_F(k) = max over k-subsets A of the ground set of |{A cap B : B in F}|.
inline std::uint64_t shatter_function(const SetSystem& f, std::size_t k, std::uint64_t cap = default_enumeration_cap) {
    f.validate();
    if (k > f.ground_size) throw DomainError("shatter_function: k exceeds ground set size");
    if (k > 64) throw DomainError("shatter_function: k above 64 is not supported");
    if (binomial(f.ground_size, k) > cap) throw ResourceError("shatter_function: too many k-subsets for the cap");
    if (f.members.empty()) return 0;

    std::vector<std::size_t> a(k);
    for (std::size_t i = 0; i < k; ++i) a[i] = i;
    std::uint64_t best = 0;
    std::unordered_set<std::uint64_t> traces;
    while (true) {
        traces.clear();
        for (const auto& m : f.members) {
            std::uint64_t t = 0;
            for (std::size_t i = 0; i < k; ++i)
                if (m.test(a[i])) t |= std::uint64_t{1} << i;
            traces.insert(t);
        }
        best = std::max<std::uint64_t>(best, traces.size());
        if (best == (k == 64 ? ~std::uint64_t{0} : std::uint64_t{1} << k)) break;  // fully shattered

        std::size_t i = k;
        while (i > 0 && a[i - 1] == f.ground_size - k + i - 1) --i;
        if (i == 0) break;
        ++a[i - 1];
        for (std::size_t j = i; j < k; ++j) a[j] = a[j - 1] + 1;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Witness evaluation matrix

/// For witness points x_1..x_N with distinct nonvanishing sets S_j = {i : f_i(x_j) != 0},
/// builds M[j][l] = prod_{i in S_j} f_i(x_l) and reports whether M has full rank N.
inline bool witness_rank_check(std::span<const MultiPoly> fs, std::span<const Point> witnesses) {
    if (fs.empty()) throw DomainError("witness_rank_check: empty polynomial list");
    detail::check_common_ring(fs);
    const auto& ctx = fs.front().ctx();
    const std::size_t n = witnesses.size();

    std::vector<std::vector<std::uint32_t>> values(n, std::vector<std::uint32_t>(fs.size()));
    std::vector<DynamicBitset> support(n, DynamicBitset(fs.size()));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < fs.size(); ++i) {
            values[j][i] = fs[i].eval_residue(witnesses[j]);
            if (values[j][i] != 0) support[j].set(i);
        }
    }
    {
        auto sorted = support;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw DomainError("witness_rank_check: witnesses realize duplicate patterns");
        }
    }

    FieldMatrix m(n, zero_vector(ctx, n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
            FieldElement g = ctx.one();
            for (auto i : support[j].indices()) g *= ctx.make(values[l][i]);
            m[j][l] = g;
        }
    }
    return matrix_rank(m) == n;
}

}  // namespace ffil
