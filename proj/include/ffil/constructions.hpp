#pragma once

// Randomized constructions with retry loops and built-in verification: the zero-count
// experiment, random algebraic graphs, point-variety instances, evasive point sets and
// unit-distance instances.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ffil/bigraph.hpp"
#include "ffil/error.hpp"
#include "ffil/geometry.hpp"
#include "ffil/gf.hpp"
#include "ffil/mpoly.hpp"
#include "ffil/patterns.hpp"
#include "ffil/rng.hpp"

namespace ffil {

enum class Verification { verified_free, witness_found, search_capped };

inline std::string to_string(Verification v) {
    switch (v) {
        case Verification::verified_free: return "verified-free";
        case Verification::witness_found: return "witness-found";
        case Verification::search_capped: return "search-capped";
    }
    return "?";
}

struct KssCheck {
    Verification outcome = Verification::search_capped;
    std::optional<KssWitness> witness;
};

inline KssCheck check_kss(const BipartiteGraph& g, std::size_t s, std::uint64_t probe_cap = default_probe_cap) {
    try {
        auto w = contains_kss(g, s, probe_cap);
        if (w) return {Verification::witness_found, std::move(w)};
        return {Verification::verified_free, std::nullopt};
    } catch (const ResourceError&) {
        return {Verification::search_capped, std::nullopt};
    }
}

inline nlohmann::json witness_json(const std::optional<KssWitness>& w) {
    if (!w) return nullptr;
    return {{"a_side", w->a_side}, {"b_side", w->b_side}};
}

struct ConstructionReport {
    std::string construction;
    nlohmann::json parameters = nlohmann::json::object();
    std::uint64_t achieved = 0;
    double target = 0;
    Verification verification = Verification::search_capped;
    std::optional<KssWitness> witness;
    std::size_t s_prescribed = 0;
    std::size_t s_verified = 0;
    std::size_t retries = 0;
    double wall_seconds = 0;
    std::vector<std::string> warnings;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const {
        return {{"construction", construction},
                {"parameters", parameters},
                {"achieved", achieved},
                {"target", target},
                {"verification", to_string(verification)},
                {"witness", witness_json(witness)},
                {"s_prescribed", s_prescribed},
                {"s_verified", s_verified},
                {"retries", retries},
                {"wall_seconds", wall_seconds},
                {"warnings", warnings},
                {"extra", extra}};
    }
};

/// Retry cap exhausted; carries the best attempt seen.
class ConstructionFailure : public ResourceError {
public:
    ConstructionFailure(const std::string& what, ConstructionReport best) : ResourceError(what), best_(std::move(best)) {}
    const ConstructionReport& best() const noexcept { return best_; }

private:
    ConstructionReport best_;
};

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// floor(n^(1/e)), exact.
inline std::uint64_t integer_root(std::uint64_t n, unsigned e) {
    if (e == 0) throw DomainError("integer_root: zero exponent");
    auto r = static_cast<std::uint64_t>(std::pow(static_cast<double>(n), 1.0 / e));
    while (r > 0 && saturating_pow(r, e) > n) --r;
    while (saturating_pow(r + 1, e) <= n) ++r;
    return r;
}

/// Runs fn(i) for i in [0, trials) on up to `jobs` threads; results are ordered by i.
template <typename Fn>
auto parallel_trials(std::size_t trials, std::size_t jobs, Fn&& fn) -> std::vector<decltype(fn(std::size_t{0}))> {
    using T = decltype(fn(std::size_t{0}));
    std::vector<std::optional<T>> slots(trials);
    jobs = std::max<std::size_t>(1, std::min(jobs, trials));
    if (jobs == 1) {
        for (std::size_t i = 0; i < trials; ++i) slots[i].emplace(fn(i));
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i; !failed && (i = next++) < trials;) {
                    try {
                        slots[i].emplace(fn(i));
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    std::vector<T> out;
    out.reserve(trials);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------------------
// Zero counts of uniform polynomials

struct ZeroCountResult {
    double fraction = 0;
    std::size_t successes = 0;
    double threshold = 0;  // p^(D-1) / 2
    double mean_count = 0;
    std::vector<std::uint64_t> counts;  // per trial
};

inline ZeroCountResult zero_count_experiment(std::uint32_t p, std::size_t dim, std::size_t delta, std::size_t trials,
                                             std::uint64_t seed, std::size_t jobs = 1,
                                             std::uint64_t cap = default_enumeration_cap) {
    if (p < 5 || !is_prime(p)) throw DomainError("zero_count_experiment: p must be a prime >= 5");
    if (dim < 3 || delta < 3) throw DomainError("zero_count_experiment: D and Delta must be at least 3");
    if (trials == 0) throw DomainError("zero_count_experiment: need at least one trial");
    if (saturating_pow(p, dim) > cap) throw ResourceError("zero_count_experiment: p^D exceeds cap");
    const auto ctx = FieldCtx::prime(p);
    ZeroCountResult r;
    r.threshold = static_cast<double>(saturating_pow(p, dim - 1)) / 2.0;
    r.counts = parallel_trials(trials, jobs, [&](std::size_t i) {
        CounterRng rng(derive_seed(seed, i));
        return zero_count(sample_uniform(ctx, dim, delta, rng), cap);
    });
    double sum = 0;
    for (auto c : r.counts) {
        sum += static_cast<double>(c);
        if (static_cast<double>(c) >= r.threshold) ++r.successes;
    }
    r.fraction = static_cast<double>(r.successes) / static_cast<double>(trials);
    r.mean_count = sum / static_cast<double>(trials);
    return r;
}

// ---------------------------------------------------------------------------
// Random algebraic graphs

/// Bipartite graph on F_p^{d1} x F_p^{d2} with x ~ y iff f(x, y) = 0; vertices indexed by point_index.
inline BipartiteGraph algebraic_graph(const MultiPoly& f, std::size_t d1, std::size_t d2,
                                      std::uint64_t cap = default_enumeration_cap) {
    if (f.nvars() != d1 + d2) throw DomainError("algebraic_graph: variable count must be D1 + D2");
    const std::uint32_t p = f.ctx().characteristic();
    const std::uint64_t na = saturating_pow(p, d1), nb = saturating_pow(p, d2);
    if (na > cap / std::max<std::uint64_t>(nb, 1)) throw ResourceError("algebraic_graph: p^(D1+D2) exceeds cap");
    BipartiteGraph g(na, nb);
    std::size_t b = 0;
    for_each_point(p, d2, cap, [&](const Point& q) {
        const MultiPoly fq = bivariate_section(f, q);
        std::size_t a = 0;
        for_each_point(p, d1, cap, [&](const Point& x) {
            if (fq.eval_residue(x) == 0) g.add_edge(a, b);
            ++a;
        });
        ++b;
    });
    return g;
}

struct AlgebraicGraphOptions {
    std::optional<std::size_t> s;      // defaults to D1 + D2
    std::optional<std::size_t> delta;  // defaults to (D1 + D2)^2
    std::size_t poly_retries = 20;
    std::size_t subsample_retries = 20;
    std::uint64_t probe_cap = default_probe_cap;
};

struct AlgebraicGraph {
    MultiPoly f;
    BipartiteGraph base;  // G_0 on the full point sets
    BipartiteGraph graph;
    std::vector<std::size_t> a_indices;  // into F_p^{D1}
    std::vector<std::size_t> b_indices;  // into F_p^{D2}
    ConstructionReport report;
};

inline AlgebraicGraph random_algebraic_graph(std::uint32_t p, std::size_t d1, std::size_t d2, std::uint64_t m,
                                             std::uint64_t n, std::uint64_t seed,
                                             const AlgebraicGraphOptions& opt = {}) {
    detail::Stopwatch clock;
    if (!is_prime(p)) throw DomainError("random_algebraic_graph: p must be prime");
    if (d1 < 1 || d2 < 1) throw DomainError("random_algebraic_graph: D1 and D2 must be positive");
    const std::uint64_t na = saturating_pow(p, d1), nb = saturating_pow(p, d2);
    if (m < 1 || n < 1 || m > na || n > nb) throw DomainError("random_algebraic_graph: need 1 <= m <= p^D1, 1 <= n <= p^D2");
    const std::size_t s_default = d1 + d2;
    const std::size_t s = opt.s.value_or(s_default);
    const std::size_t delta = opt.delta.value_or(s_default * s_default);
    if (s < 1) throw DomainError("random_algebraic_graph: s must be positive");

    const auto ctx = FieldCtx::prime(p);
    CounterRng rng(seed);
    ConstructionReport rep;
    rep.construction = "random_algebraic_graph";
    rep.parameters = {{"p", p}, {"D1", d1}, {"D2", d2}, {"Delta", delta}, {"s", s}, {"m", m}, {"n", n}, {"seed", seed}};
    rep.s_prescribed = s_default;
    rep.s_verified = s;
    if (static_cast<double>(s * s) > std::min(static_cast<double>(delta), std::sqrt(static_cast<double>(p)))) {
        rep.warnings.push_back("s^2 > min(Delta, sqrt(p)): the independence heuristic does not apply at this scale");
    }
    rep.warnings.push_back("target uses the halved expectation mn/(2p) in place of an unspecified constant");

    const double g0_target = static_cast<double>(saturating_pow(p, d1 + d2 - 1)) / 2.0;
    std::optional<AlgebraicGraph> found;
    std::uint64_t best_edges = 0;
    nlohmann::json trace = nlohmann::json::array();
    for (std::size_t attempt = 1; attempt <= opt.poly_retries && !found; ++attempt) {
        MultiPoly f = sample_uniform(ctx, d1 + d2, delta, rng);
        BipartiteGraph g0 = algebraic_graph(f, d1, d2);
        const auto e0 = g0.edge_count();
        best_edges = std::max(best_edges, e0);
        rep.retries = attempt - 1;
        nlohmann::json row = {{"phase", "poly"}, {"attempt", attempt}, {"edges", e0}, {"target", g0_target},
                              {"accepted", false}};
        if (static_cast<double>(e0) < g0_target) {
            trace.push_back(row);
            continue;
        }
        const KssCheck chk = check_kss(g0, s, opt.probe_cap);
        if (chk.outcome == Verification::witness_found) {
            trace.push_back(row);
            continue;
        }
        row["accepted"] = true;
        trace.push_back(row);
        found.emplace(AlgebraicGraph{std::move(f), std::move(g0), BipartiteGraph(0, 0), {}, {}, {}});
    }
    if (!found) {
        rep.achieved = best_edges;
        rep.target = g0_target;
        rep.retries = opt.poly_retries;
        rep.extra["attempts"] = trace;
        rep.wall_seconds = clock.seconds();
        throw ConstructionFailure("random_algebraic_graph: no polynomial met the edge and K_{s,s} conditions", rep);
    }

    const double target = static_cast<double>(m) * static_cast<double>(n) / (2.0 * p);
    rep.target = target;
    std::size_t sub_attempt = 0;
    for (sub_attempt = 1; sub_attempt <= opt.subsample_retries; ++sub_attempt) {
        auto as = sample_subset(na, m, rng);
        auto bs = sample_subset(nb, n, rng);
        BipartiteGraph g = found->base.induced(as, bs);
        const auto e = g.edge_count();
        if (e > rep.achieved || sub_attempt == 1) {
            rep.achieved = e;
            found->graph = std::move(g);
            found->a_indices = std::move(as);
            found->b_indices = std::move(bs);
        }
        const bool ok = static_cast<double>(e) >= target;
        trace.push_back({{"phase", "subsample"}, {"attempt", sub_attempt}, {"edges", e}, {"target", target},
                         {"accepted", ok}});
        if (ok) break;
    }
    rep.extra["attempts"] = trace;
    rep.extra["poly_retries"] = rep.retries;
    rep.extra["subsample_retries"] = sub_attempt - 1;
    rep.extra["base_edges"] = found->base.edge_count();
    rep.extra["base_target"] = g0_target;
    rep.retries += sub_attempt - 1;
    if (static_cast<double>(rep.achieved) < target) {
        rep.retries = opt.poly_retries + opt.subsample_retries;
        rep.wall_seconds = clock.seconds();
        throw ConstructionFailure("random_algebraic_graph: no subsample reached mn/(2p) edges", rep);
    }
    const KssCheck chk = check_kss(found->graph, s, opt.probe_cap);
    rep.verification = chk.outcome;
    rep.witness = chk.witness;
    rep.wall_seconds = clock.seconds();
    found->report = std::move(rep);
    return std::move(*found);
}

// ---------------------------------------------------------------------------
// Point-variety incidences

struct PointVarietyOptions {
    std::optional<std::size_t> s;  // for the incidence-graph check; defaults to (D + D')^2
    std::optional<std::size_t> graph_s;
    std::uint64_t probe_cap = default_probe_cap;
};

struct PointVarietyInstance {
    std::vector<Point> points;
    std::vector<PolySystem> varieties;  // one hypersurface V(f_q) per chosen q
    BipartiteGraph incidence;
    std::uint64_t incidences = 0;
    AlgebraicGraph graph;
    ConstructionReport report;
};

inline PointVarietyInstance point_variety_instance(std::uint64_t m, double alpha, std::size_t dim, std::uint64_t seed,
                                                   const PointVarietyOptions& opt = {}) {
    detail::Stopwatch clock;
    if (m < 2 || dim < 1) throw DomainError("point_variety_instance: need m >= 2 and D >= 1");
    if (!(alpha > 0)) throw DomainError("point_variety_instance: alpha must be positive");
    const std::uint64_t root = integer_root(m, static_cast<unsigned>(dim));
    const auto p = static_cast<std::uint32_t>(find_prime(root));
    const auto dim2 = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(dim) - 1e-9));
    const auto n = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(m), alpha) + 1e-9));
    if (n > saturating_pow(p, dim2)) throw DomainError("point_variety_instance: n exceeds p^D'");
    if (m > saturating_pow(p, dim)) throw DomainError("point_variety_instance: m exceeds p^D");

    AlgebraicGraphOptions gopt;
    gopt.s = opt.graph_s;
    gopt.probe_cap = opt.probe_cap;
    PointVarietyInstance inst{{}, {}, BipartiteGraph(0, 0), 0,
                              random_algebraic_graph(p, dim, dim2, m, n, seed, gopt), {}};
    const auto& ag = inst.graph;
    const std::size_t delta = (dim + dim2) * (dim + dim2);

    for (auto a : ag.a_indices) inst.points.push_back(point_from_index(p, dim, a));
    std::uint64_t max_hypersurface = 0;
    for (auto b : ag.b_indices) {
        const Point q = point_from_index(p, dim2, b);
        MultiPoly fq = bivariate_section(ag.f, q);
        max_hypersurface = std::max(max_hypersurface, zero_count(fq));
        inst.varieties.push_back(PolySystem{std::move(fq)});
    }

    // incidences recounted from the varieties, not copied from the graph
    inst.incidence = BipartiteGraph(inst.points.size(), inst.varieties.size());
    for (std::size_t i = 0; i < inst.points.size(); ++i)
        for (std::size_t j = 0; j < inst.varieties.size(); ++j)
            if (inst.varieties[j].front().eval_residue(inst.points[i]) == 0) inst.incidence.add_edge(i, j);
    inst.incidences = inst.incidence.edge_count();

    const std::size_t s = opt.s.value_or(delta);
    ConstructionReport rep;
    rep.construction = "point_variety_instance";
    rep.parameters = {{"m", m},   {"alpha", alpha}, {"D", dim}, {"D_prime", dim2}, {"n", n},
                      {"p", p},   {"Delta", delta}, {"s", s},   {"seed", seed}};
    rep.achieved = inst.incidences;
    rep.target = static_cast<double>(m) * static_cast<double>(n) / (2.0 * p);
    rep.s_prescribed = delta;
    rep.s_verified = s;
    rep.retries = ag.report.retries;
    rep.warnings = ag.report.warnings;
    rep.warnings.push_back("varieties are full zero sets V(f_q); no irreducible factor is selected");
    const KssCheck chk = check_kss(inst.incidence, s, opt.probe_cap);
    rep.verification = chk.outcome;
    rep.witness = chk.witness;
    const std::uint64_t hyper_bound = delta * saturating_pow(p, dim - 1);
    rep.extra = {{"graph_edges", ag.graph.edge_count()},
                 {"incidences_cover_edges", inst.incidences >= ag.graph.edge_count()},
                 {"max_hypersurface_points", max_hypersurface},
                 {"hypersurface_point_bound", hyper_bound},
                 {"hypersurface_bound_holds", max_hypersurface <= hyper_bound},
                 {"graph_report", ag.report.to_json()}};
    rep.extra["graph_report"].erase("wall_seconds");
    rep.wall_seconds = clock.seconds();
    inst.report = std::move(rep);
    return inst;
}

// ---------------------------------------------------------------------------
// Evasive-set candidates

enum class EvasiveStrategy { map_image, random };

inline EvasiveStrategy parse_evasive_strategy(const std::string& s) {
    if (s == "map-image") return EvasiveStrategy::map_image;
    if (s == "random") return EvasiveStrategy::random;
    throw DomainError("unknown evasive strategy '" + s + "'");
}

inline std::string to_string(EvasiveStrategy s) { return s == EvasiveStrategy::map_image ? "map-image" : "random"; }

/// A set of p^(d-k) points of F_p^d, lex-sorted. map-image: the graph of y -> (g_1(y), ..., g_k(y))
/// with g_i(y) = sum_j c_ij y_j^(2i+1), c_ij random nonzero. random: a uniform subset.
inline std::vector<Point> evasive_set_generate(std::uint32_t p, std::size_t d, std::size_t k, EvasiveStrategy strategy,
                                               CounterRng& rng, std::uint64_t cap = default_enumeration_cap) {
    if (!is_prime(p)) throw DomainError("evasive_set_generate: p must be prime");
    if (k >= d) throw DomainError("evasive_set_generate: need k < d");
    const std::uint64_t size = saturating_pow(p, d - k);
    if (size > cap) throw ResourceError("evasive_set_generate: p^(d-k) exceeds cap");
    std::vector<Point> out;
    out.reserve(size);
    if (strategy == EvasiveStrategy::random) {
        if (saturating_pow(p, d) > cap) throw ResourceError("evasive_set_generate: p^d exceeds cap");
        for (auto idx : sample_subset(saturating_pow(p, d), size, rng)) out.push_back(point_from_index(p, d, idx));
        return out;
    }
    std::vector<std::vector<std::uint64_t>> coeff(k, std::vector<std::uint64_t>(d - k));
    for (auto& row : coeff)
        for (auto& c : row) c = 1 + rng.uniform_below(p - 1);
    for_each_point(p, d - k, cap, [&](const Point& y) {
        Point x = y;
        for (std::size_t i = 0; i < k; ++i) {
            std::uint64_t acc = 0;
            for (std::size_t j = 0; j < y.size(); ++j)
                acc = (acc + coeff[i][j] * detail::powmod64(y[j], 2 * (i + 1) + 1, p)) % p;
            x.push_back(static_cast<std::uint32_t>(acc));
        }
        out.push_back(std::move(x));
    });
    std::sort(out.begin(), out.end());
    return out;
}

/// Largest number of points of `pts` on one affine line of F_p^d (exhaustive over directions).
inline std::size_t max_line_intersection(const std::vector<Point>& pts, std::uint32_t p, std::size_t d) {
    if (pts.size() <= 1) return pts.size();
    std::size_t best = 1;
    for_each_point(p, d, default_enumeration_cap, [&](const Point& dir) {
        // one representative per projective direction: first nonzero coordinate equal to 1
        auto nz = std::find_if(dir.begin(), dir.end(), [](auto c) { return c != 0; });
        if (nz == dir.end() || *nz != 1) return;
        std::map<std::uint64_t, std::size_t> lines;
        for (const auto& x : pts) {
            std::uint64_t key = ~std::uint64_t{0};
            Point y = x;
            for (std::uint32_t t = 0; t < p; ++t) {
                key = std::min(key, point_index(p, y));
                for (std::size_t i = 0; i < d; ++i) y[i] = (y[i] + dir[i]) % p;
            }
            best = std::max(best, ++lines[key]);
        }
    });
    return best;
}

// ---------------------------------------------------------------------------
// Unit-distance instances

struct UnitDistanceOptions {
    std::size_t s = 4;
    std::optional<std::uint32_t> prime;  // skips the n^(1/(ceil(d/2)+1)) >= 7 precondition
    EvasiveStrategy strategy = EvasiveStrategy::map_image;
    std::size_t shift_retries = 50;
    std::uint64_t probe_cap = default_probe_cap;
    bool check_kss = true;
};

struct UnitDistanceInstance {
    BilinearForm form;                    // the form distances are measured in
    std::vector<FieldVector> points;      // final point set, over F_{p^2} when embedded
    std::vector<FieldVector> base_points; // the same points before embedding, over F_p
    std::size_t evasive_size = 0;
    FieldVector shift;
    std::uint64_t unit_distances = 0;
    bool embedded = false;
    ConstructionReport report;
};

namespace detail {

inline std::uint64_t shifted_unit_pairs(const std::vector<FieldVector>& u, const FieldVector& x,
                                        const BilinearForm& form) {
    std::uint64_t c = 0;
    for (const auto& a : u) {
        const FieldVector ax = a - x;
        for (const auto& b : u)
            if (form.norm_sq(ax - b).is_one()) ++c;
    }
    return c;
}

}  // namespace detail

inline UnitDistanceInstance unit_distance_instance(std::uint64_t n, std::size_t d, std::uint64_t seed,
                                                   const UnitDistanceOptions& opt = {}) {
    detail::Stopwatch clock;
    if (d < 2) throw DomainError("unit_distance_instance: d must be at least 2");
    if (n < 1) throw DomainError("unit_distance_instance: n must be positive");
    const auto expo = static_cast<unsigned>((d + 1) / 2 + 1);
    const std::uint64_t root = integer_root(n, expo);
    std::uint32_t p = 0;
    if (opt.prime) {
        p = *opt.prime;
        if (!is_prime(p) || p % 4 != 3) throw DomainError("unit_distance_instance: prime must be 3 mod 4");
    } else {
        if (root < 7) throw DomainError("unit_distance_instance: n^(1/(ceil(d/2)+1)) must be at least 7");
        p = static_cast<std::uint32_t>(find_prime(root, ResidueClass{3, 4}));
    }
    const std::size_t k = d / 2;

    CounterRng rng(seed);
    const auto ctx = FieldCtx::prime(p);
    const auto form = BilinearForm::twisted(ctx, d);
    std::vector<FieldVector> u;
    for (const auto& x : evasive_set_generate(p, d, k - 1, opt.strategy, rng)) u.push_back(to_field_vector(ctx, x));

    ConstructionReport rep;
    rep.construction = "unit_distance_instance";
    rep.parameters = {{"n", n},
                      {"d", d},
                      {"p", p},
                      {"k", k},
                      {"s", opt.s},
                      {"strategy", to_string(opt.strategy)},
                      {"prime_override", opt.prime.has_value()},
                      {"seed", seed}};
    rep.s_prescribed = opt.s;
    rep.s_verified = opt.s;
    if (opt.prime) rep.warnings.push_back("prime given explicitly; the n-based size precondition was skipped");

    const double usz = static_cast<double>(u.size());
    const double shift_target = usz * usz / (2.0 * p);
    const std::uint64_t space = saturating_pow(p, d);
    std::optional<FieldVector> shift;
    std::uint64_t best_pairs = 0;
    FieldVector best_shift;
    nlohmann::json attempts = nlohmann::json::array();
    for (std::size_t attempt = 1; attempt <= opt.shift_retries; ++attempt) {
        const std::uint64_t idx = 1 + rng.uniform_below(space - 1);  // never the zero shift
        const FieldVector x = to_field_vector(ctx, point_from_index(p, d, idx));
        const auto pairs = detail::shifted_unit_pairs(u, x, form);
        attempts.push_back({{"attempt", attempt}, {"shift", to_point(x)}, {"unit_pairs", pairs}});
        if (pairs > best_pairs || best_shift.empty()) {
            best_pairs = pairs;
            best_shift = x;
        }
        rep.retries = attempt - 1;
        if (static_cast<double>(pairs) >= shift_target) {
            shift = x;
            break;
        }
    }
    rep.extra["shift_attempts"] = attempts;
    rep.extra["shift_target"] = shift_target;
    if (!shift) {
        rep.achieved = best_pairs;
        rep.target = shift_target;
        rep.retries = opt.shift_retries;
        rep.extra["best_shift"] = to_point(best_shift);
        rep.wall_seconds = clock.seconds();
        throw ConstructionFailure("unit_distance_instance: no shift reached |U|^2/(2p) unit pairs", rep);
    }

    // P = U cup (U + x), lex-sorted and deduplicated
    std::set<Point> merged;
    for (const auto& a : u) {
        merged.insert(to_point(a));
        merged.insert(to_point(a + *shift));
    }
    std::vector<FieldVector> all;
    for (const auto& x : merged) all.push_back(to_field_vector(ctx, x));

    UnitDistanceInstance inst{form, {}, {}, u.size(), *shift, 0, false, {}};
    if (all.size() > n) {
        for (auto i : sample_subset(all.size(), n, rng)) inst.base_points.push_back(all[i]);
    } else {
        inst.base_points = all;
    }
    if (d % 4 == 1) {
        const auto ext = FieldCtx::quadratic(p);
        inst.points = phi_embed(inst.base_points, solve_unit_alpha(ext));
        inst.form = BilinearForm::standard(ext, d);
        inst.embedded = true;
    } else {
        inst.points = inst.base_points;
    }

    const UnitDistanceGraph g = unit_distance_graph(inst.points, inst.form);
    inst.unit_distances = g.edge_count;
    const double frac = static_cast<double>(inst.points.size()) / static_cast<double>(all.size());
    rep.achieved = inst.unit_distances;
    rep.target = shift_target * frac * frac;
    rep.extra["evasive_size"] = u.size();
    rep.extra["union_size"] = all.size();
    rep.extra["point_count"] = inst.points.size();
    rep.extra["shift"] = to_point(*shift);
    rep.extra["shift_unit_pairs"] = best_pairs;
    rep.extra["embedded"] = inst.embedded;
    rep.warnings.push_back("target uses the halved expectation |U|^2/(2p), scaled by the subsample fraction squared");
    if (opt.check_kss) {
        const KssCheck chk = check_kss(g.doubled, opt.s, opt.probe_cap);
        rep.verification = chk.outcome;
        rep.witness = chk.witness;
    }
    rep.wall_seconds = clock.seconds();
    inst.report = std::move(rep);
    return inst;
}

// ---------------------------------------------------------------------------
// Random hypergraphs

/// M distinct k-subsets of [N], uniform without replacement.
inline Hypergraph random_hypergraph(std::size_t vertices, std::size_t edges, std::size_t k, CounterRng& rng) {
    if (k < 1 || k > vertices) throw DomainError("random_hypergraph: need 1 <= k <= N");
    if (binomial(vertices, k) < edges) throw DomainError("random_hypergraph: more edges than k-subsets");
    Hypergraph h{vertices, k, {}};
    std::set<std::vector<std::size_t>> seen;
    while (h.edges.size() < edges) {
        auto e = sample_subset(vertices, k, rng);
        if (seen.insert(e).second) h.edges.push_back(std::move(e));
    }
    return h;
}

}  // namespace ffil
