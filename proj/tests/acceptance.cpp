// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "ffil/cli.hpp"
#include "oracles.hpp"

using namespace ffil;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string note;
};

struct Cli {
    int code;
    json report;
};

Cli cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    json rep;
    if (!out.str().empty() && out.str().front() == '{') rep = json::parse(out.str());
    return {code, rep};
}

template <typename... Ts>
std::string cat(const Ts&... xs) {
    std::ostringstream os;
    (os << ... << xs);
    return os.str();
}

// 1. zero counts: fraction at least 0.70 in under 10 s
Outcome zero_counts() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto jobs = std::max(1u, std::thread::hardware_concurrency());
    const auto r = zero_count_experiment(5, 3, 3, 400, 1, jobs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {r.fraction >= 0.70 && secs < 10.0,
            cat("fraction=", r.fraction, " mean=", r.mean_count, " seconds=", secs)};
}

// 2. random algebraic graphs at full size are K_{s,s}-free with at least mn/(2p) edges
Outcome zarankiewicz() {
    Outcome o;
    struct Case {
        std::uint32_t p;
        std::size_t d1, d2, s;
    };
    for (const Case c : {Case{7, 1, 1, 2}, Case{5, 1, 2, 3}}) {
        const std::uint64_t m = saturating_pow(c.p, c.d1);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto ag = random_algebraic_graph(c.p, c.d1, c.d2, m, m, seed);
            const double target = static_cast<double>(m * m) / (2.0 * c.p);
            const bool ok = ag.report.verification == Verification::verified_free &&
                            !oracle::has_kss(ag.graph, c.s) &&
                            static_cast<double>(ag.graph.edge_count()) >= target;
            if (!ok) o.pass = false;
            if (seed == 1)
                o.note += cat("(", c.p, ",", c.d1, ",", c.d2, ",", c.s, "): e=", ag.graph.edge_count(), " target=",
                              target, "; ");
        }
    }
    return o;
}

// 3. zero-pattern counts against brute force, the bound, and the rank check
Outcome zero_patterns_check() {
    CounterRng rng(3);
    std::size_t mismatches = 0, over_bound = 0, rank_fail = 0;
    for (int t = 0; t < 100; ++t) {
        const std::uint32_t p = std::array<std::uint32_t, 3>{3, 5, 7}[rng.uniform_below(3)];
        const std::size_t dim = 1 + rng.uniform_below(2), k = 1 + rng.uniform_below(5), delta = 1 + rng.uniform_below(2);
        std::vector<MultiPoly> fs;
        for (std::size_t i = 0; i < k; ++i) fs.push_back(sample_uniform(FieldCtx::prime(p), dim, delta, rng));
        const auto fam = zero_patterns(fs);
        std::set<std::vector<bool>> brute;
        for_each_point(p, dim, default_enumeration_cap, [&](const Point& x) {
            std::vector<bool> z;
            for (const auto& f : fs) z.push_back(f.evaluate(x).is_zero());
            brute.insert(z);
        });
        mismatches += brute.size() != fam.size();
        over_bound += fam.size() > zero_pattern_bound_rbg(k, delta, dim);
        rank_fail += !witness_rank_check(fs, fam.witnesses());
    }
    const auto fixture = cli({"zero-patterns", "--input", std::string(FFIL_FIXTURE_DIR) + "/zero_patterns_x_xm1.txt"});
    const bool fixture_ok = fixture.code == 0 && fixture.report["achieved"] == 3;
    return {mismatches == 0 && over_bound == 0 && rank_fail == 0 && fixture_ok,
            cat("mismatches=", mismatches, " over_bound=", over_bound, " rank_failures=", rank_fail,
                " fixture_count=", fixture.report["achieved"])};
}

// 4. containment patterns of curves in F_7^3, several seeds
Outcome containment() {
    Outcome o;
    for (int seed = 1; seed <= 5; ++seed) {
        const auto r = cli({"containment-patterns", "--p", "7", "--vars", "3", "--k", "8", "--degree", "2", "--seed",
                            std::to_string(seed)});
        const auto& d = r.report["details"];
        const bool ok = r.code == 0 && d["monotone"] == true && d["dominated"] == true && !d["slope"].is_null() &&
                        d["slope"].get<double>() <= 2.5;
        if (!ok) o.pass = false;
        o.note += cat("seed ", seed, ": slope=", d["slope"], "; ");
    }
    return o;
}

// 5. sphere intersections, flats in spheres, isotropic pairs
Outcome sphere_geometry() {
    Outcome o;
    for (const char* p : {"5", "7"}) {
        for (const char* d : {"2", "3"}) {
            const auto r = cli({"sphere-geometry", "--p", p, "--d", d, "--families", "200", "--pair-search", "false"});
            if (r.code != 0 || r.report["verification"] != "pass") o.pass = false;
            o.note += cat("p=", p, ",d=", d, ":", r.report["verification"].get<std::string>(), " ");
        }
    }
    const auto flats = cli({"sphere-geometry", "--p", "5", "--d", "2", "--families", "0", "--pair-search", "false"});
    if (flats.code != 0 || flats.report["details"]["flats_pass"] != true) o.pass = false;
    o.note += cat("flats(5,2)=", flats.report["details"]["flats_by_dim"], " ");
    for (const char* p : {"3", "7", "11"}) {
        const auto r = cli({"sphere-geometry", "--p", p, "--d", "3", "--families", "0"});
        const auto& ps = r.report["details"]["pair_search"];
        if (r.code != 0 || ps["searched"] != true || ps["found"] != false) o.pass = false;
        o.note += cat("pair(p=", p, ")=", ps["found"], " ");
    }
    return o;
}

// 6. no induced Pi_{d+1} in unit-sphere incidence graphs
Outcome forbidden_patterns() {
    Outcome o;
    const auto pi3 = cli({"pattern-scan", "--p", "3", "--d", "2", "--subhosts", "0"});
    const auto pi4 = cli({"pattern-scan", "--p", "3", "--d", "3", "--subhosts", "0"});
    const auto sub7 = cli({"pattern-scan", "--p", "7", "--d", "2", "--full", "false", "--subhosts", "50"});
    for (const auto* r : {&pi3, &pi4, &sub7})
        if (r->code != 0 || r->report["verification"] != "absent") o.pass = false;
    o.note = cat("Pi3/F_3^2=", pi3.report["verification"], " Pi4/F_3^3=", pi4.report["verification"],
                 " 50 subhosts/F_7^2=", sub7.report["verification"]);
    return o;
}

// 7. unit distances in the plane: count, growth slope, K_{4,4} check
Outcome unit_distance() {
    Outcome o;
    std::vector<double> xs, ys;
    for (std::uint32_t p : {7u, 11u, 19u}) {
        UnitDistanceOptions opt;
        opt.prime = p;
        const auto inst = unit_distance_instance(std::uint64_t{p} * p, 2, 1, opt);
        const double usz = static_cast<double>(inst.evasive_size);
        const bool ok = static_cast<double>(inst.unit_distances) >= usz * usz / (2.0 * p) &&
                        inst.report.verification == Verification::verified_free;
        if (!ok) o.pass = false;
        xs.push_back(std::log(static_cast<double>(inst.points.size())));
        ys.push_back(std::log(static_cast<double>(inst.unit_distances)));
        o.note += cat("p=", p, ":", inst.unit_distances, " ");
    }
    const double mx = (xs[0] + xs[1] + xs[2]) / 3, my = (ys[0] + ys[1] + ys[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    if (std::abs(slope - 1.5) > 0.15) o.pass = false;
    o.note += cat("slope=", slope);
    return o;
}

// 8. independent sets in random uniform hypergraphs
Outcome independent_sets() {
    CounterRng rng(8);
    std::size_t bad = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t k = 2 + t % 2;
        const std::size_t n = 10 + rng.uniform_below(51);
        const std::size_t m = std::min<std::uint64_t>(binomial(n, k), n + rng.uniform_below(3 * n));
        const auto h = random_hypergraph(n, m, k, rng);
        const auto s = hypergraph_independent_set(h, rng);
        bad += !is_independent(h, s.vertices) || s.vertices.size() < s.target || s.attempts > 200;
    }
    return {bad == 0, cat("failures=", bad, "/50")};
}

// 9. exact searches against brute-force oracles
Outcome oracles() {
    CounterRng rng(9);
    std::size_t kss_bad = 0, pat_bad = 0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t m = 1 + rng.uniform_below(6), n = 1 + rng.uniform_below(6);
        const auto g = oracle::random_graph(m, n, 0.3 + 0.5 * rng.uniform01(), rng);
        const std::size_t s = 1 + rng.uniform_below(3);
        kss_bad += contains_kss(g, s).has_value() != oracle::has_kss(g, s);
        const auto pat = oracle::random_pattern(1 + rng.uniform_below(3), 1 + rng.uniform_below(3), rng);
        const auto emb = find_induced_pattern(g, pat);
        pat_bad += emb.has_value() != oracle::has_pattern(g, pat) || (emb && !is_pattern_embedding(g, pat, *emb));
    }
    return {kss_bad == 0 && pat_bad == 0, cat("kss_mismatches=", kss_bad, " pattern_mismatches=", pat_bad)};
}

// 10. every subcommand replays identically for a fixed seed
Outcome determinism() {
    const std::vector<std::vector<std::string>> runs = {
        {"zarankiewicz", "--p", "7"},
        {"zero-patterns", "--p", "5", "--vars", "2", "--k", "4", "--degree", "2"},
        {"containment-patterns", "--p", "5", "--k", "4"},
        {"shatter", "--m", "12", "--n", "10"},
        {"point-variety", "--m", "25", "--D", "2"},
        {"unit-distance", "--n", "49", "--prime", "7"},
        {"sphere-geometry", "--families", "30"},
        {"pattern-scan", "--subhosts", "5"},
        {"zero-count", "--trials", "40"},
        {"indep-set", "--instances", "3"},
    };
    std::size_t diff = 0;
    for (auto args : runs) {
        args.insert(args.end(), {"--seed", "17"});
        auto a = cli(args), b = cli(args);
        a.report.erase("timing");
        b.report.erase("timing");
        diff += a.code != b.code || a.report.dump() != b.report.dump() || a.report.is_null();
    }
    return {diff == 0, cat("subcommands=", runs.size(), " differing=", diff)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"zero-count fraction", zero_counts},
        {"zarankiewicz graphs", zarankiewicz},
        {"zero-pattern bound", zero_patterns_check},
        {"containment growth", containment},
        {"sphere geometry", sphere_geometry},
        {"forbidden patterns", forbidden_patterns},
        {"unit distances", unit_distance},
        {"hypergraph independent sets", independent_sets},
        {"search oracles", oracles},
        {"cli determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, cat("exception: ", e.what())};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.note
                  << std::endl;
    }
    return failed ? 1 : 0;
}
