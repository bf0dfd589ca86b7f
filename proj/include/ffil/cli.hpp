#pragma once

// Experiment runner behind tools/ffil. run() parses one subcommand, executes it and writes
// a JSON report {config, achieved, bound, verification, retries, details, timing} plus an
// optional CSV series.
// Exit codes: 0 ok, 1 usage or invalid parameters, 2 verification failure, 3 resource/retry error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ffil/bigraph.hpp"
#include "ffil/constructions.hpp"
#include "ffil/error.hpp"
#include "ffil/geometry.hpp"
#include "ffil/gf.hpp"
#include "ffil/mpoly.hpp"
#include "ffil/patterns.hpp"
#include "ffil/rng.hpp"

namespace ffil::cli {

using nlohmann::json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_verification = 2;
inline constexpr int exit_resource = 3;

struct Common {
    std::uint64_t seed = 1;
    std::string out;
    std::string csv;
    std::size_t jobs = 1;
};

struct Outcome {
    int code = exit_ok;
    json achieved;
    json bound;
    std::string verification;
    std::size_t retries = 0;
    json details = json::object();
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
};

namespace detail {

template <typename T>
std::string join(const std::vector<T>& v, const char* sep = " ") {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
    return os.str();
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json strip_timing(json report) {
    report.erase("wall_seconds");
    return report;
}

inline void write_csv(const Outcome& o, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ResourceError("cannot write '" + path + "'");
    f << join(o.csv_header, ",") << '\n';
    for (const auto& row : o.csv_rows) f << join(row, ",") << '\n';
}

inline const char* verdict(bool ok) { return ok ? "pass" : "fail"; }

/// Least-squares slope of log y against log x.
inline std::optional<double> loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

/// Points of the zero-centred unit sphere, memoized under $FFIL_CACHE_DIR when set.
inline std::vector<FieldVector> cached_unit_sphere(const BilinearForm& form) {
    const auto& ctx = form.ctx();
    const Sphere s{form, zero_vector(ctx, form.dim())};
    const char* dir = std::getenv("FFIL_CACHE_DIR");
    if (!dir || !*dir || !ctx.is_prime_field()) return sphere_points(s);
    namespace fs = std::filesystem;
    const fs::path file = fs::path(dir) / ("sphere-p" + std::to_string(ctx.characteristic()) + "-d" +
                                           std::to_string(form.dim()) + "-" + form.signature_string() + ".txt");
    if (fs::exists(file)) {
        std::ifstream in(file);
        PointSet ps = parse_point_set(in);
        if (ps.form == form) return ps.points;
    }
    auto pts = sphere_points(s);
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream outf(file);
    if (outf) outf << to_fixture(PointSet{form, pts});
    return pts;
}

inline BilinearForm make_form(const FieldCtx& ctx, std::size_t d, const std::string& kind) {
    if (kind == "standard") return BilinearForm::standard(ctx, d);
    if (kind == "twisted") return BilinearForm::twisted(ctx, d);
    throw DomainError("form must be 'standard' or 'twisted'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands. Each has a config struct, an option binder and a runner.

struct ZarankiewiczCfg {
    std::uint32_t p = 7;
    std::size_t d1 = 1, d2 = 1;
    std::uint64_t m = 0, n = 0;  // 0: p^D1, p^D2
    std::size_t s = 0, delta = 0;  // 0: D1+D2, (D1+D2)^2
    std::uint64_t probe_cap = default_probe_cap;
};

inline Outcome run_zarankiewicz(const ZarankiewiczCfg& c, const Common& common, json& config) {
    const std::uint64_t m = c.m ? c.m : saturating_pow(c.p, c.d1);
    const std::uint64_t n = c.n ? c.n : saturating_pow(c.p, c.d2);
    AlgebraicGraphOptions opt;
    opt.s = c.s ? c.s : c.d1 + c.d2;
    opt.delta = c.delta ? c.delta : (c.d1 + c.d2) * (c.d1 + c.d2);
    opt.probe_cap = c.probe_cap;
    config.update({{"p", c.p}, {"d1", c.d1}, {"d2", c.d2}, {"m", m}, {"n", n}, {"s", *opt.s},
                   {"delta", *opt.delta}, {"probe_cap", c.probe_cap}});

    const auto ag = random_algebraic_graph(c.p, c.d1, c.d2, m, n, common.seed, opt);
    Outcome o;
    o.achieved = ag.report.achieved;
    o.bound = ag.report.target;
    o.verification = to_string(ag.report.verification);
    o.retries = ag.report.retries;
    o.details = detail::strip_timing(ag.report.to_json());
    o.details["polynomial"] = to_fixture(ag.f);
    o.details["graph"] = to_fixture(ag.graph);
    if (ag.report.verification == Verification::witness_found) o.code = exit_verification;
    o.csv_header = {"phase", "attempt", "edges", "target", "accepted"};
    for (const auto& row : ag.report.extra["attempts"]) {
        o.csv_rows.push_back({row["phase"].get<std::string>(), row["attempt"].dump(), row["edges"].dump(),
                              detail::fmt(row["target"].get<double>()), row["accepted"].dump()});
    }
    return o;
}

struct ZeroPatternsCfg {
    std::uint32_t p = 3;
    std::size_t vars = 1, k = 2, degree = 1;
    std::string input;
    bool p_set = false, vars_set = false, k_set = false, degree_set = false;
};

inline Outcome run_zero_patterns(const ZeroPatternsCfg& c, const Common& common, json& config) {
    std::vector<MultiPoly> fs;
    std::size_t delta = c.degree;
    if (!c.input.empty()) {
        std::istringstream in(detail::read_file(c.input));
        std::string line;
        while (std::getline(in, line)) {
            const auto t = ffil::detail::trim(line);
            if (t.empty() || t.front() == '#') continue;
            fs.push_back(parse_poly(t));
        }
        if (fs.empty()) throw ParseError("zero-patterns: fixture holds no polynomials");
        const auto& f0 = fs.front();
        if (c.p_set && f0.ctx().characteristic() != c.p) throw DomainError("--p disagrees with the fixture");
        if (c.vars_set && f0.nvars() != c.vars) throw DomainError("--vars disagrees with the fixture");
        if (c.k_set && fs.size() != c.k) throw DomainError("--k disagrees with the fixture");
        std::size_t maxdeg = 0;
        for (const auto& f : fs) maxdeg = std::max(maxdeg, f.total_degree());
        if (c.degree_set && maxdeg > c.degree) throw DomainError("fixture polynomial exceeds --degree");
        if (!c.degree_set) delta = maxdeg;
        config.update({{"input", c.input}, {"p", f0.ctx().characteristic()}, {"vars", f0.nvars()}, {"k", fs.size()},
                       {"degree", delta}});
    } else {
        if (!is_prime(c.p)) throw DomainError("--p must be prime");
        if (c.vars < 1 || c.k < 1) throw DomainError("--vars and --k must be positive");
        const auto ctx = FieldCtx::prime(c.p);
        CounterRng rng(common.seed);
        for (std::size_t i = 0; i < c.k; ++i) fs.push_back(sample_uniform(ctx, c.vars, c.degree, rng));
        config.update({{"input", nullptr}, {"p", c.p}, {"vars", c.vars}, {"k", c.k}, {"degree", c.degree}});
    }
    const auto& f0 = fs.front();
    const auto fam = zero_patterns(fs);
    const bool rank_ok = witness_rank_check(fs, fam.witnesses());
    const auto bound = zero_pattern_bound_rbg(fs.size(), delta, f0.nvars());

    Outcome o;
    o.achieved = fam.size();
    o.bound = bound;
    const bool ok = fam.size() <= bound && rank_ok;
    o.verification = detail::verdict(ok);
    o.details = family_report(fam, f0.nvars(), f0.ctx().characteristic(), delta);
    o.details["rank_check"] = rank_ok;
    json polys = json::array();
    for (const auto& f : fs) polys.push_back(to_fixture(f));
    o.details["polynomials"] = polys;
    if (!ok) o.code = exit_verification;
    o.csv_header = {"subset", "witness"};
    for (const auto& [subset, x] : fam.patterns) {
        std::vector<std::size_t> idx;
        for (auto i : subset.indices()) idx.push_back(i + 1);
        o.csv_rows.push_back({detail::join(idx), detail::join(x)});
    }
    return o;
}

struct ContainmentCfg {
    std::uint32_t p = 7;
    std::size_t vars = 3, k = 8, degree = 2, polys = 0;  // polys 0: vars - 1 (curves)
};

inline Outcome run_containment(const ContainmentCfg& c, const Common& common, json& config) {
    if (!is_prime(c.p)) throw DomainError("--p must be prime");
    if (c.vars < 1 || c.k < 1) throw DomainError("--vars and --k must be positive");
    const std::size_t polys = c.polys ? c.polys : std::max<std::size_t>(1, c.vars - 1);
    if (polys > c.vars) throw DomainError("--polys cannot exceed --vars");
    const std::size_t dim = c.vars - polys;
    config.update({{"p", c.p}, {"vars", c.vars}, {"k", c.k}, {"degree", c.degree}, {"polys", polys}});

    const auto ctx = FieldCtx::prime(c.p);
    CounterRng rng(common.seed);
    std::vector<PolySystem> vs(c.k);
    for (auto& v : vs)
        for (std::size_t i = 0; i < polys; ++i) v.push_back(sample_uniform(ctx, c.vars, c.degree, rng));

    Outcome o;
    o.csv_header = {"k", "containment_count", "zero_pattern_count"};
    json rows = json::array();
    std::vector<double> xs, ys;
    bool monotone = true, dominated = true;
    std::size_t prev = 0;
    for (std::size_t j = 1; j <= c.k; ++j) {
        std::span<const PolySystem> prefix(vs.data(), j);
        std::vector<MultiPoly> flat;
        for (const auto& v : prefix) flat.insert(flat.end(), v.begin(), v.end());
        const auto cc = containment_patterns(prefix).size();
        const auto zc = zero_patterns(flat).size();
        monotone = monotone && cc >= prev;
        dominated = dominated && cc <= zc;
        prev = cc;
        if (j >= 2) {
            xs.push_back(static_cast<double>(j));
            ys.push_back(static_cast<double>(cc));
        }
        rows.push_back({{"k", j}, {"containment_count", cc}, {"zero_pattern_count", zc}});
        o.csv_rows.push_back({std::to_string(j), std::to_string(cc), std::to_string(zc)});
    }
    const auto slope = detail::loglog_slope(xs, ys);
    const double slope_bound = static_cast<double>(dim) + 1.5;
    const bool slope_ok = !slope || *slope <= slope_bound;
    o.achieved = slope ? json(*slope) : json(nullptr);
    o.bound = slope_bound;
    o.verification = detail::verdict(monotone && dominated && slope_ok);
    o.details = {{"variety_dimension", dim}, {"rows", rows},        {"monotone", monotone},
                 {"dominated", dominated},   {"slope", o.achieved}, {"slope_ok", slope_ok}};
    if (o.verification != "pass") o.code = exit_verification;
    return o;
}

struct ShatterCfg {
    std::string source = "random";  // random | sphere | fixture
    std::size_t m = 20, n = 20;
    double density = 0.5;
    std::uint32_t p = 5;
    std::size_t d = 2;
    std::string input;
    std::size_t k = 4;
};

inline Outcome run_shatter(const ShatterCfg& c, const Common& common, json& config) {
    BipartiteGraph g(0, 0);
    if (c.source == "random") {
        if (!(c.density >= 0 && c.density <= 1)) throw DomainError("--density must lie in [0, 1]");
        CounterRng rng(common.seed);
        g = BipartiteGraph(c.m, c.n);
        for (std::size_t a = 0; a < c.m; ++a)
            for (std::size_t b = 0; b < c.n; ++b)
                if (rng.bernoulli(c.density)) g.add_edge(a, b);
        config.update({{"source", c.source}, {"m", c.m}, {"n", c.n}, {"density", c.density}});
    } else if (c.source == "sphere") {
        if (!is_prime(c.p) || c.p == 2) throw DomainError("--p must be an odd prime");
        const auto ctx = FieldCtx::prime(c.p);
        std::vector<FieldVector> pts;
        for_each_field_point(ctx, c.d, default_enumeration_cap, [&](const FieldVector& x) { pts.push_back(x); });
        g = point_sphere_incidence(pts, pts, BilinearForm::standard(ctx, c.d));
        config.update({{"source", c.source}, {"p", c.p}, {"d", c.d}});
    } else if (c.source == "fixture") {
        if (c.input.empty()) throw DomainError("--input is required with --source fixture");
        std::istringstream in(detail::read_file(c.input));
        g = parse_graph(in);
        config.update({{"source", c.source}, {"input", c.input}});
    } else {
        throw DomainError("--source must be random, sphere or fixture");
    }
    config["k"] = c.k;
    const SetSystem fam = neighborhood_system(g);
    if (c.k < 1 || c.k > fam.ground_size) throw DomainError("--k must lie in [1, ground set size]");

    Outcome o;
    o.csv_header = {"k", "pi"};
    json values = json::array();
    std::uint64_t last = 0;
    for (std::size_t j = 1; j <= c.k; ++j) {
        last = shatter_function(fam, j);
        values.push_back(last);
        o.csv_rows.push_back({std::to_string(j), std::to_string(last)});
    }
    o.achieved = last;
    o.bound = std::uint64_t{1} << std::min<std::size_t>(c.k, 63);
    o.verification = "informational";
    o.details = {{"ground_size", fam.ground_size}, {"members", fam.members.size()}, {"shatter", values}};
    return o;
}

struct PointVarietyCfg {
    std::uint64_t m = 49;
    double alpha = 1.0;
    std::size_t dim = 2;
    std::size_t s = 0, graph_s = 0;  // 0: defaults
    std::uint64_t probe_cap = default_probe_cap;
};

inline Outcome run_point_variety(const PointVarietyCfg& c, const Common& common, json& config) {
    PointVarietyOptions opt;
    if (c.s) opt.s = c.s;
    if (c.graph_s) opt.graph_s = c.graph_s;
    opt.probe_cap = c.probe_cap;
    const auto inst = point_variety_instance(c.m, c.alpha, c.dim, common.seed, opt);
    const auto& params = inst.report.parameters;
    config.update({{"m", c.m}, {"alpha", c.alpha}, {"D", c.dim}, {"s", params["s"]},
                   {"graph_s", inst.graph.report.s_verified}, {"probe_cap", c.probe_cap}});

    Outcome o;
    o.achieved = inst.incidences;
    o.bound = inst.report.target;
    o.verification = to_string(inst.report.verification);
    o.retries = inst.report.retries;
    o.details = detail::strip_timing(inst.report.to_json());
    const bool covers = inst.report.extra["incidences_cover_edges"].get<bool>();
    if (!covers || inst.report.verification == Verification::witness_found) o.code = exit_verification;
    o.csv_header = {"variety", "incidences", "hypersurface_points"};
    for (std::size_t j = 0; j < inst.varieties.size(); ++j) {
        o.csv_rows.push_back({std::to_string(j), std::to_string(inst.incidence.b_neighbors(j).count()),
                              std::to_string(zero_count(inst.varieties[j].front()))});
    }
    return o;
}

struct UnitDistanceCfg {
    std::uint64_t n = 343;
    std::size_t d = 2;
    std::size_t s = 4;
    std::uint32_t prime = 0;  // 0: derived from n
    std::string strategy = "map-image";
    std::size_t shift_retries = 50;
    std::uint64_t probe_cap = default_probe_cap;
    std::string dump;
};

inline Outcome run_unit_distance(const UnitDistanceCfg& c, const Common& common, json& config) {
    UnitDistanceOptions opt;
    opt.s = c.s;
    if (c.prime) opt.prime = c.prime;
    opt.strategy = parse_evasive_strategy(c.strategy);
    opt.shift_retries = c.shift_retries;
    opt.probe_cap = c.probe_cap;
    config.update({{"n", c.n}, {"d", c.d}, {"s", c.s}, {"prime", c.prime ? json(c.prime) : json(nullptr)},
                   {"strategy", c.strategy}, {"shift_retries", c.shift_retries}, {"probe_cap", c.probe_cap}});
    const auto inst = unit_distance_instance(c.n, c.d, common.seed, opt);
    if (!c.dump.empty()) {
        std::ofstream f(c.dump);
        if (!f) throw ResourceError("cannot write '" + c.dump + "'");
        f << to_fixture(PointSet{BilinearForm::twisted(inst.base_points.front().front().ctx(), c.d), inst.base_points});
    }

    Outcome o;
    o.achieved = inst.unit_distances;
    o.bound = inst.report.target;
    o.verification = to_string(inst.report.verification);
    o.retries = inst.report.retries;
    o.details = detail::strip_timing(inst.report.to_json());
    if (inst.report.verification == Verification::witness_found) {
        o.code = exit_verification;
        o.details["flag"] = "K_{s,s} witness found; evasive strategy '" + c.strategy + "' is implicated";
    }
    o.csv_header = {"attempt", "shift", "unit_pairs", "target"};
    const double target = inst.report.extra["shift_target"].get<double>();
    for (const auto& row : inst.report.extra["shift_attempts"]) {
        o.csv_rows.push_back({row["attempt"].dump(), detail::join(row["shift"].get<std::vector<std::uint32_t>>()),
                              row["unit_pairs"].dump(), detail::fmt(target)});
    }
    return o;
}

struct SphereGeometryCfg {
    std::uint32_t p = 5;
    std::size_t d = 2;
    std::size_t families = 200;
    std::size_t max_k = 4;
    std::size_t dim_cap = 0;  // 0: d - 1
    std::string form = "standard";
    bool pair_search = true;
};

inline Outcome run_sphere_geometry(const SphereGeometryCfg& c, const Common& common, json& config) {
    if (!is_prime(c.p) || c.p == 2) throw DomainError("--p must be an odd prime");
    if (c.d < 1 || c.max_k < 1) throw DomainError("--d and --max-k must be positive");
    const std::size_t dim_cap = c.dim_cap ? c.dim_cap : std::max<std::size_t>(1, c.d - 1);
    config.update({{"p", c.p}, {"d", c.d}, {"families", c.families}, {"max_k", c.max_k}, {"dim_cap", dim_cap},
                   {"form", c.form}, {"pair_search", c.pair_search}});
    const auto ctx = FieldCtx::prime(c.p);
    const auto form = detail::make_form(ctx, c.d, c.form);
    const auto unit = detail::cached_unit_sphere(form);
    const std::uint64_t space = saturating_pow(c.p, c.d);

    Outcome o;
    o.csv_header = {"family", "k", "distinct_centers", "flat_dim", "intersection_size", "identity", "orthogonal"};
    std::size_t identity_fail = 0, ortho_fail = 0, dups = 0;
    for (std::size_t fam = 0; fam < c.families; ++fam) {
        CounterRng rng(derive_seed(common.seed, fam));
        const std::size_t k = 1 + rng.uniform_below(c.max_k);
        std::vector<Sphere> spheres;
        for (std::size_t j = 0; j < k; ++j)
            spheres.push_back({form, to_field_vector(ctx, point_from_index(c.p, c.d, rng.uniform_below(space)))});
        const auto res = intersect_spheres_to_flat(spheres);
        dups += res.duplicates_removed;
        std::size_t inter = 0;
        bool identity = true;
        for (const auto& x0 : unit) {
            const FieldVector x = x0 + spheres.front().center;  // x ranges over S_1
            const bool all = std::all_of(spheres.begin(), spheres.end(), [&](const Sphere& s) { return s.contains(x); });
            if (all) ++inter;
            if (all != res.flat.contains(x)) identity = false;
        }
        std::vector<FieldVector> centers;
        for (const auto& s : spheres) centers.push_back(s.center);
        const bool ortho = is_orthogonal_to_span(form, res.flat, centers);
        identity_fail += !identity;
        ortho_fail += !ortho;
        o.csv_rows.push_back({std::to_string(fam), std::to_string(k), std::to_string(k - res.duplicates_removed),
                              res.flat.is_empty() ? "-1" : std::to_string(res.flat.dim()), std::to_string(inter),
                              identity ? "1" : "0", ortho ? "1" : "0"});
    }

    const auto flats = flats_in_sphere_check(Sphere{form, zero_vector(ctx, c.d)}, dim_cap);
    json pair_info = {{"searched", false}};
    bool pair_violation = false;
    if (c.pair_search && c.d % 2 == 1) {
        const auto tw = BilinearForm::twisted(ctx, c.d);
        const auto pair = isotropic_unit_pair_search(tw);
        const bool hypothesis = c.p % 4 == 3;
        pair_info = {{"searched", true}, {"form", tw.signature_string()}, {"hypothesis_holds", hypothesis},
                   {"found", pair.has_value()}};
        if (pair) {
            json basis = json::array();
            for (const auto& b : pair->flat.basis()) basis.push_back(to_point(b));
            pair_info["pair"] = {{"basis", basis}, {"w", to_point(pair->w)}};
        }
        pair_violation = hypothesis && pair.has_value();
    }
    const bool ok = identity_fail == 0 && ortho_fail == 0 && flats.all_pass() && !pair_violation;
    o.achieved = {{"identity_failures", identity_fail},
                  {"orthogonality_failures", ortho_fail},
                  {"flats_failing", std::count_if(flats.flats.begin(), flats.flats.end(), [](const auto& f) {
                       return !(f.totally_isotropic && f.center_orthogonal);
                   })}};
    o.bound = 0;
    o.verification = detail::verdict(ok);
    o.details = {{"sphere_size", unit.size()},
                 {"duplicate_centers_removed", dups},
                 {"flats_by_dim", flats.count_by_dim},
                 {"flats_pass", flats.all_pass()},
                 {"pair_search", pair_info}};
    if (!ok) o.code = exit_verification;
    return o;
}

struct PatternScanCfg {
    std::uint32_t p = 3;
    std::size_t d = 2;
    std::string pattern = "pi";  // pi | h
    std::string form = "standard";
    bool full = true;
    std::size_t subhosts = 50;
    std::size_t subhost_size = 12;
    std::uint64_t node_budget = 100'000'000;
};

inline Outcome run_pattern_scan(const PatternScanCfg& c, const Common& common, json& config) {
    if (!is_prime(c.p) || c.p == 2) throw DomainError("--p must be an odd prime");
    if (c.d < 1) throw DomainError("--d must be positive");
    const auto ctx = FieldCtx::prime(c.p);
    Pattern pat(1, 1, Label::any);
    BipartiteGraph host(0, 0);
    std::string host_kind;
    if (c.pattern == "pi") {
        // points against all unit spheres in F_p^d; no induced Pi_{d+1} expected
        pat = gen_pattern_Pi(c.d + 1);
        std::vector<FieldVector> pts;
        for_each_field_point(ctx, c.d, default_enumeration_cap, [&](const FieldVector& x) { pts.push_back(x); });
        host = point_sphere_incidence(pts, pts, detail::make_form(ctx, c.d, c.form));
        host_kind = "points-vs-unit-spheres";
    } else if (c.pattern == "h") {
        // points of F_p^{d+1} against affine hyperplanes (d-dimensional, degree 1)
        pat = gen_forbidden_H(c.d, 1);
        const std::size_t amb = c.d + 1;
        std::vector<Point> pts;
        for_each_point(c.p, amb, default_enumeration_cap, [&](const Point& x) { pts.push_back(x); });
        std::vector<std::pair<Point, std::uint32_t>> planes;
        for (const auto& nrm : pts) {
            auto nz = std::find_if(nrm.begin(), nrm.end(), [](auto v) { return v != 0; });
            if (nz == nrm.end() || *nz != 1) continue;
            for (std::uint32_t off = 0; off < c.p; ++off) planes.emplace_back(nrm, off);
        }
        host = BipartiteGraph(pts.size(), planes.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = 0; j < planes.size(); ++j) {
                std::uint64_t acc = 0;
                for (std::size_t t = 0; t < amb; ++t) acc += std::uint64_t{planes[j].first[t]} * pts[i][t];
                if (acc % c.p == planes[j].second) host.add_edge(i, j);
            }
        }
        host_kind = "points-vs-hyperplanes";
    } else {
        throw DomainError("--pattern must be 'pi' or 'h'");
    }
    config.update({{"p", c.p}, {"d", c.d}, {"pattern", c.pattern}, {"form", c.form}, {"full", c.full},
                   {"subhosts", c.subhosts}, {"subhost_size", c.subhost_size}, {"node_budget", c.node_budget}});

    Outcome o;
    o.csv_header = {"host", "a_size", "b_size", "found"};
    json found_at = nullptr;
    std::size_t hits = 0;
    auto scan = [&](const std::string& name, const BipartiteGraph& g) {
        const auto emb = find_induced_pattern(g, pat, c.node_budget);
        o.csv_rows.push_back({name, std::to_string(g.a_size()), std::to_string(g.b_size()), emb ? "1" : "0"});
        if (emb) {
            ++hits;
            if (found_at.is_null()) found_at = {{"host", name}, {"a_map", emb->a_map}, {"b_map", emb->b_map}};
        }
    };
    if (c.full) scan("full", host);
    for (std::size_t i = 0; i < c.subhosts; ++i) {
        CounterRng rng(derive_seed(common.seed, i));
        const auto as = sample_subset(host.a_size(), std::min(c.subhost_size, host.a_size()), rng);
        const auto bs = sample_subset(host.b_size(), std::min(c.subhost_size, host.b_size()), rng);
        scan("sub" + std::to_string(i), host.induced(as, bs));
    }
    o.achieved = hits;
    o.bound = 0;
    o.verification = hits == 0 ? "absent" : "found";
    o.details = {{"host", host_kind},
                 {"host_size", {host.a_size(), host.b_size()}},
                 {"pattern_size", {pat.a_size(), pat.b_size()}},
                 {"pattern", to_fixture(pat)},
                 {"embedding", found_at}};
    if (hits) o.code = exit_verification;
    return o;
}

struct ZeroCountCfg {
    std::uint32_t p = 5;
    std::size_t dim = 3, delta = 3, trials = 400;
};

inline Outcome run_zero_count(const ZeroCountCfg& c, const Common& common, json& config) {
    config.update({{"p", c.p}, {"D", c.dim}, {"delta", c.delta}, {"trials", c.trials}});
    const auto r = zero_count_experiment(c.p, c.dim, c.delta, c.trials, common.seed, common.jobs);
    Outcome o;
    o.achieved = r.fraction;
    o.bound = 0.75;
    o.verification = r.fraction >= 0.75 ? "meets-guarantee" : "below-guarantee";
    o.details = {{"successes", r.successes}, {"threshold", r.threshold}, {"mean_count", r.mean_count},
                 {"expected_mean", static_cast<double>(saturating_pow(c.p, c.dim - 1))}};
    o.csv_header = {"trial", "zero_count", "success"};
    for (std::size_t i = 0; i < r.counts.size(); ++i) {
        o.csv_rows.push_back({std::to_string(i), std::to_string(r.counts[i]),
                              static_cast<double>(r.counts[i]) >= r.threshold ? "1" : "0"});
    }
    return o;
}

struct IndepSetCfg {
    std::size_t vertices = 30, edges = 40, k = 3;
    std::size_t instances = 1;
    std::size_t retries = 200;
};

inline Outcome run_indep_set(const IndepSetCfg& c, const Common& common, json& config) {
    config.update({{"N", c.vertices}, {"M", c.edges}, {"k", c.k}, {"instances", c.instances}, {"retries", c.retries}});
    if (c.instances < 1) throw DomainError("--instances must be positive");
    struct Row {
        std::size_t size, target, attempts;
        bool independent;
    };
    const auto rows = parallel_trials(c.instances, common.jobs, [&](std::size_t i) {
        CounterRng rng(derive_seed(common.seed, i));
        const auto h = random_hypergraph(c.vertices, c.edges, c.k, rng);
        const auto set = hypergraph_independent_set(h, rng, c.retries);
        return Row{set.vertices.size(), set.target, set.attempts, is_independent(h, set.vertices)};
    });
    Outcome o;
    o.csv_header = {"instance", "size", "target", "attempts", "independent"};
    bool ok = true;
    std::size_t min_size = ~std::size_t{0}, retries = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        ok = ok && r.independent && r.size >= r.target;
        min_size = std::min(min_size, r.size);
        retries += r.attempts - 1;
        o.csv_rows.push_back({std::to_string(i), std::to_string(r.size), std::to_string(r.target),
                              std::to_string(r.attempts), r.independent ? "1" : "0"});
    }
    o.achieved = min_size;
    o.bound = rows.front().target;
    o.verification = detail::verdict(ok);
    o.retries = retries;
    if (!ok) o.code = exit_verification;
    return o;
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App* sc, Common& c) {
    sc->add_option("--seed", c.seed, "64-bit seed")->capture_default_str();
    sc->add_option("--out", c.out, "write the JSON report here instead of stdout");
    sc->add_option("--csv", c.csv, "write the CSV series here");
    sc->add_option("--jobs", c.jobs, "concurrent trials")->capture_default_str()->check(CLI::PositiveNumber);
}

/// Runs one experiment. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const auto t0 = std::chrono::steady_clock::now();
    CLI::App app{"Finite-field incidence-geometry experiments", "ffil"};
    app.require_subcommand(1, 1);
    Common common;

    ZarankiewiczCfg zar;
    auto* sc_zar = app.add_subcommand("zarankiewicz", "random algebraic K_{s,s}-free graph");
    sc_zar->add_option("--p", zar.p, "prime")->required();
    sc_zar->add_option("--d1", zar.d1, "dimension of class A")->capture_default_str();
    sc_zar->add_option("--d2", zar.d2, "dimension of class B")->capture_default_str();
    sc_zar->add_option("--m", zar.m, "class A sample size (default p^d1)");
    sc_zar->add_option("--n", zar.n, "class B sample size (default p^d2)");
    sc_zar->add_option("--s", zar.s, "K_{s,s} size to verify (default d1+d2)");
    sc_zar->add_option("--delta", zar.delta, "degree cap (default (d1+d2)^2)");
    sc_zar->add_option("--probe-cap", zar.probe_cap, "K_{s,s} search cap")->capture_default_str();
    sc_zar->footer("CSV columns: phase,attempt,edges,target,accepted (one row per polynomial or subsample attempt)");

    ZeroPatternsCfg zp;
    auto* sc_zp = app.add_subcommand("zero-patterns", "zero-pattern enumeration with bound and rank check");
    auto* o_p = sc_zp->add_option("--p", zp.p, "prime")->capture_default_str();
    auto* o_vars = sc_zp->add_option("--vars", zp.vars, "number of variables")->capture_default_str();
    auto* o_k = sc_zp->add_option("--k", zp.k, "number of polynomials")->capture_default_str();
    auto* o_deg = sc_zp->add_option("--degree", zp.degree, "degree cap")->capture_default_str();
    sc_zp->add_option("--input", zp.input, "fixture: one polynomial per line, 'p=3; vars=1; x0 - 1'");
    sc_zp->footer("CSV columns: subset,witness (one row per realized pattern; 1-based indices)");

    ContainmentCfg cp;
    auto* sc_cp = app.add_subcommand("containment-patterns", "containment patterns of nested random varieties");
    sc_cp->add_option("--p", cp.p, "prime")->capture_default_str();
    sc_cp->add_option("--vars", cp.vars, "ambient dimension")->capture_default_str();
    sc_cp->add_option("--k", cp.k, "largest number of varieties")->capture_default_str();
    sc_cp->add_option("--degree", cp.degree, "degree cap")->capture_default_str();
    sc_cp->add_option("--polys", cp.polys, "defining polynomials per variety (default vars-1)");
    sc_cp->footer("CSV columns: k,containment_count,zero_pattern_count (one row per prefix length)");

    ShatterCfg sh;
    auto* sc_sh = app.add_subcommand("shatter", "shatter function of a neighborhood set system");
    sc_sh->add_option("--source", sh.source, "random | sphere | fixture")->capture_default_str();
    sc_sh->add_option("--m", sh.m, "random: class A size")->capture_default_str();
    sc_sh->add_option("--n", sh.n, "random: class B size")->capture_default_str();
    sc_sh->add_option("--density", sh.density, "random: edge probability")->capture_default_str();
    sc_sh->add_option("--p", sh.p, "sphere: prime")->capture_default_str();
    sc_sh->add_option("--d", sh.d, "sphere: dimension")->capture_default_str();
    sc_sh->add_option("--input", sh.input, "fixture: graph file");
    sc_sh->add_option("--k", sh.k, "largest subset size")->capture_default_str();
    sc_sh->footer("CSV columns: k,pi (one row per subset size)");

    PointVarietyCfg pv;
    auto* sc_pv = app.add_subcommand("point-variety", "point-hypersurface incidence instance");
    sc_pv->add_option("--m", pv.m, "number of points")->capture_default_str();
    sc_pv->add_option("--alpha", pv.alpha, "n = floor(m^alpha), D' = ceil(alpha D)")->capture_default_str();
    sc_pv->add_option("--D", pv.dim, "dimension of the point space")->capture_default_str();
    sc_pv->add_option("--s", pv.s, "K_{s,s} size for the incidence graph (default (D+D')^2)");
    sc_pv->add_option("--graph-s", pv.graph_s, "K_{s,s} size for the underlying graph (default D+D')");
    sc_pv->add_option("--probe-cap", pv.probe_cap, "K_{s,s} search cap")->capture_default_str();
    sc_pv->footer("CSV columns: variety,incidences,hypersurface_points (one row per variety)");

    UnitDistanceCfg ud;
    auto* sc_ud = app.add_subcommand("unit-distance", "unit-distance point set from an evasive set and a shift");
    sc_ud->add_option("--n", ud.n, "target number of points")->capture_default_str();
    sc_ud->add_option("--d", ud.d, "dimension")->capture_default_str();
    sc_ud->add_option("--s", ud.s, "K_{s,s} size to verify")->capture_default_str();
    sc_ud->add_option("--prime", ud.prime, "use this prime (3 mod 4) and skip the size precondition");
    sc_ud->add_option("--strategy", ud.strategy, "map-image | random")->capture_default_str();
    sc_ud->add_option("--shift-retries", ud.shift_retries, "shift retry cap")->capture_default_str();
    sc_ud->add_option("--probe-cap", ud.probe_cap, "K_{s,s} search cap")->capture_default_str();
    sc_ud->add_option("--dump", ud.dump, "write the point set (before embedding) as a fixture");
    sc_ud->footer("CSV columns: attempt,shift,unit_pairs,target (one row per shift attempt)");

    SphereGeometryCfg sg;
    auto* sc_sg = app.add_subcommand("sphere-geometry", "sphere intersections, flats in spheres, isotropic pairs");
    sc_sg->add_option("--p", sg.p, "odd prime")->capture_default_str();
    sc_sg->add_option("--d", sg.d, "dimension")->capture_default_str();
    sc_sg->add_option("--families", sg.families, "random sphere families")->capture_default_str();
    sc_sg->add_option("--max-k", sg.max_k, "spheres per family, at most")->capture_default_str();
    sc_sg->add_option("--dim-cap", sg.dim_cap, "largest flat dimension to enumerate (default d-1)");
    sc_sg->add_option("--form", sg.form, "standard | twisted")->capture_default_str();
    sc_sg->add_option("--pair-search", sg.pair_search, "run the isotropic pair search for odd d")
        ->capture_default_str();
    sc_sg->footer(
        "CSV columns: family,k,distinct_centers,flat_dim,intersection_size,identity,orthogonal (one row per "
        "family)\nFFIL_CACHE_DIR: directory for memoized unit-sphere point tables");

    PatternScanCfg ps;
    auto* sc_ps = app.add_subcommand("pattern-scan", "induced pattern search in incidence graphs");
    sc_ps->add_option("--p", ps.p, "odd prime")->capture_default_str();
    sc_ps->add_option("--d", ps.d, "dimension")->capture_default_str();
    sc_ps->add_option("--pattern", ps.pattern, "pi (Pi_{d+1} vs unit spheres) | h (H_{d,1} vs hyperplanes)")
        ->capture_default_str();
    sc_ps->add_option("--form", ps.form, "standard | twisted")->capture_default_str();
    sc_ps->add_option("--full", ps.full, "scan the full host")->capture_default_str();
    sc_ps->add_option("--subhosts", ps.subhosts, "random induced sub-hosts")->capture_default_str();
    sc_ps->add_option("--subhost-size", ps.subhost_size, "vertices per class in a sub-host")->capture_default_str();
    sc_ps->add_option("--node-budget", ps.node_budget, "search node budget")->capture_default_str();
    sc_ps->footer("CSV columns: host,a_size,b_size,found (one row per host scanned)");

    ZeroCountCfg zc;
    auto* sc_zc = app.add_subcommand("zero-count", "zero counts of uniform random polynomials");
    sc_zc->add_option("--p", zc.p, "prime >= 5")->capture_default_str();
    sc_zc->add_option("--D", zc.dim, "number of variables")->capture_default_str();
    sc_zc->add_option("--delta", zc.delta, "degree cap")->capture_default_str();
    sc_zc->add_option("--trials", zc.trials, "trials")->capture_default_str();
    sc_zc->footer("CSV columns: trial,zero_count,success (one row per trial)");

    IndepSetCfg is;
    auto* sc_is = app.add_subcommand("indep-set", "independent sets in random uniform hypergraphs");
    sc_is->add_option("--N", is.vertices, "vertices")->capture_default_str();
    sc_is->add_option("--M", is.edges, "edges")->capture_default_str();
    sc_is->add_option("--k", is.k, "uniformity")->capture_default_str();
    sc_is->add_option("--instances", is.instances, "independent random hypergraphs")->capture_default_str();
    sc_is->add_option("--retries", is.retries, "sampling retry cap")->capture_default_str();
    sc_is->footer("CSV columns: instance,size,target,attempts,independent (one row per hypergraph)");

    for (auto* sc : app.get_subcommands({})) add_common(sc, common);

    std::vector<std::string> argv_store{"ffil"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto parsed = app.get_subcommands();
        err << (parsed.empty() ? app.help() : parsed.front()->help());
        return exit_usage;
    }

    CLI::App* sc = app.get_subcommands().front();
    json config = {{"subcommand", sc->get_name()}, {"seed", common.seed}, {"jobs", common.jobs}};
    zp.p_set = o_p->count() > 0;
    zp.vars_set = o_vars->count() > 0;
    zp.k_set = o_k->count() > 0;
    zp.degree_set = o_deg->count() > 0;

    std::function<Outcome(json&)> handler;
    const std::string name = sc->get_name();
    if (name == "zarankiewicz") handler = [&](json& cfg) { return run_zarankiewicz(zar, common, cfg); };
    else if (name == "zero-patterns") handler = [&](json& cfg) { return run_zero_patterns(zp, common, cfg); };
    else if (name == "containment-patterns") handler = [&](json& cfg) { return run_containment(cp, common, cfg); };
    else if (name == "shatter") handler = [&](json& cfg) { return run_shatter(sh, common, cfg); };
    else if (name == "point-variety") handler = [&](json& cfg) { return run_point_variety(pv, common, cfg); };
    else if (name == "unit-distance") handler = [&](json& cfg) { return run_unit_distance(ud, common, cfg); };
    else if (name == "sphere-geometry") handler = [&](json& cfg) { return run_sphere_geometry(sg, common, cfg); };
    else if (name == "pattern-scan") handler = [&](json& cfg) { return run_pattern_scan(ps, common, cfg); };
    else if (name == "zero-count") handler = [&](json& cfg) { return run_zero_count(zc, common, cfg); };
    else handler = [&](json& cfg) { return run_indep_set(is, common, cfg); };

    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    auto emit = [&](const json& report) {
        if (common.out.empty()) {
            out << report.dump(2) << '\n';
        } else {
            std::ofstream f(common.out);
            if (!f) throw ResourceError("cannot write '" + common.out + "'");
            f << report.dump(2) << '\n';
        }
    };

    try {
        Outcome o = handler(config);
        json report = {{"config", config},          {"achieved", o.achieved}, {"bound", o.bound},
                       {"verification", o.verification}, {"retries", o.retries},  {"details", o.details},
                       {"timing", {{"wall_seconds", elapsed()}}}};
        emit(report);
        if (!common.csv.empty()) detail::write_csv(o, common.csv);
        return o.code;
    } catch (const ConstructionFailure& e) {
        err << "error: " << e.what() << '\n';
        const auto& best = e.best();
        json report = {{"config", config},
                       {"achieved", best.achieved},
                       {"bound", best.target},
                       {"verification", "construction-failed"},
                       {"retries", best.retries},
                       {"details", detail::strip_timing(best.to_json())},
                       {"timing", {{"wall_seconds", elapsed()}}}};
        try {
            emit(report);
        } catch (const std::exception&) {
        }
        return exit_resource;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_resource;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n\n" << sc->help();
        return exit_usage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

}  // namespace ffil::cli
