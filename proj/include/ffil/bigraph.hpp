#pragma once

// Bipartite graphs with bitset adjacency, exact K_{s,s} search, induced 0/1/*
// pattern search, and the forbidden configurations used by the incidence bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ffil/bitset.hpp"
#include "ffil/error.hpp"
#include "ffil/mpoly.hpp"
#include "ffil/rng.hpp"

namespace ffil {

inline constexpr std::uint64_t default_probe_cap = 100'000'000;

class BipartiteGraph {
public:
    BipartiteGraph() = default;
    BipartiteGraph(std::size_t m, std::size_t n) : a_adj_(m, DynamicBitset(n)), b_adj_(n, DynamicBitset(m)) {}

    std::size_t a_size() const noexcept { return a_adj_.size(); }
    std::size_t b_size() const noexcept { return b_adj_.size(); }

    void add_edge(std::size_t a, std::size_t b) {
        bounds(a, b);
        a_adj_[a].set(b);
        b_adj_[b].set(a);
    }

    void remove_edge(std::size_t a, std::size_t b) {
        bounds(a, b);
        a_adj_[a].reset(b);
        b_adj_[b].reset(a);
    }

    bool has_edge(std::size_t a, std::size_t b) const {
        bounds(a, b);
        return a_adj_[a].test(b);
    }

    /// Neighbors of A-vertex a, as a bitset over B.
    const DynamicBitset& a_neighbors(std::size_t a) const { return a_adj_.at(a); }
    /// Neighbors of B-vertex b, as a bitset over A.
    const DynamicBitset& b_neighbors(std::size_t b) const { return b_adj_.at(b); }

    const std::vector<DynamicBitset>& a_rows() const noexcept { return a_adj_; }
    const std::vector<DynamicBitset>& b_rows() const noexcept { return b_adj_; }

    std::uint64_t edge_count() const noexcept {
        std::uint64_t e = 0;
        for (const auto& r : a_adj_) e += r.count();
        return e;
    }

    /// Subgraph induced on the given (sorted or not) vertex lists, reindexed in list order.
    BipartiteGraph induced(const std::vector<std::size_t>& as, const std::vector<std::size_t>& bs) const {
        BipartiteGraph g(as.size(), bs.size());
        for (std::size_t i = 0; i < as.size(); ++i)
            for (std::size_t j = 0; j < bs.size(); ++j)
                if (has_edge(as[i], bs[j])) g.add_edge(i, j);
        return g;
    }

    friend bool operator==(const BipartiteGraph&, const BipartiteGraph&) = default;

private:
    void bounds(std::size_t a, std::size_t b) const {
        if (a >= a_size() || b >= b_size()) throw DomainError("vertex index out of range");
    }

    std::vector<DynamicBitset> a_adj_;
    std::vector<DynamicBitset> b_adj_;
};

// ---------------------------------------------------------------------------
// K_{s,s}

struct KssWitness {
    std::vector<std::size_t> a_side;
    std::vector<std::size_t> b_side;
};

/// Exact search for K_{s,s}. Walks s-subsets of the smaller class in lexicographic order,
/// carrying the running common neighborhood and abandoning a branch as soon as it drops
/// below s. Every branch visited counts as one probe against `probe_cap`.
inline std::optional<KssWitness> contains_kss(const BipartiteGraph& g, std::size_t s,
                                              std::uint64_t probe_cap = default_probe_cap) {
    if (s == 0) throw DomainError("contains_kss: s must be at least 1");
    const bool swapped = g.b_size() < g.a_size();
    const auto& rows = swapped ? g.b_rows() : g.a_rows();
    const std::size_t other = swapped ? g.a_size() : g.b_size();
    if (s > rows.size() || s > other) return std::nullopt;

    std::vector<std::size_t> eligible;
    for (std::size_t v = 0; v < rows.size(); ++v)
        if (rows[v].count() >= s) eligible.push_back(v);
    if (eligible.size() < s) return std::nullopt;

    std::uint64_t probes = 0;
    std::vector<std::size_t> chosen;
    std::optional<DynamicBitset> found;

    auto dfs = [&](auto&& self, std::size_t start, const DynamicBitset& common) -> bool {
        const std::size_t need = s - chosen.size();
        for (std::size_t i = start; i + need <= eligible.size(); ++i) {
            if (++probes > probe_cap) {
                throw ResourceError("contains_kss: probe cap " + std::to_string(probe_cap) + " exceeded");
            }
            const std::size_t v = eligible[i];
            DynamicBitset next = common & rows[v];
            if (next.count() < s) continue;
            chosen.push_back(v);
            if (chosen.size() == s) {
                found = std::move(next);
                return true;
            }
            if (self(self, i + 1, next)) return true;
            chosen.pop_back();
        }
        return false;
    };

    DynamicBitset all(other);
    all.set_all();
    if (!dfs(dfs, 0, all)) return std::nullopt;

    std::vector<std::size_t> t;
    for (auto i = found->find_first(); i != DynamicBitset::npos && t.size() < s; i = found->find_next(i)) t.push_back(i);
    KssWitness w;
    if (swapped) {
        w.a_side = std::move(t);
        w.b_side = std::move(chosen);
    } else {
        w.a_side = std::move(chosen);
        w.b_side = std::move(t);
    }
    return w;
}

inline bool is_kss_witness(const BipartiteGraph& g, const KssWitness& w, std::size_t s) {
    if (w.a_side.size() != s || w.b_side.size() != s) return false;
    for (auto a : w.a_side)
        for (auto b : w.b_side)
            if (!g.has_edge(a, b)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Patterns

enum class Label : char { non_edge = '0', edge = '1', any = '*' };

/// Edge-labelled complete bipartite template on a x b vertices.
class Pattern {
public:
    Pattern(std::size_t a, std::size_t b, Label fill = Label::any) : a_(a), b_(b), labels_(a * b, fill) {}

    std::size_t a_size() const noexcept { return a_; }
    std::size_t b_size() const noexcept { return b_; }

    Label at(std::size_t i, std::size_t j) const { return labels_.at(i * b_ + j); }
    void set(std::size_t i, std::size_t j, Label l) { labels_.at(i * b_ + j) = l; }

    std::size_t count(Label l) const { return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), l)); }

    /// Pattern whose labels are exactly the edges/non-edges of g (induced containment).
    static Pattern from_graph(const BipartiteGraph& g) {
        Pattern p(g.a_size(), g.b_size(), Label::non_edge);
        for (std::size_t i = 0; i < g.a_size(); ++i)
            for (std::size_t j = 0; j < g.b_size(); ++j)
                if (g.has_edge(i, j)) p.set(i, j, Label::edge);
        return p;
    }

    friend bool operator==(const Pattern&, const Pattern&) = default;

private:
    std::size_t a_;
    std::size_t b_;
    std::vector<Label> labels_;
};

struct PatternEmbedding {
    std::vector<std::size_t> a_map;  // pattern A-vertex -> host A-vertex
    std::vector<std::size_t> b_map;  // pattern B-vertex -> host B-vertex
};

inline bool is_pattern_embedding(const BipartiteGraph& g, const Pattern& pat, const PatternEmbedding& e) {
    if (e.a_map.size() != pat.a_size() || e.b_map.size() != pat.b_size()) return false;
    auto injective = [](std::vector<std::size_t> v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    if (!injective(e.a_map) || !injective(e.b_map)) return false;
    for (std::size_t i = 0; i < pat.a_size(); ++i) {
        for (std::size_t j = 0; j < pat.b_size(); ++j) {
            const Label l = pat.at(i, j);
            if (l == Label::any) continue;
            if (g.has_edge(e.a_map[i], e.b_map[j]) != (l == Label::edge)) return false;
        }
    }
    return true;
}

/// Backtracking search for an injective, class-preserving map realizing every 0/1 label.
/// At each node the unplaced pattern vertex with the fewest surviving host candidates is
/// placed next; candidates are filtered by bitset intersection against placed neighbors.
inline std::optional<PatternEmbedding> find_induced_pattern(const BipartiteGraph& g, const Pattern& pat,
                                                            std::uint64_t node_budget = default_probe_cap) {
    const std::size_t pa = pat.a_size(), pb = pat.b_size();
    if (pa > g.a_size() || pb > g.b_size()) return std::nullopt;

    struct Slot {
        bool side_a;
        std::size_t idx;
        std::size_t ones = 0;
        std::size_t zeros = 0;
    };
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < pa; ++i) {
        Slot s{true, i};
        for (std::size_t j = 0; j < pb; ++j) {
            s.ones += pat.at(i, j) == Label::edge;
            s.zeros += pat.at(i, j) == Label::non_edge;
        }
        slots.push_back(s);
    }
    for (std::size_t j = 0; j < pb; ++j) {
        Slot s{false, j};
        for (std::size_t i = 0; i < pa; ++i) {
            s.ones += pat.at(i, j) == Label::edge;
            s.zeros += pat.at(i, j) == Label::non_edge;
        }
        slots.push_back(s);
    }
    // ties go to the vertex with more fixed labels
    std::stable_sort(slots.begin(), slots.end(),
                     [](const Slot& x, const Slot& y) { return x.ones + x.zeros > y.ones + y.zeros; });

    constexpr auto unset = static_cast<std::size_t>(-1);
    PatternEmbedding emb{std::vector<std::size_t>(pa, unset), std::vector<std::size_t>(pb, unset)};
    DynamicBitset free_a(g.a_size()), free_b(g.b_size());
    free_a.set_all();
    free_b.set_all();
    std::vector<bool> placed(slots.size(), false);
    std::uint64_t nodes = 0;

    // host degree filter, computed once
    std::vector<std::size_t> deg_a(g.a_size()), deg_b(g.b_size());
    for (std::size_t h = 0; h < g.a_size(); ++h) deg_a[h] = g.a_neighbors(h).count();
    for (std::size_t h = 0; h < g.b_size(); ++h) deg_b[h] = g.b_neighbors(h).count();

    auto candidates = [&](const Slot& s) {
        DynamicBitset cand = s.side_a ? free_a : free_b;
        if (s.side_a) {
            for (std::size_t j = 0; j < pb; ++j) {
                if (emb.b_map[j] == unset) continue;
                const Label l = pat.at(s.idx, j);
                if (l == Label::edge) cand &= g.b_neighbors(emb.b_map[j]);
                else if (l == Label::non_edge) cand.subtract(g.b_neighbors(emb.b_map[j]));
            }
        } else {
            for (std::size_t i = 0; i < pa; ++i) {
                if (emb.a_map[i] == unset) continue;
                const Label l = pat.at(i, s.idx);
                if (l == Label::edge) cand &= g.a_neighbors(emb.a_map[i]);
                else if (l == Label::non_edge) cand.subtract(g.a_neighbors(emb.a_map[i]));
            }
        }
        const auto& deg = s.side_a ? deg_a : deg_b;
        const std::size_t opposite = s.side_a ? g.b_size() : g.a_size();
        for (auto h = cand.find_first(); h != DynamicBitset::npos; h = cand.find_next(h))
            if (deg[h] < s.ones || opposite - deg[h] < s.zeros) cand.reset(h);
        return cand;
    };

    auto place = [&](auto&& self, std::size_t depth) -> bool {
        if (depth == slots.size()) return true;
        std::size_t pick = slots.size();
        DynamicBitset best;
        std::size_t best_count = 0;
        for (std::size_t k = 0; k < slots.size(); ++k) {
            if (placed[k]) continue;
            auto cand = candidates(slots[k]);
            const std::size_t c = cand.count();
            if (c == 0) return false;
            if (pick == slots.size() || c < best_count) {
                pick = k;
                best = std::move(cand);
                best_count = c;
            }
        }
        const Slot& s = slots[pick];
        placed[pick] = true;
        for (auto h = best.find_first(); h != DynamicBitset::npos; h = best.find_next(h)) {
            if (++nodes > node_budget) {
                throw ResourceError("find_induced_pattern: node budget " + std::to_string(node_budget) + " exceeded");
            }
            if (s.side_a) {
                emb.a_map[s.idx] = h;
                free_a.reset(h);
            } else {
                emb.b_map[s.idx] = h;
                free_b.reset(h);
            }
            if (self(self, depth + 1)) return true;
            if (s.side_a) {
                emb.a_map[s.idx] = unset;
                free_a.set(h);
            } else {
                emb.b_map[s.idx] = unset;
                free_b.set(h);
            }
        }
        placed[pick] = false;
        return false;
    };

    if (!place(place, 0)) return std::nullopt;
    return emb;
}

/// Pi_d: a_i b_j labelled 1 when i >= j - 1, a_i b_{i+2} labelled 0, everything else free.
inline Pattern gen_pattern_Pi(std::size_t d) {
    if (d < 2) throw DomainError("gen_pattern_Pi: d must be at least 2");
    Pattern pat(d, d, Label::any);
    for (std::size_t i = 1; i <= d; ++i) {
        for (std::size_t j = 1; j <= d; ++j) {
            if (i + 1 >= j) pat.set(i - 1, j - 1, Label::edge);
            else if (j == i + 2) pat.set(i - 1, j - 1, Label::non_edge);
        }
    }
    return pat;
}

struct ForbiddenH {
    Pattern pattern;
    std::uint64_t branching;                    // k = 2^(Delta^d) + 1
    std::vector<std::size_t> b_layer;           // layer (1-based) of each B-vertex
    std::vector<std::vector<std::uint64_t>> b_sequence;  // (i_3, ..., i_l) of each B-vertex, 0-based
};

/// Layered graph H_{d,Delta}: B holds v_1, v_2 and k^{l-2} vertices on layer l (3 <= l <= d+1);
/// for each layer-l sequence, k A-vertices are joined to the whole prefix chain v_1, v_2, ..., v_l.
inline ForbiddenH gen_forbidden_H_detailed(std::size_t d, std::size_t delta, std::uint64_t cell_cap = 50'000'000) {
    if (d < 2) throw DomainError("gen_forbidden_H: d must be at least 2 (part A is empty otherwise)");
    if (delta < 1) throw DomainError("gen_forbidden_H: degree must be at least 1");
    const std::uint64_t exponent = saturating_pow(delta, d);
    if (exponent > 40) throw ResourceError("gen_forbidden_H: 2^(Delta^d) is beyond any representable size");
    const std::uint64_t k = (std::uint64_t{1} << exponent) + 1;

    std::vector<std::uint64_t> layer_offset(d + 2, 0);
    std::uint64_t b_total = 2, a_total = 0;
    for (std::size_t l = 3; l <= d + 1; ++l) {
        layer_offset[l] = b_total;
        const std::uint64_t layer = saturating_pow(k, l - 2);
        const std::uint64_t a_layer = saturating_pow(k, l - 1);
        if (layer > cell_cap || a_layer > cell_cap) throw ResourceError("gen_forbidden_H: size cap exceeded");
        b_total += layer;
        a_total += a_layer;
    }
    if (a_total > cell_cap / std::max<std::uint64_t>(b_total, 1)) {
        throw ResourceError("gen_forbidden_H: label matrix exceeds cap");
    }

    ForbiddenH h{Pattern(a_total, b_total, Label::non_edge), k, {}, {}};
    h.b_layer.assign(b_total, 0);
    h.b_sequence.assign(b_total, {});
    h.b_layer[0] = 1;
    h.b_layer[1] = 2;

    // index of the layer-t vertex whose sequence is seq[0..t-2)
    auto b_index = [&](const std::vector<std::uint64_t>& seq, std::size_t t) {
        std::uint64_t rank = 0;
        for (std::size_t i = 0; i + 2 < t; ++i) rank = rank * k + seq[i];
        return layer_offset[t] + rank;
    };

    std::size_t a_row = 0;
    for (std::size_t l = 3; l <= d + 1; ++l) {
        const std::uint64_t layer = saturating_pow(k, l - 2);
        std::vector<std::uint64_t> seq(l - 2, 0);
        for (std::uint64_t r = 0; r < layer; ++r) {
            std::uint64_t t = r;
            for (std::size_t i = l - 2; i-- > 0;) {
                seq[i] = t % k;
                t /= k;
            }
            const auto v = b_index(seq, l);
            h.b_layer[v] = l;
            h.b_sequence[v] = seq;
            for (std::uint64_t j = 0; j < k; ++j, ++a_row) {
                h.pattern.set(a_row, 0, Label::edge);
                h.pattern.set(a_row, 1, Label::edge);
                for (std::size_t t2 = 3; t2 <= l; ++t2) h.pattern.set(a_row, b_index(seq, t2), Label::edge);
            }
        }
    }
    return h;
}

inline Pattern gen_forbidden_H(std::size_t d, std::size_t delta) { return gen_forbidden_H_detailed(d, delta).pattern; }

// ---------------------------------------------------------------------------
// Hypergraph independent sets

struct Hypergraph {
    std::size_t vertex_count = 0;
    std::size_t uniformity = 0;
    std::vector<std::vector<std::size_t>> edges;

    void validate() const {
        for (const auto& e : edges) {
            if (e.size() != uniformity) throw DomainError("hyperedge has wrong size");
            auto s = e;
            std::sort(s.begin(), s.end());
            if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw DomainError("hyperedge repeats a vertex");
            if (!s.empty() && s.back() >= vertex_count) throw DomainError("hyperedge vertex out of range");
        }
    }
};

/// ceil(N^{k/(k-1)} / (4 (M+N)^{1/(k-1)})).
inline std::size_t independent_set_bound(std::size_t n, std::size_t m, std::size_t k) {
    const double kk = static_cast<double>(k);
    const double value = std::pow(static_cast<double>(n), kk / (kk - 1.0)) /
                         (4.0 * std::pow(static_cast<double>(m + n), 1.0 / (kk - 1.0)));
    return static_cast<std::size_t>(std::ceil(value - 1e-9));
}

inline bool is_independent(const Hypergraph& h, const std::vector<std::size_t>& set) {
    DynamicBitset in(h.vertex_count);
    for (auto v : set) in.set(v);
    for (const auto& e : h.edges) {
        if (std::all_of(e.begin(), e.end(), [&](std::size_t v) { return in.test(v); })) return false;
    }
    return true;
}

struct IndependentSet {
    std::vector<std::size_t> vertices;  // sorted
    std::size_t attempts = 0;
    std::size_t target = 0;
};

/// Random sampling with rate (N / 2(M+N))^{1/(k-1)}, then one vertex removed from every
/// edge that survives; repeated until the size bound is met.
inline IndependentSet hypergraph_independent_set(const Hypergraph& h, CounterRng& rng, std::size_t max_retries = 200) {
    if (h.uniformity < 2) throw DomainError("hypergraph_independent_set: uniformity must be at least 2");
    if (h.vertex_count == 0) throw DomainError("hypergraph_independent_set: empty vertex set");
    h.validate();
    const double n = static_cast<double>(h.vertex_count);
    const double m = static_cast<double>(h.edges.size());
    const double q = std::pow(n / (2.0 * (m + n)), 1.0 / (static_cast<double>(h.uniformity) - 1.0));
    IndependentSet out;
    out.target = independent_set_bound(h.vertex_count, h.edges.size(), h.uniformity);

    for (std::size_t attempt = 1; attempt <= max_retries; ++attempt) {
        DynamicBitset in(h.vertex_count);
        for (std::size_t v = 0; v < h.vertex_count; ++v)
            if (rng.bernoulli(q)) in.set(v);
        for (const auto& e : h.edges) {
            if (std::all_of(e.begin(), e.end(), [&](std::size_t v) { return in.test(v); })) {
                in.reset(*std::max_element(e.begin(), e.end()));
            }
        }
        if (in.count() >= out.target) {
            out.vertices = in.indices();
            out.attempts = attempt;
            return out;
        }
    }
    throw ResourceError("hypergraph_independent_set: size bound not met within " + std::to_string(max_retries) +
                        " retries");
}

// ---------------------------------------------------------------------------
// Fixtures

/// "m n" header, then one line per A-vertex with its neighbor indices.
inline std::string to_fixture(const BipartiteGraph& g) {
    std::ostringstream os;
    os << g.a_size() << ' ' << g.b_size() << '\n';
    for (std::size_t a = 0; a < g.a_size(); ++a) {
        bool first = true;
        for (auto b : g.a_neighbors(a).indices()) {
            os << (first ? "" : " ") << b;
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

inline BipartiteGraph parse_graph(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("graph fixture: missing header");
    std::istringstream hs(line);
    std::size_t m = 0, n = 0;
    if (!(hs >> m >> n)) throw ParseError("graph fixture: header must be 'm n'");
    BipartiteGraph g(m, n);
    std::size_t a = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        if (a >= m) {
            std::string extra;
            if (ls >> extra) throw ParseError("graph fixture: more adjacency lines than A-vertices");
            continue;
        }
        long long b = 0;
        while (ls >> b) {
            if (b < 0 || static_cast<std::size_t>(b) >= n) throw ParseError("graph fixture: neighbor index out of range");
            g.add_edge(a, static_cast<std::size_t>(b));
        }
        if (!ls.eof()) throw ParseError("graph fixture: non-numeric token on line " + std::to_string(a + 2));
        ++a;
    }
    return g;
}

inline std::string to_fixture(const Pattern& p) {
    std::string s;
    for (std::size_t i = 0; i < p.a_size(); ++i) {
        for (std::size_t j = 0; j < p.b_size(); ++j) s += static_cast<char>(p.at(i, j));
        s += '\n';
    }
    return s;
}

inline Pattern parse_pattern(std::istream& in) {
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::string r;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) r += c;
        if (!r.empty()) rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError("pattern fixture: no rows");
    Pattern p(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != p.b_size()) throw ParseError("pattern fixture: ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            const char c = rows[i][j];
            if (c != '0' && c != '1' && c != '*') throw ParseError("pattern fixture: labels must be 0, 1 or *");
            p.set(i, j, static_cast<Label>(c));
        }
    }
    return p;
}

}  // namespace ffil
