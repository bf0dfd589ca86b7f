#pragma once

// Diagonal bilinear forms, unit spheres and affine flats over F_p or F_{p^2}:
// sphere-intersection reduction, isotropy tests, exhaustive flat searches and
// unit-distance graphs.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ffil/bigraph.hpp"
#include "ffil/error.hpp"
#include "ffil/gf.hpp"
#include "ffil/linalg.hpp"
#include "ffil/mpoly.hpp"

namespace ffil {

class BilinearForm {
public:
    /// Diagonal form sum_i sigma_i u_i v_i with sigma_i in {+1, -1}.
    BilinearForm(const FieldCtx& ctx, std::vector<int> signature) : ctx_(ctx), signature_(std::move(signature)) {
        if (ctx.characteristic() == 2) throw DomainError("bilinear forms in characteristic 2 are not supported");
        if (signature_.empty()) throw DomainError("bilinear form needs dimension at least 1");
        for (int s : signature_)
            if (s != 1 && s != -1) throw DomainError("signature entries must be +1 or -1");
    }

    static BilinearForm standard(const FieldCtx& ctx, std::size_t d) { return {ctx, std::vector<int>(d, 1)}; }

    /// Standard form, except the last coordinate is negated when d = 1 mod 4.
    static BilinearForm twisted(const FieldCtx& ctx, std::size_t d) {
        std::vector<int> sig(d, 1);
        if (d % 4 == 1) sig.back() = -1;
        return {ctx, std::move(sig)};
    }

    const FieldCtx& ctx() const noexcept { return ctx_; }
    std::size_t dim() const noexcept { return signature_.size(); }
    const std::vector<int>& signature() const noexcept { return signature_; }

    std::string signature_string() const {
        std::string s;
        for (int x : signature_) s += x > 0 ? '+' : '-';
        return s;
    }

    FieldElement inner(const FieldVector& u, const FieldVector& v) const {
        if (u.size() != dim() || v.size() != dim()) throw DomainError("inner product dimension mismatch");
        FieldElement acc = ctx_.zero();
        for (std::size_t i = 0; i < dim(); ++i) {
            if (signature_[i] > 0) acc += u[i] * v[i];
            else acc -= u[i] * v[i];
        }
        return acc;
    }

    FieldElement norm_sq(const FieldVector& v) const { return inner(v, v); }

    friend bool operator==(const BilinearForm&, const BilinearForm&) = default;

private:
    FieldCtx ctx_;
    std::vector<int> signature_;
};

inline FieldElement inner(const BilinearForm& form, const FieldVector& u, const FieldVector& v) {
    return form.inner(u, v);
}
inline FieldElement norm_sq(const BilinearForm& form, const FieldVector& v) { return form.norm_sq(v); }

inline FieldVector to_field_vector(const FieldCtx& ctx, const Point& x) {
    FieldVector v;
    v.reserve(x.size());
    for (auto c : x) v.push_back(ctx.make(c));
    return v;
}

inline Point to_point(const FieldVector& v) {
    Point x;
    x.reserve(v.size());
    for (const auto& c : v) {
        if (!c.ctx().is_prime_field()) throw DomainError("to_point: vector is not over a prime field");
        x.push_back(c.re());
    }
    return x;
}

/// Every point of F^d in lexicographic order of element indices.
template <typename Fn>
void for_each_field_point(const FieldCtx& ctx, std::size_t d, std::uint64_t cap, Fn&& fn) {
    const std::uint64_t q = ctx.order();
    const std::uint64_t total = saturating_pow(q, d);
    if (total > cap) throw ResourceError("enumeration of " + ctx.describe() + "^" + std::to_string(d) + " exceeds cap");
    std::vector<std::uint64_t> idx(d, 0);
    FieldVector x = zero_vector(ctx, d);
    for (std::uint64_t n = 0; n < total; ++n) {
        fn(static_cast<const FieldVector&>(x));
        for (std::size_t i = d; i-- > 0;) {
            if (++idx[i] < q) {
                x[i] = ctx.element(idx[i]);
                break;
            }
            idx[i] = 0;
            x[i] = ctx.zero();
        }
    }
}

struct Sphere {
    BilinearForm form;
    FieldVector center;

    bool contains(const FieldVector& x) const { return form.norm_sq(x - center).is_one(); }
};

inline std::vector<FieldVector> sphere_points(const Sphere& s, std::uint64_t cap = default_enumeration_cap) {
    if (s.center.size() != s.form.dim()) throw DomainError("sphere center has wrong dimension");
    std::vector<FieldVector> out;
    for_each_field_point(s.form.ctx(), s.form.dim(), cap, [&](const FieldVector& x) {
        if (s.contains(x)) out.push_back(x);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Affine flats

class AffineFlat {
public:
    static AffineFlat empty(const FieldCtx& ctx, std::size_t d) {
        AffineFlat f(zero_vector(ctx, d), {}, true);
        return f;
    }

    static AffineFlat full(const FieldCtx& ctx, std::size_t d) {
        std::vector<FieldVector> basis;
        for (std::size_t i = 0; i < d; ++i) {
            FieldVector e = zero_vector(ctx, d);
            e[i] = ctx.one();
            basis.push_back(std::move(e));
        }
        return AffineFlat(zero_vector(ctx, d), std::move(basis));
    }

    /// Flat through `base` spanned by linearly independent `basis` directions.
    AffineFlat(FieldVector base, std::vector<FieldVector> basis) : base_(std::move(base)), basis_(std::move(basis)) {
        if (base_.empty()) throw DomainError("affine flat needs ambient dimension at least 1");
        for (const auto& b : basis_)
            if (b.size() != base_.size()) throw DomainError("flat direction has wrong dimension");
        if (matrix_rank(basis_) != basis_.size()) throw DomainError("flat directions are linearly dependent");
    }

    bool is_empty() const noexcept { return empty_; }
    std::size_t ambient_dim() const noexcept { return base_.size(); }
    /// Dimension of a nonempty flat.
    std::size_t dim() const noexcept { return basis_.size(); }
    const FieldVector& base() const noexcept { return base_; }
    const std::vector<FieldVector>& basis() const noexcept { return basis_; }
    const FieldCtx& ctx() const noexcept { return base_.front().ctx(); }

    bool contains(const FieldVector& x) const {
        if (empty_) return false;
        if (x.size() != ambient_dim()) throw DomainError("point has wrong dimension");
        if (basis_.empty()) return x == base_;
        // x - base in span(basis) iff appending it does not raise the rank
        auto rows = basis_;
        rows.push_back(x - base_);
        return matrix_rank(rows) == basis_.size();
    }

    std::vector<FieldVector> points(std::uint64_t cap = default_enumeration_cap) const {
        std::vector<FieldVector> out;
        if (empty_) return out;
        for_each_field_point(ctx(), basis_.size(), cap, [&](const FieldVector& coeffs) {
            FieldVector x = base_;
            for (std::size_t i = 0; i < basis_.size(); ++i) x = x + coeffs[i] * basis_[i];
            out.push_back(std::move(x));
        });
        return out;
    }

private:
    AffineFlat(FieldVector base, std::vector<FieldVector> basis, bool empty)
        : base_(std::move(base)), basis_(std::move(basis)), empty_(empty) {}

    FieldVector base_;
    std::vector<FieldVector> basis_;
    bool empty_ = false;
};

/// Whether <x - y, x - y> = 0 for all x, y in the flat (checked on basis pairs).
inline bool is_totally_isotropic(const BilinearForm& form, const AffineFlat& v) {
    if (v.is_empty()) return true;
    for (std::size_t i = 0; i < v.basis().size(); ++i)
        for (std::size_t j = i; j < v.basis().size(); ++j)
            if (!form.inner(v.basis()[i], v.basis()[j]).is_zero()) return false;
    return true;
}

/// Whether every direction of `u` is orthogonal to every difference of the given points.
inline bool is_orthogonal_to_span(const BilinearForm& form, const AffineFlat& u, std::span<const FieldVector> pts) {
    if (u.is_empty() || pts.empty()) return true;
    for (const auto& b : u.basis())
        for (std::size_t j = 1; j < pts.size(); ++j)
            if (!form.inner(b, pts[j] - pts[0]).is_zero()) return false;
    return true;
}

struct SphereIntersection {
    AffineFlat flat;
    std::size_t duplicates_removed = 0;
};

/// Unit spheres S_1..S_k sharing one form: returns U with S_1 cap ... cap S_k = S_1 cap U, from the
/// linear equations 2<x, w_j - w_1> + <w_1, w_1> - <w_j, w_j> = 0. Repeated centers are dropped first.
inline SphereIntersection intersect_spheres_to_flat(std::span<const Sphere> spheres) {
    if (spheres.empty()) throw DomainError("intersect_spheres_to_flat: need at least one sphere");
    const BilinearForm& form = spheres.front().form;
    const FieldCtx& ctx = form.ctx();
    const std::size_t d = form.dim();

    std::vector<FieldVector> centers;
    SphereIntersection out{AffineFlat::full(ctx, d), 0};
    for (const auto& s : spheres) {
        if (!(s.form == form)) throw DomainError("intersect_spheres_to_flat: spheres use different forms");
        if (s.center.size() != d) throw DomainError("sphere center has wrong dimension");
        if (std::find(centers.begin(), centers.end(), s.center) != centers.end()) {
            ++out.duplicates_removed;
            continue;
        }
        centers.push_back(s.center);
    }
    if (centers.size() == 1) return out;

    const FieldElement two = ctx.from_int(2);
    const FieldElement w1_norm = form.norm_sq(centers[0]);
    FieldMatrix a;
    FieldVector b;
    for (std::size_t j = 1; j < centers.size(); ++j) {
        const FieldVector diff = centers[j] - centers[0];
        FieldVector row(d, ctx.zero());
        for (std::size_t i = 0; i < d; ++i) {
            row[i] = two * diff[i];
            if (form.signature()[i] < 0) row[i] = -row[i];
        }
        a.push_back(std::move(row));
        b.push_back(form.norm_sq(centers[j]) - w1_norm);
    }
    const auto sol = solve_affine(ctx, a, b, d);
    if (!sol) {
        out.flat = AffineFlat::empty(ctx, d);
    } else {
        out.flat = AffineFlat(sol->particular, sol->kernel);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exhaustive searches over flats

/// Calls fn(basis) for every k-dimensional linear subspace of F^d, each exactly once,
/// with basis in reduced row echelon form. fn returns true to stop early.
template <typename Fn>
bool for_each_subspace(const FieldCtx& ctx, std::size_t d, std::size_t k, std::uint64_t& budget, Fn&& fn) {
    if (k > d) return false;
    const std::uint64_t q = ctx.order();
    std::vector<std::size_t> pivots(k);
    for (std::size_t i = 0; i < k; ++i) pivots[i] = i;
    while (true) {
        // free slots: (row r, column c) with c > pivot_r and c not a pivot column
        std::vector<std::pair<std::size_t, std::size_t>> slots;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = pivots[r] + 1; c < d; ++c)
                if (std::find(pivots.begin(), pivots.end(), c) == pivots.end()) slots.emplace_back(r, c);
        std::vector<FieldVector> basis(k, zero_vector(ctx, d));
        for (std::size_t r = 0; r < k; ++r) basis[r][pivots[r]] = ctx.one();
        std::vector<std::uint64_t> digits(slots.size(), 0);
        while (true) {
            if (budget == 0) throw ResourceError("subspace enumeration budget exhausted");
            --budget;
            if (fn(static_cast<const std::vector<FieldVector>&>(basis))) return true;
            std::size_t i = slots.size();
            while (i > 0) {
                --i;
                auto [r, c] = slots[i];
                if (++digits[i] < q) {
                    basis[r][c] = ctx.element(digits[i]);
                    break;
                }
                digits[i] = 0;
                basis[r][c] = ctx.zero();
                if (i == 0) {
                    i = slots.size() + 1;  // wrapped around
                    break;
                }
            }
            if (slots.empty() || i == slots.size() + 1) break;
        }
        std::size_t i = k;
        while (i > 0 && pivots[i - 1] == d - k + i - 1) --i;
        if (i == 0) break;
        ++pivots[i - 1];
        for (std::size_t j = i; j < k; ++j) pivots[j] = pivots[j - 1] + 1;
    }
    return false;
}

struct FlatInSphere {
    AffineFlat flat;
    bool totally_isotropic = false;   // <x-y, x-y> = 0 on all pairs
    bool center_orthogonal = false;   // <x-w, x-y> = 0 on all pairs
};

struct FlatsInSphereReport {
    std::vector<FlatInSphere> flats;
    std::vector<std::size_t> count_by_dim;

    bool all_pass() const {
        return std::all_of(flats.begin(), flats.end(),
                           [](const FlatInSphere& f) { return f.totally_isotropic && f.center_orthogonal; });
    }
};

/// All flats of dimension <= dim_cap contained in the sphere, each checked pairwise for
/// <x-y, x-y> = 0 and <x-w, x-y> = 0.
inline FlatsInSphereReport flats_in_sphere_check(const Sphere& s, std::size_t dim_cap,
                                                 std::uint64_t cap = default_enumeration_cap) {
    const auto& form = s.form;
    const auto& ctx = form.ctx();
    const std::size_t d = form.dim();
    const auto on_sphere = sphere_points(s, cap);
    std::set<std::vector<std::uint64_t>> sphere_keys;
    auto key_of = [](const FieldVector& x) {
        std::vector<std::uint64_t> k;
        for (const auto& c : x) k.push_back(c.index());
        return k;
    };
    for (const auto& x : on_sphere) sphere_keys.insert(key_of(x));

    FlatsInSphereReport rep;
    rep.count_by_dim.assign(std::min(dim_cap, d) + 1, 0);
    std::uint64_t budget = cap;

    auto check_pairs = [&](const std::vector<FieldVector>& pts, FlatInSphere& f) {
        f.totally_isotropic = true;
        f.center_orthogonal = true;
        for (const auto& x : pts) {
            for (const auto& y : pts) {
                if (!form.norm_sq(x - y).is_zero()) f.totally_isotropic = false;
                if (!form.inner(x - s.center, x - y).is_zero()) f.center_orthogonal = false;
            }
        }
    };

    for (const auto& x : on_sphere) {
        FlatInSphere f{AffineFlat(x, {})};
        check_pairs({x}, f);
        rep.flats.push_back(std::move(f));
        ++rep.count_by_dim[0];
    }

    for (std::size_t k = 1; k <= std::min(dim_cap, d); ++k) {
        for_each_subspace(ctx, d, k, budget, [&](const std::vector<FieldVector>& basis) {
            std::set<std::vector<std::uint64_t>> seen;
            const AffineFlat dir(zero_vector(ctx, d), basis);
            const auto offsets = dir.points(cap);
            for (const auto& x : on_sphere) {
                std::vector<FieldVector> coset;
                bool inside = true;
                for (const auto& o : offsets) {
                    FieldVector y = x + o;
                    if (!sphere_keys.count(key_of(y))) {
                        inside = false;
                        break;
                    }
                    coset.push_back(std::move(y));
                }
                if (!inside) continue;
                const auto rep_point = *std::min_element(coset.begin(), coset.end(), [&](const auto& a, const auto& b) {
                    return key_of(a) < key_of(b);
                });
                if (!seen.insert(key_of(rep_point)).second) continue;
                FlatInSphere f{AffineFlat(rep_point, basis)};
                check_pairs(coset, f);
                rep.flats.push_back(std::move(f));
                ++rep.count_by_dim[k];
            }
            return false;
        });
    }
    return rep;
}

struct IsotropicUnitPair {
    AffineFlat flat;  // totally isotropic, through the origin
    FieldVector w;    // <w, w> = 1 and w orthogonal to the flat
};

/// For d = 2k+1: searches every k-dimensional subspace V and every w in its orthogonal
/// complement for V totally isotropic with <w, w> = 1. Translation does not affect either
/// condition, so linear subspaces cover all affine k-flats.
inline std::optional<IsotropicUnitPair> isotropic_unit_pair_search(const BilinearForm& form,
                                                                   std::uint64_t cap = default_enumeration_cap) {
    const std::size_t d = form.dim();
    if (d % 2 == 0) throw DomainError("isotropic_unit_pair_search: dimension must be odd");
    const std::size_t k = d / 2;
    const auto& ctx = form.ctx();
    std::uint64_t budget = cap;
    std::optional<IsotropicUnitPair> found;

    for_each_subspace(ctx, d, k, budget, [&](const std::vector<FieldVector>& basis) {
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i; j < k; ++j)
                if (!form.inner(basis[i], basis[j]).is_zero()) return false;
        // orthogonal complement: rows sigma .* b_i
        FieldMatrix rows;
        for (const auto& b : basis) {
            FieldVector r = b;
            for (std::size_t c = 0; c < d; ++c)
                if (form.signature()[c] < 0) r[c] = -r[c];
            rows.push_back(std::move(r));
        }
        const auto perp = solve_affine(ctx, rows, zero_vector(ctx, rows.size()), d);
        const AffineFlat complement(zero_vector(ctx, d), perp->kernel);
        bool hit = false;
        for_each_field_point(ctx, complement.dim(), cap, [&](const FieldVector& coeffs) {
            if (hit) return;
            if (budget == 0) throw ResourceError("isotropic_unit_pair_search: budget exhausted");
            --budget;
            FieldVector w = zero_vector(ctx, d);
            for (std::size_t i = 0; i < coeffs.size(); ++i) w = w + coeffs[i] * complement.basis()[i];
            if (form.norm_sq(w).is_one()) {
                found = IsotropicUnitPair{AffineFlat(zero_vector(ctx, d), basis), w};
                hit = true;
            }
        });
        return hit;
    });
    return found;
}

// ---------------------------------------------------------------------------
// Unit-distance graphs and incidence graphs

struct UnitDistanceGraph {
    std::vector<DynamicBitset> adjacency;
    std::uint64_t edge_count = 0;  // unordered pairs
    BipartiteGraph doubled;        // two copies of the point set, a_i ~ b_j iff i ~ j

    std::size_t size() const noexcept { return adjacency.size(); }
    bool adjacent(std::size_t i, std::size_t j) const { return adjacency.at(i).test(j); }
};

inline UnitDistanceGraph unit_distance_graph(std::span<const FieldVector> points, const BilinearForm& form) {
    const std::size_t n = points.size();
    UnitDistanceGraph g{std::vector<DynamicBitset>(n, DynamicBitset(n)), 0, BipartiteGraph(n, n)};
    for (const auto& x : points)
        if (x.size() != form.dim()) throw DomainError("unit_distance_graph: point dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!form.norm_sq(points[i] - points[j]).is_one()) continue;
            g.adjacency[i].set(j);
            g.adjacency[j].set(i);
            g.doubled.add_edge(i, j);
            g.doubled.add_edge(j, i);
            ++g.edge_count;
        }
    }
    return g;
}

/// Points (class A) against unit spheres with the given centers (class B).
inline BipartiteGraph point_sphere_incidence(std::span<const FieldVector> points, std::span<const FieldVector> centers,
                                             const BilinearForm& form) {
    BipartiteGraph g(points.size(), centers.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < centers.size(); ++j)
            if (form.norm_sq(points[i] - centers[j]).is_one()) g.add_edge(i, j);
    return g;
}

/// (x_1, ..., x_d) -> (x_1, ..., x_{d-1}, alpha x_d), lifting F_p^d into F_{p^2}^d.
inline std::vector<FieldVector> phi_embed(std::span<const FieldVector> points, const FieldElement& alpha) {
    const FieldCtx& ext = alpha.ctx();
    if (ext.is_prime_field()) throw DomainError("phi_embed: alpha must live in the quadratic extension");
    if (!(alpha * alpha == -ext.one())) throw DomainError("phi_embed: alpha^2 must equal -1");
    std::vector<FieldVector> out;
    out.reserve(points.size());
    for (const auto& x : points) {
        FieldVector y;
        y.reserve(x.size());
        for (const auto& c : x) {
            if (!c.ctx().is_prime_field() || c.ctx().characteristic() != ext.characteristic()) {
                throw DomainError("phi_embed: input must be over the base prime field");
            }
            y.push_back(ext.make(c.re()));
        }
        if (!y.empty()) y.back() *= alpha;
        out.push_back(std::move(y));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Point-set fixture: "p d signature" header, then one point per line.

struct PointSet {
    BilinearForm form;
    std::vector<FieldVector> points;
};

inline std::string to_fixture(const PointSet& ps) {
    std::ostringstream os;
    os << ps.form.ctx().characteristic() << ' ' << ps.form.dim() << ' ' << ps.form.signature_string() << '\n';
    for (const auto& x : ps.points) {
        for (std::size_t i = 0; i < x.size(); ++i) os << (i ? " " : "") << to_point(FieldVector{x[i]}).front();
        os << '\n';
    }
    return os.str();
}

inline PointSet parse_point_set(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("point-set fixture: missing header");
    std::istringstream hs(line);
    std::uint64_t p = 0;
    std::size_t d = 0;
    std::string sig;
    if (!(hs >> p >> d >> sig)) throw ParseError("point-set fixture: header must be 'p d signature'");
    if (sig.size() != d) throw ParseError("point-set fixture: signature length differs from d");
    std::vector<int> signature;
    for (char c : sig) {
        if (c != '+' && c != '-') throw ParseError("point-set fixture: signature uses '+' and '-'");
        signature.push_back(c == '+' ? 1 : -1);
    }
    const auto ctx = FieldCtx::prime(p);
    PointSet ps{BilinearForm(ctx, signature), {}};
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        FieldVector x;
        long long c = 0;
        while (ls >> c) x.push_back(ctx.from_int(c));
        if (!ls.eof()) throw ParseError("point-set fixture: non-numeric coordinate");
        if (x.empty()) continue;
        if (x.size() != d) throw ParseError("point-set fixture: point with wrong dimension");
        ps.points.push_back(std::move(x));
    }
    return ps;
}

}  // namespace ffil
