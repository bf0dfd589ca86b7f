#pragma once

// Dense Gaussian elimination over any FieldCtx.

#include <optional>
#include <vector>

#include "ffil/gf.hpp"

namespace ffil {

using FieldVector = std::vector<FieldElement>;
using FieldMatrix = std::vector<FieldVector>;  // row-major

inline FieldVector zero_vector(const FieldCtx& ctx, std::size_t n) { return FieldVector(n, ctx.zero()); }

inline FieldVector operator+(FieldVector a, const FieldVector& b) {
    if (a.size() != b.size()) throw DomainError("vector dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline FieldVector operator-(FieldVector a, const FieldVector& b) {
    if (a.size() != b.size()) throw DomainError("vector dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline FieldVector operator*(const FieldElement& c, FieldVector v) {
    for (auto& x : v) x *= c;
    return v;
}

struct RowEchelon {
    FieldMatrix rows;                  // nonzero rows only, reduced
    std::vector<std::size_t> pivots;   // pivot column of each row
};

/// Reduced row echelon form of an (rows x ncols) matrix.
inline RowEchelon reduce_rows(FieldMatrix m, std::size_t ncols) {
    RowEchelon out;
    std::size_t r = 0;
    for (std::size_t c = 0; c < ncols && r < m.size(); ++c) {
        std::size_t piv = r;
        while (piv < m.size() && m[piv][c].is_zero()) ++piv;
        if (piv == m.size()) continue;
        std::swap(m[r], m[piv]);
        const FieldElement inv = m[r][c].inverse();
        for (auto& x : m[r]) x *= inv;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            const FieldElement f = m[i][c];
            for (std::size_t j = c; j < m[i].size(); ++j) m[i][j] -= f * m[r][j];
        }
        out.pivots.push_back(c);
        ++r;
    }
    m.resize(r);
    out.rows = std::move(m);
    return out;
}

inline std::size_t matrix_rank(const FieldMatrix& m) {
    if (m.empty()) return 0;
    return reduce_rows(m, m.front().size()).pivots.size();
}

struct AffineSolution {
    FieldVector particular;
    std::vector<FieldVector> kernel;  // basis of the homogeneous solution space
};

/// Solves A x = b for x in F^ncols. nullopt iff the system is inconsistent.
inline std::optional<AffineSolution> solve_affine(const FieldCtx& ctx, const FieldMatrix& a, const FieldVector& b,
                                                  std::size_t ncols) {
    if (a.size() != b.size()) throw DomainError("solve_affine: row count mismatch");
    FieldMatrix aug;
    aug.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != ncols) throw DomainError("solve_affine: column count mismatch");
        FieldVector row = a[i];
        row.push_back(b[i]);
        aug.push_back(std::move(row));
    }
    const RowEchelon e = reduce_rows(std::move(aug), ncols + 1);
    if (!e.pivots.empty() && e.pivots.back() == ncols) return std::nullopt;

    AffineSolution sol;
    sol.particular = zero_vector(ctx, ncols);
    std::vector<bool> is_pivot(ncols, false);
    for (std::size_t r = 0; r < e.pivots.size(); ++r) {
        is_pivot[e.pivots[r]] = true;
        sol.particular[e.pivots[r]] = e.rows[r][ncols];
    }
    for (std::size_t f = 0; f < ncols; ++f) {
        if (is_pivot[f]) continue;
        FieldVector v = zero_vector(ctx, ncols);
        v[f] = ctx.one();
        for (std::size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = -e.rows[r][f];
        sol.kernel.push_back(std::move(v));
    }
    return sol;
}

}  // namespace ffil
