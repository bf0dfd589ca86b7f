#pragma once

// Sparse multivariate polynomials over a prime field, plus exhaustive zero-set
// enumeration over F_p^D.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ffil/error.hpp"
#include "ffil/gf.hpp"
#include "ffil/rng.hpp"

namespace ffil {

/// A point of F_p^D as residues in [0, p).
using Point = std::vector<std::uint32_t>;
using Exponents = std::vector<std::uint32_t>;

inline constexpr std::uint64_t default_enumeration_cap = 100'000'000;

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

/// base^e, saturating at UINT64_MAX.
inline std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t e) {
    unsigned __int128 r = 1;
    for (std::uint64_t i = 0; i < e; ++i) {
        r *= base;
        if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

/// Visits every point of F_p^D in lexicographic order (first coordinate most significant).
template <typename Fn>
void for_each_point(std::uint32_t p, std::size_t dim, std::uint64_t cap, Fn&& fn) {
    const std::uint64_t total = saturating_pow(p, dim);
    if (total > cap) {
        throw ResourceError("enumeration of " + std::to_string(p) + "^" + std::to_string(dim) +
                            " points exceeds cap " + std::to_string(cap));
    }
    Point x(dim, 0);
    for (std::uint64_t n = 0; n < total; ++n) {
        fn(static_cast<const Point&>(x));
        for (std::size_t i = dim; i-- > 0;) {
            if (++x[i] < p) break;
            x[i] = 0;
        }
    }
}

/// Point with lexicographic rank `index` in F_p^D.
inline Point point_from_index(std::uint32_t p, std::size_t dim, std::uint64_t index) {
    Point x(dim, 0);
    for (std::size_t i = dim; i-- > 0;) {
        x[i] = static_cast<std::uint32_t>(index % p);
        index /= p;
    }
    return x;
}

inline std::uint64_t point_index(std::uint32_t p, const Point& x) {
    std::uint64_t r = 0;
    for (auto c : x) r = r * p + c;
    return r;
}

class MultiPoly {
public:
    using TermMap = std::map<Exponents, std::uint32_t>;

    MultiPoly(const FieldCtx& ctx, std::size_t nvars) : ctx_(ctx), nvars_(nvars) {
        if (!ctx.is_prime_field()) throw DomainError("MultiPoly requires a prime field");
    }

    static MultiPoly constant(const FieldCtx& ctx, std::size_t nvars, std::int64_t c) {
        MultiPoly f(ctx, nvars);
        f.add_term(Exponents(nvars, 0), c);
        return f;
    }

    static MultiPoly variable(const FieldCtx& ctx, std::size_t nvars, std::size_t i) {
        if (i >= nvars) throw DomainError("variable index out of range");
        MultiPoly f(ctx, nvars);
        Exponents e(nvars, 0);
        e[i] = 1;
        f.add_term(std::move(e), 1);
        return f;
    }

    const FieldCtx& ctx() const noexcept { return ctx_; }
    std::size_t nvars() const noexcept { return nvars_; }
    const TermMap& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    /// Adds coeff * x^e to the polynomial, dropping the term if it cancels.
    void add_term(Exponents e, std::int64_t coeff) {
        if (e.size() != nvars_) throw DomainError("exponent vector length differs from nvars");
        const std::uint32_t c = ctx_.reduce(coeff);
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(std::move(e), c);
        if (!inserted) {
            it->second = static_cast<std::uint32_t>((std::uint64_t{it->second} + c) % ctx_.characteristic());
            if (it->second == 0) terms_.erase(it);
        }
    }

    std::uint32_t coefficient(const Exponents& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? 0 : it->second;
    }

    std::size_t total_degree() const noexcept {
        std::size_t d = 0;
        for (const auto& [e, c] : terms_) {
            std::size_t s = 0;
            for (auto x : e) s += x;
            d = std::max(d, s);
        }
        return d;
    }

    /// Value at x as a residue; x must have nvars coordinates.
    std::uint32_t eval_residue(std::span<const std::uint32_t> x) const {
        if (x.size() != nvars_) throw DomainError("evaluation point has wrong dimension");
        const std::uint64_t p = ctx_.characteristic();
        std::uint64_t acc = 0;
        for (const auto& [e, c] : terms_) {
            std::uint64_t t = c;
            for (std::size_t i = 0; i < nvars_ && t != 0; ++i) {
                for (std::uint32_t k = 0; k < e[i]; ++k) t = t * x[i] % p;
            }
            acc += t;
            if (acc >= p) acc -= p;
        }
        return static_cast<std::uint32_t>(acc);
    }

    FieldElement evaluate(std::span<const std::uint32_t> x) const { return ctx_.make(eval_residue(x)); }

    MultiPoly& operator+=(const MultiPoly& o) {
        check(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }

    MultiPoly& operator-=(const MultiPoly& o) {
        check(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -static_cast<std::int64_t>(c));
        return *this;
    }

    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }

    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        a.check(b);
        MultiPoly r(a.ctx_, a.nvars_);
        const std::uint64_t p = a.ctx_.characteristic();
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e(a.nvars_);
                for (std::size_t i = 0; i < a.nvars_; ++i) e[i] = ea[i] + eb[i];
                r.add_term(std::move(e), static_cast<std::int64_t>(std::uint64_t{ca} * cb % p));
            }
        }
        return r;
    }

    friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
        return a.ctx_ == b.ctx_ && a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
    }

private:
    void check(const MultiPoly& o) const {
        if (!(ctx_ == o.ctx_) || nvars_ != o.nvars_) throw DomainError("polynomial ring mismatch");
    }

    FieldCtx ctx_;
    std::size_t nvars_;
    TermMap terms_;
};

inline FieldElement evaluate(const MultiPoly& f, std::span<const std::uint32_t> x) { return f.evaluate(x); }

/// All exponent vectors of total degree <= degree, graded then lexicographic. Size C(nvars+degree, nvars).
inline std::vector<Exponents> monomials_up_to(std::size_t nvars, std::size_t degree) {
    std::vector<Exponents> out;
    Exponents e(nvars, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t remaining) {
        if (i + 1 == nvars) {
            e[i] = static_cast<std::uint32_t>(remaining);
            out.push_back(e);
            return;
        }
        for (std::size_t k = remaining + 1; k-- > 0;) {
            e[i] = static_cast<std::uint32_t>(k);
            rec(i + 1, remaining - k);
        }
    };
    if (nvars == 0) return {Exponents{}};
    for (std::size_t total = 0; total <= degree; ++total) rec(0, total);
    return out;
}

/// Uniform polynomial of total degree <= degree: every monomial coefficient i.i.d. uniform in F_p.
inline MultiPoly sample_uniform(const FieldCtx& ctx, std::size_t nvars, std::size_t degree, CounterRng& rng) {
    if (nvars == 0) throw DomainError("sample_uniform: need at least one variable");
    MultiPoly f(ctx, nvars);
    for (auto& e : monomials_up_to(nvars, degree)) {
        f.add_term(std::move(e), static_cast<std::int64_t>(rng.uniform_below(ctx.characteristic())));
    }
    return f;
}

/// F_p-rational zeros of f in lexicographic order.
inline std::vector<Point> zero_set(const MultiPoly& f, std::uint64_t cap = default_enumeration_cap) {
    std::vector<Point> out;
    for_each_point(f.ctx().characteristic(), f.nvars(), cap, [&](const Point& x) {
        if (f.eval_residue(x) == 0) out.push_back(x);
    });
    return out;
}

/// Number of F_p-rational zeros, without materializing them.
inline std::uint64_t zero_count(const MultiPoly& f, std::uint64_t cap = default_enumeration_cap) {
    std::uint64_t n = 0;
    for_each_point(f.ctx().characteristic(), f.nvars(), cap, [&](const Point& x) {
        if (f.eval_residue(x) == 0) ++n;
    });
    return n;
}

/// Substitutes q for the trailing q.size() variables: result(x) = f(x, q).
inline MultiPoly bivariate_section(const MultiPoly& f, std::span<const std::uint32_t> q) {
    if (q.size() > f.nvars()) throw DomainError("section point has more coordinates than the polynomial");
    const std::size_t keep = f.nvars() - q.size();
    const std::uint64_t p = f.ctx().characteristic();
    MultiPoly r(f.ctx(), keep);
    for (const auto& [e, c] : f.terms()) {
        std::uint64_t t = c;
        for (std::size_t j = 0; j < q.size(); ++j) {
            for (std::uint32_t k = 0; k < e[keep + j]; ++k) t = t * q[j] % p;
        }
        r.add_term(Exponents(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(keep)), static_cast<std::int64_t>(t));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Fixture text: "p=7; vars=2; 3*x0^2*x1 + 1"

inline std::string to_fixture(const MultiPoly& f) {
    std::ostringstream os;
    os << "p=" << f.ctx().characteristic() << "; vars=" << f.nvars() << "; ";
    if (f.is_zero()) {
        os << "0";
        return os.str();
    }
    // descending total degree, then descending lexicographic
    std::vector<std::pair<Exponents, std::uint32_t>> terms(f.terms().begin(), f.terms().end());
    auto deg = [](const Exponents& e) {
        std::size_t s = 0;
        for (auto x : e) s += x;
        return s;
    };
    std::sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
        if (deg(a.first) != deg(b.first)) return deg(a.first) > deg(b.first);
        return a.first > b.first;
    });
    bool first = true;
    for (const auto& [e, c] : terms) {
        if (!first) os << " + ";
        first = false;
        std::string mono;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += "x" + std::to_string(i);
            if (e[i] > 1) mono += "^" + std::to_string(e[i]);
        }
        if (mono.empty()) {
            os << c;
        } else if (c == 1) {
            os << mono;
        } else {
            os << c << "*" << mono;
        }
    }
    return os.str();
}

namespace detail {

class PolyParser {
public:
    PolyParser(std::string_view text, const FieldCtx& ctx, std::size_t nvars)
        : s_(text), f_(ctx, nvars), nvars_(nvars) {}

    MultiPoly parse() {
        skip();
        int sign = 1;
        if (peek() == '-') {
            sign = -1;
            ++i_;
        } else if (peek() == '+') {
            ++i_;
        }
        term(sign);
        while (true) {
            skip();
            if (i_ >= s_.size()) break;
            const char op = s_[i_++];
            if (op != '+' && op != '-') fail("expected '+' or '-'");
            term(op == '-' ? -1 : 1);
        }
        return std::move(f_);
    }

private:
    void term(int sign) {
        skip();
        std::int64_t coeff = 1;
        Exponents e(nvars_, 0);
        bool have_factor = false;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            coeff = number();
            have_factor = true;
            skip();
            if (peek() != '*') {
                f_.add_term(e, sign * coeff);
                return;
            }
            ++i_;
        }
        while (true) {
            skip();
            if (peek() != 'x') {
                if (!have_factor) fail("expected a coefficient or variable");
                fail("expected a variable after '*'");
            }
            ++i_;
            const auto idx = static_cast<std::size_t>(number());
            if (idx >= nvars_) fail("variable index out of range");
            std::uint32_t power = 1;
            skip();
            if (peek() == '^') {
                ++i_;
                skip();
                power = static_cast<std::uint32_t>(number());
            }
            e[idx] += power;
            have_factor = true;
            skip();
            if (peek() != '*') break;
            ++i_;
        }
        f_.add_term(std::move(e), sign * (coeff % static_cast<std::int64_t>(f_.ctx().characteristic())));
    }

    std::int64_t number() {
        skip();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected a number");
        std::int64_t v = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (s_[i_++] - '0');
            if (v > (std::int64_t{1} << 50)) fail("number too large");
        }
        return v;
    }

    char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("polynomial parse error at offset " + std::to_string(i_) + ": " + what);
    }

    std::string_view s_;
    std::size_t i_ = 0;
    MultiPoly f_;
    std::size_t nvars_;
};

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

}  // namespace detail

inline MultiPoly parse_poly(std::string_view text) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ';') {
            fields.push_back(detail::trim(text.substr(start, i - start)));
            start = i + 1;
        }
    }
    if (fields.size() != 3) throw ParseError("polynomial fixture needs 'p=..; vars=..; body'");
    auto header = [&](const std::string& field, const std::string& key) -> std::uint64_t {
        if (field.rfind(key + "=", 0) != 0) throw ParseError("expected '" + key + "=' in polynomial fixture");
        try {
            return std::stoull(detail::trim(std::string_view(field).substr(key.size() + 1)));
        } catch (const std::exception&) {
            throw ParseError("bad value for '" + key + "'");
        }
    };
    const auto ctx = FieldCtx::prime(header(fields[0], "p"));
    const auto nvars = static_cast<std::size_t>(header(fields[1], "vars"));
    return detail::PolyParser(fields[2], ctx, nvars).parse();
}

}  // namespace ffil
