#pragma once

// Prime fields F_p and the quadratic extension F_{p^2} = F_p[alpha]/(alpha^2 + 1).

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

#include "ffil/error.hpp"

namespace ffil {

namespace detail {

inline std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod64(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (e != 0) {
        if (e & 1) r = mulmod64(r, base, m);
        base = mulmod64(base, base, m);
        e >>= 1;
    }
    return r;
}

}  // namespace detail

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = detail::powmod64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = detail::mulmod64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

struct ResidueClass {
    std::uint64_t residue;
    std::uint64_t modulus;
};

/// Smallest prime strictly greater than `lower`, optionally restricted to a residue class.
/// The search stops at 4*lower + 16; hitting it raises ResourceError.
inline std::uint64_t find_prime(std::uint64_t lower, std::optional<ResidueClass> cls = std::nullopt) {
    if (lower < 2) throw DomainError("find_prime: lower bound must be at least 2");
    if (cls) {
        if (cls->modulus == 0) throw DomainError("find_prime: zero modulus");
        std::uint64_t a = cls->residue % cls->modulus, b = cls->modulus;
        while (b != 0) a = std::exchange(b, a % b);
        if (a != 1) throw DomainError("find_prime: residue class is not coprime to its modulus");
    }
    const std::uint64_t cap = 4 * lower + 16;
    for (std::uint64_t c = lower + 1; c <= cap; ++c) {
        if (cls && c % cls->modulus != cls->residue % cls->modulus) continue;
        if (is_prime(c)) return c;
    }
    throw ResourceError("find_prime: no prime found below search cap " + std::to_string(cap));
}

enum class FieldKind : std::uint8_t { prime, quadratic };

class FieldElement;

/// Field description. Immutable value; copying is cheap.
class FieldCtx {
public:
    static constexpr std::uint64_t max_modulus = std::uint64_t{1} << 31;

    static FieldCtx prime(std::uint64_t p) { return FieldCtx(FieldKind::prime, p); }

    /// F_{p^2} with alpha^2 = -1; requires p = 3 mod 4 so that x^2 + 1 is irreducible.
    static FieldCtx quadratic(std::uint64_t p) {
        if (p % 4 != 3) throw DomainError("quadratic extension requires p = 3 mod 4");
        return FieldCtx(FieldKind::quadratic, p);
    }

    FieldKind kind() const noexcept { return kind_; }
    bool is_prime_field() const noexcept { return kind_ == FieldKind::prime; }
    std::uint32_t characteristic() const noexcept { return p_; }
    std::uint64_t order() const noexcept {
        return is_prime_field() ? p_ : std::uint64_t{p_} * p_;
    }

    FieldCtx base() const noexcept { return FieldCtx(FieldKind::prime, p_, nullptr); }

    FieldElement zero() const;
    FieldElement one() const;
    FieldElement from_int(std::int64_t v) const;
    FieldElement make(std::uint32_t a, std::uint32_t b = 0) const;
    /// Bijection [0, order) -> field; index = a + b*p.
    FieldElement element(std::uint64_t index) const;

    std::uint32_t reduce(std::int64_t v) const noexcept {
        const auto p = static_cast<std::int64_t>(p_);
        auto r = v % p;
        return static_cast<std::uint32_t>(r < 0 ? r + p : r);
    }

    friend bool operator==(const FieldCtx&, const FieldCtx&) = default;

    std::string describe() const {
        return is_prime_field() ? "F_" + std::to_string(p_) : "F_" + std::to_string(p_) + "^2";
    }

private:
    FieldCtx(FieldKind kind, std::uint64_t p) : kind_(kind), p_(0) {
        if (p >= max_modulus) throw DomainError("modulus must be below 2^31");
        if (!is_prime(p)) throw DomainError("modulus " + std::to_string(p) + " is not prime");
        p_ = static_cast<std::uint32_t>(p);
    }
    FieldCtx(FieldKind kind, std::uint32_t p, std::nullptr_t) noexcept : kind_(kind), p_(p) {}

    FieldKind kind_;
    std::uint32_t p_;
};

/// Element a + b*alpha (b = 0 in a prime field), residues kept in [0, p).
class FieldElement {
public:
    FieldElement(const FieldCtx& ctx, std::uint32_t a, std::uint32_t b) noexcept : ctx_(ctx), a_(a), b_(b) {}

    const FieldCtx& ctx() const noexcept { return ctx_; }
    std::uint32_t re() const noexcept { return a_; }
    std::uint32_t im() const noexcept { return b_; }
    bool is_zero() const noexcept { return a_ == 0 && b_ == 0; }
    bool is_one() const noexcept { return a_ == 1 && b_ == 0; }
    std::uint64_t index() const noexcept { return a_ + std::uint64_t{b_} * ctx_.characteristic(); }

    FieldElement& operator+=(const FieldElement& o) {
        check(o);
        a_ = add(a_, o.a_);
        b_ = add(b_, o.b_);
        return *this;
    }
    FieldElement& operator-=(const FieldElement& o) {
        check(o);
        a_ = sub(a_, o.a_);
        b_ = sub(b_, o.b_);
        return *this;
    }
    FieldElement& operator*=(const FieldElement& o) {
        check(o);
        const std::uint64_t p = ctx_.characteristic();
        if (ctx_.is_prime_field()) {
            a_ = static_cast<std::uint32_t>(std::uint64_t{a_} * o.a_ % p);
        } else {
            // (a + b alpha)(c + d alpha) = (ac - bd) + (ad + bc) alpha
            const std::uint64_t ac = std::uint64_t{a_} * o.a_ % p;
            const std::uint64_t bd = std::uint64_t{b_} * o.b_ % p;
            const std::uint64_t ad = std::uint64_t{a_} * o.b_ % p;
            const std::uint64_t bc = std::uint64_t{b_} * o.a_ % p;
            a_ = static_cast<std::uint32_t>((ac + p - bd) % p);
            b_ = static_cast<std::uint32_t>((ad + bc) % p);
        }
        return *this;
    }
    FieldElement& operator/=(const FieldElement& o) { return *this *= o.inverse(); }

    friend FieldElement operator+(FieldElement x, const FieldElement& y) { return x += y; }
    friend FieldElement operator-(FieldElement x, const FieldElement& y) { return x -= y; }
    friend FieldElement operator*(FieldElement x, const FieldElement& y) { return x *= y; }
    friend FieldElement operator/(FieldElement x, const FieldElement& y) { return x /= y; }
    FieldElement operator-() const { return FieldElement(ctx_, neg(a_), neg(b_)); }

    friend bool operator==(const FieldElement&, const FieldElement&) = default;

    /// Norm to the prime field: a^2 + b^2 (since alpha^2 = -1).
    std::uint32_t norm() const noexcept {
        const std::uint64_t p = ctx_.characteristic();
        return static_cast<std::uint32_t>((std::uint64_t{a_} * a_ + std::uint64_t{b_} * b_) % p);
    }

    FieldElement conjugate() const noexcept { return FieldElement(ctx_, a_, neg(b_)); }

    FieldElement inverse() const {
        if (is_zero()) throw DomainError("no inverse of zero");
        const std::uint32_t p = ctx_.characteristic();
        if (ctx_.is_prime_field()) return FieldElement(ctx_, inverse_mod(a_, p), 0);
        // x^{-1} = conj(x) / N(x); N(x) != 0 because -1 is a non-square mod p
        const std::uint64_t n_inv = inverse_mod(norm(), p);
        return FieldElement(ctx_, static_cast<std::uint32_t>(a_ * n_inv % p),
                            static_cast<std::uint32_t>(neg(b_) * n_inv % p));
    }

    FieldElement pow(std::uint64_t e) const {
        FieldElement r = ctx_.one(), b = *this;
        while (e != 0) {
            if (e & 1) r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    }

    std::string to_string() const {
        if (ctx_.is_prime_field()) return std::to_string(a_);
        return "(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
    }

    friend std::ostream& operator<<(std::ostream& os, const FieldElement& x) { return os << x.to_string(); }

private:
    static std::uint32_t inverse_mod(std::uint32_t x, std::uint32_t p) {
        // extended Euclid on (x, p)
        std::int64_t r0 = p, r1 = x, t0 = 0, t1 = 1;
        while (r1 != 0) {
            const std::int64_t q = r0 / r1;
            r0 = std::exchange(r1, r0 - q * r1);
            t0 = std::exchange(t1, t0 - q * t1);
        }
        if (t0 < 0) t0 += p;
        return static_cast<std::uint32_t>(t0);
    }

    void check(const FieldElement& o) const {
        if (!(ctx_ == o.ctx_)) throw DomainError("field mismatch: " + ctx_.describe() + " vs " + o.ctx_.describe());
    }
    std::uint32_t add(std::uint32_t x, std::uint32_t y) const noexcept {
        const std::uint64_t s = std::uint64_t{x} + y;
        return static_cast<std::uint32_t>(s >= ctx_.characteristic() ? s - ctx_.characteristic() : s);
    }
    std::uint32_t sub(std::uint32_t x, std::uint32_t y) const noexcept {
        return x >= y ? x - y : static_cast<std::uint32_t>(std::uint64_t{x} + ctx_.characteristic() - y);
    }
    std::uint32_t neg(std::uint32_t x) const noexcept { return x == 0 ? 0 : ctx_.characteristic() - x; }

    FieldCtx ctx_;
    std::uint32_t a_;
    std::uint32_t b_;
};

inline FieldElement FieldCtx::zero() const { return FieldElement(*this, 0, 0); }
inline FieldElement FieldCtx::one() const { return FieldElement(*this, 1, 0); }
inline FieldElement FieldCtx::from_int(std::int64_t v) const { return FieldElement(*this, reduce(v), 0); }

inline FieldElement FieldCtx::make(std::uint32_t a, std::uint32_t b) const {
    if (is_prime_field() && b != 0) throw DomainError("prime field element with nonzero alpha part");
    return FieldElement(*this, a % p_, b % p_);
}

inline FieldElement FieldCtx::element(std::uint64_t index) const {
    if (index >= order()) throw DomainError("element index out of range");
    return FieldElement(*this, static_cast<std::uint32_t>(index % p_), static_cast<std::uint32_t>(index / p_));
}

inline FieldElement field_inverse(const FieldElement& x) { return x.inverse(); }

/// A square root of -1. In F_{p^2} this is alpha itself; in F_p it exists iff p != 3 mod 4.
inline FieldElement solve_unit_alpha(const FieldCtx& ctx) {
    if (!ctx.is_prime_field()) return ctx.make(0, 1);
    const std::uint32_t p = ctx.characteristic();
    if (p == 2) return ctx.one();
    if (p % 4 == 3) throw DomainError("no square root of -1 in " + ctx.describe());
    const FieldElement minus_one = -ctx.one();
    for (std::uint32_t c = 2; c < p; ++c) {
        // c^{(p-1)/4} squares to the Legendre symbol of c, so a non-residue c gives sqrt(-1)
        FieldElement t = ctx.make(c).pow((p - 1) / 4);
        if (t * t == minus_one) return t;
    }
    throw DomainError("no square root of -1 in " + ctx.describe());
}

}  // namespace ffil
