#pragma once

// Exact arithmetic mod prime powers with explicit precision tracking.
//
// Everything downstream (group enumeration, eigenspace classification,
// measure computation) works with finite-precision data: a matrix known
// modulo ell^prec.  Quantities derived from such data are only known to a
// certain precision themselves, so valuations are reported as TruncVal
// (exactly v, or only ">= v") and residues refuse to silently mix
// precisions.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace eigenmu {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Error taxonomy.  The CLI maps these onto exit codes; library users can
// catch the base class.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Arithmetic between operands of different precision or different prime.
struct PrecisionError : Error {
    using Error::Error;
};

// Caller violated a documented precondition.
struct PreconditionError : Error {
    using Error::Error;
};

// Mathematically invalid input (non-prime modulus, non-square radicand,
// degenerate quadratic ring, ...).
struct DomainError : Error {
    using Error::Error;
};

// Malformed problem description (bad JSON, generators outside the ambient
// group, inconsistent level, ...).
struct SpecError : Error {
    using Error::Error;
};

// An enumeration would exceed the configured cardinality budget.
struct ResourceError : Error {
    using Error::Error;
};

// An internal cross-check failed; indicates a bug, never user error.
struct ConsistencyError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Primes and powers.
// ---------------------------------------------------------------------------

// A (small) prime.  Validated at construction; everything else may then
// assume primality.
struct Prime {
    std::uint32_t value = 2;

    Prime() = default;
    explicit Prime(std::uint64_t p) {
        if (p < 2 || p > 0xffffffffull) throw DomainError("prime out of range: " + std::to_string(p));
        for (std::uint64_t q = 2; q * q <= p; ++q)
            if (p % q == 0) throw DomainError("not a prime: " + std::to_string(p));
        value = static_cast<std::uint32_t>(p);
    }

    bool operator==(const Prime& o) const { return value == o.value; }
    bool operator!=(const Prime& o) const { return value != o.value; }
    bool odd() const { return value != 2; }
};

inline BigInt big_pow(const BigInt& base, unsigned e) {
    BigInt r = 1, b = base;
    for (unsigned k = e; k; k >>= 1) {
        if (k & 1) r *= b;
        b *= b;
    }
    return r;
}

inline BigInt prime_pow(Prime ell, unsigned e) { return big_pow(BigInt(ell.value), e); }

// ell^e as a machine word; throws ResourceError when it does not fit the
// range where products of two residues are still exact in 64 bits.
inline std::uint64_t prime_pow_u64(Prime ell, unsigned e) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) {
        if (r > (1ull << 31) / ell.value) throw ResourceError("modulus too large for machine-word enumeration");
        r *= ell.value;
    }
    return r;
}

// Nonnegative representative of n modulo m (m > 0).
inline BigInt mod_nonneg(const BigInt& n, const BigInt& m) {
    BigInt r = n % m;
    if (r < 0) r += m;
    return r;
}

// ell-adic valuation of a nonzero integer.
inline int valuation(BigInt n, Prime ell) {
    if (n == 0) throw PreconditionError("valuation of zero is undefined");
    if (n < 0) n = -n;
    int v = 0;
    while (n % ell.value == 0) {
        n /= ell.value;
        ++v;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Truncated valuations: what can be said about v_ell(x) when x is only
// known modulo ell^c.
// ---------------------------------------------------------------------------

struct TruncVal {
    int bound = 0;     // the valuation, or a lower bound for it
    bool exact = true; // true: v == bound; false: v >= bound

    static TruncVal Exact(int v) { return {v, true}; }
    static TruncVal AtLeast(int v) { return {v, false}; }

    bool operator==(const TruncVal& o) const { return bound == o.bound && exact == o.exact; }
    bool operator!=(const TruncVal& o) const { return !(*this == o); }

    // Is the valuation provably >= v / provably == v?
    bool at_least(int v) const { return bound >= v; }
    bool exactly(int v) const { return exact && bound == v; }

    std::string str() const {
        return (exact ? "=" : ">=") + std::to_string(bound);
    }
};

// Truncated valuation of an integer known modulo ell^cap: Exact(v) when the
// valuation is visible below the cap, AtLeast(cap) otherwise.
inline TruncVal trunc_valuation(const BigInt& n, Prime ell, int cap) {
    if (n == 0) return TruncVal::AtLeast(cap);
    int v = valuation(n, ell);
    return v >= cap ? TruncVal::AtLeast(cap) : TruncVal::Exact(v);
}

// ---------------------------------------------------------------------------
// Residues mod ell^prec.
// ---------------------------------------------------------------------------

class Residue {
public:
    Residue(Prime ell, int prec, BigInt v) : ell_(ell), prec_(prec) {
        if (prec < 1) throw PreconditionError("residue precision must be >= 1");
        value_ = mod_nonneg(v, prime_pow(ell, static_cast<unsigned>(prec)));
    }

    Prime ell() const { return ell_; }
    int prec() const { return prec_; }
    const BigInt& value() const { return value_; }

    bool is_unit() const { return value_ % ell_.value != 0; }

    Residue operator+(const Residue& o) const { return combined(o, value_ + o.value_); }
    Residue operator-(const Residue& o) const { return combined(o, value_ - o.value_); }
    Residue operator*(const Residue& o) const { return combined(o, value_ * o.value_); }
    Residue operator-() const { return Residue(ell_, prec_, -value_); }

    bool operator==(const Residue& o) const {
        require_compatible(o);
        return value_ == o.value_;
    }
    bool operator!=(const Residue& o) const { return !(*this == o); }

    // Multiplicative inverse; the residue must be a unit.
    Residue inverse() const {
        if (!is_unit()) throw DomainError("residue is not a unit, cannot invert");
        // Extended Euclid against ell^prec.
        BigInt m = prime_pow(ell_, static_cast<unsigned>(prec_));
        BigInt r0 = m, r1 = value_, s0 = 0, s1 = 1;
        while (r1 != 0) {
            BigInt q = r0 / r1;
            BigInt r2 = r0 - q * r1;
            BigInt s2 = s0 - q * s1;
            r0 = r1; r1 = r2;
            s0 = s1; s1 = s2;
        }
        if (r0 != 1) throw ConsistencyError("inverse: gcd with prime power is not 1");
        return Residue(ell_, prec_, s0);
    }

    // Drop to a lower precision (the image under reduction).
    Residue reduce(int new_prec) const {
        if (new_prec < 1 || new_prec > prec_) throw PreconditionError("invalid reduction precision");
        return Residue(ell_, new_prec, value_);
    }

private:
    Residue combined(const Residue& o, BigInt raw) const {
        require_compatible(o);
        return Residue(ell_, prec_, std::move(raw));
    }
    void require_compatible(const Residue& o) const {
        if (ell_ != o.ell_ || prec_ != o.prec_)
            throw PrecisionError("residue arithmetic requires matching prime and precision");
    }

    Prime ell_;
    int prec_;
    BigInt value_;
};

// ---------------------------------------------------------------------------
// 2x2 matrices mod ell^prec (row-major entries m11, m12, m21, m22).
// ---------------------------------------------------------------------------

class MatMod {
public:
    MatMod(Prime ell, int prec, std::array<BigInt, 4> entries) : ell_(ell), prec_(prec) {
        if (prec < 1) throw PreconditionError("matrix precision must be >= 1");
        BigInt m = prime_pow(ell, static_cast<unsigned>(prec));
        for (int i = 0; i < 4; ++i) e_[i] = mod_nonneg(entries[i], m);
    }

    static MatMod identity(Prime ell, int prec) {
        return MatMod(ell, prec, {BigInt(1), BigInt(0), BigInt(0), BigInt(1)});
    }
    static MatMod from_ints(Prime ell, int prec, long long a, long long b, long long c, long long d) {
        return MatMod(ell, prec, {BigInt(a), BigInt(b), BigInt(c), BigInt(d)});
    }

    Prime ell() const { return ell_; }
    int prec() const { return prec_; }
    const BigInt& entry(int r, int c) const { return e_[2 * r + c]; }
    const std::array<BigInt, 4>& entries() const { return e_; }

    MatMod operator*(const MatMod& o) const {
        require_compatible(o);
        return MatMod(ell_, prec_,
                      {e_[0] * o.e_[0] + e_[1] * o.e_[2], e_[0] * o.e_[1] + e_[1] * o.e_[3],
                       e_[2] * o.e_[0] + e_[3] * o.e_[2], e_[2] * o.e_[1] + e_[3] * o.e_[3]});
    }

    bool operator==(const MatMod& o) const {
        require_compatible(o);
        return e_ == o.e_;
    }
    bool operator!=(const MatMod& o) const { return !(*this == o); }

    Residue det() const { return Residue(ell_, prec_, e_[0] * e_[3] - e_[1] * e_[2]); }
    bool invertible() const { return det().is_unit(); }

    MatMod reduce(int new_prec) const {
        if (new_prec < 1 || new_prec > prec_) throw PreconditionError("invalid reduction precision");
        return MatMod(ell_, new_prec, e_);
    }

    // Largest k <= prec with M == I mod ell^k (0 when M != I mod ell).
    int identity_level() const {
        int best = prec_;
        for (int i = 0; i < 4; ++i) {
            BigInt diff = e_[i] - ((i == 0 || i == 3) ? 1 : 0);
            if (diff == 0) continue; // exact up to stored precision
            best = std::min(best, std::min(valuation(diff, ell_), prec_));
            if (best == 0) break;
        }
        return best;
    }

    bool congruent_identity(int k) const {
        if (k < 0 || k > prec_) throw PreconditionError("congruence level out of range");
        return identity_level() >= k;
    }

    std::string str() const {
        return "[[" + e_[0].str() + ", " + e_[1].str() + "], [" + e_[2].str() + ", " + e_[3].str() + "]]";
    }

private:
    void require_compatible(const MatMod& o) const {
        if (ell_ != o.ell_ || prec_ != o.prec_)
            throw PrecisionError("matrix arithmetic requires matching prime and precision");
    }

    Prime ell_;
    int prec_;
    std::array<BigInt, 4> e_;
};

// Truncated valuation of det(M - I).
//
// When M is known mod ell^prec and M == I mod ell^a, every lift of M has
// det(M - I) in a fixed class mod ell^(a+prec), so the valuation is exact
// whenever it is < a + prec and otherwise only ">= a + prec" can be said.
inline TruncVal det_shifted_val(const MatMod& m, int a) {
    if (a < 0 || a > m.prec()) throw PreconditionError("shift out of range");
    if (m.identity_level() < a) throw PreconditionError("matrix is not congruent to identity at the given level");
    BigInt d = (m.entry(0, 0) - 1) * (m.entry(1, 1) - 1) - m.entry(0, 1) * m.entry(1, 0);
    return trunc_valuation(d, m.ell(), a + m.prec());
}

// ---------------------------------------------------------------------------
// Squares and square roots of ell-adic integers.
// ---------------------------------------------------------------------------

// Is the unit d a square in Z_ell?  (Quadratic residue mod ell for odd ell;
// congruent to 1 mod 8 for ell = 2.)
inline bool is_square_unit(const BigInt& d, Prime ell) {
    if (mod_nonneg(d, ell.value) == 0) throw PreconditionError("is_square_unit requires a unit");
    if (!ell.odd()) return mod_nonneg(d, 8) == 1;
    BigInt base = mod_nonneg(d, ell.value);
    return boost::multiprecision::powm(base, BigInt((ell.value - 1) / 2), BigInt(ell.value)) == 1;
}

// Square root of d = ell^(2k) * m (m a square unit) in Z_ell.
//
// Returns r = ell^k * u as a residue of precision prec + k, where u is a
// unit with u^2 == m mod ell^prec; hence r^2 == d mod ell^(prec+2k) holds
// for integer representatives.  Among the roots the one with the smallest
// integer unit part is chosen, so results are reproducible.
inline Residue sqrt_hensel(const BigInt& d, Prime ell, int prec) {
    if (prec < 1) throw PreconditionError("sqrt precision must be >= 1");
    if (d == 0) throw DomainError("square root of zero has no unit-scaled form");
    int w = valuation(d, ell);
    if (w % 2 != 0) throw DomainError("not a square in Z_ell: odd valuation");
    int k = w / 2;
    BigInt m = d / prime_pow(ell, static_cast<unsigned>(w));
    if (!is_square_unit(m, ell)) throw DomainError("not a square in Z_ell: unit part is a non-residue");

    BigInt mod = prime_pow(ell, static_cast<unsigned>(prec));
    BigInt mm = mod_nonneg(m, mod);
    BigInt u;
    if (ell.odd()) {
        // Root mod ell by search, then lift one digit at a time:
        // if u^2 == m mod ell^t, adjust u by a multiple of ell^t chosen via
        // the invertible derivative 2u.
        BigInt r0 = 0;
        for (std::uint32_t c = 1; c < ell.value; ++c)
            if (mod_nonneg(BigInt(c) * c - mm, ell.value) == 0) {
                r0 = c;
                break;
            }
        if (r0 == 0) throw ConsistencyError("sqrt_hensel: residue test and root search disagree");
        u = r0;
        BigInt step = ell.value;
        for (int t = 1; t < prec; ++t) {
            BigInt lift_mod = step * ell.value;
            BigInt err = mod_nonneg(mm - u * u, lift_mod);
            if (err != 0) {
                BigInt corr = (err / step) * Residue(ell, 1, 2 * u).inverse().value();
                u += mod_nonneg(corr, ell.value) * step;
            }
            step = lift_mod;
        }
        u %= mod;
        u = std::min(u, BigInt(mod - u));
    } else {
        // m == 1 mod 8.  Lift from u = 1: at each stage the failing bit is
        // repaired by adding 2^(t-1).  Finally take the least of the up to
        // four roots (+-u, +-u + 2^(prec-1)).
        u = 1;
        for (int t = 3; t < prec; ++t) {
            BigInt lift_mod = prime_pow(ell, static_cast<unsigned>(t + 1));
            if (mod_nonneg(u * u - mm, lift_mod) != 0) u += prime_pow(ell, static_cast<unsigned>(t - 1));
        }
        BigInt best = -1;
        for (const BigInt& cand : {u, BigInt(mod - u), mod_nonneg(u + mod / 2, mod), mod_nonneg(mod - u + mod / 2, mod)})
            if (mod_nonneg(cand * cand - mm, mod) == 0 && (best < 0 || cand < best)) best = cand;
        if (best < 0) throw ConsistencyError("sqrt_hensel: lost every 2-adic root candidate");
        u = best;
    }
    if (mod_nonneg(u * u - mm, mod) != 0) throw ConsistencyError("sqrt_hensel: lifted root fails its defining congruence");
    return Residue(ell, prec + k, prime_pow(ell, static_cast<unsigned>(k)) * u);
}

// "num/den" in lowest terms, denominator positive.
inline std::string rat_str(const Rat& r) {
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

} // namespace eigenmu
