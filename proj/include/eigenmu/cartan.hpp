#pragma once

// Quadratic rings over Z_ell and the matrix subgroups they cut out of GL2.
//
// A monic quadratic X^2 - c0*X - d0 determines the ring
// R = Z_ell[X]/(X^2 - c0*X - d0).  Acting on itself, R embeds into the 2x2
// matrices; the unit groups of such embeddings are the Cartan subgroups of
// GL2(Z_ell).  This header normalizes the defining polynomial to a shape
// with few cases, classifies the ring (split / nonsplit / ramified pipeline),
// and exposes membership tests, element builders, group orders at finite
// level, and the tangent-space counts the measure engine consumes.

#include <utility>

#include <eigenmu/modarith.hpp>

namespace eigenmu {

// Pipeline class of the normalized ring.  Split and Nonsplit mean the ring
// is the maximal split torus / the unramified quadratic extension.  Ramified
// covers every normalized shape (0, d); for ell = 2 that bucket also holds
// discriminants that are 4 * square, which later transfer into a split model
// at higher level.
enum class RingClass { Split, Nonsplit, Ramified };

inline const char* ring_class_name(RingClass c) {
    switch (c) {
        case RingClass::Split: return "split";
        case RingClass::Nonsplit: return "nonsplit";
        default: return "ramified";
    }
}

// Counts in the "tangent space" of a group at the identity: solutions of the
// defining linear shape over the residue field.  `sing` counts the nonzero
// non-units; it controls which strata survive one level up.
struct TangentCounts {
    BigInt total;
    BigInt units;
    BigInt sing;
};

inline TangentCounts tangent_counts_gl2(Prime ell) {
    BigInt l = ell.value;
    BigInt units = (l * l - 1) * (l * l - l);
    BigInt total = big_pow(l, 4);
    return {total, units, total - units - 1};
}

// A normalized quadratic ring together with its class.
//
// Normalized parameters (c, d) mean the polynomial X^2 - cX - d with either
// c = 0, or (only for ell = 2) c = 1 with d = 0 (split) or d odd (nonsplit).
// Completing the square reduces any input to this shape without changing the
// unit group up to isomorphism: for odd c0 and odd ell the substitution also
// rescales d by the square unit 4 to stay integral.
class QuadRing {
public:
    // Normalize and classify X^2 - c0*X - d0 over Z_ell.
    static QuadRing from_poly(Prime ell, const BigInt& c0, const BigInt& d0) {
        BigInt c, d;
        bool c0_even = mod_nonneg(c0, 2) == 0;
        if (c0_even) {
            c = 0;
            d = d0 + (c0 / 2) * (c0 / 2);
        } else if (ell.odd()) {
            c = 0;
            d = 4 * d0 + c0 * c0;
        } else {
            // ell = 2, odd c0: shift X by (c0-1)/2 to reach c = 1.
            BigInt d1 = d0 + (c0 * c0 - 1) / 4;
            if (mod_nonneg(d1, 2) == 1) {
                c = 1;
                d = d1;
            } else {
                // Discriminant 1 + 4*d1 == 1 mod 8 is a square unit, so the
                // ring is the maximal split one; X^2 - X is its fixed model.
                c = 1;
                d = 0;
            }
        }
        if (c == 0 && d == 0)
            throw DomainError("degenerate quadratic: zero discriminant");
        return QuadRing(ell, c, d);
    }

    // Wrap already-normalized parameters (validated).
    static QuadRing from_normalized(Prime ell, const BigInt& c, const BigInt& d) {
        if (c == 0) {
            if (d == 0) throw DomainError("degenerate quadratic: zero discriminant");
        } else if (!ell.odd() && c == 1) {
            if (d != 0 && mod_nonneg(d, 2) != 1)
                throw PreconditionError("normalized shape (1, d) requires d = 0 or d odd");
        } else {
            throw PreconditionError("parameters are not in normalized shape");
        }
        return QuadRing(ell, c, d);
    }

    Prime ell() const { return ell_; }
    const BigInt& c() const { return c_; }
    const BigInt& d() const { return d_; }
    RingClass cls() const { return cls_; }

    // The element x + y*X of the ring, as a matrix mod ell^prec:
    // X acts by [[0, d], [1, c]].
    MatMod element(int prec, const BigInt& x, const BigInt& y) const {
        return MatMod(ell_, prec, {x, d_ * y, y, x + c_ * y});
    }

    // The "reflection" coset representative shape: z + w*X conjugated by the
    // standard involution, i.e. [[z, c*z - d*w], [w, -z]].  Together with the
    // ring elements these fill out the normalizer of the Cartan subgroup.
    MatMod reflection(int prec, const BigInt& z, const BigInt& w) const {
        return MatMod(ell_, prec, {z, c_ * z - d_ * w, w, -z});
    }

    // Invertible matrix of ring shape?  (x, y) can be read off as
    // (m11, m21) when true.
    bool in_cartan(const MatMod& m) const {
        require_prime(m);
        BigInt mod = prime_pow(ell_, static_cast<unsigned>(m.prec()));
        return mod_nonneg(m.entry(0, 1) - d_ * m.entry(1, 0), mod) == 0 &&
               mod_nonneg(m.entry(1, 1) - m.entry(0, 0) - c_ * m.entry(1, 0), mod) == 0 &&
               m.invertible();
    }

    // Invertible matrix of reflection shape?  (z, w) = (m11, m21) when true.
    bool in_reflection(const MatMod& m) const {
        require_prime(m);
        BigInt mod = prime_pow(ell_, static_cast<unsigned>(m.prec()));
        return mod_nonneg(m.entry(0, 1) - c_ * m.entry(0, 0) + d_ * m.entry(1, 0), mod) == 0 &&
               mod_nonneg(m.entry(1, 1) + m.entry(0, 0), mod) == 0 &&
               m.invertible();
    }

    bool in_normalizer(const MatMod& m) const { return in_cartan(m) || in_reflection(m); }

    // Eigenvalues of a split-Cartan element, in a deterministic order.
    // For c = 0 they are x -+ y*sqrt(d) (canonical root); for the ell = 2
    // model X^2 - X the element x + y*X is lower triangular with eigenvalues
    // (x, x + y).
    std::pair<Residue, Residue> split_diagonalize(const MatMod& m) const {
        if (cls_ != RingClass::Split) throw PreconditionError("split_diagonalize requires the split class");
        if (!in_cartan(m)) throw PreconditionError("matrix is not a unit of this ring");
        int prec = m.prec();
        Residue x(ell_, prec, m.entry(0, 0));
        Residue y(ell_, prec, m.entry(1, 0));
        if (c_ == 0) {
            Residue s = sqrt_hensel(d_, ell_, prec).reduce(prec);
            return {x - y * s, x + y * s};
        }
        return {x, x + y};
    }

    // Order of the unit group at level n (matrices mod ell^n of ring shape
    // with unit determinant).
    BigInt cartan_order(int n) const {
        if (n < 1) throw PreconditionError("level must be >= 1");
        BigInt l = ell_.value;
        BigInt base;
        switch (cls_) {
            case RingClass::Split: base = (l - 1) * (l - 1); break;
            case RingClass::Nonsplit: base = l * l - 1; break;
            default: base = l * (l - 1); break;
        }
        return base * big_pow(l, static_cast<unsigned>(2 * (n - 1)));
    }

    // Order of the normalizer at level n.  For ell = 2 in the ramified
    // pipeline the two cosets only separate from level 2 on, so level 1 is
    // refused there.
    BigInt normalizer_order(int n) const {
        if (!ell_.odd() && cls_ == RingClass::Ramified && n < 2)
            throw PreconditionError("normalizer needs level >= 2 here: the cosets coincide mod 2");
        return 2 * cartan_order(n);
    }

    TangentCounts tangent_counts() const {
        BigInt l = ell_.value;
        BigInt total = l * l;
        BigInt units;
        switch (cls_) {
            case RingClass::Split: units = (l - 1) * (l - 1); break;
            case RingClass::Nonsplit: units = l * l - 1; break;
            default: units = l * (l - 1); break;
        }
        return {total, units, total - units - 1};
    }

private:
    QuadRing(Prime ell, BigInt c, BigInt d) : ell_(ell), c_(std::move(c)), d_(std::move(d)) {
        if (c_ != 0) {
            cls_ = (d_ == 0) ? RingClass::Split : RingClass::Nonsplit;
        } else if (ell_.odd() && valuation(d_, ell_) == 0) {
            cls_ = is_square_unit(d_, ell_) ? RingClass::Split : RingClass::Nonsplit;
        } else {
            cls_ = RingClass::Ramified;
        }
    }

    void require_prime(const MatMod& m) const {
        if (m.ell() != ell_) throw PrecisionError("matrix prime differs from ring prime");
    }

    Prime ell_;
    BigInt c_, d_;
    RingClass cls_;
};

// Order of GL2(Z/ell^n).
inline BigInt gl2_order(Prime ell, int n) {
    if (n < 1) throw PreconditionError("level must be >= 1");
    BigInt l = ell.value;
    return big_pow(l, static_cast<unsigned>(4 * (n - 1))) * (l * l - 1) * (l * l - l);
}

} // namespace eigenmu
