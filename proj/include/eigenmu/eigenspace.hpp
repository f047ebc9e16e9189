#pragma once

// Classification of group elements by the shape of their 1-eigenspace, and
// streaming counts of those classes over a stored group.
//
// For M in GL2(Z_ell) with M congruent to the identity mod ell^a but not
// ell^(a+1), and det(M - I) of valuation 2a + b, the fixed points of M on
// (Z/ell^n)^2 form Z/ell^a x Z/ell^(a+b) for every large n.  The pair
// (a, b) is the stratum of M.  At finite precision the stratum may be only
// partially visible; classify() reports exactly what is determined.
//
// The scanner visits the image of a stored group at any modulus without
// materializing it: below the working level it reduces, above it it walks
// the lift fibers of each stored element in machine words.  All visits are
// charged against a Budget before the loop starts.

#include <array>
#include <cstdint>
#include <map>
#include <utility>

#include <eigenmu/cartan.hpp>
#include <eigenmu/modarith.hpp>
#include <eigenmu/subgroup.hpp>

namespace eigenmu {

// ---------------------------------------------------------------------------
// Stratum classification.
// ---------------------------------------------------------------------------

// What a single matrix mod ell^prec reveals about its stratum.
//   determined:  the stratum is exactly (a, b).
//   !determined: a is exact if a < prec (then b >= b_floor), and a lower
//                bound if a == prec (the matrix is I at this precision).
struct StratumClass {
    int a = 0;
    int b = 0; // only meaningful when determined
    bool determined = false;
    int b_floor = 0; // only meaningful when !determined

    bool operator==(const StratumClass& o) const {
        return a == o.a && determined == o.determined &&
               (determined ? b == o.b : b_floor == o.b_floor);
    }
};

namespace detail {

using u64 = std::uint64_t;
using i128 = __int128;

inline int raw_val_capped(u64 x, std::uint32_t ell, int cap) {
    if (x == 0) return cap;
    int v = 0;
    while (v < cap && x % ell == 0) {
        x /= ell;
        ++v;
    }
    return v;
}

inline TruncVal raw_trunc_val(i128 d, std::uint32_t ell, int cap) {
    if (d == 0) return TruncVal::AtLeast(cap);
    if (d < 0) d = -d;
    int v = 0;
    while (v < cap && d % ell == 0) {
        d /= ell;
        ++v;
    }
    return v >= cap ? TruncVal::AtLeast(cap) : TruncVal::Exact(v);
}

inline int raw_ident_level(const std::array<u64, 4>& e, std::uint32_t ell, int m, u64 mod) {
    int best = raw_val_capped((e[0] + mod - 1) % mod, ell, m);
    best = std::min(best, raw_val_capped(e[1], ell, best));
    best = std::min(best, raw_val_capped(e[2], ell, best));
    return std::min(best, raw_val_capped((e[3] + mod - 1) % mod, ell, best));
}

// det(M - I) from the stored representatives; exact as an integer, so valid
// for truncation at any cap <= ident_level + m.
inline i128 raw_det_shift(const std::array<u64, 4>& e) {
    return (i128(e[0]) - 1) * (i128(e[3]) - 1) - i128(e[1]) * i128(e[2]);
}

// det(M - I) for a trace-zero matrix ([[z, *], [w, -z]] reflection shape):
// equals 1 + det(M) = 1 - z^2 + d*w^2, and squares of residues mod 2^m are
// well defined mod 2^(m+1), so one extra digit is visible.  `d_ext` must be
// d reduced mod 2^(m+1).
inline i128 raw_det_shift_tracezero(const std::array<u64, 4>& e, u64 d_ext) {
    return i128(1) - i128(e[0]) * i128(e[0]) + i128(d_ext) * i128(e[2]) * i128(e[2]);
}

inline StratumClass raw_classify(const std::array<u64, 4>& e, std::uint32_t ell, int m, u64 mod) {
    int a = raw_ident_level(e, ell, m, mod);
    if (a == m) return {m, 0, false, 0};
    TruncVal tv = raw_trunc_val(raw_det_shift(e), ell, a + m);
    if (!tv.exact) return {a, 0, false, m - a};
    if (tv.bound < 2 * a) throw ConsistencyError("det(M - I) valuation below twice the identity level");
    return {a, tv.bound - 2 * a, true, 0};
}

} // namespace detail

// BigInt version of the classifier, for single matrices.
inline StratumClass classify_matrix(const MatMod& m) {
    int a = m.identity_level();
    if (a == m.prec()) return {m.prec(), 0, false, 0};
    TruncVal tv = det_shifted_val(m, a);
    if (!tv.exact) return {a, 0, false, m.prec() - a};
    if (tv.bound < 2 * a) throw ConsistencyError("det(M - I) valuation below twice the identity level");
    return {a, tv.bound - 2 * a, true, 0};
}

// Determinant precision available for the stratum-approximation conditions.
enum class DetPrecision {
    Standard, // det(M - I) known mod ell^(a + prec)
    TraceZero // reflection shape at ell = 2: known mod 2^(prec + 1)
};

namespace detail {

// Does M (mod ell^m) satisfy every stratum-(a, b) condition that is visible
// at this precision?  These are exactly the constraints cut out by the
// stratum on the image mod ell^m:
//   - M == I mod ell^min(a, m),
//   - if m > a: M != I mod ell^(a+1), and det(M - I) has valuation exactly
//     2a + b when that is visible, or >= the visible cap otherwise.
inline bool raw_stratum_approx(const std::array<u64, 4>& e, std::uint32_t ell, int m, u64 mod,
                               int a, int b, DetPrecision dp, u64 d_ext) {
    int al = raw_ident_level(e, ell, m, mod);
    if (al < std::min(a, m)) return false;
    if (m <= a) return true;
    if (al > a) return false;
    int cap = dp == DetPrecision::TraceZero ? m + 1 : a + m;
    i128 det = dp == DetPrecision::TraceZero ? raw_det_shift_tracezero(e, d_ext) : raw_det_shift(e);
    TruncVal tv = raw_trunc_val(det, ell, cap);
    int target = 2 * a + b;
    if (target < cap) return tv.exactly(target);
    return tv.at_least(cap);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Streaming scanner over the image of a stored group at any modulus.
// ---------------------------------------------------------------------------

enum class CosetFilter { All, RingCoset, ReflectionCoset };

class GroupScanner {
public:
    GroupScanner(StoredGroup group, Ambient amb)
        : group_(std::move(group)), amb_(std::move(amb)) {
        if (group_.ell() != amb_.ell) throw PreconditionError("group and ambient prime differ");
        if (group_.level() < amb_.min_level())
            throw PreconditionError("group stored below the ambient's minimum level");
        if (amb_.kind != AmbientKind::GL2) {
            const QuadRing& ring = *amb_.ring;
            shapes_.reserve(group_.size());
            for (std::uint64_t id : group_.ids()) {
                MatMod m = group_.matrix(id);
                bool in_ring = ring.in_cartan(m);
                if (amb_.kind == AmbientKind::Cartan) {
                    if (!in_ring) throw SpecError("group element is outside the ambient: " + m.str());
                    shapes_.push_back(kRing);
                } else {
                    bool in_refl = ring.in_reflection(m);
                    if (in_ring == in_refl)
                        throw SpecError("group element fits both cosets or neither: " + m.str());
                    shapes_.push_back(in_ring ? kRing : kReflection);
                }
            }
        }
    }

    const StoredGroup& group() const { return group_; }
    const Ambient& ambient() const { return amb_; }
    Prime ell() const { return group_.ell(); }
    int level() const { return group_.level(); }

    // |G(ell^m)|: the reduced image below the working level, the full
    // preimage above it.
    BigInt group_order(int m) const {
        if (m < 1) throw PreconditionError("modulus exponent must be >= 1");
        if (m <= level()) return BigInt(static_cast<std::uint64_t>(group_.reduce(m).size()));
        return BigInt(static_cast<std::uint64_t>(group_.size())) *
               big_pow(BigInt(ell().value), static_cast<unsigned>(amb_.dim() * (m - level())));
    }

    // Matrices visited by scan(m, filter).
    BigInt visit_count(int m, CosetFilter filter = CosetFilter::All) const {
        if (m < level()) {
            if (filter != CosetFilter::All) throw PreconditionError("coset filters need modulus >= working level");
            return group_order(m);
        }
        std::uint64_t items = filter == CosetFilter::All ? group_.size() : count_shape(filter);
        return BigInt(items) * big_pow(BigInt(ell().value), static_cast<unsigned>(amb_.dim() * (m - level())));
    }

    // Budget entries scan(m, filter) will charge.
    BigInt entry_cost(int m, CosetFilter filter = CosetFilter::All) const {
        return 4 * visit_count(m, filter);
    }

    // Visit the image of the group at modulus ell^m.  The callback receives
    // the four entries (row-major, reduced representatives) as machine words.
    template <class F>
    void scan(int m, CosetFilter filter, Budget& budget, F&& fn) const {
        charge(budget, entry_cost(m, filter));
        std::uint64_t mod = prime_pow_u64(ell(), static_cast<unsigned>(m));
        if (m < level()) {
            StoredGroup low = group_.reduce(m);
            for (std::uint64_t id : low.ids()) fn(low.unpack(id));
            return;
        }
        std::uint64_t step = group_.modulus();
        std::uint64_t fib = mod / step;
        std::uint64_t c_mod = 0, d_mod = 0;
        if (amb_.kind != AmbientKind::GL2) {
            c_mod = static_cast<std::uint64_t>(mod_nonneg(amb_.ring->c(), mod));
            d_mod = static_cast<std::uint64_t>(mod_nonneg(amb_.ring->d(), mod));
        }
        std::array<std::uint64_t, 4> out;
        for (std::size_t i = 0; i < group_.size(); ++i) {
            std::uint8_t shape = amb_.kind == AmbientKind::GL2 ? kFree : shapes_[i];
            if (filter == CosetFilter::RingCoset && shape != kRing) continue;
            if (filter == CosetFilter::ReflectionCoset && shape != kReflection) continue;
            auto base = group_.unpack(group_.ids()[i]);
            if (shape == kFree) {
                for (std::uint64_t s0 = 0; s0 < fib; ++s0)
                    for (std::uint64_t s1 = 0; s1 < fib; ++s1)
                        for (std::uint64_t s2 = 0; s2 < fib; ++s2)
                            for (std::uint64_t s3 = 0; s3 < fib; ++s3) {
                                out = {base[0] + s0 * step, base[1] + s1 * step,
                                       base[2] + s2 * step, base[3] + s3 * step};
                                fn(out);
                            }
            } else if (shape == kRing) {
                // x + y*X with x, y read from entries (1,1) and (2,1).
                for (std::uint64_t s = 0; s < fib; ++s) {
                    std::uint64_t x = base[0] + s * step;
                    for (std::uint64_t t = 0; t < fib; ++t) {
                        std::uint64_t y = base[2] + t * step;
                        out = {x, (d_mod * y) % mod, y, (x + c_mod * y) % mod};
                        fn(out);
                    }
                }
            } else {
                // Reflection z + w*X~: [[z, c*z - d*w], [w, -z]].
                for (std::uint64_t s = 0; s < fib; ++s) {
                    std::uint64_t z = base[0] + s * step;
                    for (std::uint64_t t = 0; t < fib; ++t) {
                        std::uint64_t w = base[2] + t * step;
                        out = {z, (c_mod * z % mod + (mod - d_mod) * w) % mod, w, (mod - z) % mod};
                        fn(out);
                    }
                }
            }
        }
    }

    // Determinant precision to use for a coset of this ambient.
    DetPrecision det_precision(bool reflection) const {
        if (reflection && !ell().odd() && amb_.ring->cls() == RingClass::Ramified)
            return DetPrecision::TraceZero;
        return DetPrecision::Standard;
    }

    // d reduced mod 2^(m+1), as needed by the TraceZero determinant.
    std::uint64_t d_ext(int m) const {
        if (!amb_.ring) return 0;
        return static_cast<std::uint64_t>(
            mod_nonneg(amb_.ring->d(), prime_pow(ell(), static_cast<unsigned>(m + 1))));
    }

private:
    static constexpr std::uint8_t kFree = 0, kRing = 1, kReflection = 2;

    static void charge(Budget& budget, const BigInt& entries) {
        if (entries > BigInt(UINT64_MAX)) throw ResourceError("scan size exceeds any expressible budget");
        budget.charge(static_cast<std::uint64_t>(entries));
    }

    std::uint64_t count_shape(CosetFilter filter) const {
        if (amb_.kind == AmbientKind::GL2) throw PreconditionError("coset filters need a ring ambient");
        std::uint8_t want = filter == CosetFilter::RingCoset ? kRing : kReflection;
        std::uint64_t n = 0;
        for (std::uint8_t s : shapes_) n += (s == want);
        return n;
    }

    StoredGroup group_;
    Ambient amb_;
    std::vector<std::uint8_t> shapes_;
};

// ---------------------------------------------------------------------------
// Counts and measures from the scanner.
// ---------------------------------------------------------------------------

// Number of elements of the image mod ell^m lying in stratum (a, b).
// Requires m >= a + b + 1 so membership is decided at this modulus.
inline BigInt stratum_count(const GroupScanner& sc, int m, int a, int b, Budget& budget,
                            CosetFilter filter = CosetFilter::All) {
    if (a < 0 || b < 0) throw PreconditionError("stratum parameters must be nonnegative");
    if (m < a + b + 1) throw PreconditionError("modulus too small to decide stratum membership");
    std::uint64_t mod = prime_pow_u64(sc.ell(), static_cast<unsigned>(m));
    std::uint32_t l = sc.ell().value;
    BigInt count = 0;
    sc.scan(m, filter, budget, [&](const std::array<std::uint64_t, 4>& e) {
        StratumClass c = detail::raw_classify(e, l, m, mod);
        if (c.determined && c.a == a && c.b == b) ++count;
    });
    return count;
}

// mu_{a,b}: the fraction of the group whose 1-eigenspace is
// Z/ell^a x Z/ell^(a+b), computed by direct enumeration at the smallest
// modulus that decides membership.
inline Rat counting_measure(const GroupScanner& sc, int a, int b, Budget& budget) {
    int m = std::max(sc.level(), a + b + 1);
    BigInt count = stratum_count(sc, m, a, b, budget);
    return Rat(count, sc.group_order(m));
}

// Number of lifts of M (known mod ell^n, a member of the group's image) to
// the image mod ell^(n+1) that satisfy every stratum-(a, b) condition
// visible there.
inline BigInt lift_count(const GroupScanner& sc, const MatMod& m, int a, int b, Budget& budget) {
    if (a < 0 || b < 0) throw PreconditionError("stratum parameters must be nonnegative");
    if (m.ell() != sc.ell()) throw PreconditionError("matrix prime differs from the group");
    int n = m.prec();
    if (!sc.ambient().contains(m)) throw PreconditionError("matrix is not in the ambient group");
    const StoredGroup& g = sc.group();
    bool member = n >= g.level() ? g.contains(m.reduce(g.level())) : g.reduce(n).contains(m);
    if (!member) throw PreconditionError("matrix is not in the group's image");

    DetPrecision dp = DetPrecision::Standard;
    if (sc.ambient().kind == AmbientKind::Normalizer && sc.ambient().ring->in_reflection(m))
        dp = sc.det_precision(true);

    std::uint64_t step = prime_pow_u64(sc.ell(), static_cast<unsigned>(n));
    std::array<std::uint64_t, 4> target;
    for (int i = 0; i < 4; ++i) target[i] = static_cast<std::uint64_t>(m.entries()[i]);

    int mm = n + 1;
    std::uint64_t mod = prime_pow_u64(sc.ell(), static_cast<unsigned>(mm));
    std::uint64_t dext = dp == DetPrecision::TraceZero ? sc.d_ext(mm) : 0;
    std::uint32_t l = sc.ell().value;
    BigInt count = 0;
    sc.scan(mm, CosetFilter::All, budget, [&](const std::array<std::uint64_t, 4>& e) {
        for (int i = 0; i < 4; ++i)
            if (e[i] % step != target[i]) return;
        if (detail::raw_stratum_approx(e, l, mm, mod, a, b, dp, dext)) ++count;
    });
    return count;
}

// ---------------------------------------------------------------------------
// One-pass census used by the measure engine.
// ---------------------------------------------------------------------------

// Counts at modulus ell^m, split by what the classifier sees:
//   exact[(a, b)]: elements whose stratum is decided as (a, b);
//   tails[a]:      elements with identity level exactly a < m whose b is
//                  still open (det valuation at the visible cap).
// Elements equal to I mod ell^m land in tails[m].
struct StratumCensus {
    std::map<std::pair<int, int>, BigInt> exact;
    std::map<int, BigInt> tails;
};

inline StratumCensus stratum_census(const GroupScanner& sc, int m, Budget& budget,
                                    CosetFilter filter = CosetFilter::All,
                                    DetPrecision dp = DetPrecision::Standard) {
    std::uint64_t mod = prime_pow_u64(sc.ell(), static_cast<unsigned>(m));
    std::uint32_t l = sc.ell().value;
    std::uint64_t dext = dp == DetPrecision::TraceZero ? sc.d_ext(m) : 0;
    StratumCensus census;
    sc.scan(m, filter, budget, [&](const std::array<std::uint64_t, 4>& e) {
        int a = detail::raw_ident_level(e, l, m, mod);
        if (a == m) {
            ++census.tails[m];
            return;
        }
        int cap = dp == DetPrecision::TraceZero ? m + 1 : a + m;
        detail::i128 det = dp == DetPrecision::TraceZero ? detail::raw_det_shift_tracezero(e, dext)
                                                         : detail::raw_det_shift(e);
        TruncVal tv = detail::raw_trunc_val(det, l, cap);
        if (tv.exact) {
            if (tv.bound < 2 * a) throw ConsistencyError("det(M - I) valuation below twice the identity level");
            ++census.exact[{a, tv.bound - 2 * a}];
        } else {
            ++census.tails[a];
        }
    });
    return census;
}

} // namespace eigenmu
