#pragma once
//
// Exact eigenspace-measure families.
//
// For a stored open group G (inside GL2, a Cartan subgroup, or a Cartan
// normalizer) this header computes the complete two-parameter family
//
//     mu_{a,b} = Haar measure of { M in G : fixed-space of M is
//                                  Z/ell^a x Z/ell^(a+b) }
//
// as a finite partition of the parameter grid N^2 into product cells,
// each carrying one exact rational constant c so that inside the cell
//
//     mu_{a,b} = c * ell^-(dim*a + b),     dim = 4 for GL2, 2 otherwise.
//
// The engine derives every constant from finite exact counts: a census of
// the stored level decides the low cells, tangent-space counts decide the
// two deep tails, and ramified rings with square discriminant are rewritten
// into an equivalent split-ring group at higher level to resolve the large-b
// region. Every family is checked structurally (the cells tile N^2) and
// analytically (the total mass sums to exactly 1) before it is returned.

#include "eigenmu/eigenspace.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace eigenmu {

/// A subset of N that is either a single value {min} or a tail [min, oo).
struct NatSet {
    int min = 0;
    bool tail = false;

    static NatSet at(int v) { return {v, false}; }
    static NatSet from(int v) { return {v, true}; }

    bool contains(int n) const { return tail ? n >= min : n == min; }

    bool operator==(const NatSet& o) const { return min == o.min && tail == o.tail; }

    /// Render as e.g. "a=3" or "a>=3".
    std::string str(const char* var) const {
        return std::string(var) + (tail ? ">=" : "=") + std::to_string(min);
    }
};

/// Intersection of two NatSets; empty optional when disjoint.
inline std::optional<NatSet> intersect(const NatSet& x, const NatSet& y) {
    if (x.tail && y.tail) return NatSet::from(std::max(x.min, y.min));
    if (!x.tail && !y.tail) {
        if (x.min == y.min) return x;
        return std::nullopt;
    }
    const NatSet& single = x.tail ? y : x;
    const NatSet& range = x.tail ? x : y;
    if (single.min >= range.min) return single;
    return std::nullopt;
}

/// One cell of a measure family: on the product set a_set x b_set the
/// measure is constant * ell^-(dim*a + b). `origin` records which engine
/// path produced the constant (exact census count, geometric row tail,
/// kernel tangent formula, row scaling, split-model transfer, vanishing
/// region, or a mix of coset families).
struct Cell {
    NatSet a_set;
    NatSet b_set;
    Rat constant;
    std::string origin = "census";
};

/// A complete family of eigenspace measures: a partition of N^2 into
/// product cells with exact rational law constants.
class MeasureFamily {
public:
    MeasureFamily(Prime ell, int dim, std::vector<Cell> cells)
        : ell_(ell), dim_(dim), cells_(std::move(cells)) {
        std::sort(cells_.begin(), cells_.end(), [](const Cell& x, const Cell& y) {
            return std::tie(x.a_set.min, x.b_set.min, x.a_set.tail, x.b_set.tail) <
                   std::tie(y.a_set.min, y.b_set.min, y.a_set.tail, y.b_set.tail);
        });
        validate_partition();
        if (total_mass() != 1)
            throw ConsistencyError("measure family has total mass " + rat_str(total_mass()) +
                                   ", expected exactly 1");
    }

    Prime ell() const { return ell_; }
    int dim() const { return dim_; }
    const std::vector<Cell>& cells() const { return cells_; }

    /// The unique cell containing grid point (a, b).
    const Cell& cell_at(int a, int b) const {
        if (a < 0 || b < 0) throw PreconditionError("stratum parameters must be nonnegative");
        for (const Cell& c : cells_)
            if (c.a_set.contains(a) && c.b_set.contains(b)) return c;
        throw ConsistencyError("no cell contains the requested grid point");
    }

    /// Exact measure mu_{a,b} = c * ell^-(dim*a + b).
    Rat evaluate(int a, int b) const {
        const Cell& c = cell_at(a, b);
        if (c.constant == 0) return Rat(0);
        return c.constant / Rat(big_pow(BigInt(ell_.value), static_cast<unsigned>(dim_ * a + b)));
    }

    /// Exact sum of the measure over all of N^2 (geometric tail sums).
    Rat total_mass() const {
        Rat sum(0);
        for (const Cell& c : cells_) sum += cell_mass(c);
        return sum;
    }

    /// Exact sum of one cell's measure over its grid points.
    Rat cell_mass(const Cell& c) const {
        if (c.constant == 0) return Rat(0);
        BigInt lp(ell_.value);
        // sum over a of ell^-(dim*a), times sum over b of ell^-b.
        Rat a_part = Rat(1, big_pow(lp, static_cast<unsigned>(dim_ * c.a_set.min)));
        if (c.a_set.tail) {
            BigInt ld = big_pow(lp, static_cast<unsigned>(dim_));
            a_part *= Rat(ld, BigInt(ld - 1));
        }
        Rat b_part = Rat(1, big_pow(lp, static_cast<unsigned>(c.b_set.min)));
        if (c.b_set.tail) b_part *= Rat(lp, BigInt(lp - 1));
        return c.constant * a_part * b_part;
    }

    /// Pointwise average of two families over the common cell refinement.
    static MeasureFamily mix(const MeasureFamily& f, const MeasureFamily& g) {
        if (f.ell_.value != g.ell_.value || f.dim_ != g.dim_)
            throw PreconditionError("cannot mix families with different primes or dimensions");
        std::vector<Cell> cells;
        for (const Cell& x : f.cells_)
            for (const Cell& y : g.cells_) {
                auto a = intersect(x.a_set, y.a_set);
                if (!a) continue;
                auto b = intersect(x.b_set, y.b_set);
                if (!b) continue;
                cells.push_back({*a, *b, (x.constant + y.constant) / 2,
                                 x.origin + "+" + y.origin});
            }
        return MeasureFamily(f.ell_, f.dim_, std::move(cells));
    }

private:
    // Every cell's membership pattern is constant once a (resp. b) exceeds
    // all cell thresholds, so exact cover on a grid one past the largest
    // threshold proves the cells tile all of N^2.
    void validate_partition() const {
        int amax = 1, bmax = 1;
        for (const Cell& c : cells_) {
            amax = std::max(amax, c.a_set.min + 1);
            bmax = std::max(bmax, c.b_set.min + 1);
        }
        for (int a = 0; a <= amax; ++a)
            for (int b = 0; b <= bmax; ++b) {
                int hits = 0;
                for (const Cell& c : cells_)
                    if (c.a_set.contains(a) && c.b_set.contains(b)) ++hits;
                if (hits != 1)
                    throw ConsistencyError("family cells cover grid point (" + std::to_string(a) +
                                           ", " + std::to_string(b) + ") " + std::to_string(hits) +
                                           " times; cells must tile the grid exactly once");
            }
    }

    Prime ell_;
    int dim_;
    std::vector<Cell> cells_;
};

/// A stratum is empty exactly when its measure vanishes (strata are open
/// subsets of the group, so zero measure forces emptiness).
inline bool stratum_empty(const MeasureFamily& fam, int a, int b) {
    return fam.evaluate(a, b) == 0;
}

/// Number of lifts one level up (modulus ell^n to ell^(n+1)) of a matrix
/// compatible with stratum (a, b), inside a group stored at level <= n whose
/// tangent counts are `t`. Constant across the stratum; this is the factor
/// the deep-tail constants of family_generic are built from.
inline BigInt lift_factor_general(const TangentCounts& t, Prime ell, int n, int a, int b) {
    if (n < 0 || a < 0 || b < 0) throw PreconditionError("lift factor parameters must be nonnegative");
    if (n < a) return BigInt(1);
    if (n == a) return b == 0 ? t.units : t.sing;
    if (n < a + b) return t.total / ell.value;
    if (n == a + b) return t.total - t.total / ell.value;
    return t.total;
}

/// Lift factor for the reflection coset of a Cartan normalizer. Over a
/// 2-adic ramified ring the determinant shift of a reflection is pinned one
/// bit deeper than the working precision, which collapses the table to two
/// values around the threshold n = 2a + b; everywhere else reflections sit
/// in row a = 0 and follow the generic shape.
inline BigInt lift_factor_normalizer_star(const QuadRing& ring, int n, int a, int b) {
    if (n < 0 || a < 0 || b < 0) throw PreconditionError("lift factor parameters must be nonnegative");
    Prime ell = ring.ell();
    if (!ell.odd() && ring.cls() == RingClass::Ramified)
        return BigInt(n < 2 * a + b ? 2 : 4);
    if (a != 0) throw PreconditionError("reflections over this ring fix nothing past row zero");
    BigInt lp(ell.value);
    if (n < b) return lp;
    if (n == b && b > 0) return lp * (lp - 1);
    return lp * lp;
}

namespace detail {

inline BigInt census_exact(const StratumCensus& c, int a, int b) {
    auto it = c.exact.find({a, b});
    return it == c.exact.end() ? BigInt(0) : it->second;
}

inline BigInt census_tail(const StratumCensus& c, int a) {
    auto it = c.tails.find(a);
    return it == c.tails.end() ? BigInt(0) : it->second;
}

inline Rat pow_rat(Prime ell, int e) {
    return Rat(big_pow(BigInt(ell.value), static_cast<unsigned>(e)));
}

} // namespace detail

inline MeasureFamily measure_family(const GroupScanner& sc, Budget& budget);

/// Family for a group whose one-unit filtration has constant lift factors:
/// the whole of GL2, split or nonsplit Cartan rings, and unramified-at-2
/// rings. Low cells come from a census at the stored level; the two deep
/// tails from the tangent counts `t` of the ambient.
inline MeasureFamily family_generic(const GroupScanner& sc, const TangentCounts& t,
                                    Budget& budget) {
    const int n0 = sc.level();
    const int dim = sc.ambient().dim();
    const Prime ell = sc.ambient().ell;
    const BigInt lp(ell.value);
    const BigInt ord = sc.group_order(n0);
    const StratumCensus census = stratum_census(sc, n0, budget);

    std::vector<Cell> cells;
    for (int a = 0; a < n0; ++a) {
        for (int b = 0; b < n0 - a; ++b) {
            Rat mu(detail::census_exact(census, a, b), ord);
            cells.push_back(
                {NatSet::at(a), NatSet::at(b), mu * detail::pow_rat(ell, dim * a + b), "census"});
        }
        // Undecided part of row a: measure scales geometrically in b.
        Rat base(detail::census_tail(census, a), ord);
        Rat c = base * Rat(BigInt(lp - 1)) * detail::pow_rat(ell, n0 - a - 1 + dim * a);
        cells.push_back({NatSet::at(a), NatSet::from(n0 - a), c, "tail"});
    }
    // Rows a >= n0 lie inside the congruence kernel, where the group looks
    // like the full ambient: constants depend only on the tangent counts.
    Rat deep = Rat(big_pow(BigInt(t.total), static_cast<unsigned>(n0 - 1)), ord);
    cells.push_back({NatSet::from(n0), NatSet::at(0), Rat(t.units) * deep, "kernel"});
    cells.push_back(
        {NatSet::from(n0), NatSet::from(1), Rat(t.sing) * Rat(BigInt(lp - 1)) * deep, "kernel"});
    return MeasureFamily(ell, dim, std::move(cells));
}

/// Family for a group inside a ramified Cartan ring (0, d). Cells with
/// b <= bmax are settled by one exact census; for b > bmax either nothing
/// survives (non-square discriminant) or the group is rewritten inside a
/// split ring at higher level and that family's cells are carried back.
inline MeasureFamily family_ramified(const GroupScanner& sc, Budget& budget) {
    const Ambient& amb = sc.ambient();
    const QuadRing& ring = *amb.ring;
    const Prime ell = amb.ell;
    const int n0 = sc.level();
    const int v = valuation(ring.d(), ell);
    const BigInt m_unit = ring.d() / prime_pow(ell, static_cast<unsigned>(v));
    const bool square_disc = (v % 2 == 0) && is_square_unit(m_unit, ell);
    // Largest b a non-cancelling difference of squares can reach. For odd
    // ell the two leading terms can never cancel beyond depth v; at ell = 2
    // squares carry two extra guaranteed bits.
    const int bmax = ell.odd() ? v : v + 2;

    const int mtop = n0 + bmax + 1;
    const BigInt ord = sc.group_order(mtop);
    const StratumCensus census = stratum_census(sc, mtop, budget);

    std::vector<Cell> cells;
    for (int a = 0; a < n0; ++a)
        for (int b = 0; b <= bmax; ++b) {
            Rat mu(detail::census_exact(census, a, b), ord);
            cells.push_back(
                {NatSet::at(a), NatSet::at(b), mu * detail::pow_rat(ell, 2 * a + b), "census"});
        }
    // For a >= n0 the measure scales by ell^-2 per row, so the a = n0
    // counts settle the whole column tail.
    for (int b = 0; b <= bmax; ++b) {
        Rat mu(detail::census_exact(census, n0, b), ord);
        cells.push_back(
            {NatSet::from(n0), NatSet::at(b), mu * detail::pow_rat(ell, 2 * n0 + b), "scaled"});
    }

    if (!square_disc) {
        cells.push_back({NatSet::from(0), NatSet::from(bmax + 1), Rat(0), "vanishing"});
        return MeasureFamily(ell, 2, std::move(cells));
    }

    // Square discriminant: d = (ell^(v/2) u)^2 up to a square unit, so the
    // ring embeds in a split model. Rewrite the group there, one level
    // deeper per lifted digit, and pull the split family's cells back.
    const int shift = v / 2 + (ell.odd() ? 0 : 1);
    const int new_level = n0 + shift;
    const QuadRing target = ell.odd() ? QuadRing::from_normalized(ell, BigInt(0), BigInt(1))
                                      : QuadRing::from_normalized(ell, BigInt(1), BigInt(0));
    const BigInt root = sqrt_hensel(ring.d(), ell, n0 + (ell.odd() ? 0 : 1)).value();
    const BigInt big_mod = prime_pow(ell, static_cast<unsigned>(new_level));
    const std::uint64_t fib = prime_pow_u64(ell, static_cast<unsigned>(shift));
    const std::uint64_t step = prime_pow_u64(ell, static_cast<unsigned>(n0));

    const StoredGroup& grp = sc.group();
    budget.charge(mul_checked(mul_checked(4 * grp.size(), fib), ell.odd() ? 1 : fib));
    std::vector<MatMod> mats;
    for (std::uint64_t id : grp.ids()) {
        auto e = grp.unpack(id);
        if (ell.odd()) {
            // (x, y) with y sqrt(d) re-read as a multiple of the split unit.
            BigInt yr = mod_nonneg(BigInt(e[2]) * root, big_mod);
            for (std::uint64_t s = 0; s < fib; ++s)
                mats.push_back(target.element(new_level, BigInt(e[0] + s * step), yr));
        } else {
            // Basis change by the invertible frame (1, sqrt(d); -sqrt(d), ...):
            // each lift of (x, y) lands on (x + y sqrt(d), -2 y sqrt(d)).
            for (std::uint64_t s = 0; s < fib; ++s)
                for (std::uint64_t t = 0; t < fib; ++t) {
                    BigInt xh = BigInt(e[0] + s * step);
                    BigInt yh = BigInt(e[2] + t * step);
                    mats.push_back(target.element(new_level, mod_nonneg(xh + yh * root, big_mod),
                                                  mod_nonneg(-2 * yh * root, big_mod)));
                }
        }
    }
    StoredGroup moved = StoredGroup::from_matrices(ell, new_level, mats);
    GroupScanner msc(moved, Ambient::cartan(target));
    MeasureFamily split_fam = family_generic(msc, target.tangent_counts(), budget);

    // In the split model the pair (a', b') corresponds to (a' - shift,
    // b' + 2*shift) here; only a' >= shift, b' >= 1 map into the open
    // region, and the law constant transports unchanged.
    for (const Cell& cell : split_fam.cells()) {
        auto a = intersect(cell.a_set, NatSet::from(shift));
        if (!a) continue;
        auto b = intersect(cell.b_set, NatSet::from(1));
        if (!b) continue;
        cells.push_back({NatSet{a->min - shift, a->tail}, NatSet{b->min + 2 * shift, b->tail},
                         cell.constant, "transfer"});
    }
    return MeasureFamily(ell, 2, std::move(cells));
}

/// Family for a group inside a Cartan normalizer: the average of the ring
/// half's Cartan family and a reflection-coset family whose rows collapse
/// after finitely many steps.
inline MeasureFamily family_normalizer(const GroupScanner& sc, Budget& budget) {
    const Ambient& amb = sc.ambient();
    const QuadRing& ring = *amb.ring;
    const Prime ell = amb.ell;
    const Ambient cartan_amb = Ambient::cartan(ring);

    CosetSplit split = coset_split(sc.group(), amb);
    if (split.reflection_ids.empty())
        return measure_family(GroupScanner(split.ring_part, cartan_amb), budget);

    GroupScanner ring_sc(split.ring_part, cartan_amb);
    MeasureFamily ring_fam = measure_family(ring_sc, budget);

    const int n0 = sc.level();
    const BigInt half_ord(static_cast<std::uint64_t>(split.ring_part.size()));
    const bool two_adic_sq = !ell.odd() && ring.cls() == RingClass::Ramified;
    const DetPrecision dp = two_adic_sq ? DetPrecision::TraceZero : DetPrecision::Standard;
    const StratumCensus census =
        stratum_census(sc, n0, budget, CosetFilter::ReflectionCoset, dp);

    const int arow_max = two_adic_sq ? 1 : 0;
    for (const auto& [key, cnt] : census.exact)
        if (key.first > arow_max)
            throw ConsistencyError("reflection census reports an impossible identity level");
    for (const auto& [a, cnt] : census.tails)
        if (a > arow_max)
            throw ConsistencyError("reflection census reports an impossible identity level");

    std::vector<Cell> star;
    if (two_adic_sq) {
        // Fixed spaces of reflections over a 2-adic ramified ring live in
        // rows a <= 1, and the determinant shift is pinned one bit past the
        // working precision (trace-zero squares).
        for (int a = 0; a <= 1; ++a) {
            for (int b = 0; 2 * a + b <= n0; ++b) {
                Rat mu(detail::census_exact(census, a, b), half_ord);
                star.push_back(
                    {NatSet::at(a), NatSet::at(b), mu * detail::pow_rat(ell, 2 * a + b), "census"});
            }
            Rat base(detail::census_tail(census, a), half_ord);
            star.push_back({NatSet::at(a), NatSet::from(n0 - 2 * a + 1),
                            base * detail::pow_rat(ell, n0), "tail"});
        }
        star.push_back({NatSet::from(2), NatSet::from(0), Rat(0), "vanishing"});
    } else {
        // Every reflection has identity level 0 here; row 0 alone carries
        // the coset's measure.
        for (int b = 0; b < n0; ++b) {
            Rat mu(detail::census_exact(census, 0, b), half_ord);
            star.push_back({NatSet::at(0), NatSet::at(b), mu * detail::pow_rat(ell, b), "census"});
        }
        Rat base(detail::census_tail(census, 0), half_ord);
        star.push_back({NatSet::at(0), NatSet::from(n0),
                        base * Rat(BigInt(BigInt(ell.value) - 1)) * detail::pow_rat(ell, n0 - 1),
                        "tail"});
        star.push_back({NatSet::from(1), NatSet::from(0), Rat(0), "vanishing"});
    }
    MeasureFamily star_fam(ell, 2, std::move(star));
    return MeasureFamily::mix(ring_fam, star_fam);
}

/// Compute the complete eigenspace-measure family of a stored group under
/// its ambient. Dispatches on the ambient kind and ring class.
inline MeasureFamily measure_family(const GroupScanner& sc, Budget& budget) {
    const Ambient& amb = sc.ambient();
    switch (amb.kind) {
    case AmbientKind::GL2:
        return family_generic(sc, tangent_counts_gl2(amb.ell), budget);
    case AmbientKind::Cartan:
        if (amb.ring->cls() == RingClass::Ramified) return family_ramified(sc, budget);
        return family_generic(sc, amb.ring->tangent_counts(), budget);
    case AmbientKind::Normalizer:
        return family_normalizer(sc, budget);
    }
    throw PreconditionError("unknown ambient kind");
}

} // namespace eigenmu
