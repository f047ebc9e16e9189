#pragma once

// Finite-level ambient groups (GL2, a Cartan subgroup, or its normalizer)
// and stored open subgroups of them.
//
// An open subgroup of the ell-adic group is handled through its image at a
// working level n0: the stored group is a sorted vector of packed matrices
// mod ell^n0, and the subgroup is understood to be the full preimage of that
// image.  Everything that would materialize or visit large sets of matrix
// entries is metered by a Budget (4 entries per matrix visited or stored),
// so runaway enumerations fail fast with ResourceError instead of hanging.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include <eigenmu/cartan.hpp>
#include <eigenmu/modarith.hpp>

namespace eigenmu {

// ---------------------------------------------------------------------------
// Budget, counted in matrix entries (4 per matrix).
// ---------------------------------------------------------------------------

class Budget {
public:
    static constexpr std::uint64_t kDefaultLimit = 100'000'000;

    explicit Budget(std::uint64_t limit = kDefaultLimit) : limit_(limit) {}

    std::uint64_t limit() const { return limit_; }
    std::uint64_t used() const { return used_; }

    bool would_exceed(std::uint64_t entries) const {
        return entries > limit_ - std::min(used_, limit_);
    }

    void charge(std::uint64_t entries) {
        if (would_exceed(entries))
            throw ResourceError("enumeration budget exhausted (" + std::to_string(limit_) + " entries)");
        used_ += entries;
    }

private:
    std::uint64_t limit_;
    std::uint64_t used_ = 0;
};

// ---------------------------------------------------------------------------
// Ambient group descriptors.
// ---------------------------------------------------------------------------

enum class AmbientKind { GL2, Cartan, Normalizer };

inline const char* ambient_kind_name(AmbientKind k) {
    switch (k) {
        case AmbientKind::GL2: return "gl2";
        case AmbientKind::Cartan: return "cartan";
        default: return "normalizer";
    }
}

struct Ambient {
    AmbientKind kind;
    Prime ell;
    std::optional<QuadRing> ring; // absent exactly for GL2

    static Ambient gl2(Prime ell) { return {AmbientKind::GL2, ell, std::nullopt}; }
    static Ambient cartan(QuadRing r) { return {AmbientKind::Cartan, r.ell(), std::move(r)}; }
    static Ambient normalizer(QuadRing r) { return {AmbientKind::Normalizer, r.ell(), std::move(r)}; }

    // Exponent of the measure decay law c * ell^-(dim*a + b): the dimension
    // of the ambient group.
    int dim() const { return kind == AmbientKind::GL2 ? 4 : 2; }

    // Smallest usable working level.  For ell = 2 in the ramified pipeline
    // the ring and reflection shapes coincide mod 2, so those ambients start
    // at level 2.
    int min_level() const {
        if (kind != AmbientKind::GL2 && !ell.odd() && ring->cls() == RingClass::Ramified) return 2;
        return 1;
    }

    bool contains(const MatMod& m) const {
        switch (kind) {
            case AmbientKind::GL2: return m.invertible();
            case AmbientKind::Cartan: return ring->in_cartan(m);
            default: return ring->in_normalizer(m);
        }
    }

    BigInt order(int n) const {
        switch (kind) {
            case AmbientKind::GL2: return gl2_order(ell, n);
            case AmbientKind::Cartan: return ring->cartan_order(n);
            default: return ring->normalizer_order(n);
        }
    }
};

// ---------------------------------------------------------------------------
// Stored groups: sorted packed matrices mod ell^level.
// ---------------------------------------------------------------------------

/// Product of two enumeration sizes, refusing 64-bit overflow.
inline std::uint64_t mul_checked(std::uint64_t a, std::uint64_t b) {
    if (b != 0 && a > UINT64_MAX / b) throw ResourceError("enumeration size overflows 64 bits");
    return a * b;
}

/// Fourth power of an enumeration size, refusing 64-bit overflow.
inline std::uint64_t checked_pow4(std::uint64_t m) {
    return mul_checked(mul_checked(m, m), mul_checked(m, m));
}

// Packing base: entries of a matrix mod m pack into one 64-bit id as base-m
// digits, which needs m^4 <= 2^64.
inline std::uint64_t pack_modulus(Prime ell, int level) {
    std::uint64_t m = prime_pow_u64(ell, static_cast<unsigned>(level));
    if (m > 65536) throw ResourceError("working level too deep to pack matrices into 64 bits");
    return m;
}

class StoredGroup {
public:
    Prime ell() const { return ell_; }
    int level() const { return level_; }
    std::uint64_t modulus() const { return mod_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::uint64_t>& ids() const { return ids_; }

    std::uint64_t pack(const MatMod& m) const {
        if (m.ell() != ell_ || m.prec() != level_)
            throw PrecisionError("matrix prime/precision does not match the stored group");
        std::uint64_t id = 0;
        for (int i = 0; i < 4; ++i)
            id = id * mod_ + static_cast<std::uint64_t>(m.entries()[i]);
        return id;
    }

    std::array<std::uint64_t, 4> unpack(std::uint64_t id) const {
        std::array<std::uint64_t, 4> e{};
        for (int i = 3; i >= 0; --i) {
            e[i] = id % mod_;
            id /= mod_;
        }
        return e;
    }

    MatMod matrix(std::uint64_t id) const {
        auto e = unpack(id);
        return MatMod(ell_, level_, {BigInt(e[0]), BigInt(e[1]), BigInt(e[2]), BigInt(e[3])});
    }

    bool contains_id(std::uint64_t id) const {
        return std::binary_search(ids_.begin(), ids_.end(), id);
    }
    bool contains(const MatMod& m) const { return contains_id(pack(m)); }

    // Subgroup generated by `gens` inside GL2(Z/ell^level), by breadth-first
    // closure under multiplication (a finite set of invertible matrices
    // closed under products is a group).
    static StoredGroup closure(Prime ell, int level, const std::vector<MatMod>& gens, Budget& budget) {
        StoredGroup g(ell, level);
        std::vector<MatMod> gen_mats;
        for (const MatMod& m : gens) {
            if (m.ell() != ell || m.prec() != level)
                throw SpecError("generator prime/precision does not match the requested level");
            if (!m.invertible()) throw SpecError("generator is not invertible: " + m.str());
            gen_mats.push_back(m);
        }
        std::unordered_set<std::uint64_t> seen;
        std::vector<MatMod> work;
        MatMod id = MatMod::identity(ell, level);
        budget.charge(4);
        seen.insert(g.pack(id));
        work.push_back(id);
        while (!work.empty()) {
            MatMod cur = std::move(work.back());
            work.pop_back();
            for (const MatMod& gen : gen_mats) {
                MatMod next = cur * gen;
                if (seen.insert(g.pack(next)).second) {
                    budget.charge(4);
                    work.push_back(std::move(next));
                }
            }
        }
        g.ids_.assign(seen.begin(), seen.end());
        std::sort(g.ids_.begin(), g.ids_.end());
        return g;
    }

    // Full ambient group at the given level.
    static StoredGroup full(const Ambient& amb, int level, Budget& budget) {
        if (level < amb.min_level()) throw PreconditionError("level below the ambient's minimum working level");
        StoredGroup g(amb.ell, level);
        std::uint64_t m = g.mod_;
        if (amb.kind == AmbientKind::GL2) {
            budget.charge(mul_checked(4, checked_pow4(m)));
            std::uint64_t l = amb.ell.value;
            for (std::uint64_t a = 0; a < m; ++a)
                for (std::uint64_t b = 0; b < m; ++b)
                    for (std::uint64_t c = 0; c < m; ++c)
                        for (std::uint64_t d = 0; d < m; ++d)
                            if (((a * d) % l + l - (b * c) % l) % l != 0)
                                g.ids_.push_back(((a * m + b) * m + c) * m + d);
        } else {
            const QuadRing& ring = *amb.ring;
            budget.charge(4 * m * m * (amb.kind == AmbientKind::Normalizer ? 2 : 1));
            for (std::uint64_t x = 0; x < m; ++x)
                for (std::uint64_t y = 0; y < m; ++y) {
                    MatMod e = ring.element(level, BigInt(x), BigInt(y));
                    if (e.invertible()) g.ids_.push_back(g.pack(e));
                }
            if (amb.kind == AmbientKind::Normalizer) {
                for (std::uint64_t z = 0; z < m; ++z)
                    for (std::uint64_t w = 0; w < m; ++w) {
                        MatMod e = ring.reflection(level, BigInt(z), BigInt(w));
                        if (e.invertible()) g.ids_.push_back(g.pack(e));
                    }
            }
        }
        std::sort(g.ids_.begin(), g.ids_.end());
        if (std::adjacent_find(g.ids_.begin(), g.ids_.end()) != g.ids_.end())
            throw ConsistencyError("ambient construction produced a duplicate element");
        if (g.size() != amb.order(level)) throw ConsistencyError("ambient construction disagrees with the order formula");
        return g;
    }

    static StoredGroup from_ids(Prime ell, int level, std::vector<std::uint64_t> ids) {
        StoredGroup g(ell, level);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        g.ids_ = std::move(ids);
        return g;
    }

    static StoredGroup from_matrices(Prime ell, int level, const std::vector<MatMod>& mats) {
        StoredGroup g(ell, level);
        std::vector<std::uint64_t> ids;
        ids.reserve(mats.size());
        for (const MatMod& m : mats) ids.push_back(g.pack(m));
        return from_ids(ell, level, std::move(ids));
    }

    // Image under reduction mod ell^new_level.
    StoredGroup reduce(int new_level) const {
        if (new_level < 1 || new_level > level_) throw PreconditionError("invalid reduction level");
        if (new_level == level_) return *this;
        StoredGroup g(ell_, new_level);
        std::uint64_t q = g.mod_;
        std::vector<std::uint64_t> ids;
        ids.reserve(ids_.size());
        for (std::uint64_t id : ids_) {
            auto e = unpack(id);
            ids.push_back((((e[0] % q) * q + e[1] % q) * q + e[2] % q) * q + e[3] % q);
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        g.ids_ = std::move(ids);
        return g;
    }

    // Full preimage at a deeper level, materialized.  Fibers follow the
    // ambient's parametrization: 4 free entries for GL2, the (x, y) / (z, w)
    // coordinates for ring and reflection shapes.
    StoredGroup lift(const Ambient& amb, int new_level, Budget& budget) const {
        if (new_level < level_) throw PreconditionError("lift target below current level");
        check_ambient(amb);
        if (new_level == level_) return *this;
        StoredGroup g(ell_, new_level);
        std::uint64_t big = g.mod_, step = mod_;
        std::uint64_t fib = big / step; // lifts per coordinate
        if (amb.kind == AmbientKind::GL2) {
            budget.charge(mul_checked(4 * ids_.size(), fib * fib * fib * fib));
            for (std::uint64_t id : ids_) {
                auto e = unpack(id);
                for (std::uint64_t s0 = 0; s0 < fib; ++s0)
                    for (std::uint64_t s1 = 0; s1 < fib; ++s1)
                        for (std::uint64_t s2 = 0; s2 < fib; ++s2)
                            for (std::uint64_t s3 = 0; s3 < fib; ++s3)
                                g.ids_.push_back((((e[0] + s0 * step) * big + e[1] + s1 * step) * big +
                                                  e[2] + s2 * step) * big +
                                                 e[3] + s3 * step);
            }
        } else {
            const QuadRing& ring = *amb.ring;
            budget.charge(mul_checked(4 * ids_.size(), fib * fib));
            for (std::uint64_t id : ids_) {
                auto e = unpack(id);
                MatMod low = matrix(id);
                bool refl = amb.kind == AmbientKind::Normalizer && ring.in_reflection(low);
                if (refl && ring.in_cartan(low))
                    throw ConsistencyError("ring and reflection shapes overlap at the working level");
                for (std::uint64_t s = 0; s < fib; ++s)
                    for (std::uint64_t t = 0; t < fib; ++t) {
                        BigInt u = BigInt(e[0] + s * step), v = BigInt(e[2] + t * step);
                        MatMod m = refl ? ring.reflection(new_level, u, v) : ring.element(new_level, u, v);
                        g.ids_.push_back(g.pack(m));
                    }
            }
        }
        std::sort(g.ids_.begin(), g.ids_.end());
        if (std::adjacent_find(g.ids_.begin(), g.ids_.end()) != g.ids_.end())
            throw ConsistencyError("lift produced a duplicate element");
        return g;
    }

private:
    StoredGroup(Prime ell, int level) : ell_(ell), level_(level), mod_(pack_modulus(ell, level)) {
        if (level < 1) throw PreconditionError("level must be >= 1");
    }

    void check_ambient(const Ambient& amb) const {
        if (amb.ell != ell_) throw PreconditionError("ambient prime differs from the stored group");
    }

    Prime ell_;
    int level_;
    std::uint64_t mod_;
    std::vector<std::uint64_t> ids_;
};

// ---------------------------------------------------------------------------
// Subgroup diagnostics and coset decomposition.
// ---------------------------------------------------------------------------

struct GroupDiagnostics {
    BigInt ambient_order; // order of the ambient at the working level
    BigInt index;         // index of the subgroup in the ambient
    int level;            // least level whose image already determines the group
};

inline GroupDiagnostics diagnose(const StoredGroup& g, const Ambient& amb) {
    if (g.level() < amb.min_level()) throw PreconditionError("group stored below the ambient's minimum level");
    BigInt amb_order = amb.order(g.level());
    BigInt size(static_cast<std::uint64_t>(g.size()));
    if (amb_order % size != 0) throw ConsistencyError("group size does not divide the ambient order");
    int level = g.level();
    for (int n = amb.min_level(); n < g.level(); ++n) {
        BigInt fibers = big_pow(BigInt(amb.ell.value), static_cast<unsigned>(amb.dim() * (g.level() - n)));
        if (BigInt(static_cast<std::uint64_t>(g.reduce(n).size())) * fibers == size) {
            level = n;
            break;
        }
    }
    return {amb_order, amb_order / size, level};
}

struct CosetSplit {
    StoredGroup ring_part;                    // G intersected with the Cartan subgroup
    std::vector<std::uint64_t> reflection_ids; // the other coset (possibly empty)
};

// Split a subgroup of a normalizer ambient into its two cosets.
inline CosetSplit coset_split(const StoredGroup& g, const Ambient& amb) {
    if (amb.kind != AmbientKind::Normalizer) throw PreconditionError("coset_split needs a normalizer ambient");
    if (g.level() < amb.min_level()) throw PreconditionError("group stored below the ambient's minimum level");
    const QuadRing& ring = *amb.ring;
    std::vector<std::uint64_t> ring_ids, refl_ids;
    for (std::uint64_t id : g.ids()) {
        MatMod m = g.matrix(id);
        bool in_ring = ring.in_cartan(m);
        bool in_refl = ring.in_reflection(m);
        if (in_ring == in_refl) throw ConsistencyError("element fits both cosets or neither: " + m.str());
        (in_ring ? ring_ids : refl_ids).push_back(id);
    }
    if (!refl_ids.empty() && refl_ids.size() != ring_ids.size())
        throw ConsistencyError("nontrivial reflection coset has the wrong size");
    return {StoredGroup::from_ids(g.ell(), g.level(), std::move(ring_ids)), std::move(refl_ids)};
}

} // namespace eigenmu
