// Acceptance gate for the eigenspace-measure toolkit.
//
// Usage: acceptance <criterion 1..8> <specs-dir>
//
// Every check is an exact equality on rationals or big integers; each one
// prints a [PASS] or [FAIL] line and the process exits nonzero if any check
// failed.  The eight criteria:
//   1. full GL2 families at ell = 2, 3 against the closed forms + oracle
//   2. full split/nonsplit Cartan families at ell = 3, 5 + oracle
//   3. full Cartan-normalizer families at ell = 3 + oracle
//   4. ingestion of the bundled index-8 subgroup at ell = 2 (exact cells)
//   5. lift counts over the normalizer of the ramified ring (0,3) at ell = 3
//   6. verification sweep over the whole bundled problem corpus
//   7. total-mass invariant plus the ell = 2 cell-mass decomposition
//   8. lift-multiplier laws against exhaustive enumeration
#include <eigenmu/modarith.hpp>
#include <eigenmu/cartan.hpp>
#include <eigenmu/subgroup.hpp>
#include <eigenmu/eigenspace.hpp>
#include <eigenmu/measure.hpp>
#include <eigenmu/problem.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace eigenmu;

namespace {

struct Gate {
    int fails = 0;
    void check(bool ok, const std::string& label) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", label.c_str());
        std::fflush(stdout);
        if (!ok) ++fails;
    }
};

BigInt bpow(BigInt base, int e) {
    BigInt r = 1;
    while (e-- > 0) r *= base;
    return r;
}

Rat neg_pow(Prime ell, int k) { return Rat(1, bpow(ell.value, k)); }

// ---------------------------------------------------------------------------
// Reference values: the four-branch closed forms for the full groups.
// ---------------------------------------------------------------------------

Rat closed_form_gl2(Prime ell, int a, int b) {
    BigInt l = ell.value;
    if (a == 0 && b == 0) return Rat(l * l * l - 2 * l * l - l + 3, (l - 1) * (l - 1) * (l + 1));
    if (a == 0) return Rat(l * l - l - 1, l * (l - 1)) * neg_pow(ell, b);
    if (b == 0) return neg_pow(ell, 4 * a);
    return Rat(l + 1, 1) * neg_pow(ell, 4 * a + b + 1);
}

Rat closed_form_split(Prime ell, int a, int b) {
    BigInt l = ell.value;
    if (a == 0 && b == 0) return Rat((l - 2) * (l - 2), (l - 1) * (l - 1));
    if (a == 0) return Rat(2 * (l - 2), l - 1) * neg_pow(ell, b);
    if (b == 0) return neg_pow(ell, 2 * a);
    return Rat(2, 1) * neg_pow(ell, 2 * a + b);
}

Rat closed_form_nonsplit(Prime ell, int a, int b) {
    BigInt l = ell.value;
    if (a == 0 && b == 0) return Rat(l * l - 2, l * l - 1);
    if (b == 0) return neg_pow(ell, 2 * a);
    return Rat(0);
}

// Reflection-coset part shared by the split and nonsplit normalizers.
Rat closed_form_star(Prime ell, int a, int b) {
    BigInt l = ell.value;
    if (a != 0) return Rat(0);
    if (b == 0) return Rat(l - 2, l - 1);
    return neg_pow(ell, b);
}

Rat closed_form_normalizer(RingClass cls, Prime ell, int a, int b) {
    Rat ring = cls == RingClass::Split ? closed_form_split(ell, a, b)
                                       : closed_form_nonsplit(ell, a, b);
    return (ring + closed_form_star(ell, a, b)) / 2;
}

GroupScanner full_scanner(const Ambient& amb, Budget& budget) {
    return GroupScanner(StoredGroup::full(amb, amb.min_level(), budget), amb);
}

// Engine family against a reference formula on the grid a, b <= 2.
bool grid_matches(const MeasureFamily& fam, const std::function<Rat(int, int)>& ref) {
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; b <= 2; ++b)
            if (fam.evaluate(a, b) != ref(a, b)) return false;
    return true;
}

// Engine family against direct enumeration on every pair decided at
// modulus <= ell^3.
bool oracle_matches(const GroupScanner& sc, const MeasureFamily& fam) {
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; a + b + 1 <= 3; ++b) {
            Budget budget(1'000'000'000);
            if (fam.evaluate(a, b) != counting_measure(sc, a, b, budget)) return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// Criteria 1-3: full groups against closed forms and the counting oracle.
// ---------------------------------------------------------------------------

void criterion_1(Gate& gate) {
    Budget budget(2'000'000'000);
    GroupScanner sc2 = full_scanner(Ambient::gl2(Prime(2)), budget);
    GroupScanner sc3 = full_scanner(Ambient::gl2(Prime(3)), budget);
    MeasureFamily f2 = measure_family(sc2, budget);
    MeasureFamily f3 = measure_family(sc3, budget);

    gate.check(grid_matches(f2, [](int a, int b) { return closed_form_gl2(Prime(2), a, b); }),
               "full matrix group, ell=2: family matches the closed forms on a,b <= 2");
    gate.check(grid_matches(f3, [](int a, int b) { return closed_form_gl2(Prime(3), a, b); }),
               "full matrix group, ell=3: family matches the closed forms on a,b <= 2");
    gate.check(f2.evaluate(0, 0) == Rat(1, 3),
               "full matrix group, ell=2: mu_{0,0} = 1/3");
    gate.check(f3.evaluate(0, 0) == Rat(9, 16) && f3.evaluate(0, 1) == Rat(5, 18),
               "full matrix group, ell=3: mu_{0,0} = 9/16 and mu_{0,1} = 5/18");
    gate.check(oracle_matches(sc2, f2) && oracle_matches(sc3, f3),
               "full matrix groups: enumeration oracle agrees at modulus <= ell^3");
}

void criterion_2(Gate& gate) {
    struct Case {
        std::uint32_t ell;
        long long c, d;
        RingClass cls;
    };
    const std::vector<Case> cases = {{3, 0, 1, RingClass::Split},
                                     {3, 0, 2, RingClass::Nonsplit},
                                     {5, 0, 4, RingClass::Split},
                                     {5, 0, 2, RingClass::Nonsplit}};
    for (const Case& cs : cases) {
        Prime ell(cs.ell);
        Budget budget(2'000'000'000);
        QuadRing ring = QuadRing::from_poly(ell, BigInt(cs.c), BigInt(cs.d));
        GroupScanner sc = full_scanner(Ambient::cartan(ring), budget);
        MeasureFamily fam = measure_family(sc, budget);
        const bool split = cs.cls == RingClass::Split;
        const std::string name = std::string(split ? "split" : "nonsplit") +
                                 " torus, ell=" + std::to_string(cs.ell);
        auto ref = [&](int a, int b) {
            return split ? closed_form_split(ell, a, b) : closed_form_nonsplit(ell, a, b);
        };
        gate.check(grid_matches(fam, ref), name + ": family matches the closed forms on a,b <= 2");
        gate.check(oracle_matches(sc, fam), name + ": enumeration oracle agrees at modulus <= ell^3");
        if (cs.ell == 3 && split)
            gate.check(fam.evaluate(0, 0) == Rat(1, 4), name + ": mu_{0,0} = 1/4");
        if (cs.ell == 3 && !split)
            gate.check(fam.evaluate(0, 0) == Rat(7, 8), name + ": mu_{0,0} = 7/8");
        if (!split) {
            bool zeros = true;
            for (int a = 0; a <= 3; ++a)
                for (int b = 1; b <= 5; ++b) zeros &= fam.evaluate(a, b) == Rat(0);
            gate.check(zeros, name + ": mu vanishes for every b > 0");
        }
    }
}

void criterion_3(Gate& gate) {
    Prime ell(3);
    Budget budget(2'000'000'000);
    QuadRing sp = QuadRing::from_poly(ell, BigInt(0), BigInt(1));
    QuadRing ns = QuadRing::from_poly(ell, BigInt(0), BigInt(2));
    GroupScanner ssc = full_scanner(Ambient::normalizer(sp), budget);
    GroupScanner nsc = full_scanner(Ambient::normalizer(ns), budget);
    MeasureFamily sf = measure_family(ssc, budget);
    MeasureFamily nf = measure_family(nsc, budget);

    gate.check(sf.evaluate(0, 0) == Rat(3, 8), "split normalizer, ell=3: mu_{0,0} = 3/8");
    gate.check(nf.evaluate(0, 0) == Rat(11, 16), "nonsplit normalizer, ell=3: mu_{0,0} = 11/16");

    bool srow = true, nrow = true;
    for (int b = 1; b <= 5; ++b) {
        srow &= sf.evaluate(0, b) == neg_pow(ell, b);
        nrow &= nf.evaluate(0, b) == neg_pow(ell, b) / 2;
    }
    gate.check(srow, "split normalizer, ell=3: mu_{0,b} = 3^-b for b >= 1");
    gate.check(nrow, "nonsplit normalizer, ell=3: mu_{0,b} = 3^-b / 2 for b >= 1");

    gate.check(grid_matches(sf, [&](int a, int b) {
                   return closed_form_normalizer(RingClass::Split, ell, a, b);
               }),
               "split normalizer, ell=3: family matches the closed forms on a,b <= 2");
    gate.check(grid_matches(nf, [&](int a, int b) {
                   return closed_form_normalizer(RingClass::Nonsplit, ell, a, b);
               }),
               "nonsplit normalizer, ell=3: family matches the closed forms on a,b <= 2");
    gate.check(oracle_matches(ssc, sf) && oracle_matches(nsc, nf),
               "normalizers, ell=3: enumeration oracle agrees at modulus <= ell^3");
}

// ---------------------------------------------------------------------------
// Criterion 4: the bundled index-8 subgroup at ell = 2, exact family.
// ---------------------------------------------------------------------------

void criterion_4(Gate& gate, const std::filesystem::path& specs) {
    Problem p = Problem::from_file((specs / "gl2_l2_index8.json").string());
    Budget budget(p.budget_limit());
    StoredGroup g = p.group(budget);
    GroupScanner sc(g, p.ambient());
    MeasureFamily fam = measure_family(sc, budget);

    gate.check(p.ell().value == 2 && p.level() == 2 && p.generators() &&
                   p.generators()->size() == 2,
               "problem file ingested: ell=2, level 2, two generators");

    gate.check(fam.evaluate(0, 0) == Rat(1, 3), "mu_{0,0} = 1/3");
    gate.check(fam.evaluate(1, 0) == Rat(1, 12), "mu_{1,0} = 1/12");
    gate.check(fam.evaluate(0, 1) == Rat(0) && fam.evaluate(1, 1) == Rat(0),
               "mu_{a,1} = 0 for a in {0,1}");

    bool row0 = true, col0 = true, deep = true, row1 = true;
    for (int b = 2; b <= 8; ++b) row0 &= fam.evaluate(0, b) == neg_pow(Prime(2), b);
    for (int a = 2; a <= 5; ++a) col0 &= fam.evaluate(a, 0) == Rat(8, bpow(2, 4 * a));
    for (int a = 2; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b) deep &= fam.evaluate(a, b) == Rat(12, bpow(2, 4 * a + b));
    for (int b = 1; b <= 6; ++b) row1 &= fam.evaluate(1, b) == Rat(0);
    gate.check(row0, "mu_{0,b} = 2^-b for b >= 2");
    gate.check(col0, "mu_{a,0} = 8 * 2^-4a for a >= 2");
    gate.check(deep, "mu_{a,b} = 12 * 2^-(4a+b) for a >= 2, b >= 1");
    gate.check(row1, "mu_{1,b} = 0 for b >= 1");

    struct Want {
        NatSet as, bs;
        Rat c;
    };
    const std::vector<Want> want = {{NatSet::at(0), NatSet::at(0), Rat(1, 3)},
                                    {NatSet::at(0), NatSet::at(1), Rat(0)},
                                    {NatSet::at(0), NatSet::from(2), Rat(1)},
                                    {NatSet::at(1), NatSet::at(0), Rat(4, 3)},
                                    {NatSet::at(1), NatSet::from(1), Rat(0)},
                                    {NatSet::from(2), NatSet::at(0), Rat(8)},
                                    {NatSet::from(2), NatSet::from(1), Rat(12)}};
    bool cells_ok = fam.cells().size() == want.size();
    if (cells_ok)
        for (std::size_t i = 0; i < want.size(); ++i) {
            const Cell& c = fam.cells()[i];
            cells_ok &= c.a_set == want[i].as && c.b_set == want[i].bs && c.constant == want[i].c;
        }
    gate.check(cells_ok, "family decomposes into exactly the seven expected cells");
}

// ---------------------------------------------------------------------------
// Criterion 5: lift counts over the normalizer of the ramified ring (0,3).
// ---------------------------------------------------------------------------

void criterion_5(Gate& gate) {
    Prime ell(3);
    Budget budget(1'000'000'000);
    QuadRing ram = QuadRing::from_poly(ell, BigInt(0), BigInt(3));
    Ambient amb = Ambient::normalizer(ram);
    GroupScanner sc = full_scanner(amb, budget);
    MatMod ring_el = MatMod::from_ints(ell, 1, 1, 3, 1, 1);
    MatMod refl_el = MatMod::from_ints(ell, 1, 1, -3, 1, -1);
    gate.check(lift_count(sc, ring_el, 0, 1, budget) == 9,
               "[[1,3],[1,1]] has 9 lifts in the (0,1) stratum conditions");
    gate.check(lift_count(sc, refl_el, 0, 1, budget) == 6,
               "[[1,-3],[1,-1]] has 6 lifts in the (0,1) stratum conditions");
}

// ---------------------------------------------------------------------------
// Criterion 6: verification sweep over the bundled corpus.
// ---------------------------------------------------------------------------

void criterion_6(Gate& gate, const std::filesystem::path& specs) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(specs))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    gate.check(files.size() >= 12,
               "corpus contains >= 12 problem files (" + std::to_string(files.size()) + ")");

    std::set<std::string> kinds, classes;
    std::set<std::uint32_t> ells;
    bool has_full = false, has_proper = false;
    for (const auto& file : files) {
        Problem p = Problem::from_file(file.string());
        Budget budget(p.budget_limit());
        StoredGroup g = p.group(budget);
        GroupScanner sc(g, p.ambient());

        kinds.insert(ambient_kind_name(p.ambient().kind));
        if (p.ambient().ring) classes.insert(ring_class_name(p.ambient().ring->cls()));
        ells.insert(p.ell().value);
        GroupDiagnostics diag = diagnose(g, p.ambient());
        (diag.index == 1 ? has_full : has_proper) = true;

        MeasureFamily fam = measure_family(sc, budget);
        VerifyReport rep = verify_family(sc, fam, 2, 3, p.budget_limit());
        std::ostringstream line;
        line << file.filename().string() << ": " << rep.passes << " pass, " << rep.fails
             << " fail, " << rep.skips << " skip";
        gate.check(rep.fails == 0 && rep.passes >= 1, line.str());
    }
    gate.check(kinds.count("gl2") && kinds.count("cartan") && kinds.count("normalizer"),
               "corpus covers all three ambient kinds");
    gate.check(classes.count("split") && classes.count("nonsplit") && classes.count("ramified"),
               "corpus covers split, nonsplit and ramified rings");
    gate.check(ells.count(2) && ells.count(3) && ells.count(5), "corpus covers ell in {2,3,5}");
    gate.check(has_full && has_proper, "corpus includes full groups and proper subgroups");
}

// ---------------------------------------------------------------------------
// Criterion 7: mass invariant.
// ---------------------------------------------------------------------------

void criterion_7(Gate& gate, const std::filesystem::path& specs) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(specs))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    bool all_one = !files.empty();
    for (const auto& file : files) {
        Problem p = Problem::from_file(file.string());
        Budget budget(p.budget_limit());
        StoredGroup g = p.group(budget);
        GroupScanner sc(g, p.ambient());
        MeasureFamily fam = measure_family(sc, budget);
        Rat sum = 0;
        for (const Cell& c : fam.cells()) sum += fam.cell_mass(c);
        all_one &= sum == Rat(1) && fam.total_mass() == Rat(1);
    }
    gate.check(all_one, "every family in the corpus has total mass exactly 1 (" +
                            std::to_string(files.size()) + " families)");

    Budget budget(1'000'000'000);
    GroupScanner sc = full_scanner(Ambient::gl2(Prime(2)), budget);
    MeasureFamily fam = measure_family(sc, budget);
    const std::vector<Rat> masses = {Rat(1, 3), Rat(1, 2), Rat(1, 15), Rat(1, 10)};
    bool decomposition = fam.cells().size() == masses.size();
    Rat sum = 0;
    if (decomposition)
        for (std::size_t i = 0; i < masses.size(); ++i) {
            decomposition &= fam.cell_mass(fam.cells()[i]) == masses[i];
            sum += masses[i];
        }
    gate.check(decomposition && sum == Rat(1),
               "full matrix group, ell=2: cell masses are 1/3 + 1/2 + 1/15 + 1/10 = 1");
}

// ---------------------------------------------------------------------------
// Criterion 8: lift-multiplier laws against exhaustive enumeration.
// ---------------------------------------------------------------------------

constexpr int kAMax = 3;
constexpr int kBMax = 4;
constexpr int kTargets = (kAMax + 1) * (kBMax + 1);

std::size_t pack_index(const std::array<std::uint64_t, 4>& e, std::uint64_t step) {
    return static_cast<std::size_t>(((e[3] % step * step + e[2] % step) * step + e[1] % step) *
                                        step +
                                    e[0] % step);
}

// For every group element mod ell^(n+1), bucket by its reduction mod ell^n
// and record which visible stratum conditions it satisfies.
std::vector<std::array<long long, kTargets>> child_counts(const GroupScanner& sc, int n,
                                                          CosetFilter filter, DetPrecision dp) {
    const std::uint64_t step = prime_pow_u64(sc.ell(), static_cast<unsigned>(n));
    const std::uint64_t mod = prime_pow_u64(sc.ell(), static_cast<unsigned>(n + 1));
    const std::uint64_t dext = dp == DetPrecision::TraceZero ? sc.d_ext(n + 1) : 0;
    const std::uint32_t l = sc.ell().value;
    std::vector<std::array<long long, kTargets>> counts(
        static_cast<std::size_t>(step) * step * step * step);
    for (auto& row : counts) row.fill(0);
    Budget budget(2'000'000'000);
    sc.scan(n + 1, filter, budget, [&](const std::array<std::uint64_t, 4>& e) {
        auto& row = counts[pack_index(e, step)];
        for (int a = 0; a <= kAMax; ++a)
            for (int b = 0; b <= kBMax; ++b)
                if (detail::raw_stratum_approx(e, l, n + 1, mod, a, b, dp, dext))
                    ++row[a * (kBMax + 1) + b];
    });
    return counts;
}

// Exhaustive check of the generic lift multiplier: every element mod ell^n
// satisfying the visible (a, b) conditions has exactly
// lift_factor_general(t, ell, n, a, b) children still satisfying them.
bool check_general_lifts(const GroupScanner& sc, const TangentCounts& t, int n,
                         long long& matched) {
    const auto counts = child_counts(sc, n, CosetFilter::All, DetPrecision::Standard);
    const std::uint64_t step = prime_pow_u64(sc.ell(), static_cast<unsigned>(n));
    const std::uint32_t l = sc.ell().value;
    Budget budget(2'000'000'000);
    bool ok = true;
    sc.scan(n, CosetFilter::All, budget, [&](const std::array<std::uint64_t, 4>& e) {
        const auto& row = counts[pack_index(e, step)];
        for (int a = 0; a <= kAMax; ++a)
            for (int b = 0; b <= kBMax; ++b) {
                if (!detail::raw_stratum_approx(e, l, n, step, a, b, DetPrecision::Standard, 0))
                    continue;
                ++matched;
                if (BigInt(row[a * (kBMax + 1) + b]) != lift_factor_general(t, sc.ell(), n, a, b))
                    ok = false;
            }
    });
    return ok && matched > 0;
}

// Exhaustive check of the reflection-coset lift multiplier over a normalizer.
bool check_star_lifts(const GroupScanner& sc, int n, long long& matched) {
    const QuadRing& ring = *sc.ambient().ring;
    const DetPrecision dp = sc.det_precision(true);
    const int arow_max =
        (!ring.ell().odd() && ring.cls() == RingClass::Ramified) ? 1 : 0;
    const auto counts = child_counts(sc, n, CosetFilter::ReflectionCoset, dp);
    const std::uint64_t step = prime_pow_u64(sc.ell(), static_cast<unsigned>(n));
    const std::uint64_t dext = dp == DetPrecision::TraceZero ? sc.d_ext(n) : 0;
    const std::uint32_t l = sc.ell().value;
    Budget budget(2'000'000'000);
    bool ok = true;
    sc.scan(n, CosetFilter::ReflectionCoset, budget, [&](const std::array<std::uint64_t, 4>& e) {
        const auto& row = counts[pack_index(e, step)];
        for (int a = 0; a <= kAMax; ++a)
            for (int b = 0; b <= kBMax; ++b) {
                if (!detail::raw_stratum_approx(e, l, n, step, a, b, dp, dext)) continue;
                // Deeper identity levels never occur in the reflection coset.
                if (a > arow_max) {
                    ok = false;
                    continue;
                }
                ++matched;
                if (BigInt(row[a * (kBMax + 1) + b]) !=
                    lift_factor_normalizer_star(ring, n, a, b))
                    ok = false;
            }
    });
    return ok && matched > 0;
}

// Exhaustive constancy check over a ramified torus.  Here the stratum sets
// must be taken exactly: reduce the members of each stratum (decided at a
// deep modulus) to ell^(n+1) and ell^n, and require that every reduced
// element mod ell^n carries the same number of reduced elements mod
// ell^(n+1) above it.  The visible-condition classes used by the generic law
// are genuinely coarser here (the determinant valuation saturates against
// v(d)), so they would mix strata and break constancy.
bool check_ramified_constancy(const GroupScanner& sc, int n, long long& matched) {
    constexpr int kCA = 2, kCB = 3;
    const int mtop = kCA + kCB + 1;
    const std::uint64_t child_step = prime_pow_u64(sc.ell(), static_cast<unsigned>(n + 1));
    const std::uint64_t parent_step = prime_pow_u64(sc.ell(), static_cast<unsigned>(n));
    const std::uint64_t mod_top = prime_pow_u64(sc.ell(), static_cast<unsigned>(mtop));
    const std::uint32_t l = sc.ell().value;
    const std::size_t child_space =
        static_cast<std::size_t>(child_step) * child_step * child_step * child_step;

    std::vector<std::vector<bool>> present(
        (kCA + 1) * (kCB + 1), std::vector<bool>(child_space, false));
    Budget budget(4'000'000'000ull);
    sc.scan(mtop, CosetFilter::All, budget, [&](const std::array<std::uint64_t, 4>& e) {
        StratumClass c = detail::raw_classify(e, l, mtop, mod_top);
        if (!c.determined || c.a > kCA || c.b > kCB) return;
        present[c.a * (kCB + 1) + c.b][pack_index(e, child_step)] = true;
    });

    bool ok = true;
    for (const auto& bits : present) {
        std::map<std::uint64_t, long long> per_parent;
        for (std::size_t idx = 0; idx < child_space; ++idx) {
            if (!bits[idx]) continue;
            std::array<std::uint64_t, 4> e = {idx % child_step,
                                              idx / child_step % child_step,
                                              idx / (child_step * child_step) % child_step,
                                              idx / (child_step * child_step * child_step)};
            ++per_parent[pack_index(e, parent_step)];
        }
        if (per_parent.empty()) continue;
        const long long lifts = per_parent.begin()->second;
        for (const auto& [key, count] : per_parent) {
            (void)key;
            ++matched;
            if (count != lifts) ok = false;
        }
    }
    return ok && matched > 0;
}

void criterion_8(Gate& gate) {
    // Generic law: full groups, plus proper subgroups stored at their level.
    struct GeneralCase {
        std::string name;
        GroupScanner sc;
        TangentCounts t;
    };
    Budget setup(2'000'000'000);
    std::vector<GeneralCase> general;
    for (std::uint32_t lv : {2u, 3u}) {
        Prime ell(lv);
        general.push_back({"full matrix group, ell=" + std::to_string(lv),
                           full_scanner(Ambient::gl2(ell), setup), tangent_counts_gl2(ell)});
    }
    auto add_cartan = [&](std::uint32_t lv, long long c, long long d, const std::string& name) {
        Prime ell(lv);
        QuadRing ring = QuadRing::from_poly(ell, BigInt(c), BigInt(d));
        general.push_back(
            {name, full_scanner(Ambient::cartan(ring), setup), ring.tangent_counts()});
    };
    add_cartan(2, 1, 0, "split torus, ell=2");
    add_cartan(2, 1, 1, "nonsplit torus, ell=2");
    add_cartan(3, 0, 1, "split torus, ell=3");
    add_cartan(3, 0, 2, "nonsplit torus, ell=3");
    {
        Prime ell(2);
        std::vector<MatMod> gens = {MatMod::from_ints(ell, 2, 3, 3, 0, 1),
                                    MatMod::from_ints(ell, 2, 1, 1, 3, 0)};
        general.push_back({"index-8 subgroup of the full matrix group, ell=2",
                           GroupScanner(StoredGroup::closure(ell, 2, gens, setup),
                                        Ambient::gl2(ell)),
                           tangent_counts_gl2(ell)});
    }
    {
        Prime ell(3);
        QuadRing ring = QuadRing::from_poly(ell, BigInt(0), BigInt(1));
        std::vector<MatMod> gens = {MatMod::from_ints(ell, 1, 0, 1, 1, 0)};
        general.push_back({"index-2 subgroup of the split torus, ell=3",
                           GroupScanner(StoredGroup::closure(ell, 1, gens, setup),
                                        Ambient::cartan(ring)),
                           ring.tangent_counts()});
    }
    for (const GeneralCase& cs : general) {
        bool ok = true;
        long long matched = 0;
        for (int n = cs.sc.level(); n <= 2; ++n)
            ok &= check_general_lifts(cs.sc, cs.t, n, matched);
        std::ostringstream line;
        line << "generic lift multiplier: " << cs.name << " (" << matched << " checks)";
        gate.check(ok, line.str());
    }

    // Reflection-coset law over normalizers.
    struct StarCase {
        std::string name;
        GroupScanner sc;
    };
    std::vector<StarCase> star;
    auto add_norm = [&](std::uint32_t lv, long long c, long long d, const std::string& name) {
        Prime ell(lv);
        QuadRing ring = QuadRing::from_poly(ell, BigInt(c), BigInt(d));
        star.push_back({name, full_scanner(Ambient::normalizer(ring), setup)});
    };
    add_norm(3, 0, 1, "split normalizer, ell=3");
    add_norm(3, 0, 2, "nonsplit normalizer, ell=3");
    add_norm(3, 0, 3, "ramified normalizer, ell=3");
    add_norm(2, 1, 0, "split normalizer, ell=2");
    add_norm(2, 1, 1, "nonsplit normalizer, ell=2");
    add_norm(2, 0, 2, "ramified normalizer, ell=2");
    add_norm(2, 0, 1, "ramified normalizer of the square-discriminant ring, ell=2");
    {
        Prime ell(3);
        QuadRing ring = QuadRing::from_poly(ell, BigInt(0), BigInt(1));
        std::vector<MatMod> gens = {MatMod::from_ints(ell, 1, 0, 1, 2, 0)};
        star.push_back({"order-4 subgroup of the split normalizer, ell=3",
                        GroupScanner(StoredGroup::closure(ell, 1, gens, setup),
                                     Ambient::normalizer(ring))});
    }
    for (const StarCase& cs : star) {
        bool ok = true;
        long long matched = 0;
        for (int n = cs.sc.level(); n <= 2; ++n) ok &= check_star_lifts(cs.sc, n, matched);
        std::ostringstream line;
        line << "reflection lift multiplier: " << cs.name << " (" << matched << " checks)";
        gate.check(ok, line.str());
    }

    // Constancy over ramified tori (the law the census engine relies on).
    struct RamCase {
        std::string name;
        GroupScanner sc;
    };
    std::vector<RamCase> ram;
    auto add_ram = [&](std::uint32_t lv, long long d, const std::string& name) {
        Prime ell(lv);
        QuadRing ring = QuadRing::from_poly(ell, BigInt(0), BigInt(d));
        ram.push_back({name, full_scanner(Ambient::cartan(ring), setup)});
    };
    add_ram(3, 3, "ramified torus (0,3), ell=3");
    add_ram(3, 9, "ramified torus (0,9), ell=3");
    add_ram(3, 18, "ramified torus (0,18), ell=3");
    add_ram(2, 2, "ramified torus (0,2), ell=2");
    add_ram(2, 1, "ramified torus (0,1), ell=2");
    add_ram(2, 12, "ramified torus (0,12), ell=2");
    for (const RamCase& cs : ram) {
        bool ok = true;
        long long matched = 0;
        for (int n = cs.sc.level(); n <= 2; ++n)
            ok &= check_ramified_constancy(cs.sc, n, matched);
        std::ostringstream line;
        line << "ramified lift constancy: " << cs.name << " (" << matched << " checks)";
        gate.check(ok, line.str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..8> <specs-dir>\n");
        return 2;
    }
    const int criterion = std::atoi(argv[1]);
    const std::filesystem::path specs(argv[2]);
    Gate gate;
    try {
        switch (criterion) {
            case 1: criterion_1(gate); break;
            case 2: criterion_2(gate); break;
            case 3: criterion_3(gate); break;
            case 4: criterion_4(gate, specs); break;
            case 5: criterion_5(gate); break;
            case 6: criterion_6(gate, specs); break;
            case 7: criterion_7(gate, specs); break;
            case 8: criterion_8(gate); break;
            default:
                std::fprintf(stderr, "unknown criterion %d\n", criterion);
                return 2;
        }
    } catch (const std::exception& e) {
        gate.check(false, std::string("unexpected exception: ") + e.what());
    }
    return gate.fails == 0 ? 0 : 1;
}
