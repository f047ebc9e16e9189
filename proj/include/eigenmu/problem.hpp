#pragma once
//
// Problem files: the JSON format consumed by the command-line tool, plus
// the verification report shared by the CLI and the test suites.
//
// A problem file names a prime, an ambient (GL2, a quadratic ring's unit
// group, or that group's normalizer), a working level, and optionally a
// generator list and an enumeration budget:
//
//     {
//       "ell": 2,
//       "ambient": {"kind": "gl2"},
//       "level": 2,
//       "generators": [[3, 3, 0, 1], [1, 1, 3, 0]],
//       "budget": 100000000
//     }
//
// Ring ambients carry integer parameters c and d describing multiplication
// by a root of x^2 = c x + d; they are normalized on ingest. Generators are
// row-major quadruples (nested pairs of rows are also accepted) and are
// reduced mod ell^level. A missing "generators" key means the full ambient
// group; an empty list means the trivial group. dump() emits the canonical
// form, which reparses to an identical problem.

#include "eigenmu/measure.hpp"

#include <json.hpp>

#include <array>
#include <atomic>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace eigenmu {

using Json = nlohmann::ordered_json;

class Problem {
public:
    static Problem from_text(const std::string& text) {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw SpecError(std::string("problem file is not valid JSON: ") + e.what());
        }
        return from_json(j);
    }

    static Problem from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw SpecError("cannot open problem file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_text(buf.str());
    }

    static Problem from_json(const Json& j) {
        if (!j.is_object()) throw SpecError("problem file must contain a JSON object");
        for (const auto& item : j.items())
            if (item.key() != "ell" && item.key() != "ambient" && item.key() != "level" &&
                item.key() != "generators" && item.key() != "budget")
                throw SpecError("unknown field in problem file: " + item.key());

        Prime ell(static_cast<std::uint32_t>(require_int(j, "ell", 2, 65535)));
        Ambient ambient = parse_ambient(ell, j);
        long long level = require_int(j, "level", 1, 16);
        if (level < ambient.min_level())
            throw SpecError("level " + std::to_string(level) + " is below the minimum working level " +
                            std::to_string(ambient.min_level()) + " for this ambient");

        Problem p(ell, std::move(ambient), static_cast<int>(level));
        if (j.contains("budget")) p.budget_limit_ = static_cast<std::uint64_t>(
            require_int(j, "budget", 1, 4'000'000'000'000'000'000LL));
        if (j.contains("generators")) p.generators_ = parse_generators(j.at("generators"), ell, p.level_);
        return p;
    }

    Prime ell() const { return ell_; }
    const Ambient& ambient() const { return ambient_; }
    int level() const { return level_; }
    std::uint64_t budget_limit() const { return budget_limit_; }
    const std::optional<std::vector<std::array<long long, 4>>>& generators() const {
        return generators_;
    }

    /// Canonical JSON text: normalized ambient, reduced generators, resolved
    /// budget. Reparsing yields an identical problem.
    std::string dump() const {
        Json j;
        j["ell"] = ell_.value;
        Json amb;
        amb["kind"] = ambient_kind_name(ambient_.kind);
        if (ambient_.ring) {
            amb["c"] = bigint_to_ll(ambient_.ring->c());
            amb["d"] = bigint_to_ll(ambient_.ring->d());
        }
        j["ambient"] = std::move(amb);
        j["level"] = level_;
        if (generators_) {
            Json gens = Json::array();
            for (const auto& g : *generators_) gens.push_back(Json::array({g[0], g[1], g[2], g[3]}));
            j["generators"] = std::move(gens);
        }
        j["budget"] = budget_limit_;
        return j.dump(2) + "\n";
    }

    /// Build the stored group: the closure of the generators, or the full
    /// ambient when no generator list was given.
    StoredGroup group(Budget& budget) const {
        if (!generators_) return StoredGroup::full(ambient_, level_, budget);
        std::vector<MatMod> gens;
        gens.reserve(generators_->size());
        for (const auto& g : *generators_)
            gens.push_back(MatMod::from_ints(ell_, level_, g[0], g[1], g[2], g[3]));
        for (const MatMod& g : gens)
            if (!ambient_.contains(g))
                throw SpecError("generator " + g.str() + " lies outside the ambient group");
        return StoredGroup::closure(ell_, level_, gens, budget);
    }

    GroupScanner scanner(Budget& budget) const { return GroupScanner(group(budget), ambient_); }

private:
    Problem(Prime ell, Ambient ambient, int level)
        : ell_(ell), ambient_(std::move(ambient)), level_(level) {}

    static long long require_int(const Json& j, const char* key, long long lo, long long hi) {
        if (!j.contains(key)) throw SpecError(std::string("problem file is missing field: ") + key);
        const Json& v = j.at(key);
        if (!v.is_number_integer())
            throw SpecError(std::string("field must be an integer: ") + key);
        long long n = v.get<long long>();
        if (n < lo || n > hi)
            throw SpecError(std::string("field out of range: ") + key + " = " + std::to_string(n));
        return n;
    }

    static Ambient parse_ambient(Prime ell, const Json& j) {
        if (!j.contains("ambient") || !j.at("ambient").is_object())
            throw SpecError("problem file needs an \"ambient\" object");
        const Json& a = j.at("ambient");
        for (const auto& item : a.items())
            if (item.key() != "kind" && item.key() != "c" && item.key() != "d")
                throw SpecError("unknown field in ambient: " + item.key());
        if (!a.contains("kind") || !a.at("kind").is_string())
            throw SpecError("ambient needs a string field \"kind\"");
        std::string kind = a.at("kind").get<std::string>();
        if (kind == "gl2") {
            if (a.contains("c") || a.contains("d"))
                throw SpecError("ring parameters c, d do not apply to the gl2 ambient");
            return Ambient::gl2(ell);
        }
        if (kind != "cartan" && kind != "normalizer")
            throw SpecError("ambient kind must be one of gl2, cartan, normalizer");
        long long c = require_int(a, "c", -(1LL << 62), 1LL << 62);
        long long d = require_int(a, "d", -(1LL << 62), 1LL << 62);
        QuadRing ring = QuadRing::from_poly(ell, BigInt(c), BigInt(d));
        return kind == "cartan" ? Ambient::cartan(std::move(ring))
                                : Ambient::normalizer(std::move(ring));
    }

    static std::vector<std::array<long long, 4>> parse_generators(const Json& g, Prime ell,
                                                                  int level) {
        if (!g.is_array()) throw SpecError("generators must be an array of matrices");
        BigInt mod = prime_pow(ell, static_cast<unsigned>(level));
        std::vector<std::array<long long, 4>> out;
        for (const Json& entry : g) {
            std::array<long long, 4> e{};
            if (entry.is_array() && entry.size() == 4) {
                for (int i = 0; i < 4; ++i) e[i] = gen_entry(entry.at(i));
            } else if (entry.is_array() && entry.size() == 2 && entry.at(0).is_array() &&
                       entry.at(0).size() == 2 && entry.at(1).is_array() && entry.at(1).size() == 2) {
                e = {gen_entry(entry.at(0).at(0)), gen_entry(entry.at(0).at(1)),
                     gen_entry(entry.at(1).at(0)), gen_entry(entry.at(1).at(1))};
            } else {
                throw SpecError("each generator must be [a, b, c, d] or [[a, b], [c, d]]");
            }
            for (long long& x : e)
                x = static_cast<long long>(mod_nonneg(BigInt(x), mod).convert_to<long long>());
            out.push_back(e);
        }
        return out;
    }

    static long long gen_entry(const Json& v) {
        if (!v.is_number_integer()) throw SpecError("generator entries must be integers");
        return v.get<long long>();
    }

    static long long bigint_to_ll(const BigInt& x) {
        if (x < std::numeric_limits<long long>::min() || x > std::numeric_limits<long long>::max())
            throw SpecError("normalized ring parameter does not fit a 64-bit integer");
        return x.convert_to<long long>();
    }

    Prime ell_;
    Ambient ambient_;
    int level_;
    std::optional<std::vector<std::array<long long, 4>>> generators_;
    std::uint64_t budget_limit_ = Budget::kDefaultLimit;
};

// ---------------------------------------------------------------------------
// Oracle verification report, shared by the CLI and the acceptance suite.
// ---------------------------------------------------------------------------

struct VerifyLine {
    enum class Kind { Pass, Fail, Skip };
    int a = 0;
    int b = 0;
    Kind kind = Kind::Skip;
    Rat family_value; // family evaluation (Pass/Fail)
    Rat counted;      // counting-oracle value (Pass/Fail)
    BigInt cost;      // enumeration cost that triggered a Skip
};

struct VerifyReport {
    std::vector<VerifyLine> lines;
    int passes = 0;
    int fails = 0;
    int skips = 0;
};

/// Compare the family against the exhaustive counting oracle on the grid
/// a <= a_max, b <= b_max. Pairs whose enumeration would exceed the budget
/// limit are reported as skips, each runnable pair gets its own budget, and
/// `jobs` worker threads share the grid.
inline VerifyReport verify_family(const GroupScanner& sc, const MeasureFamily& fam, int a_max,
                                  int b_max, std::uint64_t budget_limit, int jobs = 1) {
    if (a_max < 0 || b_max < 0) throw PreconditionError("verification range must be nonnegative");
    std::vector<std::pair<int, int>> grid;
    for (int a = 0; a <= a_max; ++a)
        for (int b = 0; b <= b_max; ++b) grid.emplace_back(a, b);

    std::vector<VerifyLine> lines(grid.size());
    auto run_pair = [&](std::size_t i) {
        auto [a, b] = grid[i];
        VerifyLine& line = lines[i];
        line.a = a;
        line.b = b;
        int m = std::max(sc.level(), a + b + 1);
        BigInt cost = sc.entry_cost(m);
        if (cost > budget_limit) {
            line.kind = VerifyLine::Kind::Skip;
            line.cost = cost;
            return;
        }
        Budget budget(budget_limit);
        line.family_value = fam.evaluate(a, b);
        line.counted = counting_measure(sc, a, b, budget);
        line.kind = line.family_value == line.counted ? VerifyLine::Kind::Pass
                                                      : VerifyLine::Kind::Fail;
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) run_pair(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        std::size_t n = std::min(static_cast<std::size_t>(jobs), grid.size());
        workers.reserve(n);
        for (std::size_t w = 0; w < n; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1))
                    run_pair(i);
            });
        for (std::thread& t : workers) t.join();
    }

    VerifyReport report;
    report.lines = std::move(lines);
    for (const VerifyLine& line : report.lines) {
        if (line.kind == VerifyLine::Kind::Pass) ++report.passes;
        else if (line.kind == VerifyLine::Kind::Fail) ++report.fails;
        else ++report.skips;
    }
    return report;
}

} // namespace eigenmu
