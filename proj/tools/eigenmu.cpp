//
// eigenmu: exact eigenspace-measure families for open subgroups of
// GL2(Z_ell), Cartan subgroups, and Cartan normalizers.
//
// Subcommands: classify (ring and group diagnostics), measure (emit the
// complete measure family and an optional evaluation grid), verify (compare
// the family against the exhaustive counting oracle).
//
// Exit codes: 0 success, 1 internal failure, 2 problem-file error,
// 3 enumeration budget exceeded (or nothing verifiable within it),
// 4 verification mismatch.

#include <eigenmu/problem.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

using namespace eigenmu;

std::string law_string(const MeasureFamily& fam) {
    std::string l = std::to_string(fam.ell().value);
    return l + "^-(" + std::to_string(fam.dim()) + "*a+b)";
}

void print_ring(const QuadRing& ring) {
    std::cout << "ring: (" << ring.c() << ", " << ring.d() << ")\n";
    std::cout << "class: " << ring_class_name(ring.cls()) << "\n";
}

void print_group(const Problem& p, Budget& budget) {
    StoredGroup g = p.group(budget);
    GroupDiagnostics diag = diagnose(g, p.ambient());
    std::cout << "group order: " << BigInt(static_cast<std::uint64_t>(g.size())) << " (at level "
              << g.level() << ")\n";
    std::cout << "ambient index: " << diag.index << "\n";
    std::cout << "group level: " << diag.level << "\n";
    if (p.ambient().kind == AmbientKind::Normalizer) {
        CosetSplit split = coset_split(g, p.ambient());
        std::cout << "ring coset size: " << split.ring_part.size() << "\n";
        std::cout << "reflection coset size: " << split.reflection_ids.size() << "\n";
    }
}

int cmd_classify(const Problem& p, std::uint64_t budget_limit) {
    std::cout << "ell: " << p.ell().value << "\n";
    std::cout << "ambient: " << ambient_kind_name(p.ambient().kind) << "\n";
    TangentCounts t = p.ambient().ring ? p.ambient().ring->tangent_counts()
                                       : tangent_counts_gl2(p.ell());
    if (p.ambient().ring) print_ring(*p.ambient().ring);
    std::cout << "tangent: total=" << t.total << " units=" << t.units << " singular=" << t.sing
              << "\n";
    std::cout << "ambient order at level " << p.level() << ": " << p.ambient().order(p.level())
              << "\n";
    if (p.ambient().kind == AmbientKind::Normalizer)
        std::cout << "reflection representative: "
                  << p.ambient().ring->reflection(p.level(), BigInt(1), BigInt(0)).str() << "\n";
    Budget budget(budget_limit);
    print_group(p, budget);
    return 0;
}

int cmd_measure(const Problem& p, std::uint64_t budget_limit, int a_max, int b_max,
                const std::string& csv_path) {
    Budget budget(budget_limit);
    GroupScanner sc = p.scanner(budget);
    MeasureFamily fam = measure_family(sc, budget);

    std::cout << "ell: " << p.ell().value << "\n";
    std::cout << "ambient: " << ambient_kind_name(p.ambient().kind) << "\n";
    if (p.ambient().ring) print_ring(*p.ambient().ring);
    print_group(p, budget);
    std::cout << "law: mu_{a,b} = constant * " << law_string(fam) << "\n";
    std::cout << "cells: " << fam.cells().size() << "\n";
    for (const Cell& cell : fam.cells())
        std::cout << "cell: " << cell.a_set.str("a") << " " << cell.b_set.str("b")
                  << " constant=" << rat_str(cell.constant) << " law=" << law_string(fam)
                  << " origin=" << cell.origin << "\n";
    std::cout << "total mass: " << rat_str(fam.total_mass()) << "\n";
    for (int a = 0; a <= a_max; ++a)
        for (int b = 0; b <= b_max; ++b)
            std::cout << "mu: a=" << a << " b=" << b << " " << rat_str(fam.evaluate(a, b)) << "\n";

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw SpecError("cannot open CSV output path: " + csv_path);
        csv << "a,b,mu\n";
        for (int a = 0; a <= a_max; ++a)
            for (int b = 0; b <= b_max; ++b)
                csv << a << "," << b << "," << rat_str(fam.evaluate(a, b)) << "\n";
    }
    return 0;
}

int cmd_verify(const Problem& p, std::uint64_t budget_limit, int a_max, int b_max, int jobs) {
    Budget budget(budget_limit);
    GroupScanner sc = p.scanner(budget);
    MeasureFamily fam = measure_family(sc, budget);
    VerifyReport report = verify_family(sc, fam, a_max, b_max, budget_limit, jobs);
    for (const VerifyLine& line : report.lines) {
        switch (line.kind) {
        case VerifyLine::Kind::Pass:
            std::cout << "PASS a=" << line.a << " b=" << line.b << " mu="
                      << rat_str(line.family_value) << "\n";
            break;
        case VerifyLine::Kind::Fail:
            std::cout << "FAIL a=" << line.a << " b=" << line.b
                      << " family=" << rat_str(line.family_value)
                      << " counted=" << rat_str(line.counted) << "\n";
            break;
        case VerifyLine::Kind::Skip:
            std::cout << "SKIP a=" << line.a << " b=" << line.b << " cost=" << line.cost
                      << " budget=" << budget_limit << "\n";
            break;
        }
    }
    std::cout << "verify: " << report.passes << " pass, " << report.fails << " fail, "
              << report.skips << " skip\n";
    if (report.fails > 0) return 4;
    if (report.passes == 0) return 3;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact eigenspace-measure families for open subgroups of GL2(Z_ell)"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string csv_path;
    int a_max = 2;
    int b_max = 3;
    int jobs = 1;
    std::uint64_t budget_override = 0;
    bool dump_spec = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("spec", spec_path, "problem file (JSON)")->required();
        cmd->add_option("--budget", budget_override, "override the enumeration budget");
        cmd->add_flag("--dump-spec", dump_spec, "print the canonical problem file and exit");
    };
    CLI::App* classify = app.add_subcommand("classify", "ring and group diagnostics");
    add_common(classify);
    CLI::App* measure = app.add_subcommand("measure", "compute the measure family");
    add_common(measure);
    measure->add_option("--a-max", a_max, "largest a in the evaluation grid");
    measure->add_option("--b-max", b_max, "largest b in the evaluation grid");
    measure->add_option("--csv", csv_path, "write the evaluation grid to this CSV file");
    CLI::App* verify = app.add_subcommand("verify", "cross-check the family by exhaustive counting");
    add_common(verify);
    verify->add_option("--a-max", a_max, "largest a to verify");
    verify->add_option("--b-max", b_max, "largest b to verify");
    verify->add_option("--jobs", jobs, "worker threads for counting scans");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        eigenmu::Problem p = eigenmu::Problem::from_file(spec_path);
        std::uint64_t limit = budget_override != 0 ? budget_override : p.budget_limit();
        if (dump_spec) {
            std::cout << p.dump();
            return 0;
        }
        if (classify->parsed()) return cmd_classify(p, limit);
        if (measure->parsed()) return cmd_measure(p, limit, a_max, b_max, csv_path);
        return cmd_verify(p, limit, a_max, b_max, jobs);
    } catch (const eigenmu::ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const eigenmu::ConsistencyError& e) {
        std::cerr << "internal consistency failure: " << e.what() << "\n";
        return 1;
    } catch (const eigenmu::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return 1;
    }
}
