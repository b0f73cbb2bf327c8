// Acceptance gate: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line each. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coarse/coarse_map.hpp"
#include "coarse/ends.hpp"
#include "coarse/sequence.hpp"
#include "coarse/space.hpp"
#include "property_suites.hpp"

using namespace coarse;

namespace {

int failures = 0;

void verdict(int criterion, const std::string& what, bool ok,
             const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << what;
    if (!ok && !detail.empty()) std::cout << " [" << detail << "]";
    std::cout << std::endl;
    if (!ok) ++failures;
}

SigmaConfig config_with(double r_max) {
    SigmaConfig config;
    config.filtration.r_max = r_max;
    return config;
}

struct PairFixture {
    CoarseMapWitness f, g;
    double k_source, k_target;
};

PairFixture floor_pair(double r_max) {
    auto net = builtin_space("real-net", {.eps = 0.5});
    auto ints = builtin_space("integers");
    return {builtin_map("floor", truncate_shared(net, r_max), ints),
            builtin_map("inclusion", truncate_shared(ints, r_max), net), 1, 1};
}

PairFixture vase_pair(double r_max) {
    auto vase = builtin_space("vase-net", {.eps = 1.0});
    auto half = builtin_space("halfline-net", {.eps = 1.0});
    return {builtin_map("vase-project", truncate_shared(vase, r_max), half),
            builtin_map("vase-embed", truncate_shared(half, r_max), vase), 2, 1};
}

// forward and backward induced end maps plus the mutual-inverse check
bool end_maps_invertible(const PairFixture& pair, double r_max, std::string& detail) {
    auto result = verify_coarse_equivalence(pair.f, pair.g, {1.0, 2.0, 4.0},
                                            pair.k_source, pair.k_target);
    if (!result.verified) {
        detail = "equivalence not verified: " + result.violation;
        return false;
    }
    FiltrationConfig filt;
    filt.r_max = r_max;
    const double m_g = std::max(bornology_profile(pair.g, {pair.k_target})[0].second,
                                pair.k_source);
    const double scale_src = std::max(pair.k_source, std::ceil(m_g));
    const double scale_tgt = std::max(pair.k_target, std::ceil(result.plan.M));
    auto src_ends = ends_filtration(pair.f.source(), scale_src, filt);
    auto tgt_ends = ends_filtration(pair.g.source(), scale_tgt, filt);

    auto back_plan = result.plan;
    std::swap(back_plan.K, back_plan.K_prime);
    back_plan.M = m_g;
    const auto forward = induced_end_map(pair.f, result.plan, src_ends, tgt_ends);
    const auto backward = induced_end_map(pair.g, back_plan, tgt_ends, src_ends);
    if (!forward.bijective() || !backward.bijective()) {
        detail = "forward " + forward.verdict() + ", backward " + backward.verdict();
        return false;
    }
    for (std::size_t e = 0; e < forward.map.size(); ++e)
        if (backward.map[forward.map[e]] != e) {
            detail = "directions are not mutually inverse";
            return false;
        }
    for (std::size_t e = 0; e < backward.map.size(); ++e)
        if (forward.map[backward.map[e]] != e) {
            detail = "directions are not mutually inverse";
            return false;
        }
    return true;
}

}  // namespace

int main() {
    // 1. sigma(Z) = 2 with K = 1 at R_max = 1024, N in 1..8, under a second
    {
        const auto start = std::chrono::steady_clock::now();
        const auto report = sigma(builtin_space("integers"), config_with(1024));
        const auto elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        std::ostringstream detail;
        detail << "sigma=" << (report.sigma ? std::to_string(*report.sigma) : "?")
               << " K=" << (report.K ? std::to_string(*report.K) : "?") << " in "
               << elapsed << "s";
        verdict(1, "sigma(Z) = 2 with K = 1 at R_max 1024 in under 1s",
                report.sigma == 2 && report.K == 1 && elapsed < 1.0, detail.str());
    }

    // 2. sigma of the halfline net
    {
        const auto report =
            sigma(builtin_space("halfline-net", {.eps = 1.0}), config_with(1024));
        verdict(2, "sigma([1,inf)) = 1 with K = 1", report.sigma == 1 && report.K == 1);
    }

    // 3. sigma of the vase stabilizes at K = 2
    {
        const auto report =
            sigma(builtin_space("vase-net", {.eps = 1.0}), config_with(1024));
        const bool ok = report.sigma == 1 && report.K == 2 && report.per_scale[0] == 2 &&
                        report.per_scale[1] == 1;
        std::ostringstream detail;
        detail << "per_scale[1]=" << (report.per_scale[0] ? *report.per_scale[0] : 0)
               << " per_scale[2]=" << (report.per_scale[1] ? *report.per_scale[1] : 0);
        verdict(3, "sigma(V) = 1 stabilizing at K = 2 (N=1 gives 2 ends)", ok, detail.str());
    }

    // 4. the vase and the line are distinguished by sigma
    {
        const auto vase = sigma(builtin_space("vase-net", {.eps = 1.0}), config_with(1024));
        const auto line = sigma(builtin_space("real-net", {.eps = 1.0}), config_with(1024));
        const bool ok = vase.stable() && line.stable() && vase.sigma == 1 &&
                        line.sigma == 2 && vase.sigma != line.sigma;
        verdict(4, "compare(V, R-net) reports 1 vs 2 and concludes non-equivalence", ok);
    }

    // 5. floor/inclusion equivalence, identity on the integer side
    {
        const auto pair = floor_pair(1024);
        const auto result =
            verify_coarse_equivalence(pair.f, pair.g, {1.0, 2.0, 4.0}, 1, 1);
        const bool ok = result.verified && result.closeness_gf <= 0.5 + kTol &&
                        result.closeness_fg == 0.0;
        std::ostringstream detail;
        detail << "D(g o f)=" << result.closeness_gf << " D(f o g)=" << result.closeness_fg;
        verdict(5, "floor/inclusion verified, g o f within 0.5, integer side exact", ok,
                detail.str());
    }

    // 6. vase projection/embedding equivalence with D = 2 exactly
    {
        const auto pair = vase_pair(1024);
        const auto result =
            verify_coarse_equivalence(pair.f, pair.g, {1.0, 2.0, 4.0}, 2, 1);
        const bool ok = result.verified && result.closeness_gf == 2.0 &&
                        result.closeness_fg == 0.0;
        std::ostringstream detail;
        detail << "D=" << result.closeness_gf << " S-side=" << result.closeness_fg;
        verdict(6, "vase pair verified with D = 2 exactly and f o g the identity", ok,
                detail.str());
    }

    // 7. properness lemma bound M + 2R on the vase pair, R = 2
    {
        const auto pair = vase_pair(1024);
        const auto report = properness_check(pair.f, {1.0, 2.0, 4.0});
        bool ok = true;
        std::string detail;
        for (const auto& probe : report.probes) {
            if (!probe.bounded_center) continue;
            const double m =
                bornology_profile(pair.g, {std::max(2 * probe.rho, kTol)})[0].second;
            const double bound = proper_from_composition(2.0, m);
            if (probe.preimage_diameter > bound + kTol) {
                ok = false;
                detail = "diameter " + std::to_string(probe.preimage_diameter) +
                         " exceeds " + std::to_string(bound);
                break;
            }
        }
        verdict(7, "vase preimage diameters satisfy the M + 2R bound with R = 2", ok,
                detail);
    }

    // 8. basepoint independence: ten random basepoints within radius 32
    {
        std::mt19937 rng(20260810u);
        struct Entry {
            const char* name;
            BuiltinParams params;
            double r_max;
        };
        const std::vector<Entry> entries{
            {"integers", {}, 1024},
            {"real-net", {.eps = 1.0}, 1024},
            {"halfline-net", {.eps = 1.0}, 1024},
            {"vase-net", {.eps = 1.0}, 1024},
            {"star-tree", {.k = 3}, 1024},
            {"lattice2d", {}, 128},
        };
        bool ok = true;
        std::string detail;
        for (const auto& entry : entries) {
            auto space = builtin_space(entry.name, entry.params);
            auto config = config_with(entry.r_max);
            const auto reference = sigma(space, config);
            if (!reference.stable()) {
                ok = false;
                detail = std::string(entry.name) + " inconclusive at default basepoint";
                break;
            }
            const auto candidates = space.ball(32.0);
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            for (int trial = 0; trial < 10 && ok; ++trial) {
                auto moved = config;
                moved.basepoint = candidates[pick(rng)];
                const auto report = sigma(space, moved);
                if (!report.stable() || report.sigma != reference.sigma) {
                    ok = false;
                    detail = std::string(entry.name) + " disagreed at basepoint " +
                             std::to_string(*moved.basepoint);
                }
            }
            if (!ok) break;
        }
        verdict(8, "sigma agrees across 10 random basepoints per builtin space", ok,
                detail);
    }

    // 9. seeded property suites, 100 cases each, zero failures
    {
        const auto results = coarse::suites::run_all(20260810u, 100);
        for (const auto& suite : results)
            verdict(9, "property suite: " + suite.name, suite.passed(),
                    suite.first_failure);
    }

    // 10. induced end maps are bijections both ways and mutually inverse
    {
        std::string detail;
        const bool floor_ok = end_maps_invertible(floor_pair(256), 256, detail);
        verdict(10, "floor/inclusion end maps bijective and mutually inverse", floor_ok,
                detail);
        detail.clear();
        const bool vase_ok = end_maps_invertible(vase_pair(256), 256, detail);
        verdict(10, "vase pair end maps bijective and mutually inverse", vase_ok, detail);
    }

    // 11. criteria 1-4 are scale robust between R_max 256 and 1024
    {
        bool ok = true;
        std::string detail;
        struct Row {
            const char* name;
            BuiltinParams params;
        };
        for (const auto& row : std::vector<Row>{{"integers", {}},
                                                {"halfline-net", {.eps = 1.0}},
                                                {"vase-net", {.eps = 1.0}},
                                                {"real-net", {.eps = 1.0}}}) {
            const auto small = sigma(builtin_space(row.name, row.params), config_with(256));
            const auto large = sigma(builtin_space(row.name, row.params), config_with(1024));
            if (small.sigma != large.sigma || small.K != large.K) {
                ok = false;
                detail = std::string(row.name) + " drifted between truncations";
                break;
            }
        }
        verdict(11, "sigma and K identical at R_max 256 and 1024", ok, detail);
    }

    std::cout << (failures == 0 ? "acceptance: all criteria passed"
                                : "acceptance: " + std::to_string(failures) +
                                      " criteria failed")
              << std::endl;
    return failures;
}
