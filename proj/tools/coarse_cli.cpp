// Command-line front end: sigma computation, pairwise comparison with
// optional coarse-equivalence verification, and the worked-example
// regression suite. Exit codes: 0 ok, 1 input error, 2 inconclusive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coarse/coarse_map.hpp"
#include "coarse/ends.hpp"
#include "coarse/report_io.hpp"
#include "coarse/space_spec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInconclusive = 2;

struct SpaceArgs {
    std::string builtin;
    std::string file;
    double eps = 1.0;
    int k = 3;
    std::string basepoint;  // comma-separated coordinates
};

struct CommonArgs {
    int n_min = 1;
    int n_max = 8;
    double r_max = 1024.0;
    std::size_t window = 5;
    std::size_t radius_window = 3;
    double escape_margin = 0.0;
    std::size_t max_ends = 64;
    std::string out;
    std::string csv;
    std::uint32_t seed = 1;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw coarse::ValidationError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<double> parse_coords(const std::string& text) {
    std::vector<double> coords;
    std::stringstream stream(text);
    std::string part;
    while (std::getline(stream, part, ',')) coords.push_back(std::stod(part));
    return coords;
}

coarse::SpaceOracle build_space(const SpaceArgs& args) {
    coarse::SpaceOracle space;
    if (!args.file.empty())
        space = coarse::load_space_spec(read_file(args.file));
    else if (!args.builtin.empty())
        space = coarse::builtin_space(args.builtin, {.eps = args.eps, .k = args.k});
    else
        throw coarse::ValidationError("no space given: use --space or --space-file");
    if (!args.basepoint.empty()) {
        const auto coords = parse_coords(args.basepoint);
        const auto id = space.find_point(coords);
        if (!id)
            throw coarse::ValidationError("basepoint " + args.basepoint +
                                          " is not a point of " + space.name());
        space = space.with_basepoint(*id);
    }
    return space;
}

coarse::SigmaConfig build_config(const CommonArgs& args) {
    coarse::SigmaConfig config;
    config.n_min = args.n_min;
    config.n_max = args.n_max;
    config.stability_window = args.window;
    config.max_ends = args.max_ends;
    config.filtration.r_max = args.r_max;
    config.filtration.radius_window = args.radius_window;
    config.filtration.escape_margin = args.escape_margin;
    return config;
}

void emit(const nlohmann::json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw coarse::ValidationError("cannot write file: " + out_path);
    out << doc.dump(2) << '\n';
}

void emit_csv(const coarse::SigmaReport& report, const std::string& csv_path) {
    if (csv_path.empty()) return;
    std::ofstream out(csv_path);
    if (!out) throw coarse::ValidationError("cannot write file: " + csv_path);
    coarse::write_trace_csv(report, out);
}

int cmd_sigma(const SpaceArgs& space_args, const CommonArgs& common) {
    const auto space = build_space(space_args);
    const auto report = coarse::sigma(space, build_config(common));
    emit(coarse::to_json(report), common.out);
    emit_csv(report, common.csv);
    return report.stable() ? kExitOk : kExitInconclusive;
}

// Builds a witness over the already-constructed endpoint spaces so that end
// maps and sigma reports share truncations.
coarse::CoarseMapWitness witness_from_doc(const nlohmann::json& doc,
                                          std::shared_ptr<const coarse::TruncatedSpace> source,
                                          const coarse::SpaceOracle& target) {
    if (doc.contains("builtin"))
        return coarse::builtin_map(doc.at("builtin").get<std::string>(), std::move(source),
                                   target);
    if (!doc.contains("pairs"))
        throw coarse::ValidationError("map spec needs either \"builtin\" or \"pairs\"");
    std::vector<coarse::PointId> table(source->size(), -1);
    for (const auto& pair : doc.at("pairs")) {
        const auto src = pair.at(0).get<coarse::PointId>();
        const auto tgt = pair.at(1).get<coarse::PointId>();
        const auto i = source->index_of(src);
        if (!i)
            throw coarse::ValidationError("map spec: source point " + std::to_string(src) +
                                          " is outside the truncation");
        table[*i] = tgt;
    }
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table[i] < 0)
            throw coarse::ValidationError(
                "map spec: no image for source point " +
                std::to_string(source->id(static_cast<coarse::Index>(i))));
    const std::string name =
        doc.contains("name") ? doc.at("name").get<std::string>() : "explicit-map";
    return coarse::CoarseMapWitness(name, std::move(source), target, std::move(table));
}

bool same_spec(const SpaceArgs& a, const SpaceArgs& b) {
    return a.builtin == b.builtin && a.file == b.file && a.eps == b.eps && a.k == b.k &&
           a.basepoint == b.basepoint;
}

int cmd_compare(const SpaceArgs& a_args, const SpaceArgs& b_args, const CommonArgs& common,
                const std::vector<std::string>& map_files) {
    const auto space_a = build_space(a_args);
    // identical specs share one oracle, so identity maps type-check
    const auto space_b = same_spec(a_args, b_args) ? space_a : build_space(b_args);
    const auto config = build_config(common);

    const auto report_a = coarse::sigma(space_a, config);
    const auto report_b = coarse::sigma(space_b, config);

    nlohmann::json doc = {
        {"space_a", coarse::to_json(report_a)},
        {"space_b", coarse::to_json(report_b)},
    };

    if (!report_a.stable() || !report_b.stable()) {
        doc["verdict"] = "inconclusive: sigma did not stabilize";
        emit(doc, common.out);
        return kExitInconclusive;
    }

    const auto sigma_a = *report_a.sigma;
    const auto sigma_b = *report_b.sigma;
    if (sigma_a != sigma_b) {
        doc["verdict"] = "not coarsely equivalent: distinguished by sigma (" +
                         std::to_string(sigma_a) + " vs " + std::to_string(sigma_b) + ")";
        emit(doc, common.out);
        return kExitOk;
    }

    if (map_files.empty()) {
        doc["verdict"] = "sigma values agree (" + std::to_string(sigma_a) +
                         "); no maps supplied, equivalence not checked";
        emit(doc, common.out);
        return kExitOk;
    }
    if (map_files.size() != 2)
        throw coarse::ValidationError("compare needs exactly two --map-file arguments: f then g");

    auto trunc_a = coarse::truncate_shared(space_a, common.r_max);
    auto trunc_b = coarse::truncate_shared(space_b, common.r_max);
    const auto f_doc = nlohmann::json::parse(read_file(map_files[0]));
    const auto g_doc = nlohmann::json::parse(read_file(map_files[1]));
    const auto f = witness_from_doc(f_doc, trunc_a, space_b);
    const auto g = witness_from_doc(g_doc, trunc_b, space_a);

    const double k_a = *report_a.K;
    const double k_b = *report_b.K;
    auto result = coarse::verify_coarse_equivalence(f, g, {1.0, 2.0, 4.0, 8.0}, k_a, k_b);
    doc["equivalence"] = coarse::to_json(result);
    if (!result.verified) {
        doc["verdict"] = "maps not verified: " + result.violation;
        emit(doc, common.out);
        return kExitOk;
    }

    // induced maps on ends, both directions over one pair of filtrations
    const double m_f = result.plan.M;
    const double m_g = std::max(
        coarse::bornology_profile(g, {k_b})[0].second, k_a);
    const double scale_a = std::max(k_a, std::ceil(m_g));
    const double scale_b = std::max(k_b, std::ceil(m_f));
    auto ends_a = coarse::ends_filtration(trunc_a, scale_a, config.filtration);
    auto ends_b = coarse::ends_filtration(trunc_b, scale_b, config.filtration);

    auto back_plan = result.plan;
    std::swap(back_plan.K, back_plan.K_prime);
    back_plan.M = m_g;
    const auto forward = coarse::induced_end_map(f, result.plan, ends_a, ends_b);
    const auto backward = coarse::induced_end_map(g, back_plan, ends_b, ends_a);
    bool inverse = forward.bijective() && backward.bijective();
    for (std::size_t e = 0; inverse && e < forward.map.size(); ++e)
        inverse = backward.map[forward.map[e]] == e;
    for (std::size_t e = 0; inverse && e < backward.map.size(); ++e)
        inverse = forward.map[backward.map[e]] == e;

    doc["end_maps"] = {{"forward", coarse::to_json(forward)},
                       {"backward", coarse::to_json(backward)},
                       {"mutually_inverse", inverse}};
    doc["verdict"] = inverse ? "coarse equivalence verified: sigma preserved (" +
                                   std::to_string(sigma_a) + ")"
                             : "maps verified but end correspondence is not invertible";
    emit(doc, common.out);
    return kExitOk;
}

struct ExampleOutcome {
    std::string name;
    bool ok;
    std::string detail;
};

int cmd_examples(const CommonArgs& common) {
    using namespace coarse;
    std::vector<ExampleOutcome> outcomes;
    auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
        outcomes.push_back({name, ok, detail});
    };
    auto config = build_config(common);
    // small truncations scan fewer scales; shrink the window to keep the
    // stabilized-at-2 cases decidable
    config.n_max = std::min(config.n_max,
                            std::max(2, static_cast<int>(common.r_max / 16.0)));
    config.stability_window =
        std::min(config.stability_window,
                 static_cast<std::size_t>(std::max(1, config.n_max - config.n_min - 1)));

    // taxicab wall-to-wall distance on the vase
    auto vase = builtin_space("vase-net", {.eps = 1.0});
    const auto left = vase.find_point(std::vector<double>{-1, 5});
    const auto right = vase.find_point(std::vector<double>{1, 5});
    check("vase wall distance = 2", left && right && vase.distance(*left, *right) == 2.0);

    auto expect_sigma = [&](const std::string& name, const SpaceOracle& space,
                            std::size_t want_sigma, int want_k,
                            std::optional<double> r_override = std::nullopt) {
        auto local = config;
        if (r_override) local.filtration.r_max = *r_override;
        const auto report = sigma(space, local);
        const bool ok = report.stable() && report.sigma == want_sigma && report.K == want_k;
        std::ostringstream detail;
        if (!ok) {
            detail << "got sigma=";
            if (report.sigma)
                detail << *report.sigma;
            else
                detail << "?";
            detail << " K=" << (report.K ? std::to_string(*report.K) : "?");
        }
        check(name, ok, detail.str());
        return report;
    };

    expect_sigma("sigma(Z) = 2 with K = 1", builtin_space("integers"), 2, 1);
    expect_sigma("sigma(halfline) = 1 with K = 1",
                 builtin_space("halfline-net", {.eps = 1.0}), 1, 1);
    expect_sigma("sigma(vase) = 1 with K = 2", vase, 1, 2);
    expect_sigma("sigma(real-net) = 2 with K = 1", builtin_space("real-net", {.eps = 1.0}),
                 2, 1);
    expect_sigma("sigma(star-tree(4)) = 4", builtin_space("star-tree", {.k = 4}), 4, 1);

    // the vase is distinguished from the line by sigma
    {
        const auto v = sigma(vase, config);
        const auto r = sigma(builtin_space("real-net", {.eps = 1.0}), config);
        check("vase vs real-net distinguished by sigma",
              v.stable() && r.stable() && v.sigma != r.sigma);
    }

    // floor/inclusion equivalence between the half-step net and Z
    {
        auto net = builtin_space("real-net", {.eps = 0.5});
        auto ints = builtin_space("integers");
        auto f = builtin_map("floor", truncate_shared(net, common.r_max), ints);
        auto g = builtin_map("inclusion", truncate_shared(ints, common.r_max), net);
        auto result = verify_coarse_equivalence(f, g, {1.0, 2.0, 4.0}, 1, 1);
        check("floor/inclusion verified with D <= 0.5",
              result.verified && result.closeness_gf <= 0.5 + kTol);
        check("floor o inclusion is the identity on Z", result.closeness_fg == 0.0);

        FiltrationConfig filt = config.filtration;
        auto ends_net = ends_filtration(f.source(), 1.0, filt);
        auto ends_int = ends_filtration(g.source(), 1.0, filt);
        auto forward = induced_end_map(f, result.plan, ends_net, ends_int);
        auto back_plan = result.plan;
        std::swap(back_plan.K, back_plan.K_prime);
        auto backward = induced_end_map(g, back_plan, ends_int, ends_net);
        bool inverse = forward.bijective() && backward.bijective();
        for (std::size_t e = 0; inverse && e < forward.map.size(); ++e)
            inverse = backward.map[forward.map[e]] == e;
        check("floor/inclusion end bijection both ways", inverse);
    }

    // vase projection/embedding equivalence
    {
        auto half = builtin_space("halfline-net", {.eps = 1.0});
        auto f = builtin_map("vase-project", truncate_shared(vase, common.r_max), half);
        auto g = builtin_map("vase-embed", truncate_shared(half, common.r_max), vase);
        auto result = verify_coarse_equivalence(f, g, {1.0, 2.0, 4.0}, 2, 1);
        check("vase pair verified with D = 2", result.verified && result.plan.D == 2.0);
        check("vase f o g is the identity on the halfline", result.closeness_fg == 0.0);

        // properness lemma companion: preimage diameters within M + 2R, R = 2
        auto probes = properness_check(f, {1.0, 2.0, 4.0});
        bool bounded = true;
        for (const auto& probe : probes.probes) {
            if (!probe.bounded_center) continue;
            const double m =
                bornology_profile(g, {std::max(2 * probe.rho, kTol)})[0].second;
            bounded = bounded &&
                      probe.preimage_diameter <= proper_from_composition(2.0, m) + kTol;
        }
        check("vase preimage diameters within M + 2R", bounded);

        FiltrationConfig filt = config.filtration;
        auto ends_vase = ends_filtration(f.source(), 2.0, filt);
        auto ends_half = ends_filtration(g.source(), 2.0, filt);
        auto forward = induced_end_map(f, result.plan, ends_vase, ends_half);
        auto back_plan = result.plan;
        std::swap(back_plan.K, back_plan.K_prime);
        back_plan.M = std::max(bornology_profile(g, {1.0})[0].second, 2.0);
        auto backward = induced_end_map(g, back_plan, ends_half, ends_vase);
        check("vase end bijection both ways",
              forward.bijective() && backward.bijective());
    }

    // basepoint shifts leave sigma unchanged
    {
        std::mt19937 rng(common.seed);
        struct Shift {
            const char* name;
            BuiltinParams params;
            double r_max;
        };
        const std::vector<Shift> shifted{
            {"integers", {}, common.r_max},
            {"halfline-net", {.eps = 1.0}, common.r_max},
            {"vase-net", {.eps = 1.0}, common.r_max},
            {"star-tree", {.k = 3}, common.r_max},
            {"lattice2d", {}, std::min(common.r_max, 128.0)},
        };
        for (const auto& entry : shifted) {
            auto space = builtin_space(entry.name, entry.params);
            auto local = config;
            local.filtration.r_max = entry.r_max;
            const auto reference = sigma(space, local);
            bool agree = reference.stable();
            // a basepoint shifted by d needs radius_window scheduled radii
            // above n_max/2 + d, or junction points linger in the far sets
            const double resolvable =
                entry.r_max / (4.0 * std::pow(2.0, static_cast<double>(
                                                       local.filtration.radius_window - 1))) -
                local.n_max / 2.0 - 1.0;
            const double shift_radius = std::clamp(resolvable, 0.0, 32.0);
            const auto candidates = space.ball(shift_radius);
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            for (int trial = 0; trial < 2; ++trial) {
                auto moved = local;
                moved.basepoint = candidates[pick(rng)];
                const auto shifted_report = sigma(space, moved);
                agree = agree && shifted_report.stable() &&
                        shifted_report.sigma == reference.sigma;
            }
            check(std::string("basepoint shift keeps sigma on ") + entry.name, agree);
        }
    }

    bool all_ok = true;
    for (const auto& outcome : outcomes) {
        all_ok = all_ok && outcome.ok;
        std::cout << (outcome.ok ? "ok   - " : "FAIL - ") << outcome.name;
        if (!outcome.ok && !outcome.detail.empty()) std::cout << " (" << outcome.detail << ")";
        std::cout << '\n';
    }
    std::cout << (all_ok ? "examples: all passed" : "examples: failures detected") << '\n';
    return all_ok ? kExitOk : kExitInputError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coarse invariant toolkit"};
    app.require_subcommand(1);

    SpaceArgs space_a, space_b;
    CommonArgs common;
    std::vector<std::string> map_files;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--n-min", common.n_min, "smallest scale N");
        cmd->add_option("--n-max", common.n_max, "largest scale N");
        cmd->add_option("--r-max", common.r_max, "truncation radius");
        cmd->add_option("--window", common.window, "stability window in N");
        cmd->add_option("--radius-window", common.radius_window,
                        "radii that must agree per filtration");
        cmd->add_option("--escape-margin", common.escape_margin,
                        "escape shell width override");
        cmd->add_option("--max-ends", common.max_ends, "cap for reported end counts");
        cmd->add_option("--out", common.out, "report output path (default stdout)");
        cmd->add_option("--csv", common.csv, "filtration trace CSV path");
        cmd->add_option("--seed", common.seed, "seed for randomized suites");
    };
    auto add_space = [&](CLI::App* cmd, SpaceArgs& args, const std::string& suffix) {
        cmd->add_option("--space" + suffix, args.builtin, "builtin space name");
        cmd->add_option("--space-file" + suffix, args.file, "space spec document");
        cmd->add_option("--eps" + suffix, args.eps, "net spacing");
        cmd->add_option("--k" + suffix, args.k, "ray count for star-tree");
        cmd->add_option("--basepoint" + suffix, args.basepoint,
                        "basepoint coordinates, comma separated");
    };

    auto* sigma_cmd = app.add_subcommand("sigma", "compute the sigma report for a space");
    add_space(sigma_cmd, space_a, "");
    add_common(sigma_cmd);

    auto* compare_cmd = app.add_subcommand("compare", "compare two spaces, optionally with maps");
    add_space(compare_cmd, space_a, "");
    add_space(compare_cmd, space_b, "-b");
    compare_cmd->add_option("--map-file", map_files,
                            "map spec documents: f then g (give twice)");
    add_common(compare_cmd);

    auto* examples_cmd = app.add_subcommand("examples", "run the worked-example regression suite");
    add_common(examples_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sigma_cmd->parsed()) return cmd_sigma(space_a, common);
        if (compare_cmd->parsed()) return cmd_compare(space_a, space_b, common, map_files);
        if (examples_cmd->parsed()) return cmd_examples(common);
    } catch (const coarse::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const coarse::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: invalid document: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}
