#pragma once

// Report serialization: sigma reports and equivalence verdicts as JSON
// documents, filtration traces as CSV. Output is byte-stable for a fixed
// config: keys are sorted and all values are deterministic.

#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "coarse/coarse_map.hpp"
#include "coarse/ends.hpp"

namespace coarse {

inline nlohmann::json to_json(const SigmaConfig& config) {
    return {
        {"n_min", config.n_min},
        {"n_max", config.n_max},
        {"r_max", config.filtration.r_max},
        {"r0", config.filtration.r0},
        {"factor", config.filtration.factor},
        {"radius_window", config.filtration.radius_window},
        {"escape_margin", config.filtration.escape_margin},
        {"stability_window", config.stability_window},
        {"max_ends", config.max_ends},
    };
}

inline nlohmann::json to_json(const SigmaReport& report) {
    nlohmann::json per_scale = nlohmann::json::array();
    for (std::size_t i = 0; i < report.scales.size(); ++i) {
        nlohmann::json row = {{"n", report.scales[i]},
                              {"capped", report.per_scale_capped[i]}};
        if (report.per_scale[i])
            row["ends"] = report.per_scale_capped[i]
                              ? report.config.max_ends
                              : *report.per_scale[i];
        else
            row["ends"] = nullptr;
        row["stable"] = report.per_scale[i].has_value();
        per_scale.push_back(row);
    }

    nlohmann::json phi = nlohmann::json::array();
    for (std::size_t i = 0; i < report.phi_verdicts.size(); ++i)
        phi.push_back({{"from", report.scales[i]},
                       {"to", report.scales[i + 1]},
                       {"verdict", report.phi_verdicts[i]}});

    nlohmann::json traces = nlohmann::json::array();
    for (std::size_t i = 0; i < report.traces.size(); ++i)
        traces.push_back({{"n", report.scales[i]}, {"escaping", report.traces[i]}});

    nlohmann::json doc = {
        {"space", report.space_name},
        {"basepoint", {{"id", report.basepoint}, {"coordinates", report.basepoint_coords}}},
        {"config", to_json(report.config)},
        {"per_scale", per_scale},
        {"phi", phi},
        {"stable", report.stable()},
        {"sigma_capped", report.sigma_capped},
        {"diagnostics",
         {{"radii", report.radii}, {"notes", report.notes}}},
    };
    doc["k"] = report.K ? nlohmann::json(*report.K) : nlohmann::json(nullptr);
    if (report.sigma)
        doc["sigma"] = report.sigma_capped ? ">= " + std::to_string(*report.sigma)
                                           : std::to_string(*report.sigma);
    else
        doc["sigma"] = nullptr;
    doc["diagnostics"]["traces"] = traces;
    return doc;
}

// (N, r, escaping_count) rows for plotting.
inline void write_trace_csv(const SigmaReport& report, std::ostream& out) {
    out << "N,r,escaping\n";
    for (std::size_t i = 0; i < report.scales.size(); ++i)
        for (std::size_t j = 0; j < report.radii.size(); ++j)
            out << report.scales[i] << ',' << report.radii[j] << ','
                << report.traces[i][j] << '\n';
}

inline nlohmann::json to_json(const BornologyProfile& profile) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [n, m] : profile) rows.push_back({{"n", n}, {"m", m}});
    return rows;
}

inline nlohmann::json to_json(const PropernessReport& report) {
    nlohmann::json per_rho = nlohmann::json::array();
    for (const auto& [rho, diameter] : report.max_diameter_per_rho)
        per_rho.push_back({{"rho", rho}, {"max_preimage_diameter", diameter}});
    return {{"max_per_rho", per_rho}, {"unbounded_evidence", report.unbounded_evidence}};
}

inline nlohmann::json to_json(const EquivalencePlan& plan) {
    return {{"K", plan.K},     {"K_prime", plan.K_prime}, {"M", plan.M},
            {"L", plan.L},     {"D", plan.D},             {"S", plan.S}};
}

inline nlohmann::json to_json(const EndCorrespondence& corr) {
    return {{"source_ends", corr.src_count},
            {"target_ends", corr.tgt_count},
            {"map", corr.map},
            {"verdict", corr.verdict()}};
}

inline nlohmann::json to_json(const EquivalenceCheckResult& result) {
    nlohmann::json doc = {
        {"verified", result.verified},
        {"closeness_gf", result.closeness_gf},
        {"closeness_fg", result.closeness_fg},
        {"f_profile", to_json(result.f_profile)},
        {"g_profile", to_json(result.g_profile)},
        {"f_properness", to_json(result.f_properness)},
        {"g_properness", to_json(result.g_properness)},
    };
    if (result.verified) {
        doc["plan"] = to_json(result.plan);
        doc["s_components"] = {{"closeness", result.s_from_closeness},
                               {"bornology_at_L", result.s_from_profile}};
    } else {
        doc["violation"] = result.violation;
    }
    return doc;
}

}  // namespace coarse
