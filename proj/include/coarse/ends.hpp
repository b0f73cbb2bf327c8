#pragma once

// Scale-N ends through a radius filtration. Far points (radius >= r) are
// partitioned into chain components at scale N; components that reach the
// escape shell are tracked across an increasing radius schedule, and the
// number of surviving threads is the computable surrogate for sigma_N. The
// phi maps between consecutive scales and the stabilization scan yield K and
// the invariant sigma.

#include <algorithm>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/neighbor_index.hpp"
#include "coarse/space.hpp"
#include "coarse/union_find.hpp"

namespace coarse {

struct FiltrationConfig {
    double r_max = 1024.0;
    double r0 = 4.0;              // first scheduled radius
    double factor = 2.0;          // geometric schedule r0 * factor^j
    std::size_t radius_window = 3;  // consecutive radii that must agree
    double escape_margin = 0.0;     // shell width = max(scale, escape_margin)
};

// Chain components of the far set {p : radius(p) >= r} at one scale.
struct ScalePartition {
    double scale = 0;
    double inner_radius = 0;
    std::vector<std::vector<Index>> components;  // each sorted ascending
    std::vector<bool> escaping;                  // touches the escape shell
    std::vector<std::int32_t> comp_of;           // local index -> component, -1 if near

    std::size_t escaping_count() const {
        std::size_t n = 0;
        for (bool e : escaping) n += e;
        return n;
    }
};

// Partitions points at radius >= r into chain components at scale N and
// marks components escaping when they own a point within `shell_width`
// (default N) of the truncation boundary.
inline ScalePartition components_at_scale(const TruncatedSpace& trunc, double N, double r,
                                          double shell_width = -1.0) {
    if (!(N > 0)) throw ParamError("components_at_scale: scale must be positive");
    if (shell_width < 0) shell_width = N;
    if (r < 0 || r > trunc.radius_max() - N + kTol)
        throw ConfigError("components_at_scale: inner radius " + std::to_string(r) +
                          " leaves an empty escape shell below radius_max " +
                          std::to_string(trunc.radius_max()));

    std::vector<Index> far;
    for (Index i = 0; i < trunc.size(); ++i)
        if (trunc.radius(i) >= r - kTol) far.push_back(i);

    UnionFind dsu(trunc.size());
    for_pairs_within(trunc, far, N, [&](Index a, Index b, double) { dsu.unite(a, b); });

    ScalePartition part;
    part.scale = N;
    part.inner_radius = r;
    part.comp_of.assign(trunc.size(), -1);
    std::vector<Index> roots(trunc.size());
    for (Index i : far) {
        const Index root = dsu.find(i);
        if (part.comp_of[root] == -1) {
            part.comp_of[root] = static_cast<std::int32_t>(part.components.size());
            part.components.emplace_back();
        }
        roots[i] = root;
    }
    for (Index i : far) part.comp_of[i] = part.comp_of[roots[i]];
    for (Index i : far) part.components[part.comp_of[i]].push_back(i);

    // components come out ordered by smallest member because `far` ascends
    const double shell = trunc.radius_max() - shell_width;
    part.escaping.assign(part.components.size(), false);
    for (std::size_t c = 0; c < part.components.size(); ++c)
        for (Index i : part.components[c])
            if (trunc.radius(i) >= shell - kTol) {
                part.escaping[c] = true;
                break;
            }
    return part;
}

// Per-radius partitions with refinement maps and the thread-count verdict.
struct EndsFiltration {
    double scale = 0;
    std::shared_ptr<const TruncatedSpace> trunc;
    std::vector<double> radii;                   // ascending schedule
    std::vector<ScalePartition> partitions;      // one per radius
    // refinement[j][c] = component at radii[j] containing component c at radii[j+1]
    std::vector<std::vector<std::size_t>> refinement;
    std::vector<std::size_t> escaping_counts;    // per radius

    bool stable = false;
    std::size_t thread_count = 0;                // valid when stable
    std::size_t stable_suffix_begin = 0;         // radii index where the suffix starts
    // ends: escaping component indices at the last radius, deterministic order
    std::vector<std::size_t> ends;
    // threads[e][j] = component index of end e at radii[j]
    std::vector<std::vector<std::size_t>> threads;

    double stable_from() const { return radii[stable_suffix_begin]; }
};

namespace detail {

// Bijectivity of one refinement step restricted to escaping components.
inline bool refinement_bijective(const ScalePartition& finer, const ScalePartition& coarser,
                                 const std::vector<std::size_t>& step) {
    std::vector<int> hits(coarser.components.size(), 0);
    for (std::size_t c = 0; c < finer.components.size(); ++c) {
        if (!finer.escaping[c]) continue;
        if (!coarser.escaping[step[c]]) return false;
        if (++hits[step[c]] > 1) return false;  // two escaping threads merged
    }
    for (std::size_t c = 0; c < coarser.components.size(); ++c)
        if (coarser.escaping[c] && hits[c] == 0) return false;  // thread born late
    return true;
}

}  // namespace detail

inline std::vector<double> radius_schedule(const FiltrationConfig& config, double scale) {
    if (!(config.r0 > 0) || !(config.factor > 1))
        throw ConfigError("radius schedule needs r0 > 0 and factor > 1");
    std::vector<double> radii;
    const double cap = std::min(config.r_max / 4.0, config.r_max - scale);
    for (double r = config.r0; leq(r, cap); r *= config.factor) radii.push_back(r);
    if (radii.empty())
        throw ConfigError("radius schedule is empty: r_max " + std::to_string(config.r_max) +
                          " too small for r0 " + std::to_string(config.r0));
    return radii;
}

inline EndsFiltration ends_filtration(std::shared_ptr<const TruncatedSpace> trunc,
                                      double scale, const FiltrationConfig& config) {
    EndsFiltration filt;
    filt.scale = scale;
    filt.trunc = trunc;
    filt.radii = radius_schedule(config, scale);
    const double shell_width = std::max(scale, config.escape_margin);

    for (double r : filt.radii) {
        filt.partitions.push_back(components_at_scale(*trunc, scale, r, shell_width));
        filt.escaping_counts.push_back(filt.partitions.back().escaping_count());
    }

    const std::size_t m = filt.radii.size();
    filt.refinement.resize(m - 1);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const auto& fine = filt.partitions[j + 1];  // larger radius, smaller far set
        const auto& coarse = filt.partitions[j];
        filt.refinement[j].resize(fine.components.size());
        for (std::size_t c = 0; c < fine.components.size(); ++c) {
            const Index rep = fine.components[c].front();
            filt.refinement[j][c] = static_cast<std::size_t>(coarse.comp_of[rep]);
        }
    }

    // Stable suffix: maximal run of trailing radii with equal escaping counts
    // and bijective refinements between them.
    std::size_t q = m - 1;
    while (q > 0 && filt.escaping_counts[q - 1] == filt.escaping_counts[m - 1] &&
           detail::refinement_bijective(filt.partitions[q], filt.partitions[q - 1],
                                        filt.refinement[q - 1]))
        --q;
    filt.stable_suffix_begin = q;
    filt.stable = (m - q) >= config.radius_window;
    filt.thread_count = filt.escaping_counts[m - 1];

    if (filt.stable) {
        const auto& last = filt.partitions[m - 1];
        for (std::size_t c = 0; c < last.components.size(); ++c)
            if (last.escaping[c]) filt.ends.push_back(c);
        filt.threads.resize(filt.ends.size());
        for (std::size_t e = 0; e < filt.ends.size(); ++e) {
            auto& thread = filt.threads[e];
            thread.assign(m, 0);
            thread[m - 1] = filt.ends[e];
            for (std::size_t j = m - 1; j > 0; --j)
                thread[j - 1] = filt.refinement[j - 1][thread[j]];
        }
    }
    return filt;
}

inline EndsFiltration ends_filtration(const SpaceOracle& space, double scale,
                                      const FiltrationConfig& config) {
    return ends_filtration(truncate_shared(space, config.r_max), scale, config);
}

// A correspondence between the ends of two filtrations.
struct EndCorrespondence {
    std::size_t src_count = 0;
    std::size_t tgt_count = 0;
    std::vector<std::size_t> map;  // source end -> target end, total
    bool injective = false;
    bool surjective = false;
    std::string note;

    bool bijective() const { return injective && surjective; }
    std::string verdict() const {
        if (bijective()) return "bijective";
        if (injective) return "injective";
        if (surjective) return "surjective";
        return "neither";
    }
};

namespace detail {

inline void classify_correspondence(EndCorrespondence& c) {
    std::vector<int> hits(c.tgt_count, 0);
    for (std::size_t t : c.map) ++hits[t];
    c.injective = true;
    c.surjective = true;
    for (int h : hits) {
        if (h > 1) c.injective = false;
        if (h == 0) c.surjective = false;
    }
}

inline bool same_filtration_frame(const EndsFiltration& a, const EndsFiltration& b) {
    if (a.trunc == b.trunc) return a.radii == b.radii;
    return a.trunc && b.trunc && a.trunc->space().same_space(b.trunc->space()) &&
           a.trunc->radius_max() == b.trunc->radius_max() && a.radii == b.radii;
}

}  // namespace detail

// phi_N: sends each scale-N end to the scale-(N+1) end whose component
// contains it at every shared stable radius.
inline EndCorrespondence phi_map(const EndsFiltration& lower, const EndsFiltration& upper) {
    if (!detail::same_filtration_frame(lower, upper))
        throw ContractError("phi_map: filtrations use different truncations or schedules");
    if (!(lower.scale <= upper.scale + kTol))
        throw ContractError("phi_map: expected lower scale -> higher scale");
    if (!lower.stable || !upper.stable)
        throw ContractError("phi_map: both filtrations must be stable");

    const std::size_t m = lower.radii.size();
    const std::size_t shared_begin = std::max(lower.stable_suffix_begin, upper.stable_suffix_begin);

    EndCorrespondence corr;
    corr.src_count = lower.ends.size();
    corr.tgt_count = upper.ends.size();
    corr.map.resize(corr.src_count);

    // target component -> target end, per radius in the shared suffix
    std::vector<std::map<std::size_t, std::size_t>> owner(m);
    for (std::size_t e = 0; e < upper.ends.size(); ++e)
        for (std::size_t j = shared_begin; j < m; ++j)
            owner[j][upper.threads[e][j]] = e;

    for (std::size_t e = 0; e < lower.ends.size(); ++e) {
        std::optional<std::size_t> target;
        for (std::size_t j = shared_begin; j < m; ++j) {
            const auto& comp = lower.partitions[j].components[lower.threads[e][j]];
            const std::int32_t up_comp = upper.partitions[j].comp_of[comp.front()];
            // every point of the finer component must land in the same
            // coarser component; scales only coarsen, so a split is internal
            for (Index p : comp)
                if (upper.partitions[j].comp_of[p] != up_comp)
                    throw ConsistencyError(
                        "phi_map: containment ambiguous at radius " +
                        std::to_string(lower.radii[j]));
            auto it = owner[j].find(static_cast<std::size_t>(up_comp));
            if (it == owner[j].end())
                throw ConsistencyError("phi_map: image component is not on any end thread");
            if (target && *target != it->second)
                throw ConsistencyError("phi_map: end maps to different threads across radii");
            target = it->second;
        }
        corr.map[e] = *target;
    }
    detail::classify_correspondence(corr);
    return corr;
}

// Stability scan over integer scales.
struct StabilityScan {
    std::optional<int> K;
    // phis[i] relates scales[i] -> scales[i+1]; empty when either side is inconclusive
    std::vector<std::optional<EndCorrespondence>> phis;
};

inline StabilityScan detect_stability(const std::vector<EndsFiltration>& filtrations,
                                      int n_min, std::size_t window) {
    const std::size_t count = filtrations.size();
    if (count < window + 1)
        throw ConfigError("detect_stability: need at least window + 1 scales");

    StabilityScan scan;
    scan.phis.resize(count - 1);
    for (std::size_t i = 0; i + 1 < count; ++i) {
        if (!filtrations[i].stable || !filtrations[i + 1].stable) continue;
        scan.phis[i] = phi_map(filtrations[i], filtrations[i + 1]);
    }

    // smallest K whose whole tail of phi steps is bijective, with at least
    // `window` steps of evidence
    std::size_t q = count - 1;
    while (q > 0 && scan.phis[q - 1] && scan.phis[q - 1]->bijective()) --q;
    if (count - 1 - q >= window && filtrations[q].stable)
        scan.K = n_min + static_cast<int>(q);
    return scan;
}

struct SigmaConfig {
    int n_min = 1;
    int n_max = 8;
    FiltrationConfig filtration;
    std::size_t stability_window = 5;
    std::size_t max_ends = 64;               // counts above this report as ">= cap"
    std::optional<PointId> basepoint;        // override
};

struct SigmaReport {
    std::string space_name;
    PointId basepoint = 0;
    std::vector<double> basepoint_coords;
    SigmaConfig config;

    std::vector<int> scales;                              // n_min..n_max
    std::vector<std::optional<std::size_t>> per_scale;    // thread counts
    std::vector<bool> per_scale_capped;
    std::vector<std::string> phi_verdicts;                // per consecutive pair
    std::optional<int> K;
    std::optional<std::size_t> sigma;
    bool sigma_capped = false;

    std::vector<double> radii;                            // shared schedule
    std::vector<std::vector<std::size_t>> traces;         // per scale, per radius
    std::string notes;

    bool stable() const { return K.has_value(); }
};

// Full sigma computation: per-scale filtrations, phi chain, stabilization
// threshold and the stabilized invariant. Deterministic for a fixed config.
inline SigmaReport sigma(const SpaceOracle& input_space, const SigmaConfig& config) {
    if (config.n_min < 1 || config.n_max < config.n_min)
        throw ConfigError("sigma: scale range must satisfy 1 <= n_min <= n_max");
    const std::size_t scale_count =
        static_cast<std::size_t>(config.n_max - config.n_min + 1);
    if (scale_count < config.stability_window + 1)
        throw ConfigError("sigma: scale range must cover at least window + 1 scales");
    if (config.filtration.r_max < 16.0 * config.n_max)
        throw ConfigError("sigma: r_max must be at least 16 * n_max");

    SpaceOracle space = config.basepoint
                            ? input_space.with_basepoint(*config.basepoint)
                            : input_space;

    SigmaReport report;
    report.space_name = space.name();
    report.basepoint = space.basepoint();
    report.basepoint_coords = space.coordinates(space.basepoint());
    report.config = config;
    report.notes =
        "sigma_N counted as escaping chain-component threads through the radius "
        "filtration (computable surrogate for classes of escaping N-sequences)";

    auto trunc = truncate_shared(space, config.filtration.r_max);
    // per-scale filtrations are independent over the read-only truncation
    std::vector<std::future<EndsFiltration>> jobs;
    jobs.reserve(scale_count);
    for (int n = config.n_min; n <= config.n_max; ++n)
        jobs.push_back(std::async(std::launch::async, [trunc, n, &config] {
            return ends_filtration(trunc, static_cast<double>(n), config.filtration);
        }));
    std::vector<EndsFiltration> filtrations;
    filtrations.reserve(scale_count);
    for (int n = config.n_min; n <= config.n_max; ++n) {
        filtrations.push_back(jobs[static_cast<std::size_t>(n - config.n_min)].get());
        report.scales.push_back(n);
        const auto& f = filtrations.back();
        report.per_scale.push_back(f.stable ? std::optional<std::size_t>(f.thread_count)
                                            : std::nullopt);
        report.per_scale_capped.push_back(f.stable && f.thread_count > config.max_ends);
        report.traces.push_back(f.escaping_counts);
    }
    report.radii = filtrations.front().radii;

    const auto scan = detect_stability(filtrations, config.n_min, config.stability_window);
    for (const auto& phi : scan.phis)
        report.phi_verdicts.push_back(phi ? phi->verdict() : "inconclusive");
    report.K = scan.K;
    if (scan.K) {
        const auto& at_k = filtrations[static_cast<std::size_t>(*scan.K - config.n_min)];
        report.sigma_capped = at_k.thread_count > config.max_ends;
        report.sigma = report.sigma_capped ? config.max_ends : at_k.thread_count;
    }
    return report;
}

}  // namespace coarse
