#pragma once

// Maps between truncated spaces given as explicit point tables, with exact
// measurement of bornology profiles, properness evidence and closeness
// bounds, the coarse-equivalence verifier, and the induced map on ends.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coarse/ends.hpp"
#include "coarse/errors.hpp"
#include "coarse/neighbor_index.hpp"
#include "coarse/sequence.hpp"
#include "coarse/space.hpp"

namespace coarse {

// A point function on a source truncation. Image coordinates and radii are
// cached so measurement loops never touch oracle locks.
class CoarseMapWitness {
public:
    CoarseMapWitness(std::string name, std::shared_ptr<const TruncatedSpace> source,
                     SpaceOracle target, std::vector<PointId> table)
        : name_(std::move(name)),
          source_(std::move(source)),
          target_(std::move(target)),
          table_(std::move(table)) {
        if (table_.size() != source_->size())
            throw ContractError(name_ + ": table must be total on the source truncation");
        const std::size_t dim = target_.dim();
        image_coords_.resize(table_.size() * dim);
        image_radius_.resize(table_.size());
        const PointId tbp = target_.basepoint();
        for (std::size_t i = 0; i < table_.size(); ++i) {
            const auto c = target_.coordinates(table_[i]);
            std::copy(c.begin(), c.end(), image_coords_.begin() + i * dim);
            image_radius_[i] = target_.distance(tbp, table_[i]);
        }
        if (target_.metric_kind() == MetricKind::Matrix) {
            matrix_ = &target_.backend().matrix();
            matrix_n_ = static_cast<std::size_t>(target_.backend().count());
        }
    }

    const std::string& name() const { return name_; }
    const std::shared_ptr<const TruncatedSpace>& source() const { return source_; }
    const SpaceOracle& target() const { return target_; }
    PointId apply(Index i) const { return table_[i]; }
    const std::vector<PointId>& table() const { return table_; }
    double image_radius(Index i) const { return image_radius_[i]; }

    std::span<const double> image_coords(Index i) const {
        return {image_coords_.data() + static_cast<std::size_t>(i) * target_.dim(),
                target_.dim()};
    }

    // d_Y(f(i), f(j)) from the cache.
    double image_dist(Index i, Index j) const {
        if (matrix_)
            return (*matrix_)[static_cast<std::size_t>(table_[i]) * matrix_n_ + table_[j]];
        return detail::metric_on_coords(target_.metric_kind(), image_coords(i),
                                        image_coords(j));
    }

private:
    std::string name_;
    std::shared_ptr<const TruncatedSpace> source_;
    SpaceOracle target_;
    std::vector<PointId> table_;
    std::vector<double> image_coords_;
    std::vector<double> image_radius_;
    const std::vector<double>* matrix_ = nullptr;
    std::size_t matrix_n_ = 0;
};

using BornologyProfile = std::vector<std::pair<double, double>>;  // (N, M(N))

namespace detail {

struct ProfileMeasurement {
    BornologyProfile full;
    BornologyProfile half;  // both endpoints at radius <= R_max / 2
};

// Exact sup of d(f x, f y) over truncation pairs with d(x, y) <= N, for every
// requested N in one sweep. The half-truncation profile rides along for the
// growth check.
inline ProfileMeasurement measure_profile(const CoarseMapWitness& f,
                                          std::vector<double> scales) {
    std::sort(scales.begin(), scales.end());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    if (scales.empty() || !(scales.front() > 0))
        throw ParamError("bornology profile needs positive scales");

    const auto& trunc = *f.source();
    const double half_radius = trunc.radius_max() / 2.0;
    std::vector<double> bucket_full(scales.size(), 0.0);
    std::vector<double> bucket_half(scales.size(), 0.0);

    std::vector<Index> all(trunc.size());
    for (Index i = 0; i < trunc.size(); ++i) all[i] = i;
    for_pairs_within(trunc, all, scales.back(), [&](Index a, Index b, double d) {
        const auto k = static_cast<std::size_t>(
            std::lower_bound(scales.begin(), scales.end(), d - kTol) - scales.begin());
        if (k >= scales.size()) return;
        const double img = f.image_dist(a, b);
        bucket_full[k] = std::max(bucket_full[k], img);
        if (trunc.radius(a) <= half_radius + kTol && trunc.radius(b) <= half_radius + kTol)
            bucket_half[k] = std::max(bucket_half[k], img);
    });

    ProfileMeasurement out;
    double run_full = 0, run_half = 0;
    for (std::size_t k = 0; k < scales.size(); ++k) {
        run_full = std::max(run_full, bucket_full[k]);
        run_half = std::max(run_half, bucket_half[k]);
        out.full.emplace_back(scales[k], run_full);
        out.half.emplace_back(scales[k], run_half);
    }
    return out;
}

// Exact diameter of a point set within a truncation. Closed forms for the
// metrics with structure; small explicit spaces take the quadratic path.
inline double set_diameter(const TruncatedSpace& trunc, const std::vector<Index>& set) {
    if (set.size() < 2) return 0.0;
    const MetricKind kind = trunc.space().metric_kind();
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (kind == MetricKind::Taxicab && trunc.dim() == 1) {
        double lo = inf, hi = -inf;
        for (Index i : set) {
            lo = std::min(lo, trunc.coords(i)[0]);
            hi = std::max(hi, trunc.coords(i)[0]);
        }
        return hi - lo;
    }
    if (kind == MetricKind::Taxicab && trunc.dim() == 2) {
        // |dx| + |dy| = max(|du|, |dv|) after u = x + y, v = x - y
        double ulo = inf, uhi = -inf, vlo = inf, vhi = -inf;
        for (Index i : set) {
            const auto c = trunc.coords(i);
            ulo = std::min(ulo, c[0] + c[1]);
            uhi = std::max(uhi, c[0] + c[1]);
            vlo = std::min(vlo, c[0] - c[1]);
            vhi = std::max(vhi, c[0] - c[1]);
        }
        return std::max(uhi - ulo, vhi - vlo);
    }
    if (kind == MetricKind::StarTree) {
        // same-ray: depth range; cross-ray: sum of the two deepest on
        // distinct rays
        std::map<double, std::pair<double, double>> by_ray;  // ray -> (min, max)
        for (Index i : set) {
            const auto c = trunc.coords(i);
            auto [it, fresh] = by_ray.try_emplace(c[0], std::pair{c[1], c[1]});
            if (!fresh) {
                it->second.first = std::min(it->second.first, c[1]);
                it->second.second = std::max(it->second.second, c[1]);
            }
        }
        double best = 0, top1 = -inf, top2 = -inf;
        for (const auto& [ray, range] : by_ray) {
            best = std::max(best, range.second - range.first);
            if (range.second > top1) {
                top2 = top1;
                top1 = range.second;
            } else {
                top2 = std::max(top2, range.second);
            }
        }
        if (by_ray.size() > 1) best = std::max(best, top1 + top2);
        return best;
    }
    double best = 0;
    for (std::size_t a = 0; a < set.size(); ++a)
        for (std::size_t b = a + 1; b < set.size(); ++b)
            best = std::max(best, trunc.dist(set[a], set[b]));
    return best;
}

}  // namespace detail

inline BornologyProfile bornology_profile(const CoarseMapWitness& f,
                                          std::vector<double> scales) {
    return detail::measure_profile(f, std::move(scales)).full;
}

struct PropernessProbe {
    double rho = 0;
    PointId center = 0;
    double center_radius = 0;
    std::size_t preimage_size = 0;
    double preimage_diameter = 0;
    double preimage_max_radius = 0;
    bool bounded_center = false;  // target ball sits well inside the truncation
    bool touches_boundary = false;
};

struct PropernessReport {
    std::vector<PropernessProbe> probes;
    std::vector<std::pair<double, double>> max_diameter_per_rho;
    // a bounded target set whose preimage reaches the source boundary
    bool unbounded_evidence = false;
};

// Measures preimage diameters of target balls around sampled centers.
// Verdicts are evidence from a truncation, never proof.
inline PropernessReport properness_check(const CoarseMapWitness& f,
                                         std::vector<double> probe_radii,
                                         std::size_t center_samples = 16) {
    const auto& trunc = *f.source();
    PropernessReport report;

    // deterministic center sample: image points sorted by target radius,
    // thinned evenly
    std::vector<Index> order(trunc.size());
    for (Index i = 0; i < trunc.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (f.image_radius(a) != f.image_radius(b))
            return f.image_radius(a) < f.image_radius(b);
        return f.apply(a) < f.apply(b);
    });
    std::vector<Index> centers;
    if (!order.empty()) {
        const std::size_t step = std::max<std::size_t>(1, order.size() / center_samples);
        for (std::size_t i = 0; i < order.size(); i += step) centers.push_back(order[i]);
    }

    const double src_boundary = trunc.radius_max() - 1.0;
    for (double rho : probe_radii) {
        double worst = 0;
        for (Index c : centers) {
            PropernessProbe probe;
            probe.rho = rho;
            probe.center = f.apply(c);
            probe.center_radius = f.image_radius(c);
            std::vector<Index> pre;
            for (Index i = 0; i < trunc.size(); ++i) {
                double d;
                if (f.target().metric_kind() == MetricKind::Matrix)
                    d = f.target().distance(f.apply(i), probe.center);
                else
                    d = detail::metric_on_coords(f.target().metric_kind(),
                                                 f.image_coords(i), f.image_coords(c));
                if (leq(d, rho)) pre.push_back(i);
            }
            probe.preimage_size = pre.size();
            probe.preimage_diameter = detail::set_diameter(trunc, pre);
            for (Index i : pre)
                probe.preimage_max_radius = std::max(probe.preimage_max_radius, trunc.radius(i));
            probe.bounded_center =
                probe.center_radius + rho <= trunc.radius_max() / 2.0 + kTol;
            probe.touches_boundary = probe.preimage_max_radius >= src_boundary - kTol;
            if (probe.bounded_center && probe.touches_boundary)
                report.unbounded_evidence = true;
            worst = std::max(worst, probe.preimage_diameter);
            report.probes.push_back(probe);
        }
        report.max_diameter_per_rho.emplace_back(rho, worst);
    }
    return report;
}

// Exact sup over the shared source truncation of d(f1 x, f2 x).
inline double closeness(const CoarseMapWitness& f1, const CoarseMapWitness& f2) {
    if (f1.source() != f2.source())
        throw ContractError("closeness: witnesses use different source truncations");
    if (!f1.target().same_space(f2.target()))
        throw ContractError("closeness: witnesses have different target spaces");
    double sup = 0;
    for (Index i = 0; i < f1.source()->size(); ++i)
        sup = std::max(sup, f1.target().distance(f1.apply(i), f2.apply(i)));
    return sup;
}

namespace detail {

// (sup over all points, sup over points at radius <= R_max/2)
inline std::pair<double, double> closeness_with_growth(const CoarseMapWitness& f1,
                                                       const CoarseMapWitness& f2) {
    if (f1.source() != f2.source())
        throw ContractError("closeness: witnesses use different source truncations");
    if (!f1.target().same_space(f2.target()))
        throw ContractError("closeness: witnesses have different target spaces");
    const auto& trunc = *f1.source();
    const double half = trunc.radius_max() / 2.0;
    double sup = 0, sup_half = 0;
    for (Index i = 0; i < trunc.size(); ++i) {
        const double d = f1.target().distance(f1.apply(i), f2.apply(i));
        sup = std::max(sup, d);
        if (trunc.radius(i) <= half + kTol) sup_half = std::max(sup_half, d);
    }
    return {sup, sup_half};
}

}  // namespace detail

inline CoarseMapWitness identity_witness(std::shared_ptr<const TruncatedSpace> trunc) {
    std::vector<PointId> table = trunc->points();
    SpaceOracle target = trunc->space();
    return CoarseMapWitness("identity", std::move(trunc), std::move(target),
                            std::move(table));
}

// g after f. Every f-image must lie inside g's domain truncation.
inline CoarseMapWitness compose(const CoarseMapWitness& f, const CoarseMapWitness& g) {
    if (!f.target().same_space(g.source()->space()))
        throw ContractError("compose: target of " + f.name() + " is not the domain of " +
                            g.name());
    std::vector<PointId> table(f.source()->size());
    for (Index i = 0; i < f.source()->size(); ++i) {
        const auto j = g.source()->index_of(f.apply(i));
        if (!j)
            throw ContractError("compose: image point " + std::to_string(f.apply(i)) +
                                " of " + f.name() + " escapes the truncation of " +
                                g.name());
        table[i] = g.apply(*j);
    }
    return CoarseMapWitness(g.name() + " . " + f.name(), f.source(), g.target(),
                            std::move(table));
}

// Pointwise image of a sequence; validates as a target_scale-sequence.
inline NSequence map_sequence(const CoarseMapWitness& f, const NSequence& s,
                              double target_scale) {
    if (!s.space().same_space(f.source()->space()))
        throw ContractError("map_sequence: sequence lives outside the map's domain");
    std::vector<PointId> image;
    image.reserve(s.length());
    for (PointId p : s.points()) {
        const auto i = f.source()->index_of(p);
        if (!i)
            throw ContractError("map_sequence: sequence point " + std::to_string(p) +
                                " is outside the domain truncation");
        image.push_back(f.apply(*i));
    }
    return make_sequence(f.target(), std::move(image), target_scale);
}

// M + 2R: preimage diameter bound when g o f is R-close to the identity and
// g has bornology bound M at the relevant scale.
inline double proper_from_composition(double gf_bound_r, double g_profile_m) {
    return g_profile_m + 2.0 * gf_bound_r;
}

// Scales chosen along the equivalence recipe: M >= K', L >= D, S covering
// both the f o g closeness and f's bound at scale L.
struct EquivalencePlan {
    double K = 1;        // source stabilization threshold
    double K_prime = 1;  // target stabilization threshold
    double M = 0;        // f sends K-sequences to M-sequences
    double L = 0;        // g sends M-sequences to L-sequences
    double D = 0;        // sup d(x, g o f x)
    double S = 0;        // sup d(y, f o g y) joined with f's bound at L
};

struct EquivalenceCheckResult {
    bool verified = false;
    std::string violation;  // failed property and witness pair when not verified
    EquivalencePlan plan;
    double closeness_gf = 0;  // d(g o f, id) sup
    double closeness_fg = 0;  // d(f o g, id) sup
    // S is the max of these two; both measurements are kept
    double s_from_closeness = 0;
    double s_from_profile = 0;
    BornologyProfile f_profile;
    BornologyProfile g_profile;
    PropernessReport f_properness;
    PropernessReport g_properness;
};

// Measures every bound for the pair (f: X -> Y, g: Y -> X) and assembles the
// plan. A bound whose full-truncation value exceeds its half-truncation value
// by more than growth_tolerance counts as unbounded-looking and fails the
// verdict with a named violation; nothing here is a proof beyond the
// truncation.
inline EquivalenceCheckResult verify_coarse_equivalence(const CoarseMapWitness& f,
                                                        const CoarseMapWitness& g,
                                                        std::vector<double> scales,
                                                        double k_source = 1.0,
                                                        double k_target = 1.0,
                                                        double growth_tolerance = 0.0) {
    if (!f.target().same_space(g.source()->space()) ||
        !g.target().same_space(f.source()->space()))
        throw ContractError("verify_coarse_equivalence: f and g do not form a round trip");

    EquivalenceCheckResult result;
    auto fail = [&](const std::string& why) {
        result.verified = false;
        result.violation = why;
        return result;
    };

    const auto gf = compose(f, g);
    const auto fg = compose(g, f);
    const auto id_x = identity_witness(f.source());
    const auto id_y = identity_witness(g.source());

    const auto [d_full, d_half] = detail::closeness_with_growth(gf, id_x);
    result.closeness_gf = d_full;
    const auto [s_full, s_half] = detail::closeness_with_growth(fg, id_y);
    result.closeness_fg = s_full;

    if (scales.empty()) throw ParamError("verify_coarse_equivalence: scale list is empty");
    std::sort(scales.begin(), scales.end());

    auto f_meas = detail::measure_profile(f, scales);
    auto g_meas = detail::measure_profile(g, scales);
    result.f_profile = f_meas.full;
    result.g_profile = g_meas.full;

    auto grew = [growth_tolerance](const BornologyProfile& full, const BornologyProfile& half) {
        for (std::size_t i = 0; i < full.size(); ++i)
            if (full[i].second > half[i].second + growth_tolerance + kTol) return true;
        return false;
    };
    if (grew(f_meas.full, f_meas.half))
        return fail("f = " + f.name() + " looks non-bornologous: profile grows with the truncation");
    if (grew(g_meas.full, g_meas.half))
        return fail("g = " + g.name() + " looks non-bornologous: profile grows with the truncation");
    if (d_full > d_half + growth_tolerance + kTol)
        return fail("g o f vs id_X: closeness bound grows with the truncation (" +
                    f.name() + ", " + g.name() + ")");
    if (s_full > s_half + growth_tolerance + kTol)
        return fail("f o g vs id_Y: closeness bound grows with the truncation (" +
                    f.name() + ", " + g.name() + ")");

    result.f_properness = properness_check(f, {1.0, 2.0, 4.0});
    if (result.f_properness.unbounded_evidence)
        return fail("f = " + f.name() + " looks non-proper: bounded set with boundary-reaching preimage");
    result.g_properness = properness_check(g, {1.0, 2.0, 4.0});
    if (result.g_properness.unbounded_evidence)
        return fail("g = " + g.name() + " looks non-proper: bounded set with boundary-reaching preimage");

    // the recipe: M >= K', L >= D, S covers both measured S-side bounds.
    // L also covers K so the interleaved union of a K-sequence with its
    // g o f image stays an L-sequence.
    EquivalencePlan plan;
    plan.K = k_source;
    plan.K_prime = k_target;
    plan.D = d_full;
    const double f_at_k = detail::measure_profile(f, {k_source}).full.front().second;
    plan.M = std::max(f_at_k, k_target);
    const double g_at_m = detail::measure_profile(g, {plan.M}).full.front().second;
    plan.L = std::max({g_at_m, plan.D, k_source});
    const double f_at_l = detail::measure_profile(f, {plan.L}).full.front().second;
    plan.S = std::max(s_full, f_at_l);
    result.s_from_closeness = s_full;
    result.s_from_profile = f_at_l;
    result.plan = plan;
    result.verified = true;
    return result;
}

// The induced map on ends: each source end's component thread is pushed
// through the table and located among the target end threads.
inline EndCorrespondence induced_end_map(const CoarseMapWitness& f,
                                         const EquivalencePlan& plan,
                                         const EndsFiltration& src_ends,
                                         const EndsFiltration& tgt_ends) {
    if (src_ends.trunc != f.source())
        throw ContractError("induced_end_map: source filtration must use the map's truncation");
    if (!tgt_ends.trunc->space().same_space(f.target()))
        throw ContractError("induced_end_map: target filtration is over a different space");
    if (!src_ends.stable || !tgt_ends.stable)
        throw ContractError("induced_end_map: both filtrations must be stable");
    if (src_ends.scale + kTol < plan.K || tgt_ends.scale + kTol < plan.M)
        throw ContractError("induced_end_map: filtration scales below the plan's K/M");

    const auto& tgt_trunc = *tgt_ends.trunc;
    const std::size_t mt = tgt_ends.radii.size();

    std::vector<std::map<std::size_t, std::size_t>> owner(mt);
    for (std::size_t e = 0; e < tgt_ends.ends.size(); ++e)
        for (std::size_t j = tgt_ends.stable_suffix_begin; j < mt; ++j)
            owner[j][tgt_ends.threads[e][j]] = e;

    EndCorrespondence corr;
    corr.src_count = src_ends.ends.size();
    corr.tgt_count = tgt_ends.ends.size();
    corr.map.resize(corr.src_count);

    const std::size_t ms = src_ends.radii.size();
    for (std::size_t e = 0; e < src_ends.ends.size(); ++e) {
        const auto& comp = src_ends.partitions[ms - 1].components[src_ends.ends[e]];
        std::vector<Index> image;  // target local indices
        image.reserve(comp.size());
        for (Index i : comp) {
            const PointId y = f.apply(i);
            const auto j = tgt_trunc.index_of(y);
            if (!j)
                throw ConsistencyError(
                    "induced_end_map: image point " + std::to_string(y) +
                    " left the target truncation; raise the target R_max headroom");
            image.push_back(*j);
        }

        std::optional<std::size_t> resolved;
        std::string trouble;
        for (std::size_t j = mt; j-- > tgt_ends.stable_suffix_begin;) {
            const double r = tgt_ends.radii[j];
            std::optional<std::size_t> thread;
            bool off_thread = false, split = false;
            bool any = false;
            for (Index p : image) {
                if (tgt_trunc.radius(p) < r - kTol) continue;
                any = true;
                const std::int32_t c = tgt_ends.partitions[j].comp_of[p];
                auto it = owner[j].find(static_cast<std::size_t>(c));
                if (it == owner[j].end()) {
                    off_thread = true;  // small non-escaping island; retry coarser
                    break;
                }
                if (thread && *thread != it->second) {
                    split = true;
                    break;
                }
                thread = it->second;
            }
            if (split)
                throw ConsistencyError(
                    "induced_end_map: image of source end " + std::to_string(e) +
                    " splits across target ends at radius " + std::to_string(r) +
                    "; scale M or R_max headroom is insufficient");
            if (any && !off_thread && thread) {
                resolved = thread;
                break;
            }
            trouble = off_thread ? "image touched a non-escaping component"
                                 : "image empty beyond radius " + std::to_string(r);
        }
        if (!resolved)
            throw ConsistencyError("induced_end_map: could not resolve the image thread of end " +
                                   std::to_string(e) + " (" + trouble + ")");
        corr.map[e] = *resolved;
    }
    detail::classify_correspondence(corr);
    return corr;
}

// Builtin closed-form tables over a source truncation.
inline CoarseMapWitness builtin_map(const std::string& kind,
                                    std::shared_ptr<const TruncatedSpace> source,
                                    const SpaceOracle& target) {
    const auto& trunc = *source;
    std::vector<PointId> table(trunc.size());
    auto image_of = [&](Index i) -> std::optional<PointId> {
        const auto c = trunc.coords(i);
        if (kind == "floor") return target.find_point(std::vector<double>{std::floor(c[0] + kTol)});
        if (kind == "inclusion") return target.find_point(std::vector<double>(c.begin(), c.end()));
        if (kind == "vase-project") return target.find_point(std::vector<double>{c[1]});
        if (kind == "vase-embed") return target.find_point(std::vector<double>{1.0, c[0]});
        if (kind == "identity") {
            if (!trunc.space().same_space(target))
                throw ContractError("identity map requires matching source and target spaces");
            return trunc.id(i);
        }
        if (kind == "constant") return target.basepoint();
        throw ParamError("unknown builtin map: " + kind);
    };
    for (Index i = 0; i < trunc.size(); ++i) {
        const auto y = image_of(i);
        if (!y)
            throw ValidationError("builtin map " + kind + ": image of source point " +
                                  std::to_string(trunc.id(i)) +
                                  " does not exist in target " + target.name());
        table[i] = *y;
    }
    return CoarseMapWitness(kind, std::move(source), target, std::move(table));
}

}  // namespace coarse
