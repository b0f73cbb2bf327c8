#pragma once

// Discrete metric spaces presented as point oracles: a basepoint, a distance
// function and a deterministic ball enumerator. Infinite builtin spaces are
// interned lazily in a canonical order (nondecreasing distance from a fixed
// origin, ties broken lexicographically), so point ids depend only on the
// space parameters and never on the call pattern.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coarse/errors.hpp"

namespace coarse {

using PointId = std::int64_t;
using Index = std::uint32_t;  // local index within a truncation

// Absolute tolerance for real comparisons; "d <= N" means d <= N + kTol.
inline constexpr double kTol = 1e-9;

inline bool leq(double a, double b) { return a <= b + kTol; }

enum class MetricKind { Taxicab, Euclidean, StarTree, Matrix };

namespace detail {

struct CanonicalPoint {
    double norm;               // distance from the canonical origin
    std::array<double, 2> xy;  // padded with 0 for 1-d spaces
};

inline bool canonical_less(const CanonicalPoint& a, const CanonicalPoint& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    if (a.xy[0] != b.xy[0]) return a.xy[0] < b.xy[0];
    return a.xy[1] < b.xy[1];
}

// Emits every point of the space with canonical norm <= bound, each exactly
// once, in any order. The backend normalizes the ordering.
using Generator = std::function<void(double bound, std::vector<CanonicalPoint>&)>;

inline double metric_on_coords(MetricKind kind, std::span<const double> a,
                               std::span<const double> b) {
    switch (kind) {
        case MetricKind::Taxicab: {
            double d = 0;
            for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
            return d;
        }
        case MetricKind::Euclidean: {
            double d = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double t = a[i] - b[i];
                d += t * t;
            }
            return std::sqrt(d);
        }
        case MetricKind::StarTree:
            // coords are (ray, depth); the root is the unique depth-0 point
            if (a[0] == b[0]) return std::abs(a[1] - b[1]);
            return a[1] + b[1];
        case MetricKind::Matrix:
            throw ContractError("matrix metric requires point ids, not coordinates");
    }
    return 0;
}

class Backend {
public:
    // Infinite builtin space driven by a canonical generator.
    Backend(std::string name, std::size_t dim, MetricKind metric, Generator gen)
        : name_(std::move(name)), dim_(dim), metric_(metric), gen_(std::move(gen)) {
        ensure_norm(2.0);  // the canonical origin gets id 0 up front
    }

    // Explicit finite space; matrix empty unless metric == Matrix.
    Backend(std::string name, std::size_t dim, MetricKind metric,
            std::vector<double> coords, std::vector<double> matrix)
        : name_(std::move(name)),
          dim_(dim),
          metric_(metric),
          finite_(true),
          coords_(std::move(coords)),
          matrix_(std::move(matrix)) {
        count_ = dim_ ? static_cast<std::int64_t>(coords_.size() / dim_) : 0;
        enumerated_ = std::numeric_limits<double>::infinity();
    }

    const std::string& name() const { return name_; }
    std::size_t dim() const { return dim_; }
    MetricKind metric_kind() const { return metric_; }
    bool finite() const { return finite_; }
    const std::vector<double>& matrix() const { return matrix_; }

    std::int64_t count() const {
        std::shared_lock lock(mu_);
        return count_;
    }

    double distance(PointId a, PointId b) const {
        std::shared_lock lock(mu_);
        check_id(a);
        check_id(b);
        if (metric_ == MetricKind::Matrix)
            return matrix_[static_cast<std::size_t>(a) * count_ + b];
        return metric_on_coords(metric_, coord_span(a), coord_span(b));
    }

    std::vector<double> coordinates(PointId p) const {
        std::shared_lock lock(mu_);
        check_id(p);
        auto s = coord_span(p);
        return {s.begin(), s.end()};
    }

    // Interns every point with canonical norm <= bound.
    void ensure_norm(double bound) const {
        {
            std::shared_lock lock(mu_);
            if (bound <= enumerated_) return;
        }
        std::unique_lock lock(mu_);
        if (bound <= enumerated_) return;
        std::vector<CanonicalPoint> pts;
        gen_(bound, pts);
        std::sort(pts.begin(), pts.end(), canonical_less);
        // The previous enumeration must be a prefix of the new one; the sort
        // key is independent of the bound, so this holds by construction.
        if (static_cast<std::int64_t>(pts.size()) < count_)
            throw OracleContractError(name_ + ": enumeration shrank on extension");
        coords_.resize(pts.size() * dim_);
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t d = 0; d < dim_; ++d) coords_[i * dim_ + d] = pts[i].xy[d];
        count_ = static_cast<std::int64_t>(pts.size());
        enumerated_ = bound;
    }

    // All interned points within `radius` of `center`, ascending id order.
    std::vector<PointId> scan_ball(PointId center, double radius) const {
        std::shared_lock lock(mu_);
        check_id(center);
        std::vector<PointId> out;
        for (PointId p = 0; p < count_; ++p) {
            const double d = metric_ == MetricKind::Matrix
                                 ? matrix_[static_cast<std::size_t>(center) * count_ + p]
                                 : metric_on_coords(metric_, coord_span(center), coord_span(p));
            if (leq(d, radius)) out.push_back(p);
        }
        return out;
    }

    std::optional<PointId> find_by_coords(std::span<const double> c) const {
        std::shared_lock lock(mu_);
        if (c.size() != dim_) return std::nullopt;
        for (PointId p = 0; p < count_; ++p) {
            auto s = coord_span(p);
            bool match = true;
            for (std::size_t d = 0; d < dim_; ++d)
                if (std::abs(s[d] - c[d]) > kTol) { match = false; break; }
            if (match) return p;
        }
        return std::nullopt;
    }

private:
    std::span<const double> coord_span(PointId p) const {
        return {coords_.data() + static_cast<std::size_t>(p) * dim_, dim_};
    }

    void check_id(PointId p) const {
        if (p < 0 || p >= count_)
            throw ContractError(name_ + ": unknown point id " + std::to_string(p));
    }

    std::string name_;
    std::size_t dim_;
    MetricKind metric_;
    Generator gen_;
    bool finite_ = false;

    mutable std::shared_mutex mu_;
    mutable std::vector<double> coords_;  // count * dim, canonical order
    std::vector<double> matrix_;          // count * count when metric == Matrix
    mutable std::int64_t count_ = 0;
    mutable double enumerated_ = -1.0;  // every point with norm <= this is interned
};

}  // namespace detail

// Value handle onto a (possibly infinite) pointed metric space. Copies share
// the backend; rebasing via with_basepoint keeps point ids consistent.
class SpaceOracle {
public:
    SpaceOracle() = default;
    SpaceOracle(std::shared_ptr<const detail::Backend> backend, PointId basepoint)
        : backend_(std::move(backend)), basepoint_(basepoint) {}

    const std::string& name() const { return backend_->name(); }
    std::size_t dim() const { return backend_->dim(); }
    MetricKind metric_kind() const { return backend_->metric_kind(); }
    bool finite() const { return backend_->finite(); }
    PointId basepoint() const { return basepoint_; }

    double distance(PointId a, PointId b) const { return backend_->distance(a, b); }

    std::vector<double> coordinates(PointId p) const { return backend_->coordinates(p); }

    // Every point within `radius` of the basepoint, ascending id order.
    // Deterministic: identical calls return identical lists.
    std::vector<PointId> ball(double radius) const {
        if (!(radius >= 0)) throw ParamError(name() + ": ball radius must be nonnegative");
        // d(origin, p) <= d(origin, basepoint) + radius for every ball member
        backend_->ensure_norm(backend_->distance(0, basepoint_) + radius + 1.0);
        return backend_->scan_ball(basepoint_, radius);
    }

    // Locates a point by display coordinates (within kTol per component),
    // extending the enumeration far enough to see it if it exists.
    std::optional<PointId> find_point(std::span<const double> coords) const {
        if (!backend_->finite() && coords.size() == backend_->dim()) {
            auto origin = backend_->coordinates(0);
            const double norm =
                detail::metric_on_coords(backend_->metric_kind(), origin, coords);
            backend_->ensure_norm(norm + 1.0);
        }
        return backend_->find_by_coords(coords);
    }

    SpaceOracle with_basepoint(PointId p) const {
        backend_->distance(p, p);  // id validity check
        return SpaceOracle(backend_, p);
    }

    bool same_space(const SpaceOracle& other) const { return backend_ == other.backend_; }

    const detail::Backend& backend() const { return *backend_; }

private:
    std::shared_ptr<const detail::Backend> backend_;
    PointId basepoint_ = 0;
};

struct BuiltinParams {
    double eps = 1.0;  // net spacing
    int k = 3;         // ray count for star-tree
};

namespace detail {

inline Generator make_integers_gen(double eps) {
    return [eps](double bound, std::vector<CanonicalPoint>& out) {
        out.push_back({0.0, {0.0, 0.0}});
        for (std::int64_t k = 1; k * eps <= bound + kTol; ++k) {
            const double x = k * eps;
            out.push_back({x, {x, 0.0}});
            out.push_back({x, {-x, 0.0}});
        }
    };
}

inline Generator make_halfline_gen(double eps) {
    return [eps](double bound, std::vector<CanonicalPoint>& out) {
        for (std::int64_t k = 0; k * eps <= bound + kTol; ++k)
            out.push_back({k * eps, {1.0 + k * eps, 0.0}});
    };
}

// V = two vertical walls at x = +-1 joined by the base segment y = 1,
// taxicab metric, canonical origin (1, 1). Wall points carry the base
// endpoints, so the base contributes interior points only.
inline Generator make_vase_gen(double eps) {
    return [eps](double bound, std::vector<CanonicalPoint>& out) {
        for (std::int64_t k = 0; k * eps <= bound + kTol; ++k)
            out.push_back({k * eps, {1.0, 1.0 + k * eps}});
        for (std::int64_t k = 0; 2.0 + k * eps <= bound + kTol; ++k)
            out.push_back({2.0 + k * eps, {-1.0, 1.0 + k * eps}});
        for (std::int64_t k = 1; -1.0 + k * eps < 1.0 - kTol; ++k) {
            const double x = -1.0 + k * eps;
            const double norm = 1.0 - x;
            if (norm <= bound + kTol) out.push_back({norm, {x, 1.0}});
        }
    };
}

inline Generator make_lattice2d_gen() {
    return [](double bound, std::vector<CanonicalPoint>& out) {
        const std::int64_t range = static_cast<std::int64_t>(std::floor(bound + kTol));
        for (std::int64_t x = -range; x <= range; ++x)
            for (std::int64_t y = -(range - std::abs(x)); y <= range - std::abs(x); ++y)
                out.push_back({static_cast<double>(std::abs(x) + std::abs(y)),
                               {static_cast<double>(x), static_cast<double>(y)}});
    };
}

inline Generator make_star_tree_gen(int rays) {
    return [rays](double bound, std::vector<CanonicalPoint>& out) {
        out.push_back({0.0, {0.0, 0.0}});  // shared root
        for (std::int64_t depth = 1; depth <= static_cast<std::int64_t>(bound + kTol); ++depth)
            for (int ray = 0; ray < rays; ++ray)
                out.push_back({static_cast<double>(depth),
                               {static_cast<double>(ray), static_cast<double>(depth)}});
    };
}

}  // namespace detail

// Builtin example spaces. Basepoints: integers/real-net 0, halfline-net 1,
// vase-net (1,1), lattice2d (0,0), star-tree the root.
inline SpaceOracle builtin_space(const std::string& name, const BuiltinParams& params = {}) {
    const double eps = params.eps;
    const bool needs_eps =
        name == "real-net" || name == "halfline-net" || name == "vase-net";
    if (needs_eps && !(eps > 0))
        throw ParamError(name + ": eps must be positive, got " + std::to_string(eps));

    if (name == "integers") {
        auto b = std::make_shared<detail::Backend>("integers", 1, MetricKind::Taxicab,
                                                   detail::make_integers_gen(1.0));
        return SpaceOracle(b, 0);
    }
    if (name == "real-net") {
        auto b = std::make_shared<detail::Backend>("real-net", 1, MetricKind::Taxicab,
                                                   detail::make_integers_gen(eps));
        return SpaceOracle(b, 0);
    }
    if (name == "halfline-net") {
        auto b = std::make_shared<detail::Backend>("halfline-net", 1, MetricKind::Taxicab,
                                                   detail::make_halfline_gen(eps));
        return SpaceOracle(b, 0);
    }
    if (name == "vase-net") {
        auto b = std::make_shared<detail::Backend>("vase-net", 2, MetricKind::Taxicab,
                                                   detail::make_vase_gen(eps));
        return SpaceOracle(b, 0);
    }
    if (name == "lattice2d") {
        auto b = std::make_shared<detail::Backend>("lattice2d", 2, MetricKind::Taxicab,
                                                   detail::make_lattice2d_gen());
        return SpaceOracle(b, 0);
    }
    if (name == "star-tree") {
        if (params.k < 1)
            throw ParamError("star-tree: k must be a positive integer, got " +
                             std::to_string(params.k));
        auto b = std::make_shared<detail::Backend>("star-tree", 2, MetricKind::StarTree,
                                                   detail::make_star_tree_gen(params.k));
        return SpaceOracle(b, 0);
    }
    throw ParamError("unknown builtin space: " + name);
}

// Read-only snapshot of a ball around the basepoint. Distances between
// truncation points are served from local storage, free of oracle locks.
class TruncatedSpace {
public:
    TruncatedSpace(SpaceOracle space, double radius_max)
        : space_(std::move(space)), radius_max_(radius_max) {
        if (!(radius_max > 0)) throw ParamError("truncate: radius must be positive");
        ids_ = space_.ball(radius_max);
        const std::size_t n = ids_.size();
        const std::size_t dim = space_.dim();
        coords_.resize(n * dim);
        radius_.resize(n);
        index_.reserve(n);
        const PointId bp = space_.basepoint();
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = space_.coordinates(ids_[i]);
            std::copy(c.begin(), c.end(), coords_.begin() + i * dim);
            radius_[i] = space_.distance(bp, ids_[i]);
            if (radius_[i] > radius_max_ + kTol)
                throw OracleContractError(space_.name() + ": ball(" +
                                          std::to_string(radius_max_) +
                                          ") returned a point at distance " +
                                          std::to_string(radius_[i]));
            index_.emplace(ids_[i], static_cast<Index>(i));
        }
        if (space_.metric_kind() == MetricKind::Matrix) {
            matrix_ = &space_.backend().matrix();
            matrix_n_ = static_cast<std::size_t>(space_.backend().count());
        }
    }

    const SpaceOracle& space() const { return space_; }
    double radius_max() const { return radius_max_; }
    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return space_.dim(); }
    PointId id(Index i) const { return ids_[i]; }
    const std::vector<PointId>& points() const { return ids_; }
    double radius(Index i) const { return radius_[i]; }

    std::optional<Index> index_of(PointId p) const {
        auto it = index_.find(p);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::span<const double> coords(Index i) const {
        return {coords_.data() + static_cast<std::size_t>(i) * dim(), dim()};
    }

    double dist(Index i, Index j) const {
        if (matrix_)
            return (*matrix_)[static_cast<std::size_t>(ids_[i]) * matrix_n_ + ids_[j]];
        return detail::metric_on_coords(space_.metric_kind(), coords(i), coords(j));
    }

private:
    SpaceOracle space_;
    double radius_max_;
    std::vector<PointId> ids_;
    std::vector<double> coords_;
    std::vector<double> radius_;
    std::unordered_map<PointId, Index> index_;
    const std::vector<double>* matrix_ = nullptr;
    std::size_t matrix_n_ = 0;
};

inline TruncatedSpace truncate(const SpaceOracle& space, double radius_max) {
    return TruncatedSpace(space, radius_max);
}

inline std::shared_ptr<const TruncatedSpace> truncate_shared(const SpaceOracle& space,
                                                             double radius_max) {
    return std::make_shared<const TruncatedSpace>(space, radius_max);
}

}  // namespace coarse
