#pragma once

// Pair enumeration within a distance bound over a truncation, without the
// full quadratic sweep. Coordinate metrics get an axis-aligned grid of cell
// width `bound` (taxicab and euclidean both satisfy |a_i - b_i| <= d(a, b)
// per axis). Other metrics fall back to radius-shell buckets, valid for any
// metric since |radius(p) - radius(q)| <= d(p, q).

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "coarse/space.hpp"

namespace coarse {
namespace detail {

inline std::int64_t cell_key(std::int64_t cx, std::int64_t cy) {
    return (cx << 32) ^ (cy & 0xffffffffLL);
}

template <class Fn>
void pairs_via_grid(const TruncatedSpace& trunc, std::span<const Index> subset,
                    double bound, Fn&& fn) {
    const std::size_t dim = trunc.dim();
    // cell width strictly above bound + kTol, so matching pairs span at most
    // one cell boundary per axis
    const double width = bound + 1e-6;
    std::unordered_map<std::int64_t, std::vector<Index>> cells;
    cells.reserve(subset.size());
    auto cell_of = [&](Index i) {
        auto c = trunc.coords(i);
        const auto cx = static_cast<std::int64_t>(std::floor(c[0] / width));
        const auto cy = dim > 1 ? static_cast<std::int64_t>(std::floor(c[1] / width)) : 0;
        return std::pair<std::int64_t, std::int64_t>{cx, cy};
    };
    for (Index i : subset) {
        auto [cx, cy] = cell_of(i);
        cells[cell_key(cx, cy)].push_back(i);
    }
    for (Index i : subset) {
        auto [cx, cy] = cell_of(i);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -(dim > 1); dy <= static_cast<std::int64_t>(dim > 1); ++dy) {
                auto it = cells.find(cell_key(cx + dx, cy + dy));
                if (it == cells.end()) continue;
                for (Index j : it->second) {
                    if (j <= i) continue;  // each unordered pair once
                    const double d = trunc.dist(i, j);
                    if (leq(d, bound)) fn(i, j, d);
                }
            }
        }
    }
}

template <class Fn>
void pairs_via_shells(const TruncatedSpace& trunc, std::span<const Index> subset,
                      double bound, Fn&& fn) {
    const double width = bound + 1e-6;
    std::unordered_map<std::int64_t, std::vector<Index>> shells;
    auto shell_of = [&](Index i) {
        return static_cast<std::int64_t>(std::floor(trunc.radius(i) / width));
    };
    for (Index i : subset) shells[shell_of(i)].push_back(i);
    for (auto& [s, members] : shells) {
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                const double d = trunc.dist(members[a], members[b]);
                if (leq(d, bound)) fn(members[a], members[b], d);
            }
        auto next = shells.find(s + 1);
        if (next == shells.end()) continue;
        for (Index i : members)
            for (Index j : next->second) {
                const double d = trunc.dist(i, j);
                if (leq(d, bound)) fn(i, j, d);
            }
    }
}

}  // namespace detail

// Calls fn(i, j, d) once for every unordered pair {i, j} drawn from `subset`
// with dist(i, j) <= bound (+kTol).
template <class Fn>
void for_pairs_within(const TruncatedSpace& trunc, std::span<const Index> subset,
                      double bound, Fn&& fn) {
    if (!(bound > 0)) throw ParamError("pair enumeration requires a positive bound");
    const MetricKind kind = trunc.space().metric_kind();
    if (kind == MetricKind::Taxicab || kind == MetricKind::Euclidean)
        detail::pairs_via_grid(trunc, subset, bound, fn);
    else
        detail::pairs_via_shells(trunc, subset, bound, fn);
}

}  // namespace coarse
