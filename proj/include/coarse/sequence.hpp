#pragma once

// N-sequences: based point sequences whose consecutive gaps stay within a
// scale, with an escape-radius certificate standing in for "goes to
// infinity" on a truncation. Includes the subsequence relation, the
// basepoint-prepend map, the interleaved union of two sequences, and a
// budgeted search for equivalence chains.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/space.hpp"

namespace coarse {

class NSequence {
public:
    NSequence() = default;

    const SpaceOracle& space() const { return space_; }
    double scale() const { return scale_; }
    const std::vector<PointId>& points() const { return points_; }
    PointId basepoint() const { return points_.front(); }
    std::size_t length() const { return points_.size(); }
    double escape_radius() const { return escape_radius_; }

private:
    friend NSequence make_sequence(const SpaceOracle&, std::vector<PointId>, double);

    NSequence(SpaceOracle space, double scale, std::vector<PointId> points,
              double escape_radius)
        : space_(std::move(space)),
          scale_(scale),
          points_(std::move(points)),
          escape_radius_(escape_radius) {}

    SpaceOracle space_;
    double scale_ = 0;
    std::vector<PointId> points_;
    double escape_radius_ = 0;
};

// Validates every consecutive gap against the scale and computes the escape
// radius. points[0] is the basepoint of the sequence.
inline NSequence make_sequence(const SpaceOracle& space, std::vector<PointId> points,
                               double scale) {
    if (!(scale > 0)) throw ParamError("sequence scale must be positive");
    if (points.empty()) throw ParamError("sequence needs at least its basepoint");
    double escape = 0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double gap = space.distance(points[i], points[i + 1]);
        if (!leq(gap, scale))
            throw ScaleViolation("gap " + std::to_string(gap) + " exceeds scale " +
                                     std::to_string(scale) + " at index " +
                                     std::to_string(i),
                                 i, gap);
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        escape = std::max(escape, space.distance(points[0], points[i]));
    return NSequence(space, scale, std::move(points), escape);
}

// An N-sequence is accepted wherever an n-sequence (n >= N) is required.
inline NSequence rescale(const NSequence& s, double scale) {
    return make_sequence(s.space(), s.points(), scale);
}

// Desk-scale certificate for going to infinity: the sequence reaches
// distance >= r_escape from its basepoint.
inline bool escapes(const NSequence& s, double r_escape) {
    if (!(r_escape > 0)) throw ParamError("escape radius must be positive");
    return s.escape_radius() >= r_escape - kTol;
}

// True iff s.points is an order-preserving selection of t.points, matched by
// point identity. Greedy matching is exact for this relation.
inline bool is_subsequence(const NSequence& s, const NSequence& t) {
    if (!s.space().same_space(t.space()))
        throw ContractError("is_subsequence: sequences live in different spaces");
    if (s.scale() != t.scale())
        throw ContractError("is_subsequence: sequences have different scales");
    std::size_t i = 0;
    for (PointId p : t.points()) {
        if (i == s.length()) break;
        if (s.points()[i] == p) ++i;
    }
    return i == s.length();
}

// The map z_n: prepends a new basepoint y0 in front of s, valid whenever
// n >= d(x0, y0). The result is an n-sequence based at y0.
inline NSequence prepend_basepoint(const NSequence& s, PointId y0, double n) {
    const double d = s.space().distance(s.basepoint(), y0);
    if (!leq(d, n))
        throw HypothesisViolation("prepend_basepoint: n = " + std::to_string(n) +
                                  " < d(x0, y0) = " + std::to_string(d));
    std::vector<PointId> pts;
    pts.reserve(s.length() + 1);
    pts.push_back(y0);
    pts.insert(pts.end(), s.points().begin(), s.points().end());
    return make_sequence(s.space(), std::move(pts), n);
}

// Interleaved union t0, s0, s1, t1, t2, s2, s3, ... with both inputs padded
// to equal length by repeating their last point. Both inputs are
// subsequences of the result; every created gap must fit within L.
inline NSequence interleave_merge(const NSequence& s, const NSequence& t, double L) {
    if (!s.space().same_space(t.space()))
        throw ContractError("interleave_merge: sequences live in different spaces");
    if (!(L > 0)) throw ParamError("interleave_merge: L must be positive");
    std::vector<PointId> a = s.points();
    std::vector<PointId> b = t.points();
    while (a.size() < b.size()) a.push_back(a.back());
    while (b.size() < a.size()) b.push_back(b.back());
    const std::size_t m = a.size();

    std::vector<PointId> out;
    out.reserve(2 * m + 1);
    out.push_back(b[0]);
    std::size_t i = 0, j = 1;
    while (i < m || j < m) {
        for (int step = 0; step < 2 && i < m; ++step) out.push_back(a[i++]);
        for (int step = 0; step < 2 && j < m; ++step) out.push_back(b[j++]);
    }

    const auto& space = s.space();
    for (std::size_t p = 0; p + 1 < out.size(); ++p) {
        const double gap = space.distance(out[p], out[p + 1]);
        if (!leq(gap, L))
            throw ScaleViolation(
                "interleave_merge: gap between points " + std::to_string(out[p]) +
                    " and " + std::to_string(out[p + 1]) + " is " + std::to_string(gap) +
                    " > L = " + std::to_string(L) + "; raise L",
                p, gap);
    }
    return make_sequence(space, std::move(out), L);
}

// A finite certificate that two sequences are equivalent: adjacent steps are
// related by subsequence in the marked direction.
struct EquivalenceChain {
    enum class Direction : std::uint8_t {
        Sub,   // steps[i+1] is a subsequence of steps[i]
        Super  // steps[i+1] is a supersequence of steps[i]
    };
    std::vector<NSequence> steps;
    std::vector<Direction> directions;  // size steps.size() - 1
};

// Re-verifies a chain step by step. Chains returned by equivalent_within
// always pass; callers holding foreign chains can check them too.
inline bool verify_chain(const EquivalenceChain& chain, const NSequence& s,
                         const NSequence& t) {
    if (chain.steps.empty() || chain.directions.size() + 1 != chain.steps.size())
        return false;
    if (chain.steps.front().points() != s.points()) return false;
    if (chain.steps.back().points() != t.points()) return false;
    for (std::size_t i = 0; i + 1 < chain.steps.size(); ++i) {
        const bool ok =
            chain.directions[i] == EquivalenceChain::Direction::Sub
                ? is_subsequence(chain.steps[i + 1], chain.steps[i])
                : is_subsequence(chain.steps[i], chain.steps[i + 1]);
        if (!ok) return false;
    }
    return true;
}

namespace detail {

// Order-respecting merge search: emit every point of s and t, each sequence
// in its own order, keeping consecutive gaps within the scale. State space
// is (consumed of s, consumed of t, which side emitted last); the budget
// caps visited states. Returns the merged point list or nothing.
inline std::optional<std::vector<PointId>> merge_supersequence(const NSequence& s,
                                                               const NSequence& t,
                                                               std::size_t budget) {
    const auto& sp = s.points();
    const auto& tp = t.points();
    const auto& space = s.space();
    const double scale = s.scale();
    const std::size_t m = sp.size(), n = tp.size();

    // visited[(i * (n+1) + j) * 2 + last], last: 0 = s emitted, 1 = t emitted
    std::vector<bool> visited((m + 1) * (n + 1) * 2, false);
    struct State {
        std::uint32_t i, j;
        std::uint8_t last;
    };
    std::vector<State> stack;
    std::vector<std::int64_t> parent(visited.size(), -1);  // encoded predecessor

    auto encode = [n](std::uint32_t i, std::uint32_t j, std::uint8_t last) {
        return (static_cast<std::size_t>(i) * (n + 1) + j) * 2 + last;
    };
    auto point_of = [&](const State& st) {
        return st.last == 0 ? sp[st.i - 1] : tp[st.j - 1];
    };

    // both sequences share the basepoint, so the first emission is free
    State start{1, 0, 0};
    visited[encode(1, 0, 0)] = true;
    stack.push_back(start);
    std::size_t expanded = 0;
    std::optional<State> goal;

    while (!stack.empty() && !goal) {
        State cur = stack.back();
        stack.pop_back();
        if (++expanded > budget) return std::nullopt;
        if (cur.i == m && cur.j == n) {
            goal = cur;
            break;
        }
        const PointId here = point_of(cur);
        auto try_push = [&](std::uint32_t ni, std::uint32_t nj, std::uint8_t last,
                            PointId next) {
            const auto code = encode(ni, nj, last);
            if (visited[code]) return;
            if (!leq(space.distance(here, next), scale)) return;
            visited[code] = true;
            parent[code] = static_cast<std::int64_t>(encode(cur.i, cur.j, cur.last));
            stack.push_back({ni, nj, last});
            if (ni == m && nj == n) goal = State{ni, nj, last};
        };
        if (cur.i < m) try_push(cur.i + 1, cur.j, 0, sp[cur.i]);
        if (cur.j < n) try_push(cur.i, cur.j + 1, 1, tp[cur.j]);
    }
    if (!goal) return std::nullopt;

    std::vector<PointId> merged;
    std::int64_t code = static_cast<std::int64_t>(encode(goal->i, goal->j, goal->last));
    while (code >= 0) {
        const auto last = static_cast<std::uint8_t>(code % 2);
        const auto ij = static_cast<std::size_t>(code / 2);
        const auto i = static_cast<std::uint32_t>(ij / (n + 1));
        const auto j = static_cast<std::uint32_t>(ij % (n + 1));
        merged.push_back(last == 0 ? sp[i - 1] : tp[j - 1]);
        code = parent[static_cast<std::size_t>(code)];
    }
    std::reverse(merged.begin(), merged.end());
    return merged;
}

}  // namespace detail

// Budgeted, sound-only search for an equivalence chain between s and t:
// direct subsequence either way, else an order-respecting merge into a
// common supersequence. Empty result means "not found within budget",
// never "inequivalent".
inline std::optional<EquivalenceChain> equivalent_within(const NSequence& s,
                                                         const NSequence& t,
                                                         std::size_t budget,
                                                         double r_escape) {
    if (!s.space().same_space(t.space()))
        throw ContractError("equivalent_within: sequences live in different spaces");
    if (s.scale() != t.scale())
        throw ContractError("equivalent_within: sequences have different scales");
    if (s.basepoint() != t.basepoint())
        throw ContractError("equivalent_within: sequences have different basepoints");
    if (!escapes(s, r_escape) || !escapes(t, r_escape))
        throw ContractError("equivalent_within: both sequences must escape");

    std::optional<EquivalenceChain> found;
    if (is_subsequence(s, t)) {
        found = EquivalenceChain{{s, t}, {EquivalenceChain::Direction::Super}};
    } else if (is_subsequence(t, s)) {
        found = EquivalenceChain{{s, t}, {EquivalenceChain::Direction::Sub}};
    } else if (auto merged = detail::merge_supersequence(s, t, budget)) {
        NSequence u = make_sequence(s.space(), std::move(*merged), s.scale());
        found = EquivalenceChain{
            {s, std::move(u), t},
            {EquivalenceChain::Direction::Super, EquivalenceChain::Direction::Sub}};
    }
    if (found && !verify_chain(*found, s, t))
        throw ConsistencyError("equivalent_within: constructed chain failed re-verification");
    return found;
}

}  // namespace coarse
