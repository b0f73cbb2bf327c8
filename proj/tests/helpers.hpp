#pragma once

#include <initializer_list>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "coarse/space.hpp"

namespace coarse::testing {

// Point lookup by coordinates; fails the test if absent.
inline PointId pt(const SpaceOracle& space, std::initializer_list<double> coords) {
    auto id = space.find_point(std::vector<double>(coords));
    REQUIRE(id.has_value());
    return *id;
}

// A random N-walk of the given length starting at the basepoint: each step
// moves to a uniformly chosen point within N of the current one.
inline std::vector<PointId> random_walk(const SpaceOracle& space, double n,
                                        std::size_t length, std::mt19937& rng,
                                        double region_radius) {
    const auto region = space.ball(region_radius);
    std::vector<PointId> walk{space.basepoint()};
    for (std::size_t step = 1; step < length; ++step) {
        std::vector<PointId> options;
        for (PointId p : region)
            if (space.distance(walk.back(), p) <= n + kTol) options.push_back(p);
        std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
        walk.push_back(options[pick(rng)]);
    }
    return walk;
}

}  // namespace coarse::testing
