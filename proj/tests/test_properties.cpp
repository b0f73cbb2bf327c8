#include <catch2/catch_amalgamated.hpp>

#include "property_suites.hpp"

using coarse::suites::SuiteResult;

namespace {

void require_clean(const SuiteResult& result) {
    INFO(result.name << ": " << result.first_failure);
    CHECK(result.cases >= 100);
    CHECK(result.failures == 0);
}

}  // namespace

TEST_CASE("seeded property suites run clean") {
    for (const auto& result : coarse::suites::run_all(20260810u)) require_clean(result);
}

TEST_CASE("property suites are seed-stable") {
    // same seed, same verdicts and case counts
    auto first = coarse::suites::coarsening_monotonicity(7u, 20);
    auto second = coarse::suites::coarsening_monotonicity(7u, 20);
    CHECK(first.cases == second.cases);
    CHECK(first.failures == second.failures);
}
