#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ptopofl/persistence.hpp"
#include "ptopofl/wasserstein.hpp"
#include "oracles.hpp"

using namespace ptopofl;

namespace {

PersistenceDiagram random_diagram(Rng& rng, int max_points, int dim) {
    PersistenceDiagram d;
    const int m = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_points) + 1));
    for (int i = 0; i < m; ++i) {
        const double birth = rng.uniform(0.0, 2.0);
        d.pairs.push_back({birth, birth + rng.uniform(0.0, 2.0), dim});
    }
    return d;
}

} // namespace

TEST_CASE("wasserstein_distance trivial cases") {
    Rng rng(1);
    const auto d = random_diagram(rng, 4, 0);
    CHECK(wasserstein_distance(d, d, 0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));

    PersistenceDiagram single, empty;
    single.pairs.push_back({0.0, 2.0, 0});
    CHECK(wasserstein_distance(single, empty, 0, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(wasserstein_distance(empty, single, 0, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(wasserstein_distance(empty, empty, 0, 2.0) == 0.0);
    CHECK_THROWS_AS(wasserstein_distance(single, empty, 0, 0.5), input_error);

    // essential pairs are excluded from the matching
    PersistenceDiagram with_inf = single;
    with_inf.pairs.push_back({0.0, kInfDeath, 0});
    CHECK(wasserstein_distance(with_inf, single, 0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("wasserstein_distance equals brute-force matching") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_diagram(rng, 4, 0);
        const auto b = random_diagram(rng, 4, 0);
        const double p = trial % 2 == 0 ? 2.0 : 1.0;
        const double solver = wasserstein_distance(a, b, 0, p);
        const double brute = oracles::brute_force_wasserstein(a, b, 0, p);
        CHECK(solver == doctest::Approx(brute).epsilon(1e-10));
    }
}

TEST_CASE("wasserstein_distance metric axioms on sampled triples") {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const auto a = random_diagram(rng, 5, 1);
        const auto b = random_diagram(rng, 5, 1);
        const auto c = random_diagram(rng, 5, 1);
        const double ab = wasserstein_distance(a, b, 1, 2.0);
        const double ba = wasserstein_distance(b, a, 1, 2.0);
        const double ac = wasserstein_distance(a, c, 1, 2.0);
        const double cb = wasserstein_distance(c, b, 1, 2.0);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-10));
        CHECK(ab >= 0.0);
        CHECK(wasserstein_distance(a, a, 1, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(ab <= ac + cb + 1e-9);
    }
}

TEST_CASE("solve_assignment on a known matrix") {
    // row i -> column (i+1) mod 3 is optimal (total 3), greedy diagonal costs 30
    std::vector<std::vector<double>> cost = {{10, 1, 20}, {20, 10, 1}, {1, 20, 10}};
    CHECK(solve_assignment(cost) == doctest::Approx(3.0));
    CHECK(solve_assignment({}) == 0.0);
}
