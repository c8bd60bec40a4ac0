#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "fot/exact_ot.hpp"
#include "fot/rng.hpp"

using fot::DiscreteMeasure;

namespace {

DiscreteMeasure random_cloud(fot::Rng& rng, std::size_t n, std::size_t d) {
    std::vector<double> pts(n * d);
    for (double& x : pts) x = rng.uniform(-1.0, 1.0);
    return DiscreteMeasure::uniform(std::move(pts), d);
}

// Independent oracle: minimum over all n! permutation matchings.
double brute_force_uniform(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    const auto cost = fot::squared_cost_matrix(a, b);
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) s += cost(i, perm[i]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("identical clouds have zero cost") {
    fot::Rng rng(1);
    auto a = random_cloud(rng, 6, 3);
    auto sol = fot::solve_exact(a, a);
    CHECK(sol.cost == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fot::validate_plan(sol.plan).passes(1e-9));
}

TEST_CASE("two diracs") {
    auto a = DiscreteMeasure::uniform({0.0, 0.0}, 2);
    auto b = DiscreteMeasure::uniform({2.0, 0.0}, 2);
    CHECK(fot::solve_exact(a, b).cost == doctest::Approx(4.0));
}

TEST_CASE("matches permutation enumeration on random 5-point instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        fot::Rng rng(seed + 100);
        auto a = random_cloud(rng, 5, 3);
        auto b = random_cloud(rng, 5, 3);
        const double oracle = brute_force_uniform(a, b);
        auto sol = fot::solve_exact(a, b);
        CHECK(sol.cost == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(fot::validate_plan(sol.plan).passes(1e-9));
        // plan cost consistent with the reported objective
        const auto c = fot::squared_cost_matrix(a, b);
        double recomputed = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i)
            recomputed += sol.plan.matrix.data()[i] * c.data()[i];
        CHECK(recomputed == doctest::Approx(sol.cost).epsilon(1e-9));
    }
}

TEST_CASE("unequal sample sizes are supported") {
    fot::Rng rng(42);
    auto a = random_cloud(rng, 4, 2);
    auto b = random_cloud(rng, 7, 2);
    auto sol = fot::solve_exact(a, b);
    CHECK(fot::validate_plan(sol.plan).passes(1e-9));
    CHECK(sol.cost >= 0.0);
}

TEST_CASE("translation invariance and scale equivariance") {
    fot::Rng rng(9);
    auto a = random_cloud(rng, 8, 3);
    auto b = random_cloud(rng, 8, 3);
    const double base = fot::solve_exact(a, b).cost;

    std::vector<double> ap = a.points(), bp = b.points();
    for (std::size_t i = 0; i < ap.size(); ++i) ap[i] += 3.25;
    for (std::size_t i = 0; i < bp.size(); ++i) bp[i] += 3.25;
    const double shifted =
        fot::solve_exact(DiscreteMeasure::uniform(ap, 3), DiscreteMeasure::uniform(bp, 3))
            .cost;
    CHECK(shifted == doctest::Approx(base).epsilon(1e-9));

    ap = a.points();
    bp = b.points();
    for (double& x : ap) x *= 2.5;
    for (double& x : bp) x *= 2.5;
    const double scaled =
        fot::solve_exact(DiscreteMeasure::uniform(ap, 3), DiscreteMeasure::uniform(bp, 3))
            .cost;
    CHECK(scaled == doctest::Approx(base * 2.5 * 2.5).epsilon(1e-9));
}

TEST_CASE("solve_assignment agrees with solve_exact and is a permutation") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        fot::Rng rng(seed + 500);
        auto a = random_cloud(rng, 6, 2);
        auto b = random_cloud(rng, 6, 2);
        auto exact = fot::solve_exact(a, b);
        auto assign = fot::solve_assignment(a, b);
        CHECK(assign.cost == doctest::Approx(exact.cost).epsilon(1e-9));
        std::size_t nonzero = 0;
        for (std::size_t i = 0; i < 36; ++i) {
            const double v = assign.plan.matrix.data()[i];
            if (v != 0.0) {
                ++nonzero;
                CHECK(v == doctest::Approx(1.0 / 6).epsilon(1e-12));
            }
        }
        CHECK(nonzero == 6);
    }
}

TEST_CASE("assignment on a translated cloud is the identity permutation") {
    fot::Rng rng(77);
    auto a = random_cloud(rng, 10, 3);
    std::vector<double> shifted = a.points();
    for (std::size_t i = 0; i < shifted.size(); i += 3) shifted[i] += 4.0;
    auto b = DiscreteMeasure::uniform(shifted, 3);
    auto sol = fot::solve_assignment(a, b);
    CHECK(sol.cost == doctest::Approx(16.0).epsilon(1e-9));
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(sol.plan.matrix(i, i) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("assignment preconditions") {
    fot::Rng rng(5);
    auto a = random_cloud(rng, 4, 2);
    auto b = random_cloud(rng, 5, 2);
    CHECK_THROWS(fot::solve_assignment(a, b));
    DiscreteMeasure c({0.0, 0.0, 1.0, 1.0}, {0.3, 0.7}, 2);
    CHECK_THROWS(fot::solve_assignment(c, c));
}

TEST_CASE("size cap raises capacity error") {
    fot::Rng rng(6);
    auto a = random_cloud(rng, 10, 2);
    auto b = random_cloud(rng, 10, 2);
    CHECK_THROWS_AS(fot::solve_exact(a, b, 50), fot::CapacityError);
}
