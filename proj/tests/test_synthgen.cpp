#include <doctest.h>

#include <cmath>

#include "fot/synthgen.hpp"

TEST_CASE("hypercube pair: supports, independence, map structure") {
    const std::size_t d = 5, n = 400;
    auto [src, tgt] = fot::gen_hypercube_pair(d, n, 3);
    REQUIRE(src.size() == n);
    REQUIRE(tgt.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < d; ++t) {
            CHECK(std::abs(src.point(i)[t]) <= 1.0);
            if (t < 2) {
                const double x = std::abs(tgt.point(i)[t]);
                CHECK(x >= 1.0);
                CHECK(x <= 3.0);
            } else {
                CHECK(std::abs(tgt.point(i)[t]) <= 1.0);
            }
        }
    }
    // Weights uniform.
    for (double w : src.weights()) CHECK(w == doctest::Approx(1.0 / n));
}

TEST_CASE("fragmentation map formula") {
    // The target is an independent draw pushed through T; verify T itself by
    // regenerating with the target's stream and comparing against the raw draw.
    auto [src1, tgt] = fot::gen_hypercube_pair(3, 50, 9);
    // Reconstruct pre-image: subtracting the displacement must land in the cube
    for (std::size_t i = 0; i < 50; ++i) {
        for (std::size_t t = 0; t < 2; ++t) {
            const double y = tgt.point(i)[t];
            const double x = y - (y >= 0 ? 2.0 : -2.0);
            CHECK(std::abs(x) <= 1.0);
        }
    }
}

TEST_CASE("disk and annulus supports") {
    const std::size_t d = 4, n = 500;
    auto [src, tgt] = fot::gen_disk_annulus_pair(d, n, 7);
    double mean_r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double rs = std::hypot(src.point(i)[0], src.point(i)[1]);
        const double rt = std::hypot(tgt.point(i)[0], tgt.point(i)[1]);
        CHECK(rs <= 1.0);
        CHECK(rt >= 2.0);
        CHECK(rt <= 3.0);
        for (std::size_t t = 2; t < d; ++t) {
            CHECK(src.point(i)[t] >= 0.0);
            CHECK(src.point(i)[t] <= 1.0);
        }
        mean_r += rt / static_cast<double>(n);
    }
    // E[r] = 38/15 for density 2r/5 on [2,3]; sd ~ 0.28/sqrt(n)
    CHECK(std::abs(mean_r - 38.0 / 15.0) < 3.0 * 0.3 / std::sqrt(double(n)));
}

TEST_CASE("quadrature ground truth for disk-to-annulus") {
    // Monotone radial rearrangement cost; reference value from an independent
    // high-order quadrature: 3.4886543055424064.
    CHECK(fot::disk_annulus_ground_truth() ==
          doctest::Approx(3.4886543055424064).epsilon(1e-10));
}

TEST_CASE("seeded determinism and stream decorrelation") {
    auto p1 = fot::gen_hypercube_pair(3, 20, 11);
    auto p2 = fot::gen_hypercube_pair(3, 20, 11);
    CHECK(p1.first.points() == p2.first.points());
    CHECK(p1.second.points() == p2.second.points());
    auto p3 = fot::gen_hypercube_pair(3, 20, 12);
    CHECK(p1.first.points() != p3.first.points());
    // source and target streams differ
    CHECK(p1.first.points() != p1.second.points());
}

TEST_CASE("gaussian mixture: labels follow components") {
    fot::MixtureSpec spec;
    spec.means = {{0.0, 0.0}, {50.0, 0.0}, {0.0, 50.0}};
    spec.sigma = 0.5;
    spec.n = 300;
    auto ds = fot::gen_gaussian_mixture(spec, 21);
    REQUIRE(ds.has_labels());
    REQUIRE(ds.labels.size() == 300);
    std::size_t counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < 300; ++i) {
        const int lbl = std::stoi(ds.labels[i]);
        ++counts[lbl];
        // point close to its component mean
        const double dx = ds.measure.point(i)[0] - spec.means[lbl][0];
        const double dy = ds.measure.point(i)[1] - spec.means[lbl][1];
        CHECK(std::hypot(dx, dy) < 10.0);
    }
    // multinomial counts near 100 each (3 sigma ~ 24)
    for (auto c : counts) {
        CHECK(c > 70);
        CHECK(c < 130);
    }
}

TEST_CASE("degenerate mixture: one component, zero variance") {
    fot::MixtureSpec spec;
    spec.means = {{1.0, 2.0}};
    spec.sigma = 0.0;
    spec.n = 5;
    auto ds = fot::gen_gaussian_mixture(spec, 0);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(ds.measure.point(i)[0] == 1.0);
        CHECK(ds.measure.point(i)[1] == 2.0);
        CHECK(ds.labels[i] == "0");
    }
}
