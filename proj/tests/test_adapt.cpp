#include <doctest.h>

#include <cmath>

#include "fot/adapt.hpp"
#include "fot/synthgen.hpp"

namespace {

fot::LabeledDataset mixture(double shift, std::uint64_t seed, std::size_t n = 60,
                            double sigma = 0.1) {
    fot::MixtureSpec spec;
    spec.means = {{0.0 + shift, 0.0}, {10.0 + shift, 0.0}};
    spec.sigma = sigma;
    spec.n = n;
    spec.labels = {"a", "b"};
    return fot::gen_gaussian_mixture(spec, seed);
}

}  // namespace

TEST_CASE("nn_only on identical labeled data is perfect") {
    auto ds = mixture(0.0, 1);
    fot::AdaptParams params;
    params.knn_k = 5;
    auto res = fot::adapt_labels(ds, ds, fot::AdaptMethod::NnOnly, params);
    REQUIRE(res.error_rate.has_value());
    CHECK(*res.error_rate == 0.0);
}

TEST_CASE("fot recovers labels across a constant shift") {
    auto src = mixture(0.0, 2);
    auto tgt = mixture(10.0, 3);  // shift 10, separation 10, sigma 0.1
    fot::AdaptParams params;
    params.fot.k = 2;
    params.fot.seed = 4;
    params.knn_k = 20;
    auto res = fot::adapt_labels(src, tgt, fot::AdaptMethod::Fot, params);
    REQUIRE(res.error_rate.has_value());
    CHECK(*res.error_rate == 0.0);
}

TEST_CASE("plan-based baselines run and score") {
    auto src = mixture(0.0, 5, 30);
    auto tgt = mixture(1.0, 6, 30);
    fot::AdaptParams params;
    params.fot.k = 2;
    params.knn_k = 10;
    params.sinkhorn.epsilon = 1.0;
    for (auto m : {fot::AdaptMethod::Ot, fot::AdaptMethod::Sinkhorn,
                   fot::AdaptMethod::Kot}) {
        auto res = fot::adapt_labels(src, tgt, m, params);
        REQUIRE(res.error_rate.has_value());
        CHECK(*res.error_rate <= 0.2);
    }
}

TEST_CASE("error_rate equals mismatches over n") {
    auto src = mixture(0.0, 7, 40);
    auto tgt = mixture(0.0, 8, 40);
    fot::AdaptParams params;
    params.knn_k = 3;
    auto res = fot::adapt_labels(src, tgt, fot::AdaptMethod::NnOnly, params);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < 40; ++i)
        if (res.predicted_labels[i] != src.labels[i]) ++wrong;
    CHECK(*res.error_rate == doctest::Approx(wrong / 40.0));
}

TEST_CASE("predictions invariant under rigid translation of both sets") {
    auto src = mixture(0.0, 9, 40);
    auto tgt = mixture(2.0, 10, 40);
    auto translate = [](const fot::LabeledDataset& ds, double v) {
        std::vector<double> pts = ds.measure.points();
        for (double& x : pts) x += v;
        return fot::LabeledDataset{
            fot::DiscreteMeasure(pts, ds.measure.weights(), ds.measure.dim()),
            ds.labels};
    };
    fot::AdaptParams params;
    params.knn_k = 7;
    auto r1 = fot::adapt_labels(src, tgt, fot::AdaptMethod::NnOnly, params);
    auto r2 = fot::adapt_labels(translate(src, 5.0), translate(tgt, 5.0),
                                fot::AdaptMethod::NnOnly, params);
    CHECK(r1.predicted_labels == r2.predicted_labels);
}

TEST_CASE("knn tie resolved by cumulative distance then label order") {
    // Target: two points labeled "b" at distance 1, two labeled "a" at
    // distances 1 and 2. With k=4 the vote ties 2-2; "b" is closer in sum.
    fot::LabeledDataset target{
        fot::DiscreteMeasure::uniform({1.0, -1.0, 2.0, -1.0}, 1),
        {"b", "b", "a", "a"}};
    fot::LabeledDataset source{fot::DiscreteMeasure::uniform({0.0}, 1), {}};
    fot::AdaptParams params;
    params.knn_k = 4;
    auto res = fot::adapt_labels(source, target, fot::AdaptMethod::NnOnly, params);
    CHECK(res.predicted_labels[0] == "b");
    CHECK_FALSE(res.error_rate.has_value());

    // Fully symmetric tie: lexicographically smaller label wins.
    fot::LabeledDataset target2{
        fot::DiscreteMeasure::uniform({1.0, -1.0}, 1), {"b", "a"}};
    params.knn_k = 2;
    auto res2 = fot::adapt_labels(source, target2, fot::AdaptMethod::NnOnly, params);
    CHECK(res2.predicted_labels[0] == "a");
}

TEST_CASE("error paths") {
    auto src = mixture(0.0, 11, 10);
    fot::LabeledDataset unlabeled{src.measure, {}};
    fot::AdaptParams params;
    CHECK_THROWS(fot::adapt_labels(src, unlabeled, fot::AdaptMethod::NnOnly, params));
    params.knn_k = 11;  // > n1
    CHECK_THROWS(fot::adapt_labels(src, src, fot::AdaptMethod::NnOnly, params));
}
