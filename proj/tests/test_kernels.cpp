#include <doctest.h>

#include <cmath>
#include <vector>

#include "fot/kernels.hpp"
#include "fot/rng.hpp"

namespace k = fot::kernels;

namespace {

std::vector<double> random_vec(fot::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("scalar pairwise_sqdist matches double-loop recomputation") {
    fot::Rng rng(7);
    const std::size_t na = 5, nb = 7, d = 3;
    auto a = random_vec(rng, na * d);
    auto b = random_vec(rng, nb * d);
    std::vector<double> out(na * nb);
    k::scalar::pairwise_sqdist(a.data(), na, b.data(), nb, d, out.data());
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = a[i * d + t] - b[j * d + t];
                s += diff * diff;
            }
            CHECK(out[i * nb + j] == doctest::Approx(s).epsilon(1e-14));
        }
}

TEST_CASE("avx2 kernels agree with scalar reference") {
    if (!k::avx2_supported()) {
        MESSAGE("AVX2 not available; skipping equivalence checks");
        return;
    }
    fot::Rng rng(11);
    // Sizes straddle the vector width to exercise remainders.
    for (std::size_t d : {1u, 3u, 4u, 7u, 16u, 30u}) {
        const std::size_t na = 9, nb = 13;
        auto a = random_vec(rng, na * d);
        auto b = random_vec(rng, nb * d);
        std::vector<double> s_out(na * nb), v_out(na * nb);
        k::select(k::Backend::Scalar);
        k::pairwise_sqdist(a.data(), na, b.data(), nb, d, s_out.data());
        k::select(k::Backend::Avx2);
        k::pairwise_sqdist(a.data(), na, b.data(), nb, d, v_out.data());
        check_close(s_out, v_out);
    }
    for (std::size_t c : {1u, 5u, 8u, 17u}) {
        const std::size_t r = 6;
        auto m = random_vec(rng, r * c);
        auto x = random_vec(rng, c);
        auto y = random_vec(rng, r);
        std::vector<double> s1(r), v1(r), s2(c), v2(c);
        k::select(k::Backend::Scalar);
        k::matvec(m.data(), r, c, x.data(), s1.data());
        k::matvec_t(m.data(), r, c, y.data(), s2.data());
        const double sd = k::dot(x.data(), x.data(), c);
        k::select(k::Backend::Avx2);
        k::matvec(m.data(), r, c, x.data(), v1.data());
        k::matvec_t(m.data(), r, c, y.data(), v2.data());
        const double vd = k::dot(x.data(), x.data(), c);
        check_close(s1, v1);
        check_close(s2, v2);
        CHECK(sd == doctest::Approx(vd).epsilon(1e-12));
    }
    k::select(k::avx2_supported() ? k::Backend::Avx2 : k::Backend::Scalar);
}

TEST_CASE("exp_neg_scale is the elementwise Gibbs transform") {
    std::vector<double> in{0.0, 4.0, 1.0};
    std::vector<double> out(3);
    k::exp_neg_scale(in.data(), 3, 1.0, out.data());
    CHECK(out[0] == 1.0);
    CHECK(out[1] == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
    CHECK(out[2] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}
