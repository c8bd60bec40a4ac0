#include "fot/kernels.hpp"

#include <cmath>

namespace fot::kernels {

namespace scalar {

void pairwise_sqdist(const double* a, std::size_t na, const double* b,
                     std::size_t nb, std::size_t d, double* out) {
    for (std::size_t i = 0; i < na; ++i) {
        const double* ai = a + i * d;
        for (std::size_t j = 0; j < nb; ++j) {
            const double* bj = b + j * d;
            double s = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = ai[t] - bj[t];
                s += diff * diff;
            }
            out[i * nb + j] = s;
        }
    }
}

void matvec(const double* m, std::size_t r, std::size_t c, const double* x, double* y) {
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = m + i * c;
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_t(const double* m, std::size_t r, std::size_t c, const double* x, double* y) {
    for (std::size_t j = 0; j < c; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = m + i * c;
        const double xi = x[i];
        for (std::size_t j = 0; j < c; ++j) y[j] += row[j] * xi;
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace scalar

namespace {

struct Table {
    void (*pairwise_sqdist)(const double*, std::size_t, const double*, std::size_t,
                            std::size_t, double*);
    void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*matvec_t)(const double*, std::size_t, std::size_t, const double*, double*);
    double (*dot)(const double*, const double*, std::size_t);
};

constexpr Table kScalar{scalar::pairwise_sqdist, scalar::matvec, scalar::matvec_t,
                        scalar::dot};
#if defined(FOT_HAVE_AVX2_BUILD)
constexpr Table kAvx2{avx2::pairwise_sqdist, avx2::matvec, avx2::matvec_t, avx2::dot};
#endif

Backend g_backend = [] {
#if defined(FOT_HAVE_AVX2_BUILD)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return Backend::Avx2;
#endif
    return Backend::Scalar;
}();

const Table& table() {
#if defined(FOT_HAVE_AVX2_BUILD)
    if (g_backend == Backend::Avx2) return kAvx2;
#endif
    return kScalar;
}

}  // namespace

Backend active_backend() { return g_backend; }

void select(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported()) return;
    g_backend = b;
}

bool avx2_supported() {
#if defined(FOT_HAVE_AVX2_BUILD)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::string_view backend_name() {
    return g_backend == Backend::Avx2 ? "avx2" : "scalar";
}

void pairwise_sqdist(const double* a, std::size_t na, const double* b,
                     std::size_t nb, std::size_t d, double* out) {
    table().pairwise_sqdist(a, na, b, nb, d, out);
}

void matvec(const double* m, std::size_t r, std::size_t c, const double* x, double* y) {
    table().matvec(m, r, c, x, y);
}

void matvec_t(const double* m, std::size_t r, std::size_t c, const double* x, double* y) {
    table().matvec_t(m, r, c, x, y);
}

double dot(const double* a, const double* b, std::size_t n) {
    return table().dot(a, b, n);
}

void exp_neg_scale(const double* in, std::size_t n, double inv_eps, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(-in[i] * inv_eps);
}

}  // namespace fot::kernels
