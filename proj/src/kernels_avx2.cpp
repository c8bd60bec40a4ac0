#include <immintrin.h>

#include "fot/kernels.hpp"

namespace fot::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

void pairwise_sqdist(const double* a, std::size_t na, const double* b,
                     std::size_t nb, std::size_t d, double* out) {
    const std::size_t d4 = d & ~std::size_t{3};
    for (std::size_t i = 0; i < na; ++i) {
        const double* ai = a + i * d;
        for (std::size_t j = 0; j < nb; ++j) {
            const double* bj = b + j * d;
            __m256d acc = _mm256_setzero_pd();
            std::size_t t = 0;
            for (; t < d4; t += 4) {
                __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(ai + t),
                                             _mm256_loadu_pd(bj + t));
                acc = _mm256_fmadd_pd(diff, diff, acc);
            }
            double s = hsum(acc);
            for (; t < d; ++t) {
                const double diff = ai[t] - bj[t];
                s += diff * diff;
            }
            out[i * nb + j] = s;
        }
    }
}

void matvec(const double* m, std::size_t r, std::size_t c, const double* x, double* y) {
    const std::size_t c4 = c & ~std::size_t{3};
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = m + i * c;
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j < c4; j += 4)
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc);
        double s = hsum(acc);
        for (; j < c; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_t(const double* m, std::size_t r, std::size_t c, const double* x, double* y) {
    const std::size_t c4 = c & ~std::size_t{3};
    for (std::size_t j = 0; j < c; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = m + i * c;
        const __m256d xi = _mm256_set1_pd(x[i]);
        std::size_t j = 0;
        for (; j < c4; j += 4) {
            __m256d acc = _mm256_loadu_pd(y + j);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), xi, acc);
            _mm256_storeu_pd(y + j, acc);
        }
        for (; j < c; ++j) y[j] += row[j] * x[i];
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n4; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace fot::kernels::avx2
