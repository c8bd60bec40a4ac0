#pragma once

#include <cstddef>
#include <string_view>

namespace fot::kernels {

// Inner-loop arithmetic used by the cost-matrix and Sinkhorn code. Each
// kernel has a scalar reference implementation and, on x86-64, an AVX2+FMA
// variant selected once at startup. The SIMD variants must agree with the
// scalar ones to 1e-12 relative (reduction order differs); the equivalence
// tests pin that down.

enum class Backend { Scalar, Avx2 };

// Active backend; auto-detected on first use. select() overrides (tests).
Backend active_backend();
void select(Backend b);
bool avx2_supported();
std::string_view backend_name();

// out[i*nb + j] = squared Euclidean distance between a[i*d..] and b[j*d..].
void pairwise_sqdist(const double* a, std::size_t na,
                     const double* b, std::size_t nb,
                     std::size_t d, double* out);

// y = M x, M is r x c row-major.
void matvec(const double* m, std::size_t r, std::size_t c,
            const double* x, double* y);

// y = M^T x.
void matvec_t(const double* m, std::size_t r, std::size_t c,
              const double* x, double* y);

double dot(const double* a, const double* b, std::size_t n);

// out[i] = exp(-in[i] * inv_eps). Scalar libm on every backend so that
// results are identical across dispatch choices.
void exp_neg_scale(const double* in, std::size_t n, double inv_eps, double* out);

namespace scalar {
void pairwise_sqdist(const double* a, std::size_t na, const double* b,
                     std::size_t nb, std::size_t d, double* out);
void matvec(const double* m, std::size_t r, std::size_t c, const double* x, double* y);
void matvec_t(const double* m, std::size_t r, std::size_t c, const double* x, double* y);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(FOT_HAVE_AVX2_BUILD)
namespace avx2 {
void pairwise_sqdist(const double* a, std::size_t na, const double* b,
                     std::size_t nb, std::size_t d, double* out);
void matvec(const double* m, std::size_t r, std::size_t c, const double* x, double* y);
void matvec_t(const double* m, std::size_t r, std::size_t c, const double* x, double* y);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace fot::kernels
