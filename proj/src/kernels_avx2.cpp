// AVX2 lane. Compiled with -mavx2 and only dispatched to after a runtime
// cpuid check. Every kernel keeps the scalar lane's per-element accumulation
// order and uses mul+add rather than FMA, so results are bit-identical to the
// reference lane.

#include "listrank/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define LISTRANK_HAVE_AVX2_BUILD 1
#include <immintrin.h>

#include <cstring>
#endif

namespace listrank::kernels {

#if LISTRANK_HAVE_AVX2_BUILD

namespace {

void gemm_kernel_avx2(std::size_t m, std::size_t k, std::size_t n,
                      const double* a, const double* b, double* c) {
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a[i * k + kk];
            const double* brow = b + kk * n;
            const __m256d va = _mm256_set1_pd(aik);
            std::size_t j = 0;
            for (; j < n4; j += 4) {
                const __m256d vb = _mm256_loadu_pd(brow + j);
                const __m256d vc = _mm256_loadu_pd(crow + j);
                _mm256_storeu_pd(crow + j, _mm256_add_pd(vc, _mm256_mul_pd(va, vb)));
            }
            for (; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void gemm_nn_avx2(std::size_t m, std::size_t k, std::size_t n,
                  const double* a, const double* b, double* c) {
    std::memset(c, 0, m * n * sizeof(double));
    gemm_kernel_avx2(m, k, n, a, b, c);
}

void gemm_acc_nn_avx2(std::size_t m, std::size_t k, std::size_t n,
                      const double* a, const double* b, double* c) {
    gemm_kernel_avx2(m, k, n, a, b, c);
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] + b[i];
    }
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] - b[i];
    }
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

void scale_avx2(const double* a, double s, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
    }
    for (; i < n; ++i) {
        out[i] = a[i] * s;
    }
}

void axpy_avx2(double s, const double* x, double* y, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(vs, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) {
        y[i] += s * x[i];
    }
}

const Backend kAvx2 = {
    "avx2",    gemm_nn_avx2, gemm_acc_nn_avx2, add_avx2,
    sub_avx2,  mul_avx2,     scale_avx2,       axpy_avx2,
};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

} // namespace

const Backend* avx2_backend() {
    static const Backend* backend = cpu_has_avx2() ? &kAvx2 : nullptr;
    return backend;
}

#else // !LISTRANK_HAVE_AVX2_BUILD

const Backend* avx2_backend() { return nullptr; }

#endif

} // namespace listrank::kernels
