#pragma once

#include <cstddef>
#include <string_view>

namespace listrank::kernels {

// Inner-loop kernels behind the tensor ops. Two lanes: a scalar reference and
// an AVX2 variant picked at runtime. Both lanes accumulate every output
// element in the same order and avoid FMA contraction, so they are bit-exact
// with each other; the equivalence tests assert exact equality, and switching
// lanes never changes a single result bit.
struct Backend {
    const char* name;

    // c = a * b, a is m x k, b is k x n, all row-major.
    void (*gemm_nn)(std::size_t m, std::size_t k, std::size_t n,
                    const double* a, const double* b, double* c);
    // c += a * b
    void (*gemm_acc_nn)(std::size_t m, std::size_t k, std::size_t n,
                        const double* a, const double* b, double* c);

    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    void (*scale)(const double* a, double s, double* out, std::size_t n);
    void (*axpy)(double s, const double* x, double* y, std::size_t n); // y += s*x
};

const Backend& scalar_backend();

/// AVX2 lane, or nullptr when the build target or the running CPU lacks AVX2.
const Backend* avx2_backend();

/// Lane in use. Selected once: LISTRANK_KERNELS=scalar|avx2|auto if set,
/// otherwise the best lane the CPU supports.
const Backend& active();

/// Override the active lane ("scalar", "avx2", "auto"). Returns false when the
/// requested lane is unavailable. Intended for tests and benchmarks.
bool select(std::string_view name);

} // namespace listrank::kernels
