#include "listrank/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace listrank::kernels {

namespace {

// Reference lane. Loop order (i, kk, j) matches the AVX2 lane so that every
// output element sees the identical accumulation sequence.
void gemm_nn_scalar(std::size_t m, std::size_t k, std::size_t n,
                    const double* a, const double* b, double* c) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a[i * k + kk];
            const double* brow = b + kk * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void gemm_acc_nn_scalar(std::size_t m, std::size_t k, std::size_t n,
                        const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a[i * k + kk];
            const double* brow = b + kk * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] + b[i];
    }
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] - b[i];
    }
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

void scale_scalar(const double* a, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] * s;
    }
}

void axpy_scalar(double s, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += s * x[i];
    }
}

const Backend kScalar = {
    "scalar",        gemm_nn_scalar, gemm_acc_nn_scalar, add_scalar,
    sub_scalar,      mul_scalar,     scale_scalar,       axpy_scalar,
};

const Backend* pick_default() {
    if (const char* env = std::getenv("LISTRANK_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) {
            return &kScalar;
        }
        if (std::strcmp(env, "avx2") == 0 && avx2_backend() != nullptr) {
            return avx2_backend();
        }
        // "auto" or unknown value falls through to detection.
    }
    if (const Backend* avx2 = avx2_backend()) {
        return avx2;
    }
    return &kScalar;
}

const Backend*& active_slot() {
    static const Backend* backend = pick_default();
    return backend;
}

} // namespace

const Backend& scalar_backend() { return kScalar; }

const Backend& active() { return *active_slot(); }

bool select(std::string_view name) {
    if (name == "scalar") {
        active_slot() = &kScalar;
        return true;
    }
    if (name == "avx2") {
        if (const Backend* avx2 = avx2_backend()) {
            active_slot() = avx2;
            return true;
        }
        return false;
    }
    if (name == "auto") {
        active_slot() = avx2_backend() ? avx2_backend() : &kScalar;
        return true;
    }
    return false;
}

} // namespace listrank::kernels
