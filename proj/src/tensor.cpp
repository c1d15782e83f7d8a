#include "listrank/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "listrank/error.hpp"

namespace listrank {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t s : shape) {
        if (s == 0) {
            throw ShapeError("tensor shape has a zero extent");
        }
        n *= s;
    }
    return n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
    if (shape_.empty() || shape_.size() > 2) {
        throw ShapeError("tensor rank must be 1 or 2, got " + std::to_string(shape_.size()));
    }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.empty() || shape_.size() > 2) {
        throw ShapeError("tensor rank must be 1 or 2, got " + std::to_string(shape_.size()));
    }
    if (data_.size() != shape_product(shape_)) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
    }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& x : t.data_) {
        x = value;
    }
    return t;
}

Tensor Tensor::vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        t.at(i, i) = 1.0;
    }
    return t;
}

std::size_t Tensor::rows() const {
    return shape_.size() == 2 ? shape_[0] : 1;
}

std::size_t Tensor::cols() const {
    return shape_.size() == 2 ? shape_[1] : shape_[0];
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

void Tensor::require_finite(const std::string& context) const {
    if (!all_finite()) {
        throw DomainError(context + ": non-finite value in tensor of shape " + shape_string());
    }
}

double Tensor::max_abs_diff(const Tensor& other) const {
    if (!same_shape(other)) {
        throw ShapeError("max_abs_diff: shape " + shape_string() + " vs " + other.shape_string());
    }
    double m = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        m = std::max(m, std::abs(data_[i] - other.data_[i]));
    }
    return m;
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        os << (i ? "x" : "") << shape_[i];
    }
    os << "]";
    return os.str();
}

} // namespace listrank
