#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace listrank {

/// Dense row-major array of 64-bit floats. Rank 1 and rank 2 cover everything
/// this engine needs. Tensors are plain values: copyable, and treated as
/// immutable once handed to a Graph.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Tensor scalar(double value) { return Tensor({1, 1}, {value}); }
    static Tensor identity(std::size_t n);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    // 2-D accessors; also usable on rank-1 tensors, which behave as one row.
    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t i) { return data_[i]; }
    double at(std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    /// Throws ShapeError-style diagnostics when a NaN/Inf slipped in.
    void require_finite(const std::string& context) const;

    double max_abs_diff(const Tensor& other) const;

    std::string shape_string() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Boolean matrix used for attention masks.
struct Mask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> allow;

    Mask() = default;
    Mask(std::size_t r, std::size_t c, bool value = false)
        : rows(r), cols(c), allow(r * c, value ? 1 : 0) {}

    bool at(std::size_t r, std::size_t c) const { return allow[r * cols + c] != 0; }
    void set(std::size_t r, std::size_t c, bool value) { allow[r * cols + c] = value ? 1 : 0; }
};

} // namespace listrank
