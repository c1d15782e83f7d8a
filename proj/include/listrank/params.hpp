#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "listrank/tensor.hpp"

namespace listrank {

/// Ordered, named collection of parameter tensors. Order is the registration
/// order, which fixes both the RNG draw sequence at init time and the scalar
/// indexing used by the finite-difference oracle.
class ParamStore {
public:
    std::size_t add(std::string name, Tensor value);

    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_[i]; }
    Tensor& tensor(std::size_t i) { return values_[i]; }
    const Tensor& tensor(std::size_t i) const { return values_[i]; }

    std::size_t total_scalars() const;

    bool same_layout(const ParamStore& other) const;

private:
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Scalar function of a parameter store, as seen by the gradient-check oracle.
using ScalarFn = std::function<double(const ParamStore&)>;

/// Central-difference gradient estimate, (f(p+h) - f(p-h)) / (2h) per scalar.
/// Throws OracleError when f is non-finite at any probe point.
ParamStore finite_diff_grad(const ScalarFn& f, const ParamStore& params, double h = 1e-5);

/// Relative error with denominator max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-8);

} // namespace listrank
