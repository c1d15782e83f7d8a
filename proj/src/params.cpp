#include "listrank/params.hpp"

#include <cmath>

#include "listrank/error.hpp"

namespace listrank {

std::size_t ParamStore::add(std::string name, Tensor value) {
    if (index_.count(name) != 0) {
        throw ConfigError("duplicate parameter name: " + name);
    }
    index_.emplace(name, names_.size());
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return names_.size() - 1;
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw ConfigError("unknown parameter name: " + name);
    }
    return values_[it->second];
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw ConfigError("unknown parameter name: " + name);
    }
    return values_[it->second];
}

std::size_t ParamStore::total_scalars() const {
    std::size_t n = 0;
    for (const Tensor& t : values_) {
        n += t.size();
    }
    return n;
}

bool ParamStore::same_layout(const ParamStore& other) const {
    if (names_ != other.names_) {
        return false;
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!values_[i].same_shape(other.values_[i])) {
            return false;
        }
    }
    return true;
}

ParamStore finite_diff_grad(const ScalarFn& f, const ParamStore& params, double h) {
    ParamStore grads;
    ParamStore probe;
    for (std::size_t i = 0; i < params.size(); ++i) {
        grads.add(params.name(i), Tensor::zeros(params.tensor(i).shape()));
        probe.add(params.name(i), params.tensor(i));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& t = probe.tensor(i);
        for (std::size_t j = 0; j < t.size(); ++j) {
            const double saved = t.at(j);
            t.at(j) = saved + h;
            const double up = f(probe);
            t.at(j) = saved - h;
            const double down = f(probe);
            t.at(j) = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw OracleError("finite_diff_grad: non-finite value at probe of " +
                                  params.name(i) + "[" + std::to_string(j) + "]");
            }
            grads.tensor(i).at(j) = (up - down) / (2.0 * h);
        }
    }
    return grads;
}

double relative_error(double a, double b, double floor) {
    const double denom = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / denom;
}

} // namespace listrank
