#pragma once

#include <stdexcept>
#include <string>

namespace listrank {

/// Tensor shape / dimension mismatch between operands.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// A caller violated an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed input file (JSON/JSONL); message carries the line number when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or inconsistent configuration (model config, checkpoint, train config).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical value outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// The finite-difference oracle hit a non-finite probe value.
class OracleError : public std::runtime_error {
public:
    explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

/// Training stopped on a non-finite loss; parameters were rolled back to the
/// last good step before this was thrown.
class TrainingAborted : public std::runtime_error {
public:
    explicit TrainingAborted(const std::string& what) : std::runtime_error(what) {}
};

} // namespace listrank
