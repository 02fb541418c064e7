#pragma once

#include <stdexcept>
#include <string>

namespace ergctl {

struct InvalidParameter : std::runtime_error {
    explicit InvalidParameter(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct SchemeMismatch : std::runtime_error {
    explicit SchemeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : std::runtime_error {
    NoConvergence(int iters, double last_delta)
        : std::runtime_error("solver did not converge after " + std::to_string(iters) +
                             " iterations (last delta " + std::to_string(last_delta) + ")"),
          iters(iters), last_delta(last_delta) {}
    int iters;
    double last_delta;
};

struct DiagonalSignError : std::runtime_error {
    explicit DiagonalSignError(const std::string& what) : std::runtime_error(what) {}
};

struct AlphaOutsideGap : std::runtime_error {
    explicit AlphaOutsideGap(const std::string& what) : std::runtime_error(what) {}
};

struct DomainTooSmall : std::runtime_error {
    explicit DomainTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct BandCollapse : std::runtime_error {
    explicit BandCollapse(const std::string& what) : std::runtime_error(what) {}
};

struct FilterEscape : std::runtime_error {
    explicit FilterEscape(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

struct MissingArtifact : std::runtime_error {
    explicit MissingArtifact(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ergctl
