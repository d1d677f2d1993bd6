#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace xbar {

/// A connected part of the network has no fixed-voltage node, so its
/// potential is undetermined. `component` lists its node indices.
class SingularNetworkError : public std::runtime_error {
public:
    SingularNetworkError(const std::string& what, std::vector<std::uint32_t> component)
        : std::runtime_error(what), component_(std::move(component)) {}
    const std::vector<std::uint32_t>& component() const noexcept { return component_; }

private:
    std::vector<std::uint32_t> component_;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Schema or constraint violation in a run configuration; `key` is the dotted path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace xbar
