#pragma once

#include <stdexcept>
#include <string>

namespace ferroconnect {

// Error taxonomy shared by the library and the CLI exit-code mapping.
struct usage_error : std::runtime_error {
    explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

struct capacity_error : std::runtime_error {
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ferroconnect
