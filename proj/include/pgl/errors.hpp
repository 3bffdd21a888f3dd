#pragma once

#include <stdexcept>
#include <string>

namespace pgl {

// Invalid or contradictory configuration / arguments. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A runtime budget (enumeration size, permanent count) was exceeded. Exit code 3.
struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ConfigError(what);
}

}  // namespace pgl
