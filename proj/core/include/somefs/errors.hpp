#pragma once

#include <stdexcept>
#include <string>

namespace somefs {

/// A problem with user-supplied data (files, CSV cells, shapes).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A problem with configuration or arguments.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace somefs
