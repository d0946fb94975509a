#pragma once

#include <stdexcept>
#include <string>

namespace ranplan {

// Malformed input files (scene, scenario, CSV). Carries enough context to
// point the user at the offending line or field.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that violates a domain invariant or precondition.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ranplan
