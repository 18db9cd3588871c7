#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rabi {

/// Raised when a numerical procedure fails to converge, diverges, or
/// cannot bracket its target. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for invalid configuration (bad keys, out-of-range values,
/// unwritable outputs). Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using WarningHandler = std::function<void(std::string_view)>;

// Installs a process-wide sink for non-fatal warnings and returns the
// previous one. The default handler writes "warning: ..." to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace rabi
