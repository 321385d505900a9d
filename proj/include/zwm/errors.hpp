#pragma once

#include <stdexcept>
#include <string>

namespace zwm {

/// Invalid configuration: unknown mode, mismatched registries, bad parameters.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The truncated space is too small (or too large) for the requested computation.
class SizingError : public std::runtime_error {
 public:
  explicit SizingError(const std::string& what) : std::runtime_error(what) {}
};

/// Norm discarded by cutoffs exceeded the configured bound.
class TruncationError : public SizingError {
 public:
  explicit TruncationError(const std::string& what) : SizingError(what) {}
};

}  // namespace zwm
