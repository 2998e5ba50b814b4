// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace avguard {

// Process exit codes; library exceptions carry the code they map to.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kContainer = 3,
  kCapacity = 4,
  kModelMismatch = 5,
  kNumeric = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ExitCode::kConfig, m) {}
};

// Malformed or inconsistent on-disk artifacts (containers, sidecars, layouts).
struct ContainerError : Error {
  explicit ContainerError(const std::string& m) : Error(ExitCode::kContainer, m) {}
};

struct LayoutError : Error {
  explicit LayoutError(const std::string& m) : Error(ExitCode::kContainer, m) {}
};

struct CapacityError : Error {
  explicit CapacityError(const std::string& m) : Error(ExitCode::kCapacity, m) {}
};

struct ModelMismatchError : Error {
  explicit ModelMismatchError(const std::string& m)
      : Error(ExitCode::kModelMismatch, m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ExitCode::kNumeric, m) {}
};

// Shape/size misuse of library calls; surfaces as a config failure at the CLI.
struct DimensionError : Error {
  explicit DimensionError(const std::string& m) : Error(ExitCode::kConfig, m) {}
};

}  // namespace avguard
