#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace walkcut {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (maps to the CLI usage exit code).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrc {
  io,
  bad_magic,
  unsupported_version,
  unsupported_dtype,
  truncated,
  trailing_data,
  invalid_shape,
  shape_overflow,
};

const char* to_string(FormatErrc e);

/// Failure reading or writing a tensor / label file.
class FormatError : public Error {
 public:
  FormatError(FormatErrc code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
  FormatErrc code() const noexcept { return code_; }

 private:
  FormatErrc code_;
};

enum class ManifestErrc { io, parse, duplicate_id, missing_path };

class ManifestError : public Error {
 public:
  ManifestError(ManifestErrc code, std::size_t line, const std::string& what)
      : Error("manifest line " + std::to_string(line) + ": " + what), code_(code), line_(line) {}
  ManifestErrc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ManifestErrc code_;
  std::size_t line_;
};

enum class SpectralErrc { zero_degree, non_convergence, degenerate_spectrum, not_stochastic };

class SpectralError : public Error {
 public:
  SpectralError(SpectralErrc code, const std::string& what, double residual = 0.0)
      : Error(what), code_(code), residual_(residual) {}
  SpectralErrc code() const noexcept { return code_; }
  double residual() const noexcept { return residual_; }

 private:
  SpectralErrc code_;
  double residual_;
};

/// NCut is undefined because one side of the partition has zero association.
class DegeneratePartition : public Error {
 public:
  using Error::Error;
};

}  // namespace walkcut
