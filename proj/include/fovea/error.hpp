#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fovea {

/// Base for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter struct failed validation; `field()` names the offending field.
class ParameterError : public Error {
 public:
  ParameterError(std::string field, const std::string& what)
      : Error("invalid parameter '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class EmptySuiteError : public Error {
 public:
  EmptySuiteError() : Error("scene suite must contain at least one scene") {}
};

/// Exact enumeration would exceed the configured table bound.
class SizeError : public Error {
 public:
  using Error::Error;
};

class PoolError : public Error {
 public:
  using Error::Error;
};

class MisuseError : public Error {
 public:
  using Error::Error;
};

/// Bayes update produced zero total likelihood: the observation is impossible
/// under the current belief. Treat as a model violation.
class DegenerateUpdateError : public Error {
 public:
  DegenerateUpdateError(const std::string& what, double spatial_mass, double semantic_mass,
                        double phi, int symbol)
      : Error(what),
        spatial_mass_(spatial_mass),
        semantic_mass_(semantic_mass),
        phi_(phi),
        symbol_(symbol) {}

  double spatial_mass() const noexcept { return spatial_mass_; }
  double semantic_mass() const noexcept { return semantic_mass_; }
  double phi() const noexcept { return phi_; }
  int symbol() const noexcept { return symbol_; }

 private:
  double spatial_mass_;
  double semantic_mass_;
  double phi_;
  int symbol_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace fovea
