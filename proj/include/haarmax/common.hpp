#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace haarmax {

using Index = Eigen::Index;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class FieldKind { Real, Complex };

// Bad user input (dimensions, thresholds, malformed config values).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Config-file level problem; carries the offending key path so the CLI can
// point at it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Numerical breakdown (Gram-Schmidt hit a near-zero pivot). Carries the
// replica index when raised inside an experiment run.
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what, long long replica = -1)
      : std::runtime_error(what), replica_(replica) {}
  long long replica() const { return replica_; }

 private:
  long long replica_;
};

}  // namespace haarmax
