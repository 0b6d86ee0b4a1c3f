#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace berwald {

enum class ErrorKind {
  singular_evaluation,
  non_finite,
  singular_jacobian,
  parse_error,
  unknown_identifier,
  singular_argument,
  bound_violation,
  degenerate_metric,
  insufficient_samples,
  not_berwald,
  divergent_series,
  left_chart,
  singular_hit,
  step_underflow,
  not_timelike,
  not_autoparallel,
  newton_divergence,
  invalid_argument,
  config_error,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::singular_evaluation: return "SingularEvaluation";
    case ErrorKind::non_finite: return "NonFinite";
    case ErrorKind::singular_jacobian: return "SingularJacobian";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::unknown_identifier: return "UnknownIdentifier";
    case ErrorKind::singular_argument: return "SingularArgument";
    case ErrorKind::bound_violation: return "BoundViolation";
    case ErrorKind::degenerate_metric: return "DegenerateMetric";
    case ErrorKind::insufficient_samples: return "InsufficientSamples";
    case ErrorKind::not_berwald: return "NotBerwald";
    case ErrorKind::divergent_series: return "DivergentSeries";
    case ErrorKind::left_chart: return "LeftChart";
    case ErrorKind::singular_hit: return "SingularHit";
    case ErrorKind::step_underflow: return "StepUnderflow";
    case ErrorKind::not_timelike: return "NotTimelike";
    case ErrorKind::not_autoparallel: return "NotAutoparallel";
    case ErrorKind::newton_divergence: return "NewtonDivergence";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::config_error: return "ConfigError";
  }
  return "Error";
}

/// Base of every error raised by the library. `kind()` allows dispatch
/// without RTTI (the CLI maps kinds to exit codes and report reasons).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define BERWALD_DEFINE_ERROR(Name, Kind)                              \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

BERWALD_DEFINE_ERROR(SingularEvaluation, singular_evaluation)
BERWALD_DEFINE_ERROR(NonFinite, non_finite)
BERWALD_DEFINE_ERROR(SingularJacobian, singular_jacobian)
BERWALD_DEFINE_ERROR(UnknownIdentifier, unknown_identifier)
BERWALD_DEFINE_ERROR(SingularArgument, singular_argument)
BERWALD_DEFINE_ERROR(BoundViolation, bound_violation)
BERWALD_DEFINE_ERROR(DegenerateMetric, degenerate_metric)
BERWALD_DEFINE_ERROR(InsufficientSamples, insufficient_samples)
BERWALD_DEFINE_ERROR(NotBerwald, not_berwald)
BERWALD_DEFINE_ERROR(DivergentSeries, divergent_series)
BERWALD_DEFINE_ERROR(StepUnderflow, step_underflow)
BERWALD_DEFINE_ERROR(NotTimelike, not_timelike)
BERWALD_DEFINE_ERROR(NotAutoparallel, not_autoparallel)
BERWALD_DEFINE_ERROR(InvalidArgument, invalid_argument)
BERWALD_DEFINE_ERROR(ConfigError, config_error)

#undef BERWALD_DEFINE_ERROR

/// Malformed expression text. `offset` is the byte offset of the offending
/// token (the input length when the input ended early).
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
      : Error(ErrorKind::parse_error, describe(offset, expected, found)),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string describe(std::size_t offset, const std::vector<std::string>& expected,
                              const std::string& found) {
    std::string msg = "at offset " + std::to_string(offset) + ": found " + found + ", expected one of {";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += ", ";
      msg += expected[i];
    }
    return msg + "}";
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Errors that carry the spacetime location where integration stopped.
class LocatedError : public Error {
 public:
  LocatedError(ErrorKind kind, const std::string& what, double parameter, std::array<double, 4> coords)
      : Error(kind, what), parameter_(parameter), coords_(coords) {}

  double parameter() const noexcept { return parameter_; }
  const std::array<double, 4>& coords() const noexcept { return coords_; }

 private:
  double parameter_;
  std::array<double, 4> coords_;
};

class LeftChart : public LocatedError {
 public:
  LeftChart(const std::string& what, double t, std::array<double, 4> x)
      : LocatedError(ErrorKind::left_chart, what, t, x) {}
};

class SingularHit : public LocatedError {
 public:
  SingularHit(const std::string& what, double t, std::array<double, 4> x)
      : LocatedError(ErrorKind::singular_hit, what, t, x) {}
};

class NewtonDivergence : public Error {
 public:
  NewtonDivergence(const std::string& what, std::array<double, 4> last_iterate)
      : Error(ErrorKind::newton_divergence, what), last_(last_iterate) {}

  const std::array<double, 4>& last_iterate() const noexcept { return last_; }

 private:
  std::array<double, 4> last_;
};

}  // namespace berwald
