#pragma once

#include <stdexcept>
#include <string>

namespace socsmo {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter set (bad dt, non-positive capacity, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Math-domain violation (log argument, stoichiometry outside curve support, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An electrode stoichiometry left (0,1) during propagation. Carries the
/// offending field name and, when raised inside a run loop, the step index.
class SaturationError : public Error {
 public:
  SaturationError(std::string field, double value, long step_index = -1)
      : Error("saturation: " + field + " = " + std::to_string(value) +
              (step_index >= 0 ? " at step " + std::to_string(step_index) : "")),
        field_(std::move(field)),
        value_(value),
        step_index_(step_index) {}

  const std::string& field() const { return field_; }
  double value() const { return value_; }
  long step_index() const { return step_index_; }

 private:
  std::string field_;
  double value_;
  long step_index_;
};

/// CSV ingestion failure; carries the 1-based row number of the offending line.
class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t row)
      : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}

  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

}  // namespace socsmo
