#pragma once

#include <stdexcept>
#include <string>

namespace optimist {

// Caller passed something outside an operation's domain.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Estimator queried before the arm has any observation.
class NotInitializedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A computed quantity broke an invariant (e.g. a NaN index).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Configuration rejected; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace optimist
