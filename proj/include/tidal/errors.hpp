#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tidal {

/// Bad arguments: shape mismatch, out-of-range index, invalid parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not valid in the object's current state (e.g. reading an empty TD record).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite loss or gradient. Carries the offending sample id when known.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::int64_t sample_id)
      : std::runtime_error(what), sample_id_(sample_id) {}
  std::int64_t sample_id() const noexcept { return sample_id_; }

 private:
  std::int64_t sample_id_;
};

/// Malformed CSV or config input. `where` is a line number or a key path.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-fatal diagnostics go to stderr unless silenced.
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);

}  // namespace tidal
