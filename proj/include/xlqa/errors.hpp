#ifndef XLQA_ERRORS_HPP
#define XLQA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace xlqa {

// Base class for all library errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller handed us something unusable (invalid UTF-8, bad ids, bad ranges).
class input_error : public error {
 public:
  explicit input_error(const std::string& msg) : error(msg) {}
};

// A file did not match its declared format.
class format_error : public error {
 public:
  explicit format_error(const std::string& msg) : error(msg) {}
};

// An internal precondition between modules was violated.
class contract_error : public error {
 public:
  explicit contract_error(const std::string& msg) : error(msg) {}
};

}  // namespace xlqa

#endif  // XLQA_ERRORS_HPP
