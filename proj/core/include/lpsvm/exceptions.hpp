/**
 * @file
 * @brief Exception hierarchy used throughout lpsvm.
 *
 * Every error raised by the library derives from lpsvm::exception so callers can catch the whole
 * family at once, or a specific category where recovery makes sense (e.g. the experiment harness
 * records a failed sweep point and continues).
 */

#ifndef LPSVM_EXCEPTIONS_HPP_
#define LPSVM_EXCEPTIONS_HPP_
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpsvm {

class exception : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number of the offending row.
class parse_error : public exception {
  public:
    parse_error(const std::string &msg, std::size_t line);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class dimension_error : public exception {
  public:
    using exception::exception;
};

class class_count_error : public exception {
  public:
    using exception::exception;
};

class split_error : public exception {
  public:
    using exception::exception;
};

class masking_error : public exception {
  public:
    using exception::exception;
};

class skew_error : public exception {
  public:
    using exception::exception;
};

/// Non-finite values in inputs or intermediate results.
class numeric_error : public exception {
  public:
    using exception::exception;
};

class normalization_error : public exception {
  public:
    using exception::exception;
};

class oracle_error : public exception {
  public:
    using exception::exception;
};

class training_error : public exception {
  public:
    using exception::exception;
};

class dispatch_error : public exception {
  public:
    using exception::exception;
};

class consistency_error : public exception {
  public:
    using exception::exception;
};

class length_error : public exception {
  public:
    using exception::exception;
};

class config_error : public exception {
  public:
    using exception::exception;
};

class io_error : public exception {
  public:
    using exception::exception;
};

}  // namespace lpsvm

#endif  // LPSVM_EXCEPTIONS_HPP_
