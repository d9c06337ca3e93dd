#ifndef SIDGP_ERROR_HPP
#define SIDGP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sidgp {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on shapes or argument ranges was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A correlation matrix could not be factorized even after jitter escalation.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// NaN/inf appeared in a computed quantity or a variance was too negative.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// Input data could not be used (parse failure, shape mismatch, non-finite).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class RowCountMismatch : public DataError {
 public:
  using DataError::DataError;
};

/// Errors raised while reading a persisted model.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

class DigestMismatch : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

class MalformedModelFile : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

}  // namespace sidgp

#endif  // SIDGP_ERROR_HPP
