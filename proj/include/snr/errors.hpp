#pragma once

#include <stdexcept>
#include <string>

namespace snr {

// Base of every error raised by the library. name() is the stable identifier
// printed by the CLI on standard error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const noexcept { return "Error"; }
};

#define SNR_DEFINE_ERROR(Type)                                        \
  class Type : public Error {                                         \
   public:                                                            \
    using Error::Error;                                               \
    const char* name() const noexcept override { return #Type; }      \
  };

SNR_DEFINE_ERROR(DimensionMismatch)
SNR_DEFINE_ERROR(InvalidParameter)
SNR_DEFINE_ERROR(NotPositiveSemiDefinite)
SNR_DEFINE_ERROR(DegenerateResponse)
SNR_DEFINE_ERROR(SingularMomentSystem)
SNR_DEFINE_ERROR(GenerationFailed)
SNR_DEFINE_ERROR(ConfigError)
SNR_DEFINE_ERROR(EmptyInput)
SNR_DEFINE_ERROR(RaggedRows)

#undef SNR_DEFINE_ERROR

// Malformed numeric token in a matrix file. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string token)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": cannot parse '" + token + "'"),
        line_(line),
        column_(column),
        token_(std::move(token)) {}
  const char* name() const noexcept override { return "ParseError"; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string token_;
};

}  // namespace snr
