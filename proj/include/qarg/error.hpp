#pragma once

#include <stdexcept>
#include <string>

namespace qarg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define QARG_DEFINE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

QARG_DEFINE_ERROR(IndexOutOfRange);
QARG_DEFINE_ERROR(DimensionMismatch);
QARG_DEFINE_ERROR(TooLarge);
QARG_DEFINE_ERROR(RangeError);
QARG_DEFINE_ERROR(YFreeViolation);
QARG_DEFINE_ERROR(NotHermitian);
QARG_DEFINE_ERROR(ZeroMatrix);
QARG_DEFINE_ERROR(UnsupportedGate);
QARG_DEFINE_ERROR(TooFewGates);
QARG_DEFINE_ERROR(EmptyHamiltonian);
QARG_DEFINE_ERROR(PaddingExhausted);
QARG_DEFINE_ERROR(MissingOutcome);
QARG_DEFINE_ERROR(LayoutError);
QARG_DEFINE_ERROR(TooManyCoins);
QARG_DEFINE_ERROR(GapNonpositive);
QARG_DEFINE_ERROR(InvalidIndex);
QARG_DEFINE_ERROR(ExtractorUnavailable);
QARG_DEFINE_ERROR(ProtocolViolation);

#undef QARG_DEFINE_ERROR

/// Raised by the text-format readers; carries the source name and line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

}  // namespace qarg
