#pragma once

#include <stdexcept>
#include <string>

namespace mdsipm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MDSIPM_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  };

MDSIPM_DEFINE_ERROR(DimensionError)
MDSIPM_DEFINE_ERROR(EmptyInputError)
MDSIPM_DEFINE_ERROR(NotInteriorError)
MDSIPM_DEFINE_ERROR(MalformedMatrixError)
MDSIPM_DEFINE_ERROR(ConfigError)
MDSIPM_DEFINE_ERROR(NumericError)
MDSIPM_DEFINE_ERROR(SingularError)
MDSIPM_DEFINE_ERROR(InitError)
MDSIPM_DEFINE_ERROR(AssemblyError)
MDSIPM_DEFINE_ERROR(CompressionError)

#undef MDSIPM_DEFINE_ERROR

/// Raised when a model evaluator produces a non-finite value.
class EvalError : public Error {
 public:
  EvalError(std::string component, const std::string& what)
      : Error(what), component_(std::move(component)) {}

  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(std::string("dimension mismatch: ") + what);
}

}  // namespace detail
}  // namespace mdsipm
