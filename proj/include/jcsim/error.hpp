#pragma once

#include <stdexcept>
#include <string>

namespace jcsim {

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorKind { Numerical, Config, Io };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

#define JCSIM_DEFINE_ERROR(Name, Kind)                                                   \
    class Name : public Error {                                                          \
      public:                                                                            \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, #Name ": " + what) {} \
    };

JCSIM_DEFINE_ERROR(NonHermitian, Numerical)
JCSIM_DEFINE_ERROR(NoConvergence, Numerical)
JCSIM_DEFINE_ERROR(ShapeMismatch, Numerical)
JCSIM_DEFINE_ERROR(NotDensityMatrix, Numerical)
JCSIM_DEFINE_ERROR(NotPure, Numerical)
JCSIM_DEFINE_ERROR(DegenerateTruncation, Numerical)
JCSIM_DEFINE_ERROR(PositivityLoss, Numerical)
JCSIM_DEFINE_ERROR(NegativeDiscord, Numerical)
JCSIM_DEFINE_ERROR(UnsupportedRequest, Config)
JCSIM_DEFINE_ERROR(StepTooLarge, Config)
JCSIM_DEFINE_ERROR(ConfigInvalid, Config)
JCSIM_DEFINE_ERROR(IoError, Io)

#undef JCSIM_DEFINE_ERROR

} // namespace jcsim
