#pragma once

#include <stdexcept>
#include <string>

namespace pencil {

/// Broad failure class. The CLI maps these onto its exit codes.
enum class ErrorClass { Config, Compute, Inconsistent };

class PencilError : public std::runtime_error {
 public:
  PencilError(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

#define PENCIL_DEFINE_ERROR(Name, Cls)                                   \
  class Name : public PencilError {                                      \
   public:                                                               \
    explicit Name(const std::string& what)                               \
        : PencilError(ErrorClass::Cls, std::string(#Name ": ") + what) {} \
  }

PENCIL_DEFINE_ERROR(ConfigError, Config);
PENCIL_DEFINE_ERROR(IndexOutOfRange, Compute);
PENCIL_DEFINE_ERROR(InvalidPole, Compute);
PENCIL_DEFINE_ERROR(NotDivisible, Compute);
PENCIL_DEFINE_ERROR(Resonance, Compute);
PENCIL_DEFINE_ERROR(SingularLevel, Compute);
PENCIL_DEFINE_ERROR(NearPole, Compute);
PENCIL_DEFINE_ERROR(OnCriticalRay, Compute);
PENCIL_DEFINE_ERROR(ContourThroughZero, Compute);
PENCIL_DEFINE_ERROR(PoleOnContour, Compute);
PENCIL_DEFINE_ERROR(EigenvalueHit, Compute);
PENCIL_DEFINE_ERROR(CountMismatch, Compute);
PENCIL_DEFINE_ERROR(AmbiguousResidue, Compute);
PENCIL_DEFINE_ERROR(StiffnessFailure, Compute);
PENCIL_DEFINE_ERROR(ToleranceNotMet, Compute);
PENCIL_DEFINE_ERROR(InconsistentData, Inconsistent);

#undef PENCIL_DEFINE_ERROR

}  // namespace pencil
