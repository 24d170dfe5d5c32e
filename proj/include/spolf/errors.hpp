#pragma once

#include <stdexcept>
#include <string>

namespace spolf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPOLF_DEFINE_ERROR(Name)        \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

SPOLF_DEFINE_ERROR(InvalidSpec);
SPOLF_DEFINE_ERROR(GenerationFailed);
SPOLF_DEFINE_ERROR(ParseError);

SPOLF_DEFINE_ERROR(FeatureNormExceeded);
SPOLF_DEFINE_ERROR(InsufficientData);
SPOLF_DEFINE_ERROR(NewtonDivergence);
SPOLF_DEFINE_ERROR(SingularDesign);
SPOLF_DEFINE_ERROR(NotFitted);

SPOLF_DEFINE_ERROR(EmptySafeSet);
SPOLF_DEFINE_ERROR(EmptyPlanningSet);
SPOLF_DEFINE_ERROR(ValueIterationStalled);

SPOLF_DEFINE_ERROR(InsufficientPrior);
SPOLF_DEFINE_ERROR(SafetyBreach);

#undef SPOLF_DEFINE_ERROR

}  // namespace spolf
