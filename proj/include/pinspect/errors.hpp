#pragma once

#include <stdexcept>
#include <string>

namespace pinspect {

// Base for all domain errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define PINSPECT_DEFINE_ERROR(NAME)                              \
  class NAME : public Error {                                    \
   public:                                                       \
    explicit NAME(const std::string& msg = #NAME) : Error(msg) {} \
  }

PINSPECT_DEFINE_ERROR(ParseError);
PINSPECT_DEFINE_ERROR(EmptyMesh);
PINSPECT_DEFINE_ERROR(SizeMismatch);
PINSPECT_DEFINE_ERROR(NonPositiveDepth);
PINSPECT_DEFINE_ERROR(BehindCamera);
PINSPECT_DEFINE_ERROR(PinNotVisible);
PINSPECT_DEFINE_ERROR(NoFeasiblePose);
PINSPECT_DEFINE_ERROR(TooFewEdges);
PINSPECT_DEFINE_ERROR(OutOfBounds);
PINSPECT_DEFINE_ERROR(NoMatch);
PINSPECT_DEFINE_ERROR(NoSeparation);
PINSPECT_DEFINE_ERROR(UnknownPin);
PINSPECT_DEFINE_ERROR(InvalidSpec);
PINSPECT_DEFINE_ERROR(IoError);

#undef PINSPECT_DEFINE_ERROR

}  // namespace pinspect
