#pragma once

#include <stdexcept>
#include <string>

namespace jumpvar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define JUMPVAR_DEFINE_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

JUMPVAR_DEFINE_ERROR(InvalidKernel);
JUMPVAR_DEFINE_ERROR(ReducibleChain);
JUMPVAR_DEFINE_ERROR(DimensionMismatch);
JUMPVAR_DEFINE_ERROR(SingularSystem);
JUMPVAR_DEFINE_ERROR(AbsorbingState);
JUMPVAR_DEFINE_ERROR(EmptyPath);
JUMPVAR_DEFINE_ERROR(InvalidModel);
JUMPVAR_DEFINE_ERROR(NotExactMode);
JUMPVAR_DEFINE_ERROR(MissingMoments);
JUMPVAR_DEFINE_ERROR(ZeroWeightSum);
JUMPVAR_DEFINE_ERROR(ZeroNoiseCurrent);
JUMPVAR_DEFINE_ERROR(UnevaluableNoise);
JUMPVAR_DEFINE_ERROR(PathTooShort);
JUMPVAR_DEFINE_ERROR(UnknownModel);
JUMPVAR_DEFINE_ERROR(InvalidConfig);

#undef JUMPVAR_DEFINE_ERROR

}  // namespace jumpvar
