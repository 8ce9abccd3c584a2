#pragma once

#include <stdexcept>
#include <string>

namespace linecospar {

// Base class for every failure raised by the library. Callers that only care
// about "something went wrong in the optimizer" can catch this one type.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

// The prior Gram matrix could not be factored even at maximum jitter, or the
// point set contains coincident points under distinct ids.
class SingularPrior : public Error {
  public:
    using Error::Error;
};

class SingularCovariance : public Error {
  public:
    using Error::Error;
};

class MissingAction : public Error {
  public:
    using Error::Error;
};

class NoConvergence : public Error {
  public:
    NoConvergence(const std::string & what, double gradient_norm)
        : Error(what), gradient_norm_(gradient_norm) {}

    double gradient_norm() const { return gradient_norm_; }

  private:
    double gradient_norm_;
};

class DegenerateLine : public Error {
  public:
    using Error::Error;
};

class StaleFeedback : public Error {
  public:
    using Error::Error;
};

class GridTooLarge : public Error {
  public:
    using Error::Error;
};

class MalformedTrajectory : public Error {
  public:
    using Error::Error;
};

class DegenerateFeatures : public Error {
  public:
    using Error::Error;
};

}  // namespace linecospar
