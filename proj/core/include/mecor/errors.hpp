#pragma once

#include <stdexcept>
#include <string>

namespace mecor {

/// Base class for all library errors. Inputs are validated eagerly at
/// construction or call time; nothing propagates NaN silently.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatch : Error {
  using Error::Error;
};
struct NonFiniteInput : Error {
  using Error::Error;
};
struct TooFewObservations : Error {
  using Error::Error;
};
struct DegenerateRegressor : Error {
  using Error::Error;
};
struct OutOfDomain : Error {
  using Error::Error;
};
struct ZeroVariance : Error {
  using Error::Error;
};
struct ZeroSE : Error {
  using Error::Error;
};
struct MissingTreatment : Error {
  using Error::Error;
};
struct DegenerateCalibration : Error {
  using Error::Error;
};
struct ThetaOneZero : Error {
  using Error::Error;
};
struct ThetaZero : Error {
  using Error::Error;
};
struct DegenerateBootstrap : Error {
  using Error::Error;
};
struct ConfigInvalid : Error {
  using Error::Error;
};
struct TooFewRows : Error {
  using Error::Error;
};

}  // namespace mecor
