#pragma once

#include <stdexcept>
#include <string>

namespace curemix {

//! Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Input data or arguments violate a precondition.
class InvalidInput : public Error
{
public:
  using Error::Error;
};

//! All kernel weights vanish at the requested conditioning point.
class DegenerateNeighborhood : public Error
{
public:
  using Error::Error;
};

//! No bandwidth on the grid gives a usable cross-validation score.
class BandwidthSelectionFailed : public Error
{
public:
  using Error::Error;
};

//! Objective became non-finite and step-halving could not recover.
class DivergenceError : public Error
{
public:
  using Error::Error;
};

//! Design matrix is rank deficient on the rows that carry weight.
class SingularDesign : public Error
{
public:
  using Error::Error;
};

//! Too many bootstrap resamples failed to produce an estimate.
class InferenceUnreliable : public Error
{
public:
  using Error::Error;
};

} // namespace curemix
