#pragma once

#include <stdexcept>
#include <string>

namespace escm {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A value fell outside the domain a contract requires.
class DomainError : public Error {
  public:
    using Error::Error;
};

// Target (mu, sigma) cannot be realized by a Beta law: sigma^2 >= mu(1-mu).
class InfeasiblePoint : public DomainError {
  public:
    using DomainError::DomainError;
};

// Adaptive integration could not reach the requested absolute tolerance.
class QuadratureFailure : public Error {
  public:
    using Error::Error;
};

// Total reviewer capacity n*l_r is below the demand m*|Q0|.
class InfeasibleReviewLoad : public Error {
  public:
    using Error::Error;
};

// A participant's eligible item pool is smaller than the assessment length.
class InsufficientPool : public Error {
  public:
    using Error::Error;
};

class EmptyElection : public Error {
  public:
    using Error::Error;
};

// Sum of log-odds is zero: normalized weights are undefined.
class DegenerateDenominator : public Error {
  public:
    using Error::Error;
};

// Every alternative has likelihood zero under the observed votes.
class ZeroLikelihood : public Error {
  public:
    using Error::Error;
};

class AllZeroWeights : public Error {
  public:
    using Error::Error;
};

class DegenerateVariance : public Error {
  public:
    using Error::Error;
};

class TooLargeForExhaustive : public Error {
  public:
    using Error::Error;
};

// Bad command line or config file; maps to exit code 2.
class UsageError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace escm
