#pragma once

#include <stdexcept>
#include <string>

namespace mdlvq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A lattice point lies on a Voronoi boundary where the construction needs it not to.
class NonCleanError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Rate split or index choice outside the feasible region.
class InfeasibleDesignError : public Error {
 public:
  using Error::Error;
};

/// Channel with no side-distortion tradeoff (nothing is ever lost, or nothing ever arrives).
class DegenerateChannelError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdlvq
