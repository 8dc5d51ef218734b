#pragma once

#include <stdexcept>
#include <string>

namespace dfbench {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidImage : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A text distractor could not be placed because the exclusion box leaves no room.
class PlacementImpossible : public Error {
 public:
  using Error::Error;
};

class InvalidProfile : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The sampled blend mask was empty or the composite is indistinguishable from its source.
class DegenerateMask : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Metric is undefined for the input (e.g. only one class present).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

}  // namespace dfbench
