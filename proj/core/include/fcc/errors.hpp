#pragma once

#include <stdexcept>
#include <string>

namespace fcc {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An edge joins two keypoints of the same image.
class WithinImageEdgeError : public Error {
 public:
  using Error::Error;
};

/// An image or keypoint index is outside its partition.
class IndexOutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Matrix powers above 4 are refused; they densify quickly.
class PowerTooLargeError : public Error {
 public:
  using Error::Error;
};

/// The dense oracle refuses inputs larger than its guard.
class TooLargeForOracleError : public Error {
 public:
  using Error::Error;
};

class ConfigInvalidError : public Error {
 public:
  using Error::Error;
};

class EstimateNotSubsetError : public Error {
 public:
  using Error::Error;
};

/// A sparse matrix or graph fails one of its structural invariants.
class InvalidStructureError : public Error {
 public:
  using Error::Error;
};

}  // namespace fcc
