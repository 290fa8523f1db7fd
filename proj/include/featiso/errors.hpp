#pragma once

#include <stdexcept>
#include <string>

namespace featiso {

/// Bad input data: unreadable files, malformed manifests, failed preconditions
/// on images or masks. Maps to CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied arguments or configuration. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal post-condition failed. Maps to exit code 4.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace featiso
