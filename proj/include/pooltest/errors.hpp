#pragma once

#include <stdexcept>
#include <string>

namespace pooltest {

// A pooling design cannot satisfy its constraints (not enough distinct
// signatures for the requested population).
class InfeasibleDesign : public std::runtime_error {
 public:
  explicit InfeasibleDesign(const std::string& what) : std::runtime_error(what) {}
};

// Input files parse individually but disagree with each other
// (missing or unknown group ids between a design and its results).
class DataMismatch : public std::runtime_error {
 public:
  explicit DataMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pooltest
