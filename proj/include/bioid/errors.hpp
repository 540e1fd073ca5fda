#pragma once

#include <stdexcept>
#include <string>

namespace bioid {

// Malformed files, bad CSV rows, inconsistent datasets. The CLI maps this
// to exit code 2; std::invalid_argument (bad parameters) maps to 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bioid
