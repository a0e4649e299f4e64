#pragma once

#include <stdexcept>
#include <string>

namespace perckit {

/// Raised when an iterative method cannot reach the requested tolerance
/// within its iteration budget.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A probability sequence does not have the monotonicity a bound needs.
/// The flags say which of the product bounds would be invalid.
class monotonicity_error : public std::invalid_argument {
 public:
  monotonicity_error(bool lower_invalid, bool upper_invalid, const std::string& what)
      : std::invalid_argument(what), lower_invalid_(lower_invalid), upper_invalid_(upper_invalid) {}

  bool lower_invalid() const noexcept { return lower_invalid_; }
  bool upper_invalid() const noexcept { return upper_invalid_; }

 private:
  bool lower_invalid_;
  bool upper_invalid_;
};

/// A file could not be opened, read or written.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit has no usable data, e.g. every estimate is 0 or 1.
class degenerate_fit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace perckit
