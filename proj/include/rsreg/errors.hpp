#pragma once

#include <stdexcept>
#include <string>

namespace rsreg {

/// Bad arguments or malformed configuration.  The CLI maps this to exit code 1.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or malformed data files.  The CLI maps this to exit code 2.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric failure during estimation.  The CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Moment coordinates outside the domain of the coefficient map; carries the
/// offending design determinant.
class outside_domain : public numeric_error {
 public:
  explicit outside_domain(double det)
      : numeric_error("moment vector outside domain: det(Sigma) = " +
                      std::to_string(det)),
        det_(det) {}
  double det() const noexcept { return det_; }

 private:
  double det_;
};

/// Plug-in covariance too ill-conditioned to invert.
class singular_covariance : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

/// Log-periodogram regression fed a zero or non-finite ordinate.
class degenerate_periodogram : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

/// Circulant embedding produced a materially negative eigenvalue.
class embedding_failure : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

}  // namespace rsreg
