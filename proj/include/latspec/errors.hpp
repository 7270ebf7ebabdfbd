#ifndef LATSPEC_ERRORS_HPP
#define LATSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace latspec {

/// Multiplier parameters outside their admissible range.
class InvalidSpec : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Energy strictly inside the continuous spectrum where a resolvent integral
/// was requested.
class InteriorEnergy : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A quadrature, regression or root search did not reach its tolerance.
class NumericFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// No finite nonzero coupling corresponds to the requested energy.
class NoCoupling : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

} // namespace latspec

#endif // LATSPEC_ERRORS_HPP
