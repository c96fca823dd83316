#pragma once

#include <stdexcept>
#include <string>

namespace orbitcount {

// Bad user input: malformed indices, parameters out of range, inconsistent flags.
// The CLI maps this to exit status 1.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateRotation : std::domain_error {
  using std::domain_error::domain_error;
};

struct NonRootInput : std::domain_error {
  using std::domain_error::domain_error;
};

struct InsufficientRange : std::domain_error {
  using std::domain_error::domain_error;
};

struct EmptyBall : std::domain_error {
  using std::domain_error::domain_error;
};

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Enumeration exceeded its element cap; the CLI maps this to exit status 3.
struct FrontierExplosion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegerOverflow : std::overflow_error {
  using std::overflow_error::overflow_error;
};

}  // namespace orbitcount
