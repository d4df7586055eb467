#ifndef CRFLOW_ERRORS_HPP
#define CRFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace crflow {

/// Grid construction rejected (bounds, node count, dimension).
struct InvalidGrid : std::runtime_error {
  explicit InvalidGrid(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values encountered in a geometric computation.
struct NumericalBreakdown : std::runtime_error {
  explicit NumericalBreakdown(const std::string& what) : std::runtime_error(what) {}
};

/// A reference metric does not live on the same grid / frame as the argument.
struct IncompatibleReference : std::runtime_error {
  explicit IncompatibleReference(const std::string& what) : std::runtime_error(what) {}
};

/// The elliptic operator cannot be inverted (zero pivot, s0 = 0 on the
/// homogeneous class, ...).
struct NonInvertibleOperator : std::runtime_error {
  explicit NonInvertibleOperator(const std::string& what) : std::runtime_error(what) {}
};

/// Diagnostic requested for a geometry class it is not defined on.
struct UnsupportedGeometry : std::runtime_error {
  explicit UnsupportedGeometry(const std::string& what) : std::runtime_error(what) {}
};

/// Surface-integral ladder did not stabilize; the field decays too slowly
/// for a meaningful extrapolation.
struct InsufficientDecay : std::runtime_error {
  explicit InsufficientDecay(const std::string& what) : std::runtime_error(what) {}
};

/// A pulled-back point left the radial domain.
struct OutOfDomain : std::runtime_error {
  explicit OutOfDomain(const std::string& what) : std::runtime_error(what) {}
};

/// Scenario / config document rejected; carries field context in what().
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crflow

#endif  // CRFLOW_ERRORS_HPP
