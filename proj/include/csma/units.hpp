#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace csma {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) {
  if (lin <= 0.0) return -kInf;
  return 10.0 * std::log10(lin);
}

// dBm and mW share the same conversion; the aliases keep call sites readable.
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }
inline double mw_to_dbm(double mw) { return linear_to_db(mw); }

/// Raised when a precondition on user-supplied input is violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative or quadrature routine cannot deliver its contract.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace csma
