#pragma once

#include <cmath>
#include <limits>

namespace udn {

inline constexpr double kMetersPerKm = 1000.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

/// dBm to mW; -inf dBm maps to exactly 0 mW.
inline double dbm_to_mw(double dbm) {
  if (dbm == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::pow(10.0, dbm / 10.0);
}

inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

}  // namespace udn
