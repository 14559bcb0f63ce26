// SPDX-License-Identifier: Apache-2.0
//
// dBm at every external interface, Watts internally.

#pragma once

#include <cmath>

namespace urllc::units {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

/// Noise power in dBm over `bandwidth_hz` for a density given in dBm/Hz.
inline double noise_power_dbm(double density_dbm_hz, double bandwidth_hz) {
    return density_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

}  // namespace urllc::units
