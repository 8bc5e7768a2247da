#pragma once

// SI values, CODATA 2018 (hbar and kB are exact in the 2019 SI).
namespace q1d::constants {

inline constexpr double hbar = 1.054571817e-34; // J s
inline constexpr double kB = 1.380649e-23;      // J / K
inline constexpr double pi = 3.14159265358979323846;

} // namespace q1d::constants
