#pragma once

#include <numbers>

namespace switchsim {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

// 1 rpm = 6 deg/s
constexpr double rpm_to_dps(double rpm) noexcept { return rpm * 6.0; }

}  // namespace switchsim
