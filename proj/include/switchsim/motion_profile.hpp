#pragma once

// Motor-side motion: trapezoidal point-to-point moves (profile position mode)
// and ramped constant-velocity commands (profile velocity mode). Angles in
// degrees at the gearhead output, time in seconds.

#include <algorithm>
#include <cmath>
#include <limits>

#include "switchsim/error.hpp"

namespace switchsim {

enum class ControlMode { ProfilePosition, ProfileVelocity };

struct MotorModel {
  double max_output_speed_dps = 720.0;  // 120 rpm after the 43:1 gearhead
  double gearhead_ratio = 43.0;
  double profile_accel_dps2 = 5466.0;
  ControlMode control_mode = ControlMode::ProfilePosition;

  void validate() const {
    SWITCHSIM_REQUIRE(std::isfinite(max_output_speed_dps) && max_output_speed_dps > 0.0, ErrorCode::InvalidInput,
                      "max_output_speed must be positive");
    SWITCHSIM_REQUIRE(profile_accel_dps2 > 0.0 && !std::isnan(profile_accel_dps2), ErrorCode::InvalidInput,
                      "profile_accel must be positive");
    SWITCHSIM_REQUIRE(gearhead_ratio >= 1.0, ErrorCode::InvalidInput, "gearhead_ratio must be >= 1");
  }

  bool operator==(const MotorModel&) const = default;
};

/// Duration of a rest-to-rest move; a = +inf gives the kinematic floor |d|/v.
inline double trapezoid_duration(double distance_deg, double v_dps, double a_dps2) {
  const double d = std::abs(distance_deg);
  if (std::isinf(a_dps2)) return d / v_dps;
  if (d < v_dps * v_dps / a_dps2) return 2.0 * std::sqrt(d / a_dps2);
  return d / v_dps + v_dps / a_dps2;
}

inline bool is_triangular(double distance_deg, double v_dps, double a_dps2) noexcept {
  return !std::isinf(a_dps2) && std::abs(distance_deg) < v_dps * v_dps / a_dps2;
}

class TrapezoidProfile {
 public:
  TrapezoidProfile() = default;

  TrapezoidProfile(double start_deg, double delta_deg, double v_dps, double a_dps2)
      : start_(start_deg), delta_(delta_deg), v_(v_dps), a_(a_dps2) {
    SWITCHSIM_REQUIRE(std::isfinite(delta_deg), ErrorCode::InvalidInput, "move distance not finite");
    SWITCHSIM_REQUIRE(v_dps > 0.0 && std::isfinite(v_dps), ErrorCode::InvalidInput, "profile velocity must be > 0");
    SWITCHSIM_REQUIRE(a_dps2 > 0.0, ErrorCode::InvalidInput, "profile acceleration must be > 0");
    const double d = std::abs(delta_deg);
    if (std::isinf(a_)) {
      peak_v_ = v_;
      accel_time_ = 0.0;
      duration_ = d / v_;
    } else if (d < v_ * v_ / a_) {
      triangular_ = true;
      accel_time_ = std::sqrt(d / a_);
      peak_v_ = a_ * accel_time_;
      duration_ = 2.0 * accel_time_;
    } else {
      peak_v_ = v_;
      accel_time_ = v_ / a_;
      duration_ = d / v_ + v_ / a_;
    }
  }

  double duration() const noexcept { return duration_; }
  bool triangular() const noexcept { return triangular_; }
  double start() const noexcept { return start_; }
  double end() const noexcept { return start_ + delta_; }
  double peak_velocity() const noexcept { return peak_v_; }

  /// Angle at time tau after the move started.
  double position(double tau) const noexcept {
    if (tau <= 0.0) return start_;
    if (tau >= duration_) return end();
    const double sign = delta_ < 0.0 ? -1.0 : 1.0;
    return start_ + sign * distance_covered(tau);
  }

  /// Time at which |position - start| first reaches `offset_deg` (bisection).
  double time_at_offset(double offset_deg) const noexcept {
    const double target = std::abs(offset_deg);
    if (target <= 0.0) return 0.0;
    // Velocity is zero at the end, so the inverse is ill-conditioned there;
    // offsets within rounding of the full travel map to the end time.
    if (target >= std::abs(delta_) * (1.0 - 1e-12)) return duration_;
    double lo = 0.0;
    double hi = duration_;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (distance_covered(mid) < target) lo = mid; else hi = mid;
    }
    return hi;
  }

 private:
  double distance_covered(double tau) const noexcept {
    const double d = std::abs(delta_);
    if (std::isinf(a_)) return std::min(d, v_ * tau);
    const double cruise_end = duration_ - accel_time_;
    if (tau < accel_time_) return 0.5 * a_ * tau * tau;
    if (tau < cruise_end) return 0.5 * a_ * accel_time_ * accel_time_ + peak_v_ * (tau - accel_time_);
    const double rem = duration_ - tau;
    return d - 0.5 * a_ * rem * rem;
  }

  double start_ = 0.0;
  double delta_ = 0.0;
  double v_ = 1.0;
  double a_ = 1.0;
  double accel_time_ = 0.0;
  double peak_v_ = 0.0;
  double duration_ = 0.0;
  bool triangular_ = false;
};

inline TrapezoidProfile profile_position_move(const MotorModel& motor, double start_deg, double delta_deg,
                                              double velocity_dps) {
  SWITCHSIM_REQUIRE(delta_deg != 0.0, ErrorCode::InvalidInput, "zero-length move");
  return TrapezoidProfile(start_deg, delta_deg, velocity_dps, motor.profile_accel_dps2);
}

inline TrapezoidProfile profile_position_move(const MotorModel& motor, double delta_deg) {
  return profile_position_move(motor, 0.0, delta_deg, motor.max_output_speed_dps);
}

/// Constant-acceleration ramp from v0 to v1, then constant velocity.
class VelocityRamp {
 public:
  VelocityRamp() = default;
  VelocityRamp(double start_deg, double v0_dps, double v1_dps, double a_dps2)
      : start_(start_deg), v0_(v0_dps), v1_(v1_dps), a_(a_dps2) {
    ramp_time_ = std::isinf(a_) ? 0.0 : std::abs(v1_ - v0_) / a_;
  }

  double position(double tau) const noexcept {
    if (tau <= 0.0) return start_;
    if (tau < ramp_time_) {
      const double acc = v1_ > v0_ ? a_ : -a_;
      return start_ + v0_ * tau + 0.5 * acc * tau * tau;
    }
    const double ramp_dist = 0.5 * (v0_ + v1_) * ramp_time_;
    return start_ + ramp_dist + v1_ * (tau - ramp_time_);
  }

  double velocity(double tau) const noexcept {
    if (tau >= ramp_time_) return v1_;
    return v0_ + (v1_ > v0_ ? a_ : -a_) * tau;
  }

  /// Time at which the travelled angle reaches `offset_deg` within
  /// [tau0, tau1]; assumes monotone motion over that window.
  double time_at_offset(double offset_deg, double tau0, double tau1) const noexcept {
    const double p0 = position(tau0);
    const double target = p0 + offset_deg;
    const bool increasing = position(tau1) >= p0;
    double lo = tau0;
    double hi = tau1;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double p = position(mid);
      if (increasing ? p < target : p > target) lo = mid; else hi = mid;
    }
    return hi;
  }

 private:
  double start_ = 0.0;
  double v0_ = 0.0;
  double v1_ = 0.0;
  double a_ = 1.0;
  double ramp_time_ = 0.0;
};

/// Acceleration that makes a rest-to-rest move of `delta_deg` at `v_dps` take
/// `t_measured_s`. Falls back to the triangular solution when the trapezoid
/// answer would not reach cruise speed.
inline double calibrate_profile_accel(double t_measured_s, double delta_deg, double v_dps) {
  const double d = std::abs(delta_deg);
  SWITCHSIM_REQUIRE(v_dps > 0.0 && d > 0.0, ErrorCode::InvalidInput, "need positive distance and speed");
  const double floor_s = d / v_dps;
  SWITCHSIM_REQUIRE(t_measured_s > floor_s, ErrorCode::BelowKinematicFloor,
                    "measured time " + std::to_string(t_measured_s * 1e3) + " ms at or below kinematic floor " +
                        std::to_string(floor_s * 1e3) + " ms");
  const double a = v_dps / (t_measured_s - floor_s);
  if (d >= v_dps * v_dps / a) return a;
  return 4.0 * d / (t_measured_s * t_measured_s);
}

}  // namespace switchsim
