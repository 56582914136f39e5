#pragma once

// Scripted versions of the two bench protocols (switching time, spool
// independence) and the motor-speed sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "switchsim/error.hpp"
#include "switchsim/motion_profile.hpp"
#include "switchsim/plant.hpp"
#include "switchsim/units.hpp"

namespace switchsim {

/// Motor output rotation (deg) for one end-to-end traversal of the track.
inline double traversal_motor_travel_deg(const PlantConfig& config) {
  return config.traversal.k_eff() * rad_to_deg(solve_engagement(config.layout).theta_track_rad);
}

/// Streaming mean and sample standard deviation (Welford).
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double sigma() const noexcept { return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// One traversal from the `from` endpoint to the opposite one, commanded as a
/// profile-position move between the two endpoint shaft angles. Returns the
/// command-to-engagement time in seconds.
inline double simulate_switch_once(const PlantConfig& config, Side from,
                                   std::optional<double> velocity_dps = std::nullopt) {
  SWITCHSIM_REQUIRE(from != Side::None, ErrorCode::InvalidInput, "switch trial must start engaged");
  const double half = 0.5 * traversal_motor_travel_deg(config);
  PlantConfig c = config;
  c.motor.control_mode = ControlMode::ProfilePosition;
  c.initial_mode = from == Side::Plus ? SwitchMode::EngagedPlus : SwitchMode::EngagedMinus;
  c.initial_motor_deg = from == Side::Plus ? half : -half;
  const Side to = from == Side::Plus ? Side::Minus : Side::Plus;

  Simulator sim(c);
  if (velocity_dps) sim.execute(SetVelocity{*velocity_dps});
  const double t_command = sim.time();
  sim.execute(MoveMotorTo{from == Side::Plus ? -half : half});
  for (const auto& ev : sim.trace().events) {
    if (ev.event.kind == SwitchEventKind::Engaged && ev.event.side == to) return ev.t_s - t_command;
  }
  throw Error(ErrorCode::NeverEngaged, "switch did not reach the far endpoint");
}

struct SwitchingTimeStats {
  int n_trials = 0;
  double mean_up_ms = 0.0;
  double mean_down_ms = 0.0;
  double sigma_up_ms = 0.0;
  double sigma_down_ms = 0.0;
  std::vector<double> up_ms;
  std::vector<double> down_ms;
};

struct JitterOptions {
  bool enabled = true;
  std::uint64_t seed = 1;
  double sigma_ms = 0.6;
};

/// "Up" moves the switch from the minus to the plus endpoint; "down" the reverse.
/// Trial i draws its jitter from seed + i.
inline SwitchingTimeStats run_switching_time(const PlantConfig& config, int n_trials, const JitterOptions& jitter = {},
                                             std::optional<double> velocity_dps = std::nullopt) {
  SWITCHSIM_REQUIRE(n_trials >= 1, ErrorCode::InvalidInput, "n_trials must be >= 1");
  SWITCHSIM_REQUIRE(!jitter.enabled || jitter.sigma_ms >= 0.0, ErrorCode::InvalidInput, "jitter sigma must be >= 0");
  SwitchingTimeStats stats;
  stats.n_trials = n_trials;
  RunningStats up, down;
  for (int i = 0; i < n_trials; ++i) {
    double t_up = simulate_switch_once(config, Side::Minus, velocity_dps) * 1e3;
    double t_down = simulate_switch_once(config, Side::Plus, velocity_dps) * 1e3;
    if (jitter.enabled && jitter.sigma_ms > 0.0) {
      std::mt19937_64 rng(jitter.seed + static_cast<std::uint64_t>(i));
      std::normal_distribution<double> noise(0.0, jitter.sigma_ms);
      t_up += noise(rng);
      t_down += noise(rng);
    }
    stats.up_ms.push_back(t_up);
    stats.down_ms.push_back(t_down);
    up.add(t_up);
    down.add(t_down);
  }
  stats.mean_up_ms = up.mean();
  stats.mean_down_ms = down.mean();
  stats.sigma_up_ms = up.sigma();
  stats.sigma_down_ms = down.sigma();
  return stats;
}

/// Motor rotation (deg) that winds `side` far enough to move the joint from
/// q_from to q_to.
inline double motor_rotation_to_wind(const Mechanism& mech, Side side, double q_from_rad, double q_to_rad) {
  const double dl = mech.cable_length(side, q_from_rad) - mech.cable_length(side, q_to_rad);
  const double spool_rad = dl / mech.config().spools.radius_mm;
  return rad_to_deg(spool_rad) / driven_speed_ratio(mech.config().layout);
}

// Sweep targets stop this far inside the joint limits.
inline constexpr double kSweepLimitMarginRad = 1e-8;

/// Full range-of-motion sweep from an initial EngagedPlus state: wind plus to
/// +90 deg, switch and wind minus to -90 deg, switch back and wind plus to +90 deg.
inline Script rom_sweep_script(const PlantConfig& config, double pause_s = 0.1) {
  SWITCHSIM_REQUIRE(config.initial_mode == SwitchMode::EngagedPlus, ErrorCode::InvalidInput,
                    "range sweep starts engaged on the plus side");
  const Mechanism mech(config);
  const double lim = kJointLimitRad - kSweepLimitMarginRad;
  const double traverse = traversal_motor_travel_deg(config);
  const double q0 = config.initial_joint_rad;

  double m = config.initial_motor_deg + motor_rotation_to_wind(mech, Side::Plus, q0, lim);
  Script script{MoveMotorTo{m}, Wait{pause_s}};
  m -= traverse + motor_rotation_to_wind(mech, Side::Minus, lim, -lim);
  script.push_back(MoveMotorTo{m});
  script.push_back(Wait{pause_s});
  m += traverse + motor_rotation_to_wind(mech, Side::Plus, -lim, lim);
  script.push_back(MoveMotorTo{m});
  script.push_back(Wait{pause_s});
  return script;
}

/// Simulated time the script takes when run from the config's initial state.
inline double nominal_script_duration(const PlantConfig& config, const Script& script) {
  double t = 0.0;
  double motor = config.initial_motor_deg;
  double v = config.motor.max_output_speed_dps;
  for (const auto& cmd : script) {
    if (const auto* mv = std::get_if<MoveMotorTo>(&cmd)) {
      t += trapezoid_duration(mv->angle_deg - motor, v, config.motor.profile_accel_dps2);
      motor = mv->angle_deg;
    } else if (const auto* w = std::get_if<Wait>(&cmd)) {
      t += w->duration_s;
    } else if (const auto* sv = std::get_if<SetVelocity>(&cmd)) {
      v = sv->velocity_dps;
    }
  }
  return t;
}

struct IndependenceReport {
  double max_engaged_deviation_mm = 0.0;
  double disturbance_magnitude_mm = 0.0;
  double rom_min_rad = 0.0;
  double rom_max_rad = 0.0;
};

struct IndependenceOptions {
  double magnitude_mm = 5.0;
  std::uint64_t seed = 1;
  DisturbanceTarget target = DisturbanceTarget::Disengaged;
};

inline IndependenceReport run_independence(const PlantConfig& config, const IndependenceOptions& opts = {}) {
  const Script sweep = rom_sweep_script(config);
  const double window = nominal_script_duration(config, sweep);

  Script disturbed{InjectDisturbance{DisturbanceProfile::random_pulses(opts.seed, window, opts.magnitude_mm, opts.target)}};
  disturbed.insert(disturbed.end(), sweep.begin(), sweep.end());

  const Trace base = run_script(config, sweep);
  const Trace dist = run_script(config, disturbed);
  SWITCHSIM_REQUIRE(base.rows.size() == dist.rows.size(), ErrorCode::InvalidState,
                    "disturbed and baseline runs diverged in length");

  IndependenceReport report;
  report.disturbance_magnitude_mm = opts.magnitude_mm;
  report.rom_min_rad = std::numeric_limits<double>::infinity();
  report.rom_max_rad = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dist.rows.size(); ++i) {
    const SimState& d = dist.rows[i];
    const SimState& b = base.rows[i];
    report.rom_min_rad = std::min(report.rom_min_rad, d.joint_rad);
    report.rom_max_rad = std::max(report.rom_max_rad, d.joint_rad);
    const Side e = engaged_side(d.switch_state.mode);
    if (e == Side::None) continue;
    const double dev = e == Side::Plus ? d.payout_plus_mm - b.payout_plus_mm : d.payout_minus_mm - b.payout_minus_mm;
    report.max_engaged_deviation_mm = std::max(report.max_engaged_deviation_mm, std::abs(dev));
  }
  return report;
}

enum class RampPolicy {
  // Acceleration scales with commanded speed so the ramp time stays at the
  // calibrated v_max / a (drive-side ramp-time setting).
  ConstantRampTime,
  ConstantAcceleration,
};

struct SweepPoint {
  double omega_dps = 0.0;
  double t_switch_ms = 0.0;
  bool triangular = false;
  bool in_fit = false;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  double fit_a_deg = std::numeric_limits<double>::quiet_NaN();  // t = A / omega + B
  double fit_b_ms = std::numeric_limits<double>::quiet_NaN();
  double fit_r2 = std::numeric_limits<double>::quiet_NaN();
  bool excluded_any = false;
};

/// Ordinary least squares of t = A / omega + B. Inputs in deg/s and ms;
/// A in deg, B in ms.
inline void fit_inverse_speed(SweepCurve& curve) {
  double sx = 0.0, sy = 0.0, n = 0.0;
  for (const auto& p : curve.points) {
    if (!p.in_fit) continue;
    sx += 1.0 / p.omega_dps;
    sy += p.t_switch_ms * 1e-3;
    n += 1.0;
  }
  if (n < 2.0) return;
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : curve.points) {
    if (!p.in_fit) continue;
    const double dx = 1.0 / p.omega_dps - mx;
    const double dy = p.t_switch_ms * 1e-3 - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) return;
  const double a = sxy / sxx;
  curve.fit_a_deg = a;
  curve.fit_b_ms = (my - a * mx) * 1e3;
  curve.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
}

inline SweepCurve run_speed_sweep(const PlantConfig& config, const std::vector<double>& omegas_dps,
                                  RampPolicy policy = RampPolicy::ConstantRampTime) {
  SWITCHSIM_REQUIRE(!omegas_dps.empty(), ErrorCode::InvalidInput, "empty speed list");
  const double vmax = config.motor.max_output_speed_dps;
  const double ramp_time = vmax / config.motor.profile_accel_dps2;
  const double travel = traversal_motor_travel_deg(config);

  SweepCurve curve;
  double prev = 0.0;
  for (double w : omegas_dps) {
    SWITCHSIM_REQUIRE(w > prev, ErrorCode::InvalidInput, "speeds must be positive and strictly increasing");
    SWITCHSIM_REQUIRE(w <= vmax, ErrorCode::InvalidInput, "speed above max_output_speed");
    prev = w;
    PlantConfig c = config;
    if (policy == RampPolicy::ConstantRampTime && !std::isinf(config.motor.profile_accel_dps2)) {
      c.motor.profile_accel_dps2 = w / ramp_time;
    }
    SweepPoint p;
    p.omega_dps = w;
    p.t_switch_ms = simulate_switch_once(c, Side::Minus, w) * 1e3;
    p.triangular = is_triangular(travel, w, c.motor.profile_accel_dps2);
    p.in_fit = !p.triangular;
    curve.excluded_any = curve.excluded_any || p.triangular;
    curve.points.push_back(p);
  }
  fit_inverse_speed(curve);
  return curve;
}

}  // namespace switchsim
