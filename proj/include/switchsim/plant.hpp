#pragma once

// Quasi-static simulation of the test rig: one motor, the switch mechanism,
// two clock-spring spools, two cable paths and a 1-DoF hinge.
//
// The plus (agonist) cable follows its path in the joint coordinate q; the
// minus (antagonist) cable follows its path in -q, so winding plus drives q up
// and winding minus drives q down. The engaged cable is inextensible and
// positions the joint; the disengaged cable is kept taut by its spring and
// simply pays out whatever its path needs at the current q.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "switchsim/cable_path.hpp"
#include "switchsim/error.hpp"
#include "switchsim/gear_geometry.hpp"
#include "switchsim/motion_profile.hpp"
#include "switchsim/switch_state.hpp"
#include "switchsim/units.hpp"

namespace switchsim {

struct SpoolModel {
  double radius_mm = 10.0;
  double preload_Nmm = 5.0;
  double rate_Nmm_per_deg = 0.05;
  double payout_at_zero_mm = 250.0;

  void validate() const {
    SWITCHSIM_REQUIRE(std::isfinite(radius_mm) && radius_mm > 0.0, ErrorCode::InvalidInput, "spool radius must be > 0");
    SWITCHSIM_REQUIRE(std::isfinite(preload_Nmm) && preload_Nmm > 0.0, ErrorCode::InvalidInput,
                      "spring preload must be > 0");
    SWITCHSIM_REQUIRE(std::isfinite(rate_Nmm_per_deg) && rate_Nmm_per_deg >= 0.0, ErrorCode::InvalidInput,
                      "spring rate must be >= 0");
    SWITCHSIM_REQUIRE(std::isfinite(payout_at_zero_mm), ErrorCode::InvalidInput, "payout_at_zero not finite");
  }

  /// Spool angle (deg) measured from the zero-payout reference.
  double spool_angle_deg(double payout_mm) const noexcept {
    return rad_to_deg((payout_mm - payout_at_zero_mm) / radius_mm);
  }

  double tension_N(double payout_mm) const noexcept {
    return (preload_Nmm + rate_Nmm_per_deg * spool_angle_deg(payout_mm)) / radius_mm;
  }

  bool operator==(const SpoolModel&) const = default;
};

struct PlantConfig {
  MechanismLayout layout = reference_layout();
  TraversalModel traversal;
  MotorModel motor;
  CablePath agonist = CablePath::linear(300.0, 25.0);
  CablePath antagonist = CablePath::curved(300.0, 25.0, 5.0);
  SpoolModel spools;
  double dt_s = 1e-3;
  SwitchMode initial_mode = SwitchMode::EngagedPlus;
  double initial_joint_rad = 0.0;
  double initial_motor_deg = 0.0;
};

enum class DisturbanceTarget { Disengaged, Engaged, Joint };

inline const char* to_string(DisturbanceTarget t) noexcept {
  switch (t) {
    case DisturbanceTarget::Disengaged: return "disengaged";
    case DisturbanceTarget::Engaged: return "engaged";
    case DisturbanceTarget::Joint: return "joint";
  }
  return "unknown";
}

struct DisturbancePulse {
  double start_s = 0.0;
  double duration_s = 0.0;
  double magnitude = 0.0;  // mm of extra payout, or deg for Joint

  bool operator==(const DisturbancePulse&) const = default;
};

/// Rectangular pulses, times relative to the moment of injection.
struct DisturbanceProfile {
  DisturbanceTarget target = DisturbanceTarget::Disengaged;
  std::vector<DisturbancePulse> pulses;

  double value_at(double tau) const noexcept {
    double v = 0.0;
    for (const auto& p : pulses) {
      if (tau >= p.start_s && tau < p.start_s + p.duration_s) v += p.magnitude;
    }
    return v;
  }

  /// Pulses of random timing and height in (0.5, 1] x magnitude over [0, window_s).
  static DisturbanceProfile random_pulses(std::uint64_t seed, double window_s, double magnitude,
                                          DisturbanceTarget target = DisturbanceTarget::Disengaged) {
    DisturbanceProfile profile{target, {}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> gap(0.05, 0.25);
    std::uniform_real_distribution<double> width(0.02, 0.08);
    std::uniform_real_distribution<double> height(0.5, 1.0);
    double t = gap(rng);
    while (t < window_s) {
      const double w = width(rng);
      profile.pulses.push_back({t, w, magnitude * height(rng)});
      t += w + gap(rng);
    }
    return profile;
  }

  bool operator==(const DisturbanceProfile&) const = default;
};

struct MoveMotorTo {
  double angle_deg;
  bool operator==(const MoveMotorTo&) const = default;
};
struct SetVelocity {
  double velocity_dps;
  bool operator==(const SetVelocity&) const = default;
};
struct InjectDisturbance {
  DisturbanceProfile profile;
  bool operator==(const InjectDisturbance&) const = default;
};
struct Wait {
  double duration_s;
  bool operator==(const Wait&) const = default;
};

using ScriptCommand = std::variant<MoveMotorTo, SetVelocity, InjectDisturbance, Wait>;
using Script = std::vector<ScriptCommand>;

struct SimState {
  double t_s = 0.0;
  double motor_deg = 0.0;
  SwitchState switch_state;
  double joint_rad = 0.0;
  double payout_plus_mm = 0.0;
  double payout_minus_mm = 0.0;
  double tension_plus_N = 0.0;
  double tension_minus_N = 0.0;
  double disturbance_mm = 0.0;
  // Kinematic payout of the engaged cable; tracks spool winding exactly.
  double engaged_cable_mm = 0.0;

  bool operator==(const SimState&) const = default;
};

struct TraceEvent {
  double t_s;
  SwitchEvent event;
};

struct Trace {
  double dt_s = 1e-3;
  std::vector<SimState> rows;
  std::vector<TraceEvent> events;
};

/// External inputs sampled at the end of a step.
struct MechanismInputs {
  double cable_disturbance_mm = 0.0;
  DisturbanceTarget cable_target = DisturbanceTarget::Disengaged;
  double joint_push_rad = 0.0;  // change over this step; applied only when no spool is engaged
};

struct MechanismStep {
  SimState state;
  std::vector<SwitchEvent> events;
};

/// Stateless plant kernel: config plus the derived engagement solution.
class Mechanism {
 public:
  explicit Mechanism(PlantConfig config) : config_(std::move(config)) {
    engagement_ = solve_engagement(config_.layout);
    config_.motor.validate();
    config_.spools.validate();
    SWITCHSIM_REQUIRE(config_.dt_s > 0.0 && std::isfinite(config_.dt_s), ErrorCode::InvalidInput, "dt must be > 0");
    ratio_ = driven_speed_ratio(config_.layout);
  }

  const PlantConfig& config() const noexcept { return config_; }
  const EngagementSolution& engagement() const noexcept { return engagement_; }

  double cable_length(Side side, double joint_rad) const {
    return side == Side::Plus ? config_.agonist.length(joint_rad) : config_.antagonist.length(-joint_rad);
  }

  double joint_from_cable(Side side, double length_mm) const {
    try {
      return side == Side::Plus ? joint_angle_from_payout(config_.agonist, length_mm)
                                : -joint_angle_from_payout(config_.antagonist, length_mm);
    } catch (const Error& e) {
      throw Error(ErrorCode::RangeExceeded, std::string("joint leaves [-90, 90] deg: ") + e.what());
    }
  }

  SimState initial_state() const {
    SimState s;
    s.t_s = 0.0;
    s.motor_deg = config_.initial_motor_deg;
    SWITCHSIM_REQUIRE(std::abs(config_.initial_joint_rad) <= kJointLimitRad, ErrorCode::RangeExceeded,
                      "initial joint angle outside [-90, 90] deg");
    s.joint_rad = config_.initial_joint_rad;
    switch (config_.initial_mode) {
      case SwitchMode::EngagedPlus: s.switch_state = SwitchState::engaged(Side::Plus, engagement_); break;
      case SwitchMode::EngagedMinus: s.switch_state = SwitchState::engaged(Side::Minus, engagement_); break;
      case SwitchMode::Neutral:
      case SwitchMode::Traversing:
        s.switch_state.psi_rad = 0.0;
        s.switch_state.mode =
            engagement_.neutral_band.contains(0.0) ? SwitchMode::Neutral : SwitchMode::Traversing;
        break;
    }
    const Side e = engaged_side(s.switch_state.mode);
    if (e != Side::None) s.engaged_cable_mm = cable_length(e, s.joint_rad);
    update_payouts(s, {});
    return s;
  }

  MechanismStep advance(const SimState& s, double motor_deg, double t_s, const MechanismInputs& in) const {
    MechanismStep out{s, {}};
    SimState& n = out.state;
    n.t_s = t_s;
    n.motor_deg = motor_deg;

    auto sw = step_switch(s.switch_state, config_.traversal, engagement_, deg_to_rad(motor_deg - s.motor_deg), ratio_);
    n.switch_state = sw.state;
    for (const auto& ev : sw.events) {
      if (ev.kind == SwitchEventKind::Engaged) n.engaged_cable_mm = cable_length(ev.side, n.joint_rad);
      if (ev.kind == SwitchEventKind::Engaged || ev.kind == SwitchEventKind::SpoolDriven) {
        if (ev.spool_rotation_rad != 0.0) {
          n.engaged_cable_mm -= config_.spools.radius_mm * std::abs(ev.spool_rotation_rad);
          n.joint_rad = joint_from_cable(ev.side, n.engaged_cable_mm);
        }
      }
    }
    out.events = std::move(sw.events);

    if (engaged_side(n.switch_state.mode) == Side::None && in.joint_push_rad != 0.0) {
      n.joint_rad += in.joint_push_rad;
      SWITCHSIM_REQUIRE(std::abs(n.joint_rad) <= kJointLimitRad, ErrorCode::RangeExceeded,
                        "joint pushed outside [-90, 90] deg");
    }
    update_payouts(n, in);
    return out;
  }

 private:
  void update_payouts(SimState& s, const MechanismInputs& in) const {
    const Side e = engaged_side(s.switch_state.mode);
    const double d = in.cable_disturbance_mm;
    s.disturbance_mm = in.cable_target == DisturbanceTarget::Joint ? 0.0 : d;
    auto payout = [&](Side side) {
      if (side == e) return s.engaged_cable_mm + (in.cable_target == DisturbanceTarget::Engaged ? d : 0.0);
      return cable_length(side, s.joint_rad) + (in.cable_target == DisturbanceTarget::Disengaged ? d : 0.0);
    };
    s.payout_plus_mm = payout(Side::Plus);
    s.payout_minus_mm = payout(Side::Minus);
    s.tension_plus_N = config_.spools.tension_N(s.payout_plus_mm);
    s.tension_minus_N = config_.spools.tension_N(s.payout_minus_mm);
    SWITCHSIM_REQUIRE(s.tension_plus_N > 0.0 && s.tension_minus_N > 0.0, ErrorCode::SlackDetected,
                      "spring range exhausted, cable tension <= 0");
  }

  PlantConfig config_;
  EngagementSolution engagement_;
  double ratio_ = 1.0;
};

/// Time-stepped driver: owns the motor command state and records the trace.
class Simulator {
 public:
  explicit Simulator(PlantConfig config)
      : mech_(std::move(config)), profile_velocity_dps_(mech_.config().motor.max_output_speed_dps) {
    state_ = mech_.initial_state();
    drive_ = Idle{state_.motor_deg};
    trace_.dt_s = mech_.config().dt_s;
    trace_.rows.push_back(state_);
  }

  const SimState& state() const noexcept { return state_; }
  const Trace& trace() const noexcept { return trace_; }
  Trace take_trace() { return std::move(trace_); }
  const Mechanism& mechanism() const noexcept { return mech_; }
  double time() const noexcept { return static_cast<double>(step_index_) * mech_.config().dt_s; }

  void execute(const ScriptCommand& cmd) {
    std::visit([this](const auto& c) { apply(c); }, cmd);
  }

  void run(const Script& script) {
    for (const auto& cmd : script) execute(cmd);
  }

  /// Steps until the clock reaches `t_s` (no-op if already there).
  void run_until(double t_s) {
    const double dt = mech_.config().dt_s;
    while (time() < t_s - 1e-9 * dt) step();
  }

  void step() {
    const double dt = mech_.config().dt_s;
    const double t_old = time();
    const double t_new = static_cast<double>(step_index_ + 1) * dt;

    MechanismInputs in;
    for (const auto& [t0, prof] : disturbances_) {
      if (prof.target == DisturbanceTarget::Joint) {
        in.joint_push_rad += deg_to_rad(prof.value_at(t_new - t0) - prof.value_at(t_old - t0));
      } else {
        in.cable_target = prof.target;
        in.cable_disturbance_mm += prof.value_at(t_new - t0);
      }
    }

    const double motor_old = state_.motor_deg;
    const double motor_new = motor_angle_at(t_new);
    MechanismStep res;
    try {
      res = mech_.advance(state_, motor_new, t_new, in);
    } catch (const Error& e) {
      throw Error(e.code(), "at t=" + std::to_string(t_new) + " s: " + e.what());
    }
    for (const auto& ev : res.events) {
      trace_.events.push_back({event_time(t_old, t_new, motor_old, ev.motor_offset_rad), ev});
    }
    state_ = res.state;
    ++step_index_;
    trace_.rows.push_back(state_);
    settle_drive(t_new);
  }

 private:
  struct Idle {
    double angle_deg;
  };
  struct PositionMove {
    TrapezoidProfile profile;
    double t_start;
  };
  struct VelocityMove {
    VelocityRamp ramp;
    double t_start;
  };
  using Drive = std::variant<Idle, PositionMove, VelocityMove>;

  double motor_angle_at(double t) const {
    if (const auto* idle = std::get_if<Idle>(&drive_)) return idle->angle_deg;
    if (const auto* pm = std::get_if<PositionMove>(&drive_)) return pm->profile.position(t - pm->t_start);
    const auto& vm = std::get<VelocityMove>(drive_);
    return vm.ramp.position(t - vm.t_start);
  }

  double motor_velocity_at(double t) const {
    if (const auto* vm = std::get_if<VelocityMove>(&drive_)) return vm->ramp.velocity(t - vm->t_start);
    return 0.0;
  }

  // Time within [t_old, t_new] at which the motor has turned `offset_rad` past motor_old.
  double event_time(double t_old, double t_new, double motor_old, double offset_rad) const {
    const double target = std::abs(rad_to_deg(offset_rad));
    if (target <= 0.0) return t_old;
    if (const auto* pm = std::get_if<PositionMove>(&drive_)) {
      const double base = std::abs(motor_old - pm->profile.start());
      return std::clamp(pm->t_start + pm->profile.time_at_offset(base + target), t_old, t_new);
    }
    double lo = t_old;
    double hi = t_new;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (std::abs(motor_angle_at(mid) - motor_old) < target) lo = mid; else hi = mid;
    }
    return hi;
  }

  void settle_drive(double t) {
    if (const auto* pm = std::get_if<PositionMove>(&drive_)) {
      if (t >= pm->t_start + pm->profile.duration()) drive_ = Idle{pm->profile.end()};
    }
  }

  bool position_move_active() const { return std::holds_alternative<PositionMove>(drive_); }

  void apply(const MoveMotorTo& cmd) {
    SWITCHSIM_REQUIRE(mech_.config().motor.control_mode == ControlMode::ProfilePosition, ErrorCode::ScriptError,
                      "MoveMotorTo requires profile position mode");
    SWITCHSIM_REQUIRE(std::isfinite(cmd.angle_deg), ErrorCode::ScriptError, "move target not finite");
    const double delta = cmd.angle_deg - state_.motor_deg;
    if (delta == 0.0) return;
    const TrapezoidProfile profile(state_.motor_deg, delta, profile_velocity_dps_,
                                   mech_.config().motor.profile_accel_dps2);
    drive_ = PositionMove{profile, time()};
    while (position_move_active()) step();
  }

  void apply(const SetVelocity& cmd) {
    const double vmax = mech_.config().motor.max_output_speed_dps;
    if (mech_.config().motor.control_mode == ControlMode::ProfilePosition) {
      SWITCHSIM_REQUIRE(cmd.velocity_dps > 0.0 && cmd.velocity_dps <= vmax, ErrorCode::ScriptError,
                        "profile velocity must lie in (0, max_output_speed]");
      profile_velocity_dps_ = cmd.velocity_dps;
      return;
    }
    SWITCHSIM_REQUIRE(std::abs(cmd.velocity_dps) <= vmax, ErrorCode::ScriptError,
                      "commanded velocity exceeds max_output_speed");
    const double t = time();
    drive_ = VelocityMove{VelocityRamp(state_.motor_deg, motor_velocity_at(t), cmd.velocity_dps,
                                       mech_.config().motor.profile_accel_dps2),
                          t};
  }

  void apply(const InjectDisturbance& cmd) { disturbances_.emplace_back(time(), cmd.profile); }

  void apply(const Wait& cmd) {
    SWITCHSIM_REQUIRE(cmd.duration_s >= 0.0 && std::isfinite(cmd.duration_s), ErrorCode::ScriptError,
                      "wait duration must be >= 0");
    const std::int64_t steps = static_cast<std::int64_t>(std::llround(cmd.duration_s / mech_.config().dt_s));
    for (std::int64_t i = 0; i < steps; ++i) step();
  }

  Mechanism mech_;
  SimState state_;
  Drive drive_;
  double profile_velocity_dps_;
  std::int64_t step_index_ = 0;
  std::vector<std::pair<double, DisturbanceProfile>> disturbances_;
  Trace trace_;
};

inline constexpr double kPaperMotorTravelDeg = 122.6;
inline constexpr double kPaperRevolutionTravelDeg = 19.8;
inline constexpr double kPaperSwitchTimeUpMs = 302.0;
inline constexpr double kPaperSwitchTimeDownMs = 298.0;

/// Reference rig: reference layout, slip calibrated from 122.6 deg of motor
/// rotation per 19.8 deg of revolution, 720 deg/s output speed, and profile
/// acceleration calibrated so one traversal takes 302 ms.
inline PlantConfig reference_plant_config() {
  PlantConfig c;
  c.layout = reference_layout();
  c.traversal = calibrate_slip(deg_to_rad(kPaperMotorTravelDeg), deg_to_rad(kPaperRevolutionTravelDeg),
                               kinematic_carry_ratio(c.layout));
  const double theta_deg = rad_to_deg(solve_engagement(c.layout).theta_track_rad);
  c.motor.profile_accel_dps2 = calibrate_profile_accel(kPaperSwitchTimeUpMs * 1e-3, c.traversal.k_eff() * theta_deg,
                                                       c.motor.max_output_speed_dps);
  return c;
}

/// Runs `script` from the initial state, then keeps stepping until at least
/// `min_duration_s` of simulated time is covered.
inline Trace run_script(const PlantConfig& config, const Script& script, double min_duration_s = 0.0) {
  Simulator sim(config);
  sim.run(script);
  sim.run_until(min_duration_s);
  return sim.take_trace();
}

}  // namespace switchsim
