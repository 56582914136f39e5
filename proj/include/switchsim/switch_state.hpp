#pragma once

// State machine of the switch gear. Positive motor rotation pushes the switch
// towards +psi* (the plus driven gear); while engaged in that sense the motor
// drives the plus spool, and reversing releases it and sends the switch back
// along the track.

#include <cmath>
#include <string>
#include <vector>

#include "switchsim/error.hpp"
#include "switchsim/gear_geometry.hpp"

namespace switchsim {

enum class SwitchMode { EngagedPlus, EngagedMinus, Traversing, Neutral };

enum class Side { Plus, Minus, None };

inline const char* to_string(SwitchMode mode) noexcept {
  switch (mode) {
    case SwitchMode::EngagedPlus: return "engaged_plus";
    case SwitchMode::EngagedMinus: return "engaged_minus";
    case SwitchMode::Traversing: return "traversing";
    case SwitchMode::Neutral: return "neutral";
  }
  return "unknown";
}

inline const char* to_string(Side side) noexcept {
  switch (side) {
    case Side::Plus: return "plus";
    case Side::Minus: return "minus";
    case Side::None: return "none";
  }
  return "unknown";
}

inline Side engaged_side(SwitchMode mode) noexcept {
  if (mode == SwitchMode::EngagedPlus) return Side::Plus;
  if (mode == SwitchMode::EngagedMinus) return Side::Minus;
  return Side::None;
}

struct SwitchState {
  SwitchMode mode = SwitchMode::Neutral;
  double psi_rad = 0.0;
  int last_motor_direction = 0;

  static SwitchState engaged(Side side, const EngagementSolution& eng) {
    SwitchState s;
    s.mode = side == Side::Plus ? SwitchMode::EngagedPlus : SwitchMode::EngagedMinus;
    s.psi_rad = side == Side::Plus ? eng.psi_star_rad : -eng.psi_star_rad;
    return s;
  }

  bool operator==(const SwitchState&) const = default;
};

/// Motor output rotation per unit switch revolution. k_eff exceeds the pure
/// carry ratio k_kin when the switch spins about its own axis (slip).
class TraversalModel {
 public:
  TraversalModel() = default;

  static TraversalModel from_slip(double k_kin, double slip) {
    SWITCHSIM_REQUIRE(k_kin >= 1.0 && std::isfinite(k_kin), ErrorCode::InvalidInput, "k_kin must be >= 1");
    SWITCHSIM_REQUIRE(slip >= 0.0 && slip < 1.0, ErrorCode::InvalidInput, "slip must lie in [0, 1)");
    return TraversalModel(k_kin, k_kin / (1.0 - slip));
  }

  static TraversalModel from_ratio(double k_kin, double k_eff) {
    SWITCHSIM_REQUIRE(k_kin >= 1.0 && std::isfinite(k_kin), ErrorCode::InvalidInput, "k_kin must be >= 1");
    SWITCHSIM_REQUIRE(std::isfinite(k_eff), ErrorCode::InvalidInput, "k_eff must be finite");
    SWITCHSIM_REQUIRE(k_eff >= k_kin, ErrorCode::SubKinematicRatio, "effective ratio below the pure-carry ratio");
    return TraversalModel(k_kin, k_eff);
  }

  double k_kin() const noexcept { return k_kin_; }
  double k_eff() const noexcept { return k_eff_; }
  double slip() const noexcept { return 1.0 - k_kin_ / k_eff_; }

 private:
  TraversalModel(double k_kin, double k_eff) : k_kin_(k_kin), k_eff_(k_eff) {}

  double k_kin_ = 1.0;
  double k_eff_ = 1.0;
};

/// Slip from one measured pair of motor travel and switch revolution.
inline TraversalModel calibrate_slip(double motor_travel_rad, double revolution_travel_rad, double k_kin) {
  SWITCHSIM_REQUIRE(revolution_travel_rad > 0.0, ErrorCode::InvalidInput, "revolution travel must be positive");
  const double k_eff = motor_travel_rad / revolution_travel_rad;
  SWITCHSIM_REQUIRE(k_eff >= k_kin, ErrorCode::SubKinematicRatio,
                    "measured ratio " + std::to_string(k_eff) + " below kinematic bound " + std::to_string(k_kin));
  return TraversalModel::from_ratio(k_kin, k_eff);
}

enum class SwitchEventKind { Disengaged, EnteredNeutral, ExitedNeutral, Engaged, SpoolDriven };

inline const char* to_string(SwitchEventKind kind) noexcept {
  switch (kind) {
    case SwitchEventKind::Disengaged: return "disengaged";
    case SwitchEventKind::EnteredNeutral: return "entered_neutral";
    case SwitchEventKind::ExitedNeutral: return "exited_neutral";
    case SwitchEventKind::Engaged: return "engaged";
    case SwitchEventKind::SpoolDriven: return "spool_driven";
  }
  return "unknown";
}

struct SwitchEvent {
  SwitchEventKind kind;
  Side side = Side::None;
  double psi_rad = 0.0;
  // Portion of the step's motor rotation consumed when the event occurs.
  double motor_offset_rad = 0.0;
  // Spool rotation driven in this step (SpoolDriven, or residual after Engaged).
  double spool_rotation_rad = 0.0;
};

struct SwitchStep {
  SwitchState state;
  std::vector<SwitchEvent> events;
};

// Arrival tolerance at a track endpoint; absorbs summation drift of step deltas.
inline constexpr double kEndpointSnapRad = 1e-10;

inline void check_switch_state(const SwitchState& state, const EngagementSolution& eng) {
  const double psi = state.psi_rad;
  const double ps = eng.psi_star_rad;
  bool ok = std::isfinite(psi) && psi >= -ps && psi <= ps;
  switch (state.mode) {
    case SwitchMode::EngagedPlus: ok = ok && psi == ps; break;
    case SwitchMode::EngagedMinus: ok = ok && psi == -ps; break;
    case SwitchMode::Traversing: ok = ok && psi > -ps && psi < ps; break;
    case SwitchMode::Neutral: ok = ok && eng.neutral_band.contains(psi); break;
  }
  SWITCHSIM_REQUIRE(ok, ErrorCode::InvalidState,
                    std::string("psi inconsistent with mode ") + to_string(state.mode));
}

inline SwitchStep step_switch(const SwitchState& state, const TraversalModel& model,
                              const EngagementSolution& eng, double motor_delta_rad,
                              double driven_ratio = 1.0) {
  SWITCHSIM_REQUIRE(std::isfinite(motor_delta_rad), ErrorCode::InvalidInput, "motor delta not finite");
  check_switch_state(state, eng);

  SwitchStep out{state, {}};
  SwitchState& s = out.state;

  if (motor_delta_rad == 0.0) {
    if (s.mode == SwitchMode::Traversing && eng.neutral_band.contains(s.psi_rad)) s.mode = SwitchMode::Neutral;
    return out;
  }

  const int dir = motor_delta_rad > 0.0 ? 1 : -1;
  s.last_motor_direction = dir;

  if ((s.mode == SwitchMode::EngagedPlus && dir > 0) || (s.mode == SwitchMode::EngagedMinus && dir < 0)) {
    out.events.push_back({SwitchEventKind::SpoolDriven, engaged_side(s.mode), s.psi_rad, 0.0,
                          motor_delta_rad * driven_ratio});
    return out;
  }

  if (s.mode == SwitchMode::EngagedPlus || s.mode == SwitchMode::EngagedMinus) {
    out.events.push_back({SwitchEventKind::Disengaged, engaged_side(s.mode), s.psi_rad, 0.0, 0.0});
  }
  s.mode = SwitchMode::Traversing;

  const double k = model.k_eff();
  const double start = s.psi_rad;
  const double target = dir * eng.psi_star_rad;
  const double to_endpoint = (target - start) * k;
  const bool reaches = std::abs(motor_delta_rad) >= std::abs(to_endpoint) - kEndpointSnapRad * k;
  const double end = reaches ? target : start + motor_delta_rad / k;

  if (!eng.neutral_band.empty()) {
    const double w = eng.neutral_band.half_width_rad;
    const double enter = -dir * w;
    const double exit = dir * w;
    const bool crosses_enter = dir > 0 ? (start <= enter && end > enter) : (start >= enter && end < enter);
    const bool crosses_exit = dir > 0 ? (start < exit && end >= exit) : (start > exit && end <= exit);
    if (crosses_enter) {
      out.events.push_back({SwitchEventKind::EnteredNeutral, Side::None, enter, (enter - start) * k, 0.0});
    }
    if (crosses_exit) {
      out.events.push_back({SwitchEventKind::ExitedNeutral, Side::None, exit, (exit - start) * k, 0.0});
    }
  }

  s.psi_rad = end;
  if (reaches) {
    s.mode = dir > 0 ? SwitchMode::EngagedPlus : SwitchMode::EngagedMinus;
    double residual = motor_delta_rad - to_endpoint;
    if (residual * dir < 0.0) residual = 0.0;
    out.events.push_back({SwitchEventKind::Engaged, engaged_side(s.mode), end, to_endpoint, residual * driven_ratio});
  }
  return out;
}

struct CouplingReport {
  Side driven_spool = Side::None;
  double speed_ratio = 0.0;
  int direction_sign = 0;
};

inline CouplingReport coupling(const SwitchState& state, const MechanismLayout& layout) {
  const Side side = engaged_side(state.mode);
  if (side == Side::None) return {};
  // Two external meshes (driving->switch->driven): the driven gear turns with the motor.
  return {side, driven_speed_ratio(layout), +1};
}

}  // namespace switchsim
