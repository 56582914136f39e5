#pragma once

// Pitch-circle geometry of the switch mechanism: a driving (sun) gear on the
// motor axis, a switch (planet) gear riding an arc track around it, and two
// identical driven gears placed symmetrically at +/- phi_d from the midline.
//
// Angles are radians. Lengths are millimetres. The revolution coordinate psi
// is the polar angle of the switch-gear centre about the motor axis, measured
// from the midline, positive towards the "plus" driven gear.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "switchsim/error.hpp"
#include "switchsim/units.hpp"

namespace switchsim {

inline constexpr int kMinToothCount = 8;

struct GearSpec {
  int tooth_count = 20;
  double module_mm = 1.0;

  bool valid() const noexcept {
    return tooth_count >= kMinToothCount && std::isfinite(module_mm) && module_mm > 0.0;
  }

  bool operator==(const GearSpec&) const = default;
};

inline double pitch_radius(const GearSpec& g) noexcept {
  return g.module_mm * static_cast<double>(g.tooth_count) / 2.0;
}

struct MechanismLayout {
  GearSpec driving{20, 1.0};
  GearSpec switch_gear{16, 1.0};
  GearSpec driven{20, 1.0};
  double driven_center_distance_mm = 0.0;
  double driven_half_angle_rad = 0.0;
  double backlash_margin_mm = 0.2;

  /// Track radius: the switch meshes the driving gear everywhere on the track.
  double track_radius_mm() const noexcept { return pitch_radius(driving) + pitch_radius(switch_gear); }

  /// Centre distance at which switch and driven pitch circles are tangent.
  double mesh_distance_mm() const noexcept { return pitch_radius(switch_gear) + pitch_radius(driven); }

  bool operator==(const MechanismLayout&) const = default;
};

/// Driven-gear centre distance that puts the switch at pitch tangency with
/// the +phi_d driven gear when its centre sits at revolution angle psi_star.
/// Takes the larger root so the driven gear lies outside the track.
inline double solve_driven_distance(const GearSpec& driving, const GearSpec& switch_gear,
                                    const GearSpec& driven, double phi_d_rad, double psi_star_rad) {
  const double R = pitch_radius(driving) + pitch_radius(switch_gear);
  const double s = pitch_radius(switch_gear) + pitch_radius(driven);
  const double delta = psi_star_rad - phi_d_rad;
  const double disc = s * s - R * R * std::sin(delta) * std::sin(delta);
  SWITCHSIM_REQUIRE(disc >= 0.0, ErrorCode::NoEngagement,
                    "no driven-gear distance reaches tangency at the requested psi*");
  return R * std::cos(delta) + std::sqrt(disc);
}

/// The reference build: m = 1 mm, 20/16/20 teeth, phi_d = 25 deg, and D chosen
/// so that the full track travel is 19.8 deg.
inline MechanismLayout reference_layout() {
  MechanismLayout layout;
  layout.driving = {20, 1.0};
  layout.switch_gear = {16, 1.0};
  layout.driven = {20, 1.0};
  layout.driven_half_angle_rad = deg_to_rad(25.0);
  layout.driven_center_distance_mm =
      solve_driven_distance(layout.driving, layout.switch_gear, layout.driven,
                            layout.driven_half_angle_rad, deg_to_rad(9.9));
  layout.backlash_margin_mm = 0.2;
  return layout;
}

/// Symmetric open interval (-half_width, +half_width) of psi in which the
/// switch clears both driven gears by at least the backlash margin.
struct NeutralBand {
  double half_width_rad = 0.0;

  bool empty() const noexcept { return !(half_width_rad > 0.0); }
  bool contains(double psi_rad) const noexcept {
    return !empty() && psi_rad > -half_width_rad && psi_rad < half_width_rad;
  }
  double lower() const noexcept { return -half_width_rad; }
  double upper() const noexcept { return half_width_rad; }
};

struct EngagementSolution {
  double psi_star_rad = 0.0;
  double theta_track_rad = 0.0;
  NeutralBand neutral_band;
};

namespace detail {

// 1 - cos(psi - phi_d) at which the switch centre is at distance `target`
// from the +phi_d driven-gear centre. Law of cosines with the difference of
// squares factored, so grazing contact (value near 0) keeps full precision.
// Tangency exists iff the result lies in [0, 2].
inline double tangency_versine(const MechanismLayout& layout, double target) {
  const double R = layout.track_radius_mm();
  const double D = layout.driven_center_distance_mm;
  return (target - R + D) * (target + R - D) / (2.0 * R * D);
}

// |psi - phi_d| at tangency: acos(1 - v) = 2 asin(sqrt(v / 2)).
inline double tangency_offset(double versine) { return 2.0 * std::asin(std::sqrt(std::clamp(0.5 * versine, 0.0, 1.0))); }

inline bool placement_valid(const MechanismLayout& layout) noexcept {
  return std::isfinite(layout.driven_center_distance_mm) && layout.driven_center_distance_mm > 0.0 &&
         layout.driven_half_angle_rad > 0.0 && layout.driven_half_angle_rad < kPi / 2.0 &&
         std::isfinite(layout.backlash_margin_mm) && layout.backlash_margin_mm >= 0.0;
}

}  // namespace detail

inline EngagementSolution solve_engagement(const MechanismLayout& layout) {
  SWITCHSIM_REQUIRE(layout.driving.valid() && layout.switch_gear.valid() && layout.driven.valid(),
                    ErrorCode::InvalidInput, "gear spec violates tooth/module limits");
  SWITCHSIM_REQUIRE(detail::placement_valid(layout), ErrorCode::InvalidInput,
                    "driven-gear placement out of range");

  const double phi_d = layout.driven_half_angle_rad;
  const double v = detail::tangency_versine(layout, layout.mesh_distance_mm());
  SWITCHSIM_REQUIRE(v >= 0.0 && v <= 2.0, ErrorCode::NoEngagement,
                    "switch pitch circle never reaches the driven pitch circle");

  EngagementSolution sol;
  // Of the two roots phi_d -/+ offset, the switch arrives at the one nearer the midline.
  sol.psi_star_rad = phi_d - detail::tangency_offset(v);
  SWITCHSIM_REQUIRE(sol.psi_star_rad > 0.0, ErrorCode::TrackDegenerate,
                    "switch meshes a driven gear at the midline");
  sol.theta_track_rad = 2.0 * sol.psi_star_rad;

  // Band edge: tangency with the pitch circle grown by the backlash margin. If
  // no such tangency exists the switch never clears it and the band is empty.
  const double vb = detail::tangency_versine(layout, layout.mesh_distance_mm() + layout.backlash_margin_mm);
  sol.neutral_band.half_width_rad = vb > 2.0 ? 0.0 : std::max(0.0, phi_d - detail::tangency_offset(vb));
  return sol;
}

/// Motor output rotation per unit switch revolution when the switch does not
/// spin about its own axis (pure carry).
inline double kinematic_carry_ratio(const MechanismLayout& layout) noexcept {
  return 1.0 + pitch_radius(layout.switch_gear) / pitch_radius(layout.driving);
}

/// Spool-to-motor speed ratio through switch and driven gear.
inline double driven_speed_ratio(const MechanismLayout& layout) noexcept {
  return static_cast<double>(layout.driving.tooth_count) / static_cast<double>(layout.driven.tooth_count);
}

inline double envelope_diameter_mm(const MechanismLayout& layout) noexcept {
  const double rd = pitch_radius(layout.driving);
  const double rs = pitch_radius(layout.switch_gear);
  const double rg = pitch_radius(layout.driven);
  return 2.0 * std::max({layout.driven_center_distance_mm + rg, layout.track_radius_mm() + rs, rd});
}

enum class LayoutRule {
  InvalidGear,
  ModuleMismatch,
  InvalidPlacement,
  NoEngagement,
  TrackDegenerate,
  EmptyNeutralBand,
  DrivingDrivenInterference,
  SwitchDrivenInterference,
};

inline const char* to_string(LayoutRule rule) noexcept {
  switch (rule) {
    case LayoutRule::InvalidGear: return "invalid gear";
    case LayoutRule::ModuleMismatch: return "module mismatch";
    case LayoutRule::InvalidPlacement: return "invalid placement";
    case LayoutRule::NoEngagement: return "no engagement";
    case LayoutRule::TrackDegenerate: return "track degenerate";
    case LayoutRule::EmptyNeutralBand: return "empty neutral band";
    case LayoutRule::DrivingDrivenInterference: return "driving-driven interference";
    case LayoutRule::SwitchDrivenInterference: return "switch-driven interference";
  }
  return "unknown";
}

struct Violation {
  LayoutRule rule;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(LayoutRule rule) const noexcept {
    return std::any_of(violations.begin(), violations.end(),
                       [rule](const Violation& v) { return v.rule == rule; });
  }
};

inline ValidationReport validate_layout(const MechanismLayout& layout) {
  ValidationReport report;
  auto add = [&report](LayoutRule rule, std::string detail) {
    report.violations.push_back({rule, std::move(detail)});
  };

  const struct {
    const char* name;
    const GearSpec& gear;
  } gears[] = {{"driving", layout.driving}, {"switch", layout.switch_gear}, {"driven", layout.driven}};
  bool gears_ok = true;
  for (const auto& g : gears) {
    if (!g.gear.valid()) {
      gears_ok = false;
      add(LayoutRule::InvalidGear, std::string(g.name) + " gear needs >= 8 teeth and module > 0");
    }
  }
  if (layout.switch_gear.module_mm != layout.driving.module_mm) {
    add(LayoutRule::ModuleMismatch, "switch module differs from driving module");
  }
  if (layout.driven.module_mm != layout.driving.module_mm) {
    add(LayoutRule::ModuleMismatch, "driven module differs from driving module");
  }

  const bool placement_ok = detail::placement_valid(layout);
  if (!placement_ok) {
    add(LayoutRule::InvalidPlacement, "need D > 0, 0 < phi_d < 90 deg, backlash >= 0");
  }

  const double D = layout.driven_center_distance_mm;
  const double rd = pitch_radius(layout.driving);
  const double rg = pitch_radius(layout.driven);
  if (!(D >= rd + rg)) {
    add(LayoutRule::DrivingDrivenInterference, "driven pitch circle overlaps the driving gear");
  }

  // Switch at the midline: distance to either driven gear centre.
  const double R = layout.track_radius_mm();
  const double mid_dist =
      std::sqrt(std::max(0.0, R * R + D * D - 2.0 * R * D * std::cos(layout.driven_half_angle_rad)));
  if (!(mid_dist > layout.mesh_distance_mm())) {
    add(LayoutRule::SwitchDrivenInterference, "switch meshes a driven gear at the midline");
  }

  if (!gears_ok || !placement_ok) {
    add(LayoutRule::NoEngagement, "engagement undefined for an invalid layout");
    return report;
  }
  try {
    const auto sol = solve_engagement(layout);
    if (sol.neutral_band.empty()) {
      add(LayoutRule::EmptyNeutralBand, "no track region clears both driven gears by the backlash margin");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TrackDegenerate) {
      add(LayoutRule::TrackDegenerate, e.what());
    } else {
      add(LayoutRule::NoEngagement, e.what());
    }
  }
  return report;
}

}  // namespace switchsim
