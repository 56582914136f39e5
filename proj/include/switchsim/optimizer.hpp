#pragma once

// Exhaustive search over gear tooth counts, module and placement for the
// layout with the shortest predicted switching time. Predictions hold the
// slip measured on the reference build fixed for every candidate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "switchsim/error.hpp"
#include "switchsim/gear_geometry.hpp"
#include "switchsim/motion_profile.hpp"
#include "switchsim/switch_state.hpp"
#include "switchsim/units.hpp"

namespace switchsim {

struct ToothRange {
  int lo = kMinToothCount;
  int hi = kMinToothCount;

  std::size_t size() const noexcept { return hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0; }
  bool operator==(const ToothRange&) const = default;
};

enum class DistancePolicy { SolveFromPsiStar, Grid };

struct DesignSpace {
  ToothRange driving{20, 20};
  ToothRange switch_gear{16, 16};
  ToothRange driven{20, 20};
  std::vector<double> modules_mm{1.0};
  std::vector<double> phi_d_rad{deg_to_rad(25.0)};
  DistancePolicy distance_policy = DistancePolicy::SolveFromPsiStar;
  std::vector<double> psi_star_rad{deg_to_rad(9.9)};
  std::vector<double> distance_mm;
  double backlash_mm = 0.2;

  std::size_t placement_count() const noexcept {
    return distance_policy == DistancePolicy::SolveFromPsiStar ? psi_star_rad.size() : distance_mm.size();
  }

  /// Product of all grid sizes, saturating at SIZE_MAX.
  std::size_t size() const noexcept {
    const std::size_t factors[] = {modules_mm.size(), driving.size(), switch_gear.size(),
                                   driven.size(),     phi_d_rad.size(), placement_count()};
    std::size_t n = 1;
    for (std::size_t f : factors) {
      if (f == 0) return 0;
      if (n > std::numeric_limits<std::size_t>::max() / f) return std::numeric_limits<std::size_t>::max();
      n *= f;
    }
    return n;
  }

  void validate() const {
    SWITCHSIM_REQUIRE(driving.lo >= kMinToothCount && switch_gear.lo >= kMinToothCount &&
                          driven.lo >= kMinToothCount,
                      ErrorCode::InvalidInput, "tooth ranges must start at >= 8 teeth");
    SWITCHSIM_REQUIRE(size() > 0, ErrorCode::InvalidInput, "design space has an empty dimension");
  }
};

struct DesignConstraints {
  double envelope_max_diameter_mm = std::numeric_limits<double>::infinity();
  double driven_ratio_min = 0.0;
  double driven_ratio_max = std::numeric_limits<double>::infinity();
};

struct DesignResult {
  MechanismLayout layout;
  double t_switch_ms = 0.0;
  double theta_rad = 0.0;
  double k_eff = 0.0;
  double motor_travel_deg = 0.0;
  double driven_ratio = 0.0;
  double envelope_mm = 0.0;
  ValidationReport validity;
};

inline DesignResult evaluate_design(const MechanismLayout& layout, double slip, const MotorModel& motor) {
  DesignResult r;
  r.layout = layout;
  r.validity = validate_layout(layout);
  if (!r.validity.ok()) {
    std::string msg = "layout invalid:";
    for (const auto& v : r.validity.violations) msg += std::string(" [") + to_string(v.rule) + "]";
    throw Error(ErrorCode::InvalidDesign, msg);
  }
  const auto eng = solve_engagement(layout);
  const auto model = TraversalModel::from_slip(kinematic_carry_ratio(layout), slip);
  r.theta_rad = eng.theta_track_rad;
  r.k_eff = model.k_eff();
  r.motor_travel_deg = r.k_eff * rad_to_deg(r.theta_rad);
  r.t_switch_ms = trapezoid_duration(r.motor_travel_deg, motor.max_output_speed_dps, motor.profile_accel_dps2) * 1e3;
  r.driven_ratio = driven_speed_ratio(layout);
  r.envelope_mm = envelope_diameter_mm(layout);
  return r;
}

/// Switching times are ranked at 1 ns resolution. Layouts solved from the
/// same psi* share theta up to rounding, and without the quantum that noise
/// would decide their order instead of the envelope and tooth tie-breaks.
inline std::int64_t ranking_time_ns(double t_switch_ms) noexcept { return std::llround(t_switch_ms * 1e6); }

/// Strict total order used for ranking: time, then envelope, then tooth
/// counts, then the remaining layout parameters.
inline bool design_before(const DesignResult& a, const DesignResult& b) {
  auto key = [](const DesignResult& r) {
    return std::make_tuple(ranking_time_ns(r.t_switch_ms), r.envelope_mm, r.layout.driving.tooth_count,
                           r.layout.switch_gear.tooth_count, r.layout.driven.tooth_count, r.layout.driving.module_mm,
                           r.layout.driven_half_angle_rad, r.layout.driven_center_distance_mm);
  };
  return key(a) < key(b);
}

inline constexpr std::size_t kDefaultDesignCap = 1'000'000;

namespace detail {

// Decodes a flat index into a candidate layout. Returns false when no
// driven-gear distance exists for the requested psi*.
inline bool candidate_layout(const DesignSpace& space, std::size_t index, MechanismLayout& out) {
  const std::size_t np = space.placement_count();
  const std::size_t placement = index % np;
  index /= np;
  const std::size_t phi = index % space.phi_d_rad.size();
  index /= space.phi_d_rad.size();
  const int zg = space.driven.lo + static_cast<int>(index % space.driven.size());
  index /= space.driven.size();
  const int zs = space.switch_gear.lo + static_cast<int>(index % space.switch_gear.size());
  index /= space.switch_gear.size();
  const int zd = space.driving.lo + static_cast<int>(index % space.driving.size());
  index /= space.driving.size();
  const double m = space.modules_mm[index];

  out.driving = {zd, m};
  out.switch_gear = {zs, m};
  out.driven = {zg, m};
  out.driven_half_angle_rad = space.phi_d_rad[phi];
  out.backlash_margin_mm = space.backlash_mm;
  if (space.distance_policy == DistancePolicy::Grid) {
    out.driven_center_distance_mm = space.distance_mm[placement];
    return true;
  }
  try {
    out.driven_center_distance_mm = solve_driven_distance(out.driving, out.switch_gear, out.driven,
                                                          out.driven_half_angle_rad, space.psi_star_rad[placement]);
  } catch (const Error&) {
    return false;
  }
  return true;
}

inline void evaluate_range(const DesignSpace& space, const DesignConstraints& constraints, double slip,
                           const MotorModel& motor, std::size_t begin, std::size_t end,
                           std::vector<DesignResult>& out) {
  MechanismLayout layout;
  for (std::size_t i = begin; i < end; ++i) {
    if (!candidate_layout(space, i, layout)) continue;
    if (!validate_layout(layout).ok()) continue;
    DesignResult r = evaluate_design(layout, slip, motor);
    if (r.envelope_mm > constraints.envelope_max_diameter_mm) continue;
    if (r.driven_ratio < constraints.driven_ratio_min || r.driven_ratio > constraints.driven_ratio_max) continue;
    out.push_back(std::move(r));
  }
}

}  // namespace detail

/// Enumerates every candidate, drops invalid or constraint-violating ones and
/// returns the rest ranked by design_before. Work is split across `threads`
/// contiguous index blocks; the merged result does not depend on the split.
inline std::vector<DesignResult> optimize(const DesignSpace& space, const DesignConstraints& constraints, double slip,
                                          const MotorModel& motor, std::size_t cap = kDefaultDesignCap,
                                          unsigned threads = 1) {
  space.validate();
  const std::size_t n = space.size();
  SWITCHSIM_REQUIRE(n <= cap, ErrorCode::SpaceTooLarge,
                    "design space has " + std::to_string(n) + " candidates, cap is " + std::to_string(cap));
  (void)TraversalModel::from_slip(1.0, slip);  // rejects slip outside [0, 1)

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n / 256))));
  std::vector<std::vector<DesignResult>> parts(threads);
  if (threads == 1) {
    detail::evaluate_range(space, constraints, slip, motor, 0, n, parts[0]);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = n * t / threads;
      const std::size_t e = n * (t + 1) / threads;
      workers.emplace_back([&, b, e, t] { detail::evaluate_range(space, constraints, slip, motor, b, e, parts[t]); });
    }
  }

  std::vector<DesignResult> all;
  for (auto& p : parts) {
    std::move(p.begin(), p.end(), std::back_inserter(all));
  }
  SWITCHSIM_REQUIRE(!all.empty(), ErrorCode::EmptyFeasibleSet, "no candidate satisfies the layout rules and constraints");
  std::stable_sort(all.begin(), all.end(), design_before);
  return all;
}

}  // namespace switchsim
