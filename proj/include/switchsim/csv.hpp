#pragma once

// CSV schemas. Column names carry their units; numbers are written in the
// shortest form that round-trips, so identical runs give identical bytes.

#include <ostream>
#include <string>
#include <vector>

#include "switchsim/config.hpp"
#include "switchsim/experiments.hpp"
#include "switchsim/gear_geometry.hpp"
#include "switchsim/optimizer.hpp"
#include "switchsim/plant.hpp"
#include "switchsim/units.hpp"

namespace switchsim::csv {

inline constexpr const char* kTraceHeader =
    "t_s,motor_deg,psi_deg,mode,joint_deg,payout_plus_mm,payout_minus_mm,tension_plus_N,tension_minus_N";
inline constexpr const char* kEventsHeader = "t_s,kind,detail";
inline constexpr const char* kStatsHeader =
    "n_trials,mean_up_ms,mean_down_ms,sigma_up_ms,sigma_down_ms,up_ms,down_ms";
inline constexpr const char* kIndependenceHeader =
    "max_engaged_deviation_mm,disturbance_magnitude_mm,rom_min_deg,rom_max_deg";
inline constexpr const char* kSweepHeader = "omega_dps,t_switch_ms,regime,in_fit,fit_A_deg,fit_B_ms,fit_r2";
inline constexpr const char* kDesignHeader =
    "rank,z_drive,z_switch,z_driven,module_mm,phi_d_deg,D_mm,backlash_mm,psi_star_deg,theta_deg,k_eff,"
    "motor_travel_deg,driven_ratio,envelope_mm,t_switch_ms,basis";

inline std::string join(const std::vector<double>& v, char sep = ';') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += format_number(v[i]);
  }
  return s;
}

inline void write_trace(std::ostream& o, const Trace& trace) {
  o << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    o << format_number(r.t_s) << ',' << format_number(r.motor_deg) << ','
      << format_number(rad_to_deg(r.switch_state.psi_rad)) << ',' << to_string(r.switch_state.mode) << ','
      << format_number(rad_to_deg(r.joint_rad)) << ',' << format_number(r.payout_plus_mm) << ','
      << format_number(r.payout_minus_mm) << ',' << format_number(r.tension_plus_N) << ','
      << format_number(r.tension_minus_N) << '\n';
  }
}

inline void write_events(std::ostream& o, const Trace& trace) {
  o << kEventsHeader << '\n';
  for (const auto& e : trace.events) {
    o << format_number(e.t_s) << ',' << to_string(e.event.kind) << ",side=" << to_string(e.event.side)
      << " psi_deg=" << format_number(rad_to_deg(e.event.psi_rad))
      << " spool_deg=" << format_number(rad_to_deg(e.event.spool_rotation_rad)) << '\n';
  }
}

inline void write_stats(std::ostream& o, const SwitchingTimeStats& s) {
  o << kStatsHeader << '\n'
    << s.n_trials << ',' << format_number(s.mean_up_ms) << ',' << format_number(s.mean_down_ms) << ','
    << format_number(s.sigma_up_ms) << ',' << format_number(s.sigma_down_ms) << ',' << join(s.up_ms) << ','
    << join(s.down_ms) << '\n';
}

inline void write_independence(std::ostream& o, const IndependenceReport& r) {
  o << kIndependenceHeader << '\n'
    << format_number(r.max_engaged_deviation_mm) << ',' << format_number(r.disturbance_magnitude_mm) << ','
    << format_number(rad_to_deg(r.rom_min_rad)) << ',' << format_number(rad_to_deg(r.rom_max_rad)) << '\n';
}

inline void write_sweep(std::ostream& o, const SweepCurve& c) {
  o << kSweepHeader << '\n';
  for (const auto& p : c.points) {
    o << format_number(p.omega_dps) << ',' << format_number(p.t_switch_ms) << ','
      << (p.triangular ? "triangular" : "trapezoidal") << ',' << (p.in_fit ? 1 : 0) << ','
      << format_number(c.fit_a_deg) << ',' << format_number(c.fit_b_ms) << ',' << format_number(c.fit_r2) << '\n';
  }
}

inline void write_designs(std::ostream& o, const std::vector<DesignResult>& designs, std::size_t top_k) {
  o << kDesignHeader << '\n';
  const std::size_t n = top_k == 0 ? designs.size() : std::min(top_k, designs.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = designs[i];
    const auto& l = d.layout;
    o << (i + 1) << ',' << l.driving.tooth_count << ',' << l.switch_gear.tooth_count << ','
      << l.driven.tooth_count << ',' << format_number(l.driving.module_mm) << ','
      << format_number(rad_to_deg(l.driven_half_angle_rad)) << ',' << format_number(l.driven_center_distance_mm)
      << ',' << format_number(l.backlash_margin_mm) << ',' << format_number(rad_to_deg(d.theta_rad / 2.0)) << ','
      << format_number(rad_to_deg(d.theta_rad)) << ',' << format_number(d.k_eff) << ','
      << format_number(d.motor_travel_deg) << ',' << format_number(d.driven_ratio) << ','
      << format_number(d.envelope_mm) << ',' << format_number(d.t_switch_ms) << ",predicted_at_measured_slip\n";
  }
}

}  // namespace switchsim::csv
