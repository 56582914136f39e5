#pragma once

// Line-oriented configuration: `[section]` headers, `key = value` lines and
// `#` comments. Values are kept in file units (degrees, mm, ms, s) so that a
// serialized config re-parses to an identical value; `to_plant()` converts to
// the simulator's internal units and resolves the calibrations.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "switchsim/cable_path.hpp"
#include "switchsim/error.hpp"
#include "switchsim/gear_geometry.hpp"
#include "switchsim/motion_profile.hpp"
#include "switchsim/plant.hpp"
#include "switchsim/switch_state.hpp"
#include "switchsim/units.hpp"

namespace switchsim {

/// Shortest text that parses back to exactly `v`.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct PathSpec {
  PathKind kind = PathKind::Linear;
  double l0_mm = 300.0;
  double arm_mm = 25.0;
  double bow_mm = 0.0;
  std::vector<std::pair<double, double>> table;  // (joint deg, length mm)

  CablePath build() const {
    switch (kind) {
      case PathKind::Linear: return CablePath::linear(l0_mm, arm_mm);
      case PathKind::Curved: return CablePath::curved(l0_mm, arm_mm, bow_mm);
      case PathKind::Tabulated: {
        std::vector<PathKnot> knots;
        for (const auto& [q, l] : table) knots.push_back({deg_to_rad(q), l});
        return CablePath::tabulated(std::move(knots));
      }
    }
    return {};
  }

  bool operator==(const PathSpec&) const = default;
};

struct Config {
  struct Layout {
    int z_drive = 20;
    int z_switch = 16;
    int z_driven = 20;
    double module_drive_mm = 1.0;
    double module_switch_mm = 1.0;
    double module_driven_mm = 1.0;
    double phi_d_deg = 25.0;
    double d_mm = reference_layout().driven_center_distance_mm;
    double backlash_mm = 0.2;
    bool operator==(const Layout&) const = default;
  } layout;

  struct Traversal {
    std::optional<double> slip;
    double motor_travel_deg = kPaperMotorTravelDeg;
    double revolution_travel_deg = kPaperRevolutionTravelDeg;
    bool operator==(const Traversal&) const = default;
  } traversal;

  struct Motor {
    double max_output_speed_dps = 720.0;
    double gearhead_ratio = 43.0;
    std::optional<double> profile_accel_dps2;
    double target_switch_ms = kPaperSwitchTimeUpMs;
    ControlMode control_mode = ControlMode::ProfilePosition;
    bool operator==(const Motor&) const = default;
  } motor;

  PathSpec agonist{PathKind::Linear, 300.0, 25.0, 0.0, {}};
  PathSpec antagonist{PathKind::Curved, 300.0, 25.0, 5.0, {}};
  SpoolModel spools;

  struct Sim {
    double dt_s = 1e-3;
    std::uint64_t seed = 1;
    double duration_s = 0.0;
    double jitter_ms = 0.6;
    SwitchMode initial_mode = SwitchMode::EngagedPlus;
    double initial_joint_deg = 0.0;
    double initial_motor_deg = 0.0;
    bool operator==(const Sim&) const = default;
  } sim;

  Script script;

  bool operator==(const Config&) const = default;

  MechanismLayout mechanism_layout() const {
    MechanismLayout l;
    l.driving = {layout.z_drive, layout.module_drive_mm};
    l.switch_gear = {layout.z_switch, layout.module_switch_mm};
    l.driven = {layout.z_driven, layout.module_driven_mm};
    l.driven_half_angle_rad = deg_to_rad(layout.phi_d_deg);
    l.driven_center_distance_mm = layout.d_mm;
    l.backlash_margin_mm = layout.backlash_mm;
    return l;
  }

  PlantConfig to_plant() const {
    PlantConfig c;
    c.layout = mechanism_layout();
    const double k_kin = kinematic_carry_ratio(c.layout);
    c.traversal = traversal.slip ? TraversalModel::from_slip(k_kin, *traversal.slip)
                                 : calibrate_slip(deg_to_rad(traversal.motor_travel_deg),
                                                  deg_to_rad(traversal.revolution_travel_deg), k_kin);
    c.motor.max_output_speed_dps = motor.max_output_speed_dps;
    c.motor.gearhead_ratio = motor.gearhead_ratio;
    c.motor.control_mode = motor.control_mode;
    if (motor.profile_accel_dps2) {
      c.motor.profile_accel_dps2 = *motor.profile_accel_dps2;
    } else {
      const double travel = c.traversal.k_eff() * rad_to_deg(solve_engagement(c.layout).theta_track_rad);
      c.motor.profile_accel_dps2 = calibrate_profile_accel(motor.target_switch_ms * 1e-3, travel,
                                                           motor.max_output_speed_dps);
    }
    c.agonist = agonist.build();
    c.antagonist = antagonist.build();
    c.spools = spools;
    c.dt_s = sim.dt_s;
    c.initial_mode = sim.initial_mode;
    c.initial_joint_rad = deg_to_rad(sim.initial_joint_deg);
    c.initial_motor_deg = sim.initial_motor_deg;
    return c;
  }
};

struct ConfigIssue {
  int line = 0;  // 0 when the offending value is a default
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : Error(ErrorCode::ConfigError, summarize(issues)), issues_(std::move(issues)) {}

  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string summarize(const std::vector<ConfigIssue>& issues) {
    std::string s;
    for (const auto& i : issues) {
      if (!s.empty()) s += "; ";
      s += "line " + std::to_string(i.line) + ": " + i.message;
    }
    return s;
  }

  std::vector<ConfigIssue> issues_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

template <class T>
std::optional<T> parse_as(std::string_view s) {
  T v{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s.front() == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
  return v;
}

class Parser {
 public:
  Config parse(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      handle_line(raw, line_no);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    cross_check();
    if (!issues_.empty()) throw ConfigError(std::move(issues_));
    return cfg_;
  }

 private:
  void fail(int line, std::string msg) { issues_.push_back({line, std::move(msg)}); }

  void handle_line(std::string_view raw, int line) {
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto s = trim(raw);
    if (s.empty()) return;
    if (s.front() == '[') {
      if (s.back() != ']') return fail(line, "malformed section header");
      section_ = std::string(trim(s.substr(1, s.size() - 2)));
      static const char* known[] = {"layout", "traversal", "motor", "paths", "spools", "sim", "script"};
      bool ok = false;
      for (const char* k : known) ok = ok || section_ == k;
      if (!ok) fail(line, "unknown section [" + section_ + "]");
      return;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) return fail(line, "expected `key = value`");
    const std::string key(trim(s.substr(0, eq)));
    const std::string_view value = trim(s.substr(eq + 1));
    if (key.empty()) return fail(line, "empty key");
    if (section_.empty()) return fail(line, "key `" + key + "` outside any section");
    if (section_ == "script") return script_line(key, value, line);
    const std::string full = section_ + "." + key;
    if (seen_.count(full)) return fail(line, "duplicate key `" + key + "`");
    seen_[full] = line;
    assign(full, key, value, line);
  }

  bool number(std::string_view v, int line, const std::string& key, double& out) {
    const auto x = parse_as<double>(v);
    if (!x) {
      fail(line, "`" + key + "`: expected a number, got `" + std::string(v) + "`");
      return false;
    }
    out = *x;
    return true;
  }

  void positive(std::string_view v, int line, const std::string& key, double& out, bool allow_inf = false) {
    double x = 0.0;
    if (!number(v, line, key, x)) return;
    if (!(x > 0.0) || (!allow_inf && std::isinf(x))) return fail(line, "`" + key + "` must be > 0");
    out = x;
  }

  void finite(std::string_view v, int line, const std::string& key, double& out) {
    double x = 0.0;
    if (!number(v, line, key, x)) return;
    if (!std::isfinite(x)) return fail(line, "`" + key + "` must be finite");
    out = x;
  }

  void integer(std::string_view v, int line, const std::string& key, int& out) {
    const auto x = parse_as<int>(v);
    if (!x) return fail(line, "`" + key + "`: expected an integer, got `" + std::string(v) + "`");
    out = *x;
  }

  void path_key(PathSpec& p, const std::string& prefix, const std::string& key, std::string_view v, int line) {
    const std::string k = key.substr(prefix.size());
    if (k == "kind") {
      if (v == "linear") p.kind = PathKind::Linear;
      else if (v == "curved") p.kind = PathKind::Curved;
      else if (v == "tabulated") p.kind = PathKind::Tabulated;
      else fail(line, "`" + key + "` must be linear, curved or tabulated");
    } else if (k == "L0_mm") {
      finite(v, line, key, p.l0_mm);
    } else if (k == "arm_mm") {
      finite(v, line, key, p.arm_mm);
    } else if (k == "bow_mm") {
      finite(v, line, key, p.bow_mm);
    } else if (k == "table") {
      p.table.clear();
      for (auto item : split(v, ',')) {
        const auto parts = split(item, ':');
        std::optional<double> q, l;
        if (parts.size() == 2) {
          q = parse_as<double>(parts[0]);
          l = parse_as<double>(parts[1]);
        }
        if (!q || !l) return fail(line, "`" + key + "`: expected `deg:mm, deg:mm, ...`");
        p.table.emplace_back(*q, *l);
      }
    } else {
      fail(line, "unknown key `" + key + "` in [paths]");
    }
  }

  void assign(const std::string& full, const std::string& key, std::string_view v, int line) {
    auto& L = cfg_.layout;
    auto& T = cfg_.traversal;
    auto& M = cfg_.motor;
    auto& S = cfg_.sim;
    if (section_ == "layout") {
      if (key == "z_drive") integer(v, line, key, L.z_drive);
      else if (key == "z_switch") integer(v, line, key, L.z_switch);
      else if (key == "z_driven") integer(v, line, key, L.z_driven);
      else if (key == "module_mm") {
        double m = 0.0;
        positive(v, line, key, m);
        if (m > 0.0) L.module_drive_mm = L.module_switch_mm = L.module_driven_mm = m;
      } else if (key == "module_drive_mm") positive(v, line, key, L.module_drive_mm);
      else if (key == "module_switch_mm") positive(v, line, key, L.module_switch_mm);
      else if (key == "module_driven_mm") positive(v, line, key, L.module_driven_mm);
      else if (key == "phi_d_deg") finite(v, line, key, L.phi_d_deg);
      else if (key == "D_mm") finite(v, line, key, L.d_mm);
      else if (key == "backlash_mm") finite(v, line, key, L.backlash_mm);
      else fail(line, "unknown key `" + key + "` in [layout]");
    } else if (section_ == "traversal") {
      if (key == "slip") {
        double s = 0.0;
        if (number(v, line, key, s)) {
          if (s >= 0.0 && s < 1.0) T.slip = s; else fail(line, "`slip` must lie in [0, 1)");
        }
      } else if (key == "motor_travel_deg") positive(v, line, key, T.motor_travel_deg);
      else if (key == "revolution_travel_deg") positive(v, line, key, T.revolution_travel_deg);
      else fail(line, "unknown key `" + key + "` in [traversal]");
    } else if (section_ == "motor") {
      if (key == "max_output_speed_dps") positive(v, line, key, M.max_output_speed_dps);
      else if (key == "gearhead_ratio") {
        finite(v, line, key, M.gearhead_ratio);
        if (M.gearhead_ratio < 1.0) fail(line, "`gearhead_ratio` must be >= 1");
      } else if (key == "profile_accel_dps2") {
        double a = 0.0;
        positive(v, line, key, a, true);
        if (a > 0.0) M.profile_accel_dps2 = a;
      } else if (key == "target_switch_ms") positive(v, line, key, M.target_switch_ms);
      else if (key == "control_mode") {
        if (v == "profile_position") M.control_mode = ControlMode::ProfilePosition;
        else if (v == "profile_velocity") M.control_mode = ControlMode::ProfileVelocity;
        else fail(line, "`control_mode` must be profile_position or profile_velocity");
      } else fail(line, "unknown key `" + key + "` in [motor]");
    } else if (section_ == "paths") {
      if (key.rfind("agonist_", 0) == 0) path_key(cfg_.agonist, "agonist_", key, v, line);
      else if (key.rfind("antagonist_", 0) == 0) path_key(cfg_.antagonist, "antagonist_", key, v, line);
      else fail(line, "unknown key `" + key + "` in [paths]");
    } else if (section_ == "spools") {
      auto& P = cfg_.spools;
      if (key == "radius_mm") positive(v, line, key, P.radius_mm);
      else if (key == "preload_Nmm") positive(v, line, key, P.preload_Nmm);
      else if (key == "rate_Nmm_per_deg") {
        finite(v, line, key, P.rate_Nmm_per_deg);
        if (P.rate_Nmm_per_deg < 0.0) fail(line, "`rate_Nmm_per_deg` must be >= 0");
      } else if (key == "payout_at_zero_mm") finite(v, line, key, P.payout_at_zero_mm);
      else fail(line, "unknown key `" + key + "` in [spools]");
    } else if (section_ == "sim") {
      if (key == "dt_s") positive(v, line, key, S.dt_s);
      else if (key == "seed") {
        const auto x = parse_as<std::uint64_t>(v);
        if (x) S.seed = *x; else fail(line, "`seed` must be an unsigned 64-bit integer");
      } else if (key == "duration_s") {
        finite(v, line, key, S.duration_s);
        if (S.duration_s < 0.0) fail(line, "`duration_s` must be >= 0");
      } else if (key == "jitter_ms") {
        finite(v, line, key, S.jitter_ms);
        if (S.jitter_ms < 0.0) fail(line, "`jitter_ms` must be >= 0");
      } else if (key == "initial_mode") {
        if (v == "engaged_plus") S.initial_mode = SwitchMode::EngagedPlus;
        else if (v == "engaged_minus") S.initial_mode = SwitchMode::EngagedMinus;
        else if (v == "neutral") S.initial_mode = SwitchMode::Neutral;
        else fail(line, "`initial_mode` must be engaged_plus, engaged_minus or neutral");
      } else if (key == "initial_joint_deg") {
        finite(v, line, key, S.initial_joint_deg);
        if (std::abs(S.initial_joint_deg) > 90.0) fail(line, "`initial_joint_deg` must lie in [-90, 90]");
      } else if (key == "initial_motor_deg") finite(v, line, key, S.initial_motor_deg);
      else fail(line, "unknown key `" + key + "` in [sim]");
    }
    (void)full;
  }

  std::optional<DisturbanceTarget> target(std::string_view v) {
    if (v == "disengaged") return DisturbanceTarget::Disengaged;
    if (v == "engaged") return DisturbanceTarget::Engaged;
    if (v == "joint") return DisturbanceTarget::Joint;
    return std::nullopt;
  }

  void script_line(const std::string& key, std::string_view v, int line) {
    auto& script = cfg_.script;
    if (key == "move") {
      double x = 0.0;
      finite(v, line, key, x);
      script.push_back(MoveMotorTo{x});
    } else if (key == "velocity") {
      double x = 0.0;
      finite(v, line, key, x);
      script.push_back(SetVelocity{x});
    } else if (key == "wait") {
      double x = 0.0;
      finite(v, line, key, x);
      if (x < 0.0) fail(line, "`wait` must be >= 0");
      script.push_back(Wait{x});
    } else if (key == "disturb") {
      // disturb = <target> <start_s> <duration_s> <magnitude> [; <start_s> <duration_s> <magnitude>]...
      const auto groups = split(v, ';');
      DisturbanceProfile prof;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        auto f = split_ws(groups[g]);
        if (g == 0) {
          const auto t = f.empty() ? std::nullopt : target(f.front());
          if (!t) return fail(line, "`disturb`: first field must be disengaged, engaged or joint");
          prof.target = *t;
          f.erase(f.begin());
          if (f.empty() && groups.size() == 1) break;
        }
        std::optional<double> a, b, c;
        if (f.size() == 3) {
          a = parse_as<double>(f[0]);
          b = parse_as<double>(f[1]);
          c = parse_as<double>(f[2]);
        }
        if (!a || !b || !c || *b < 0.0) return fail(line, "`disturb`: expected `<start_s> <duration_s> <magnitude>`");
        prof.pulses.push_back({*a, *b, *c});
      }
      script.push_back(InjectDisturbance{std::move(prof)});
    } else if (key == "disturb_random") {
      // disturb_random = <target> <seed> <window_s> <magnitude>
      const auto f = split_ws(v);
      std::optional<DisturbanceTarget> t;
      std::optional<std::uint64_t> seed;
      std::optional<double> window, mag;
      if (f.size() == 4) {
        t = target(f[0]);
        seed = parse_as<std::uint64_t>(f[1]);
        window = parse_as<double>(f[2]);
        mag = parse_as<double>(f[3]);
      }
      if (!t || !seed || !window || !mag) {
        return fail(line, "`disturb_random`: expected `<target> <seed> <window_s> <magnitude>`");
      }
      script.push_back(InjectDisturbance{DisturbanceProfile::random_pulses(*seed, *window, *mag, *t)});
    } else {
      fail(line, "unknown script command `" + key + "`");
    }
  }

  int line_of(const std::string& full) const {
    const auto it = seen_.find(full);
    return it == seen_.end() ? 0 : it->second;
  }

  void cross_check() {
    if (cfg_.traversal.slip &&
        (seen_.count("traversal.motor_travel_deg") || seen_.count("traversal.revolution_travel_deg"))) {
      fail(line_of("traversal.slip"), "give either `slip` or the (motor_travel_deg, revolution_travel_deg) pair");
    }
    if (!issues_.empty()) return;

    const auto& L = cfg_.layout;
    if (L.module_switch_mm != L.module_drive_mm) {
      fail(std::max(line_of("layout.module_switch_mm"), line_of("layout.module_drive_mm")),
           "module mismatch: `module_switch_mm` = " + format_number(L.module_switch_mm) + " vs `module_drive_mm` = " +
               format_number(L.module_drive_mm));
    }
    if (L.module_driven_mm != L.module_drive_mm) {
      fail(std::max(line_of("layout.module_driven_mm"), line_of("layout.module_drive_mm")),
           "module mismatch: `module_driven_mm` = " + format_number(L.module_driven_mm) + " vs `module_drive_mm` = " +
               format_number(L.module_drive_mm));
    }
    const auto report = validate_layout(cfg_.mechanism_layout());
    for (const auto& v : report.violations) {
      if (v.rule == LayoutRule::ModuleMismatch) continue;
      fail(line_of("layout.D_mm"), std::string("layout: ") + to_string(v.rule) + " (" + v.detail + ")");
    }
    if (!issues_.empty()) return;

    try {
      (void)cfg_.to_plant();
      Mechanism m(cfg_.to_plant());
      (void)m.initial_state();
    } catch (const Error& e) {
      fail(0, e.what());
    }
  }

  Config cfg_;
  std::string section_;
  std::map<std::string, int> seen_;
  std::vector<ConfigIssue> issues_;
};

}  // namespace detail

/// Missing keys keep their reference defaults; an empty text yields the full
/// reference configuration. Throws ConfigError listing every problem found.
inline Config parse_config(std::string_view text) { return detail::Parser{}.parse(text); }

inline std::string serialize_config(const Config& c) {
  std::ostringstream o;
  auto kv = [&o](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
  auto num = [&kv](const char* k, double v) { kv(k, format_number(v)); };

  o << "[layout]\n";
  kv("z_drive", std::to_string(c.layout.z_drive));
  kv("z_switch", std::to_string(c.layout.z_switch));
  kv("z_driven", std::to_string(c.layout.z_driven));
  num("module_drive_mm", c.layout.module_drive_mm);
  num("module_switch_mm", c.layout.module_switch_mm);
  num("module_driven_mm", c.layout.module_driven_mm);
  num("phi_d_deg", c.layout.phi_d_deg);
  num("D_mm", c.layout.d_mm);
  num("backlash_mm", c.layout.backlash_mm);

  o << "\n[traversal]\n";
  if (c.traversal.slip) {
    num("slip", *c.traversal.slip);
  } else {
    num("motor_travel_deg", c.traversal.motor_travel_deg);
    num("revolution_travel_deg", c.traversal.revolution_travel_deg);
  }

  o << "\n[motor]\n";
  num("max_output_speed_dps", c.motor.max_output_speed_dps);
  num("gearhead_ratio", c.motor.gearhead_ratio);
  if (c.motor.profile_accel_dps2) num("profile_accel_dps2", *c.motor.profile_accel_dps2);
  num("target_switch_ms", c.motor.target_switch_ms);
  kv("control_mode", c.motor.control_mode == ControlMode::ProfilePosition ? "profile_position" : "profile_velocity");

  o << "\n[paths]\n";
  auto path = [&](const char* prefix, const PathSpec& p) {
    const std::string pre(prefix);
    kv((pre + "kind").c_str(), to_string(p.kind));
    num((pre + "L0_mm").c_str(), p.l0_mm);
    num((pre + "arm_mm").c_str(), p.arm_mm);
    num((pre + "bow_mm").c_str(), p.bow_mm);
    if (!p.table.empty()) {
      std::string t;
      for (const auto& [q, l] : p.table) {
        if (!t.empty()) t += ", ";
        t += format_number(q) + ":" + format_number(l);
      }
      kv((pre + "table").c_str(), t);
    }
  };
  path("agonist_", c.agonist);
  path("antagonist_", c.antagonist);

  o << "\n[spools]\n";
  num("radius_mm", c.spools.radius_mm);
  num("preload_Nmm", c.spools.preload_Nmm);
  num("rate_Nmm_per_deg", c.spools.rate_Nmm_per_deg);
  num("payout_at_zero_mm", c.spools.payout_at_zero_mm);

  o << "\n[sim]\n";
  num("dt_s", c.sim.dt_s);
  kv("seed", std::to_string(c.sim.seed));
  num("duration_s", c.sim.duration_s);
  num("jitter_ms", c.sim.jitter_ms);
  kv("initial_mode", c.sim.initial_mode == SwitchMode::EngagedPlus    ? "engaged_plus"
                     : c.sim.initial_mode == SwitchMode::EngagedMinus ? "engaged_minus"
                                                                      : "neutral");
  num("initial_joint_deg", c.sim.initial_joint_deg);
  num("initial_motor_deg", c.sim.initial_motor_deg);

  if (!c.script.empty()) {
    o << "\n[script]\n";
    for (const auto& cmd : c.script) {
      if (const auto* m = std::get_if<MoveMotorTo>(&cmd)) {
        num("move", m->angle_deg);
      } else if (const auto* v = std::get_if<SetVelocity>(&cmd)) {
        num("velocity", v->velocity_dps);
      } else if (const auto* w = std::get_if<Wait>(&cmd)) {
        num("wait", w->duration_s);
      } else {
        const auto& prof = std::get<InjectDisturbance>(cmd).profile;
        std::string s = to_string(prof.target);
        for (std::size_t i = 0; i < prof.pulses.size(); ++i) {
          const auto& p = prof.pulses[i];
          s += (i == 0 ? " " : "; ") + format_number(p.start_s) + " " + format_number(p.duration_s) + " " +
               format_number(p.magnitude);
        }
        kv("disturb", s);
      }
    }
  }
  return o.str();
}

}  // namespace switchsim
