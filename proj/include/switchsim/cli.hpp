#pragma once

// Command-line front end. Exit codes: 0 success, 1 validation or bound
// failure, 2 usage error.

#include <charconv>
#include <string_view>
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "switchsim/config.hpp"
#include "switchsim/csv.hpp"
#include "switchsim/error.hpp"
#include "switchsim/experiments.hpp"
#include "switchsim/gear_geometry.hpp"
#include "switchsim/optimizer.hpp"
#include "switchsim/plant.hpp"

namespace switchsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kOutDirEnv = "SWITCHSIM_OUT_DIR";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output target: a file (possibly relocated under $SWITCHSIM_OUT_DIR) or the
/// caller's stream.
class Output {
 public:
  Output(const std::string& path, const std::string& fallback_name, std::ostream& fallback) : stream_(&fallback) {
    const char* dir = std::getenv(kOutDirEnv);
    std::filesystem::path target;
    if (dir && *dir) {
      target = std::filesystem::path(dir) / (path.empty() ? std::filesystem::path(fallback_name)
                                                          : std::filesystem::path(path).filename());
    } else if (!path.empty()) {
      target = path;
    }
    if (!target.empty()) {
      if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
      file_ = std::make_unique<std::ofstream>(target, std::ios::binary);
      if (!*file_) throw Error(ErrorCode::InvalidInput, "cannot open output file " + target.string());
      stream_ = file_.get();
    }
  }

  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

inline ToothRange parse_tooth_range(const std::string& text, const std::string& flag) {
  auto whole_int = [&](std::string_view part, int& value) {
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || end != part.data() + part.size() || part.empty())
      throw UsageError(flag + ": expected `lo:hi`, got `" + text + "`");
  };
  ToothRange r;
  const std::string_view view(text);
  const auto colon = view.find(':');
  whole_int(view.substr(0, colon), r.lo);
  if (colon == std::string_view::npos) r.hi = r.lo;
  else whole_int(view.substr(colon + 1), r.hi);
  if (r.hi < r.lo) throw UsageError(flag + ": empty range `" + text + "`");
  return r;
}

struct Options {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;

  // simulate
  std::string events_path;
  std::optional<double> duration_s;
  bool rom_sweep = false;

  // switching-time
  int trials = 10;
  bool no_jitter = false;
  std::optional<double> jitter_ms;
  std::optional<double> velocity_dps;
  std::optional<double> min_mean_ms;
  std::optional<double> max_mean_ms;

  // independence
  double magnitude_mm = 5.0;
  bool negative_control = false;
  std::optional<double> max_deviation_mm;

  // sweep
  std::vector<double> omegas{180.0, 270.0, 360.0, 450.0, 540.0, 630.0, 720.0};
  std::string ramp = "constant-ramp-time";

  // optimize
  std::string z_drive = "12:30";
  std::string z_switch = "8:20";
  std::string z_driven = "12:30";
  std::vector<double> modules{1.0};
  std::vector<double> phi_deg{20.0, 25.0, 30.0, 35.0};
  std::vector<double> psi_deg{6.0, 8.0, 10.0, 12.0};
  std::vector<double> d_mm;
  std::optional<double> backlash_mm;
  std::optional<double> envelope_max_mm;
  std::optional<double> ratio_min;
  std::optional<double> ratio_max;
  std::optional<double> slip;
  std::size_t cap = kDefaultDesignCap;
  std::size_t top = 0;
  unsigned threads = 1;

  // calibrate
  std::optional<double> t_ms;
};

inline Config load_config(const std::string& path) {
  if (path.empty()) return parse_config("");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("--config: cannot read `" + path + "`");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  const Config cfg = load_config(opt.config_path);
  const auto layout = cfg.mechanism_layout();
  const auto report = validate_layout(layout);
  Output o(opt.out_path, "validate.csv", out);
  auto& s = o.stream();
  s << "quantity,value\n";
  if (report.ok()) {
    const auto eng = solve_engagement(layout);
    const auto plant = cfg.to_plant();
    s << "psi_star_deg," << format_number(rad_to_deg(eng.psi_star_rad)) << '\n'
      << "theta_deg," << format_number(rad_to_deg(eng.theta_track_rad)) << '\n'
      << "neutral_half_width_deg," << format_number(rad_to_deg(eng.neutral_band.half_width_rad)) << '\n'
      << "k_kin," << format_number(kinematic_carry_ratio(layout)) << '\n'
      << "k_eff," << format_number(plant.traversal.k_eff()) << '\n'
      << "envelope_mm," << format_number(envelope_diameter_mm(layout)) << '\n';
  }
  for (const auto& v : report.violations) s << "violation," << to_string(v.rule) << ": " << v.detail << '\n';
  s << "violations," << report.violations.size() << '\n';
  err << report.violations.size() << " violations\n";
  return report.ok() ? kExitOk : kExitValidation;
}

inline int cmd_simulate(const Options& opt, std::ostream& out, std::ostream&) {
  Config cfg = load_config(opt.config_path);
  const PlantConfig plant = cfg.to_plant();
  Script script = opt.rom_sweep ? rom_sweep_script(plant) : cfg.script;
  const Trace trace = run_script(plant, script, opt.duration_s.value_or(cfg.sim.duration_s));
  {
    Output o(opt.out_path, "trace.csv", out);
    csv::write_trace(o.stream(), trace);
  }
  if (!opt.events_path.empty()) {
    std::ostringstream sink;
    Output e(opt.events_path, "events.csv", sink);
    csv::write_events(e.stream(), trace);
  }
  return kExitOk;
}

inline int cmd_switching_time(const Options& opt, std::ostream& out, std::ostream& err) {
  const Config cfg = load_config(opt.config_path);
  if (opt.trials < 1) throw UsageError("--trials must be >= 1");
  JitterOptions jitter;
  jitter.enabled = !opt.no_jitter;
  jitter.seed = opt.seed.value_or(cfg.sim.seed);
  jitter.sigma_ms = opt.jitter_ms.value_or(cfg.sim.jitter_ms);
  const auto stats = run_switching_time(cfg.to_plant(), opt.trials, jitter, opt.velocity_dps);
  Output o(opt.out_path, "switching_time.csv", out);
  csv::write_stats(o.stream(), stats);

  bool ok = true;
  for (double m : {stats.mean_up_ms, stats.mean_down_ms}) {
    if (opt.min_mean_ms && m < *opt.min_mean_ms) ok = false;
    if (opt.max_mean_ms && m > *opt.max_mean_ms) ok = false;
  }
  if (!ok) err << "mean switching time outside the requested bounds\n";
  return ok ? kExitOk : kExitValidation;
}

inline int cmd_independence(const Options& opt, std::ostream& out, std::ostream& err) {
  const Config cfg = load_config(opt.config_path);
  IndependenceOptions io;
  io.magnitude_mm = opt.magnitude_mm;
  io.seed = opt.seed.value_or(cfg.sim.seed);
  io.target = opt.negative_control ? DisturbanceTarget::Engaged : DisturbanceTarget::Disengaged;
  const auto report = run_independence(cfg.to_plant(), io);
  Output o(opt.out_path, "independence.csv", out);
  csv::write_independence(o.stream(), report);
  if (opt.max_deviation_mm && report.max_engaged_deviation_mm > *opt.max_deviation_mm) {
    err << "engaged payout deviation " << report.max_engaged_deviation_mm << " mm exceeds bound\n";
    return kExitValidation;
  }
  return kExitOk;
}

inline int cmd_sweep(const Options& opt, std::ostream& out, std::ostream&) {
  const Config cfg = load_config(opt.config_path);
  RampPolicy policy;
  if (opt.ramp == "constant-ramp-time") policy = RampPolicy::ConstantRampTime;
  else if (opt.ramp == "constant-accel") policy = RampPolicy::ConstantAcceleration;
  else throw UsageError("--ramp must be constant-ramp-time or constant-accel");
  const auto curve = run_speed_sweep(cfg.to_plant(), opt.omegas, policy);
  Output o(opt.out_path, "sweep.csv", out);
  csv::write_sweep(o.stream(), curve);
  return kExitOk;
}

inline int cmd_optimize(const Options& opt, std::ostream& out, std::ostream& err) {
  const Config cfg = load_config(opt.config_path);
  const PlantConfig plant = cfg.to_plant();
  DesignSpace space;
  space.driving = parse_tooth_range(opt.z_drive, "--z-drive");
  space.switch_gear = parse_tooth_range(opt.z_switch, "--z-switch");
  space.driven = parse_tooth_range(opt.z_driven, "--z-driven");
  space.modules_mm = opt.modules;
  space.phi_d_rad.clear();
  for (double p : opt.phi_deg) space.phi_d_rad.push_back(deg_to_rad(p));
  space.psi_star_rad.clear();
  for (double p : opt.psi_deg) space.psi_star_rad.push_back(deg_to_rad(p));
  if (!opt.d_mm.empty()) {
    space.distance_policy = DistancePolicy::Grid;
    space.distance_mm = opt.d_mm;
  }
  space.backlash_mm = opt.backlash_mm.value_or(cfg.layout.backlash_mm);
  DesignConstraints cons;
  if (opt.envelope_max_mm) cons.envelope_max_diameter_mm = *opt.envelope_max_mm;
  if (opt.ratio_min) cons.driven_ratio_min = *opt.ratio_min;
  if (opt.ratio_max) cons.driven_ratio_max = *opt.ratio_max;

  const double slip = opt.slip.value_or(plant.traversal.slip());
  const auto designs = optimize(space, cons, slip, plant.motor, opt.cap, opt.threads);
  Output o(opt.out_path, "designs.csv", out);
  csv::write_designs(o.stream(), designs, opt.top);
  err << designs.size() << " feasible designs (predicted at measured slip " << slip << ")\n";
  return kExitOk;
}

inline int cmd_calibrate(const Options& opt, std::ostream& out, std::ostream&) {
  Config cfg = load_config(opt.config_path);
  if (opt.t_ms) {
    cfg.motor.target_switch_ms = *opt.t_ms;
    cfg.motor.profile_accel_dps2.reset();
  }
  const PlantConfig plant = cfg.to_plant();
  const double theta_deg = rad_to_deg(solve_engagement(plant.layout).theta_track_rad);
  const double travel = traversal_motor_travel_deg(plant);
  const double v = plant.motor.max_output_speed_dps;
  Output o(opt.out_path, "calibration.csv", out);
  auto& s = o.stream();
  s << "k_kin,k_eff,slip,theta_deg,motor_travel_deg,profile_accel_dps2,kinematic_floor_ms,t_switch_ms\n"
    << format_number(plant.traversal.k_kin()) << ',' << format_number(plant.traversal.k_eff()) << ','
    << format_number(plant.traversal.slip()) << ',' << format_number(theta_deg) << ',' << format_number(travel) << ','
    << format_number(plant.motor.profile_accel_dps2) << ',' << format_number(travel / v * 1e3) << ','
    << format_number(trapezoid_duration(travel, v, plant.motor.profile_accel_dps2) * 1e3) << '\n';
  return kExitOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Switch-based single-motor antagonist cable actuator: simulation and design"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Configuration file (defaults to the reference build)");
    sub->add_option("--out", opt.out_path, "Output CSV path (default: standard output)");
    sub->add_option("--seed", opt.seed, "Override [sim] seed");
  };

  auto* validate = app.add_subcommand("validate", "Check the gear layout and print derived geometry");
  common(validate);

  auto* simulate = app.add_subcommand("simulate", "Run the [script] section and write the trace");
  common(simulate);
  simulate->add_option("--events", opt.events_path, "Event log CSV path");
  simulate->add_option("--duration", opt.duration_s, "Minimum simulated time (s)");
  simulate->add_flag("--rom-sweep", opt.rom_sweep, "Replace the script with a full range-of-motion sweep");

  auto* switching = app.add_subcommand("switching-time", "Repeated end-to-end traversal timing");
  common(switching);
  switching->add_option("--trials", opt.trials, "Number of trials")->capture_default_str();
  switching->add_flag("--no-jitter", opt.no_jitter, "Disable timing jitter");
  switching->add_option("--jitter-ms", opt.jitter_ms, "Jitter standard deviation (ms)");
  switching->add_option("--velocity", opt.velocity_dps, "Profile velocity (deg/s)");
  switching->add_option("--min-mean-ms", opt.min_mean_ms, "Fail (exit 1) if a mean falls below this");
  switching->add_option("--max-mean-ms", opt.max_mean_ms, "Fail (exit 1) if a mean exceeds this");

  auto* independence = app.add_subcommand("independence", "Disturb the unwinding cable over a full sweep");
  common(independence);
  independence->add_option("--magnitude", opt.magnitude_mm, "Disturbance pulse magnitude (mm)")->capture_default_str();
  independence->add_flag("--negative-control", opt.negative_control, "Disturb the engaged cable instead");
  independence->add_option("--max-deviation-mm", opt.max_deviation_mm, "Fail (exit 1) above this deviation");

  auto* sweep = app.add_subcommand("sweep", "Switching time against motor speed");
  common(sweep);
  sweep->add_option("--omega", opt.omegas, "Speeds (deg/s), comma separated")->delimiter(',');
  sweep->add_option("--ramp", opt.ramp, "constant-ramp-time | constant-accel")->capture_default_str();

  auto* optimize_cmd = app.add_subcommand("optimize", "Exhaustive gear sizing search");
  common(optimize_cmd);
  optimize_cmd->add_option("--z-drive", opt.z_drive, "Driving gear teeth lo:hi")->capture_default_str();
  optimize_cmd->add_option("--z-switch", opt.z_switch, "Switch gear teeth lo:hi")->capture_default_str();
  optimize_cmd->add_option("--z-driven", opt.z_driven, "Driven gear teeth lo:hi")->capture_default_str();
  optimize_cmd->add_option("--modules", opt.modules, "Modules (mm)")->delimiter(',');
  optimize_cmd->add_option("--phi-deg", opt.phi_deg, "Driven half-angles (deg)")->delimiter(',');
  optimize_cmd->add_option("--psi-deg", opt.psi_deg, "Track endpoints psi* (deg); D solved per design")
      ->delimiter(',');
  optimize_cmd->add_option("--d-mm", opt.d_mm, "Gridded driven distances (mm); overrides --psi-deg")->delimiter(',');
  optimize_cmd->add_option("--backlash", opt.backlash_mm, "Backlash margin (mm)");
  optimize_cmd->add_option("--envelope-max", opt.envelope_max_mm, "Maximum envelope diameter (mm)");
  optimize_cmd->add_option("--ratio-min", opt.ratio_min, "Minimum z_drive/z_driven");
  optimize_cmd->add_option("--ratio-max", opt.ratio_max, "Maximum z_drive/z_driven");
  optimize_cmd->add_option("--slip", opt.slip, "Slip factor (default: calibrated from config)");
  optimize_cmd->add_option("--cap", opt.cap, "Maximum design-space size")->capture_default_str();
  optimize_cmd->add_option("--top", opt.top, "Write only the best k designs (0 = all)");
  optimize_cmd->add_option("--threads", opt.threads, "Worker threads")->capture_default_str();

  auto* calibrate = app.add_subcommand("calibrate", "Report calibrated slip and profile acceleration");
  common(calibrate);
  calibrate->add_option("--t-ms", opt.t_ms, "Target switching time (ms)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(opt, out, err);
    if (simulate->parsed()) return cmd_simulate(opt, out, err);
    if (switching->parsed()) return cmd_switching_time(opt, out, err);
    if (independence->parsed()) return cmd_independence(opt, out, err);
    if (sweep->parsed()) return cmd_sweep(opt, out, err);
    if (optimize_cmd->parsed()) return cmd_optimize(opt, out, err);
    if (calibrate->parsed()) return cmd_calibrate(opt, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    for (const auto& issue : e.issues()) err << "config line " << issue.line << ": " << issue.message << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace switchsim::cli
