#include <gtest/gtest.h>

#include <random>

#include "switchsim/experiments.hpp"
#include "switchsim/plant.hpp"

using namespace switchsim;

namespace {

PlantConfig unit_config() {
  PlantConfig c = reference_plant_config();
  c.agonist = CablePath::linear(300.0, 25.0);
  c.antagonist = CablePath::curved(300.0, 25.0, 5.0);
  return c;
}

}  // namespace

TEST(SpoolModel, RestTension) {
  SpoolModel s;
  EXPECT_DOUBLE_EQ(s.tension_N(s.payout_at_zero_mm), 0.5);
  EXPECT_NEAR(s.tension_N(s.payout_at_zero_mm + 10.0 * kPi / 180.0), (5.0 + 0.05) / 10.0, 1e-12);
}

TEST(Mechanism, OneRadianOfWinding) {
  const Mechanism mech(unit_config());
  const SimState s0 = mech.initial_state();
  ASSERT_EQ(s0.switch_state.mode, SwitchMode::EngagedPlus);
  const auto r = mech.advance(s0, s0.motor_deg + rad_to_deg(1.0), 0.001, {});
  EXPECT_NEAR(s0.payout_plus_mm - r.state.payout_plus_mm, 10.0, 1e-12);
  EXPECT_NEAR(r.state.joint_rad - s0.joint_rad, 0.4, 1e-12);
  EXPECT_NEAR(r.state.payout_minus_mm, CablePath::curved(300.0, 25.0, 5.0).length(-0.4), 1e-12);
  EXPECT_GT(r.state.payout_minus_mm, s0.payout_minus_mm);
}

TEST(Mechanism, NeutralIsTransparent) {
  PlantConfig c = unit_config();
  c.initial_mode = SwitchMode::Neutral;
  c.initial_joint_rad = 0.3;
  const Mechanism mech(c);
  const SimState s0 = mech.initial_state();
  ASSERT_EQ(s0.switch_state.mode, SwitchMode::Neutral);
  const auto r = mech.advance(s0, s0.motor_deg + 30.0, 0.001, {});
  EXPECT_EQ(r.state.joint_rad, s0.joint_rad);
  EXPECT_EQ(r.state.payout_plus_mm, s0.payout_plus_mm);
  EXPECT_EQ(r.state.payout_minus_mm, s0.payout_minus_mm);
  EXPECT_EQ(coupling(r.state.switch_state, c.layout).driven_spool, Side::None);
}

TEST(Mechanism, DisengagedDisturbanceShiftsOnlyThatSide) {
  const Mechanism mech(unit_config());
  const SimState s0 = mech.initial_state();
  const auto base = mech.advance(s0, s0.motor_deg + 20.0, 0.001, {});
  MechanismInputs in;
  in.cable_disturbance_mm = 5.0;
  const auto dist = mech.advance(s0, s0.motor_deg + 20.0, 0.001, in);
  EXPECT_EQ(dist.state.payout_plus_mm, base.state.payout_plus_mm);
  EXPECT_EQ(dist.state.joint_rad, base.state.joint_rad);
  EXPECT_DOUBLE_EQ(dist.state.payout_minus_mm - base.state.payout_minus_mm, 5.0);
}

TEST(Mechanism, SlackDetected) {
  PlantConfig c = unit_config();
  c.spools.payout_at_zero_mm = 400.0;
  try {
    Mechanism(c).initial_state();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SlackDetected);
  }
}

TEST(Simulator, EmptyScriptIsConstant) {
  const Trace t = run_script(unit_config(), {}, 1.0);
  ASSERT_EQ(t.rows.size(), 1001u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    EXPECT_EQ(t.rows[i].t_s, static_cast<double>(i) * 0.001);
    SimState a = t.rows[i], b = t.rows[0];
    a.t_s = b.t_s = 0.0;
    EXPECT_EQ(a, b);
  }
  EXPECT_TRUE(t.events.empty());
}

TEST(Simulator, RomSweepSpansFullRange) {
  const PlantConfig c = unit_config();
  const Trace t = run_script(c, rom_sweep_script(c));
  double lo = 1e9, hi = -1e9;
  for (const auto& r : t.rows) {
    lo = std::min(lo, r.joint_rad);
    hi = std::max(hi, r.joint_rad);
    EXPECT_GT(r.tension_plus_N, 0.0);
    EXPECT_GT(r.tension_minus_N, 0.0);
  }
  EXPECT_NEAR(rad_to_deg(lo), -90.0, 1e-5);
  EXPECT_NEAR(rad_to_deg(hi), 90.0, 1e-5);
}

TEST(Simulator, DisturbanceLeavesEngagedColumnsBitIdentical) {
  const PlantConfig c = unit_config();
  const Script sweep = rom_sweep_script(c);
  Script disturbed{InjectDisturbance{DisturbanceProfile::random_pulses(9, 6.0, 5.0, DisturbanceTarget::Disengaged)}};
  disturbed.insert(disturbed.end(), sweep.begin(), sweep.end());
  const Trace a = run_script(c, sweep);
  const Trace b = run_script(c, disturbed);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  bool shifted = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const Side e = engaged_side(a.rows[i].switch_state.mode);
    EXPECT_EQ(a.rows[i].joint_rad, b.rows[i].joint_rad);
    if (e == Side::Plus) {
      EXPECT_EQ(a.rows[i].payout_plus_mm, b.rows[i].payout_plus_mm);
    } else if (e == Side::Minus) {
      EXPECT_EQ(a.rows[i].payout_minus_mm, b.rows[i].payout_minus_mm);
    }
    if (e == Side::Plus) {
      EXPECT_NEAR(b.rows[i].payout_minus_mm - a.rows[i].payout_minus_mm, b.rows[i].disturbance_mm, 1e-9);
      shifted = shifted || b.rows[i].disturbance_mm != 0.0;
    }
  }
  EXPECT_TRUE(shifted);
}

TEST(Simulator, Deterministic) {
  const PlantConfig c = unit_config();
  Script s{InjectDisturbance{DisturbanceProfile::random_pulses(4, 6.0, 5.0, DisturbanceTarget::Disengaged)}};
  const Script sweep = rom_sweep_script(c);
  s.insert(s.end(), sweep.begin(), sweep.end());
  const Trace a = run_script(c, s);
  const Trace b = run_script(c, s);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) ASSERT_EQ(a.rows[i], b.rows[i]);
  ASSERT_EQ(a.events.size(), b.events.size());
}

TEST(Simulator, HalvingDtKeepsFinalJoint) {
  PlantConfig c = unit_config();
  const double q1 = run_script(c, rom_sweep_script(c)).rows.back().joint_rad;
  c.dt_s = 5e-4;
  const double q2 = run_script(c, rom_sweep_script(c)).rows.back().joint_rad;
  EXPECT_LT(std::abs(q1 - q2), 1e-6);
}

TEST(Simulator, RangeExceededCarriesTime) {
  const PlantConfig c = unit_config();
  try {
    run_script(c, {MoveMotorTo{400.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RangeExceeded);
    EXPECT_NE(std::string(e.what()).find("at t="), std::string::npos);
  }
}

TEST(Simulator, EventsStampedInsideSteps) {
  const PlantConfig c = unit_config();
  const Trace t = run_script(c, {MoveMotorTo{-122.6}});
  ASSERT_FALSE(t.events.empty());
  double prev = 0.0;
  for (const auto& e : t.events) {
    EXPECT_GE(e.t_s, prev);
    prev = e.t_s;
  }
  // Disengage is immediate; engagement lands at the analytic move time.
  EXPECT_EQ(t.events.front().event.kind, SwitchEventKind::Disengaged);
  for (const auto& e : t.events) {
    if (e.event.kind == SwitchEventKind::Engaged) {
      EXPECT_NEAR(e.t_s, trapezoid_duration(122.6, 720.0, c.motor.profile_accel_dps2), 1e-9);
    }
  }
}

TEST(Simulator, VelocityModeRampsAndHolds) {
  PlantConfig c = unit_config();
  c.motor.control_mode = ControlMode::ProfileVelocity;
  Simulator sim(c);
  sim.execute(SetVelocity{-360.0});
  sim.execute(Wait{0.2});
  EXPECT_EQ(sim.state().switch_state.mode, SwitchMode::Traversing);
  sim.execute(SetVelocity{0.0});
  sim.execute(Wait{0.2});
  const double m = sim.state().motor_deg;
  sim.execute(Wait{0.1});
  EXPECT_DOUBLE_EQ(sim.state().motor_deg, m);
  EXPECT_THROW(sim.execute(MoveMotorTo{0.0}), Error);
}

TEST(Simulator, JointDisturbanceOnlyWhenDecoupled) {
  PlantConfig c = unit_config();
  c.initial_mode = SwitchMode::Neutral;
  DisturbanceProfile push;
  push.target = DisturbanceTarget::Joint;
  push.pulses = {{0.01, 0.05, 10.0}};
  Simulator sim(c);
  sim.execute(InjectDisturbance{push});
  sim.execute(Wait{0.03});
  EXPECT_NEAR(rad_to_deg(sim.state().joint_rad), 10.0, 1e-12);
  sim.execute(Wait{0.1});
  EXPECT_NEAR(sim.state().joint_rad, 0.0, 1e-12);
}

TEST(DisturbanceProfile, RandomPulsesReproducible) {
  const auto a = DisturbanceProfile::random_pulses(3, 5.0, 5.0, DisturbanceTarget::Disengaged);
  const auto b = DisturbanceProfile::random_pulses(3, 5.0, 5.0, DisturbanceTarget::Disengaged);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.pulses.empty());
  for (const auto& p : a.pulses) {
    EXPECT_LE(p.magnitude, 5.0);
    EXPECT_GE(p.magnitude, 2.5);
  }
}
