#pragma once

// Cable path length as a function of joint angle. Every path is strictly
// decreasing in its own coordinate over [-pi/2, pi/2]: winding the cable
// shortens it and drives the joint towards +pi/2 in that coordinate.

// Boost 1.74 pchip calls isnan unqualified; this makes boost::math::isnan visible.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "switchsim/error.hpp"
#include "switchsim/units.hpp"

namespace switchsim {

inline constexpr double kJointLimitRad = kPi / 2.0;

enum class PathKind { Linear, Curved, Tabulated };

inline const char* to_string(PathKind kind) noexcept {
  switch (kind) {
    case PathKind::Linear: return "linear";
    case PathKind::Curved: return "curved";
    case PathKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

struct PathKnot {
  double joint_rad;
  double length_mm;
  bool operator==(const PathKnot&) const = default;
};

class CablePath {
 public:
  CablePath() : CablePath(linear(300.0, 25.0)) {}

  /// L = L0 - r_j * q
  static CablePath linear(double l0_mm, double moment_arm_mm) {
    CablePath p(PathKind::Linear);
    p.l0_ = l0_mm;
    p.arm_ = moment_arm_mm;
    p.validate();
    return p;
  }

  /// L = L0 - r_j * q - a * sin(q)
  static CablePath curved(double l0_mm, double moment_arm_mm, double bow_mm) {
    CablePath p(PathKind::Curved);
    p.l0_ = l0_mm;
    p.arm_ = moment_arm_mm;
    p.bow_ = bow_mm;
    p.validate();
    return p;
  }

  /// Monotone piecewise-cubic (PCHIP) through at least four knots that cover
  /// the joint range.
  static CablePath tabulated(std::vector<PathKnot> knots) {
    CablePath p(PathKind::Tabulated);
    p.knots_ = std::move(knots);
    p.validate();
    std::vector<double> x, y;
    x.reserve(p.knots_.size());
    y.reserve(p.knots_.size());
    for (const auto& k : p.knots_) {
      x.push_back(k.joint_rad);
      y.push_back(k.length_mm);
    }
    p.spline_ = std::make_shared<Spline>(std::move(x), std::move(y));
    return p;
  }

  PathKind kind() const noexcept { return kind_; }
  double l0_mm() const noexcept { return l0_; }
  double moment_arm_mm() const noexcept { return arm_; }
  double bow_mm() const noexcept { return bow_; }
  const std::vector<PathKnot>& knots() const noexcept { return knots_; }

  double length(double joint_rad) const {
    switch (kind_) {
      case PathKind::Linear: return l0_ - arm_ * joint_rad;
      case PathKind::Curved: return l0_ - arm_ * joint_rad - bow_ * std::sin(joint_rad);
      case PathKind::Tabulated: return (*spline_)(joint_rad);
    }
    return 0.0;
  }

  /// Shortest (joint at +limit) and longest (joint at -limit) lengths.
  double min_length() const { return length(kJointLimitRad); }
  double max_length() const { return length(-kJointLimitRad); }

  bool operator==(const CablePath& o) const {
    return kind_ == o.kind_ && l0_ == o.l0_ && arm_ == o.arm_ && bow_ == o.bow_ && knots_ == o.knots_;
  }

 private:
  using Spline = boost::math::interpolators::pchip<std::vector<double>>;

  explicit CablePath(PathKind kind) : kind_(kind) {}

  void validate() const {
    switch (kind_) {
      case PathKind::Linear:
        SWITCHSIM_REQUIRE(std::isfinite(l0_) && std::isfinite(arm_) && arm_ > 0.0, ErrorCode::InvalidInput,
                          "linear path needs moment arm > 0");
        break;
      case PathKind::Curved:
        // dL/dq = -(r_j + a cos q) < 0 on the joint range
        SWITCHSIM_REQUIRE(std::isfinite(l0_) && std::isfinite(arm_) && std::isfinite(bow_) &&
                              arm_ + std::min(0.0, bow_) > 0.0,
                          ErrorCode::InvalidInput, "curved path not strictly decreasing (need r_j + min(a, 0) > 0)");
        break;
      case PathKind::Tabulated: {
        SWITCHSIM_REQUIRE(knots_.size() >= 4, ErrorCode::InvalidInput, "tabulated path needs >= 4 knots");
        for (std::size_t i = 1; i < knots_.size(); ++i) {
          SWITCHSIM_REQUIRE(knots_[i].joint_rad > knots_[i - 1].joint_rad, ErrorCode::InvalidInput,
                            "tabulated joint angles must be strictly increasing");
          SWITCHSIM_REQUIRE(knots_[i].length_mm < knots_[i - 1].length_mm, ErrorCode::InvalidInput,
                            "tabulated lengths must be strictly decreasing");
        }
        SWITCHSIM_REQUIRE(knots_.front().joint_rad <= -kJointLimitRad + 1e-12 &&
                              knots_.back().joint_rad >= kJointLimitRad - 1e-12,
                          ErrorCode::InvalidInput, "tabulated path must cover [-90, 90] deg");
        SWITCHSIM_REQUIRE(knots_.back().length_mm > 0.0, ErrorCode::InvalidInput, "path length must stay > 0");
        return;
      }
    }
    SWITCHSIM_REQUIRE(length(kJointLimitRad) > 0.0, ErrorCode::InvalidInput, "path length must stay > 0");
  }

  PathKind kind_ = PathKind::Linear;
  double l0_ = 0.0;
  double arm_ = 0.0;
  double bow_ = 0.0;
  std::vector<PathKnot> knots_;
  std::shared_ptr<const Spline> spline_;
};

// Lengths this close outside the attainable range are treated as the limit.
inline constexpr double kPayoutRangeSlackMm = 1e-9;

/// Inverse of CablePath::length on the joint range.
inline double joint_angle_from_payout(const CablePath& path, double length_mm) {
  const double lo_len = path.min_length();
  const double hi_len = path.max_length();
  SWITCHSIM_REQUIRE(std::isfinite(length_mm) && length_mm >= lo_len - kPayoutRangeSlackMm &&
                        length_mm <= hi_len + kPayoutRangeSlackMm,
                    ErrorCode::OutOfRange,
                    "payout " + std::to_string(length_mm) + " mm outside [" + std::to_string(lo_len) + ", " +
                        std::to_string(hi_len) + "]");
  if (length_mm <= lo_len) return kJointLimitRad;
  if (length_mm >= hi_len) return -kJointLimitRad;
  if (path.kind() == PathKind::Linear) {
    return (path.l0_mm() - length_mm) / path.moment_arm_mm();
  }

  auto residual = [&](double q) { return path.length(q) - length_mm; };
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15; };
  std::uintmax_t max_iter = 200;
  const auto bracket = boost::math::tools::toms748_solve(residual, -kJointLimitRad, kJointLimitRad,
                                                         hi_len - length_mm, lo_len - length_mm, tol, max_iter);
  const double q = 0.5 * (bracket.first + bracket.second);
  return std::abs(residual(bracket.first)) < std::abs(residual(q)) ? bracket.first : q;
}

}  // namespace switchsim
