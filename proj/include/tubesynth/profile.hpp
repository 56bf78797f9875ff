#pragma once

#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace tubesynth::tubes {

/// Cubic time-warp 3s^2 - 2s^3 on [0,1], clamped outside.
double smoothstep(double s) noexcept;
double smoothstep_slope(double s) noexcept;

/// Piecewise C^1 scalar function of time on [0, inf).
///
/// Each piece covers [start_k, start_{k+1}); the last one extends to
/// infinity.  Segments are either closed-form (constant, smoothstep ramp) or
/// refer to an earlier immutable profile, which is how re-routed tubes keep
/// the original bound outside their adjustment window.
class ScalarProfile {
 public:
  struct Constant {
    double value;
  };
  /// v0 before t0, v1 after t1, smoothstep in between.
  struct Ramp {
    double t0, t1, v0, v1;
  };
  struct Follow {
    std::shared_ptr<const ScalarProfile> base;
  };
  /// Smoothstep blend between `base` and `value` over [t0, t1]; `into_value`
  /// selects the direction.
  struct Blend {
    std::shared_ptr<const ScalarProfile> base;
    double value;
    double t0, t1;
    bool into_value;
  };
  using Segment = std::variant<Constant, Ramp, Follow, Blend>;
  struct Piece {
    double start;
    Segment segment;
  };

  ScalarProfile() : ScalarProfile(constant(0.0)) {}
  explicit ScalarProfile(std::vector<Piece> pieces);

  static ScalarProfile constant(double value);
  /// Smoothstep legs between consecutive (time, value) knots, constant after
  /// the last knot and before the first.
  static ScalarProfile through(std::span<const double> times, std::span<const double> values);
  /// Keeps `base` outside [blend_in, blend_out_end]; blends into `value` over
  /// [blend_in, hold_start], holds it until hold_end, then returns to `base`
  /// by blend_out_end.
  static ScalarProfile detour(std::shared_ptr<const ScalarProfile> base, double blend_in,
                              double hold_start, double hold_end, double blend_out_end,
                              double value);

  double value(double t) const;
  double slope(double t) const;
  /// One-sided evaluation using the piece that ends at t.
  double value_left(double t) const;
  double slope_left(double t) const;

  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  /// Every time where a segment changes formula, including nested profiles.
  std::vector<double> knots() const;
  /// The profile is constant on [settle_time(), inf).
  double settle_time() const;

  bool operator==(const ScalarProfile& other) const;

 private:
  const Piece& piece_at(double t, bool left) const;

  std::vector<Piece> pieces_;
};

}  // namespace tubesynth::tubes
