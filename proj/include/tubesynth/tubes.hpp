#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubesynth/error.hpp"
#include "tubesynth/profile.hpp"
#include "tubesynth/workspace.hpp"

namespace tubesynth::tubes {

using workspace::Box;
using workspace::BoxUnion;
using workspace::RaTask;

/// Window [start, end] where one dimension of a tube was re-routed.
struct Adjustment {
  std::size_t dimension;
  double start;
  double end;
};

struct SpatioTemporalTube {
  std::vector<ScalarProfile> lower;
  std::vector<ScalarProfile> upper;
  double reach_time = 0.0;
  RaTask task;
  std::vector<Adjustment> adjustments;

  std::size_t dimension() const noexcept { return lower.size(); }
  /// Cross-section at t; not validated, so a broken tube may yield an empty box.
  Box at(double t) const;
  /// Every profile is constant from this time on.
  double settle_time() const;
  /// Sampling horizon used by detection and verification.
  double horizon(double dt) const;

  bool operator==(const SpatioTemporalTube& other) const;
};

struct Funnel {
  double p;
  double q;
  double mu;
};

double funnel_eval(const Funnel& f, double t);

struct TubeParams {
  double reach_time = 10.0;
  double width_policy = 0.9;
  /// Padding around conflict windows; negative means 0.05 * reach_time.
  double delta = -1.0;
  double margin = 1e-6;
  /// Verification step; negative means reach_time / 1e4.
  double dt = -1.0;
  int max_rounds = 8;
  /// Intermediate regions visited in order before the target.
  std::vector<Box> waypoints;

  double effective_delta() const { return delta > 0.0 ? delta : 0.05 * reach_time; }
  double effective_dt() const { return dt > 0.0 ? dt : reach_time / 1e4; }
};

SpatioTemporalTube build_reachability_tube(const Box& start, const Box& target, double reach_time,
                                           double width_policy);

/// Chains smoothstep legs start -> waypoints... -> target over [0, reach_time]
/// in equal time slices.  A dimension whose current interval already lies in
/// the next region is held still for that leg.
SpatioTemporalTube build_chained_tube(const Box& start, const std::vector<Box>& regions,
                                      double reach_time, double width_policy);

struct Conflict {
  Box obstacle;
  double start;
  double end;
  /// The overlap persists to the sampling horizon.
  bool unresolvable = false;
};

/// Sampled intervals where the tube comes closer than `margin` to an unsafe
/// box (margin 0 means touching boxes do not conflict).
std::vector<Conflict> detect_conflicts(const SpatioTemporalTube& tube, const BoxUnion& unsafe,
                                       double dt, double margin = 0.0);

enum class Side { Below, Above };

struct CircumventPlan {
  Conflict conflict;
  std::size_t dimension = 0;
  Side side = Side::Below;
  double corridor_lower = 0.0;
  double corridor_upper = 0.0;
  double delta = 0.0;

  bool empty() const noexcept { return !(conflict.end > conflict.start); }
};

CircumventPlan build_circumvent(const SpatioTemporalTube& tube, const Conflict& conflict,
                                const Box& bounds, double delta, double margin, double dt);

SpatioTemporalTube adapt_tube(const SpatioTemporalTube& tube, const CircumventPlan& plan);

struct Violation {
  /// One of 'a' (start), 'b' (target), 'c' (unsafe clearance), 'd' (ordering).
  char condition;
  double time;
  std::size_t dimension;
  std::string detail;
};

struct VerificationReport {
  bool passed = true;
  std::vector<Violation> violations;
  std::size_t samples = 0;
  double dt = 0.0;
  double margin = 0.0;
  double max_slope = 0.0;
  /// Smallest clearance to the unsafe set over all samples (inf without U).
  double min_clearance = 0.0;
  bool condition_failed(char c) const;
};

VerificationReport verify_stt(const SpatioTemporalTube& tube, const RaTask& task, double dt, double margin);

class SynthesisError : public Error {
 public:
  SynthesisError(const std::string& what, VerificationReport report)
      : Error(ErrorKind::SynthesisFailure, what), report_(std::move(report)) {}
  const VerificationReport& report() const noexcept { return report_; }

 private:
  VerificationReport report_;
};

/// Largest box in `set` centred on `point`, as half-widths per dimension.
Box inscribed_box(const BoxUnion& set, const std::vector<double>& point);

struct SynthesisResult {
  SpatioTemporalTube tube;
  VerificationReport report;
  int rounds = 0;
};

SynthesisResult synthesize_stt(const RaTask& task, const std::vector<double>& entry, const TubeParams& params);

/// Header plus one row per sample: t, lower_1, upper_1, ..., lower_n, upper_n.
std::string tube_csv(const SpatioTemporalTube& tube, double dt);

}  // namespace tubesynth::tubes
