#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tubesynth/automaton.hpp"
#include "tubesynth/tubes.hpp"
#include "tubesynth/workspace.hpp"

namespace tubesynth::controller {

using Vector = std::vector<double>;

/// Funnel shaping for one intermediate stage; p is measured at each switch.
struct FunnelParams {
  double q_ratio = 0.05;
  double q_min = 1e-3;
  double mu = 2.0;
  double rho = 0.2;
  double rho_abs = 1e-3;
};

struct StageConfig {
  std::size_t stages = 1;
  std::size_t dimension = 1;
  /// One gain per stage.
  std::vector<double> kappa;
  /// One entry per stage 2..N.
  std::vector<FunnelParams> funnels;

  void validate() const;
};

struct StageFrame {
  std::size_t stage;
  /// Reference for stages >= 2; empty at stage 1.
  Vector reference;
  Vector e;
  Vector epsilon;
  /// Diagonal of the gain matrix.
  Vector xi;
  /// Reference handed to the next stage (the input at the last stage).
  Vector output;
};

Vector normalized_error_stage1(const Vector& x, const Vector& lower, const Vector& upper);
Vector normalized_error_stagek(const Vector& x, const Vector& reference, const Vector& halfwidths);
Vector transform_error(const Vector& e);
Vector gain_matrix(const Vector& e, const Vector& widths);
Vector stage_control(const Vector& epsilon, const Vector& xi, double kappa);

/// Stages 2..N: one funnel per dimension.
using FunnelAnchors = std::vector<std::vector<tubes::Funnel>>;

struct ControlResult {
  Vector u;
  std::vector<StageFrame> frames;
};

/// Closed-form recursion at local time tau.  `state[k]` holds stage k+1.
/// Never reads the plant model.
ControlResult compute_control(const std::vector<Vector>& state, double tau, const tubes::SpatioTemporalTube& tube,
                              const FunnelAnchors& anchors, const StageConfig& cfg);

/// Funnels whose initial half-width covers the current tracking error.
FunnelAnchors anchor_funnels(const std::vector<Vector>& state, const tubes::SpatioTemporalTube& tube,
                             const StageConfig& cfg);

struct HybridState {
  /// Node of the switcher (initial state or triplet).
  std::size_t node = 0;
  /// Index into the triplet decomposition; nullopt before the first switch.
  std::optional<std::size_t> position;
  tubes::SpatioTemporalTube tube;
  double switch_time = 0.0;
  FunnelAnchors anchors;
};

struct SwitchEvent {
  double time;
  std::size_t from_node;
  std::size_t to_node;
  std::size_t position;
  std::string triplet;
  int synthesis_rounds;
};

struct StepResult {
  ControlResult control;
  std::optional<SwitchEvent> event;
};

struct HybridOptions {
  /// Triplet key -> tube parameters; missing keys use `default_tube`.
  std::map<std::string, tubes::TubeParams> tube_params;
  tubes::TubeParams default_tube;
  /// Switch once y lies in the final tube cross-section scaled by this factor.
  double switch_fraction = 0.5;
};

/// Sequences the reach-avoid controllers along the decomposition of one
/// accepting fragment.
class HybridController {
 public:
  HybridController(automaton::TripletDecomposition decomposition, automaton::Switcher switcher,
                   workspace::LabeledWorkspace workspace, StageConfig stages, HybridOptions options);

  const HybridState& state() const noexcept { return state_; }
  const automaton::TripletDecomposition& decomposition() const noexcept { return decomposition_; }
  const automaton::Switcher& switcher() const noexcept { return switcher_; }
  const StageConfig& stages() const noexcept { return stages_; }
  const tubes::TubeParams& params_for(const automaton::Triplet& t) const;

  /// Takes the initial edge of the switcher; y must carry the fragment's
  /// first label.
  SwitchEvent start(const std::vector<Vector>& state, double t);
  StepResult step(const std::vector<Vector>& state, double t);
  /// Tube and report of the synthesis behind the latest switch.
  const tubes::VerificationReport& last_report() const noexcept { return last_report_; }

 private:
  SwitchEvent enter(std::size_t position, const std::vector<Vector>& state, double t);
  bool guard(const Vector& y) const;

  automaton::TripletDecomposition decomposition_;
  automaton::Switcher switcher_;
  workspace::LabeledWorkspace workspace_;
  StageConfig stages_;
  HybridOptions options_;
  HybridState state_;
  tubes::VerificationReport last_report_;
};

}  // namespace tubesynth::controller
