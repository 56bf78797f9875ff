#include "tubesynth/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tubesynth::controller {

namespace {

std::string dim_name(std::size_t i) { return "dimension " + std::to_string(i + 1); }

void check_sizes(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) fail(ErrorKind::Structural, std::string(what) + ": vector sizes differ");
}

}  // namespace

void StageConfig::validate() const {
  if (stages == 0 || dimension == 0) fail(ErrorKind::Config, "controller needs at least one stage and dimension");
  if (kappa.size() != stages) fail(ErrorKind::Config, "controller.kappa needs one gain per stage");
  for (double k : kappa)
    if (!(k > 0.0)) fail(ErrorKind::Config, "controller.kappa entries must be positive");
  if (funnels.size() + 1 != stages) fail(ErrorKind::Config, "controller needs one funnel block per stage after the first");
  for (const auto& f : funnels)
    if (!(f.mu > 0.0) || !(f.q_ratio > 0.0) || !(f.q_min > 0.0) || f.rho < 0.0 || f.rho_abs < 0.0)
      fail(ErrorKind::Config, "funnel parameters must be positive");
}

Vector normalized_error_stage1(const Vector& x, const Vector& lower, const Vector& upper) {
  check_sizes(x, lower, "stage 1 error");
  check_sizes(x, upper, "stage 1 error");
  Vector e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(lower[i] < upper[i])) fail(ErrorKind::Parameter, "empty tube in " + dim_name(i));
    e[i] = (2.0 * x[i] - upper[i] - lower[i]) / (upper[i] - lower[i]);
    if (!(std::abs(e[i]) < 1.0)) fail(ErrorKind::TubeViolation, "output leaves the tube in " + dim_name(i));
  }
  return e;
}

Vector normalized_error_stagek(const Vector& x, const Vector& reference, const Vector& halfwidths) {
  check_sizes(x, reference, "stage error");
  check_sizes(x, halfwidths, "stage error");
  Vector e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(halfwidths[i] > 0.0)) fail(ErrorKind::Parameter, "funnel half-width must be positive in " + dim_name(i));
    e[i] = (x[i] - reference[i]) / halfwidths[i];
    if (!(std::abs(e[i]) < 1.0)) fail(ErrorKind::FunnelViolation, "tracking error leaves the funnel in " + dim_name(i));
  }
  return e;
}

Vector transform_error(const Vector& e) {
  Vector out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!(std::abs(e[i]) < 1.0)) fail(ErrorKind::Domain, "normalized error outside (-1, 1) in " + dim_name(i));
    out[i] = std::log((1.0 + e[i]) / (1.0 - e[i]));
  }
  return out;
}

Vector gain_matrix(const Vector& e, const Vector& widths) {
  check_sizes(e, widths, "gain matrix");
  Vector xi(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!(std::abs(e[i]) < 1.0)) fail(ErrorKind::Domain, "normalized error outside (-1, 1) in " + dim_name(i));
    if (!(widths[i] > 0.0)) fail(ErrorKind::Domain, "width must be positive in " + dim_name(i));
    xi[i] = 4.0 / (widths[i] * (1.0 - e[i] * e[i]));
  }
  return xi;
}

Vector stage_control(const Vector& epsilon, const Vector& xi, double kappa) {
  check_sizes(epsilon, xi, "stage control");
  Vector out(epsilon.size());
  for (std::size_t i = 0; i < epsilon.size(); ++i) out[i] = -kappa * xi[i] * epsilon[i];
  return out;
}

namespace {

StageFrame stage_one(const Vector& x, double tau, const tubes::SpatioTemporalTube& tube, double kappa) {
  const workspace::Box cross = tube.at(tau);
  StageFrame f;
  f.stage = 1;
  f.e = normalized_error_stage1(x, cross.lower, cross.upper);
  f.epsilon = transform_error(f.e);
  Vector widths(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) widths[i] = cross.upper[i] - cross.lower[i];
  f.xi = gain_matrix(f.e, widths);
  f.output = stage_control(f.epsilon, f.xi, kappa);
  return f;
}

StageFrame stage_k(std::size_t k, const Vector& x, const Vector& reference, const Vector& halfwidths, double kappa) {
  StageFrame f;
  f.stage = k;
  f.reference = reference;
  f.e = normalized_error_stagek(x, reference, halfwidths);
  f.epsilon = transform_error(f.e);
  f.xi = gain_matrix(f.e, halfwidths);
  f.output = stage_control(f.epsilon, f.xi, kappa);
  return f;
}

[[noreturn]] void rethrow_at(const Error& e, std::size_t stage, double tau) {
  std::ostringstream msg;
  msg << "stage " << stage << ": " << e.what() << " (tau = " << tau << " s)";
  fail(e.kind(), msg.str());
}

}  // namespace

ControlResult compute_control(const std::vector<Vector>& state, double tau, const tubes::SpatioTemporalTube& tube,
                              const FunnelAnchors& anchors, const StageConfig& cfg) {
  if (state.size() != cfg.stages) fail(ErrorKind::Structural, "state has the wrong number of stages");
  if (anchors.size() + 1 != cfg.stages) fail(ErrorKind::Structural, "funnel anchors do not match the stage count");
  ControlResult out;
  try {
    out.frames.push_back(stage_one(state[0], tau, tube, cfg.kappa[0]));
  } catch (const Error& e) {
    rethrow_at(e, 1, tau);
  }
  for (std::size_t k = 1; k < cfg.stages; ++k) {
    Vector halfwidths(cfg.dimension);
    for (std::size_t i = 0; i < cfg.dimension; ++i) halfwidths[i] = tubes::funnel_eval(anchors[k - 1][i], tau);
    try {
      out.frames.push_back(stage_k(k + 1, state[k], out.frames.back().output, halfwidths, cfg.kappa[k]));
    } catch (const Error& e) {
      rethrow_at(e, k + 1, tau);
    }
  }
  out.u = out.frames.back().output;
  return out;
}

FunnelAnchors anchor_funnels(const std::vector<Vector>& state, const tubes::SpatioTemporalTube& tube,
                             const StageConfig& cfg) {
  FunnelAnchors anchors;
  Vector reference;
  try {
    reference = stage_one(state[0], 0.0, tube, cfg.kappa[0]).output;
  } catch (const Error& e) {
    rethrow_at(e, 1, 0.0);
  }
  for (std::size_t k = 1; k < cfg.stages; ++k) {
    const FunnelParams& fp = cfg.funnels[k - 1];
    std::vector<tubes::Funnel> stage(cfg.dimension);
    Vector halfwidths(cfg.dimension);
    for (std::size_t i = 0; i < cfg.dimension; ++i) {
      const double p = std::abs(state[k][i] - reference[i]) * (1.0 + fp.rho) + fp.rho_abs;
      const double q = std::max(fp.q_ratio * p, fp.q_min);
      stage[i] = {std::max(p, q), q, fp.mu};
      halfwidths[i] = stage[i].p;
    }
    anchors.push_back(stage);
    try {
      reference = stage_k(k + 1, state[k], reference, halfwidths, cfg.kappa[k]).output;
    } catch (const Error& e) {
      rethrow_at(e, k + 1, 0.0);
    }
  }
  return anchors;
}

HybridController::HybridController(automaton::TripletDecomposition decomposition, automaton::Switcher switcher,
                                   workspace::LabeledWorkspace workspace, StageConfig stages, HybridOptions options)
    : decomposition_(std::move(decomposition)),
      switcher_(std::move(switcher)),
      workspace_(std::move(workspace)),
      stages_(std::move(stages)),
      options_(std::move(options)) {
  stages_.validate();
  if (decomposition_.triplets.empty()) fail(ErrorKind::Structural, "decomposition has no triplets");
  if (stages_.dimension != workspace_.dimension())
    fail(ErrorKind::Config, "controller dimension differs from the workspace dimension");
  if (!(options_.switch_fraction > 0.0 && options_.switch_fraction <= 1.0))
    fail(ErrorKind::Config, "switch_fraction must lie in (0, 1]");
}

const tubes::TubeParams& HybridController::params_for(const automaton::Triplet& t) const {
  auto it = options_.tube_params.find(t.key());
  return it == options_.tube_params.end() ? options_.default_tube : it->second;
}

SwitchEvent HybridController::enter(std::size_t position, const std::vector<Vector>& state, double t) {
  const auto& triplet = decomposition_.triplets[position];
  const auto task = workspace::ra_task_of_triplet(triplet, workspace_);
  auto synthesis = tubes::synthesize_stt(task, state[0], params_for(triplet));
  auto found = std::find(switcher_.triplet_states.begin(), switcher_.triplet_states.end(), triplet);
  if (found == switcher_.triplet_states.end()) fail(ErrorKind::Structural, "triplet missing from the switcher");
  SwitchEvent ev;
  ev.time = t;
  ev.from_node = state_.node;
  ev.to_node = switcher_.triplet_node(static_cast<std::size_t>(found - switcher_.triplet_states.begin()));
  ev.position = position;
  ev.triplet = triplet.key();
  ev.synthesis_rounds = synthesis.rounds;

  state_.anchors = anchor_funnels(state, synthesis.tube, stages_);
  state_.tube = std::move(synthesis.tube);
  state_.node = ev.to_node;
  state_.position = position;
  state_.switch_time = t;
  last_report_ = std::move(synthesis.report);
  return ev;
}

SwitchEvent HybridController::start(const std::vector<Vector>& state, double t) {
  if (state.size() != stages_.stages) fail(ErrorKind::Structural, "state has the wrong number of stages");
  const auto& first = decomposition_.triplets.front();
  auto node = std::find(switcher_.initial_states.begin(), switcher_.initial_states.end(), first.q);
  if (node == switcher_.initial_states.end()) fail(ErrorKind::Structural, "fragment does not start at an initial state");
  if (workspace_.label_of(state[0]) != first.label_in)
    fail(ErrorKind::Config, "initial output is not labelled '" + first.label_in + "'");
  state_ = HybridState{};
  state_.node = static_cast<std::size_t>(node - switcher_.initial_states.begin());
  return enter(0, state, t);
}

bool HybridController::guard(const Vector& y) const {
  const auto& tube = state_.tube;
  const workspace::Box terminal = tube.at(std::max(tube.reach_time, tube.settle_time()));
  if (!terminal.shrunk(options_.switch_fraction).contains(y)) return false;
  return workspace::contains_point(state_.tube.task.target_set, y);
}

StepResult HybridController::step(const std::vector<Vector>& state, double t) {
  if (!state_.position) fail(ErrorKind::Structural, "hybrid controller used before start()");
  StepResult out;
  if (guard(state[0])) out.event = enter(decomposition_.next(*state_.position), state, t);
  out.control = compute_control(state, t - state_.switch_time, state_.tube, state_.anchors, stages_);
  return out;
}

}  // namespace tubesynth::controller
