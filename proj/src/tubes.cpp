#include "tubesynth/tubes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

namespace tubesynth::tubes {

namespace {

constexpr std::size_t kMaxReportedViolations = 64;

std::vector<double> sample_times(double horizon, double dt) {
  const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out.push_back(std::min(static_cast<double>(k) * dt, horizon));
  return out;
}

bool well_formed(const Box& b) {
  for (std::size_t i = 0; i < b.dimension(); ++i)
    if (!(b.lower[i] < b.upper[i])) return false;
  return true;
}

double point_box_distance(const Box& b, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.dimension(); ++i) {
    const double d = std::max({b.lower[i] - p[i], 0.0, p[i] - b.upper[i]});
    s += d * d;
  }
  return std::sqrt(s);
}

/// Index of the dimension where two boxes are closest to separating.
std::size_t separating_dimension(const Box& a, const Box& b) {
  std::size_t best = 0;
  double gap = -INFINITY;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    const double g = std::max(b.lower[i] - a.upper[i], a.lower[i] - b.upper[i]);
    if (g > gap) {
      gap = g;
      best = i;
    }
  }
  return best;
}

}  // namespace

Box SpatioTemporalTube::at(double t) const {
  Box b;
  b.lower.resize(dimension());
  b.upper.resize(dimension());
  for (std::size_t i = 0; i < dimension(); ++i) {
    b.lower[i] = lower[i].value(t);
    b.upper[i] = upper[i].value(t);
  }
  return b;
}

double SpatioTemporalTube::settle_time() const {
  double s = 0.0;
  for (const auto& p : lower) s = std::max(s, p.settle_time());
  for (const auto& p : upper) s = std::max(s, p.settle_time());
  return s;
}

double SpatioTemporalTube::horizon(double dt) const { return std::max(reach_time, settle_time()) + 10.0 * dt; }

bool SpatioTemporalTube::operator==(const SpatioTemporalTube& other) const {
  if (lower != other.lower || upper != other.upper || reach_time != other.reach_time) return false;
  if (adjustments.size() != other.adjustments.size()) return false;
  for (std::size_t k = 0; k < adjustments.size(); ++k) {
    const auto& a = adjustments[k];
    const auto& b = other.adjustments[k];
    if (a.dimension != b.dimension || a.start != b.start || a.end != b.end) return false;
  }
  return true;
}

double funnel_eval(const Funnel& f, double t) { return (f.p - f.q) * std::exp(-f.mu * t) + f.q; }

SpatioTemporalTube build_chained_tube(const Box& start, const std::vector<Box>& regions, double reach_time,
                                      double width_policy) {
  if (!(reach_time > 0.0)) fail(ErrorKind::Parameter, "reach time must be positive");
  if (!(width_policy > 0.0 && width_policy <= 1.0))
    fail(ErrorKind::Parameter, "width policy must lie in (0, 1]");
  if (regions.empty()) fail(ErrorKind::Structural, "tube needs a target region");
  const std::size_t n = start.dimension();
  for (const auto& r : regions)
    if (r.dimension() != n) fail(ErrorKind::Structural, "start and target dimensions differ");

  const std::size_t legs = regions.size();
  std::vector<double> times(legs + 1);
  for (std::size_t j = 0; j <= legs; ++j) times[j] = reach_time * static_cast<double>(j) / static_cast<double>(legs);
  times.back() = reach_time;

  SpatioTemporalTube tube;
  tube.reach_time = reach_time;
  const Box first = start.shrunk(width_policy);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> lo{first.lower[i]};
    std::vector<double> hi{first.upper[i]};
    for (const auto& region : regions) {
      // Stay put in dimensions that already fit, e.g. the free orientation
      // of a planar robot; moving them only costs control effort.
      if (lo.back() >= region.lower[i] && hi.back() <= region.upper[i]) {
        lo.push_back(lo.back());
        hi.push_back(hi.back());
      } else {
        const Box shrunk = region.shrunk(width_policy);
        lo.push_back(shrunk.lower[i]);
        hi.push_back(shrunk.upper[i]);
      }
    }
    tube.lower.push_back(ScalarProfile::through(times, lo));
    tube.upper.push_back(ScalarProfile::through(times, hi));
  }
  return tube;
}

SpatioTemporalTube build_reachability_tube(const Box& start, const Box& target, double reach_time,
                                           double width_policy) {
  return build_chained_tube(start, {target}, reach_time, width_policy);
}

std::vector<Conflict> detect_conflicts(const SpatioTemporalTube& tube, const BoxUnion& unsafe, double dt,
                                       double margin) {
  if (!(dt > 0.0)) fail(ErrorKind::Parameter, "sampling step must be positive");
  if (unsafe.empty()) return {};
  const double horizon = tube.horizon(dt);
  const auto times = sample_times(horizon, dt);
  std::vector<std::optional<std::size_t>> open(unsafe.size());
  std::vector<Conflict> out;
  std::vector<std::size_t> last_hit(unsafe.size(), 0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Box cross = tube.at(times[k]);
    for (std::size_t j = 0; j < unsafe.size(); ++j) {
      const bool hit = cross.separation(unsafe[j]) < margin;
      if (hit) {
        if (!open[j]) open[j] = k;
        last_hit[j] = k;
      }
      if (open[j] && (!hit || k + 1 == times.size())) {
        const std::size_t first = *open[j];
        const std::size_t last = last_hit[j];
        Conflict c{unsafe[j], std::max(0.0, times[first] - dt), std::min(horizon, times[last] + dt),
                   hit && k + 1 == times.size()};
        out.push_back(std::move(c));
        open[j].reset();
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Conflict& a, const Conflict& b) { return a.start < b.start; });
  return out;
}

CircumventPlan build_circumvent(const SpatioTemporalTube& tube, const Conflict& conflict, const Box& bounds,
                                double delta, double margin, double dt) {
  if (!(delta > 0.0)) fail(ErrorKind::Parameter, "padding must be positive");
  if (!(margin > 0.0)) fail(ErrorKind::Parameter, "margin must be positive");
  if (!(conflict.end > conflict.start)) fail(ErrorKind::Parameter, "conflict interval is empty");
  const std::size_t n = tube.dimension();
  const Box& obs = conflict.obstacle;

  std::vector<double> inside;
  for (double t = conflict.start; t < conflict.end; t += dt) inside.push_back(t);
  inside.push_back(conflict.end);
  std::vector<double> pads;
  for (double t = std::max(0.0, conflict.start - delta); t < conflict.start; t += dt) pads.push_back(t);
  for (double t = conflict.end + dt; t <= conflict.end + delta; t += dt) pads.push_back(t);
  pads.push_back(conflict.end + delta);

  std::optional<CircumventPlan> best;
  double best_shift = INFINITY;
  for (std::size_t d = 0; d < n; ++d) {
    double width = 0.0;
    for (double t : inside) width = std::max(width, tube.upper[d].value(t) - tube.lower[d].value(t));
    for (Side side : {Side::Below, Side::Above}) {
      const double gap = side == Side::Below ? obs.lower[d] - bounds.lower[d] : bounds.upper[d] - obs.upper[d];
      if (gap < width + 2.0 * margin - 1e-12) continue;
      CircumventPlan plan;
      plan.conflict = conflict;
      plan.dimension = d;
      plan.side = side;
      plan.delta = delta;
      if (side == Side::Below) {
        plan.corridor_upper = obs.lower[d] - margin;
        plan.corridor_lower = plan.corridor_upper - width;
      } else {
        plan.corridor_lower = obs.upper[d] + margin;
        plan.corridor_upper = plan.corridor_lower + width;
      }
      // While blending in and out the tube still moves in d, so wherever the
      // other dimensions overlap the obstacle it must already sit on the
      // corridor side.
      bool ok = true;
      for (double t : pads) {
        const Box cross = tube.at(t);
        bool others_overlap = true;
        for (std::size_t j = 0; j < n && others_overlap; ++j)
          if (j != d && std::max(obs.lower[j] - cross.upper[j], cross.lower[j] - obs.upper[j]) >= margin)
            others_overlap = false;
        if (!others_overlap) continue;
        if (side == Side::Below ? cross.upper[d] > plan.corridor_upper : cross.lower[d] < plan.corridor_lower) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      const double centre = 0.5 * (plan.corridor_lower + plan.corridor_upper);
      double shift = 0.0;
      for (double t : inside)
        shift = std::max(shift, std::abs(0.5 * (tube.lower[d].value(t) + tube.upper[d].value(t)) - centre));
      if (shift < best_shift) {
        best_shift = shift;
        best = plan;
      }
    }
  }
  if (!best) fail(ErrorKind::BlockedTask, "no gap around the obstacle is wide enough for the tube");
  return *best;
}

SpatioTemporalTube adapt_tube(const SpatioTemporalTube& tube, const CircumventPlan& plan) {
  if (plan.empty()) return tube;
  const double t0 = plan.conflict.start - plan.delta;
  const double t1 = plan.conflict.start;
  const double t2 = plan.conflict.end;
  const double t3 = plan.conflict.end + plan.delta;
  const std::size_t d = plan.dimension;
  if (d >= tube.dimension()) fail(ErrorKind::Structural, "plan dimension outside the tube");
  if (t0 < 0.0) fail(ErrorKind::InfeasiblePadding, "padded conflict window starts before t = 0");
  for (const auto& a : tube.adjustments)
    if (a.dimension == d && a.start < t3 && t0 < a.end)
      fail(ErrorKind::InfeasiblePadding, "padded conflict window collides with an earlier adjustment");
  SpatioTemporalTube out = tube;
  out.lower[d] = ScalarProfile::detour(std::make_shared<const ScalarProfile>(tube.lower[d]), t0, t1, t2, t3,
                                       plan.corridor_lower);
  out.upper[d] = ScalarProfile::detour(std::make_shared<const ScalarProfile>(tube.upper[d]), t0, t1, t2, t3,
                                       plan.corridor_upper);
  out.adjustments.push_back({d, t0, t3});
  return out;
}

bool VerificationReport::condition_failed(char c) const {
  return std::any_of(violations.begin(), violations.end(), [c](const Violation& v) { return v.condition == c; });
}

VerificationReport verify_stt(const SpatioTemporalTube& tube, const RaTask& task, double dt, double margin) {
  if (!(dt > 0.0)) fail(ErrorKind::Parameter, "sampling step must be positive");
  VerificationReport r;
  r.dt = dt;
  r.margin = margin;
  r.min_clearance = INFINITY;
  auto report = [&r](char c, double t, std::size_t dim, std::string detail) {
    r.passed = false;
    if (r.violations.size() < kMaxReportedViolations) r.violations.push_back({c, t, dim, std::move(detail)});
  };

  const Box first = tube.at(0.0);
  if (well_formed(first) && !workspace::covers(task.initial_set, first))
    report('a', 0.0, 0, "tube(0) is not inside the initial set");
  const Box arrival = tube.at(tube.reach_time);
  if (well_formed(arrival) && !workspace::covers(task.target_set, arrival))
    report('b', tube.reach_time, 0, "tube(t_c) is not inside the target set");

  auto times = sample_times(tube.horizon(dt), dt);
  // Knots and t_c are sampled too; the last sample lies on the constant tail,
  // so it stands for every later time.
  times.push_back(tube.reach_time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<bool> bad_order(tube.dimension(), false);
  std::vector<bool> in_conflict(task.unsafe_set.size(), false);
  for (double t : times) {
    const Box cross = tube.at(t);
    for (std::size_t i = 0; i < tube.dimension(); ++i) {
      r.max_slope = std::max({r.max_slope, std::abs(tube.lower[i].slope(t)), std::abs(tube.upper[i].slope(t))});
      const bool bad = !(cross.lower[i] < cross.upper[i]);
      if (bad && !bad_order[i]) report('d', t, i, "lower bound is not below upper bound");
      bad_order[i] = bad;
    }
    for (std::size_t j = 0; j < task.unsafe_set.size(); ++j) {
      const double sep = cross.separation(task.unsafe_set[j]);
      r.min_clearance = std::min(r.min_clearance, sep);
      const bool bad = sep < margin;
      if (bad && !in_conflict[j]) {
        std::ostringstream msg;
        msg << "clearance " << sep << " to unsafe box " << j << " is below the margin";
        report('c', t, separating_dimension(cross, task.unsafe_set[j]), msg.str());
      }
      in_conflict[j] = bad;
    }
  }
  r.samples = times.size();
  return r;
}

Box inscribed_box(const BoxUnion& set, const std::vector<double>& point) {
  std::optional<Box> best;
  double best_volume = -1.0;
  for (const auto& b : set) {
    if (b.dimension() != point.size()) fail(ErrorKind::Structural, "entry point dimension mismatch");
    if (!b.contains(point)) continue;
    Box c;
    c.lower.resize(point.size());
    c.upper.resize(point.size());
    double v = 1.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
      const double h = std::min(point[i] - b.lower[i], b.upper[i] - point[i]);
      c.lower[i] = point[i] - h;
      c.upper[i] = point[i] + h;
      v *= 2.0 * h;
    }
    if (v > best_volume) {
      best_volume = v;
      best = std::move(c);
    }
  }
  if (!best) fail(ErrorKind::Parameter, "entry point is not inside the initial set");
  if (!(best_volume > 0.0)) fail(ErrorKind::Parameter, "entry point lies on the boundary of the initial set");
  return *best;
}

SynthesisResult synthesize_stt(const RaTask& task, const std::vector<double>& entry, const TubeParams& params) {
  const Box start = inscribed_box(task.initial_set, entry);
  if (task.target_set.empty()) fail(ErrorKind::UnrealizableTriplet, "empty target set");
  const Box* target = nullptr;
  double nearest = INFINITY;
  for (const auto& b : task.target_set) {
    const double d = point_box_distance(b, entry);
    if (!target || d < nearest || (d == nearest && b.volume() > target->volume())) {
      nearest = d;
      target = &b;
    }
  }
  std::vector<Box> regions = params.waypoints;
  regions.push_back(*target);

  const double dt = params.effective_dt();
  const double delta = params.effective_delta();
  SynthesisResult result;
  result.tube = build_chained_tube(start, regions, params.reach_time, params.width_policy);
  result.tube.task = task;
  for (int round = 0;; ++round) {
    result.report = verify_stt(result.tube, task, dt, params.margin);
    result.rounds = round;
    if (result.report.passed) return result;
    if (round == params.max_rounds)
      throw SynthesisError("no verified tube after " + std::to_string(round) + " re-routing rounds", result.report);
    const auto conflicts = detect_conflicts(result.tube, task.unsafe_set, dt, params.margin);
    if (conflicts.empty()) throw SynthesisError("tube fails verification away from the unsafe set", result.report);
    const Conflict& c = conflicts.front();
    if (c.unresolvable) throw SynthesisError("unsafe set blocks the target region", result.report);
    try {
      // Twice the verification margin leaves room for rounding in the corridor.
      const auto plan = build_circumvent(result.tube, c, task.bounds, delta, 2.0 * params.margin, dt);
      result.tube = adapt_tube(result.tube, plan);
    } catch (const SynthesisError&) {
      throw;
    } catch (const Error& e) {
      throw SynthesisError(e.what(), result.report);
    }
  }
}

std::string tube_csv(const SpatioTemporalTube& tube, double dt) {
  std::string out = "t";
  for (std::size_t i = 1; i <= tube.dimension(); ++i)
    out += ",gamma_" + std::to_string(i) + "_L,gamma_" + std::to_string(i) + "_U";
  out += '\n';
  char buf[32];
  for (double t : sample_times(tube.horizon(dt), dt)) {
    std::snprintf(buf, sizeof buf, "%.9g", t);
    out += buf;
    const Box b = tube.at(t);
    for (std::size_t i = 0; i < tube.dimension(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.12g", b.lower[i]);
      out += buf;
      std::snprintf(buf, sizeof buf, ",%.12g", b.upper[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace tubesynth::tubes
