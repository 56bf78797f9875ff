#include <cmath>

#include "doctest.h"
#include "tubesynth/controller.hpp"
#include "tubesynth/error.hpp"
#include "tubesynth/experiment.hpp"

using namespace tubesynth;
using namespace tubesynth::controller;
using tubes::Box;

namespace {

// Frozen by tests/oracles/scalar_oracles.py.
constexpr double kLn3 = 1.0986122886681098;
constexpr double kXiHalf = 2.6666666666666665;
constexpr double kStageControlHalf = -2.9296327697816258;
constexpr double kChainU = -7.3240819244540649;

constexpr double kTol = 1e-9;

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

tubes::SpatioTemporalTube fixed_tube(const Box& b) { return tubes::build_reachability_tube(b, b, 1.0, 1.0); }

StageConfig config(std::size_t stages, std::size_t dim, std::vector<double> kappa) {
  StageConfig c;
  c.stages = stages;
  c.dimension = dim;
  c.kappa = std::move(kappa);
  c.funnels.assign(stages - 1, FunnelParams{});
  return c;
}

experiment::ExperimentConfig manipulator() {
  return experiment::load_experiment(TUBESYNTH_SOURCE_DIR "/configs/manipulator_2r/experiment.json");
}

}  // namespace

TEST_CASE("stage one error") {
  CHECK(normalized_error_stage1({1.0}, {0.0}, {2.0})[0] == 0.0);
  CHECK(std::abs(normalized_error_stage1({1.5}, {0.0}, {2.0})[0] - 0.5) <= kTol);
  CHECK(kind_of([] { normalized_error_stage1({2.0}, {0.0}, {2.0}); }) == ErrorKind::TubeViolation);
  try {
    normalized_error_stage1({0.5, 3.0}, {0.0, 0.0}, {1.0, 1.0});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("dimension 2") != std::string::npos);
  }
}

TEST_CASE("stage k error") {
  CHECK(normalized_error_stagek({0.3}, {0.3}, {0.1})[0] == 0.0);
  CHECK(std::abs(normalized_error_stagek({1.4}, {1.0}, {0.8})[0] - 0.5) <= kTol);
  CHECK(kind_of([] { normalized_error_stagek({1.8}, {1.0}, {0.8}); }) == ErrorKind::FunnelViolation);
}

TEST_CASE("transformed error") {
  CHECK(transform_error({0.0})[0] == 0.0);
  CHECK(std::abs(transform_error({0.5})[0] - kLn3) <= kTol);
  for (double e = -0.99; e < 0.99; e += 0.0137) CHECK(std::abs(transform_error({-e})[0] + transform_error({e})[0]) <= 1e-12);
  CHECK(kind_of([] { transform_error({1.0}); }) == ErrorKind::Domain);
  CHECK(kind_of([] { transform_error({-1.2}); }) == ErrorKind::Domain);
}

TEST_CASE("gain matrix") {
  CHECK(std::abs(gain_matrix({0.0}, {2.0})[0] - 2.0) <= kTol);
  CHECK(std::abs(gain_matrix({0.5}, {2.0})[0] - kXiHalf) <= kTol);
  CHECK(std::abs(gain_matrix({0.0}, {4.0})[0] - 1.0) <= kTol);
  // Per-dimension, so two errors close to one stay finite.
  const auto xi = gain_matrix({0.8, 0.8}, {1.0, 1.0});
  CHECK(std::isfinite(xi[0]));
  CHECK(xi[0] > 0);
  CHECK(kind_of([] { gain_matrix({1.0}, {2.0}); }) == ErrorKind::Domain);
}

TEST_CASE("stage control") {
  CHECK(stage_control({0.0, 0.0}, {3.0, 5.0}, 2.0) == Vector{0.0, 0.0});
  const double e = 0.5;
  const double u = stage_control(transform_error({e}), gain_matrix({e}, {2.0}), 1.0)[0];
  CHECK(std::abs(u - kStageControlHalf) <= kTol);
  const double v = stage_control(transform_error({-e}), gain_matrix({-e}, {2.0}), 1.0)[0];
  CHECK(v == -u);
}

TEST_CASE("centred state gives zero input") {
  const Box b({-1, 0}, {1, 4});
  const auto tube = fixed_tube(b);
  const auto cfg = config(2, 2, {1.0, 1.0});
  const FunnelAnchors anchors{{{0.5, 0.1, 2.0}, {0.5, 0.1, 2.0}}};
  const auto r = compute_control({{0.0, 2.0}, {0.0, 0.0}}, 0.3, tube, anchors, cfg);
  CHECK(r.u == Vector{0.0, 0.0});
  REQUIRE(r.frames.size() == 2);
  CHECK(r.frames[1].reference == Vector{0.0, 0.0});
}

TEST_CASE("single stage input is the stage one law") {
  const auto tube = fixed_tube(Box({0}, {2}));
  const auto cfg = config(1, 1, {1.0});
  const auto r = compute_control({{1.5}}, 0.0, tube, {}, cfg);
  CHECK(std::abs(r.u[0] - kStageControlHalf) <= kTol);
  CHECK(r.frames.size() == 1);
}

TEST_CASE("two stage chain") {
  const auto tube = fixed_tube(Box({0}, {2}));
  const auto cfg = config(2, 1, {1.0, 1.0});
  const FunnelAnchors anchors{{{0.8, 0.8, 2.0}}};
  const auto r = compute_control({{1.5}, {kStageControlHalf + 0.4}}, 0.0, tube, anchors, cfg);
  CHECK(std::abs(r.frames[0].output[0] - kStageControlHalf) <= kTol);
  CHECK(std::abs(r.frames[1].e[0] - 0.5) <= kTol);
  CHECK(std::abs(r.u[0] - kChainU) <= kTol);

  try {
    compute_control({{1.5}, {kStageControlHalf + 0.9}}, 0.25, tube, anchors, cfg);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FunnelViolation);
    CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
  }
}

TEST_CASE("mirrored errors negate the input") {
  const auto tube = fixed_tube(Box({-1, -2}, {1, 2}));
  const auto cfg = config(2, 2, {0.7, 1.3});
  const FunnelAnchors anchors{{{0.9, 0.1, 2.0}, {1.4, 0.2, 1.0}}};
  const double tau = 0.4;
  // Stage 2 sits at a fixed offset from its reference so the mirror is exact.
  const Vector r = compute_control({{0.3, -1.1}}, tau, tube, {}, config(1, 2, {0.7})).u;
  const Vector x2{r[0] + 0.05, r[1] - 0.02};
  const auto a = compute_control({{0.3, -1.1}, x2}, tau, tube, anchors, cfg);
  const auto b = compute_control({{-0.3, 1.1}, {-x2[0], -x2[1]}}, tau, tube, anchors, cfg);
  for (std::size_t i = 0; i < 2; ++i) CHECK(b.u[i] == doctest::Approx(-a.u[i]).epsilon(1e-12));
}

TEST_CASE("input is linear in the last gain") {
  const auto tube = fixed_tube(Box({0}, {2}));
  auto cfg = config(2, 1, {1.0, 1.0});
  const FunnelAnchors anchors{{{0.8, 0.8, 2.0}}};
  const std::vector<Vector> x{{1.5}, {kStageControlHalf + 0.4}};
  const double u1 = compute_control(x, 0.0, tube, anchors, cfg).u[0];
  cfg.kappa[1] = 2.0;
  CHECK(compute_control(x, 0.0, tube, anchors, cfg).u[0] == 2.0 * u1);
}

TEST_CASE("anchored funnels contain the current error") {
  const auto tube = fixed_tube(Box({0}, {2}));
  const auto cfg = config(2, 1, {1.0, 1.0});
  const std::vector<Vector> x{{1.5}, {3.0}};
  const auto anchors = anchor_funnels(x, tube, cfg);
  const double err = std::abs(3.0 - kStageControlHalf);
  CHECK(anchors[0][0].p == doctest::Approx(err * 1.2 + 1e-3));
  CHECK(anchors[0][0].q == doctest::Approx(0.05 * anchors[0][0].p));
  CHECK(anchors[0][0].mu == 2.0);
  CHECK_NOTHROW(compute_control(x, 0.0, tube, anchors, cfg));
}

TEST_CASE("invalid stage configuration") {
  CHECK(kind_of([] { config(2, 1, {1.0, 0.0}).validate(); }) == ErrorKind::Config);
  CHECK(kind_of([] { config(2, 1, {1.0}).validate(); }) == ErrorKind::Config);
}

TEST_CASE("switch guard on the manipulator") {
  const auto cfg = manipulator();
  const auto d = experiment::decompose(cfg);
  HybridController hc(d.triplets, d.switcher, cfg.workspace, cfg.stages, cfg.hybrid);
  const Vector y0{cfg.initial_state[0], cfg.initial_state[1]};
  const auto first = hc.start({y0, {0, 0}}, 0.0);
  CHECK(first.position == 0);
  CHECK(d.triplets.triplets[0].label_out == "p2");

  auto r = hc.step({y0, {0, 0}}, 0.001);
  CHECK_FALSE(r.event);
  CHECK(*hc.state().position == 0);

  const Box& t2 = cfg.workspace.regions().at("p2").front();
  const Vector entry{t2.center(0), t2.center(1)};
  r = hc.step({entry, {0, 0}}, 8.5);
  REQUIRE(r.event);
  CHECK(r.event->position == 1);
  CHECK(r.event->time == 8.5);
  CHECK(hc.state().switch_time == 8.5);
  CHECK(d.triplets.triplets[1].label_out == "p1");
  CHECK(hc.last_report().passed);
}

TEST_CASE("switch times increase along the cyclic order") {
  const auto cfg = manipulator();
  const auto run = experiment::run_simulation(cfg);
  REQUIRE_FALSE(run.result.failure);
  const auto& events = run.result.trace.events;
  REQUIRE(events.size() >= 4);
  const auto& dec = run.decomposition.triplets;
  for (std::size_t k = 1; k < events.size(); ++k) {
    CHECK(events[k].time > events[k - 1].time);
    CHECK(events[k].position == dec.next(events[k - 1].position));
    CHECK(events[k].triplet == dec.triplets[events[k].position].key());
  }
  for (const auto& row : run.result.trace.max_abs_e)
    for (double e : row) CHECK(e < 1.0);
  // The triplet column only changes on switch rows.
  const auto& idx = run.result.trace.triplet_index;
  std::size_t changes = 0;
  for (std::size_t k = 1; k < idx.size(); ++k) changes += idx[k] != idx[k - 1];
  CHECK(changes == events.size() - 1);
}
