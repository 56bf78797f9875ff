#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "tubesynth/error.hpp"
#include "tubesynth/experiment.hpp"
#include "tubesynth/plants.hpp"

using namespace tubesynth;
using namespace tubesynth::plants;

namespace {

// Frozen by tests/oracles/scalar_oracles.py.
constexpr double kRestAcc1 = -5.1935294117647048;
constexpr double kRestAcc2 = -6.9247058823529439;
constexpr double kOmniRot[3] = {0.064951905283832906, -0.062500000000000014, -0.18750000000000003};
constexpr double kRk4Step = 1.1051708333333332;
constexpr double kExpTenth = 1.1051709180756477;

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

experiment::ExperimentConfig manipulator() {
  return experiment::load_experiment(TUBESYNTH_SOURCE_DIR "/configs/manipulator_2r/experiment.json");
}

double exp_error(double dt) {
  const Derivative f = [](double, const Vector& x) { return x; };
  Vector x{1.0};
  const int steps = static_cast<int>(std::lround(1.0 / dt));
  for (int k = 0; k < steps; ++k) x = integrate_step(f, x, k * dt, dt);
  return std::abs(x[0] - std::exp(1.0));
}

double energy_drift(Manipulator2rParams::Inertia inertia) {
  Manipulator2rParams p;
  p.g = 0.0;
  p.inertia = inertia;
  const Derivative f = [&p](double, const Vector& x) { return manipulator_2r_derivative(x, {0, 0}, {0, 0}, p); };
  Vector x{0.3, 0.5, 1.0, -0.7};
  const double e0 = manipulator_2r_energy(x, p);
  const double dt = 1e-4;
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    x = integrate_step(f, x, k * dt, dt);
    worst = std::max(worst, std::abs(manipulator_2r_energy(x, p) - e0) / std::abs(e0));
  }
  return worst;
}

}  // namespace

TEST_CASE("manipulator at rest falls under gravity") {
  const auto acc = manipulator_2r_derivative({0, 0, 0, 0}, {0, 0}, {0, 0}, Manipulator2rParams{});
  CHECK(acc[0] == 0.0);
  CHECK(acc[1] == 0.0);
  CHECK(std::abs(acc[2] - kRestAcc1) <= 1e-9);
  CHECK(std::abs(acc[3] - kRestAcc2) <= 1e-9);
}

TEST_CASE("gravity compensation holds the arm") {
  const Manipulator2rParams p;
  for (double th1 : {-1.0, 0.2, 2.5})
    for (double th2 : {-0.4, 0.0, 1.7}) {
      const double c1 = std::cos(th1), c12 = std::cos(th1 + th2);
      const Vector tau{p.m * p.g * p.l * (1.5 * c1 + 0.5 * c12), p.m * p.g * p.l * 0.5 * c12};
      const auto dx = manipulator_2r_derivative({th1, th2, 0, 0}, tau, {0, 0}, p);
      CHECK(std::abs(dx[2]) <= 1e-12);
      CHECK(std::abs(dx[3]) <= 1e-12);
    }
}

TEST_CASE("no Coriolis forces at rest") {
  Manipulator2rParams p;
  p.g = 0.0;
  for (double th2 : {-2.0, 0.3, 1.1}) {
    const auto dx = manipulator_2r_derivative({0.7, th2, 0, 0}, {0, 0}, {0, 0}, p);
    CHECK(dx[2] == 0.0);
    CHECK(dx[3] == 0.0);
  }
}

TEST_CASE("manipulator rejects non-finite input") {
  CHECK(kind_of([] { manipulator_2r_derivative({NAN, 0, 0, 0}, {0, 0}, {0, 0}, Manipulator2rParams{}); }) ==
        ErrorKind::Numeric);
}

TEST_CASE("omni robot kinematics") {
  const OmniParams p;
  CHECK(omni_robot_derivative({1, 2, 0.4}, {0, 0, 0}, p) == Vector{0, 0, 0});
  const auto v = omni_robot_derivative({0, 0, 0}, {1, 1, 1}, p);
  CHECK(std::abs(v[0]) <= 1e-12);
  CHECK(std::abs(v[1]) <= 1e-12);
  CHECK(std::abs(v[2] - 0.25) <= 1e-12);
  CHECK(omni_robot_derivative({3, -1, 0}, {0.3, -1, 2}, p) == omni_robot_derivative({0, 0, 0}, {0.3, -1, 2}, p));
  const auto r = omni_robot_derivative({0, 0, std::numbers::pi / 3}, {1, -2, 0.5}, p);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r[i] - kOmniRot[i]) <= 1e-12);
  // Heading rate does not depend on the heading.
  CHECK(omni_robot_derivative({0, 0, 2.0}, {1, -2, 0.5}, p)[2] == doctest::Approx(r[2]).epsilon(1e-14));

  OmniParams singular;
  singular.B = {1, 0, 0, 0, 0, 0, 0, 0, 1};
  CHECK(kind_of([&] { make_omni_robot(singular, {0.05}); }) == ErrorKind::Config);
}

TEST_CASE("generic integrator and double integrator") {
  const auto single = make_generic(2, {{{"0", "0"}, {"1", "0", "0", "1"}}}, {0.1});
  CHECK(single->derivative({5, 6}, {0.5, -1}, {0.01, 0.02}) == Vector{0.51, -0.98});

  const auto dbl = make_generic(1, {{{"0"}, {"1"}}, {{"0"}, {"1"}}}, {0, 0});
  CHECK(dbl->descriptor().stages == 2);
  CHECK(dbl->derivative({3, -2}, {0.7}, {0, 0}) == Vector{-2, 0.7});
}

TEST_CASE("generic quadratic field matches the closed form") {
  const auto plant =
      make_generic(2, {{{"x1_1^2 + 3*x1_1*x1_2", "-x1_2^2 + sin(x1_1)"}, {"1 + x1_2^2", "0", "0", "2"}}}, {0});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int k = 0; k < 100; ++k) {
    const double a = d(rng), b = d(rng), u0 = d(rng), u1 = d(rng);
    const auto dx = plant->derivative({a, b}, {u0, u1}, {0, 0});
    CHECK(dx[0] == doctest::Approx(a * a + 3 * a * b + (1 + b * b) * u0).epsilon(1e-13));
    CHECK(dx[1] == doctest::Approx(-b * b + std::sin(a) + 2 * u1).epsilon(1e-13));
  }
}

TEST_CASE("expression grammar") {
  auto none = [](std::string_view) -> std::optional<std::size_t> { return std::nullopt; };
  const std::vector<double> empty;
  CHECK(Expression::parse("-2^2", none).eval(empty) == -4.0);
  CHECK(Expression::parse("2^3^2", none).eval(empty) == 512.0);
  CHECK(Expression::parse("pow(2, 0.5) * sqrt(2)", none).eval(empty) == doctest::Approx(2.0));
  CHECK(Expression::parse("cos(pi) + 1e-3", none).eval(empty) == doctest::Approx(-0.999));
  CHECK(kind_of([&] { Expression::parse("1 +", none); }) == ErrorKind::Config);
  CHECK(kind_of([&] { Expression::parse("foo(1)", none); }) == ErrorKind::Config);
  CHECK(kind_of([&] { Expression::parse("(1", none); }) == ErrorKind::Config);
  // Stage 1 may not read stage 2 states.
  CHECK(kind_of([] { make_generic(1, {{{"x2_1"}, {"1"}}, {{"0"}, {"1"}}}, {0, 0}); }) == ErrorKind::Config);
  CHECK(kind_of([] { make_generic(2, {{{"0"}, {"1", "0", "0", "1"}}}, {0}); }) == ErrorKind::Config);
}

TEST_CASE("rk4 on the exponential") {
  const Derivative f = [](double, const Vector& x) { return x; };
  const double x1 = integrate_step(f, {1.0}, 0.0, 0.1)[0];
  CHECK(std::abs(x1 - kRk4Step) <= 1e-15);
  CHECK(std::abs(x1 - kExpTenth) <= 1e-7);
  const Derivative still = [](double, const Vector& x) { return Vector(x.size(), 0.0); };
  CHECK(integrate_step(still, {1.5, -2}, 0.0, 0.3) == Vector{1.5, -2});
  const double order = std::log2(exp_error(0.1) / exp_error(0.05));
  CHECK(order >= 3.7);
  CHECK(order <= 4.3);
}

TEST_CASE("rk4 reports the failing stage") {
  const Derivative bad = [](double t, const Vector& x) { return t > 0.01 ? Vector{NAN} : x; };
  try {
    integrate_step(bad, {1.0}, 0.0, 0.1);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
    CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
  }
}

TEST_CASE("energy gate") {
  const double symmetric = energy_drift(Manipulator2rParams::Inertia::Symmetric);
  CHECK(symmetric < 1e-4);
  // The printed mass matrix is not symmetric, so it has no conserved energy;
  // its drift is only reported.
  MESSAGE("relative energy drift, printed mass matrix: " << energy_drift(Manipulator2rParams::Inertia::Printed));
}

TEST_CASE("disturbance samples stay bounded") {
  for (auto kind : {DisturbanceModel::Kind::Uniform, DisturbanceModel::Kind::Sinusoidal}) {
    DisturbanceSource src({kind, 0.05, 3, 2.0}, 4);
    double worst = 0;
    for (int k = 0; k < 20000; ++k)
      for (double v : src.sample(k * 1e-3)) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 0.05);
    CHECK(worst > 0.04);
  }
  DisturbanceSource a({DisturbanceModel::Kind::Uniform, 0.1, 9, 1.0}, 2), b({DisturbanceModel::Kind::Uniform, 0.1, 9, 1.0}, 2);
  for (int k = 0; k < 100; ++k) CHECK(a.sample(0) == b.sample(0));
  DisturbanceSource zero({}, 3);
  CHECK(zero.sample(1.0) == Vector{0, 0, 0});
}

TEST_CASE("zero horizon keeps the initial record") {
  auto cfg = manipulator();
  cfg.horizon = 0.0;
  const auto run = experiment::run_simulation(cfg);
  CHECK_FALSE(run.result.failure);
  CHECK(run.result.trace.size() == 1);
  CHECK(run.result.trace.times[0] == 0.0);
}

TEST_CASE("simulation is deterministic and round-trips through csv") {
  auto cfg = manipulator();
  cfg.horizon = 3.0;
  cfg.plant.disturbance = {DisturbanceModel::Kind::Uniform, 0.05, 4, 1.0};
  const auto a = experiment::run_simulation(cfg);
  const auto b = experiment::run_simulation(cfg);
  REQUIRE_FALSE(a.result.failure);
  CHECK(a.trace_text == b.trace_text);
  const auto& tr = a.result.trace;
  CHECK(tr.size() == 3001);
  for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr.times[k] > tr.times[k - 1]);
  for (const auto& w : tr.disturbances)
    for (double v : w) CHECK(std::abs(v) <= 0.05);
  CHECK(trace_csv(parse_trace_csv(a.trace_text)) == a.trace_text);

  cfg.seed = 5;
  cfg.plant.disturbance.seed = 5;
  CHECK(experiment::run_simulation(cfg).trace_text != a.trace_text);
}

TEST_CASE("trace parser is strict") {
  CHECK(kind_of([] { parse_trace_csv(""); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_trace_csv("t,x1_1,y_1\n0,1,1\n"); }) == ErrorKind::Parse);
  SimTrace tr;
  tr.stages = 1;
  tr.dimension = 1;
  const std::string header = trace_csv(tr);
  CHECK(parse_trace_csv(header + "0,1,1,0,0,2,0,0.5,0\n").size() == 1);
  CHECK(kind_of([&] { parse_trace_csv(header + "0,1,1,0,0,2,0,0.5\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { parse_trace_csv(header + "0,1,x,0,0,2,0,0.5,0\n"); }) == ErrorKind::Parse);
}

namespace {

SimTrace trace_through(const std::vector<Vector>& ys, std::size_t triplet = 0) {
  SimTrace tr;
  tr.stages = 2;
  tr.dimension = 2;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    tr.times.push_back(0.001 * static_cast<double>(k));
    tr.states.push_back({ys[k][0], ys[k][1], 0, 0});
    tr.outputs.push_back(ys[k]);
    tr.controls.push_back({0, 0});
    tr.lower.push_back({-3, -3});
    tr.upper.push_back({3, 3});
    tr.disturbances.push_back({0, 0, 0, 0});
    tr.triplet_index.push_back(triplet);
    tr.max_abs_e.push_back({0.25, 0.5});
  }
  return tr;
}

}  // namespace

TEST_CASE("monitor verdicts") {
  const auto cfg = manipulator();
  const auto d = experiment::decompose(cfg);

  SUBCASE("default region only") {
    const auto r = trace_monitor(trace_through({{-2, -2}, {-2.1, -2}, {-2.2, -2}}), cfg.workspace, d.triplets);
    CHECK(r.word == std::vector<std::string>{"p3"});
    CHECK(r.visits.at("p1") == 0);
    CHECK(r.visits.at("p2") == 0);
    CHECK(r.consistent);
    CHECK(r.unsafe_samples == 0);
    CHECK(r.sup_abs_e == Vector{0.25, 0.5});
  }
  SUBCASE("entering the obstacle") {
    const auto r = trace_monitor(trace_through({{0.5, 0.1}, {-1, 1}, {0.05, 2.0}, {0.06, 2.0}, {-1, 1}}),
                                 cfg.workspace, d.triplets);
    CHECK(r.unsafe_propositions == std::vector<std::string>{"p0"});
    REQUIRE(r.first_unsafe_sample);
    CHECK(*r.first_unsafe_sample == 2);
    CHECK(r.unsafe_samples == 2);
    CHECK(r.word == std::vector<std::string>{"p1", "p3", "p0", "p3"});
    CHECK_FALSE(r.consistent);
  }
  SUBCASE("leaving the workspace") {
    const auto r = trace_monitor(trace_through({{-2, -2}, {-2, -3.5}}), cfg.workspace, d.triplets);
    CHECK(r.unsafe_samples == 1);
    CHECK(r.word.back() == "<outside>");
  }
  SUBCASE("targets in the order of the active triplet") {
    // Triplet 1 is (q1, q0, q1): it starts in T2 and heads for T1, so T2 then
    // T1 is fine while the active index says so.
    const auto ok = trace_monitor(trace_through({{2.6, 0.1}, {0, 0}, {0.5, 0.1}}, 1), cfg.workspace, d.triplets);
    CHECK(ok.consistent);
    CHECK(ok.visits.at("p1") == 1);
    CHECK(ok.visits.at("p2") == 1);
  }
  SUBCASE("truncated trace") {
    const auto r = trace_monitor(trace_through({{0.5, 0.1}}), cfg.workspace, d.triplets);
    CHECK(r.samples == 1);
    CHECK(r.visits.at("p1") == 1);
    CHECK(experiment::monitor_status(r, cfg.required_visits) == experiment::kSpecificationViolated);
  }
}
