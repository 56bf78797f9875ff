#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tubesynth/controller.hpp"
#include "tubesynth/expression.hpp"
#include "tubesynth/workspace.hpp"

namespace tubesynth::plants {

using Vector = std::vector<double>;

struct PlantDescriptor {
  std::string name;
  std::size_t stages = 1;
  std::size_t dimension = 1;
  std::map<std::string, double> parameters;
  /// Disturbance bound per stage.
  std::vector<double> w_max;
  /// Lower bound on the input gain of each stage.  Documentation only; the
  /// controller never reads it.
  std::string controllability_note;
};

/// Plant with stage-major state layout: stage k occupies
/// [k * dimension, (k + 1) * dimension).  The disturbance uses the same layout.
class Plant {
 public:
  explicit Plant(PlantDescriptor d) : descriptor_(std::move(d)) {}
  virtual ~Plant() = default;

  const PlantDescriptor& descriptor() const noexcept { return descriptor_; }
  std::size_t state_size() const noexcept { return descriptor_.stages * descriptor_.dimension; }
  virtual Vector derivative(const Vector& x, const Vector& u, const Vector& w) const = 0;

 private:
  PlantDescriptor descriptor_;
};

struct Manipulator2rParams {
  double m = 1.0;
  double l = 1.0;
  double g = 9.81;
  /// Printed: mass matrix exactly as displayed in the case study (its lower
  /// off-diagonal entry is c2/2).  Symmetric: the textbook two-rod model whose
  /// energy is conserved, used as the integrator energy gate.
  enum class Inertia { Printed, Symmetric } inertia = Inertia::Printed;
};

/// State (th1, th2, dth1, dth2); returns (dth1, dth2, ddth1, ddth2).
Vector manipulator_2r_derivative(const Vector& state, const Vector& tau, const Vector& d,
                                 const Manipulator2rParams& p);
/// Kinetic energy with the symmetric mass matrix plus potential energy.
double manipulator_2r_energy(const Vector& state, const Manipulator2rParams& p);

struct OmniParams {
  double R = 0.05;
  double L = 0.2;
  /// Row-major 3x3.
  std::array<double, 9> B{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

Vector omni_robot_derivative(const Vector& state, const Vector& u, const OmniParams& p);

std::unique_ptr<Plant> make_manipulator_2r(const Manipulator2rParams& p, std::vector<double> w_max);
std::unique_ptr<Plant> make_omni_robot(const OmniParams& p, std::vector<double> w_max);

/// f holds n expressions, g holds n*n row-major expressions, over the symbols
/// x1_1 ... xk_n of stages up to its own.
struct GenericStage {
  std::vector<std::string> f;
  std::vector<std::string> g;
};

std::unique_ptr<Plant> make_generic(std::size_t dimension, const std::vector<GenericStage>& stages,
                                    std::vector<double> w_max);

struct DisturbanceModel {
  enum class Kind { Zero, Uniform, Sinusoidal } kind = Kind::Zero;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  /// Angular frequency of the sinusoidal kind, rad/s.
  double frequency = 1.0;
};

/// Per-step samples of a DisturbanceModel; ||w||_inf <= amplitude always.
class DisturbanceSource {
 public:
  DisturbanceSource(const DisturbanceModel& model, std::size_t size);
  Vector sample(double t);

 private:
  DisturbanceModel model_;
  std::size_t size_;
  std::mt19937_64 rng_;
};

using Derivative = std::function<Vector(double, const Vector&)>;

/// Classical RK4 step.
Vector integrate_step(const Derivative& f, const Vector& x, double t, double dt);

struct SimTrace {
  std::size_t stages = 0;
  std::size_t dimension = 0;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> outputs;
  std::vector<Vector> controls;
  std::vector<Vector> lower;
  std::vector<Vector> upper;
  std::vector<Vector> disturbances;
  std::vector<std::size_t> triplet_index;
  /// Per row: max_i |e_{k,i}| for every stage k.
  std::vector<Vector> max_abs_e;
  std::vector<controller::SwitchEvent> events;

  std::size_t size() const noexcept { return times.size(); }
};

struct SimResult {
  SimTrace trace;
  /// Set when the run stopped early.
  std::optional<ErrorKind> failure;
  std::string message;
  /// Verification of every tube synthesized during the run.
  std::vector<tubes::VerificationReport> tube_reports;
  std::vector<tubes::SpatioTemporalTube> tubes;
};

SimResult simulate(const Plant& plant, controller::HybridController& controller, const Vector& x0, double horizon,
                   double dt, const DisturbanceModel& disturbance);

struct MonitorReport {
  std::size_t samples = 0;
  /// Labels with consecutive repeats collapsed.
  std::vector<std::string> word;
  /// Maximal runs per target proposition.
  std::map<std::string, std::size_t> visits;
  bool consistent = true;
  std::optional<std::size_t> first_inconsistent_sample;
  std::vector<std::string> unsafe_propositions;
  std::size_t unsafe_samples = 0;
  std::optional<std::size_t> first_unsafe_sample;
  /// Per stage: sup over the trace of max_i |e_{k,i}|.
  std::vector<double> sup_abs_e;
};

/// Samples outside the workspace bounds are labelled "<outside>" and count as unsafe.
MonitorReport trace_monitor(const SimTrace& trace, const workspace::LabeledWorkspace& workspace,
                            const automaton::TripletDecomposition& decomposition);

std::string trace_csv(const SimTrace& trace);
/// Inverse of trace_csv for the columns needed by the monitor.
SimTrace parse_trace_csv(const std::string& text);

}  // namespace tubesynth::plants
