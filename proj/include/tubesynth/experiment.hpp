#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tubesynth/automaton.hpp"
#include "tubesynth/controller.hpp"
#include "tubesynth/plants.hpp"
#include "tubesynth/workspace.hpp"

namespace tubesynth::experiment {

namespace fs = std::filesystem;

/// Process exit codes, shared with the C API status values.
enum Status : int {
  kOk = 0,
  kConfigError = 1,
  kNoFragment = 2,
  kSynthesisFailure = 3,
  kViolation = 4,
  kSpecificationViolated = 5,
};

int status_of(ErrorKind kind) noexcept;

struct PlantSpec {
  std::string type;
  plants::Manipulator2rParams manipulator;
  plants::OmniParams omni;
  std::size_t dimension = 0;
  std::vector<plants::GenericStage> stages;
  std::vector<double> w_max;
  plants::DisturbanceModel disturbance;

  std::unique_ptr<plants::Plant> build() const;
};

struct ExperimentConfig {
  ExperimentConfig(automaton::Nba a, workspace::LabeledWorkspace w) : nba(std::move(a)), workspace(std::move(w)) {}

  fs::path source;
  fs::path automaton_path;
  fs::path workspace_path;
  automaton::Nba nba;
  workspace::LabeledWorkspace workspace;
  /// Label of the first fragment edge; defaults to the label of the initial output.
  std::optional<std::string> initial_proposition;
  PlantSpec plant;
  controller::StageConfig stages;
  controller::HybridOptions hybrid;
  std::vector<double> initial_state;
  double horizon = 0.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  /// Visits required per target proposition for a satisfied run.
  std::size_t required_visits = 1;
  std::optional<fs::path> output_dir;
};

/// Paths inside the document resolve against `base_dir`.
ExperimentConfig parse_experiment(std::string_view text, const fs::path& base_dir);
ExperimentConfig load_experiment(const fs::path& config);

struct Decomposition {
  automaton::RunFragment fragment;
  automaton::TripletDecomposition triplets;
  automaton::Switcher switcher;
};

Decomposition decompose(const ExperimentConfig& cfg);

struct Outcome {
  int status = kOk;
  /// Human-readable summary printed by the CLI.
  std::string summary;
};

struct SimulationRun {
  Decomposition decomposition;
  plants::SimResult result;
  plants::MonitorReport monitor;
  std::string trace_text;
};

/// Runs the closed loop without touching the filesystem.  The monitor is
/// evaluated on the serialized trace, so offline verification agrees with it.
SimulationRun run_simulation(const ExperimentConfig& cfg);

/// 0 when the monitor found no unsafe sample, the triplet order held and
/// every target was visited often enough; otherwise kSpecificationViolated.
int monitor_status(const plants::MonitorReport& report, std::size_t required_visits);
std::string monitor_json(const plants::MonitorReport& report, const plants::SimTrace& trace,
                         std::size_t required_visits);

Outcome cmd_decompose(const ExperimentConfig& cfg);
Outcome cmd_synth(const ExperimentConfig& cfg, const fs::path& out);
Outcome cmd_simulate(const ExperimentConfig& cfg, const fs::path& out);
Outcome cmd_verify(const ExperimentConfig& cfg, const fs::path& out);

/// Writes through a sibling temporary file and renames it into place.
void write_atomic(const fs::path& path, std::string_view contents);
std::string read_file(const fs::path& path);

}  // namespace tubesynth::experiment
