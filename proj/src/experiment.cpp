#include "tubesynth/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace tubesynth::experiment {

int status_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NoFragment: return kNoFragment;
    case ErrorKind::SynthesisFailure:
    case ErrorKind::BlockedTask:
    case ErrorKind::InfeasiblePadding:
    case ErrorKind::UnrealizableTriplet: return kSynthesisFailure;
    case ErrorKind::TubeViolation:
    case ErrorKind::FunnelViolation:
    case ErrorKind::Numeric:
    case ErrorKind::Domain: return kViolation;
    default: return kConfigError;
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_atomic(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) fail(ErrorKind::Io, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename '" + tmp.string() + "': " + ec.message());
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::Config, where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) fail(ErrorKind::Config, where + ": unknown field '" + key + "'");
  }
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = json_util::require(obj, key);
  if (!v.is_string()) fail(ErrorKind::Config, where + "." + key + ": expected a string");
  return v.get<std::string>();
}

double positive(const json& obj, const char* key, double fallback, const std::string& where) {
  const double v = json_util::number_or(obj, key, fallback);
  if (!(v > 0.0)) fail(ErrorKind::Config, where + "." + key + ": must be positive");
  return v;
}

std::vector<double> per_stage(const json& obj, const char* key, std::size_t stages, double fallback,
                              const std::string& where) {
  if (!obj.contains(key)) return std::vector<double>(stages, fallback);
  const json& v = obj.at(key);
  if (v.is_number()) return std::vector<double>(stages, v.get<double>());
  auto out = json_util::numbers(v, where + "." + key);
  if (out.size() != stages)
    fail(ErrorKind::Config, where + "." + key + ": expected " + std::to_string(stages) + " entries");
  return out;
}

workspace::Box parse_box(const json& obj, std::size_t n, const std::string& where) {
  check_keys(obj, {"lower", "upper"}, where);
  auto lo = json_util::numbers(json_util::require(obj, "lower"), where + ".lower");
  auto hi = json_util::numbers(json_util::require(obj, "upper"), where + ".upper");
  if (lo.size() != n || hi.size() != n)
    fail(ErrorKind::Config, where + ": expected " + std::to_string(n) + " coordinates");
  return workspace::Box(std::move(lo), std::move(hi));
}

tubes::TubeParams parse_tube_params(const json& obj, tubes::TubeParams base, std::size_t n, const std::string& where) {
  check_keys(obj, {"t_c", "width_policy", "delta", "margin", "dt", "max_rounds", "waypoints"}, where);
  base.reach_time = positive(obj, "t_c", base.reach_time, where);
  base.width_policy = positive(obj, "width_policy", base.width_policy, where);
  if (base.width_policy > 1.0) fail(ErrorKind::Config, where + ".width_policy: must not exceed 1");
  if (obj.contains("delta")) base.delta = positive(obj, "delta", 1.0, where);
  base.margin = positive(obj, "margin", base.margin, where);
  if (obj.contains("dt")) base.dt = positive(obj, "dt", 1.0, where);
  if (obj.contains("max_rounds")) {
    const json& r = obj.at("max_rounds");
    if (!r.is_number_integer() || r.get<int>() < 0) fail(ErrorKind::Config, where + ".max_rounds: expected a count");
    base.max_rounds = r.get<int>();
  }
  if (obj.contains("waypoints")) {
    const json& w = obj.at("waypoints");
    if (!w.is_array()) fail(ErrorKind::Config, where + ".waypoints: expected a list");
    base.waypoints.clear();
    for (std::size_t i = 0; i < w.size(); ++i)
      base.waypoints.push_back(parse_box(w[i], n, where + ".waypoints[" + std::to_string(i) + "]"));
  }
  return base;
}

PlantSpec parse_plant(const json& obj) {
  check_keys(obj, {"type", "parameters", "w_max", "disturbance", "dimension", "stages"}, "plant");
  PlantSpec p;
  p.type = string_field(obj, "type", "plant");
  const json params = obj.value("parameters", json::object());
  std::size_t stages = 0;
  if (p.type == "manipulator_2r") {
    check_keys(params, {"m", "l", "g", "inertia"}, "plant.parameters");
    p.manipulator.m = positive(params, "m", 1.0, "plant.parameters");
    p.manipulator.l = positive(params, "l", 1.0, "plant.parameters");
    p.manipulator.g = json_util::number_or(params, "g", 9.81);
    const std::string inertia = params.value("inertia", std::string("printed"));
    if (inertia == "printed") p.manipulator.inertia = plants::Manipulator2rParams::Inertia::Printed;
    else if (inertia == "symmetric") p.manipulator.inertia = plants::Manipulator2rParams::Inertia::Symmetric;
    else fail(ErrorKind::Config, "plant.parameters.inertia: expected 'printed' or 'symmetric'");
    p.dimension = 2;
    stages = 2;
  } else if (p.type == "omni_robot") {
    check_keys(params, {"R", "L", "B"}, "plant.parameters");
    p.omni.R = positive(params, "R", 0.05, "plant.parameters");
    p.omni.L = positive(params, "L", 0.2, "plant.parameters");
    if (params.contains("B")) {
      auto b = json_util::numbers(params.at("B"), "plant.parameters.B");
      if (b.size() != 9) fail(ErrorKind::Config, "plant.parameters.B: expected 9 row-major entries");
      std::copy(b.begin(), b.end(), p.omni.B.begin());
    }
    p.dimension = 3;
    stages = 1;
  } else if (p.type == "generic") {
    const json& d = json_util::require(obj, "dimension");
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0)
      fail(ErrorKind::Config, "plant.dimension: expected a positive integer");
    p.dimension = d.get<std::size_t>();
    const json& st = json_util::require(obj, "stages");
    if (!st.is_array() || st.empty()) fail(ErrorKind::Config, "plant.stages: expected a non-empty list");
    for (std::size_t k = 0; k < st.size(); ++k) {
      const std::string where = "plant.stages[" + std::to_string(k) + "]";
      check_keys(st[k], {"f", "g"}, where);
      plants::GenericStage g;
      for (const char* key : {"f", "g"}) {
        const json& arr = json_util::require(st[k], key);
        if (!arr.is_array()) fail(ErrorKind::Config, where + "." + key + ": expected a list of expressions");
        for (const auto& e : arr) {
          if (!e.is_string()) fail(ErrorKind::Config, where + "." + key + ": expected expression strings");
          (std::string(key) == "f" ? g.f : g.g).push_back(e.get<std::string>());
        }
      }
      p.stages.push_back(std::move(g));
    }
    stages = p.stages.size();
  } else {
    fail(ErrorKind::Config, "plant.type: unknown plant '" + p.type + "'");
  }
  p.w_max = per_stage(obj, "w_max", stages, 0.05, "plant");
  if (obj.contains("disturbance")) {
    const json& d = obj.at("disturbance");
    check_keys(d, {"kind", "amplitude", "frequency"}, "plant.disturbance");
    const std::string kind = d.value("kind", std::string("zero"));
    if (kind == "zero") p.disturbance.kind = plants::DisturbanceModel::Kind::Zero;
    else if (kind == "uniform") p.disturbance.kind = plants::DisturbanceModel::Kind::Uniform;
    else if (kind == "sinusoidal") p.disturbance.kind = plants::DisturbanceModel::Kind::Sinusoidal;
    else fail(ErrorKind::Config, "plant.disturbance.kind: expected zero, uniform or sinusoidal");
    p.disturbance.amplitude = json_util::number_or(d, "amplitude", 0.0);
    p.disturbance.frequency = json_util::number_or(d, "frequency", 1.0);
    if (p.disturbance.amplitude < 0.0) fail(ErrorKind::Config, "plant.disturbance.amplitude: must be non-negative");
  }
  return p;
}

controller::StageConfig parse_stages(const json& obj, std::size_t stages, std::size_t n) {
  check_keys(obj, {"kappa", "funnel", "switch_fraction"}, "controller");
  controller::StageConfig cfg;
  cfg.stages = stages;
  cfg.dimension = n;
  cfg.kappa = per_stage(obj, "kappa", stages, 1.0, "controller");
  std::vector<json> funnels(stages > 0 ? stages - 1 : 0, json::object());
  if (obj.contains("funnel")) {
    const json& f = obj.at("funnel");
    if (f.is_object()) {
      std::fill(funnels.begin(), funnels.end(), f);
    } else if (f.is_array() && f.size() == funnels.size()) {
      for (std::size_t k = 0; k < f.size(); ++k) funnels[k] = f[k];
    } else {
      fail(ErrorKind::Config, "controller.funnel: expected an object or one object per stage after the first");
    }
  }
  for (std::size_t k = 0; k < funnels.size(); ++k) {
    const std::string where = "controller.funnel[" + std::to_string(k) + "]";
    check_keys(funnels[k], {"q_ratio", "q_min", "mu", "rho", "rho_abs"}, where);
    controller::FunnelParams fp;
    fp.q_ratio = json_util::number_or(funnels[k], "q_ratio", fp.q_ratio);
    fp.q_min = json_util::number_or(funnels[k], "q_min", fp.q_min);
    fp.mu = json_util::number_or(funnels[k], "mu", fp.mu);
    fp.rho = json_util::number_or(funnels[k], "rho", fp.rho);
    fp.rho_abs = json_util::number_or(funnels[k], "rho_abs", fp.rho_abs);
    cfg.funnels.push_back(fp);
  }
  cfg.validate();
  return cfg;
}

}  // namespace

std::unique_ptr<plants::Plant> PlantSpec::build() const {
  if (type == "manipulator_2r") return plants::make_manipulator_2r(manipulator, w_max);
  if (type == "omni_robot") return plants::make_omni_robot(omni, w_max);
  return plants::make_generic(dimension, stages, w_max);
}

ExperimentConfig parse_experiment(std::string_view text, const fs::path& base_dir) {
  const json doc = json_util::parse_document(text, "experiment");
  check_keys(doc, {"automaton", "workspace", "initial_proposition", "plant", "initial_state", "controller", "tubes",
                   "horizon", "dt", "seed", "required_visits", "output_dir"},
             "experiment");
  const fs::path automaton_path = base_dir / string_field(doc, "automaton", "experiment");
  const fs::path workspace_path = base_dir / string_field(doc, "workspace", "experiment");
  auto nba = automaton::parse_nba(read_file(automaton_path));
  auto ws = workspace::parse_workspace(read_file(workspace_path));
  ExperimentConfig cfg(std::move(nba), std::move(ws));
  cfg.automaton_path = automaton_path;
  cfg.workspace_path = workspace_path;
  if (doc.contains("initial_proposition")) cfg.initial_proposition = string_field(doc, "initial_proposition", "experiment");
  cfg.plant = parse_plant(json_util::require(doc, "plant"));
  // Builds once so expression and matrix errors surface at load time.
  (void)cfg.plant.build();
  const std::size_t n = cfg.plant.dimension;
  const std::size_t stages = cfg.plant.type == "generic" ? cfg.plant.stages.size()
                             : cfg.plant.type == "manipulator_2r" ? 2
                                                                 : 1;
  if (n != cfg.workspace.dimension())
    fail(ErrorKind::Config, "plant output dimension " + std::to_string(n) + " differs from the workspace dimension");
  cfg.initial_state = json_util::numbers(json_util::require(doc, "initial_state"), "initial_state");
  if (cfg.initial_state.size() != stages * n)
    fail(ErrorKind::Config, "initial_state: expected " + std::to_string(stages * n) + " entries");

  const json ctrl = doc.value("controller", json::object());
  cfg.stages = parse_stages(ctrl, stages, n);
  cfg.hybrid.switch_fraction = json_util::number_or(ctrl, "switch_fraction", 0.5);
  if (!(cfg.hybrid.switch_fraction > 0.0 && cfg.hybrid.switch_fraction <= 1.0))
    fail(ErrorKind::Config, "controller.switch_fraction: must lie in (0, 1]");

  if (doc.contains("tubes")) {
    const json& t = doc.at("tubes");
    check_keys(t, {"default", "triplets"}, "tubes");
    if (t.contains("default")) cfg.hybrid.default_tube = parse_tube_params(t.at("default"), {}, n, "tubes.default");
    if (t.contains("triplets")) {
      const json& per = t.at("triplets");
      if (!per.is_object()) fail(ErrorKind::Config, "tubes.triplets: expected an object keyed by triplet");
      for (const auto& [key, value] : per.items())
        cfg.hybrid.tube_params[key] =
            parse_tube_params(value, cfg.hybrid.default_tube, n, "tubes.triplets['" + key + "']");
    }
  }

  cfg.horizon = json_util::number_or(doc, "horizon", 60.0);
  if (!(cfg.horizon >= 0.0)) fail(ErrorKind::Config, "horizon: must be non-negative");
  cfg.dt = positive(doc, "dt", 1e-3, "experiment");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) fail(ErrorKind::Config, "seed: expected a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("required_visits")) {
    if (!doc.at("required_visits").is_number_unsigned())
      fail(ErrorKind::Config, "required_visits: expected a non-negative integer");
    cfg.required_visits = doc.at("required_visits").get<std::size_t>();
  }
  if (doc.contains("output_dir")) cfg.output_dir = base_dir / string_field(doc, "output_dir", "experiment");
  return cfg;
}

ExperimentConfig load_experiment(const fs::path& config) {
  auto cfg = parse_experiment(read_file(config), config.parent_path());
  cfg.source = config;
  return cfg;
}

Decomposition decompose(const ExperimentConfig& cfg) {
  std::string p;
  if (cfg.initial_proposition) {
    p = *cfg.initial_proposition;
  } else {
    const std::vector<double> y(cfg.initial_state.begin(),
                                cfg.initial_state.begin() + static_cast<long>(cfg.workspace.dimension()));
    p = cfg.workspace.label_of(y);
  }
  Decomposition d;
  d.fragment = automaton::find_accepting_fragment(cfg.nba, p);
  d.triplets = automaton::triplets(cfg.nba, d.fragment);
  d.switcher = automaton::build_switcher(cfg.nba, d.fragment);
  for (const auto& [key, params] : cfg.hybrid.tube_params) {
    const bool used = std::any_of(d.triplets.triplets.begin(), d.triplets.triplets.end(),
                                  [&](const automaton::Triplet& t) { return t.key() == key; });
    if (!used) fail(ErrorKind::Config, "tubes.triplets: '" + key + "' is not a triplet of the selected fragment");
  }
  return d;
}

namespace {

json report_json(const tubes::VerificationReport& r) {
  json v = json::array();
  for (const auto& x : r.violations)
    v.push_back({{"condition", std::string(1, x.condition)}, {"time", x.time}, {"dimension", x.dimension + 1},
                 {"detail", x.detail}});
  return {{"passed", r.passed},   {"samples", r.samples},     {"dt", r.dt},
          {"margin", r.margin},   {"max_slope", r.max_slope}, {"min_clearance", std::isfinite(r.min_clearance) ? json(r.min_clearance) : json(nullptr)},
          {"violations", v}};
}

workspace::Box nominal_start(const workspace::BoxUnion& set) {
  const auto boxes = workspace::normalize(set);
  return *std::max_element(boxes.begin(), boxes.end(),
                           [](const workspace::Box& a, const workspace::Box& b) { return a.volume() < b.volume(); });
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

Outcome cmd_decompose(const ExperimentConfig& cfg) {
  const auto d = decompose(cfg);
  return {kOk, automaton::describe(cfg.nba, d.fragment, d.triplets, d.switcher)};
}

Outcome cmd_synth(const ExperimentConfig& cfg, const fs::path& out) {
  const auto d = decompose(cfg);
  controller::HybridController lookup(d.triplets, d.switcher, cfg.workspace, cfg.stages, cfg.hybrid);
  Outcome o;
  json summary = json::array();
  std::ostringstream text;
  for (std::size_t k = 0; k < d.switcher.triplet_states.size(); ++k) {
    const auto& triplet = d.switcher.triplet_states[k];
    const auto task = workspace::ra_task_of_triplet(triplet, cfg.workspace);
    const workspace::Box s = nominal_start(task.initial_set);
    std::vector<double> entry(s.dimension());
    for (std::size_t i = 0; i < entry.size(); ++i) entry[i] = s.center(i);
    const auto& params = lookup.params_for(triplet);
    json item = {{"triplet", triplet.key()}, {"entry", entry}};
    try {
      auto res = tubes::synthesize_stt(task, entry, params);
      const std::string stem = "tube_" + std::to_string(k);
      write_atomic(out / (stem + ".csv"), tubes::tube_csv(res.tube, params.effective_dt()));
      json rep = report_json(res.report);
      rep["triplet"] = triplet.key();
      rep["rounds"] = res.rounds;
      rep["reach_time"] = res.tube.reach_time;
      json adj = json::array();
      for (const auto& a : res.tube.adjustments) adj.push_back({{"dimension", a.dimension + 1}, {"start", a.start}, {"end", a.end}});
      rep["adjustments"] = adj;
      write_atomic(out / (stem + "_report.json"), rep.dump(2) + "\n");
      item["passed"] = res.report.passed;
      item["rounds"] = res.rounds;
      item["tube"] = stem + ".csv";
      text << "triplet (" << triplet.key() << "): verified, " << res.rounds << " re-routing round(s), " << stem
           << ".csv\n";
    } catch (const tubes::SynthesisError& e) {
      item["passed"] = false;
      item["error"] = e.what();
      item["report"] = report_json(e.report());
      text << "triplet (" << triplet.key() << "): synthesis failed: " << e.what() << "\n";
      o.status = kSynthesisFailure;
    } catch (const Error& e) {
      if (status_of(e.kind()) != kSynthesisFailure) throw;
      item["passed"] = false;
      item["error"] = e.what();
      text << "triplet (" << triplet.key() << "): synthesis failed: " << e.what() << "\n";
      o.status = kSynthesisFailure;
    }
    summary.push_back(item);
  }
  write_atomic(out / "synth_report.json", json{{"triplets", summary}}.dump(2) + "\n");
  o.summary = text.str();
  return o;
}

SimulationRun run_simulation(const ExperimentConfig& cfg) {
  SimulationRun run;
  run.decomposition = decompose(cfg);
  const auto plant = cfg.plant.build();
  controller::HybridController ctrl(run.decomposition.triplets, run.decomposition.switcher, cfg.workspace, cfg.stages,
                                    cfg.hybrid);
  plants::DisturbanceModel dist = cfg.plant.disturbance;
  dist.seed = cfg.seed;
  run.result = plants::simulate(*plant, ctrl, cfg.initial_state, cfg.horizon, cfg.dt, dist);
  run.trace_text = plants::trace_csv(run.result.trace);
  if (run.result.trace.size() > 0) {
    const auto reread = plants::parse_trace_csv(run.trace_text);
    run.monitor = plants::trace_monitor(reread, cfg.workspace, run.decomposition.triplets);
  }
  return run;
}

int monitor_status(const plants::MonitorReport& report, std::size_t required_visits) {
  if (report.unsafe_samples > 0 || !report.consistent) return kSpecificationViolated;
  for (const auto& [p, count] : report.visits)
    if (count < required_visits) return kSpecificationViolated;
  return kOk;
}

std::string monitor_json(const plants::MonitorReport& r, const plants::SimTrace& trace, std::size_t required_visits) {
  auto time_of = [&](const std::optional<std::size_t>& k) { return k ? json(trace.times[*k]) : json(nullptr); };
  json doc = {{"samples", r.samples},
              {"word", r.word},
              {"visits", r.visits},
              {"required_visits", required_visits},
              {"consistent", r.consistent},
              {"first_inconsistent_time", time_of(r.first_inconsistent_sample)},
              {"unsafe_propositions", r.unsafe_propositions},
              {"unsafe_samples", r.unsafe_samples},
              {"first_unsafe_time", time_of(r.first_unsafe_sample)},
              {"sup_abs_e", r.sup_abs_e},
              {"satisfied", monitor_status(r, required_visits) == kOk}};
  return doc.dump(2) + "\n";
}

namespace {

std::string monitor_text(const plants::MonitorReport& r, std::size_t required_visits) {
  std::ostringstream s;
  s << "samples: " << r.samples << "\nvisits:";
  for (const auto& [p, c] : r.visits) s << " " << p << "=" << c;
  s << " (required " << required_visits << ")\n";
  s << "triplet order: " << (r.consistent ? "consistent" : "violated") << "\n";
  s << "unsafe samples: " << r.unsafe_samples << "\n";
  s << "sup |e| per stage:";
  for (double e : r.sup_abs_e) s << " " << fmt(e);
  s << "\nspecification: " << (monitor_status(r, required_visits) == kOk ? "satisfied" : "not satisfied") << "\n";
  return s.str();
}

}  // namespace

Outcome cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  const auto run = run_simulation(cfg);
  const auto& tr = run.result.trace;
  write_atomic(out / "trace.csv", run.trace_text);
  for (std::size_t i = 0; i < tr.dimension; ++i) {
    std::string csv = "t,y,gammaL,gammaU\n";
    for (std::size_t k = 0; k < tr.size(); ++k)
      csv += fmt(tr.times[k], "%.9g") + "," + fmt(tr.outputs[k][i], "%.12g") + "," + fmt(tr.lower[k][i], "%.12g") +
             "," + fmt(tr.upper[k][i], "%.12g") + "\n";
    write_atomic(out / ("plot_y" + std::to_string(i + 1) + ".csv"), csv);
  }
  json events = json::array();
  for (std::size_t k = 0; k < tr.events.size(); ++k) {
    const auto& ev = tr.events[k];
    events.push_back({{"time", ev.time}, {"triplet", ev.triplet}, {"position", ev.position}, {"rounds", ev.synthesis_rounds},
                      {"tube", report_json(run.result.tube_reports[k])}});
  }
  json sim = {{"completed", !run.result.failure},
              {"error", run.result.failure ? json(run.result.message) : json(nullptr)},
              {"samples", tr.size()},
              {"switches", events}};
  write_atomic(out / "simulation.json", sim.dump(2) + "\n");

  Outcome o;
  std::ostringstream text;
  text << "fragment first edge: " << run.decomposition.fragment.initial_proposition << "\nswitches: " << tr.events.size()
       << "\n";
  if (tr.size() > 0) {
    write_atomic(out / "monitor.json", monitor_json(run.monitor, tr, cfg.required_visits));
    text << monitor_text(run.monitor, cfg.required_visits);
  }
  if (run.result.failure) {
    text << "run aborted: " << run.result.message << "\n";
    o.status = status_of(*run.result.failure);
  } else {
    o.status = monitor_status(run.monitor, cfg.required_visits);
  }
  o.summary = text.str();
  return o;
}

Outcome cmd_verify(const ExperimentConfig& cfg, const fs::path& out) {
  const auto d = decompose(cfg);
  const auto trace = plants::parse_trace_csv(read_file(out / "trace.csv"));
  if (trace.size() == 0) fail(ErrorKind::Parse, "trace: no samples");
  if (trace.dimension != cfg.workspace.dimension())
    fail(ErrorKind::Parse, "trace: output dimension differs from the workspace");
  const auto report = plants::trace_monitor(trace, cfg.workspace, d.triplets);
  write_atomic(out / "verify.json", monitor_json(report, trace, cfg.required_visits));
  return {monitor_status(report, cfg.required_visits), monitor_text(report, cfg.required_visits)};
}

}  // namespace tubesynth::experiment
