#include "tubesynth/plants.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

#include "tubesynth/error.hpp"

namespace tubesynth::plants {

namespace {

void require_finite(const Vector& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) fail(ErrorKind::Numeric, std::string("non-finite ") + what);
}

Eigen::Matrix2d mass_matrix(double c2, const Manipulator2rParams& p, bool symmetric) {
  const double s = p.m * p.l * p.l;
  Eigen::Matrix2d M;
  M << 5.0 / 3.0 + c2, 1.0 / 3.0 + 0.5 * c2, symmetric ? 1.0 / 3.0 + 0.5 * c2 : 0.5 * c2, 1.0 / 3.0;
  return s * M;
}

}  // namespace

Vector manipulator_2r_derivative(const Vector& state, const Vector& tau, const Vector& d,
                                 const Manipulator2rParams& p) {
  if (state.size() != 4 || tau.size() != 2 || d.size() != 2)
    fail(ErrorKind::Structural, "2R manipulator expects 4 states, 2 torques and 2 disturbances");
  require_finite(state, "2R state");
  require_finite(tau, "2R torque");
  const double th1 = state[0], th2 = state[1], w1 = state[2], w2 = state[3];
  const double c1 = std::cos(th1), c2 = std::cos(th2), s2 = std::sin(th2), c12 = std::cos(th1 + th2);
  const bool symmetric = p.inertia == Manipulator2rParams::Inertia::Symmetric;
  const Eigen::Matrix2d M = mass_matrix(c2, p, symmetric);
  const double ml2 = p.m * p.l * p.l;
  Eigen::Vector2d C;
  C << ml2 * s2 * (-0.5 * w2 * w2 - w1 * w2), ml2 * s2 * (symmetric ? 0.5 * w1 * w1 : 0.5 * w2 * w2);
  Eigen::Vector2d G;
  G << p.m * p.g * p.l * (1.5 * c1 + 0.5 * c12), p.m * p.g * p.l * 0.5 * c12;
  const Eigen::Vector2d rhs = Eigen::Vector2d(tau[0] + d[0], tau[1] + d[1]) - C - G;
  if (std::abs(M.determinant()) < 1e-9) fail(ErrorKind::Numeric, "2R mass matrix is singular");
  const Eigen::Vector2d acc = M.partialPivLu().solve(rhs);
  return {w1, w2, acc[0], acc[1]};
}

double manipulator_2r_energy(const Vector& state, const Manipulator2rParams& p) {
  const Eigen::Matrix2d M = mass_matrix(std::cos(state[1]), p, true);
  const Eigen::Vector2d w(state[2], state[3]);
  const double potential = p.m * p.g * p.l * (1.5 * std::sin(state[0]) + 0.5 * std::sin(state[0] + state[1]));
  return 0.5 * w.dot(M * w) + potential;
}

namespace {

Eigen::Matrix3d omni_input_matrix(const OmniParams& p) {
  if (!(p.R > 0.0) || !(p.L > 0.0)) fail(ErrorKind::Config, "omni robot needs positive R and L");
  const double c = std::cos(std::numbers::pi / 6.0), s = std::sin(std::numbers::pi / 6.0);
  Eigen::Matrix3d geom;
  geom << 0.0, -1.0, p.L, c, s, p.L, -c, -s, p.L;
  Eigen::Matrix3d B;
  B << p.B[0], p.B[1], p.B[2], p.B[3], p.B[4], p.B[5], p.B[6], p.B[7], p.B[8];
  if (std::abs(geom.determinant()) < 1e-12) fail(ErrorKind::Config, "omni geometry matrix is singular");
  if (std::abs(B.determinant()) < 1e-12) fail(ErrorKind::Config, "omni B matrix is singular");
  return p.R * geom.inverse() * B.transpose().inverse();
}

Vector omni_apply(const Eigen::Matrix3d& K, const Vector& state, const Vector& u) {
  const double c = std::cos(state[2]), s = std::sin(state[2]);
  Eigen::Matrix3d rot;
  rot << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  const Eigen::Vector3d v = rot * K * Eigen::Vector3d(u[0], u[1], u[2]);
  return {v[0], v[1], v[2]};
}

}  // namespace

Vector omni_robot_derivative(const Vector& state, const Vector& u, const OmniParams& p) {
  if (state.size() != 3 || u.size() != 3) fail(ErrorKind::Structural, "omni robot expects 3 states and 3 inputs");
  require_finite(state, "omni state");
  require_finite(u, "omni input");
  return omni_apply(omni_input_matrix(p), state, u);
}

namespace {

class Manipulator2r final : public Plant {
 public:
  Manipulator2r(const Manipulator2rParams& p, std::vector<double> w_max)
      : Plant({"manipulator_2r", 2, 2, {{"m", p.m}, {"l", p.l}, {"g", p.g}}, std::move(w_max),
               "mass matrix inverse is positive definite on the joint domain"}),
        p_(p) {
    if (!(p.m > 0.0) || !(p.l > 0.0)) fail(ErrorKind::Config, "2R manipulator needs positive m and l");
  }

  Vector derivative(const Vector& x, const Vector& u, const Vector& w) const override {
    Vector dx = manipulator_2r_derivative(x, u, {w[2], w[3]}, p_);
    dx[0] += w[0];
    dx[1] += w[1];
    return dx;
  }

 private:
  Manipulator2rParams p_;
};

class OmniRobot final : public Plant {
 public:
  OmniRobot(const OmniParams& p, std::vector<double> w_max)
      : Plant({"omni_robot", 1, 3, {{"R", p.R}, {"L", p.L}}, std::move(w_max),
               "input matrix must be sign definite along the run"}),
        K_(omni_input_matrix(p)) {}

  Vector derivative(const Vector& x, const Vector& u, const Vector& w) const override {
    require_finite(x, "omni state");
    require_finite(u, "omni input");
    Vector dx = omni_apply(K_, x, u);
    for (std::size_t i = 0; i < 3; ++i) dx[i] += w[i];
    return dx;
  }

 private:
  Eigen::Matrix3d K_;
};

class GenericPlant final : public Plant {
 public:
  GenericPlant(std::size_t n, const std::vector<GenericStage>& stages, std::vector<double> w_max)
      : Plant({"generic", stages.size(), n, {}, std::move(w_max), "supplied by the configuration"}) {
    if (n == 0 || stages.empty()) fail(ErrorKind::Config, "generic plant needs a dimension and at least one stage");
    for (std::size_t k = 0; k < stages.size(); ++k) {
      const std::size_t visible = k + 1;
      auto resolve = [n, visible](std::string_view id) -> std::optional<std::size_t> {
        std::size_t stage = 0, index = 0;
        char tail = 0;
        const std::string s(id);
        if (std::sscanf(s.c_str(), "x%zu_%zu%c", &stage, &index, &tail) != 2) return std::nullopt;
        if (stage < 1 || stage > visible || index < 1 || index > n) return std::nullopt;
        return (stage - 1) * n + (index - 1);
      };
      const std::string where = "plant.stages[" + std::to_string(k) + "]";
      if (stages[k].f.size() != n) fail(ErrorKind::Config, where + ".f needs " + std::to_string(n) + " entries");
      if (stages[k].g.size() != n * n)
        fail(ErrorKind::Config, where + ".g needs " + std::to_string(n * n) + " entries");
      Stage st;
      for (const auto& e : stages[k].f) st.f.push_back(Expression::parse(e, resolve));
      for (const auto& e : stages[k].g) st.g.push_back(Expression::parse(e, resolve));
      stages_.push_back(std::move(st));
    }
  }

  Vector derivative(const Vector& x, const Vector& u, const Vector& w) const override {
    require_finite(x, "generic state");
    const std::size_t n = descriptor().dimension;
    const std::size_t N = stages_.size();
    Vector dx(x.size());
    for (std::size_t k = 0; k < N; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        double v = stages_[k].f[i].eval(x);
        for (std::size_t j = 0; j < n; ++j) {
          const double drive = k + 1 < N ? x[(k + 1) * n + j] : u[j];
          v += stages_[k].g[i * n + j].eval(x) * drive;
        }
        dx[k * n + i] = v + w[k * n + i];
      }
    }
    return dx;
  }

 private:
  struct Stage {
    std::vector<Expression> f;
    std::vector<Expression> g;
  };
  std::vector<Stage> stages_;
};

std::vector<double> checked_bounds(std::vector<double> w_max, std::size_t stages) {
  if (w_max.empty()) w_max.assign(stages, 0.0);
  if (w_max.size() != stages) fail(ErrorKind::Config, "disturbance bound needs one entry per stage");
  for (double w : w_max)
    if (!(w >= 0.0)) fail(ErrorKind::Config, "disturbance bound must be non-negative");
  return w_max;
}

}  // namespace

std::unique_ptr<Plant> make_manipulator_2r(const Manipulator2rParams& p, std::vector<double> w_max) {
  return std::make_unique<Manipulator2r>(p, checked_bounds(std::move(w_max), 2));
}

std::unique_ptr<Plant> make_omni_robot(const OmniParams& p, std::vector<double> w_max) {
  return std::make_unique<OmniRobot>(p, checked_bounds(std::move(w_max), 1));
}

std::unique_ptr<Plant> make_generic(std::size_t dimension, const std::vector<GenericStage>& stages,
                                    std::vector<double> w_max) {
  return std::make_unique<GenericPlant>(dimension, stages, checked_bounds(std::move(w_max), stages.size()));
}

DisturbanceSource::DisturbanceSource(const DisturbanceModel& model, std::size_t size)
    : model_(model), size_(size), rng_(model.seed) {
  if (!(model.amplitude >= 0.0)) fail(ErrorKind::Config, "disturbance amplitude must be non-negative");
}

Vector DisturbanceSource::sample(double t) {
  Vector w(size_, 0.0);
  switch (model_.kind) {
    case DisturbanceModel::Kind::Zero:
      break;
    case DisturbanceModel::Kind::Uniform:
      for (auto& v : w) {
        // 53 random bits mapped onto [-a, a); independent of the library's
        // distribution implementation.
        const double unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        v = model_.amplitude * (2.0 * unit - 1.0);
      }
      break;
    case DisturbanceModel::Kind::Sinusoidal:
      for (std::size_t i = 0; i < size_; ++i)
        w[i] = model_.amplitude * std::sin(model_.frequency * t + 2.0 * std::numbers::pi * static_cast<double>(i) /
                                                                      static_cast<double>(size_));
      break;
  }
  return w;
}

Vector integrate_step(const Derivative& f, const Vector& x, double t, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::Parameter, "integration step must be positive");
  auto checked = [](const Vector& v, int stage) {
    for (double e : v)
      if (!std::isfinite(e)) fail(ErrorKind::Numeric, "numeric blow-up in RK4 stage " + std::to_string(stage));
    return v;
  };
  auto axpy = [](const Vector& a, double s, const Vector& b) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  const Vector k1 = checked(f(t, x), 1);
  const Vector k2 = checked(f(t + 0.5 * dt, axpy(x, 0.5 * dt, k1)), 2);
  const Vector k3 = checked(f(t + 0.5 * dt, axpy(x, 0.5 * dt, k2)), 3);
  const Vector k4 = checked(f(t + dt, axpy(x, dt, k3)), 4);
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return checked(out, 5);
}

namespace {

std::vector<Vector> split_stages(const Vector& x, std::size_t stages, std::size_t n) {
  std::vector<Vector> out(stages);
  for (std::size_t k = 0; k < stages; ++k) out[k].assign(x.begin() + k * n, x.begin() + (k + 1) * n);
  return out;
}

}  // namespace

SimResult simulate(const Plant& plant, controller::HybridController& controller, const Vector& x0, double horizon,
                   double dt, const DisturbanceModel& disturbance) {
  if (!(dt > 0.0)) fail(ErrorKind::Parameter, "simulation step must be positive");
  if (!(horizon >= 0.0)) fail(ErrorKind::Parameter, "horizon must be non-negative");
  const std::size_t N = plant.descriptor().stages;
  const std::size_t n = plant.descriptor().dimension;
  if (x0.size() != N * n) fail(ErrorKind::Config, "initial state needs " + std::to_string(N * n) + " entries");
  if (controller.stages().stages != N || controller.stages().dimension != n)
    fail(ErrorKind::Config, "controller stage layout does not match the plant");
  for (std::size_t k = 0; k < N; ++k)
    if (disturbance.amplitude > plant.descriptor().w_max[k] && disturbance.kind != DisturbanceModel::Kind::Zero)
      fail(ErrorKind::Config, "disturbance amplitude exceeds the plant bound of stage " + std::to_string(k + 1));

  SimResult result;
  SimTrace& tr = result.trace;
  tr.stages = N;
  tr.dimension = n;
  DisturbanceSource source(disturbance, N * n);
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  Vector x = x0;

  auto record_switch = [&](const controller::SwitchEvent& ev) {
    tr.events.push_back(ev);
    result.tube_reports.push_back(controller.last_report());
    result.tubes.push_back(controller.state().tube);
  };

  try {
    record_switch(controller.start(split_stages(x, N, n), 0.0));
  } catch (const Error& e) {
    result.failure = e.kind();
    result.message = e.what();
    return result;
  }

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    controller::StepResult step;
    try {
      step = controller.step(split_stages(x, N, n), t);
    } catch (const Error& e) {
      result.failure = e.kind();
      std::ostringstream msg;
      msg << e.what() << " at t = " << t << " s";
      result.message = msg.str();
      break;
    }
    if (step.event) record_switch(*step.event);
    const Vector w = source.sample(t);
    const auto& hs = controller.state();
    const workspace::Box cross = hs.tube.at(t - hs.switch_time);
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.outputs.emplace_back(x.begin(), x.begin() + n);
    tr.controls.push_back(step.control.u);
    tr.lower.push_back(cross.lower);
    tr.upper.push_back(cross.upper);
    tr.disturbances.push_back(w);
    tr.triplet_index.push_back(*hs.position);
    Vector e_max;
    for (const auto& f : step.control.frames) {
      double m = 0.0;
      for (double v : f.e) m = std::max(m, std::abs(v));
      e_max.push_back(m);
    }
    tr.max_abs_e.push_back(std::move(e_max));
    if (k == steps) break;
    try {
      const Vector& u = step.control.u;
      x = integrate_step([&](double, const Vector& s) { return plant.derivative(s, u, w); }, x, t, dt);
    } catch (const Error& e) {
      result.failure = e.kind();
      result.message = e.what();
      break;
    }
  }
  return result;
}

MonitorReport trace_monitor(const SimTrace& trace, const workspace::LabeledWorkspace& workspace,
                            const automaton::TripletDecomposition& decomposition) {
  MonitorReport r;
  r.samples = trace.size();
  std::set<std::string> allowed_anywhere;
  std::set<std::string> targets;
  for (const auto& t : decomposition.triplets) {
    for (const auto& p : t.allowed_labels()) allowed_anywhere.insert(p);
    targets.insert(t.label_out);
  }
  for (const auto& p : workspace.alphabet())
    if (!allowed_anywhere.count(p)) r.unsafe_propositions.push_back(p);
  for (const auto& p : targets) r.visits[p] = 0;
  r.sup_abs_e.assign(trace.stages, 0.0);

  const std::string outside = "<outside>";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& y = trace.outputs[k];
    const std::string label = workspace.bounds().contains(y) ? workspace.label_of(y) : outside;
    if (r.word.empty() || r.word.back() != label) {
      r.word.push_back(label);
      if (targets.count(label)) ++r.visits[label];
    }
    const bool unsafe = label == outside || std::find(r.unsafe_propositions.begin(), r.unsafe_propositions.end(),
                                                      label) != r.unsafe_propositions.end();
    if (unsafe) {
      ++r.unsafe_samples;
      if (!r.first_unsafe_sample) r.first_unsafe_sample = k;
    }
    const std::size_t idx = trace.triplet_index[k];
    bool ok = idx < decomposition.triplets.size();
    if (ok) {
      const auto labels = decomposition.triplets[idx].allowed_labels();
      ok = std::find(labels.begin(), labels.end(), label) != labels.end();
    }
    if (!ok && r.consistent) {
      r.consistent = false;
      r.first_inconsistent_sample = k;
    }
    for (std::size_t s = 0; s < trace.stages && s < trace.max_abs_e[k].size(); ++s)
      r.sup_abs_e[s] = std::max(r.sup_abs_e[s], trace.max_abs_e[k][s]);
  }
  return r;
}

namespace {

std::vector<std::string> trace_header(std::size_t N, std::size_t n) {
  std::vector<std::string> h{"t"};
  for (std::size_t k = 1; k <= N; ++k)
    for (std::size_t i = 1; i <= n; ++i) h.push_back("x" + std::to_string(k) + "_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) h.push_back("y_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) h.push_back("u_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) h.push_back("gammaL_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) h.push_back("gammaU_" + std::to_string(i));
  h.push_back("triplet_index");
  for (std::size_t k = 1; k <= N; ++k) h.push_back("max_abs_e_stage" + std::to_string(k));
  for (std::size_t k = 1; k <= N; ++k)
    for (std::size_t i = 1; i <= n; ++i) h.push_back("w" + std::to_string(k) + "_" + std::to_string(i));
  return h;
}

void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ",%.17g", v);
  out += buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string trace_csv(const SimTrace& tr) {
  const auto header = trace_header(tr.stages, tr.dimension);
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  char buf[32];
  for (std::size_t k = 0; k < tr.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", tr.times[k]);
    out += buf;
    for (double v : tr.states[k]) put(out, v);
    for (double v : tr.outputs[k]) put(out, v);
    for (double v : tr.controls[k]) put(out, v);
    for (double v : tr.lower[k]) put(out, v);
    for (double v : tr.upper[k]) put(out, v);
    out += "," + std::to_string(tr.triplet_index[k]);
    for (std::size_t s = 0; s < tr.stages; ++s) put(out, s < tr.max_abs_e[k].size() ? tr.max_abs_e[k][s] : 0.0);
    for (double v : tr.disturbances[k]) put(out, v);
    out += '\n';
  }
  return out;
}

SimTrace parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, "trace: empty file");
  const auto cols = split(line);
  std::size_t N = 0, n = 0;
  for (const auto& c : cols) {
    std::size_t k = 0, i = 0;
    char tail = 0;
    if (std::sscanf(c.c_str(), "x%zu_%zu%c", &k, &i, &tail) == 2) {
      N = std::max(N, k);
      n = std::max(n, i);
    }
  }
  if (N == 0 || n == 0 || cols != trace_header(N, n))
    fail(ErrorKind::Parse, "trace: header does not match the trace schema");
  SimTrace tr;
  tr.stages = N;
  tr.dimension = n;
  std::size_t row = 1;
  auto slice = [](const std::vector<double>& v, std::size_t from, std::size_t count) {
    return Vector(v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(from + count));
  };
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols.size())
      fail(ErrorKind::Parse, "trace: line " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                 " fields, expected " + std::to_string(cols.size()));
    std::vector<double> v(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char* end = nullptr;
      v[c] = std::strtod(cells[c].c_str(), &end);
      if (cells[c].empty() || *end != '\0')
        fail(ErrorKind::Parse, "trace: line " + std::to_string(row) + ", column '" + cols[c] + "' is not a number");
    }
    std::size_t at = 0;
    tr.times.push_back(v[at++]);
    tr.states.push_back(slice(v, at, N * n));
    at += N * n;
    tr.outputs.push_back(slice(v, at, n));
    at += n;
    tr.controls.push_back(slice(v, at, n));
    at += n;
    tr.lower.push_back(slice(v, at, n));
    at += n;
    tr.upper.push_back(slice(v, at, n));
    at += n;
    if (v[at] < 0.0 || v[at] != std::floor(v[at]))
      fail(ErrorKind::Parse, "trace: line " + std::to_string(row) + " has a bad triplet index");
    tr.triplet_index.push_back(static_cast<std::size_t>(v[at++]));
    tr.max_abs_e.push_back(slice(v, at, N));
    at += N;
    tr.disturbances.push_back(slice(v, at, N * n));
  }
  return tr;
}

}  // namespace tubesynth::plants
