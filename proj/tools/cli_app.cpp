#include "cli_app.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"

#include "gibbsmix/chain.hpp"
#include "gibbsmix/constants.hpp"
#include "gibbsmix/coupling.hpp"
#include "gibbsmix/grid.hpp"
#include "gibbsmix/io.hpp"
#include "gibbsmix/parallel.hpp"
#include "gibbsmix/stats.hpp"
#include "gibbsmix/version.hpp"

namespace gibbsmix::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed flags before per-command defaults are filled in.
struct RawConfig {
  RunConfig base;
  std::optional<std::size_t> n;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> trajectories;
  std::optional<double> delta;
  std::string config_path;
  std::string out_dir;
};

// A flag that can also be supplied through --config under `key`.
struct Binding {
  std::string key;
  CLI::Option* option;
  std::function<void(const json&)> assign;
};

template <class T>
void bind_option(CLI::App& app, std::vector<Binding>& bindings, const std::string& flag,
                 const std::string& key, T& field, const std::string& help) {
  CLI::Option* opt = app.add_option(flag, field, help);
  bindings.push_back({key, opt, [&field](const json& v) {
                        if constexpr (requires { typename T::value_type; } &&
                                      !std::is_same_v<T, std::string>) {
                          field = v.get<typename T::value_type>();
                        } else {
                          field = v.get<T>();
                        }
                      }});
}

void bind_flag(CLI::App& app, std::vector<Binding>& bindings, const std::string& flag,
               const std::string& key, bool& field, const std::string& help) {
  CLI::Option* opt = app.add_flag(flag, field, help);
  bindings.push_back({key, opt, [&field](const json& v) { field = v.get<bool>(); }});
}

void apply_config_file(const std::string& path, const std::vector<Binding>& bindings) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    auto it = std::find_if(bindings.begin(), bindings.end(),
                           [&](const Binding& b) { return b.key == key; });
    if (it == bindings.end()) throw UsageError("unknown config key '" + key + "'");
    if (it->option->count() > 0) continue;  // flags win
    try {
      it->assign(value);
    } catch (const json::exception& e) {
      throw UsageError("config key '" + key + "' has the wrong type: " + e.what());
    }
  }
}

Point parse_start(const std::string& text) {
  std::istringstream in(text);
  double u = 0.0;
  double v = 0.0;
  char comma = 0;
  if (!(in >> u)) throw UsageError("--start expects 'u,v' or a scalar");
  if (in >> comma) {
    if (comma != ',' || !(in >> v)) throw UsageError("--start expects 'u,v' or a scalar");
  } else {
    v = u;
  }
  in >> std::ws;
  if (!in.eof()) throw UsageError("--start expects 'u,v' or a scalar");
  return {u, v};
}

ModelParams model_params(const RunConfig& cfg) {
  try {
    return ModelParams(cfg.a, cfg.delta);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

Point grid_start(const RunConfig& cfg) {
  const Point p = parse_start(cfg.start);
  if (!(p.u >= 0.0 && p.u <= 1.0 && p.v >= 0.0 && p.v <= 1.0)) {
    throw UsageError("--start must lie in [0, 1]^2");
  }
  return p;
}

// Writes result.json and echoes the same document on stdout.
void emit(const RunConfig& cfg, const json& result, std::ostream& out) {
  io::write_json(cfg.out_dir / "result.json", result);
  out << result.dump(2) << '\n';
}

json point_json(Point p) { return json::array({p.u, p.v}); }

// ---------------------------------------------------------------------------

int cmd_sim(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelParams params = model_params(cfg);
  const auto process = parse_process(cfg.process);
  if (!process) throw UsageError("unknown process '" + cfg.process + "'");
  const Point start = parse_start(cfg.start);

  if (cfg.trajectories == 1) {
    const TrajectoryRecord rec = run_process(*process, start, cfg.steps, params, cfg.seed);
    const fs::path csv = cfg.out_dir / "trajectory.csv";
    io::write_trajectory_csv(csv, rec);
    io::write_sidecar(csv, "trajectory", cfg.a, std::nullopt);
    emit(cfg, io::to_json(rec), out);
    return kOk;
  }

  err << "sim: " << cfg.trajectories << " trajectories of " << cfg.process << '\n';
  const auto records = run_batch<TrajectoryRecord>(cfg.trajectories, [&](std::size_t i) {
    return run_process(*process, start, cfg.steps, params, cfg.seed, SimOptions{false, i});
  });

  const bool planar = *process == Process::X || *process == Process::XStar ||
                      *process == Process::Y || *process == Process::YPrime;
  std::ostringstream csv;
  csv << (planar ? "stream,u,v\n" : "stream,value\n");
  std::vector<double> terminal_u;
  std::map<std::string, std::size_t> stopped;
  for (const auto& rec : records) {
    csv << rec.stream;
    if (planar) {
      csv << ',' << io::format_double(rec.terminal.u) << ',' << io::format_double(rec.terminal.v);
      terminal_u.push_back(rec.terminal.u);
    } else {
      csv << ',' << io::format_double(rec.terminal_scalar);
      terminal_u.push_back(rec.terminal_scalar);
    }
    csv << '\n';
    const StoppingTimes& st = rec.stopping;
    stopped["nu_m"] += st.nu_m.has_value();
    stopped["nu_m_tilde"] += st.nu_m_tilde.has_value();
    stopped["nu_m_hat"] += st.nu_m_hat.has_value();
    stopped["nu_c2"] += st.nu_c2.has_value();
  }
  const fs::path path = cfg.out_dir / "terminals.csv";
  io::write_text(path, csv.str());
  io::write_sidecar(path, "terminals", cfg.a, std::nullopt);

  const auto m = stats::moments(terminal_u);
  json fractions = json::object();
  for (const auto& [name, count] : stopped) {
    fractions[name] = static_cast<double>(count) / static_cast<double>(cfg.trajectories);
  }
  emit(cfg,
       {{"process", cfg.process},
        {"trajectories", cfg.trajectories},
        {"steps", cfg.steps},
        {"seed", cfg.seed},
        {"terminal_mean", m.mean},
        {"terminal_standard_error", m.standard_error()},
        {"stopped_fraction", fractions}},
       out);
  return kOk;
}

// Evolution shared by `evolve` and `heatmap`.
GridDistribution evolve_from_start(const RunConfig& cfg, const RandomScanOperator& op,
                                   std::vector<std::pair<std::size_t, double>>& curve,
                                   std::ostream& err) {
  const GridDistribution initial = GridDistribution::point_mass(cfg.n, grid_start(cfg));
  curve.emplace_back(0, tv_distance(initial, op.target().joint_distribution()));
  return op.evolve(initial, cfg.steps, [&](const StepStats& s) {
    curve.emplace_back(s.t, s.tv_to_target);
    if (s.t % 1000 == 0) err << "t=" << s.t << " tv=" << s.tv_to_target << '\n';
  });
}

int cmd_evolve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelParams params = model_params(cfg);
  const RandomScanOperator op(cfg.n, params);
  std::vector<std::pair<std::size_t, double>> curve;
  const GridDistribution law = evolve_from_start(cfg, op, curve, err);

  const fs::path csv = cfg.out_dir / "tv_curve.csv";
  io::write_tv_curve_csv(csv, curve);
  io::write_sidecar(csv, "tv_curve", cfg.a, cfg.n);

  const auto set = corner_set();
  emit(cfg,
       {{"a", cfg.a},
        {"n", cfg.n},
        {"steps", cfg.steps},
        {"start", point_json(grid_start(cfg))},
        {"tv_to_target", curve.back().second},
        {"corner_set_probability", set_probability(law, set)},
        {"target_corner_set_probability",
         set_probability(op.target().joint_distribution(), set)}},
       out);
  return kOk;
}

int cmd_heatmap(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelParams params = model_params(cfg);
  const RandomScanOperator op(cfg.n, params);
  std::vector<std::pair<std::size_t, double>> curve;
  const GridDistribution law = evolve_from_start(cfg, op, curve, err);

  const fs::path pgm = cfg.out_dir / "heatmap.pgm";
  export_heatmap(law, pgm);
  io::write_sidecar(pgm, "heatmap", cfg.a, cfg.n);
  emit(cfg,
       {{"a", cfg.a},
        {"n", cfg.n},
        {"steps", cfg.steps},
        {"start", point_json(grid_start(cfg))},
        {"tv_to_target", curve.back().second},
        {"image", pgm.filename().string()}},
       out);
  return kOk;
}

json mix_summary(const MixingResult& r) {
  json j = io::to_json(r);
  j.erase("tv_curve");
  return j;
}

int cmd_mix(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Point start = grid_start(cfg);
  std::vector<double> values = {cfg.a};
  if (cfg.table) values = {10.0, 50.0, 250.0};

  json rows = json::array();
  for (double a : values) {
    RunConfig run = cfg;
    run.a = a;
    const ModelParams params = model_params(run);
    err << "mix: a=" << a << " n=" << cfg.n << " eps=" << cfg.epsilon << '\n';
    std::string suffix = cfg.table ? "_a" + io::format_double(a) : "";
    const fs::path csv = cfg.out_dir / ("tv_curve" + suffix + ".csv");
    try {
      const MixingResult r = find_mixing_time(start, cfg.epsilon, params, cfg.n, cfg.max_steps);
      io::write_tv_curve_csv(csv, r.tv_curve);
      io::write_sidecar(csv, "tv_curve", a, cfg.n);
      rows.push_back(mix_summary(r));
      err << "mix: t_mix=" << r.t_mix << '\n';
    } catch (const NonConvergence& e) {
      io::write_tv_curve_csv(csv, e.partial().tv_curve);
      io::write_sidecar(csv, "tv_curve", a, cfg.n);
      json diag = {{"error", e.what()}, {"result", io::to_json(e.partial())}};
      io::write_json(cfg.out_dir / "diagnostics.json", diag);
      rows.push_back(mix_summary(e.partial()));
      emit(cfg, cfg.table ? json{{"rows", rows}} : rows.back(), out);
      err << "mix: " << e.what() << '\n';
      return kNonConvergence;
    }
  }
  emit(cfg, cfg.table ? json{{"rows", rows}} : rows.back(), out);
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelParams params = model_params(cfg);
  json checks = json::array();
  bool all = true;
  auto record = [&](const std::string& name, bool passed, json detail) {
    detail["name"] = name;
    detail["passed"] = passed;
    checks.push_back(std::move(detail));
    all = all && passed;
    err << "verify: " << name << (passed ? " ok" : " FAILED") << '\n';
  };

  {
    constexpr std::size_t kGrid = 60;
    const double gap = verify_dominance_inequality(kGrid, kGrid, params);
    record("dominance", gap >= -1e-12, {{"min_gap", gap}, {"grid", kGrid}});
  }
  {
    const CouplingReport r = couple_z_yprime(0.0, cfg.steps, params, cfg.seed, cfg.trajectories);
    record("coupling_ordering", r.ordering_violations == 0,
           {{"violations", r.ordering_violations},
            {"trajectories", cfg.trajectories},
            {"steps", cfg.steps}});
  }
  {
    bool agree = true;
    std::string message;
    try {
      couple_y_w(0.5, cfg.steps, params, cfg.seed, cfg.trajectories);
    } catch (const std::logic_error& e) {
      agree = false;
      message = e.what();
    }
    record("walk_agreement", agree, {{"message", message}});
  }
  {
    const RandomScanOperator op(cfg.n, params);
    const GridDistribution target = op.target().joint_distribution();
    const double tv = tv_distance(op.apply(target), target);
    record("stationarity", tv < 1e-12, {{"tv", tv}, {"n", cfg.n}});
  }
  {
    const std::size_t n = std::min<std::size_t>(cfg.n, 100);
    const DbarTriple d = worst_case_distance_dbar(cfg.s, cfg.t, params, n);
    const double bound = d.dbar_s * d.dbar_t * (1.0 + 1e-9);
    record("submultiplicativity", d.dbar_s_plus_t <= bound,
           {{"dbar_s", d.dbar_s},
            {"dbar_t", d.dbar_t},
            {"dbar_s_plus_t", d.dbar_s_plus_t},
            {"s", cfg.s},
            {"t", cfg.t},
            {"n", n}});
    const double dt = worst_case_distance_d(cfg.t, params, n);
    record("sandwich", dt <= d.dbar_t * (1.0 + 1e-12) && d.dbar_t <= 2.0 * dt * (1.0 + 1e-12),
           {{"d_t", dt}, {"dbar_t", d.dbar_t}, {"t", cfg.t}, {"n", n}});
  }

  json report = {{"a", cfg.a},       {"delta", cfg.delta}, {"seed", cfg.seed},
                 {"passed", all},    {"checks", checks},   {"version", kVersion}};
  io::write_json(cfg.out_dir / "report.json", report);
  emit(cfg, report, out);
  return all ? kOk : kCheckFailed;
}

int cmd_constants(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  ConstantsConfig c{cfg.alpha, cfg.delta, cfg.epsilon_slack};
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  emit(cfg, constants_report(c), out);
  return kOk;
}

int cmd_dbar(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelParams params = model_params(cfg);
  err << "dbar: n=" << cfg.n << " s=" << cfg.s << " t=" << cfg.t << '\n';
  const DbarTriple d = worst_case_distance_dbar(cfg.s, cfg.t, params, cfg.n);
  emit(cfg,
       {{"a", cfg.a},
        {"n", cfg.n},
        {"s", cfg.s},
        {"t", cfg.t},
        {"dbar_s", d.dbar_s},
        {"dbar_t", d.dbar_t},
        {"dbar_s_plus_t", d.dbar_s_plus_t},
        {"d_s", worst_case_distance_d(cfg.s, params, cfg.n)},
        {"d_t", worst_case_distance_d(cfg.t, params, cfg.n)}},
       out);
  return kOk;
}

// Defaults that depend on the command.
void resolve(RawConfig& raw) {
  RunConfig& c = raw.base;
  const std::string& cmd = c.command;
  std::size_t default_n = (cmd == "dbar" || cmd == "verify") ? 100 : 500;
  std::size_t default_steps = 1000;
  if (cmd == "evolve" || cmd == "heatmap") default_steps = 71;
  std::size_t default_trajectories = cmd == "verify" ? 200 : 1;
  c.n = raw.n.value_or(default_n);
  c.delta = raw.delta.value_or(cmd == "constants" ? 0.0 : ModelParams::kDefaultDelta);
  c.steps = raw.steps.value_or(default_steps);
  c.trajectories = raw.trajectories.value_or(default_trajectories);
  if (!raw.out_dir.empty()) {
    c.out_dir = raw.out_dir;
  } else if (const char* env = std::getenv("GIBBSMIX_OUT_DIR"); env && *env) {
    c.out_dir = env;
  } else {
    c.out_dir = "gibbsmix-out";
  }
  if (c.n < 2) throw UsageError("--n must be at least 2");
  if (c.trajectories < 1) throw UsageError("--trajectories must be at least 1");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw UsageError("--eps must be in (0, 1)");
}

}  // namespace

json to_json(const RunConfig& c) {
  return {
      {"command", c.command},
      {"a", c.a},
      {"n", c.n},
      {"delta", c.delta},
      {"steps", c.steps},
      {"max_steps", c.max_steps},
      {"epsilon", c.epsilon},
      {"trajectories", c.trajectories},
      {"seed", c.seed},
      {"start", c.start},
      {"process", c.process},
      {"alpha", c.alpha},
      {"epsilon_slack", c.epsilon_slack},
      {"s", c.s},
      {"t", c.t},
      {"table", c.table},
      {"threads", c.threads},
      {"out_dir", c.out_dir.string()},
  };
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gibbs sampler mixing laboratory"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  const std::map<std::string, std::string> commands = {
      {"sim", "simulate trajectories of a named process"},
      {"evolve", "evolve a point mass on the grid and report TV to the target"},
      {"mix", "find the first step with TV to the target <= eps"},
      {"verify", "run the coupling, dominance and kernel checks"},
      {"constants", "evaluate beta4 and gamma"},
      {"heatmap", "write the evolved law as a 16-bit PGM"},
      {"dbar", "worst-case distances of the scalar chain"},
  };

  // One RawConfig per subcommand keeps bindings independent.
  std::map<std::string, RawConfig> raws;
  std::map<std::string, std::vector<Binding>> bindings;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    RawConfig& raw = raws[name];
    raw.base.command = name;
    auto& b = bindings[name];
    RunConfig& c = raw.base;
    bind_option(*sub, b, "--a", "a", c.a, "concentration a > 0");
    bind_option(*sub, b, "--delta", "delta", raw.delta,
                "middle half-width (default 0.05, 0 for constants)");
    bind_option(*sub, b, "--seed", "seed", c.seed, "master seed");
    bind_option(*sub, b, "--start", "start", c.start, "start point 'u,v' or scalar");
    bind_option(*sub, b, "--out-dir", "out_dir", raw.out_dir,
         "output directory (default $GIBBSMIX_OUT_DIR or ./gibbsmix-out)");
    bind_option(*sub, b, "--threads", "threads", c.threads, "worker thread cap (0 = all cores)");
    bind_option(*sub, b, "--n", "n", raw.n, "cells per axis");
    bind_option(*sub, b, "--steps", "steps", raw.steps, "steps to simulate or evolve");
    bind_option(*sub, b, "--max-steps", "max_steps", c.max_steps, "step limit for mix");
    bind_option(*sub, b, "--eps", "epsilon", c.epsilon, "TV threshold");
    bind_option(*sub, b, "--trajectories", "trajectories", raw.trajectories, "trajectory count");
    bind_option(*sub, b, "--process", "process", c.process, "X, XStar, Y, YPrime, Z or W");
    bind_option(*sub, b, "--alpha", "alpha", c.alpha, "time-scale constant for constants");
    bind_option(*sub, b, "--epsilon-slack", "epsilon_slack", c.epsilon_slack, "additive slack");
    bind_option(*sub, b, "--s", "s", c.s, "first time for dbar");
    bind_option(*sub, b, "--t", "t", c.t, "second time for dbar");
    bind_flag(*sub, b, "--table", "table", c.table, "mix: run a = 10, 50, 250");
    sub->add_option("--config", raw.config_path, "JSON file of defaults; flags win");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  std::string name;
  for (const auto& [cmd, help] : commands) {
    if (app.got_subcommand(cmd)) name = cmd;
  }
  RawConfig& raw = raws[name];

  try {
    if (!raw.config_path.empty()) apply_config_file(raw.config_path, bindings[name]);
    resolve(raw);
    const RunConfig& cfg = raw.base;
    set_max_threads(cfg.threads);
    fs::create_directories(cfg.out_dir);
    io::write_json(cfg.out_dir / "manifest.json",
                   {{"config", to_json(cfg)}, {"version", kVersion}});

    if (name == "sim") return cmd_sim(cfg, out, err);
    if (name == "evolve") return cmd_evolve(cfg, out, err);
    if (name == "mix") return cmd_mix(cfg, out, err);
    if (name == "verify") return cmd_verify(cfg, out, err);
    if (name == "constants") return cmd_constants(cfg, out, err);
    if (name == "heatmap") return cmd_heatmap(cfg, out, err);
    return cmd_dbar(cfg, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace gibbsmix::cli
