// transwave command-line front end.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "transwave/emt.hpp"
#include "transwave/error.hpp"
#include "transwave/event_locator.hpp"
#include "transwave/hybrid.hpp"
#include "transwave/model_io.hpp"
#include "transwave/presets.hpp"
#include "transwave/swing.hpp"
#include "transwave/wave_analysis.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace transwave;

namespace {

enum Exit { kOk = 0, kParse = 2, kUnderdetermined = 3, kDivergence = 4, kConfig = 5 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return kParse;
    case ErrorKind::Underdetermined:
    case ErrorKind::InsufficientArrivals: return kUnderdetermined;
    case ErrorKind::Divergence: return kDivergence;
    default: return kConfig;
  }
}

/// Usage error raised from inside a command (mapped to exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool quiet = false;
};

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

void note(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

// ---- gen ------------------------------------------------------------------

struct GenOpts {
  std::string preset;
  int buses = 23;
  double line_km = 100.0;
  std::optional<double> inertia_h;
  int rows = 7, cols = 7;
  double spacing_km = 100.0;
  std::string scenario;
  std::string output;
};

int cmd_gen(const Globals& g, const GenOpts& o, const std::string& kind) {
  NetworkModel model;
  std::vector<DisturbanceSpec> ds;
  try {
    if (kind == "ring") {
      if (!o.preset.empty() && o.preset != "ring23") throw UsageError("--preset: unknown ring preset '" + o.preset + "'");
      model = o.preset == "ring23" ? presets::ring23()
                                   : build_ring(o.buses, o.line_km, presets::default_bus(),
                                                presets::default_line(), presets::default_bases());
    } else if (kind == "mesh") {
      model = presets::mesh(o.rows, o.cols, o.spacing_km);
    } else {
      model = presets::scenario_network(o.scenario);
      ds = presets::scenario(o.scenario);
    }
  } catch (const Error& e) {
    // Builder errors name the offending flag.
    std::string flag = kind == "ring" ? "--buses/--line-km" : kind == "mesh" ? "--rows/--cols/--spacing-km" : "--name";
    throw UsageError(flag + ": " + e.what());
  }
  if (o.inertia_h) {
    for (auto& b : model.buses) {
      if (b.inertia_h) b.inertia_h = *o.inertia_h;
    }
  }
  require_valid(validate(model), "generated network");
  const fs::path net_path = o.output.empty() ? out_path(g, "network.json") : fs::path(o.output);
  write_json(net_path, to_json(model));
  note(g, "wrote " + net_path.string() + " (" + std::to_string(model.bus_count()) + " buses, " +
              std::to_string(model.line_count()) + " lines)");
  if (kind == "scenario") {
    const fs::path sc_path = net_path.parent_path() / "scenario.json";
    write_json(sc_path, to_json(ds));
    note(g, "wrote " + sc_path.string());
  }
  return kOk;
}

// ---- simulate -------------------------------------------------------------

struct SimOpts {
  std::string network, scenario, engine = "swing", manifest;
  std::optional<double> dt, t_end, damping, dt_em, source_r, source_xd, noise;
  std::optional<int> record_every, rate_ratio;
};

json swing_json(const SwingConfig& c) {
  return {{"dt", c.dt}, {"t_end", c.t_end}, {"damping_d", c.damping_d}, {"record_every", c.record_every}};
}
json emt_json(const EmtConfig& c) {
  return {{"dt", c.dt},
          {"t_end", c.t_end},
          {"source_resistance", c.source_resistance},
          {"source_xd_pu", c.source_xd_pu},
          {"preroll_cycles", c.preroll_cycles},
          {"record_every", c.record_every}};
}
json hybrid_json(const HybridConfig& c) {
  return {{"dt_em", c.dt_em},         {"rate_ratio", c.rate_ratio},
          {"t_end", c.t_end},         {"damping_d", c.damping_d},
          {"record_every", c.record_every}, {"emt", emt_json(c.emt)}};
}
SwingConfig swing_from(const json& j) {
  SwingConfig c;
  c.dt = j.at("dt");
  c.t_end = j.at("t_end");
  c.damping_d = j.at("damping_d");
  c.record_every = j.at("record_every");
  return c;
}
EmtConfig emt_from(const json& j) {
  EmtConfig c;
  c.dt = j.at("dt");
  c.t_end = j.at("t_end");
  c.source_resistance = j.at("source_resistance");
  c.source_xd_pu = j.at("source_xd_pu");
  c.preroll_cycles = j.at("preroll_cycles");
  c.record_every = j.at("record_every");
  return c;
}
HybridConfig hybrid_from(const json& j) {
  HybridConfig c;
  c.dt_em = j.at("dt_em");
  c.rate_ratio = j.at("rate_ratio");
  c.t_end = j.at("t_end");
  c.damping_d = j.at("damping_d");
  c.record_every = j.at("record_every");
  c.emt = emt_from(j.at("emt"));
  return c;
}

// Additive Gaussian measurement noise on every domega channel.
void add_noise(TimeSeriesSet& s, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sigma);
  for (auto& ch : s.channels()) {
    if (ch.quantity != Quantity::Domega) continue;
    for (double& v : ch.values) v += nd(rng);
  }
}

int run_manifest(const Globals& g, const json& m) {
  const auto doc = document_from_json(m.at("model"));
  if (!doc.has_network) throw Error(ErrorKind::Parse, "manifest model has no network");
  const std::string engine = m.at("engine");
  const json& cfg = m.at("config");
  TimeSeriesSet series;
  if (engine == "swing") {
    series = run_swing(doc.network, swing_from(cfg), doc.disturbances);
  } else if (engine == "emt") {
    series = run_emt(doc.network, emt_from(cfg), doc.disturbances);
  } else if (engine == "hybrid") {
    series = run_hybrid(doc.network, hybrid_from(cfg), doc.disturbances);
  } else {
    throw UsageError("--engine: must be swing, emt or hybrid");
  }
  const double noise = m.at("noise");
  if (noise > 0.0) add_noise(series, noise, m.at("seed").get<std::uint64_t>());

  const fs::path waves = out_path(g, m.at("outputs").at("waves").get<std::string>());
  series.write_csv(waves);
  write_json(out_path(g, "manifest.json"), m);
  note(g, "wrote " + waves.string() + " (" + std::to_string(series.sample_count()) + " rows, " +
              std::to_string(series.channels().size() + 1) + " columns) and manifest.json");
  return kOk;
}

int cmd_simulate(const Globals& g, const SimOpts& o) {
  if (!o.manifest.empty()) {
    std::ifstream in(o.manifest);
    if (!in) throw Error(ErrorKind::Parse, "cannot open " + o.manifest);
    std::stringstream ss;
    ss << in.rdbuf();
    json m;
    try {
      m = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, o.manifest + ": " + e.what());
    }
    return run_manifest(g, m);
  }
  if (o.network.empty()) throw UsageError("--network is required (or --manifest)");
  ModelDocument net = read_document(o.network);
  if (!net.has_network) throw Error(ErrorKind::Parse, o.network + ": no network defined");
  std::vector<DisturbanceSpec> ds = net.disturbances;
  if (!o.scenario.empty()) {
    auto sc = read_document(o.scenario);
    ds = sc.disturbances;
    if (sc.has_network) throw UsageError("--scenario file must not redefine the network");
  }
  require_valid(validate(net.network), o.network);
  require_valid(validate(net.network, ds), o.scenario.empty() ? o.network : o.scenario);

  json cfg;
  if (o.engine == "swing") {
    SwingConfig c;
    if (o.dt) c.dt = *o.dt;
    if (o.t_end) c.t_end = *o.t_end;
    if (o.damping) c.damping_d = *o.damping;
    if (o.record_every) c.record_every = *o.record_every;
    c.validate();
    cfg = swing_json(c);
  } else if (o.engine == "emt") {
    EmtConfig c;
    if (o.dt) c.dt = *o.dt;
    if (o.t_end) c.t_end = *o.t_end;
    if (o.source_r) c.source_resistance = *o.source_r;
    if (o.source_xd) c.source_xd_pu = *o.source_xd;
    if (o.record_every) c.record_every = *o.record_every;
    c.dt = c.resolve_dt(net.network);
    cfg = emt_json(c);
  } else {
    HybridConfig c;
    if (o.dt_em) c.dt_em = *o.dt_em;
    if (o.rate_ratio) c.rate_ratio = *o.rate_ratio;
    if (o.t_end) c.t_end = *o.t_end;
    if (o.damping) c.damping_d = *o.damping;
    if (o.record_every) c.record_every = *o.record_every;
    if (o.source_r) c.emt.source_resistance = *o.source_r;
    if (o.source_xd) c.emt.source_xd_pu = *o.source_xd;
    c.validate(net.network);
    cfg = hybrid_json(c);
  }
  json m;
  m["tool_version"] = TRANSWAVE_VERSION;
  m["engine"] = o.engine;
  m["seed"] = g.seed;
  m["noise"] = o.noise.value_or(0.0);
  m["network_path"] = o.network;
  m["scenario_path"] = o.scenario;
  m["config"] = cfg;
  m["model"] = to_json(net.network, ds);
  m["outputs"] = {{"waves", "waves.csv"}, {"manifest", "manifest.json"}};
  return run_manifest(g, m);
}

// ---- theory ---------------------------------------------------------------

int cmd_theory(const Globals& g, const std::string& network, std::optional<double> inertia_h) {
  NetworkModel model = read_network(network);
  if (inertia_h) model = with_parameter(model, SweepParameter::InertiaH, *inertia_h);
  const auto rep = theory_report(model);
  std::printf("h_s_per_km=%.6g\n", rep.h_s_per_km);
  std::printf("v_mech_kms=%.6g\n", rep.v_mech_kms);
  std::printf("v_em_ms=%.6g\n", rep.v_em_ms);
  std::printf("light_speed_ms=%.6g\n", rep.light_speed_ms);
  note(g, "inputs: omega=" + std::to_string(rep.inputs.omega) + " rad/s, V=" +
              std::to_string(rep.inputs.v_pu) + " pu, |z|=" + std::to_string(rep.inputs.z_abs) + " pu/km");
  return kOk;
}

// ---- speed ----------------------------------------------------------------

struct SpeedOpts {
  std::string waves, network, quantity = "domega";
  int origin = 0;
  std::optional<double> threshold;
  double onset = 0.0;
};

int cmd_speed(const Globals& g, const SpeedOpts& o) {
  const auto q = parse_quantity(o.quantity);
  if (!q) throw UsageError("--quantity: must be domega, delta or v");
  const NetworkModel model = read_network(o.network);
  const auto series = TimeSeriesSet::read_csv(fs::path(o.waves));
  const double thr = o.threshold.value_or(default_threshold(*q, model));
  const auto rep = detect_arrivals(series, *q, o.origin, model, thr, o.onset);

  const fs::path arr_path = out_path(g, "arrivals.csv");
  std::ofstream arr(arr_path);
  arr << "bus,distance_km,arrival_s\n";
  char buf[128];
  for (const auto& b : rep.buses) {
    if (b.arrival_t) {
      std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g\n", b.bus, b.distance_km, *b.arrival_t);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.12g,\n", b.bus, b.distance_km);
    }
    arr << buf;
  }
  // EM speeds are reported in m/s, electromechanical ones in km/s.
  const bool em = *q == Quantity::Voltage;
  const double speed = em ? rep.fitted_speed_kms * 1e3 : rep.fitted_speed_kms;
  std::snprintf(buf, sizeof buf, "speed,%.9g,r2,%.9g\n", speed, rep.fit_r2);
  std::ofstream(out_path(g, "speed_summary.csv")) << buf;
  std::printf("%s", buf);
  note(g, std::to_string(rep.detected()) + " of " + std::to_string(rep.buses.size()) +
              " buses detected; speed unit " + (em ? "m/s" : "km/s"));
  return kOk;
}

// ---- sweep ----------------------------------------------------------------

int cmd_sweep(const Globals& g, const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + config_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, config_path + ": " + e.what());
  }
  static const std::set<std::string> keys = {"preset", "network", "scenario", "parameter", "values",
                                             "engine", "origin", "threshold", "t_end", "dt", "threads"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.count(it.key())) throw Error(ErrorKind::Parse, config_path + ": unknown key '" + it.key() + "'");
  }
  SweepConfig cfg;
  const fs::path base_dir = fs::path(config_path).parent_path();
  if (j.contains("preset")) {
    cfg.base = presets::scenario_network(j["preset"]);
    cfg.disturbances = presets::scenario(j["preset"]);
  } else {
    if (!j.contains("network")) throw Error(ErrorKind::Parse, config_path + ": needs 'preset' or 'network'");
    auto doc = read_document(base_dir / j["network"].get<std::string>());
    cfg.base = doc.network;
    cfg.disturbances = doc.disturbances;
    if (j.contains("scenario")) cfg.disturbances = read_document(base_dir / j["scenario"].get<std::string>()).disturbances;
  }
  const auto p = parse_sweep_parameter(j.value("parameter", ""));
  if (!p) throw Error(ErrorKind::Parse, config_path + ": parameter must be inertia_h, l_per_len or c_per_len");
  cfg.parameter = *p;
  const auto e = parse_sweep_engine(j.value("engine", "swing"));
  if (!e) throw Error(ErrorKind::Parse, config_path + ": engine must be swing or emt");
  cfg.engine = *e;
  cfg.values = j.at("values").get<std::vector<double>>();
  cfg.origin = j.value("origin", cfg.disturbances.empty() ? 0 : cfg.disturbances.front().target);
  cfg.threshold = j.value("threshold", 0.0);
  cfg.threads = j.value("threads", 0);
  if (j.contains("t_end")) cfg.swing.t_end = cfg.emt.t_end = j["t_end"];
  if (j.contains("dt")) cfg.swing.dt = cfg.emt.dt = j["dt"];
  if (cfg.engine == SweepEngine::Swing && !j.contains("t_end")) cfg.swing.t_end = 6.0;

  const auto pts = run_sensitivity_sweep(cfg);
  const fs::path path = out_path(g, "sweep.csv");
  std::ofstream out(path);
  out << "param_value,fitted_speed,theory_speed,status\n";
  int ok = 0;
  char buf[128];
  for (const auto& pt : pts) {
    std::string status = pt.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ';';
    }
    std::snprintf(buf, sizeof buf, "%.12g,%.9g,%.9g,", pt.value, pt.fitted_speed, pt.theory_speed);
    out << buf << status << '\n';
    if (pt.ok) ++ok;
    if (!g.quiet) std::cout << buf << status << '\n';
  }
  note(g, "wrote " + path.string() + "; speed unit " + (cfg.engine == SweepEngine::Emt ? "m/s" : "km/s"));
  return ok > 0 ? kOk : kConfig;
}

// ---- locate ---------------------------------------------------------------

struct LocateOpts {
  std::string arrivals;
  std::optional<double> speed;
  bool fit_speed = false;
  std::vector<double> bounds, truth;
  int grid = 50;
};

int cmd_locate(const Globals& g, const LocateOpts& o) {
  const auto arr = read_arrivals_csv(fs::path(o.arrivals));
  LocatorOptions opt;
  opt.grid_cells = o.grid;
  if (!o.bounds.empty()) {
    if (o.bounds.size() != 4) throw UsageError("--bounds: expected xmin,xmax,ymin,ymax");
    opt.bounds = SearchBounds{o.bounds[0], o.bounds[1], o.bounds[2], o.bounds[3]};
  }
  if (!o.truth.empty() && o.truth.size() != 2) throw UsageError("--truth: expected x,y");
  if (!o.fit_speed && !o.speed) throw UsageError("give --speed V or --fit-speed");
  auto est = o.fit_speed ? estimate_speed_and_locate(arr, opt) : locate(arr, *o.speed, opt);
  if (!o.truth.empty()) est.abs_error_km = distance(est.position, {o.truth[0], o.truth[1]});
  const std::string text = location_json(est);
  std::ofstream(out_path(g, "location.json")) << text << '\n';
  std::cout << text << '\n';
  if (!est.warning.empty()) note(g, "warning: " + est.warning);
  if (est.abs_error_km && !g.quiet) std::cerr << "abs_error_km=" << *est.abs_error_km << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transwave: power-system transient wave lab"};
  app.set_version_flag("--version", std::string(TRANSWAVE_VERSION));
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for noise injection")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress progress notes");

  GenOpts gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a network file");
  gen_cmd->require_subcommand(1);
  auto* ring = gen_cmd->add_subcommand("ring", "Ring network");
  ring->add_option("--preset", gen.preset, "ring23");
  ring->add_option("--buses", gen.buses)->capture_default_str();
  ring->add_option("--line-km", gen.line_km)->capture_default_str();
  ring->add_option("--inertia-h", gen.inertia_h, "Override H on every generator (s)");
  ring->add_option("-o,--output", gen.output, "Network file (default <out>/network.json)");
  auto* mesh = gen_cmd->add_subcommand("mesh", "Rectangular mesh network");
  mesh->add_option("--rows", gen.rows)->capture_default_str();
  mesh->add_option("--cols", gen.cols)->capture_default_str();
  mesh->add_option("--spacing-km", gen.spacing_km)->capture_default_str();
  mesh->add_option("--inertia-h", gen.inertia_h, "Override H on every generator (s)");
  mesh->add_option("-o,--output", gen.output, "Network file (default <out>/network.json)");
  auto* scen = gen_cmd->add_subcommand("scenario", "Preset network + disturbances");
  std::string names;
  for (const auto& n : presets::scenario_names()) names += (names.empty() ? "" : ", ") + n;
  scen->add_option("--name", gen.scenario, names)->required();
  scen->add_option("-o,--output", gen.output, "Network file (default <out>/network.json)");

  SimOpts sim;
  auto* simc = app.add_subcommand("simulate", "Run an engine and write waves.csv + manifest.json");
  auto* net_opt = simc->add_option("--network", sim.network, "Network JSON");
  simc->add_option("--scenario", sim.scenario, "Disturbance JSON");
  simc->add_option("--engine", sim.engine)->check(CLI::IsMember({"swing", "emt", "hybrid"}))->capture_default_str();
  simc->add_option("--dt", sim.dt, "Step (s); swing and emt");
  simc->add_option("--t-end", sim.t_end, "End time (s)");
  simc->add_option("--damping", sim.damping, "Swing damping D (pu)");
  simc->add_option("--record-every", sim.record_every)->check(CLI::PositiveNumber);
  simc->add_option("--dt-em", sim.dt_em, "Hybrid EM step (s)");
  simc->add_option("--rate-ratio", sim.rate_ratio, "Hybrid dt_mech / dt_em")->check(CLI::PositiveNumber);
  simc->add_option("--source-r", sim.source_r, "EMT source resistance (ohm)");
  simc->add_option("--source-xd", sim.source_xd, "EMT source reactance (pu on machine rating)");
  simc->add_option("--noise", sim.noise, "Gaussian noise sigma added to domega (pu)")->check(CLI::NonNegativeNumber);
  simc->add_option("--manifest", sim.manifest, "Replay a manifest.json")->excludes(net_opt);

  std::string theory_net;
  std::optional<double> theory_h;
  auto* th = app.add_subcommand("theory", "Closed-form wave speeds of a network");
  th->add_option("--network", theory_net)->required();
  th->add_option("--inertia-h", theory_h, "Override H on every generator (s)")->check(CLI::PositiveNumber);

  SpeedOpts sp;
  auto* spc = app.add_subcommand("speed", "Arrival detection and speed fit on a waves CSV");
  spc->add_option("--waves", sp.waves)->required();
  spc->add_option("--network", sp.network)->required();
  spc->add_option("--origin", sp.origin)->required();
  spc->add_option("--quantity", sp.quantity)->capture_default_str();
  spc->add_option("--threshold", sp.threshold)->check(CLI::PositiveNumber);
  spc->add_option("--onset", sp.onset, "Disturbance onset (s)")->capture_default_str();

  std::string sweep_cfg;
  auto* swc = app.add_subcommand("sweep", "Parameter sensitivity sweep");
  swc->add_option("--config", sweep_cfg, "Sweep JSON")->required();

  LocateOpts lo;
  auto* lc = app.add_subcommand("locate", "Least-squares event location from arrivals CSV");
  lc->add_option("--arrivals", lo.arrivals)->required();
  auto* speed_opt = lc->add_option("--speed", lo.speed, "Wave speed (km/s)")->check(CLI::PositiveNumber);
  lc->add_flag("--fit-speed", lo.fit_speed, "Fit the speed jointly")->excludes(speed_opt);
  lc->add_option("--bounds", lo.bounds, "xmin,xmax,ymin,ymax (km)")->delimiter(',');
  lc->add_option("--truth", lo.truth, "x,y of the true event (km)")->delimiter(',');
  lc->add_option("--grid", lo.grid, "Grid cells per axis")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*gen_cmd) {
      const std::string kind = *ring ? "ring" : *mesh ? "mesh" : "scenario";
      return cmd_gen(g, gen, kind);
    }
    if (*simc) return cmd_simulate(g, sim);
    if (*th) return cmd_theory(g, theory_net, theory_h);
    if (*spc) return cmd_speed(g, sp);
    if (*swc) return cmd_sweep(g, sweep_cfg);
    if (*lc) return cmd_locate(g, lo);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kParse;
  } catch (const DivergenceError& e) {
    std::cerr << "error (divergence, " << e.engine() << " engine, bus " << e.bus() << ", t=" << e.time()
              << " s): " << e.what() << '\n';
    return kDivergence;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error (parse): " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
