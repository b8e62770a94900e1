#include "warpchart/cli.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "warpchart/error.hpp"
#include "warpchart/io.hpp"

#ifndef WARPCHART_DATA_DIR
#define WARPCHART_DATA_DIR "data"
#endif

namespace warpchart::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  std::string output;
  std::size_t grid_size = kDefaultGridSize;
  std::size_t workers = 1;

  std::string generator;
  double delta = 0.25;

  std::size_t n0 = 30;
  std::size_t m = 30;
  std::size_t m0 = 4;
  double lambda = 0.05;
  std::optional<double> h;
  double ic_arl = 500.0;
  std::size_t reps = 2000;
  std::string calibration_table = std::string(WARPCHART_DATA_DIR) + "/calibration_table.csv";
  std::string table = "calibration_table.csv";

  std::string input;
  std::string pdfs;
  std::size_t subgroup_size = 0;
  bool daily = false;
  std::size_t min_daily = 5;
  std::string method = "warp-rank";
  double alpha_mix = 0.1;
  double var_frac = 0.99;
  double theta_widen = 0.4;
  double alpha_direct = 0.01;
  std::size_t direct_tune = 100;

  std::string scenario = "I";
  std::vector<double> deltas{0.05, 0.07, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50, 0.60, 0.80, 1.00};
  std::vector<std::string> methods{"warp-rank", "pdf-fpca-cc"};
};

// Keeps CLI options and config/manifest keys in one place: the key of every
// option is its long flag name without the dashes.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& key, T& var, const std::string& help, const std::string& short_flag = "") {
    std::string names = short_flag.empty() ? "--" + key : short_flag + ",--" + key;
    auto* opt = app_->add_option(names, var, help);
    if constexpr (std::is_same_v<T, std::optional<double>>) {
      set_[key] = [&var](const json& j) { var = j.is_null() ? std::nullopt : std::optional<double>(j.get<double>()); };
      get_[key] = [&var] { return var ? json(*var) : json(nullptr); };
    } else {
      set_[key] = [&var](const json& j) { var = j.get<T>(); };
      get_[key] = [&var] { return json(var); };
    }
    return opt;
  }

  CLI::Option* flag(const std::string& key, bool& var, const std::string& help) {
    auto* opt = app_->add_flag("--" + key, var, help);
    set_[key] = [&var](const json& j) { var = j.get<bool>(); };
    get_[key] = [&var] { return json(var); };
    return opt;
  }

  CLI::Option* positional(const std::string& key, std::string& var, const std::string& help) {
    auto* opt = app_->add_option(key, var, help);
    set_[key] = [&var](const json& j) { var = j.get<std::string>(); };
    get_[key] = [&var] { return json(var); };
    return opt;
  }

  // Fills every option that was not given on the command line.
  void apply(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorKind::InvalidParameter, "config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "command" || key == "version") continue;
      const auto it = set_.find(key);
      if (it == set_.end()) throw Error(ErrorKind::InvalidParameter, "unknown config key '" + key + "'");
      const auto* opt = app_->get_option_no_throw(key_to_name(key));
      if (opt != nullptr && opt->count() > 0) continue;
      try {
        it->second(value);
      } catch (const json::exception&) {
        throw Error(ErrorKind::InvalidParameter, "config key '" + key + "' has the wrong type");
      }
    }
  }

  json snapshot() const {
    json out = json::object();
    out["command"] = app_->get_name();
    out["version"] = WARPCHART_VERSION;
    for (const auto& [key, get] : get_) {
      if (key == "config") continue;
      out[key] = get();
    }
    return out;
  }

 private:
  std::string key_to_name(const std::string& key) const {
    return app_->get_option_no_throw("--" + key) != nullptr ? "--" + key : key;
  }

  CLI::App* app_;
  std::map<std::string, std::function<void(const json&)>> set_;
  std::map<std::string, std::function<json()>> get_;
};

struct Command {
  CLI::App* app = nullptr;
  std::unique_ptr<Binder> bind;
};

Command make_command(CLI::App& root, const std::string& name, const std::string& help, Options& o) {
  Command c;
  c.app = root.add_subcommand(name, help);
  c.bind = std::make_unique<Binder>(c.app);
  c.bind->add("config", o.config, "JSON file with flat keys named like the flags; flags win");
  return c;
}

void add_chart_options(Binder& b, Options& o) {
  b.add("m", o.m, "tuning length");
  b.add("m0", o.m0, "start offset of the weighted moving average");
  b.add("lambda", o.lambda, "smoothing parameter");
  b.add("h", o.h, "control limit (skips the calibration table)");
  b.add("ic-arl", o.ic_arl, "in-control average run length used to look up h");
  b.add("calibration-table", o.calibration_table, "calibration table CSV");
  b.add("reps", o.reps, "replications when h has to be calibrated");
}

void add_monitor_options(Binder& b, Options& o) {
  b.add("n0", o.n0, "number of training densities");
  add_chart_options(b, o);
  b.add("method", o.method, "warp-rank, pdf-fpca-cc or direct-chart");
  b.add("alpha-mix", o.alpha_mix, "uniform mixing weight");
  b.add("var-frac", o.var_frac, "variance fraction retained by FPCA");
  b.add("grid-size", o.grid_size, "grid points on [0,1]");
  b.add("alpha-direct", o.alpha_direct, "false alarm rate of the direct chart");
  b.add("direct-tune", o.direct_tune, "tuning length of the direct chart");
  b.add("seed", o.seed, "seed for calibration when h is not tabulated");
  b.add("workers", o.workers, "worker threads");
}

void load_config(Binder& b, const Options& o) {
  if (o.config.empty()) return;
  json doc;
  try {
    doc = json::parse(io::read_text(o.config));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidParameter, "cannot parse " + o.config + ": " + e.what());
  }
  b.apply(doc);
}

void write_manifest(const fs::path& path, const Binder& b) {
  io::write_text(path, b.snapshot().dump(2) + "\n");
}

double resolve_limit(Options& o) {
  if (o.h) return *o.h;
  if (!o.calibration_table.empty() && fs::exists(o.calibration_table)) {
    const auto table = io::read_calibration_table(o.calibration_table);
    if (auto h = io::lookup_limit(table, o.m, o.m0, o.lambda, o.ic_arl)) {
      o.h = *h;
      return *h;
    }
  }
  std::cerr << "no tabulated limit for m=" << o.m << " m0=" << o.m0 << " lambda=" << o.lambda
            << " ic-arl=" << o.ic_arl << "; calibrating with " << o.reps << " replications\n";
  CalibrationOptions c;
  c.m = o.m;
  c.m0 = o.m0;
  c.lambda = o.lambda;
  c.ic_arl = o.ic_arl;
  c.reps = o.reps;
  c.seed = o.seed;
  c.workers = o.workers;
  o.h = calibrate_limit(c).h;
  return *o.h;
}

MonitorConfig monitor_config(Options& o) {
  MonitorConfig cfg;
  cfg.n0 = o.n0;
  cfg.m = o.m;
  cfg.alpha_mix = o.alpha_mix;
  cfg.grid_size = o.grid_size;
  cfg.var_frac = o.var_frac;
  cfg.method = parse_method(o.method);
  cfg.alpha_direct = o.alpha_direct;
  cfg.direct_tune = o.direct_tune;
  const double h = cfg.method == Method::DirectChart ? (o.h ? *o.h : 1.0) : resolve_limit(o);
  cfg.set_chart(o.m0, o.lambda, h, o.ic_arl);
  cfg.validate();
  return cfg;
}

struct LoadedInput {
  PdfSequence pdfs;
  std::size_t clamp_count = 0;
  std::size_t degenerate = 0;
};

LoadedInput load_densities(const Options& o) {
  const int sources = !o.input.empty() + !o.pdfs.empty();
  if (sources != 1) throw Error(ErrorKind::InvalidParameter, "give exactly one of --input and --pdfs");
  LoadedInput out;
  if (!o.pdfs.empty()) {
    out.pdfs = io::read_pdf_csv(o.pdfs);
    require_same_grid(out.pdfs.front().size(), o.grid_size, "--pdfs input");
    return out;
  }
  if ((o.subgroup_size > 0) == o.daily) {
    throw Error(ErrorKind::InvalidParameter, "raw input needs exactly one of --subgroup-size and --daily");
  }
  const auto series = io::read_dsf_csv(o.input);
  const auto groups = o.daily ? partition_daily(series, o.min_daily) : partition_equal(series, o.subgroup_size);
  SummaryOptions so;
  so.n_training = o.n0;
  so.theta_widen = o.theta_widen;
  so.grid_size = o.grid_size;
  auto ds = summarize(groups, so);
  out.pdfs = std::move(ds.pdfs);
  out.clamp_count = ds.clamp_count;
  out.degenerate = ds.degenerate_subgroup_count;
  return out;
}

void add_input_options(Binder& b, Options& o) {
  b.add("input", o.input, "raw DSF CSV (value or timestamp,value)", "-i");
  b.add("pdfs", o.pdfs, "density sequence CSV, one row per density");
  b.add("subgroup-size", o.subgroup_size, "split raw input into subgroups of this size");
  b.flag("daily", o.daily, "split raw input by UTC day");
  b.add("min-daily", o.min_daily, "smallest usable daily subgroup");
  b.add("theta-widen", o.theta_widen, "support widening factor");
}

int cmd_simulate(Options& o, Binder& b) {
  if (o.output.empty()) throw Error(ErrorKind::InvalidParameter, "simulate needs -o");
  if (o.generator == "appendix1") {
    io::write_dsf_csv(o.output, appendix1_series(o.seed));
  } else if (o.generator == "scenario1") {
    auto spec = scenario_spec(Scenario::I, o.delta, o.seed);
    spec.grid_size = o.grid_size;
    io::write_pdf_csv(o.output, simulate_scenario1(spec), {o.grid_size, 0.0, {0.0, 1.0, 0.0}, 0});
  } else if (o.generator == "scenario2") {
    auto spec = scenario_spec(Scenario::II, o.delta, o.seed);
    spec.grid_size = o.grid_size;
    io::write_pdf_csv(o.output, simulate_scenario1(spec), {o.grid_size, 0.0, {0.0, 1.0, 0.0}, 0});
  } else if (o.generator == "scenario2-outliers") {
    io::write_pdf_csv(o.output, simulate_scenario2_outliers(o.seed, o.grid_size), {o.grid_size, 0.0, {0.0, 1.0, 0.0}, 0});
  } else {
    throw Error(ErrorKind::InvalidParameter, "unknown generator '" + o.generator + "'");
  }
  write_manifest(o.output + ".manifest.json", b);
  return kOk;
}

int cmd_calibrate(Options& o, Binder& b) {
  CalibrationOptions c;
  c.m = o.m;
  c.m0 = o.m0;
  c.lambda = o.lambda;
  c.ic_arl = o.ic_arl;
  c.reps = o.reps;
  c.seed = o.seed;
  c.workers = o.workers;
  const auto res = calibrate_limit(c);
  io::append_calibration_row(o.table, {c.m, c.m0, c.lambda, c.ic_arl, res.h, c.reps, c.seed});
  std::cout << io::format_double(res.h) << '\n';
  write_manifest(o.table + ".manifest.json", b);
  return kOk;
}

int cmd_train(Options& o, Binder& b) {
  if (o.output.empty()) throw Error(ErrorKind::InvalidParameter, "train needs -o");
  auto in = load_densities(o);
  MonitorConfig cfg;
  cfg.n0 = o.n0;
  cfg.alpha_mix = o.alpha_mix;
  cfg.grid_size = o.grid_size;
  cfg.var_frac = o.var_frac;
  cfg.method = parse_method(o.method);
  if (in.pdfs.size() < cfg.n0) throw Error(ErrorKind::InsufficientData, "fewer densities than n0");
  const auto model = train(std::span<const PdfOnGrid>(in.pdfs).first(cfg.n0), cfg);
  io::write_text(o.output, io::to_json(model).dump() + "\n");
  std::cout << "retained " << model.retained << " of " << model.eigenvalues.size() << " components\n";
  write_manifest(o.output + ".manifest.json", b);
  return kOk;
}

int cmd_monitor(Options& o, Binder& b) {
  if (o.output.empty()) throw Error(ErrorKind::InvalidParameter, "monitor needs -o <directory>");
  auto in = load_densities(o);
  const auto cfg = monitor_config(o);
  if (in.pdfs.size() < cfg.n0 + cfg.m) {
    throw Error(ErrorKind::InsufficientData, "need at least n0 + m densities, got " + std::to_string(in.pdfs.size()));
  }
  const fs::path dir(o.output);
  fs::create_directories(dir);

  Monitor mon(cfg);
  mon.set_diagnostics(in.clamp_count, in.degenerate);
  mon.train(std::span<const PdfOnGrid>(in.pdfs).first(cfg.n0));
  std::ostringstream events;
  std::vector<ChartPoint> t2_points;
  std::vector<ChartPoint> spe_points;
  for (std::size_t i = cfg.n0; i < in.pdfs.size(); ++i) {
    const auto r = mon.ingest(in.pdfs[i]);
    events << io::event_json(r).dump() << '\n';
    t2_points.push_back(r.t2);
    spe_points.push_back(r.spe);
  }
  io::write_text(dir / "events.jsonl", events.str());
  io::write_chart_csv(dir / "chart_t2.csv", t2_points);
  io::write_chart_csv(dir / "chart_spe.csv", spe_points);
  io::write_text(dir / "verdict.json", io::to_json(mon.verdict()).dump(2) + "\n");
  io::write_text(dir / "session.json", io::session_json(mon).dump() + "\n");
  write_manifest(dir / "manifest.json", b);

  const auto& v = mon.verdict();
  auto describe = [](const char* name, const ChartVerdict& c) {
    std::cout << name << ": ";
    if (c.alarmed) {
      std::cout << "alarm at n=" << c.n_at_alarm << ", change point " << c.change_point_global << '\n';
    } else {
      std::cout << "no alarm\n";
    }
  };
  describe("T2 ", v.t2);
  describe("SPE", v.spe);
  return v.combined_alarm ? kAlarm : kOk;
}

int cmd_power_study(Options& o, Binder& b) {
  if (o.output.empty()) throw Error(ErrorKind::InvalidParameter, "power-study needs -o");
  PowerStudyConfig p;
  if (o.scenario == "I" || o.scenario == "1") {
    p.scenario = Scenario::I;
  } else if (o.scenario == "II" || o.scenario == "2") {
    p.scenario = Scenario::II;
  } else {
    throw Error(ErrorKind::InvalidParameter, "scenario must be I or II");
  }
  p.deltas = o.deltas;
  p.reps = o.reps;
  p.seed = o.seed;
  p.workers = o.workers;
  p.methods.clear();
  for (const auto& name : o.methods) p.methods.push_back(parse_method(name));
  p.monitor = monitor_config(o);
  const auto report = power_study(p);
  io::write_power_report(o.output, report);
  std::cout << io::read_text(o.output);
  write_manifest(o.output + ".manifest.json", b);
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter:
    case ErrorKind::UnknownMethod:
      return kUsageError;
    default:
      return kRuntimeFailure;
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Distributional change monitoring with warping functions and rank charts", "warpchart"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", WARPCHART_VERSION);
  app.require_subcommand(1);
  Options o;

  auto sim = make_command(app, "simulate", "write a synthetic data set", o);
  sim.bind->positional("generator", o.generator, "appendix1, scenario1, scenario2 or scenario2-outliers")->required();
  sim.bind->add("seed", o.seed, "random seed");
  sim.bind->add("delta", o.delta, "mixing weight after the change");
  sim.bind->add("grid-size", o.grid_size, "grid points on [0,1]");
  sim.bind->add("output", o.output, "output CSV", "-o");

  auto cal = make_command(app, "calibrate", "Monte-Carlo control limit for a target in-control ARL", o);
  cal.bind->add("m", o.m, "tuning length");
  cal.bind->add("m0", o.m0, "start offset of the weighted moving average");
  cal.bind->add("lambda", o.lambda, "smoothing parameter");
  cal.bind->add("ic-arl", o.ic_arl, "target in-control ARL");
  cal.bind->add("reps", o.reps, "replications");
  cal.bind->add("seed", o.seed, "random seed");
  cal.bind->add("workers", o.workers, "worker threads");
  cal.bind->add("table", o.table, "calibration table to append to");

  auto trn = make_command(app, "train", "fit the FPC model on the first n0 densities", o);
  add_input_options(*trn.bind, o);
  trn.bind->add("n0", o.n0, "number of training densities");
  trn.bind->add("method", o.method, "warp-rank, pdf-fpca-cc or direct-chart");
  trn.bind->add("alpha-mix", o.alpha_mix, "uniform mixing weight");
  trn.bind->add("var-frac", o.var_frac, "variance fraction retained by FPCA");
  trn.bind->add("grid-size", o.grid_size, "grid points on [0,1]");
  trn.bind->add("output", o.output, "model JSON", "-o");

  auto mon = make_command(app, "monitor", "train, then ingest the remaining densities", o);
  add_input_options(*mon.bind, o);
  add_monitor_options(*mon.bind, o);
  mon.bind->add("output", o.output, "output directory", "-o");

  auto pow = make_command(app, "power-study", "empirical detection power on synthetic scenarios", o);
  pow.bind->add("scenario", o.scenario, "I or II");
  pow.bind->add("deltas", o.deltas, "mixing weights")->delimiter(',');
  pow.bind->add("methods", o.methods, "methods to compare")->delimiter(',');
  add_monitor_options(*pow.bind, o);
  pow.bind->add("output", o.output, "report CSV", "-o");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsageError;
  }

  const std::vector<std::pair<Command*, int (*)(Options&, Binder&)>> commands{
      {&sim, cmd_simulate}, {&cal, cmd_calibrate}, {&trn, cmd_train}, {&mon, cmd_monitor}, {&pow, cmd_power_study}};
  for (auto& [cmd, fn] : commands) {
    if (!cmd->app->parsed()) continue;
    try {
      load_config(*cmd->bind, o);
      return fn(o, *cmd->bind);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_code_for(e.kind());
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kRuntimeFailure;
    }
  }
  return kUsageError;
}

}  // namespace warpchart::cli
