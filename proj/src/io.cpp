#include "warpchart/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "warpchart/error.hpp"

namespace warpchart::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".json");
}

std::vector<double> to_vector(const json& j) { return j.get<std::vector<double>>(); }

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw Error(ErrorKind::Io, "cannot format number");
  return std::string(buf, ptr);
}

DsfSeries read_dsf_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  DsfSeries series;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    double value = 0.0;
    double stamp = 0.0;
    bool ok = false;
    if (fields.size() == 1) {
      ok = parse_double(fields[0], value);
    } else if (fields.size() == 2) {
      ok = parse_double(fields[0], stamp) && parse_double(fields[1], value);
    }
    if (!ok) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(line_no) + ": cannot parse '" + line + "'");
    }
    first = false;
    series.values.push_back(value);
    if (fields.size() == 2) series.timestamps.push_back(static_cast<std::int64_t>(std::llround(stamp)));
  }
  if (!series.timestamps.empty() && series.timestamps.size() != series.values.size()) {
    throw Error(ErrorKind::Io, path.string() + ": mixed one- and two-column rows");
  }
  if (series.values.empty()) throw Error(ErrorKind::InsufficientData, path.string() + ": no data");
  return series;
}

void write_dsf_csv(const std::filesystem::path& path, const DsfSeries& series) {
  auto out = open_out(path);
  const bool stamped = series.timestamps.size() == series.values.size() && !series.timestamps.empty();
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    if (stamped) out << series.timestamps[i] << ',';
    out << format_double(series.values[i]) << '\n';
  }
}

void write_pdf_csv(const std::filesystem::path& path, const PdfSequence& pdfs, const PdfSidecar& sidecar) {
  auto out = open_out(path);
  for (const auto& f : pdfs) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out << ',';
      out << format_double(f[i]);
    }
    out << '\n';
  }
  json meta{{"grid_size", sidecar.grid_size},
            {"alpha_mix", sidecar.alpha_mix},
            {"support", to_json(sidecar.support)},
            {"count", pdfs.size()}};
  write_text(sidecar_path(path), meta.dump(2) + "\n");
}

PdfSequence read_pdf_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  PdfSequence pdfs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    PdfOnGrid f;
    for (const auto& field : split(trim(line), ',')) {
      double v = 0.0;
      if (!parse_double(field, v)) {
        throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(line_no) + ": bad density value");
      }
      f.values.push_back(v);
    }
    if (!pdfs.empty()) require_same_grid(f.size(), pdfs.front().size(), "read_pdf_csv");
    pdfs.push_back(std::move(f));
  }
  if (pdfs.empty()) throw Error(ErrorKind::InsufficientData, path.string() + ": no densities");
  return pdfs;
}

std::optional<PdfSidecar> read_pdf_sidecar(const std::filesystem::path& csv_path) {
  const auto p = sidecar_path(csv_path);
  if (!std::filesystem::exists(p)) return std::nullopt;
  const auto j = json::parse(read_text(p));
  PdfSidecar s;
  s.grid_size = j.at("grid_size").get<std::size_t>();
  s.alpha_mix = j.at("alpha_mix").get<double>();
  s.support.lb_star = j.at("support").at("lb_star").get<double>();
  s.support.ub_star = j.at("support").at("ub_star").get<double>();
  s.support.theta_widen = j.at("support").value("theta_widen", 0.4);
  s.count = j.value("count", std::size_t{0});
  return s;
}

json to_json(const SupportInterval& s) {
  return {{"lb_star", s.lb_star}, {"ub_star", s.ub_star}, {"theta_widen", s.theta_widen}};
}

json to_json(const FpcModel& model) {
  json eig = json::array();
  for (const auto& phi : model.eigenfunctions) eig.push_back(phi.values);
  return {{"grid_size", model.grid_size()},
          {"mean_fn", model.mean_fn.values},
          {"eigenfunctions", eig},
          {"eigenvalues", model.eigenvalues},
          {"retained", model.retained},
          {"var_frac", model.var_frac},
          {"reference_cdf", model.reference_cdf.values},
          {"n_training", model.n_training}};
}

FpcModel model_from_json(const json& j) {
  FpcModel m;
  m.mean_fn = GridFunction(to_vector(j.at("mean_fn")));
  for (const auto& e : j.at("eigenfunctions")) m.eigenfunctions.emplace_back(to_vector(e));
  m.eigenvalues = to_vector(j.at("eigenvalues"));
  m.retained = j.at("retained").get<std::size_t>();
  m.var_frac = j.at("var_frac").get<double>();
  m.reference_cdf = CdfOnGrid(to_vector(j.at("reference_cdf")));
  m.n_training = j.at("n_training").get<std::size_t>();
  const auto g = j.at("grid_size").get<std::size_t>();
  require_same_grid(m.mean_fn.size(), g, "model_from_json");
  for (const auto& phi : m.eigenfunctions) require_same_grid(phi.size(), g, "model_from_json");
  if (m.eigenvalues.size() != m.eigenfunctions.size() || m.retained > m.eigenvalues.size()) {
    throw Error(ErrorKind::Io, "inconsistent model document");
  }
  return m;
}

namespace {

json chart_config_json(const RankChartConfig& c) {
  return {{"m", c.m}, {"m0", c.m0}, {"lambda", c.lambda}, {"control_limit", c.control_limit}, {"ic_arl", c.ic_arl}};
}

RankChartConfig chart_config_from(const json& j) {
  RankChartConfig c;
  c.m = j.at("m").get<std::size_t>();
  c.m0 = j.at("m0").get<std::size_t>();
  c.lambda = j.at("lambda").get<double>();
  c.control_limit = j.at("control_limit").get<double>();
  c.ic_arl = j.at("ic_arl").get<double>();
  return c;
}

json chart_verdict_json(const ChartVerdict& v) {
  json j{{"alarmed", v.alarmed}};
  if (v.alarmed) {
    j["n_at_alarm"] = v.n_at_alarm;
    j["change_point_global"] = v.change_point_global;
    j["ymax"] = v.ymax;
  } else {
    j["n_at_alarm"] = nullptr;
    j["change_point_global"] = nullptr;
  }
  return j;
}

}  // namespace

json to_json(const MonitorConfig& cfg) {
  return {{"n0", cfg.n0},
          {"m", cfg.m},
          {"alpha_mix", cfg.alpha_mix},
          {"grid_size", cfg.grid_size},
          {"var_frac", cfg.var_frac},
          {"chart_t2", chart_config_json(cfg.chart_t2)},
          {"chart_spe", chart_config_json(cfg.chart_spe)},
          {"method", std::string(to_string(cfg.method))},
          {"alpha_direct", cfg.alpha_direct},
          {"direct_tune", cfg.direct_tune}};
}

MonitorConfig monitor_config_from_json(const json& j) {
  MonitorConfig cfg;
  cfg.n0 = j.at("n0").get<std::size_t>();
  cfg.m = j.at("m").get<std::size_t>();
  cfg.alpha_mix = j.at("alpha_mix").get<double>();
  cfg.grid_size = j.at("grid_size").get<std::size_t>();
  cfg.var_frac = j.at("var_frac").get<double>();
  cfg.chart_t2 = chart_config_from(j.at("chart_t2"));
  cfg.chart_spe = chart_config_from(j.at("chart_spe"));
  cfg.method = parse_method(j.at("method").get<std::string>());
  cfg.alpha_direct = j.value("alpha_direct", 0.01);
  cfg.direct_tune = j.value("direct_tune", std::size_t{100});
  return cfg;
}

json to_json(const MonitorVerdict& v) {
  return {{"t2", chart_verdict_json(v.t2)},
          {"spe", chart_verdict_json(v.spe)},
          {"combined_alarm", v.combined_alarm},
          {"clamp_count", v.clamp_count},
          {"degenerate_subgroup_count", v.degenerate_subgroup_count}};
}

json to_json(const ChartState& chart) {
  json hist = json::array();
  for (const auto& p : chart.ymax_history()) hist.push_back({p.n, p.ymax});
  json j{{"config", chart_config_json(chart.config())},
         {"n0", chart.n0()},
         {"observed", std::vector<double>(chart.observed().begin(), chart.observed().end())},
         {"n_future", chart.n_future()},
         {"ymax_history", hist}};
  if (const auto& a = chart.alarm()) {
    j["alarm"] = {{"n_at_alarm", a->n_at_alarm},
                  {"ymax", a->ymax},
                  {"change_point_local", a->change_point_local},
                  {"change_point_global", a->change_point_global}};
  } else {
    j["alarm"] = nullptr;
  }
  return j;
}

json session_json(const Monitor& monitor) {
  json feats = json::array();
  for (const auto& f : monitor.features()) feats.push_back({{"k", f.index}, {"t2", f.t2}, {"spe", f.spe}});
  json j{{"config", to_json(monitor.config())},
         {"model", to_json(monitor.model())},
         {"features", feats},
         {"verdict", to_json(monitor.verdict())}};
  if (monitor.config().method != Method::DirectChart) {
    j["chart_t2"] = to_json(monitor.chart_t2());
    j["chart_spe"] = to_json(monitor.chart_spe());
  }
  return j;
}

Monitor monitor_from_session(const json& j) {
  auto cfg = monitor_config_from_json(j.at("config"));
  auto model = model_from_json(j.at("model"));
  std::vector<FeaturePair> feats;
  for (const auto& f : j.at("features")) {
    feats.push_back({f.at("t2").get<double>(), f.at("spe").get<double>(), f.at("k").get<std::size_t>()});
  }
  auto mon = Monitor::restore(std::move(cfg), std::move(model), feats);
  const auto& v = j.at("verdict");
  mon.set_diagnostics(v.value("clamp_count", std::size_t{0}), v.value("degenerate_subgroup_count", std::size_t{0}));
  return mon;
}

json event_json(const IngestResult& r) {
  auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  return {{"k", r.k},
          {"t2", r.feature.t2},
          {"spe", r.feature.spe},
          {"ymax_t2", opt(r.t2.ymax)},
          {"ymax_spe", opt(r.spe.ymax)},
          {"alarmed_t2", r.t2.alarmed},
          {"alarmed_spe", r.spe.alarmed}};
}

std::vector<CalibrationRow> read_calibration_table(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<CalibrationRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      if (trim(line).rfind("m,", 0) == 0) continue;
    }
    const auto f = split(trim(line), ',');
    if (f.size() != 7) throw Error(ErrorKind::Io, path.string() + ": expected 7 columns");
    CalibrationRow r;
    double v[7];
    for (std::size_t i = 0; i < 7; ++i) {
      if (!parse_double(f[i], v[i])) throw Error(ErrorKind::Io, path.string() + ": bad number '" + f[i] + "'");
    }
    r.m = static_cast<std::size_t>(v[0]);
    r.m0 = static_cast<std::size_t>(v[1]);
    r.lambda = v[2];
    r.ic_arl = v[3];
    r.h = v[4];
    r.reps = static_cast<std::size_t>(v[5]);
    r.seed = static_cast<std::uint64_t>(std::stoull(trim(f[6])));
    rows.push_back(r);
  }
  return rows;
}

void append_calibration_row(const std::filesystem::path& path, const CalibrationRow& row) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (fresh && path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  if (fresh) out << "m,m0,lambda,ic_arl,h,reps,seed\n";
  out << row.m << ',' << row.m0 << ',' << format_double(row.lambda) << ',' << format_double(row.ic_arl) << ','
      << format_double(row.h) << ',' << row.reps << ',' << row.seed << '\n';
}

std::optional<double> lookup_limit(const std::vector<CalibrationRow>& table, std::size_t m, std::size_t m0,
                                   double lambda, double ic_arl) {
  std::optional<double> found;
  std::size_t best_reps = 0;
  for (const auto& r : table) {
    if (r.m == m && r.m0 == m0 && std::abs(r.lambda - lambda) < 1e-12 && std::abs(r.ic_arl - ic_arl) < 1e-9 &&
        (!found || r.reps > best_reps)) {
      found = r.h;
      best_reps = r.reps;
    }
  }
  return found;
}

void write_chart_csv(const std::filesystem::path& path, const std::vector<ChartPoint>& points) {
  auto out = open_out(path);
  out << "n,ymax,control_limit,alarmed\n";
  for (const auto& p : points) {
    if (!p.ymax) continue;
    out << p.n << ',' << format_double(*p.ymax) << ',' << format_double(p.control_limit) << ','
        << (p.alarmed ? 1 : 0) << '\n';
  }
}

void write_power_report(const std::filesystem::path& csv_path, const PowerStudyReport& report) {
  auto out = open_out(csv_path);
  out << "delta";
  for (const auto& [name, _] : report.edp_per_method) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < report.deltas.size(); ++i) {
    out << format_double(report.deltas[i]);
    for (const auto& [_, mp] : report.edp_per_method) out << ',' << format_double(mp.edp[i]);
    out << '\n';
  }
  json diag = json::object();
  for (const auto& [name, mp] : report.edp_per_method) {
    diag[name] = {{"detections", mp.detections},
                  {"pre_change_alarms", mp.pre_change_alarms},
                  {"post_change_alarms", mp.post_change_alarms}};
  }
  json meta{{"scenario", report.scenario == Scenario::I ? "I" : "II"},
            {"deltas", report.deltas},
            {"reps", report.reps},
            {"seed", report.seed},
            {"config", to_json(report.monitor)},
            {"diagnostics", diag}};
  write_text(sidecar_path(csv_path), meta.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace warpchart::io
