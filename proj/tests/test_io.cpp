#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "support.hpp"
#include "warpchart/error.hpp"
#include "warpchart/io.hpp"
#include "warpchart/simgen.hpp"

using namespace warpchart;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("warpchart_io_" + std::to_string(Catch::rngSeed()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 123456789.123, std::numeric_limits<double>::max()}) {
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(3.0) == "3");
}

TEST_CASE("dsf csv round-trip") {
  TempDir dir;
  DsfSeries s;
  s.values = {0.1, -2.0, 1.0 / 7.0, 5e-9};
  io::write_dsf_csv(dir.path / "a.csv", s);
  CHECK(io::read_dsf_csv(dir.path / "a.csv").values == s.values);

  s.timestamps = {1700000000, 1700000060, 1700003600, 1700090000};
  io::write_dsf_csv(dir.path / "b.csv", s);
  const auto back = io::read_dsf_csv(dir.path / "b.csv");
  CHECK(back.values == s.values);
  CHECK(back.timestamps == s.timestamps);
}

TEST_CASE("dsf csv accepts a header and rejects junk") {
  TempDir dir;
  io::write_text(dir.path / "h.csv", "strain\n1.5\n2.5\n");
  CHECK(io::read_dsf_csv(dir.path / "h.csv").values == std::vector<double>{1.5, 2.5});
  io::write_text(dir.path / "bad.csv", "1.0\nabc\n");
  CHECK_THROWS_AS(io::read_dsf_csv(dir.path / "bad.csv"), Error);
  try {
    io::read_dsf_csv(dir.path / "missing.csv");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("pdf csv and sidecar round-trip") {
  TempDir dir;
  const auto seq = simulate_scenario1(scenario_spec(Scenario::I, 0.25, 1));
  io::PdfSidecar side;
  side.alpha_mix = 0.1;
  side.support = SupportInterval{-0.2, 1.3, 0.4};
  side.count = seq.size();
  const auto path = dir.path / "seq.csv";
  io::write_pdf_csv(path, seq, side);
  CHECK(io::read_pdf_csv(path) == seq);
  const auto back = io::read_pdf_sidecar(path);
  REQUIRE(back);
  CHECK(back->grid_size == kDefaultGridSize);
  CHECK(back->alpha_mix == 0.1);
  CHECK(back->support.lb_star == -0.2);
  CHECK(back->support.ub_star == 1.3);
  CHECK(back->count == seq.size());
  CHECK_FALSE(io::read_pdf_sidecar(dir.path / "none.csv"));
}

TEST_CASE("ragged pdf csv is rejected") {
  TempDir dir;
  io::write_text(dir.path / "r.csv", "1,1,1\n1,1\n");
  CHECK_THROWS_AS(io::read_pdf_csv(dir.path / "r.csv"), Error);
}

TEST_CASE("model json round-trip") {
  const auto cfg = testsupport::default_monitor();
  const auto seq = simulate_scenario1(scenario_spec(Scenario::I, 0.25, 2));
  const auto model = train(std::span(seq).first(cfg.n0), cfg);
  const auto back = io::model_from_json(io::json::parse(io::to_json(model).dump()));
  CHECK(back.mean_fn == model.mean_fn);
  CHECK(back.eigenfunctions == model.eigenfunctions);
  CHECK(back.eigenvalues == model.eigenvalues);
  CHECK(back.retained == model.retained);
  CHECK(back.reference_cdf == model.reference_cdf);
  CHECK(back.n_training == model.n_training);
}

TEST_CASE("monitor config json round-trip") {
  auto cfg = testsupport::default_monitor(0.2);
  cfg.method = Method::PdfFpcaCc;
  cfg.alpha_mix = 0.05;
  cfg.n0 = 40;
  const auto back = io::monitor_config_from_json(io::to_json(cfg));
  CHECK(back.n0 == 40);
  CHECK(back.method == Method::PdfFpcaCc);
  CHECK(back.alpha_mix == 0.05);
  CHECK(back.chart_t2.lambda == 0.2);
  CHECK(back.chart_spe.control_limit == cfg.chart_spe.control_limit);
  CHECK(io::to_json(back) == io::to_json(cfg));
}

TEST_CASE("session json restores the monitor") {
  const auto cfg = testsupport::default_monitor();
  const auto seq = simulate_scenario1(scenario_spec(Scenario::I, 0.25, 3));
  auto mon = run_monitor(seq, cfg);
  mon.set_diagnostics(4, 1);
  const auto j = io::session_json(mon);
  const auto back = io::monitor_from_session(io::json::parse(j.dump()));
  CHECK(io::to_json(back.verdict()) == io::to_json(mon.verdict()));
  CHECK(back.verdict().clamp_count == 4);
  CHECK(io::to_json(back.chart_t2()) == io::to_json(mon.chart_t2()));
  CHECK(io::session_json(back) == j);
}

TEST_CASE("event records carry both charts") {
  const auto cfg = testsupport::default_monitor();
  const auto seq = simulate_scenario1(scenario_spec(Scenario::I, 0.25, 3));
  Monitor mon(cfg);
  mon.train(std::span(seq).first(cfg.n0));
  const auto tuning = io::event_json(mon.ingest(seq[cfg.n0]));
  CHECK(tuning.at("k") == 1);
  CHECK(tuning.at("ymax_t2").is_null());
  for (std::size_t i = cfg.n0 + 1; i < cfg.n0 + cfg.m + 1; ++i) mon.ingest(seq[i]);
  const auto ev = io::event_json(mon.ingest(seq[cfg.n0 + cfg.m + 1]));
  for (const char* key : {"k", "t2", "spe", "ymax_t2", "ymax_spe", "alarmed_t2", "alarmed_spe"}) CHECK(ev.contains(key));
  CHECK(ev.at("ymax_spe").is_number());
}

TEST_CASE("verdict json without alarm") {
  MonitorVerdict v;
  const auto j = io::to_json(v);
  CHECK(j.at("combined_alarm") == false);
  CHECK(j.at("t2").at("n_at_alarm").is_null());
}

TEST_CASE("calibration table append and lookup") {
  TempDir dir;
  const auto path = dir.path / "cal.csv";
  io::append_calibration_row(path, {30, 4, 0.05, 500.0, 2.25, 500, 1});
  io::append_calibration_row(path, {30, 4, 0.05, 500.0, 2.27, 2000, 1});
  io::append_calibration_row(path, {30, 4, 0.1, 370.0, 2.4, 2000, 2});
  const auto table = io::read_calibration_table(path);
  REQUIRE(table.size() == 3);
  CHECK(io::lookup_limit(table, 30, 4, 0.05, 500.0) == 2.27);
  CHECK(io::lookup_limit(table, 30, 4, 0.1, 370.0) == 2.4);
  CHECK_FALSE(io::lookup_limit(table, 30, 5, 0.05, 500.0));
  CHECK_FALSE(io::lookup_limit(table, 30, 4, 0.2, 500.0));
}

TEST_CASE("shipped calibration table covers the default chart") {
  const auto table = io::read_calibration_table(WARPCHART_DATA_DIR "/calibration_table.csv");
  for (double lambda : {0.05, 0.1, 0.2, 0.3, 0.5}) {
    double prev = 0.0;
    for (double arl : {100.0, 370.0, 500.0}) {
      const auto h = io::lookup_limit(table, 30, 4, lambda, arl);
      REQUIRE(h);
      CHECK(*h > prev);
      prev = *h;
    }
  }
}

TEST_CASE("chart csv skips tuning points") {
  TempDir dir;
  std::vector<ChartPoint> pts(3);
  pts[1].n = 1;
  pts[1].ymax = 0.5;
  pts[1].control_limit = 2.0;
  pts[2].n = 2;
  pts[2].ymax = 2.5;
  pts[2].control_limit = 2.0;
  pts[2].alarmed = true;
  io::write_chart_csv(dir.path / "c.csv", pts);
  CHECK(io::read_text(dir.path / "c.csv") == "n,ymax,control_limit,alarmed\n1,0.5,2,0\n2,2.5,2,1\n");
}

TEST_CASE("power report files") {
  TempDir dir;
  PowerStudyReport rep;
  rep.deltas = {0.1, 0.2};
  rep.reps = 10;
  rep.seed = 5;
  rep.edp_per_method["warp-rank"].edp = {0.5, 1.0};
  rep.edp_per_method["warp-rank"].detections = {5, 10};
  rep.edp_per_method["warp-rank"].pre_change_alarms = {1, 0};
  rep.edp_per_method["warp-rank"].post_change_alarms = {4, 10};
  io::write_power_report(dir.path / "p.csv", rep);
  const auto text = io::read_text(dir.path / "p.csv");
  CHECK(text == "delta,warp-rank\n0.1,0.5\n0.2,1\n");
  const auto meta = io::json::parse(io::read_text(dir.path / "p.csv.json"));
  CHECK(meta.at("reps") == 10);
  CHECK(meta.at("seed") == 5);
}
