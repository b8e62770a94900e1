#include "warpchart/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "warpchart/distsummary.hpp"
#include "warpchart/error.hpp"
#include "warpchart/warp.hpp"

namespace warpchart {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::WarpRank: return "warp-rank";
    case Method::PdfFpcaCc: return "pdf-fpca-cc";
    case Method::DirectChart: return "direct-chart";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "warp-rank") return Method::WarpRank;
  if (s == "pdf-fpca-cc") return Method::PdfFpcaCc;
  if (s == "direct-chart" || s == "direct") return Method::DirectChart;
  throw Error(ErrorKind::UnknownMethod, "unknown method '" + std::string(name) + "'");
}

void MonitorConfig::set_chart(std::size_t m0, double lambda, double h, double ic_arl) {
  chart_t2 = RankChartConfig{m, m0, lambda, h, ic_arl};
  chart_spe = chart_t2;
}

void MonitorConfig::validate() const {
  if (n0 < 5) throw Error(ErrorKind::InvalidParameter, "n0 must be at least 5");
  if (!(alpha_mix >= 0.0 && alpha_mix < 1.0)) throw Error(ErrorKind::InvalidParameter, "alpha_mix must lie in [0, 1)");
  if (grid_size < 3) throw Error(ErrorKind::InvalidParameter, "grid size must be at least 3");
  if (!(var_frac > 0.0 && var_frac <= 1.0)) throw Error(ErrorKind::InvalidParameter, "var_frac must lie in (0, 1]");
  for (const auto* chart : {&chart_t2, &chart_spe}) {
    RankChartConfig c = *chart;
    c.m = m;
    c.validate();
  }
  if (method == Method::DirectChart) {
    if (direct_tune < 10) throw Error(ErrorKind::InsufficientTuning, "direct chart needs at least 10 tuning points");
    if (!(alpha_direct > 0.0 && alpha_direct < 1.0)) {
      throw Error(ErrorKind::InvalidParameter, "alpha_direct must lie in (0, 1)");
    }
  }
}

FpcModel train(std::span<const PdfOnGrid> training_pdfs, const MonitorConfig& cfg, StageCounters* counters) {
  if (training_pdfs.size() != cfg.n0) {
    throw Error(ErrorKind::InsufficientData,
                "expected " + std::to_string(cfg.n0) + " training densities, got " + std::to_string(training_pdfs.size()));
  }
  for (const auto& f : training_pdfs) require_same_grid(f.size(), cfg.grid_size, "train");

  PdfSequence mixed;
  mixed.reserve(training_pdfs.size());
  for (const auto& f : training_pdfs) mixed.push_back(mix_with_uniform(f, cfg.alpha_mix));

  if (counters) ++counters->fpca_fits;
  if (cfg.method == Method::PdfFpcaCc) return fit_fpca(std::span<const PdfOnGrid>(mixed), cfg.var_frac);

  const auto ref = reference_cdf(mixed);
  std::vector<TangentVec> tangents;
  tangents.reserve(training_pdfs.size());
  for (const auto& f : training_pdfs) {
    tangents.push_back(pdf_to_tangent(f, ref, cfg.alpha_mix));
    if (counters) ++counters->warpings;
  }
  auto model = fit_fpca(std::span<const TangentVec>(tangents), cfg.var_frac);
  model.reference_cdf = ref;
  return model;
}

Monitor::Monitor(MonitorConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.chart_t2.m = cfg_.m;
  cfg_.chart_spe.m = cfg_.m;
  cfg_.validate();
  direct_t2_.n_tune = direct_spe_.n_tune = cfg_.direct_tune;
  direct_t2_.alpha = direct_spe_.alpha = cfg_.alpha_direct;
}

const FpcModel& Monitor::model() const {
  if (!model_) throw Error(ErrorKind::InsufficientData, "monitor has not been trained");
  return *model_;
}

void Monitor::train(std::span<const PdfOnGrid> training_pdfs) {
  model_ = warpchart::train(training_pdfs, cfg_, &counters_);
  chart_t2_.emplace(cfg_.chart_t2, cfg_.n0);
  chart_spe_.emplace(cfg_.chart_spe, cfg_.n0);
}

void Monitor::set_diagnostics(std::size_t clamp_count, std::size_t degenerate_subgroups) {
  verdict_.clamp_count = clamp_count;
  verdict_.degenerate_subgroup_count = degenerate_subgroups;
}

ChartPoint Monitor::step_rank(ChartState& chart, ChartVerdict& verdict, double feature) {
  ChartPoint p;
  p.feature = feature;
  p.control_limit = chart.config().control_limit;
  if (const auto r = chart.push(feature)) {
    p.n = r->n;
    p.ymax = r->ymax;
  }
  if (!verdict.alarmed && chart.alarm()) {
    verdict.alarmed = true;
    verdict.n_at_alarm = chart.alarm()->n_at_alarm;
    verdict.change_point_global = chart.alarm()->change_point_global;
    verdict.ymax = chart.alarm()->ymax;
  }
  p.alarmed = verdict.alarmed;
  return p;
}

ChartPoint Monitor::step_direct(DirectChartState& chart, ChartVerdict& verdict, double feature) {
  ChartPoint p;
  p.feature = feature;
  if (chart.tuning.size() < chart.n_tune) {
    chart.tuning.push_back(feature);
    if (chart.tuning.size() == chart.n_tune) chart.ucl = sample_quantile(chart.tuning, 1.0 - chart.alpha);
  } else {
    ++chart.n_future;
    p.n = chart.n_future;
    p.ymax = feature;
    if (feature > *chart.ucl && !verdict.alarmed) {
      chart.first_flag = chart.n_future;
      verdict.alarmed = true;
      verdict.n_at_alarm = chart.n_future;
      verdict.change_point_global = cfg_.n0 + chart.n_tune + chart.n_future;
      verdict.ymax = feature;
    }
  }
  p.control_limit = chart.ucl.value_or(0.0);
  p.alarmed = verdict.alarmed;
  return p;
}

void Monitor::feed(const FeaturePair& fp, IngestResult& out) {
  features_.push_back(fp);
  ++counters_.ingests;
  out.k = fp.index;
  out.feature = fp;
  if (cfg_.method == Method::DirectChart) {
    out.t2 = step_direct(direct_t2_, verdict_.t2, fp.t2);
    out.spe = step_direct(direct_spe_, verdict_.spe, fp.spe);
  } else {
    out.t2 = step_rank(*chart_t2_, verdict_.t2, fp.t2);
    out.spe = step_rank(*chart_spe_, verdict_.spe, fp.spe);
  }
  verdict_.combined_alarm = verdict_.t2.alarmed || verdict_.spe.alarmed;
  out.verdict = verdict_;
}

IngestResult Monitor::ingest(const PdfOnGrid& f) {
  const auto& model = this->model();
  require_same_grid(f.size(), cfg_.grid_size, "ingest");
  FeaturePair fp;
  const std::size_t k = features_.size() + 1;
  if (cfg_.method == Method::PdfFpcaCc) {
    fp = warpchart::features(model, mix_with_uniform(f, cfg_.alpha_mix).view(), k);
  } else {
    fp = warpchart::features(model, pdf_to_tangent(f, model.reference_cdf, cfg_.alpha_mix).view(), k);
    ++counters_.warpings;
  }
  IngestResult out;
  feed(fp, out);
  return out;
}

Monitor Monitor::restore(MonitorConfig cfg, FpcModel model, std::span<const FeaturePair> features) {
  Monitor mon(std::move(cfg));
  mon.model_ = std::move(model);
  mon.chart_t2_.emplace(mon.cfg_.chart_t2, mon.cfg_.n0);
  mon.chart_spe_.emplace(mon.cfg_.chart_spe, mon.cfg_.n0);
  for (const auto& fp : features) {
    IngestResult ignored;
    mon.feed(fp, ignored);
  }
  mon.counters_.ingests = features.size();
  return mon;
}

Monitor run_monitor(std::span<const PdfOnGrid> pdfs, const MonitorConfig& cfg) {
  if (pdfs.size() < cfg.n0) throw Error(ErrorKind::InsufficientData, "fewer densities than n0");
  Monitor mon(cfg);
  mon.train(pdfs.first(cfg.n0));
  for (const auto& f : pdfs.subspan(cfg.n0)) mon.ingest(f);
  return mon;
}

double c4_constant(std::size_t m) {
  if (m < 2) throw Error(ErrorKind::InvalidParameter, "subgroup size must be at least 2");
  const double md = static_cast<double>(m);
  return std::sqrt(2.0 / (md - 1.0)) * std::exp(std::lgamma(md / 2.0) - std::lgamma((md - 1.0) / 2.0));
}

namespace {

void flag_outside(ShewhartChart& chart) {
  const double eps = 1e-12 * (1.0 + std::abs(chart.center));
  for (std::size_t i = 0; i < chart.points.size(); ++i) {
    if (chart.points[i] > chart.ucl + eps || chart.points[i] < chart.lcl - eps) chart.flagged.push_back(i + 1);
  }
}

}  // namespace

XbarSResult xbar_s_baseline(std::span<const Subgroup> subgroups, std::size_t n_calibration) {
  if (subgroups.empty()) throw Error(ErrorKind::InsufficientData, "no subgroups");
  const std::size_t m = subgroups.front().values.size();
  if (m < 2) throw Error(ErrorKind::InvalidParameter, "subgroup size must be at least 2");
  if (n_calibration < 1 || n_calibration > subgroups.size()) {
    throw Error(ErrorKind::InsufficientData, "not enough subgroups for calibration");
  }
  XbarSResult res;
  for (const auto& g : subgroups) {
    if (g.values.size() != m) throw Error(ErrorKind::InvalidParameter, "subgroups must share one size");
    res.xbar.points.push_back(sample_mean(g.values));
    res.s.points.push_back(sample_stddev(g.values));
  }
  const double n_cal = static_cast<double>(n_calibration);
  double xbarbar = 0.0;
  double sbar = 0.0;
  for (std::size_t j = 0; j < n_calibration; ++j) {
    xbarbar += res.xbar.points[j];
    sbar += res.s.points[j];
  }
  xbarbar /= n_cal;
  sbar /= n_cal;
  const double c4 = c4_constant(m);
  const double sigma = sbar / c4;

  res.xbar.center = xbarbar;
  res.xbar.ucl = xbarbar + 3.0 * sigma / std::sqrt(static_cast<double>(m));
  res.xbar.lcl = xbarbar - 3.0 * sigma / std::sqrt(static_cast<double>(m));
  res.s.center = sbar;
  res.s.ucl = sbar + 3.0 * sigma * std::sqrt(1.0 - c4 * c4);
  res.s.lcl = std::max(0.0, sbar - 3.0 * sigma * std::sqrt(1.0 - c4 * c4));
  flag_outside(res.xbar);
  flag_outside(res.s);
  return res;
}

DirectChartResult direct_chart_baseline(std::span<const double> features, std::size_t n_tune, double alpha) {
  if (n_tune < 10) throw Error(ErrorKind::InsufficientTuning, "direct chart needs at least 10 tuning points");
  if (features.size() <= n_tune) throw Error(ErrorKind::InsufficientData, "no features after the tuning window");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0, 1)");
  DirectChartResult res;
  res.ucl = sample_quantile(features.first(n_tune), 1.0 - alpha);
  for (std::size_t i = n_tune; i < features.size(); ++i) {
    const bool flag = features[i] > res.ucl;
    res.flags.push_back(flag);
    if (flag) res.flagged.push_back(i + 1);
  }
  return res;
}

}  // namespace warpchart
