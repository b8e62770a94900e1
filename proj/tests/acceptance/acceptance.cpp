// Acceptance checks. `acceptance --criterion N` runs one criterion and prints a
// single PASS/FAIL line; without arguments every criterion runs in turn.
// Every random stream below derives from base seed 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "warpchart/distsummary.hpp"
#include "warpchart/fpca.hpp"
#include "warpchart/io.hpp"
#include "warpchart/pipeline.hpp"
#include "warpchart/rankchart.hpp"
#include "warpchart/simgen.hpp"
#include "warpchart/warp.hpp"

using namespace warpchart;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr std::size_t G = kDefaultGridSize;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double table_h(double lambda) {
  const auto table = io::read_calibration_table(WARPCHART_DATA_DIR "/calibration_table.csv");
  const auto h = io::lookup_limit(table, 30, 4, lambda, 500.0);
  if (!h) throw std::runtime_error("no ARL-500 limit for lambda " + fmt(lambda));
  return *h;
}

MonitorConfig monitor_at(double lambda) {
  MonitorConfig cfg;
  cfg.set_chart(4, lambda, table_h(lambda));
  return cfg;
}

// The chart that alarms first decides the reported change point.
const ChartVerdict* first_alarm(const MonitorVerdict& v) {
  const ChartVerdict* best = nullptr;
  for (const auto* c : {&v.t2, &v.spe}) {
    if (c->alarmed && (!best || c->n_at_alarm < best->n_at_alarm)) best = c;
  }
  return best;
}

Outcome criterion1() {
  Rng rng(derive_seed(kSeed, 1));
  std::uniform_int_distribution<int> len(2, 12);
  std::uniform_int_distribution<int> level(0, 4);
  double worst = 0.0;
  std::size_t comparisons = 0;
  for (int s = 0; s < 1000; ++s) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    for (double& v : x) v = level(rng);
    for (std::size_t j = 1; j < x.size(); ++j) {
      worst = std::max(worst, std::abs(smw(x, j) - testsupport::pair_count_smw(x, j)));
      ++comparisons;
    }
  }
  return {worst <= 1e-10, "max |smw - pair count| = " + fmt(worst) + " over " + std::to_string(comparisons) + " splits"};
}

Outcome criterion2() {
  Rng rng(derive_seed(kSeed, 2));
  std::uniform_real_distribution<double> shape(2.0, 9.0);
  const auto xs = grid_points(G);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const double a = shape(rng);
    const double b = shape(rng);
    const auto warp = testsupport::SmoothWarp::random(rng);
    const auto g = beta_pdf({a, b});
    PdfOnGrid f(G);
    WarpOnGrid gamma(G);
    for (std::size_t i = 0; i < G; ++i) {
      gamma[i] = warp(xs[i]);
      f[i] = testsupport::beta_density(a, b, gamma[i]) * warp.derivative(xs[i]);
    }
    const auto est = extract_warping(cdf_of(g), cdf_of(f));
    for (std::size_t i = 0; i < G; ++i) worst = std::max(worst, std::abs(est[i] - gamma[i]));
  }
  return {worst <= 1e-2, "max sup |gamma_hat - gamma| = " + fmt(worst) + " over 200 pairs"};
}

Outcome criterion3() {
  Rng rng(derive_seed(kSeed, 3));
  const auto xs = grid_points(G);
  double int_err = 0.0;
  double norm_err = 0.0;
  double q_err = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const auto warp = testsupport::SmoothWarp::random(rng);
    WarpOnGrid gamma(G);
    for (std::size_t i = 0; i < G; ++i) gamma[i] = warp(xs[i]);
    const auto q = srsf_of(gamma);
    const auto v = tangent_map(q);
    int_err = std::max(int_err, std::abs(integrate(v.view())));
    norm_err = std::max(norm_err, std::abs(l2_norm(v.view()) - srsf_angle(q)));
    q_err = std::max(q_err, std::abs(l2_norm(q.view()) - 1.0));
  }
  const bool ok = int_err <= 1e-6 && norm_err <= 1e-6 && q_err <= 1e-6;
  return {ok, "max |int v| = " + fmt(int_err) + ", max | |v| - theta | = " + fmt(norm_err) + ", max | |q| - 1 | = " +
                  fmt(q_err)};
}

Outcome criterion4() {
  Rng rng(derive_seed(kSeed, 4));
  // Training tangents from in-control scenario-I densities.
  auto spec = scenario_spec(Scenario::I, 0.5, derive_seed(kSeed, 40));
  const auto seq = simulate_scenario1(spec);
  const MonitorConfig cfg;
  const auto model = train(std::span(seq).first(cfg.n0), cfg);

  double ortho = 0.0;
  const auto& phi = model.eigenfunctions;
  for (std::size_t a = 0; a < phi.size(); ++a) {
    for (std::size_t b = a; b < phi.size(); ++b) {
      ortho = std::max(ortho, std::abs(inner(phi[a].view(), phi[b].view()) - (a == b ? 1.0 : 0.0)));
    }
  }

  // Parseval on tangents of fresh in- and out-of-control densities.
  double parseval = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto& f = seq[cfg.n0 + static_cast<std::size_t>(rep)];
    const auto v = pdf_to_tangent(f, model.reference_cdf, cfg.alpha_mix);
    double sum = 0.0;
    for (double x : scores(model, v.view())) sum += x * x;
    std::vector<double> r(G);
    for (std::size_t i = 0; i < G; ++i) r[i] = v[i] - model.mean_fn[i];
    parseval = std::max(parseval, std::abs(sum + spe_statistic(model, v.view()) - inner(r, r)));
  }

  // Planted two-dimensional subspace.
  std::vector<double> b1(G);
  std::vector<double> b2(G);
  const auto xs = grid_points(G);
  for (std::size_t i = 0; i < G; ++i) {
    b1[i] = std::sqrt(2.0) * std::cos(std::numbers::pi * xs[i]);
    b2[i] = std::sqrt(2.0) * std::cos(2.0 * std::numbers::pi * xs[i]);
  }
  for (auto* b : {&b1, &b2}) {
    const double nrm = l2_norm(*b);
    for (double& y : *b) y /= nrm;
  }
  const double c12 = inner(b1, b2);
  for (std::size_t i = 0; i < G; ++i) b2[i] -= c12 * b1[i];
  const double n2 = l2_norm(b2);
  for (double& y : b2) y /= n2;
  std::normal_distribution<double> nd;
  std::vector<TangentVec> planted;
  for (int r = 0; r < 40; ++r) {
    TangentVec v(G);
    const double s1 = 3.0 * nd(rng);
    const double s2 = nd(rng);
    for (std::size_t i = 0; i < G; ++i) v[i] = 0.1 + s1 * b1[i] + s2 * b2[i];
    planted.push_back(std::move(v));
  }
  const auto planted_model = fit_fpca(std::span<const TangentVec>(planted), 0.99);

  const bool ok = ortho <= 1e-6 && parseval <= 1e-6 && planted_model.retained == 2;
  return {ok, "orthonormality error " + fmt(ortho) + ", Parseval error " + fmt(parseval) + ", planted L = " +
                  std::to_string(planted_model.retained)};
}

Outcome criterion5() {
  Rng rng(derive_seed(kSeed, 5));
  const RankChartConfig cfg{30, 4, 0.05, table_h(0.05), 500.0};
  std::normal_distribution<double> nd;
  std::size_t identical = 0;
  std::size_t alarmed = 0;
  for (int s = 0; s < 50; ++s) {
    std::vector<double> x(150);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = nd(rng) + (i >= 90 ? 1.5 : 0.0);
    ChartState plain(cfg, 30);
    ChartState mapped(cfg, 30);
    for (double v : x) {
      plain.push(v);
      mapped.push(std::exp(v) + v * v * v);
    }
    bool same = plain.ymax_history().size() == mapped.ymax_history().size();
    for (std::size_t i = 0; same && i < plain.ymax_history().size(); ++i) {
      same = plain.ymax_history()[i].n == mapped.ymax_history()[i].n &&
             plain.ymax_history()[i].ymax == mapped.ymax_history()[i].ymax;
    }
    same = same && plain.alarm().has_value() == mapped.alarm().has_value();
    if (same && plain.alarm()) {
      ++alarmed;
      same = plain.alarm()->n_at_alarm == mapped.alarm()->n_at_alarm &&
             plain.alarm()->change_point_local == mapped.alarm()->change_point_local;
    }
    if (same) ++identical;
  }
  return {identical == 50, std::to_string(identical) + "/50 streams bit-identical (" + std::to_string(alarmed) +
                               " with alarms)"};
}

Outcome criterion6() {
  CalibrationOptions opts;
  opts.ic_arl = 50.0;
  opts.reps = 2000;
  opts.seed = derive_seed(kSeed, 6);
  const auto cal = calibrate_limit(opts);
  const RankChartConfig cfg{opts.m, opts.m0, opts.lambda, cal.h, opts.ic_arl};
  const double arl = simulate_arl(cfg, 2000, derive_seed(kSeed, 60), 1000);
  return {arl >= 45.0 && arl <= 55.0,
          "h = " + fmt(cal.h, 7) + " (calibration ARL " + fmt(cal.arl) + "), validation ARL " + fmt(arl)};
}

std::string edp_list(const PowerStudyReport& r, const std::string& method) {
  std::ostringstream os;
  const auto& mp = r.edp_per_method.at(method);
  for (std::size_t i = 0; i < r.deltas.size(); ++i) {
    os << (i ? ", " : "") << "d=" << fmt(r.deltas[i], 3) << ": " << fmt(mp.edp[i], 3);
  }
  return os.str();
}

Outcome criterion7() {
  PowerStudyConfig p;
  p.scenario = Scenario::I;
  p.deltas = {0.05, 0.10, 0.20, 0.25};
  p.reps = 100;
  p.methods = {Method::WarpRank, Method::PdfFpcaCc};
  p.seed = derive_seed(kSeed, 7);
  p.monitor = monitor_at(0.05);
  const auto r = power_study(p);
  const auto& wr = r.edp_per_method.at("warp-rank").edp;
  const auto& cc = r.edp_per_method.at("pdf-fpca-cc").edp;
  const bool ok = wr[3] >= 0.95 && std::abs(wr[1] - 0.60) <= 0.15 + 1e-12 && wr[0] <= 0.25 && wr[2] - cc[2] >= 0.3 - 1e-12;
  return {ok, "warp-rank {" + edp_list(r, "warp-rank") + "}; pdf-fpca-cc {" + edp_list(r, "pdf-fpca-cc") + "}"};
}

Outcome criterion8() {
  PowerStudyConfig p;
  p.scenario = Scenario::II;
  p.deltas = {0.07, 0.10};
  p.reps = 100;
  p.methods = {Method::WarpRank};
  p.seed = derive_seed(kSeed, 8);
  p.monitor = monitor_at(0.05);
  const auto r = power_study(p);
  const auto& wr = r.edp_per_method.at("warp-rank").edp;
  const bool ok = std::abs(wr[0] - 0.83) <= 0.12 + 1e-12 && wr[1] >= 0.90;
  return {ok, "warp-rank {" + edp_list(r, "warp-rank") + "}"};
}

Outcome criterion9() {
  const std::size_t reps = 50;
  struct Tally {
    std::size_t pre = 0;
    std::size_t post = 0;
    std::size_t post_near = 0;
  };
  auto run = [&](double lambda) {
    const auto cfg = monitor_at(lambda);
    // Future index of the density at tau.
    const std::size_t n_tau = kOutlierTau - cfg.n0 - cfg.m;
    Tally t;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto seq = simulate_scenario2_outliers(derive_seed(derive_seed(kSeed, 9), r));
      const auto mon = run_monitor(seq, cfg);
      const auto* first = first_alarm(mon.verdict());
      if (!first) continue;
      if (first->n_at_alarm < n_tau) {
        ++t.pre;
      } else {
        ++t.post;
        const long cp = static_cast<long>(first->change_point_global);
        if (std::abs(cp - static_cast<long>(kOutlierTau)) <= 5) ++t.post_near;
      }
    }
    return t;
  };
  const auto low = run(0.05);
  const auto high = run(0.5);
  const double pre_low = static_cast<double>(low.pre) / reps;
  const double pre_high = static_cast<double>(high.pre) / reps;
  const double near = low.post ? static_cast<double>(low.post_near) / static_cast<double>(low.post) : 0.0;
  const bool ok = pre_low <= 0.10 && near >= 0.80 && pre_high > pre_low;
  return {ok, "lambda 0.05: pre-tau alarm fraction " + fmt(pre_low, 3) + ", change point within 5 of tau in " +
                  std::to_string(low.post_near) + "/" + std::to_string(low.post) + " post-tau alarms; lambda 0.5: " +
                  "pre-tau fraction " + fmt(pre_high, 3)};
}

Outcome criterion10() {
  const std::size_t reps = 20;
  const auto cfg = monitor_at(0.05);
  std::size_t clean_x = 0;
  std::size_t clean_s = 0;
  std::size_t alarms = 0;
  std::size_t near = 0;
  std::string cps;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto groups = partition_equal(appendix1_series(derive_seed(derive_seed(kSeed, 10), r)), 250);
    const auto shewhart = xbar_s_baseline(groups, groups.size());
    if (shewhart.xbar.flagged.empty()) ++clean_x;
    if (shewhart.s.flagged.empty()) ++clean_s;
    const auto mon = run_monitor(summarize(groups, SummaryOptions{}).pdfs, cfg);
    const auto* first = first_alarm(mon.verdict());
    if (!first) {
      cps += " -";
      continue;
    }
    ++alarms;
    const long cp = static_cast<long>(first->change_point_global);
    cps += " " + std::to_string(cp);
    if (std::abs(cp - 100) <= 5) ++near;
  }
  const bool ok = clean_x * 10 >= reps * 7 && clean_s * 10 >= reps * 7 && alarms == reps && near == reps;
  return {ok, "X-bar clean " + std::to_string(clean_x) + "/20, S clean " + std::to_string(clean_s) +
                  "/20, warp-rank alarms " + std::to_string(alarms) + "/20, change point within 5 of 100 in " +
                  std::to_string(near) + "/20 (change points:" + cps + ")"};
}

Outcome criterion11() {
  const auto truth = beta_pdf({5.0, 7.0});
  double worst = 0.0;
  std::string each;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto x = beta_sample({5.0, 7.0}, 10000, derive_seed(derive_seed(kSeed, 11), s));
    const auto f = kde_unit(x);
    std::vector<double> d(G);
    for (std::size_t i = 0; i < G; ++i) d[i] = std::abs(f[i] - truth[i]);
    const double l1 = integrate(d);
    worst = std::max(worst, l1);
    each += (s ? ", " : "") + fmt(l1, 3);
  }
  return {worst <= 0.05, "L1 distances " + each};
}

// Hard runtime ceilings in seconds; 0 means the limit is only indicative.
struct Criterion {
  std::function<Outcome()> run;
  double limit;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {criterion1, 5.0},  {criterion2, 30.0}, {criterion3, 10.0}, {criterion4, 10.0},
      {criterion5, 10.0}, {criterion6, 180.0}, {criterion7, 0.0}, {criterion8, 0.0},
      {criterion9, 0.0},  {criterion10, 0.0}, {criterion11, 10.0},
  };
  std::vector<std::size_t> chosen;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--criterion" && i + 1 < argc) {
      const long n = std::strtol(argv[++i], nullptr, 10);
      if (n < 1 || n > static_cast<long>(all.size())) {
        std::fprintf(stderr, "criterion must be 1..%zu\n", all.size());
        return 1;
      }
      chosen.push_back(static_cast<std::size_t>(n));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
      return 1;
    }
  }
  if (chosen.empty()) {
    for (std::size_t n = 1; n <= all.size(); ++n) chosen.push_back(n);
  }

  int failures = 0;
  for (std::size_t n : chosen) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = all[n - 1].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double limit = all[n - 1].limit;
    if (limit > 0.0 && secs >= limit) {
      out.pass = false;
      out.detail += "; runtime over " + fmt(limit) + " s";
    }
    std::printf("criterion %zu: %s (%s; %.1f s)\n", n, out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
