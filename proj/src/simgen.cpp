#include "warpchart/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "warpchart/error.hpp"

namespace warpchart {

void BetaSpec::validate() const {
  if (!(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b))) {
    throw Error(ErrorKind::InvalidParameter, "beta shape parameters must be positive and finite");
  }
}

double UniformRange::draw(Rng& rng) const { return std::uniform_real_distribution<double>(lo, hi)(rng); }

PdfOnGrid beta_pdf(const BetaSpec& spec, std::size_t grid_size) {
  spec.validate();
  const double log_beta = std::lgamma(spec.a) + std::lgamma(spec.b) - std::lgamma(spec.a + spec.b);
  auto log_term = [](double shape, double x) { return shape == 1.0 ? 0.0 : (shape - 1.0) * std::log(x); };
  PdfOnGrid f(grid_size);
  const std::size_t last = grid_size - 1;
  for (std::size_t i = 1; i < last; ++i) {
    const double x = grid_point(i, grid_size);
    f[i] = std::exp(log_term(spec.a, x) + log_term(spec.b, 1.0 - x) - log_beta);
  }
  // Endpoints: analytic limit where finite, otherwise the adjacent interior value.
  if (spec.a > 1.0) f[0] = 0.0;
  else if (spec.a == 1.0) f[0] = std::exp(-log_beta);
  else f[0] = f[1];
  if (spec.b > 1.0) f[last] = 0.0;
  else if (spec.b == 1.0) f[last] = std::exp(log_term(spec.a, 1.0) - log_beta);
  else f[last] = f[last - 1];
  if (spec.a == 1.0 && spec.b < 1.0) f[0] = std::exp(log_term(spec.b, 1.0) - log_beta);

  const double total = integrate(f.view());
  for (auto& v : f.values) v /= total;
  return f;
}

PdfOnGrid mix_pdfs(const PdfOnGrid& f, const PdfOnGrid& g, double w) {
  require_same_grid(f.size(), g.size(), "mix_pdfs");
  PdfOnGrid out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (1.0 - w) * f[i] + w * g[i];
  return out;
}

double beta_draw(const BetaSpec& spec, Rng& rng) {
  const double x = std::gamma_distribution<double>(spec.a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(spec.b, 1.0)(rng);
  return x / (x + y);
}

std::vector<double> beta_sample(const BetaSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "sample size must be positive");
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = beta_draw(spec, rng);
  return out;
}

namespace {

void standardize(std::vector<double>& v) {
  const double mean = sample_mean(v);
  const double sd = sample_stddev(v);
  for (auto& x : v) x = (x - mean) / sd;
}

}  // namespace

DsfSeries appendix1_series(std::uint64_t seed) {
  constexpr std::size_t kHalf = 25000;
  const BetaSpec base{5.0, 7.0};
  const BetaSpec bump{25.0, 9.0};
  Rng rng(seed);
  std::vector<double> x(kHalf);
  std::vector<double> y(kHalf);
  for (auto& v : x) v = beta_draw(base, rng);
  std::bernoulli_distribution pick_bump(0.3);
  for (auto& v : y) v = pick_bump(rng) ? beta_draw(bump, rng) : beta_draw(base, rng);
  standardize(x);
  standardize(y);
  DsfSeries series;
  series.values = std::move(x);
  series.values.insert(series.values.end(), y.begin(), y.end());
  return series;
}

void ScenarioSpec::validate() const {
  if (!(tau > 1 && tau < T)) throw Error(ErrorKind::InvalidParameter, "change point must satisfy 1 < tau < T");
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorKind::InvalidParameter, "delta must lie in (0, 1]");
}

ScenarioSpec scenario_spec(Scenario scenario, double delta, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.T = scenario == Scenario::I ? 130 : 200;
  spec.tau = 100;
  spec.delta = delta;
  spec.seed = seed;
  return spec;
}

PdfSequence simulate_scenario1(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  PdfSequence seq;
  seq.reserve(spec.T);
  for (std::size_t i = 1; i <= spec.T; ++i) {
    const double a = spec.a.draw(rng);
    const double b = spec.b.draw(rng);
    auto f = beta_pdf({a, b}, spec.grid_size);
    if (i > spec.tau) {
      const double c = spec.c.draw(rng);
      const double d = spec.d.draw(rng);
      f = mix_pdfs(f, beta_pdf({c, d}, spec.grid_size), spec.delta);
    }
    seq.push_back(std::move(f));
  }
  return seq;
}

PdfSequence simulate_scenario2_outliers(std::uint64_t seed, std::size_t grid_size) {
  const UniformRange a{10.0, 14.0}, b{14.0, 17.0};
  const UniformRange c{14.0, 18.0}, d{16.0, 20.0};
  const UniformRange u{12.0, 16.0}, v{22.0, 26.0};
  Rng rng(seed);
  PdfSequence seq;
  seq.reserve(kOutlierT);
  for (std::size_t i = 1; i <= kOutlierT; ++i) {
    if (i <= kOutlierTau) {
      const double ai = a.draw(rng);
      const double bi = b.draw(rng);
      seq.push_back(beta_pdf({ai, bi}, grid_size));
    } else {
      const double ci = c.draw(rng);
      const double di = d.draw(rng);
      seq.push_back(beta_pdf({ci, di}, grid_size));
    }
  }
  for (std::size_t i = kOutlierFirst; i <= kOutlierLast; ++i) {
    const double ui = u.draw(rng);
    const double vi = v.draw(rng);
    seq[i - 1] = beta_pdf({ui, vi}, grid_size);
  }
  return seq;
}

namespace {

struct RepOutcome {
  bool detected = false;
  bool pre_change = false;
};

RepOutcome run_one(const PdfSequence& seq, const MonitorConfig& cfg, std::size_t tau) {
  const auto mon = run_monitor(seq, cfg);
  const auto& v = mon.verdict();
  RepOutcome out;
  out.detected = v.combined_alarm;
  if (out.detected) {
    std::size_t first = SIZE_MAX;
    const std::size_t offset = cfg.n0 + (cfg.method == Method::DirectChart ? cfg.direct_tune : cfg.m);
    for (const auto* c : {&v.t2, &v.spe}) {
      if (c->alarmed) first = std::min(first, offset + c->n_at_alarm);
    }
    out.pre_change = first <= tau;
  }
  return out;
}

}  // namespace

PowerStudyReport power_study(const PowerStudyConfig& cfg) {
  if (cfg.reps < 1) throw Error(ErrorKind::InvalidParameter, "need at least one replication");
  if (cfg.methods.empty()) throw Error(ErrorKind::UnknownMethod, "no methods requested");
  PowerStudyReport report;
  report.scenario = cfg.scenario;
  report.deltas = cfg.deltas;
  report.reps = cfg.reps;
  report.seed = cfg.seed;
  report.monitor = cfg.monitor;

  for (Method method : cfg.methods) {
    auto& mp = report.edp_per_method[std::string(to_string(method))];
    mp.edp.assign(cfg.deltas.size(), 0.0);
    mp.detections.assign(cfg.deltas.size(), 0);
    mp.pre_change_alarms.assign(cfg.deltas.size(), 0);
    mp.post_change_alarms.assign(cfg.deltas.size(), 0);
  }

  for (std::size_t di = 0; di < cfg.deltas.size(); ++di) {
    std::vector<std::vector<RepOutcome>> outcomes(cfg.methods.size(), std::vector<RepOutcome>(cfg.reps));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t r = next++; r < cfg.reps; r = next++) {
        const auto spec = scenario_spec(cfg.scenario, cfg.deltas[di], derive_seed(cfg.seed, di * 1000003 + r));
        const auto seq = simulate_scenario1(spec);
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
          MonitorConfig mc = cfg.monitor;
          mc.method = cfg.methods[mi];
          outcomes[mi][r] = run_one(seq, mc, spec.tau);
        }
      }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, cfg.reps));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      auto& mp = report.edp_per_method[std::string(to_string(cfg.methods[mi]))];
      for (const auto& o : outcomes[mi]) {
        if (!o.detected) continue;
        ++mp.detections[di];
        if (o.pre_change) ++mp.pre_change_alarms[di];
        else ++mp.post_change_alarms[di];
      }
      mp.edp[di] = static_cast<double>(mp.detections[di]) / static_cast<double>(cfg.reps);
    }
  }
  return report;
}

}  // namespace warpchart
