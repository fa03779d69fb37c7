#include "lhv/runner.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "lhv/errors.hpp"

#ifndef LHV_VERSION
#define LHV_VERSION "0.0.0"
#endif

namespace lhv {

namespace {

constexpr std::uint64_t kChunk = 16384;  // trials per work item

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Run body(0..n_tasks) on up to `workers` threads. Task order is free; every
// reduction below writes into a task-indexed slot and merges in index order,
// which keeps results independent of scheduling.
void parallel_for(std::size_t n_tasks, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t nw = std::min(workers, n_tasks);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t chunk_count(std::uint64_t trials) {
  return (trials + kChunk - 1) / kChunk;
}

bool on_boundary(double theta) {
  const double t = reduce_phase(theta);
  return t == 0.0 || t == std::numbers::pi;
}

CurvePoint to_point(double theta, std::uint64_t k, std::uint64_t n) {
  if (n == 0) throw EstimatorUndefined("curve point with no event-ready trials");
  CurvePoint p;
  p.theta = theta;
  p.n = n;
  p.rate = double(k) / double(n);
  p.se = std::sqrt(std::max(0.0, p.rate * (1.0 - p.rate)) / double(n));
  return p;
}

std::array<std::pair<double, double>, 4> setting_pairs(const ChshSettings& s) {
  return {{{s.a, s.b}, {s.a, s.b_prime}, {s.a_prime, s.b}, {s.a_prime, s.b_prime}}};
}

std::array<CoincidenceCounts, 4> accumulate_chsh_counts(const RunConfig& cfg,
                                                        const RandomStream& block_stream,
                                                        std::size_t workers) {
  const auto pairs = setting_pairs(cfg.settings);
  const std::uint64_t nc = chunk_count(cfg.trials);
  std::vector<CoincidenceCounts> partial(4 * nc);
  parallel_for(partial.size(), workers, [&](std::size_t task) {
    const std::size_t pair = task / nc;
    const std::uint64_t t0 = (task % nc) * kChunk;
    const std::uint64_t t1 = std::min<std::uint64_t>(cfg.trials, t0 + kChunk);
    const ArmSettings sa =
        with_nominal_setting(cfg.arm_a, pairs[pair].first, cfg.source.omega_mean);
    const ArmSettings sb =
        with_nominal_setting(cfg.arm_b, pairs[pair].second, cfg.source.omega_mean);
    partial[task] = accumulate_coincidences(cfg.source, sa, sb, t0, t1,
                                            block_stream.derive(pair), true);
  });
  std::array<CoincidenceCounts, 4> counts{};
  for (std::size_t task = 0; task < partial.size(); ++task)
    counts[task / nc] += partial[task];
  return counts;
}

}  // namespace

RandomStream experiment_stream(std::uint64_t seed, Experiment e) {
  return RandomStream(seed).derive(experiment_stream_id(e));
}

ChshRun run_bell_test(const RunConfig& cfg) {
  ChshRun run;
  run.settings = cfg.settings;
  run.counts = accumulate_chsh_counts(
      cfg, experiment_stream(cfg.seed, Experiment::bell_test), cfg.workers);
  return run;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  if (!cfg.sweep)
    throw ConfigError("loophole-sweep: no sweep block configured");
  const SweepSpec& sw = *cfg.sweep;
  const RandomStream exp = experiment_stream(cfg.seed, Experiment::loophole_sweep);

  std::vector<RunConfig> points(sw.steps, cfg);
  std::vector<double> values(sw.steps);
  for (std::size_t i = 0; i < sw.steps; ++i) {
    values[i] = sw.steps == 1
                    ? sw.start
                    : sw.start + (sw.stop - sw.start) * double(i) / double(sw.steps - 1);
    apply_sweep_value(points[i], sw.parameter, values[i]);
    points[i].source.validate();
    points[i].arm_a.validate();
    points[i].arm_b.validate();
  }

  std::vector<std::array<CoincidenceCounts, 4>> counts(sw.steps);
  const std::uint64_t nc = chunk_count(cfg.trials);
  std::vector<CoincidenceCounts> partial(sw.steps * 4 * nc);
  parallel_for(partial.size(), cfg.workers, [&](std::size_t task) {
    const std::size_t point = task / (4 * nc);
    const std::size_t pair = (task / nc) % 4;
    const std::uint64_t t0 = (task % nc) * kChunk;
    const std::uint64_t t1 = std::min<std::uint64_t>(cfg.trials, t0 + kChunk);
    const RunConfig& pt = points[point];
    const auto pairs = setting_pairs(pt.settings);
    const ArmSettings sa =
        with_nominal_setting(pt.arm_a, pairs[pair].first, pt.source.omega_mean);
    const ArmSettings sb =
        with_nominal_setting(pt.arm_b, pairs[pair].second, pt.source.omega_mean);
    partial[task] = accumulate_coincidences(pt.source, sa, sb, t0, t1,
                                            exp.derive(point).derive(pair), true);
  });
  for (std::size_t task = 0; task < partial.size(); ++task)
    counts[task / (4 * nc)][(task / nc) % 4] += partial[task];

  std::vector<SweepRow> rows(sw.steps);
  for (std::size_t i = 0; i < sw.steps; ++i) {
    SweepRow& row = rows[i];
    row.value = values[i];
    std::uint64_t ready = 0, observed = 0;
    bool all_ready = true, all_observed = true;
    for (const CoincidenceCounts& c : counts[i]) {
      ready += c.n_ab;
      observed += c.observed();
      all_ready = all_ready && c.n_ab > 0;
      all_observed = all_observed && c.observed() > 0;
    }
    row.kept_fraction = ready > 0 ? double(observed) / double(ready) : kNaN;
    ChshRun r;
    r.settings = cfg.settings;
    r.counts = counts[i];
    if (all_observed) {
      row.s_conventional = r.s_conventional();
      row.sigma_s_conventional = r.sigma_s_conventional();
    } else {
      row.s_conventional = kNaN;
      row.sigma_s_conventional = kNaN;
    }
    if (all_ready) {
      row.s_fair = r.s_fair();
      row.sigma_s_fair = r.sigma_s_fair();
    } else {
      row.s_fair = kNaN;
      row.sigma_s_fair = kNaN;
    }
  }
  return rows;
}

Histogram run_histogram(const RunConfig& cfg) {
  if (cfg.trials < 10000)
    throw std::invalid_argument("histogram: trials must be >= 10^4");
  if (cfg.histogram_bins < 20)
    throw std::invalid_argument("histogram: bins must be >= 20");
  const RandomStream exp = experiment_stream(cfg.seed, Experiment::histogram);
  const double half = expected_x_max(cfg.source, cfg.arm_a) +
                      5.0 * cfg.arm_a.noise_sigma * std::numbers::sqrt2;
  const std::uint64_t nc = chunk_count(cfg.trials);
  std::vector<Histogram> partial(nc, make_histogram(-half, half, cfg.histogram_bins));
  parallel_for(nc, cfg.workers, [&](std::size_t c) {
    const std::uint64_t t0 = c * kChunk;
    const std::uint64_t t1 = std::min<std::uint64_t>(cfg.trials, t0 + kChunk);
    accumulate_histogram(cfg.source, cfg.arm_a, t0, t1, exp, partial[c]);
  });
  Histogram out = make_histogram(-half, half, cfg.histogram_bins);
  for (const Histogram& h : partial) out += h;
  return out;
}

CoincidenceCurves run_curve(const RunConfig& cfg) {
  if (on_boundary(cfg.curve_theta_a))
    throw std::invalid_argument("curve: theta_a must avoid multiples of pi");
  const std::vector<double> grid = default_theta_grid(cfg.curve_points);
  const RandomStream exp = experiment_stream(cfg.seed, Experiment::curve);
  const ArmSettings sa =
      with_nominal_setting(cfg.arm_a, cfg.curve_theta_a, cfg.source.omega_mean);

  const std::uint64_t nc = chunk_count(cfg.trials);
  std::vector<CoincidenceCounts> partial(grid.size() * nc);
  parallel_for(partial.size(), cfg.workers, [&](std::size_t task) {
    const std::size_t point = task / nc;
    const std::uint64_t t0 = (task % nc) * kChunk;
    const std::uint64_t t1 = std::min<std::uint64_t>(cfg.trials, t0 + kChunk);
    const ArmSettings sb =
        with_nominal_setting(cfg.arm_b, grid[point], cfg.source.omega_mean);
    partial[task] = accumulate_coincidences(cfg.source, sa, sb, t0, t1,
                                            exp.derive(point), false);
  });

  CoincidenceCurves curves;
  curves.theta_a = cfg.curve_theta_a;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    CoincidenceCounts c;
    for (std::uint64_t k = 0; k < nc; ++k) c += partial[p * nc + k];
    curves.pp.push_back(to_point(grid[p], c.n_pp, c.n_ab));
    curves.pm.push_back(to_point(grid[p], c.n_pm, c.n_ab));
    curves.mp.push_back(to_point(grid[p], c.n_mp, c.n_ab));
    curves.mm.push_back(to_point(grid[p], c.n_mm, c.n_ab));
  }
  return curves;
}

std::vector<std::pair<double, double>> run_scatter(const RunConfig& cfg) {
  if (cfg.trials < 1000)
    throw std::invalid_argument("scatter: trials must be >= 10^3");
  const RandomStream exp = experiment_stream(cfg.seed, Experiment::scatter);
  std::vector<std::pair<double, double>> out(cfg.trials);
  const std::uint64_t nc = chunk_count(cfg.trials);
  parallel_for(nc, cfg.workers, [&](std::size_t c) {
    const std::uint64_t t0 = c * kChunk;
    const std::uint64_t t1 = std::min<std::uint64_t>(cfg.trials, t0 + kChunk);
    accumulate_scatter(cfg.source, cfg.arm_a, t0, t1, cfg.trials, cfg.scatter_mode,
                       exp, out);
  });
  return out;
}

std::vector<CurvePoint> run_singles(const RunConfig& cfg) {
  const std::vector<double> grid = default_theta_grid(cfg.singles_points);
  const RandomStream exp = experiment_stream(cfg.seed, Experiment::singles);
  const std::uint64_t nc = chunk_count(cfg.trials);
  std::vector<std::uint64_t> partial(grid.size() * nc, 0);
  parallel_for(partial.size(), cfg.workers, [&](std::size_t task) {
    const std::size_t point = task / nc;
    const std::uint64_t t0 = (task % nc) * kChunk;
    const std::uint64_t t1 = std::min<std::uint64_t>(cfg.trials, t0 + kChunk);
    const RandomStream unit = exp.derive(point);
    std::uint64_t plus = 0;
    for (std::uint64_t t = t0; t < t1; ++t)
      if (single_arm_trial(cfg.source, cfg.arm_a, t, unit, grid[point]).sign > 0)
        ++plus;
    partial[task] = plus;
  });
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::uint64_t plus = 0;
    for (std::uint64_t k = 0; k < nc; ++k) plus += partial[p * nc + k];
    out.push_back(to_point(grid[p], plus, cfg.trials));
  }
  return out;
}

TomographyResult run_tomography(const RunConfig& cfg) {
  const RandomStream exp = experiment_stream(cfg.seed, Experiment::tomography);
  const RandomStream data = exp.derive(0);
  const std::uint64_t n = cfg.trials;

  std::vector<QuadratureSample> samples(n);
  const std::uint64_t nc = chunk_count(n);
  parallel_for(nc, cfg.workers, [&](std::size_t c) {
    const std::uint64_t t0 = c * kChunk;
    const std::uint64_t t1 = std::min<std::uint64_t>(n, t0 + kChunk);
    for (std::uint64_t t = t0; t < t1; ++t) {
      const SingleArmTrial s = single_arm_trial(cfg.source, cfg.arm_a, t, data, kNaN);
      samples[t] = fold_sample(s.theta_applied, s.x / cfg.normalization);
    }
  });

  TomographyResult res;
  res.n_samples = n;
  res.grid = radon_reconstruct(samples, cfg.grid, cfg.filter_cutoff);
  res.minimum = min_density(res.grid);
  // Calibration model matched to the data's peak conditional marginal
  // density, the scale that sets the estimator's worst bin noise.
  const double peak = res.grid.peak_marginal_density;
  res.calibration_sigma =
      peak > 0.0 ? 1.0 / (std::sqrt(2.0 * std::numbers::pi) * peak) : 1.0;
  const std::uint64_t n_cal =
      cfg.calibration_samples > 0 ? cfg.calibration_samples : n;
  res.negativity_epsilon = calibrate_negativity_epsilon(
      n_cal, res.calibration_sigma, cfg.grid, cfg.filter_cutoff, exp.derive(1));
  return res;
}

// --- output writers ---

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

void finish_out(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("write to '" + path + "' failed");
}

void write_bell_csv(const RunConfig& cfg, const ChshRun& run) {
  std::ofstream f = open_out(cfg.out_path);
  f << "setting_pair,n_pp,n_pm,n_mp,n_mm,n_ab,e_fair,e_conventional,"
       "s_fair,s_conventional,sigma_s\n";
  static const char* names[4] = {"ab", "ab_prime", "a_prime_b", "a_prime_b_prime"};
  CoincidenceCounts total;
  for (std::size_t i = 0; i < 4; ++i) {
    const CoincidenceCounts& c = run.counts[i];
    total += c;
    f << names[i] << ',' << c.n_pp << ',' << c.n_pm << ',' << c.n_mp << ','
      << c.n_mm << ',' << c.n_ab << ',' << g17(correlation_fair(c)) << ','
      << g17(correlation_conventional(c)) << ",,,\n";
  }
  f << "summary," << total.n_pp << ',' << total.n_pm << ',' << total.n_mp << ','
    << total.n_mm << ',' << total.n_ab << ",,," << g17(run.s_fair()) << ','
    << g17(run.s_conventional()) << ',' << g17(run.sigma_s_fair()) << '\n';
  finish_out(f, cfg.out_path);
}

void write_sweep_csv(const RunConfig& cfg, const std::vector<SweepRow>& rows) {
  std::ofstream f = open_out(cfg.out_path);
  f << "threshold,kept_fraction,s_conventional,s_fair\n";
  for (const SweepRow& r : rows)
    f << g17(r.value) << ',' << g17(r.kept_fraction) << ','
      << g17(r.s_conventional) << ',' << g17(r.s_fair) << '\n';
  finish_out(f, cfg.out_path);
}

void write_histogram_csv(const RunConfig& cfg, const Histogram& h) {
  std::ofstream f = open_out(cfg.out_path);
  f << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    f << g17(h.edges[i]) << ',' << g17(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
  finish_out(f, cfg.out_path);
}

void write_curve_csv(const RunConfig& cfg, const CoincidenceCurves& c) {
  std::ofstream f = open_out(cfg.out_path);
  f << "theta_b,p_pp,se_pp,p_pm,se_pm,p_mp,se_mp,p_mm,se_mm,n_ab\n";
  for (std::size_t i = 0; i < c.pp.size(); ++i)
    f << g17(c.pp[i].theta) << ',' << g17(c.pp[i].rate) << ',' << g17(c.pp[i].se)
      << ',' << g17(c.pm[i].rate) << ',' << g17(c.pm[i].se) << ','
      << g17(c.mp[i].rate) << ',' << g17(c.mp[i].se) << ',' << g17(c.mm[i].rate)
      << ',' << g17(c.mm[i].se) << ',' << c.pp[i].n << '\n';
  finish_out(f, cfg.out_path);
}

void write_scatter_csv(const RunConfig& cfg,
                       const std::vector<std::pair<double, double>>& pts) {
  std::ofstream f = open_out(cfg.out_path);
  f << "theta,x\n";
  for (const auto& [theta, x] : pts) f << g17(theta) << ',' << g17(x) << '\n';
  finish_out(f, cfg.out_path);
}

void write_singles_csv(const RunConfig& cfg, const std::vector<CurvePoint>& pts) {
  std::ofstream f = open_out(cfg.out_path);
  f << "theta,rate,se,n\n";
  for (const CurvePoint& p : pts)
    f << g17(p.theta) << ',' << g17(p.rate) << ',' << g17(p.se) << ',' << p.n << '\n';
  finish_out(f, cfg.out_path);
}

void write_tomography_csv(const RunConfig& cfg, const WignerGrid& g) {
  std::ofstream f = open_out(cfg.out_path);
  f << 'x';
  for (std::size_t ip = 0; ip < g.np; ++ip) f << ',' << g17(g.p_at(ip));
  f << '\n';
  for (std::size_t ix = 0; ix < g.nx; ++ix) {
    f << g17(g.x_at(ix));
    for (std::size_t ip = 0; ip < g.np; ++ip) f << ',' << g17(g.at(ix, ip));
    f << '\n';
  }
  finish_out(f, cfg.out_path);
}

void write_manifest(const RunConfig& cfg, double wall_s,
                    const std::vector<nlohmann::json>& extra) {
  const std::string path = cfg.out_path + ".manifest.jsonl";
  std::ofstream f = open_out(path);
  nlohmann::json run;
  run["record"] = "run";
  run["version"] = LHV_VERSION;
  run["wall_time_s"] = wall_s;
  nlohmann::json conf = nlohmann::json::object();
  for (const auto& [k, v] : to_flat_map(cfg)) conf[k] = v;
  run["config"] = conf;
  f << run.dump() << '\n';
  for (const nlohmann::json& e : extra) f << e.dump() << '\n';
  finish_out(f, path);
}

}  // namespace

void run_experiment(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<nlohmann::json> extra;
  switch (cfg.experiment) {
    case Experiment::bell_test:
      write_bell_csv(cfg, run_bell_test(cfg));
      break;
    case Experiment::loophole_sweep:
      write_sweep_csv(cfg, run_sweep(cfg));
      break;
    case Experiment::histogram: {
      const Histogram h = run_histogram(cfg);
      write_histogram_csv(cfg, h);
      nlohmann::json meta;
      meta["record"] = "histogram";
      meta["underflow"] = h.underflow;
      meta["overflow"] = h.overflow;
      meta["n_total"] = h.n_total;
      extra.push_back(meta);
      break;
    }
    case Experiment::curve:
      write_curve_csv(cfg, run_curve(cfg));
      break;
    case Experiment::scatter:
      write_scatter_csv(cfg, run_scatter(cfg));
      break;
    case Experiment::singles:
      write_singles_csv(cfg, run_singles(cfg));
      break;
    case Experiment::tomography: {
      const TomographyResult res = run_tomography(cfg);
      write_tomography_csv(cfg, res.grid);
      nlohmann::json meta;
      meta["record"] = "tomography";
      meta["nx"] = res.grid.nx;
      meta["np"] = res.grid.np;
      meta["x_range"] = res.grid.x_range;
      meta["p_range"] = res.grid.p_range;
      meta["filter_cutoff"] = cfg.filter_cutoff;
      meta["empty_phase_bins"] = res.grid.empty_phase_bins;
      meta["integral"] = res.grid.integral();
      meta["min_value"] = res.minimum.value;
      meta["min_x"] = res.minimum.x;
      meta["min_p"] = res.minimum.p;
      meta["negativity_epsilon"] = res.negativity_epsilon;
      meta["negative"] = res.minimum.value < -res.negativity_epsilon;
      meta["calibration_sigma"] = res.calibration_sigma;
      extra.push_back(meta);
      break;
    }
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(cfg, wall, extra);
}

namespace {

void emit_error(int code, const std::string& message) {
  nlohmann::json err;
  err["error"]["code"] = code;
  err["error"]["message"] = message;
  std::cerr << err.dump() << std::endl;
}

}  // namespace

int cli_main(int argc, const char* const* argv) noexcept {
  std::string config_path, out_flag, experiment_flag;
  std::uint64_t seed_flag = 0;
  std::size_t workers_flag = 1;

  CLI::App app{"lhvsim: classical-field homodyne Bell-test simulator"};
  app.set_version_flag("--version", std::string(LHV_VERSION));
  auto* opt_config = app.add_option("--config", config_path, "flat key = value config file");
  auto* opt_seed = app.add_option("--seed", seed_flag, "root seed (overrides config)");
  auto* opt_out = app.add_option("--out", out_flag, "output CSV path");
  auto* opt_workers = app.add_option("--workers", workers_flag, "worker thread count");
  auto* opt_experiment =
      app.add_option("--experiment", experiment_flag,
                     "bell-test | loophole-sweep | histogram | curve | scatter | "
                     "singles | tomography");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(2, std::string("cli: ") + e.what());
    return 2;
  }

  try {
    RunConfig cfg;
    if (opt_config->count() > 0) cfg = load_config_file(config_path);
    if (opt_seed->count() > 0) cfg.seed = seed_flag;
    if (opt_experiment->count() > 0) cfg.experiment = parse_experiment(experiment_flag);
    if (opt_out->count() > 0) cfg.out_path = out_flag;
    if (opt_workers->count() > 0) cfg.workers = workers_flag;
    finalize(cfg);
    cfg.validate();
    run_experiment(cfg);
    return 0;
  } catch (const ConfigError& e) {
    emit_error(2, e.what());
    return 2;
  } catch (const IoError& e) {
    emit_error(3, e.what());
    return 3;
  } catch (const EstimatorUndefined& e) {
    emit_error(4, e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    emit_error(2, e.what());
    return 2;
  } catch (const std::domain_error& e) {
    emit_error(2, e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error(1, e.what());
    return 1;
  }
}

}  // namespace lhv
