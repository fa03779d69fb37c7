#include "lhv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lhv/errors.hpp"

namespace lhv {

namespace {

bool on_boundary(double theta) {
  const double t = reduce_phase(theta);
  return t == 0.0 || t == std::numbers::pi;
}

void require_off_boundary(std::span<const double> grid) {
  for (double t : grid)
    if (on_boundary(t))
      throw std::invalid_argument("theta grid must avoid integer multiples of pi");
}

CurvePoint make_point(double theta, std::uint64_t k, std::uint64_t n) {
  if (n == 0) throw EstimatorUndefined("curve point with no event-ready trials");
  CurvePoint p;
  p.theta = theta;
  p.n = n;
  p.rate = double(k) / double(n);
  p.se = std::sqrt(std::max(0.0, p.rate * (1.0 - p.rate)) / double(n));
  return p;
}

}  // namespace

void Histogram::add(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("Histogram::add: non-finite value");
  ++n_total;
  if (x < edges.front()) {
    ++underflow;
  } else if (x > edges.back()) {
    ++overflow;
  } else if (x == edges.back()) {
    ++counts.back();  // top edge inclusive
  } else {
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    counts[static_cast<std::size_t>(it - edges.begin()) - 1] += 1;
  }
}

Histogram& Histogram::operator+=(const Histogram& o) {
  if (edges != o.edges)
    throw std::invalid_argument("Histogram::operator+=: incompatible edges");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  underflow += o.underflow;
  overflow += o.overflow;
  n_total += o.n_total;
  return *this;
}

Histogram make_histogram(double lo, double hi, std::size_t bins) {
  if (!(lo < hi) || bins == 0)
    throw std::invalid_argument("make_histogram: need lo < hi and bins >= 1");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * double(i) / double(bins);
  h.counts.assign(bins, 0);
  return h;
}

std::vector<double> default_theta_grid(std::size_t n) {
  if (n == 0) throw std::invalid_argument("default_theta_grid: n must be >= 1");
  std::vector<double> grid(n);
  const double h = 2.0 * std::numbers::pi / double(n);
  for (std::size_t k = 0; k < n; ++k)
    grid[k] = -std::numbers::pi + (double(k) + 0.75) * h;
  return grid;
}

double expected_x_max(const SourceConfig& src, const ArmSettings& arm) {
  return arm.gain * 2.0 * src.amplitude_mean * arm.lo_amplitude;
}

CoincidenceCounts accumulate_coincidences(const SourceConfig& src,
                                          const ArmSettings& arm_a,
                                          const ArmSettings& arm_b,
                                          std::uint64_t t_begin, std::uint64_t t_end,
                                          const RandomStream& unit_stream,
                                          bool use_discriminator) {
  CoincidenceCounts counts;
  for (std::uint64_t t = t_begin; t < t_end; ++t) {
    const RandomStream trial = unit_stream.derive(t);
    RandomStream rng_src = trial.derive(kLaneSource);
    PulsePair pair = draw_pulse_pair(src, rng_src);
    if (!event_ready_select(pair, src)) continue;
    counts.note_event_ready();
    RandomStream rng_a = trial.derive(kLaneArmA);
    RandomStream rng_b = trial.derive(kLaneArmB);
    const ArmOutcome oa = measure_arm(pair.e_a, pair.omega_a(), arm_a, pair.alpha, rng_a);
    const ArmOutcome ob = measure_arm(pair.e_b, pair.omega_b(), arm_b, pair.alpha, rng_b);
    if (use_discriminator && !(oa.discriminated && ob.discriminated)) continue;
    counts.note_coincidence(oa.sign, ob.sign);
  }
  return counts;
}

SingleArmTrial single_arm_trial(const SourceConfig& src, const ArmSettings& arm,
                                std::uint64_t trial_index,
                                const RandomStream& unit_stream,
                                double fixed_theta) {
  const RandomStream trial = unit_stream.derive(trial_index);
  RandomStream rng_src = trial.derive(kLaneSource);
  const PulsePair pair = draw_pulse_pair(src, rng_src);
  double theta = fixed_theta;
  if (std::isnan(theta)) {
    RandomStream rng_setting = trial.derive(kLaneSetting);
    theta = rng_setting.uniform_angle();
  }
  const ArmSettings resolved = with_nominal_setting(arm, theta, src.omega_mean);
  RandomStream rng_arm = trial.derive(kLaneArmA);
  const ArmOutcome out = measure_arm(pair.e_a, pair.omega_a(), resolved, pair.alpha, rng_arm);
  return {theta, out.x, out.sign};
}

void accumulate_histogram(const SourceConfig& src, const ArmSettings& arm,
                          std::uint64_t t_begin, std::uint64_t t_end,
                          const RandomStream& unit_stream, Histogram& into) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::uint64_t t = t_begin; t < t_end; ++t)
    into.add(single_arm_trial(src, arm, t, unit_stream, nan).x);
}

void accumulate_scatter(const SourceConfig& src, const ArmSettings& arm,
                        std::uint64_t t_begin, std::uint64_t t_end,
                        std::uint64_t n_trials, ScatterMode mode,
                        const RandomStream& unit_stream,
                        std::span<std::pair<double, double>> out) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::uint64_t t = t_begin; t < t_end; ++t) {
    double fixed = nan;
    if (mode == ScatterMode::ramp)
      fixed = -std::numbers::pi +
              (double(t) + 0.5) * 2.0 * std::numbers::pi / double(n_trials);
    const SingleArmTrial s = single_arm_trial(src, arm, t, unit_stream, fixed);
    out[t] = {s.theta_applied, s.x};
  }
}

Histogram phase_averaged_histogram(const SourceConfig& src, const ArmSettings& arm,
                                   std::uint64_t n_trials, std::size_t bins,
                                   const RandomStream& stream) {
  if (n_trials < 10000)
    throw std::invalid_argument("phase_averaged_histogram: n_trials must be >= 10^4");
  if (bins < 20)
    throw std::invalid_argument("phase_averaged_histogram: bins must be >= 20");
  const double half = expected_x_max(src, arm) +
                      5.0 * arm.noise_sigma * std::numbers::sqrt2;
  Histogram h = make_histogram(-half, half, bins);
  accumulate_histogram(src, arm, 0, n_trials, stream, h);
  return h;
}

std::vector<std::pair<double, double>> scatter_vs_phase(const SourceConfig& src,
                                                        const ArmSettings& arm,
                                                        std::uint64_t n_trials,
                                                        ScatterMode mode,
                                                        const RandomStream& stream) {
  if (n_trials < 1000)
    throw std::invalid_argument("scatter_vs_phase: n_trials must be >= 10^3");
  std::vector<std::pair<double, double>> out(n_trials);
  accumulate_scatter(src, arm, 0, n_trials, n_trials, mode, stream, out);
  return out;
}

std::vector<CurvePoint> singles_rate(const SourceConfig& src, const ArmSettings& arm,
                                     std::span<const double> theta_grid,
                                     std::uint64_t n_per_point,
                                     const RandomStream& stream) {
  require_off_boundary(theta_grid);
  std::vector<CurvePoint> out;
  out.reserve(theta_grid.size());
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    const RandomStream point = stream.derive(i);
    std::uint64_t plus = 0;
    for (std::uint64_t t = 0; t < n_per_point; ++t)
      if (single_arm_trial(src, arm, t, point, theta_grid[i]).sign > 0) ++plus;
    out.push_back(make_point(theta_grid[i], plus, n_per_point));
  }
  return out;
}

CoincidenceCurves coincidence_curve(const SourceConfig& src,
                                    const ArmSettings& arm_a,
                                    const ArmSettings& arm_b, double theta_a,
                                    std::span<const double> theta_b_grid,
                                    std::uint64_t n_per_point,
                                    const RandomStream& stream) {
  if (on_boundary(theta_a))
    throw std::invalid_argument("coincidence_curve: theta_a must avoid multiples of pi");
  require_off_boundary(theta_b_grid);
  CoincidenceCurves curves;
  curves.theta_a = theta_a;
  const ArmSettings sa = with_nominal_setting(arm_a, theta_a, src.omega_mean);
  for (std::size_t i = 0; i < theta_b_grid.size(); ++i) {
    const ArmSettings sb = with_nominal_setting(arm_b, theta_b_grid[i], src.omega_mean);
    const CoincidenceCounts c = accumulate_coincidences(
        src, sa, sb, 0, n_per_point, stream.derive(i), false);
    curves.pp.push_back(make_point(theta_b_grid[i], c.n_pp, c.n_ab));
    curves.pm.push_back(make_point(theta_b_grid[i], c.n_pm, c.n_ab));
    curves.mp.push_back(make_point(theta_b_grid[i], c.n_mp, c.n_ab));
    curves.mm.push_back(make_point(theta_b_grid[i], c.n_mm, c.n_ab));
  }
  return curves;
}

}  // namespace lhv
