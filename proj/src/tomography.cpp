#include "lhv/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "lhv/fft.hpp"
#include "lhv/wavefield.hpp"

namespace lhv {

QuadratureSample fold_sample(double theta, double x) noexcept {
  double t = reduce_phase(theta);
  if (t == std::numbers::pi) return {0.0, -x};
  if (t < 0.0) return {t + std::numbers::pi, -x};
  return {t, x};
}

double WignerGrid::x_at(std::size_t ix) const noexcept {
  return -x_range + (double(ix) + 0.5) * 2.0 * x_range / double(nx);
}

double WignerGrid::p_at(std::size_t ip) const noexcept {
  return -p_range + (double(ip) + 0.5) * 2.0 * p_range / double(np);
}

double WignerGrid::integral() const noexcept {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_area;
}

namespace {

// Linear interpolation on the filtered marginal, clamped at the ends.
double lerp_filtered(const std::vector<double>& q, double f) {
  if (f <= 0.0) return q.front();
  const double last = double(q.size() - 1);
  if (f >= last) return q.back();
  const std::size_t i0 = static_cast<std::size_t>(f);
  const double frac = f - double(i0);
  return q[i0] * (1.0 - frac) + q[i0 + 1] * frac;
}

// Discrete band-limited ramp: the Ram-Lak kernel sampled in the signal
// domain (circularly) and taken to the frequency domain. Sampling |nu|
// directly instead would force the DC response to zero and bleed a few
// percent of the reconstructed mass into the padding region.
std::vector<double> ramp_response(std::size_t m, double ds, double cutoff) {
  const double b = cutoff / (2.0 * ds);  // cutoff frequency
  std::vector<std::complex<double>> h(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = (i <= m / 2 ? double(i) : double(i) - double(m)) * ds;
    if (s == 0.0) {
      h[i] = b * b;
    } else {
      const double a = 2.0 * std::numbers::pi * b * s;
      h[i] = 2.0 * (b * std::sin(a) / (2.0 * std::numbers::pi * s) +
                    (std::cos(a) - 1.0) /
                        (4.0 * std::numbers::pi * std::numbers::pi * s * s));
    }
  }
  fft_inplace(h, false);
  std::vector<double> response(m);
  const std::size_t k_cut = static_cast<std::size_t>(cutoff * double(m) / 2.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t k_signed = k <= m / 2 ? k : m - k;
    // h is even, so its spectrum is real; the hard cutoff is re-imposed to
    // drop the aliasing ripple of the kernel's 1/s^2 tails.
    response[k] = k_signed > k_cut ? 0.0 : ds * h[k].real();
  }
  return response;
}

}  // namespace

WignerGrid radon_reconstruct(std::span<const QuadratureSample> samples,
                             const GridSpec& grid, double filter_cutoff) {
  if (!(filter_cutoff > 0.0 && filter_cutoff <= 1.0))
    throw std::invalid_argument("radon_reconstruct: filter_cutoff must be in (0, 1]");
  if (grid.nx < 2 || grid.np < 2 || grid.quadrature_bins < 8 || grid.phase_bins < 1)
    throw std::invalid_argument("radon_reconstruct: grid too small");
  if (!(grid.x_range > 0.0 && grid.p_range > 0.0))
    throw std::invalid_argument("radon_reconstruct: ranges must be > 0");
  if (samples.size() < 10000)
    throw std::invalid_argument("radon_reconstruct: need >= 10^4 samples");

  const std::size_t jn = grid.phase_bins;
  const std::size_t nr = grid.quadrature_bins;
  // Quadrature support wide enough that every line through the grid projects
  // inside it.
  const double q_half = std::hypot(grid.x_range, grid.p_range);
  const double ds = 2.0 * q_half / double(nr);

  std::vector<std::uint64_t> counts(jn * nr, 0);
  std::vector<std::uint64_t> totals(jn, 0);
  for (const QuadratureSample& s : samples) {
    const QuadratureSample f = fold_sample(s.theta, s.x);
    auto j = static_cast<std::size_t>(f.theta / std::numbers::pi * double(jn));
    j = std::min(j, jn - 1);
    ++totals[j];
    if (std::fabs(f.x) <= q_half) {
      auto i = static_cast<std::size_t>((f.x + q_half) / ds);
      i = std::min(i, nr - 1);
      ++counts[j * nr + i];
    }
  }

  std::size_t nonempty = 0;
  for (std::uint64_t t : totals)
    if (t > 0) ++nonempty;
  if (nonempty < 20)
    throw std::invalid_argument(
        "radon_reconstruct: insufficient angular coverage (< 20 populated phase bins)");

  const std::size_t m = next_pow2(2 * nr);
  const std::vector<double> ramp = ramp_response(m, ds, filter_cutoff);

  WignerGrid out;
  out.nx = grid.nx;
  out.np = grid.np;
  out.x_range = grid.x_range;
  out.p_range = grid.p_range;
  out.cell_area = (2.0 * grid.x_range / double(grid.nx)) *
                  (2.0 * grid.p_range / double(grid.np));
  out.values.assign(grid.nx * grid.np, 0.0);
  out.empty_phase_bins = jn - nonempty;
  for (std::size_t j = 0; j < jn; ++j) {
    if (totals[j] == 0) continue;
    for (std::size_t i = 0; i < nr; ++i)
      out.peak_marginal_density =
          std::max(out.peak_marginal_density,
                   double(counts[j * nr + i]) / (double(totals[j]) * ds));
  }

  const double s0 = -q_half + 0.5 * ds;  // center of quadrature bin 0
  std::vector<std::complex<double>> spec(m);
  std::vector<double> filtered(nr);

  for (std::size_t j = 0; j < jn; ++j) {
    if (totals[j] == 0) continue;

    // Per-angle marginal density, then the ramp filter |nu| with a hard
    // cutoff at filter_cutoff * Nyquist.
    const double norm = 1.0 / (double(totals[j]) * ds);
    for (std::size_t i = 0; i < m; ++i)
      spec[i] = i < nr ? std::complex<double>(double(counts[j * nr + i]) * norm, 0.0)
                       : std::complex<double>(0.0, 0.0);
    fft_inplace(spec, false);
    for (std::size_t k = 0; k < m; ++k) spec[k] *= ramp[k];
    fft_inplace(spec, true);
    for (std::size_t i = 0; i < nr; ++i) filtered[i] = spec[i].real();

    const double theta = (double(j) + 0.5) * std::numbers::pi / double(jn);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const double x = out.x_at(ix);
      double* row = out.values.data() + ix * grid.np;
      for (std::size_t ip = 0; ip < grid.np; ++ip) {
        const double proj = x * c + out.p_at(ip) * s;
        row[ip] += lerp_filtered(filtered, (proj - s0) / ds);
      }
    }
  }

  // Angular quadrature weight: the skipped (empty) bins are assumed covered
  // by the remaining ones.
  const double dtheta = std::numbers::pi / double(nonempty);
  for (double& v : out.values) v *= dtheta;
  return out;
}

MinDensity min_density(const WignerGrid& g) {
  if (g.values.empty())
    throw std::invalid_argument("min_density: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < g.values.size(); ++i)
    if (g.values[i] < g.values[best]) best = i;
  return {g.values[best], g.x_at(best / g.np), g.p_at(best % g.np)};
}

double calibrate_negativity_epsilon(std::size_t n_samples, double sample_sigma,
                                    const GridSpec& grid, double filter_cutoff,
                                    const RandomStream& stream,
                                    std::size_t replicates) {
  if (!(sample_sigma > 0.0))
    throw std::invalid_argument("calibrate_negativity_epsilon: sigma must be > 0");
  if (replicates < 1)
    throw std::invalid_argument("calibrate_negativity_epsilon: replicates must be >= 1");
  double worst = 0.0;
  std::vector<QuadratureSample> samples;
  samples.reserve(n_samples);
  for (std::size_t r = 0; r < replicates; ++r) {
    const RandomStream rep = stream.derive(r);
    samples.clear();
    for (std::size_t t = 0; t < n_samples; ++t) {
      RandomStream trial = rep.derive(t);
      const double theta = trial.uniform_angle();
      const double x = trial.gaussian(sample_sigma);
      samples.push_back(fold_sample(theta, x));
    }
    const WignerGrid g = radon_reconstruct(samples, grid, filter_cutoff);
    worst = std::max(worst, -min_density(g).value);
  }
  return 3.0 * std::max(0.0, worst);
}

}  // namespace lhv
