#pragma once
// Inverse-Radon (filtered back-projection) estimate of a phase-space density
// from quadrature samples, plus the negativity calibration that turns the
// estimator's own artifact level into a decision threshold.

#include <cstddef>
#include <span>
#include <vector>

#include "lhv/rng.hpp"

namespace lhv {

// A quadrature sample after folding: theta in [0, pi) with
// (x, theta + pi) identified with (-x, theta).
struct QuadratureSample {
  double theta;
  double x;
};

QuadratureSample fold_sample(double theta, double x) noexcept;

struct GridSpec {
  std::size_t nx = 64;
  std::size_t np = 64;
  double x_range = 4.0;  // grid spans [-x_range, x_range], cell centers
  double p_range = 4.0;
  std::size_t phase_bins = 40;      // over [0, pi)
  std::size_t quadrature_bins = 64; // marginal histogram resolution
};

struct WignerGrid {
  std::size_t nx = 0;
  std::size_t np = 0;
  double x_range = 0.0;
  double p_range = 0.0;
  double cell_area = 0.0;
  std::vector<double> values;  // row-major, values[ix * np + ip]
  std::size_t empty_phase_bins = 0;
  // Largest per-phase-bin conditional marginal density seen while binning;
  // the bin-noise scale of the input, used to match the calibration model.
  double peak_marginal_density = 0.0;

  double x_at(std::size_t ix) const noexcept;
  double p_at(std::size_t ip) const noexcept;
  double at(std::size_t ix, std::size_t ip) const noexcept { return values[ix * np + ip]; }
  double integral() const noexcept;
};

// Filtered back-projection: bins samples into phase x quadrature marginal
// histograms, ramp-filters each phase bin in the frequency domain with a hard
// cutoff at filter_cutoff * Nyquist, back-projects onto the grid and
// normalizes by the bin widths and pi. Requires >= 10^4 samples spanning
// >= 20 distinct phase bins (insufficient angular coverage otherwise); empty
// phase bins are skipped and reported via empty_phase_bins.
WignerGrid radon_reconstruct(std::span<const QuadratureSample> samples,
                             const GridSpec& grid, double filter_cutoff);

struct MinDensity {
  double value;
  double x;
  double p;
};

// Minimum cell value and its cell-center location.
MinDensity min_density(const WignerGrid& g);

// Artifact bound for negativity claims: reconstructs `replicates` same-size
// samples from a known everywhere-positive Gaussian model (quadratures
// Normal(0, sigma), phase uniform) with the same grid and filter, and
// returns 3x the largest negative excursion observed. Choosing sigma so the
// model's peak marginal density matches the data's makes the calibration's
// bin-noise level a stand-in for the data's. A reconstruction minimum above
// -epsilon is consistent with an everywhere-positive density at this sample
// size.
double calibrate_negativity_epsilon(std::size_t n_samples, double sample_sigma,
                                    const GridSpec& grid, double filter_cutoff,
                                    const RandomStream& stream,
                                    std::size_t replicates = 4);

}  // namespace lhv
