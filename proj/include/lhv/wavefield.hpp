#pragma once
// Classical beamsplitter / balanced-homodyne algebra.
//
// A test beam of amplitude E mixes with a local oscillator of amplitude E_L
// at a lossless 50/50 beamsplitter. With relative phase theta the two output
// intensities are
//
//   i_r = (E^2 + E_L^2 + 2 E E_L sin(theta)) / 2
//   i_t = (E^2 + E_L^2 - 2 E E_L sin(theta)) / 2
//
// so the photodetector difference voltage is proportional to
// 2 E E_L sin(theta). Digitising that difference to +/-1 is what the
// Bell-test modules consume.

#include <utility>

#include "lhv/rng.hpp"

namespace lhv {

// Reduce an angle to (-pi, pi].
double reduce_phase(double angle) noexcept;

// Test-beam / local-oscillator amplitude pair with their relative phase.
// Construction validates amplitudes and reduces the phase.
struct FieldPair {
  double e_test = 0.0;  // >= 0
  double e_lo = 0.0;    // >= 0
  double theta = 0.0;   // radians, reduced to (-pi, pi]

  FieldPair(double e_test, double e_lo, double theta);
};

// One homodyne reading. i_r/i_t are the pre-gain, noise-free output
// intensities; x is the difference voltage with gain and per-detector noise
// applied; sign is digitize(x).
struct HomodyneReading {
  double i_r = 0.0;
  double i_t = 0.0;
  double x = 0.0;
  int sign = +1;
};

// Both output intensities (i_r, i_t). i_r + i_t == E^2 + E_L^2 up to
// rounding, and each port is clamped at zero.
std::pair<double, double> beamsplitter_intensities(const FieldPair& f) noexcept;

// Difference voltage x = gain*(i_r - i_t) + n_r - n_t where n_r, n_t are
// independent Gaussian draws of width noise_sigma, one per photodetector
// voltage. The noise-free part is evaluated in closed form, so with
// noise_sigma == 0 the result is exactly gain * 2 E E_L sin(theta).
HomodyneReading homodyne_difference(const FieldPair& f, double gain,
                                    double noise_sigma, RandomStream& rng);

// Real-valued time-average oracle for the intensity difference: samples both
// output fields over one optical period at n_samples equidistant points,
// averages the squared fields, and doubles the mean square to match the
// amplitude^2 intensity convention. Agrees with 2 E E_L sin(theta) to
// quadrature accuracy. Throws std::invalid_argument if n_samples < 16.
double oracle_difference_real(double e_test, double e_lo, double theta,
                              int n_samples);

// x > 0 -> +1, x < 0 -> -1, x == 0 -> fair coin from rng.
// Throws std::invalid_argument on non-finite input.
int digitize(double x, RandomStream& rng);

}  // namespace lhv
