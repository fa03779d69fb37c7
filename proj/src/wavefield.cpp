#include "lhv/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lhv {

double reduce_phase(double angle) noexcept {
  double r = std::remainder(angle, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r = std::numbers::pi;
  return r;
}

FieldPair::FieldPair(double e_test_in, double e_lo_in, double theta_in)
    : e_test(e_test_in), e_lo(e_lo_in), theta(reduce_phase(theta_in)) {
  if (!(e_test >= 0.0) || !(e_lo >= 0.0))
    throw std::invalid_argument("FieldPair: amplitudes must be >= 0");
  if (!std::isfinite(theta_in))
    throw std::invalid_argument("FieldPair: theta must be finite");
}

std::pair<double, double> beamsplitter_intensities(const FieldPair& f) noexcept {
  const double half_sum = 0.5 * (f.e_test * f.e_test + f.e_lo * f.e_lo);
  const double cross = f.e_test * f.e_lo * std::sin(f.theta);
  // Clamp: the exact values are >= (E - E_L)^2 / 2 >= 0 but rounding can
  // produce a stray -1 ulp when the ports nearly cancel.
  return {std::max(0.0, half_sum + cross), std::max(0.0, half_sum - cross)};
}

HomodyneReading homodyne_difference(const FieldPair& f, double gain,
                                    double noise_sigma, RandomStream& rng) {
  if (!(gain > 0.0))
    throw std::invalid_argument("homodyne_difference: gain must be > 0");
  if (!(noise_sigma >= 0.0))
    throw std::invalid_argument("homodyne_difference: noise_sigma must be >= 0");
  HomodyneReading out;
  const auto ports = beamsplitter_intensities(f);
  out.i_r = ports.first;
  out.i_t = ports.second;
  const double n_r = rng.gaussian(noise_sigma);
  const double n_t = rng.gaussian(noise_sigma);
  out.x = gain * (2.0 * f.e_test * f.e_lo * std::sin(f.theta)) + (n_r - n_t);
  out.sign = digitize(out.x, rng);
  return out;
}

double oracle_difference_real(double e_test, double e_lo, double theta,
                              int n_samples) {
  if (n_samples < 16)
    throw std::invalid_argument("oracle_difference_real: n_samples must be >= 16");
  // Output fields of the 50/50 splitter, test beam sin-referenced and the
  // local oscillator cos-referenced:
  //   E_r(phi) = (-E sin(phi) + E_L cos(phi + theta)) / sqrt(2)
  //   E_t(phi) = ( E cos(phi) - E_L sin(phi + theta)) / sqrt(2)
  double sum_r = 0.0;
  double sum_t = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_samples;
    const double e_r =
        (-e_test * std::sin(phi) + e_lo * std::cos(phi + theta)) / std::numbers::sqrt2;
    const double e_t =
        (e_test * std::cos(phi) - e_lo * std::sin(phi + theta)) / std::numbers::sqrt2;
    sum_r += e_r * e_r;
    sum_t += e_t * e_t;
  }
  // Mean square -> amplitude^2 intensity convention costs a factor of two.
  return 2.0 * (sum_r - sum_t) / n_samples;
}

int digitize(double x, RandomStream& rng) {
  if (!std::isfinite(x))
    throw std::invalid_argument("digitize: non-finite voltage");
  if (x > 0.0) return +1;
  if (x < 0.0) return -1;
  return rng.bernoulli(0.5) ? +1 : -1;
}

}  // namespace lhv
