#include "lhv/belltest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lhv/errors.hpp"
#include "lhv/wavefield.hpp"

namespace lhv {

void CoincidenceCounts::note_coincidence(int sign_a, int sign_b) noexcept {
  if (sign_a > 0)
    sign_b > 0 ? ++n_pp : ++n_pm;
  else
    sign_b > 0 ? ++n_mp : ++n_mm;
}

CoincidenceCounts& CoincidenceCounts::operator+=(const CoincidenceCounts& o) noexcept {
  n_pp += o.n_pp;
  n_pm += o.n_pm;
  n_mp += o.n_mp;
  n_mm += o.n_mm;
  n_ab += o.n_ab;
  return *this;
}

double correlation_fair(const CoincidenceCounts& c) {
  if (c.n_ab == 0)
    throw EstimatorUndefined("correlation_fair: no event-ready pairs");
  const double num = double(c.n_pp) + double(c.n_mm) - double(c.n_pm) - double(c.n_mp);
  return num / double(c.n_ab);
}

double correlation_conventional(const CoincidenceCounts& c) {
  const std::uint64_t n = c.observed();
  if (n == 0)
    throw EstimatorUndefined("correlation_conventional: no observed coincidences");
  const double num = double(c.n_pp) + double(c.n_mm) - double(c.n_pm) - double(c.n_mp);
  return num / double(n);
}

double correlation_fair_stderr(const CoincidenceCounts& c) {
  if (c.n_ab == 0)
    throw EstimatorUndefined("correlation_fair_stderr: no event-ready pairs");
  // Per event-ready pair the product contributes +1, -1 or 0 (unregistered),
  // a trinomial with variance p+ + p- - (p+ - p-)^2.
  const double n = double(c.n_ab);
  const double p_plus = (double(c.n_pp) + double(c.n_mm)) / n;
  const double p_minus = (double(c.n_pm) + double(c.n_mp)) / n;
  const double e = p_plus - p_minus;
  return std::sqrt(std::max(0.0, p_plus + p_minus - e * e) / n);
}

double correlation_conventional_stderr(const CoincidenceCounts& c) {
  const std::uint64_t n = c.observed();
  if (n == 0)
    throw EstimatorUndefined("correlation_conventional_stderr: no observed coincidences");
  const double e = correlation_conventional(c);
  return std::sqrt(std::max(0.0, 1.0 - e * e) / double(n));
}

double chsh(double e_ab, double e_ab_prime, double e_a_prime_b,
            double e_a_prime_b_prime) noexcept {
  return e_ab - e_ab_prime + e_a_prime_b + e_a_prime_b_prime;
}

double ChshRun::s_fair() const {
  return chsh(correlation_fair(counts[0]), correlation_fair(counts[1]),
              correlation_fair(counts[2]), correlation_fair(counts[3]));
}

double ChshRun::s_conventional() const {
  return chsh(correlation_conventional(counts[0]), correlation_conventional(counts[1]),
              correlation_conventional(counts[2]), correlation_conventional(counts[3]));
}

double ChshRun::sigma_s_fair() const {
  double q = 0.0;
  for (const auto& c : counts) {
    const double s = correlation_fair_stderr(c);
    q += s * s;
  }
  return std::sqrt(q);
}

double ChshRun::sigma_s_conventional() const {
  double q = 0.0;
  for (const auto& c : counts) {
    const double s = correlation_conventional_stderr(c);
    q += s * s;
  }
  return std::sqrt(q);
}

namespace {

// Step probability of a + outcome given the hidden phase: 1 on (0, pi),
// 0 on (-pi, 0), undefined on the boundary.
double step_plus(double theta, double alpha) {
  const double t = reduce_phase(theta - alpha);
  if (t == 0.0 || t == std::numbers::pi)
    throw std::domain_error(
        "analytic_coincidence: undefined at integer multiples of pi");
  return t > 0.0 ? 1.0 : 0.0;
}

}  // namespace

CoincidenceProbabilities analytic_coincidence(double theta_a, double theta_b,
                                              double p_alpha_zero) {
  if (!(p_alpha_zero >= 0.0 && p_alpha_zero <= 1.0))
    throw std::invalid_argument("analytic_coincidence: p_alpha_zero must be in [0, 1]");
  const double a0 = step_plus(theta_a, 0.0);
  const double a1 = step_plus(theta_a, std::numbers::pi);
  const double b0 = step_plus(theta_b, 0.0);
  const double b1 = step_plus(theta_b, std::numbers::pi);
  const double p0 = p_alpha_zero;
  const double q = 1.0 - p_alpha_zero;
  return {
      p0 * a0 * b0 + q * a1 * b1,
      p0 * a0 * (1.0 - b0) + q * a1 * (1.0 - b1),
      p0 * (1.0 - a0) * b0 + q * (1.0 - a1) * b1,
      p0 * (1.0 - a0) * (1.0 - b0) + q * (1.0 - a1) * (1.0 - b1),
  };
}

double visibility(std::span<const double> rates) {
  if (rates.size() < 2)
    throw std::invalid_argument("visibility: need at least 2 points");
  double lo = rates[0];
  double hi = rates[0];
  for (double r : rates) {
    if (!(r >= 0.0))
      throw std::invalid_argument("visibility: rates must be >= 0");
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (hi + lo == 0.0)
    throw EstimatorUndefined("visibility: all-zero curve");
  return (hi - lo) / (hi + lo);
}

}  // namespace lhv
