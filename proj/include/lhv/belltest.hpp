#pragma once
// Coincidence bookkeeping, correlation estimators and the CHSH combination.
//
// Two estimators are deliberately kept side by side. The fair estimator
// divides by the number of event-ready pairs, whether or not both outcomes
// registered; the conventional estimator divides by the observed coincidence
// total only, which is where the detection loophole lives.

#include <array>
#include <cstdint>
#include <span>

namespace lhv {

struct CoincidenceCounts {
  std::uint64_t n_pp = 0;
  std::uint64_t n_pm = 0;
  std::uint64_t n_mp = 0;
  std::uint64_t n_mm = 0;
  std::uint64_t n_ab = 0;  // event-ready pairs for this setting pair

  void note_event_ready() noexcept { ++n_ab; }
  void note_coincidence(int sign_a, int sign_b) noexcept;
  std::uint64_t observed() const noexcept { return n_pp + n_pm + n_mp + n_mm; }
  CoincidenceCounts& operator+=(const CoincidenceCounts& o) noexcept;
};

// (n_pp + n_mm - n_pm - n_mp) / n_ab. Throws EstimatorUndefined if n_ab == 0.
double correlation_fair(const CoincidenceCounts& c);

// Same numerator over the observed coincidence total. Throws
// EstimatorUndefined if nothing was observed.
double correlation_conventional(const CoincidenceCounts& c);

// Standard errors by binomial/trinomial propagation.
double correlation_fair_stderr(const CoincidenceCounts& c);
double correlation_conventional_stderr(const CoincidenceCounts& c);

// S = e_ab - e_ab' + e_a'b + e_a'b'.
double chsh(double e_ab, double e_ab_prime, double e_a_prime_b,
            double e_a_prime_b_prime) noexcept;

struct ChshSettings {
  double a;
  double a_prime;
  double b;
  double b_prime;
};

// One full CHSH run: four disjoint blocks of trials, one per setting pair,
// in the order (a,b), (a,b'), (a',b), (a',b').
struct ChshRun {
  ChshSettings settings{};
  std::array<CoincidenceCounts, 4> counts{};

  double s_fair() const;
  double s_conventional() const;
  // Quadrature sum of the four per-pair standard errors.
  double sigma_s_fair() const;
  double sigma_s_conventional() const;
};

struct CoincidenceProbabilities {
  double p_pp;
  double p_pm;
  double p_mp;
  double p_mm;
};

// Noise-free two-class mixture: each alpha in {0, pi} contributes a product
// of step functions p(+|theta) = 1{0 < reduce(theta - alpha) < pi}, weighted
// p_alpha_zero and 1 - p_alpha_zero. Throws std::domain_error when either
// angle reduces to an integer multiple of pi, where the step is undefined.
CoincidenceProbabilities analytic_coincidence(double theta_a, double theta_b,
                                              double p_alpha_zero);

// (max - min) / (max + min) over the rates. Requires >= 2 points and
// non-negative rates; throws EstimatorUndefined when max + min == 0.
double visibility(std::span<const double> rates);

}  // namespace lhv
