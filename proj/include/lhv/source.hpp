#pragma once
// Pulsed down-conversion source with a hidden phase class per pair.
//
// Each emitted pair carries a shared phase alpha that the detectors never see
// directly: exact frequency halving leaves two possible phases, so alpha is 0
// or pi (two_class mode). The uniform mode replaces alpha by a per-pair phase
// drawn uniformly on (-pi, pi], the rotational-invariance limit. Event-ready
// selection taps a fraction of each arm's intensity and requires both tap
// detectors to fire; it never sees the analyser settings.

#include "lhv/rng.hpp"

namespace lhv {

enum class PhaseMode { two_class, uniform };

// One down-converted event. alpha is shared by both arms; the arms split a
// common carrier omega symmetrically when detuned by delta_omega.
struct PulsePair {
  double alpha = 0.0;        // hidden phase; exactly 0.0 or pi in two_class mode
  double omega = 1.0;        // carrier frequency, rad/s, > 0
  double delta_omega = 0.0;  // conjugate detuning between the arms, rad/s
  double e_a = 0.0;          // arm A amplitude, >= 0
  double e_b = 0.0;          // arm B amplitude, >= 0

  double omega_a() const noexcept { return omega + 0.5 * delta_omega; }
  double omega_b() const noexcept { return omega - 0.5 * delta_omega; }
};

struct SourceConfig {
  double p_alpha_zero = 0.5;           // P(alpha = 0) in two_class mode
  double omega_mean = 1.0;             // rad/s, > 0
  double omega_sigma = 0.0;            // common carrier jitter (truncated > 0)
  double delta_omega_sigma = 0.0;      // detuning spread
  double amplitude_mean = 1.0;         // > 0
  double amplitude_sigma = 0.0;        // marginal amplitude std dev
  double amplitude_correlation = 0.0;  // corr(e_a, e_b), in [0, 1]
  double tap_ratio = 0.1;              // event-ready tap reflectance, in (0, 1)
  double pd_threshold = 0.0;           // tap-intensity threshold, >= 0
  PhaseMode phase_mode = PhaseMode::two_class;

  void validate() const;  // throws ConfigError
};

// Draw one pair: alpha per phase_mode, omega from a truncated normal,
// delta_omega Gaussian, and amplitudes from a bivariate lognormal whose
// marginal mean, standard deviation and inter-arm correlation match the
// configured values.
PulsePair draw_pulse_pair(const SourceConfig& cfg, RandomStream& rng);

// Event-ready selection: selected iff tap_ratio * e^2 >= pd_threshold on
// both arms. On selection the transmitted amplitudes are scaled by
// sqrt(1 - tap_ratio). Deterministic given the pair; independent of any
// detector setting by construction.
bool event_ready_select(PulsePair& pair, const SourceConfig& cfg) noexcept;

}  // namespace lhv
