#include "lhv/source.hpp"

#include <cmath>

#include "lhv/errors.hpp"

namespace lhv {

void SourceConfig::validate() const {
  if (!(p_alpha_zero >= 0.0 && p_alpha_zero <= 1.0))
    throw ConfigError("source.p_alpha_zero must be in [0, 1]");
  if (!(omega_mean > 0.0)) throw ConfigError("source.omega_mean must be > 0");
  if (!(omega_sigma >= 0.0)) throw ConfigError("source.omega_sigma must be >= 0");
  if (!(delta_omega_sigma >= 0.0))
    throw ConfigError("source.delta_omega_sigma must be >= 0");
  if (!(amplitude_mean > 0.0))
    throw ConfigError("source.amplitude_mean must be > 0");
  if (!(amplitude_sigma >= 0.0))
    throw ConfigError("source.amplitude_sigma must be >= 0");
  if (!(amplitude_correlation >= 0.0 && amplitude_correlation <= 1.0))
    throw ConfigError("source.amplitude_correlation must be in [0, 1]");
  if (!(tap_ratio > 0.0 && tap_ratio < 1.0))
    throw ConfigError("source.tap_ratio must be in (0, 1)");
  if (!(pd_threshold >= 0.0))
    throw ConfigError("source.pd_threshold must be >= 0");
}

PulsePair draw_pulse_pair(const SourceConfig& cfg, RandomStream& rng) {
  PulsePair p;
  if (cfg.phase_mode == PhaseMode::two_class)
    p.alpha = rng.bernoulli(cfg.p_alpha_zero) ? 0.0 : std::numbers::pi;
  else
    p.alpha = rng.uniform_angle();
  p.omega = rng.positive_normal(cfg.omega_mean, cfg.omega_sigma);
  p.delta_omega = rng.gaussian(cfg.delta_omega_sigma);
  if (cfg.amplitude_sigma <= 0.0) {
    p.e_a = cfg.amplitude_mean;
    p.e_b = cfg.amplitude_mean;
  } else {
    // Bivariate lognormal matched to the requested marginal moments. With
    // log-space variance s2 = log(1 + cv^2) the marginal mean and std dev are
    // exact; the log-space correlation rho reproduces the requested amplitude
    // correlation c through c = (exp(rho*s2) - 1) / (exp(s2) - 1).
    const double cv = cfg.amplitude_sigma / cfg.amplitude_mean;
    const double s2 = std::log1p(cv * cv);
    const double mu = std::log(cfg.amplitude_mean) - 0.5 * s2;
    const double rho =
        std::log1p(cfg.amplitude_correlation * std::expm1(s2)) / s2;
    const double z1 = rng.gaussian(1.0);
    const double z2 = rng.gaussian(1.0);
    const double s = std::sqrt(s2);
    const double za = z1;
    const double zb = rho * z1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z2;
    p.e_a = std::exp(mu + s * za);
    p.e_b = std::exp(mu + s * zb);
  }
  return p;
}

bool event_ready_select(PulsePair& pair, const SourceConfig& cfg) noexcept {
  const double tap_a = cfg.tap_ratio * pair.e_a * pair.e_a;
  const double tap_b = cfg.tap_ratio * pair.e_b * pair.e_b;
  if (tap_a < cfg.pd_threshold || tap_b < cfg.pd_threshold) return false;
  const double keep = std::sqrt(1.0 - cfg.tap_ratio);
  pair.e_a *= keep;
  pair.e_b *= keep;
  return true;
}

}  // namespace lhv
