#include "lhv/detector.hpp"

#include <cmath>
#include <stdexcept>

#include "lhv/errors.hpp"

namespace lhv {

void ArmSettings::validate() const {
  if (!(lo_amplitude > 0.0)) throw ConfigError("arm.lo_amplitude must be > 0");
  if (!(gain > 0.0)) throw ConfigError("arm.gain must be > 0");
  if (!(noise_sigma >= 0.0)) throw ConfigError("arm.noise_sigma must be >= 0");
  if (!(discriminator_threshold >= 0.0))
    throw ConfigError("arm.discriminator_threshold must be >= 0");
  if (!std::isfinite(theta_setting) || !std::isfinite(path_delta))
    throw ConfigError("arm setting must be finite");
}

double effective_phase(double arm_omega, const ArmSettings& s, double alpha) noexcept {
  const double setting = s.mode == SettingMode::phase
                             ? s.theta_setting
                             : arm_omega * s.path_delta / speed_of_light;
  return reduce_phase(setting - alpha);
}

ArmSettings with_nominal_setting(ArmSettings base, double nominal_theta,
                                 double omega_ref) {
  if (base.mode == SettingMode::phase) {
    base.theta_setting = nominal_theta;
  } else {
    const double full_turns = 2.0 * std::numbers::pi * double(base.path_windings);
    base.path_delta = (nominal_theta + full_turns) * speed_of_light / omega_ref;
  }
  return base;
}

ArmOutcome measure_arm(double amplitude, double arm_omega, const ArmSettings& s,
                       double alpha, RandomStream& rng) {
  const double theta_eff = effective_phase(arm_omega, s, alpha);
  const FieldPair f(amplitude, s.lo_amplitude, theta_eff);
  const auto ports = beamsplitter_intensities(f);
  ArmOutcome out;
  out.v_r = s.gain * ports.first + rng.gaussian(s.noise_sigma);
  out.v_t = s.gain * ports.second + rng.gaussian(s.noise_sigma);
  out.x = out.v_r - out.v_t;
  out.sign = digitize(out.x, rng);
  out.discriminated = discriminate(out, s.discriminator_threshold, s.discriminator_mode);
  return out;
}

bool discriminate(const ArmOutcome& o, double threshold, DiscriminatorMode mode) {
  if (!(threshold >= 0.0))
    throw std::invalid_argument("discriminate: threshold must be >= 0");
  if (mode == DiscriminatorMode::difference) return std::fabs(o.x) >= threshold;
  return o.v_r >= threshold && o.v_t >= threshold;
}

}  // namespace lhv
