#pragma once
// One analyser arm: local-oscillator phase setting, balanced homodyne
// measurement, digitisation, and the optional pulse discriminator.
//
// The analyser setting is either a direct LO phase (phase mode) or a path
// length difference (path mode) whose phase is arm_omega * path_delta / c.
// Only arm-local state enters a measurement: the pair's amplitude and hidden
// phase, this arm's settings, and this arm's noise stream.

#include <cstddef>

#include "lhv/rng.hpp"
#include "lhv/wavefield.hpp"

namespace lhv {

enum class SettingMode { phase, path };
enum class DiscriminatorMode { difference, per_channel };

// Speed of light in the simulator's unit system. Path lengths are quoted in
// units where c = 1, so a path difference L delays the phase by omega * L.
inline constexpr double speed_of_light = 1.0;

struct ArmSettings {
  SettingMode mode = SettingMode::phase;  // which setting field is authoritative
  double theta_setting = 0.0;             // LO phase, radians (phase mode)
  double path_delta = 0.0;                // path difference (path mode)
  std::size_t path_windings = 0;          // whole wavelengths folded into nominal settings
  double lo_amplitude = 1.0;              // > 0
  double gain = 1.0;                      // volts per unit intensity, > 0
  double noise_sigma = 0.0;               // per-photodetector voltage noise, >= 0
  double discriminator_threshold = 0.0;   // >= 0; used by the loophole sweep only
  DiscriminatorMode discriminator_mode = DiscriminatorMode::difference;

  void validate() const;  // throws ConfigError
};

struct ArmOutcome {
  double v_r = 0.0;          // gain * i_r + noise
  double v_t = 0.0;          // gain * i_t + noise
  double x = 0.0;            // v_r - v_t
  int sign = +1;             // digitize(x)
  bool discriminated = true; // pulse passed this arm's discriminator
};

// theta_eff = reduce(theta_authoritative - alpha); in path mode the
// authoritative setting is arm_omega * path_delta / c.
double effective_phase(double arm_omega, const ArmSettings& s, double alpha) noexcept;

// Translate a nominal phase setting into the authoritative field of `base`:
// phase mode stores it directly, path mode realizes it as
// path_delta = (nominal + 2 pi * path_windings) * c / omega_ref.
ArmSettings with_nominal_setting(ArmSettings base, double nominal_theta,
                                 double omega_ref);

// Measure one arm: mix with the LO at theta_eff, apply gain and independent
// per-photodetector noise, difference, digitise. Noise-free, sign == +1
// exactly when theta_eff lies in (0, pi).
ArmOutcome measure_arm(double amplitude, double arm_omega, const ArmSettings& s,
                       double alpha, RandomStream& rng);

// Pulse discriminator. difference mode registers |x| >= threshold;
// per_channel mode requires both voltages to reach the threshold.
// threshold == 0 registers everything.
bool discriminate(const ArmOutcome& o, double threshold,
                  DiscriminatorMode mode = DiscriminatorMode::difference);

}  // namespace lhv
