#pragma once
// Statistical reductions over the simulated pipeline: phase-averaged
// voltage-difference histograms, phase-vs-difference scatter, singles rates
// and coincidence curves.
//
// Every trial gets its own derived random stream, split into fixed lanes
// (source, arm A, arm B, applied setting). Reductions over trial index
// ranges are therefore independent of how the ranges are scheduled, which is
// what makes the multi-worker runner reproducible.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lhv/belltest.hpp"
#include "lhv/detector.hpp"
#include "lhv/rng.hpp"
#include "lhv/source.hpp"

namespace lhv {

// Substream lanes under one trial stream.
inline constexpr std::uint64_t kLaneSource = 0;
inline constexpr std::uint64_t kLaneArmA = 1;
inline constexpr std::uint64_t kLaneArmB = 2;
inline constexpr std::uint64_t kLaneSetting = 3;

struct Histogram {
  std::vector<double> edges;          // bins + 1, strictly increasing
  std::vector<std::uint64_t> counts;  // one per bin; top edge inclusive
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;
  std::uint64_t n_total = 0;

  void add(double x);
  Histogram& operator+=(const Histogram& o);  // requires identical edges
};

Histogram make_histogram(double lo, double hi, std::size_t bins);

struct CurvePoint {
  double theta = 0.0;     // grid angle this point was measured at
  double rate = 0.0;      // probability estimate in [0, 1]
  double se = 0.0;        // binomial standard error sqrt(rate*(1-rate)/n)
  std::uint64_t n = 0;    // event-ready trials behind the estimate
};

// Uniform grid of n points on (-pi, pi) with a quarter-step offset,
// theta_k = -pi + (k + 3/4) * 2pi/n. The offset provably never lands on an
// integer multiple of pi, for any n.
std::vector<double> default_theta_grid(std::size_t n);

// Nominal full-swing difference voltage gain * 2 * E[e] * E_L used for
// default histogram ranges and threshold sweeps.
double expected_x_max(const SourceConfig& src, const ArmSettings& arm);

enum class ScatterMode { random, ramp };

// --- range accumulators (the building blocks the runner parallelizes) ---

// Coincidences for trials [t_begin, t_end) of one setting-pair unit stream.
// Arm settings must already carry their authoritative setting. When
// use_discriminator is set, only trials passing both arms' discriminators are
// recorded as coincidences (event-ready count is kept either way).
CoincidenceCounts accumulate_coincidences(const SourceConfig& src,
                                          const ArmSettings& arm_a,
                                          const ArmSettings& arm_b,
                                          std::uint64_t t_begin, std::uint64_t t_end,
                                          const RandomStream& unit_stream,
                                          bool use_discriminator);

// One single-arm measurement (arm A, no event-ready tap): applied theta is
// drawn uniformly when fixed_theta is NaN, otherwise fixed.
struct SingleArmTrial {
  double theta_applied;
  double x;
  int sign;
};
SingleArmTrial single_arm_trial(const SourceConfig& src, const ArmSettings& arm,
                                std::uint64_t trial_index,
                                const RandomStream& unit_stream,
                                double fixed_theta);

void accumulate_histogram(const SourceConfig& src, const ArmSettings& arm,
                          std::uint64_t t_begin, std::uint64_t t_end,
                          const RandomStream& unit_stream, Histogram& into);

// Writes rows [t_begin, t_end) of the scatter into `out`, which must span the
// full n_trials so that row order is independent of scheduling.
void accumulate_scatter(const SourceConfig& src, const ArmSettings& arm,
                        std::uint64_t t_begin, std::uint64_t t_end,
                        std::uint64_t n_trials, ScatterMode mode,
                        const RandomStream& unit_stream,
                        std::span<std::pair<double, double>> out);

// --- whole reductions ---

Histogram phase_averaged_histogram(const SourceConfig& src, const ArmSettings& arm,
                                   std::uint64_t n_trials, std::size_t bins,
                                   const RandomStream& stream);

std::vector<std::pair<double, double>> scatter_vs_phase(const SourceConfig& src,
                                                        const ArmSettings& arm,
                                                        std::uint64_t n_trials,
                                                        ScatterMode mode,
                                                        const RandomStream& stream);

std::vector<CurvePoint> singles_rate(const SourceConfig& src, const ArmSettings& arm,
                                     std::span<const double> theta_grid,
                                     std::uint64_t n_per_point,
                                     const RandomStream& stream);

struct CoincidenceCurves {
  double theta_a = 0.0;
  std::vector<CurvePoint> pp, pm, mp, mm;  // parallel to the theta_b grid
};

CoincidenceCurves coincidence_curve(const SourceConfig& src,
                                    const ArmSettings& arm_a,
                                    const ArmSettings& arm_b, double theta_a,
                                    std::span<const double> theta_b_grid,
                                    std::uint64_t n_per_point,
                                    const RandomStream& stream);

}  // namespace lhv
