#pragma once

#include <stdexcept>

namespace lhv {

// Invalid or inconsistent run configuration. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Output path could not be opened or written. CLI exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An estimator's denominator is empty (no event-ready pairs, no observed
// coincidences, all-zero curve). CLI exit code 4.
struct EstimatorUndefined : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lhv
