#pragma once

// Learning-rate schedules for the example-weight updates.

#include <cstdint>

namespace egrw {

/// Linear ramp from 0 at epoch 0 up to `peak` at `warmup_epochs`, then a
/// staircase decay by `decay_factor` every `decay_interval_epochs`.
struct WarmupDecaySchedule {
  double peak = 0.1;
  std::int64_t warmup_epochs = 20;
  double decay_factor = 0.95;
  std::int64_t decay_interval_epochs = 1;

  void validate() const;
};

/// eta0 / t^alpha, for steps t >= 1.
struct PowerDecaySchedule {
  double eta0 = 0.1;
  double alpha = 0.8;

  void validate() const;
};

double warmup_decay_rate(const WarmupDecaySchedule& sched, std::int64_t epoch);
double power_decay_rate(const PowerDecaySchedule& sched, std::int64_t step);

}  // namespace egrw
