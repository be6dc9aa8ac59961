#include "egrw/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace egrw {

void WarmupDecaySchedule::validate() const {
  // peak = 0 is accepted: it disables reweighting.
  if (!(peak >= 0.0) || !std::isfinite(peak)) {
    throw std::invalid_argument("schedule: peak must be finite and nonnegative");
  }
  if (warmup_epochs < 0) throw std::invalid_argument("schedule: warmup_epochs must be >= 0");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw std::invalid_argument("schedule: decay_factor must lie in (0, 1]");
  }
  if (decay_interval_epochs < 1) {
    throw std::invalid_argument("schedule: decay_interval must be >= 1");
  }
}

void PowerDecaySchedule::validate() const {
  if (!(eta0 >= 0.0) || !std::isfinite(eta0)) {
    throw std::invalid_argument("schedule: eta0 must be finite and nonnegative");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("schedule: alpha must be finite and nonnegative");
  }
}

double warmup_decay_rate(const WarmupDecaySchedule& sched, std::int64_t epoch) {
  sched.validate();
  if (epoch < 0) throw std::invalid_argument("warmup_decay_rate: epoch must be >= 0");
  if (epoch < sched.warmup_epochs) {
    return sched.peak * (static_cast<double>(epoch) / static_cast<double>(sched.warmup_epochs));
  }
  const std::int64_t steps = (epoch - sched.warmup_epochs) / sched.decay_interval_epochs;
  return sched.peak * std::pow(sched.decay_factor, static_cast<double>(steps));
}

double power_decay_rate(const PowerDecaySchedule& sched, std::int64_t step) {
  sched.validate();
  if (step < 1) throw std::invalid_argument("power_decay_rate: step must be >= 1");
  return sched.eta0 / std::pow(static_cast<double>(step), sched.alpha);
}

}  // namespace egrw
