#pragma once

#include <string_view>

namespace vortex {

enum class CurriculumKind { kNone, kLinear, kExponential };

// Difficulty schedule for one augmentation. `epochs_to_max` is M; the
// exponential time constant is tau = M / gamma. The base range is
// [lower, upper).
struct CurriculumSchedule {
  CurriculumKind kind = CurriculumKind::kNone;
  double epochs_to_max = 1.0;
  double gamma = 5.0;
  double lower = 0.0;
  double upper = 0.0;

  void validate() const;
};

// beta(t) in [0, 1]; t is clamped to M so beta stays at 1 afterwards.
// kNone always returns 1.
double curriculum_beta(const CurriculumSchedule& sched, double epoch);

// (1 - exp(-t/tau)) / (1 - exp(-M/tau)), t clamped to [0, M].
double exponential_beta(double epoch, double epochs_to_max, double gamma);

// sigma_H(t) = sigma_L + beta(min(t, M)) (sigma_H - sigma_L)
double schedule_difficulty(const CurriculumSchedule& sched, double epoch);

// Augmentation probability ramp for the supervised-augmentation baseline:
// p(t) = p_max * beta_exp(t), using the schedule's M and gamma.
double schedule_probability(double p_max, double epoch, const CurriculumSchedule& sched);

CurriculumKind parse_curriculum_kind(std::string_view name);
std::string_view to_string(CurriculumKind kind);

}  // namespace vortex
