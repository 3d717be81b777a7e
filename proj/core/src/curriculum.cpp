#include "vortex/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vortex/error.hpp"

namespace vortex {

void CurriculumSchedule::validate() const {
  if (kind != CurriculumKind::kNone) {
    VORTEX_REQUIRE(epochs_to_max > 0.0, "curriculum: M must be positive");
    VORTEX_REQUIRE(kind != CurriculumKind::kExponential || gamma > 0.0,
                   "curriculum: gamma must be positive");
  }
  VORTEX_REQUIRE(lower >= 0.0 && lower <= upper, "curriculum: need 0 <= lower <= upper");
}

double exponential_beta(double epoch, double epochs_to_max, double gamma) {
  VORTEX_REQUIRE(epochs_to_max > 0.0, "curriculum: M must be positive");
  VORTEX_REQUIRE(gamma > 0.0, "curriculum: gamma must be positive");
  VORTEX_REQUIRE(epoch >= 0.0, "curriculum: epoch must be nonnegative");
  const double t = std::min(epoch, epochs_to_max);
  const double tau = epochs_to_max / gamma;
  if (t == epochs_to_max) return 1.0;
  return -std::expm1(-t / tau) / -std::expm1(-epochs_to_max / tau);
}

double curriculum_beta(const CurriculumSchedule& sched, double epoch) {
  VORTEX_REQUIRE(epoch >= 0.0, "curriculum: epoch must be nonnegative");
  switch (sched.kind) {
    case CurriculumKind::kNone:
      return 1.0;
    case CurriculumKind::kLinear:
      VORTEX_REQUIRE(sched.epochs_to_max > 0.0, "curriculum: M must be positive");
      return std::min(epoch, sched.epochs_to_max) / sched.epochs_to_max;
    case CurriculumKind::kExponential:
      return exponential_beta(epoch, sched.epochs_to_max, sched.gamma);
  }
  return 1.0;
}

double schedule_difficulty(const CurriculumSchedule& sched, double epoch) {
  const double beta = curriculum_beta(sched, epoch);
  if (beta == 1.0) return sched.upper;
  return sched.lower + beta * (sched.upper - sched.lower);
}

double schedule_probability(double p_max, double epoch, const CurriculumSchedule& sched) {
  VORTEX_REQUIRE(p_max >= 0.0 && p_max <= 1.0, "probability schedule: p_max outside [0, 1]");
  return p_max * exponential_beta(epoch, sched.epochs_to_max, sched.gamma);
}

CurriculumKind parse_curriculum_kind(std::string_view name) {
  if (name == "none") return CurriculumKind::kNone;
  if (name == "linear") return CurriculumKind::kLinear;
  if (name == "exponential") return CurriculumKind::kExponential;
  throw InvalidArgument("unknown curriculum kind '" + std::string(name) + "'");
}

std::string_view to_string(CurriculumKind kind) {
  switch (kind) {
    case CurriculumKind::kNone: return "none";
    case CurriculumKind::kLinear: return "linear";
    case CurriculumKind::kExponential: return "exponential";
  }
  return "none";
}

}  // namespace vortex
