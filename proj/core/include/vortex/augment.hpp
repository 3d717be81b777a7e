#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vortex/curriculum.hpp"
#include "vortex/forward.hpp"
#include "vortex/image_transform.hpp"
#include "vortex/rng.hpp"

namespace vortex {

enum class TransformKind {
  kNoise,
  kMotion,
  kFlipH,
  kFlipV,
  kRot90,
  kRotate,
  kTranslate,
  kScaleIso,
  kScaleAniso,
  kShear,
};

enum class TransformFamily { kInvariant, kEquivariant };

TransformFamily family_of(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);
std::string_view to_string(TransformKind kind);

// Declarative augmentation. For noise the difficulty is sigma, for motion it
// is alpha; image transforms draw their parameters from ImageTransformRanges
// and ignore the difficulty range.
struct TransformSpec {
  TransformKind kind = TransformKind::kNoise;
  double difficulty_lo = 0.0;
  double difficulty_hi = 0.0;
  double probability = 1.0;
  CurriculumSchedule curriculum;

  TransformFamily family() const { return family_of(kind); }
  void validate() const;

  // Copy whose difficulty range is [lo, sigma_H(epoch)) under the curriculum.
  TransformSpec at_epoch(double epoch) const;
};

// Parameter ranges for image-based transforms.
struct ImageTransformRanges {
  double max_rotation_deg = 15.0;
  double max_translation_frac = 0.08;
  double scale_lo = 0.9;
  double scale_hi = 1.1;
  double max_shear_deg = 10.0;
};

struct NoiseParams {
  double sigma = 0.0;
  std::uint64_t stream = 0;  // seeds the Gaussian draws
};

struct MotionParams {
  double alpha = 0.0;
  double m_odd = 0.0;
  double m_even = 0.0;
};

struct ImageTransformParams {
  TransformKind kind = TransformKind::kFlipH;
  int quarter_turns = 0;
  double angle_deg = 0.0;
  double shift_y = 0.0;  // pixels
  double shift_x = 0.0;
  double scale_y = 1.0;
  double scale_x = 1.0;
  double shear_deg = 0.0;
};

// One concrete, fully parameterized transform.
struct DrawnTransform {
  TransformKind kind = TransformKind::kNoise;
  NoiseParams noise;
  MotionParams motion;
  ImageTransformParams image;

  TransformFamily family() const { return family_of(kind); }
};

// The selected transforms for one example, in application order (all
// equivariant first, then all invariant).
struct AugmentPlan {
  std::vector<DrawnTransform> equivariant;
  std::vector<DrawnTransform> invariant;

  bool empty() const { return equivariant.empty() && invariant.empty(); }
  bool has_equivariant() const { return !equivariant.empty(); }
};

// ---- physics-driven (invariant) ------------------------------------------

// y + eps, eps_c = Omega .* eta_c with eta complex Gaussian of per-component
// std sigma_eff / sqrt(2), sigma_eff = sigma * RMS(|y| over acquired entries).
KSpaceTensor apply_noise(const KSpaceTensor& y, const UndersamplingMask& mask,
                         const NoiseParams& params);
KSpaceTensor apply_noise(const KSpaceTensor& y, const UndersamplingMask& mask, double sigma,
                         KeyedRng& rng);
double noise_reference_rms(const KSpaceTensor& y, const UndersamplingMask& mask);

// Rows with odd index get exp(-j pi alpha m_odd), even rows
// exp(-j pi alpha m_even). Entry magnitudes are preserved bit-exactly.
KSpaceTensor apply_motion(const KSpaceTensor& y, const MotionParams& params);
KSpaceTensor apply_motion(const KSpaceTensor& y, double alpha, KeyedRng& rng);
MotionParams draw_motion(double alpha, KeyedRng& rng);

// ---- image-based (equivariant) --------------------------------------------

ImageTransformParams draw_image_params(TransformKind kind, std::size_t h, std::size_t w,
                                       const ImageTransformRanges& ranges, KeyedRng& rng);
void validate_image_params(const ImageTransformParams& params);

// Image-domain resampling plan for the transform.
ResamplingPlan image_plan(const ImageTransformParams& params, std::size_t h, std::size_t w);
// Matching permutation of centered k-space for grid-exact flips and quarter
// turns; std::nullopt for transforms whose mask is reused unchanged.
std::optional<ResamplingPlan> kspace_mask_plan(const ImageTransformParams& params,
                                               std::size_t h, std::size_t w);

// Same spatial transform applied to the image and to every coil map.
std::pair<ComplexTensor, SensitivityMaps> apply_image_transform(
    const ComplexTensor& x, const SensitivityMaps& maps, const ImageTransformParams& params);

UndersamplingMask transform_mask(const UndersamplingMask& mask,
                                 const ImageTransformParams& params);

// Per-coil ifft2c, transform coil images and maps, fft2c, re-mask.
std::pair<KSpaceTensor, ForwardOperator> equivariant_on_kspace(
    const KSpaceTensor& y, const ForwardOperator& op, const ImageTransformParams& params);

// ---- composition ----------------------------------------------------------

// Selects each spec independently with its probability and draws its
// parameters. Difficulties are sampled uniformly from [lo, hi).
AugmentPlan draw_plan(const std::vector<TransformSpec>& specs, std::size_t h, std::size_t w,
                      const ImageTransformRanges& ranges, KeyedRng& rng);

struct AugmentInput {
  KSpaceTensor kspace;
  ForwardOperator op;
  bool fully_sampled = false;
  std::optional<ComplexTensor> target;  // ground truth, transformed alongside
};

struct AugmentOutput {
  KSpaceTensor kspace;  // always undersampled with op.mask()
  ForwardOperator op;
  std::optional<ComplexTensor> target;
};

// Equivariant transforms first (image domain, before undersampling when the
// input is fully sampled), then undersampling, then invariant transforms on
// the undersampled k-space.
AugmentOutput apply_plan(const AugmentPlan& plan, const AugmentInput& input);
AugmentOutput compose(const std::vector<TransformSpec>& specs, const AugmentInput& input,
                      const ImageTransformRanges& ranges, KeyedRng& rng);

// Composite image-domain transform of a plan's equivariant part.
ResamplingPlan equivariant_image_plan(const AugmentPlan& plan, std::size_t h, std::size_t w);

}  // namespace vortex
