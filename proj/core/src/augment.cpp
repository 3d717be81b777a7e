#include "vortex/augment.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vortex/error.hpp"
#include "vortex/fft.hpp"

namespace vortex {
namespace {

double step_ulps(double x, int k) {
  const double dir = k > 0 ? HUGE_VAL : -HUGE_VAL;
  for (int i = 0; i < std::abs(k); ++i) x = std::nextafter(x, dir);
  return x;
}

// z * u for |u| == 1, nudged by a few ulps where needed so that
// std::abs(result) == std::abs(z) holds bit-for-bit.
cdouble rotate_preserving_modulus(cdouble z, cdouble u) {
  const cdouble w(z.real() * u.real() - z.imag() * u.imag(),
                  z.real() * u.imag() + z.imag() * u.real());
  const double r = std::abs(z);
  if (std::abs(w) == r) return w;
  for (int radius = 1; radius <= 6; ++radius)
    for (int da = -radius; da <= radius; ++da)
      for (int db = -radius; db <= radius; ++db) {
        if (std::max(std::abs(da), std::abs(db)) != radius) continue;
        const cdouble cand(step_ulps(w.real(), da), step_ulps(w.imag(), db));
        if (std::abs(cand) == r) return cand;
      }
  return w * (r / std::abs(w));
}

}  // namespace

TransformFamily family_of(TransformKind kind) {
  return (kind == TransformKind::kNoise || kind == TransformKind::kMotion)
             ? TransformFamily::kInvariant
             : TransformFamily::kEquivariant;
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "noise") return TransformKind::kNoise;
  if (name == "motion") return TransformKind::kMotion;
  if (name == "flip_h") return TransformKind::kFlipH;
  if (name == "flip_v") return TransformKind::kFlipV;
  if (name == "rot90") return TransformKind::kRot90;
  if (name == "rotate") return TransformKind::kRotate;
  if (name == "translate") return TransformKind::kTranslate;
  if (name == "scale_iso") return TransformKind::kScaleIso;
  if (name == "scale_aniso") return TransformKind::kScaleAniso;
  if (name == "shear") return TransformKind::kShear;
  throw InvalidArgument("unknown transform kind '" + std::string(name) + "'");
}

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kNoise: return "noise";
    case TransformKind::kMotion: return "motion";
    case TransformKind::kFlipH: return "flip_h";
    case TransformKind::kFlipV: return "flip_v";
    case TransformKind::kRot90: return "rot90";
    case TransformKind::kRotate: return "rotate";
    case TransformKind::kTranslate: return "translate";
    case TransformKind::kScaleIso: return "scale_iso";
    case TransformKind::kScaleAniso: return "scale_aniso";
    case TransformKind::kShear: return "shear";
  }
  return "noise";
}

void TransformSpec::validate() const {
  if (family() == TransformFamily::kInvariant)
    VORTEX_REQUIRE(difficulty_lo >= 0.0 && difficulty_lo < difficulty_hi,
                   "transform spec: difficulty range must satisfy 0 <= lo < hi");
  VORTEX_REQUIRE(probability >= 0.0 && probability <= 1.0,
                 "transform spec: probability outside [0, 1]");
  if (curriculum.kind != CurriculumKind::kNone) curriculum.validate();
}

TransformSpec TransformSpec::at_epoch(double epoch) const {
  TransformSpec out = *this;
  CurriculumSchedule sched = curriculum;
  sched.lower = difficulty_lo;
  sched.upper = difficulty_hi;
  out.difficulty_hi = schedule_difficulty(sched, epoch);
  return out;
}

// ---- noise -----------------------------------------------------------------

double noise_reference_rms(const KSpaceTensor& y, const UndersamplingMask& mask) {
  const std::size_t n = mask.height * mask.width;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < y.dim(0); ++c) {
    auto plane = y.plane(c);
    for (std::size_t p = 0; p < n; ++p)
      if (mask.bits[p]) {
        acc += std::norm(plane[p]);
        ++count;
      }
  }
  return count == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(count));
}

KSpaceTensor apply_noise(const KSpaceTensor& y, const UndersamplingMask& mask,
                         const NoiseParams& params) {
  VORTEX_REQUIRE(params.sigma >= 0.0, "apply_noise: sigma must be nonnegative");
  VORTEX_REQUIRE(y.rank() == 3 && y.height() == mask.height && y.width() == mask.width,
                 "apply_noise: k-space and mask disagree");
  if (params.sigma == 0.0) return y;
  const double sigma_eff = params.sigma * noise_reference_rms(y, mask);
  const double component_std = sigma_eff / std::numbers::sqrt2;
  KSpaceTensor out = y;
  KeyedRng rng(params.stream);
  const std::size_t n = mask.height * mask.width;
  for (std::size_t c = 0; c < y.dim(0); ++c) {
    auto plane = out.plane(c);
    for (std::size_t p = 0; p < n; ++p) {
      if (!mask.bits[p]) continue;
      const double re = rng.normal();
      const double im = rng.normal();
      plane[p] += cdouble(component_std * re, component_std * im);
    }
  }
  return out;
}

KSpaceTensor apply_noise(const KSpaceTensor& y, const UndersamplingMask& mask, double sigma,
                         KeyedRng& rng) {
  VORTEX_REQUIRE(sigma >= 0.0, "apply_noise: sigma must be nonnegative");
  return apply_noise(y, mask, NoiseParams{sigma, rng.next_u64()});
}

// ---- motion ----------------------------------------------------------------

MotionParams draw_motion(double alpha, KeyedRng& rng) {
  VORTEX_REQUIRE(alpha >= 0.0, "apply_motion: alpha must be nonnegative");
  MotionParams m;
  m.alpha = alpha;
  m.m_odd = rng.uniform(-1.0, 1.0);
  m.m_even = rng.uniform(-1.0, 1.0);
  return m;
}

KSpaceTensor apply_motion(const KSpaceTensor& y, const MotionParams& params) {
  VORTEX_REQUIRE(params.alpha >= 0.0, "apply_motion: alpha must be nonnegative");
  VORTEX_REQUIRE(y.rank() == 3, "apply_motion: expected C x H x W k-space");
  if (params.alpha == 0.0) return y;
  const double pi = std::numbers::pi;
  const cdouble odd = std::polar(1.0, -pi * params.alpha * params.m_odd);
  const cdouble even = std::polar(1.0, -pi * params.alpha * params.m_even);
  KSpaceTensor out = y;
  const std::size_t h = y.height(), w = y.width();
  for (std::size_t c = 0; c < y.dim(0); ++c)
    for (std::size_t i = 0; i < h; ++i) {
      const cdouble u = (i % 2 == 1) ? odd : even;
      for (std::size_t j = 0; j < w; ++j) {
        cdouble& v = out.at(c, i, j);
        if (v != cdouble{0.0, 0.0}) v = rotate_preserving_modulus(v, u);
      }
    }
  return out;
}

KSpaceTensor apply_motion(const KSpaceTensor& y, double alpha, KeyedRng& rng) {
  return apply_motion(y, draw_motion(alpha, rng));
}

// ---- image transforms --------------------------------------------------------

void validate_image_params(const ImageTransformParams& p) {
  VORTEX_REQUIRE(family_of(p.kind) == TransformFamily::kEquivariant,
                 "image transform: kind is not an image-based transform");
  VORTEX_REQUIRE(std::isfinite(p.angle_deg) && std::isfinite(p.shift_y) &&
                     std::isfinite(p.shift_x) && std::isfinite(p.shear_deg),
                 "image transform: nonfinite parameter");
  VORTEX_REQUIRE(p.scale_y > 0.0 && p.scale_x > 0.0 && std::isfinite(p.scale_y) &&
                     std::isfinite(p.scale_x),
                 "image transform: scale must be positive");
  VORTEX_REQUIRE(std::abs(p.shear_deg) < 90.0, "image transform: shear must be within (-90, 90)");
}

ImageTransformParams draw_image_params(TransformKind kind, std::size_t h, std::size_t w,
                                       const ImageTransformRanges& r, KeyedRng& rng) {
  ImageTransformParams p;
  p.kind = kind;
  switch (kind) {
    case TransformKind::kFlipH:
    case TransformKind::kFlipV:
      break;
    case TransformKind::kRot90:
      p.quarter_turns = 1 + static_cast<int>(rng.below(3));
      break;
    case TransformKind::kRotate:
      p.angle_deg = rng.uniform(-r.max_rotation_deg, r.max_rotation_deg);
      break;
    case TransformKind::kTranslate:
      p.shift_y = rng.uniform(-r.max_translation_frac, r.max_translation_frac) * static_cast<double>(h);
      p.shift_x = rng.uniform(-r.max_translation_frac, r.max_translation_frac) * static_cast<double>(w);
      break;
    case TransformKind::kScaleIso:
      p.scale_y = p.scale_x = rng.uniform(r.scale_lo, r.scale_hi);
      break;
    case TransformKind::kScaleAniso:
      p.scale_y = rng.uniform(r.scale_lo, r.scale_hi);
      p.scale_x = rng.uniform(r.scale_lo, r.scale_hi);
      break;
    case TransformKind::kShear:
      p.shear_deg = rng.uniform(-r.max_shear_deg, r.max_shear_deg);
      break;
    default:
      throw InvalidArgument("image transform: not an image-based transform");
  }
  return p;
}

ResamplingPlan image_plan(const ImageTransformParams& p, std::size_t h, std::size_t w) {
  validate_image_params(p);
  const double deg = std::numbers::pi / 180.0;
  switch (p.kind) {
    case TransformKind::kFlipH:
      return ResamplingPlan::flip_horizontal(h, w);
    case TransformKind::kFlipV:
      return ResamplingPlan::flip_vertical(h, w);
    case TransformKind::kRot90:
      VORTEX_REQUIRE(h == w, "rot90 requires a square image");
      return ResamplingPlan::rotate90(h, p.quarter_turns);
    case TransformKind::kRotate: {
      // Inverse rotation in (row, col) coordinates.
      const double c = std::cos(p.angle_deg * deg), s = std::sin(p.angle_deg * deg);
      const double inv[2][2] = {{c, s}, {-s, c}};
      return ResamplingPlan::affine(h, w, inv, 0.0, 0.0);
    }
    case TransformKind::kTranslate: {
      const double inv[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
      return ResamplingPlan::affine(h, w, inv, -p.shift_y, -p.shift_x);
    }
    case TransformKind::kScaleIso:
    case TransformKind::kScaleAniso: {
      const double inv[2][2] = {{1.0 / p.scale_y, 0.0}, {0.0, 1.0 / p.scale_x}};
      return ResamplingPlan::affine(h, w, inv, 0.0, 0.0);
    }
    case TransformKind::kShear: {
      // Horizontal shear x' = x + tan(phi) y.
      const double inv[2][2] = {{1.0, 0.0}, {-std::tan(p.shear_deg * deg), 1.0}};
      return ResamplingPlan::affine(h, w, inv, 0.0, 0.0);
    }
    default:
      throw InvalidArgument("image transform: not an image-based transform");
  }
}

namespace {

// Centered k-space index reflected through DC: k -> (2 floor(N/2) - k) mod N.
std::size_t reflect(std::size_t k, std::size_t n) { return (2 * (n / 2) + n - k) % n; }

}  // namespace

std::optional<ResamplingPlan> kspace_mask_plan(const ImageTransformParams& p, std::size_t h,
                                               std::size_t w) {
  // An image flip or quarter turn is a reflection or rotation of centered
  // k-space about DC, up to a linear phase. That is how the mask must move.
  std::vector<std::int64_t> sources(h * w);
  auto at = [&](std::size_t i, std::size_t j) { return static_cast<std::int64_t>(i * w + j); };
  switch (p.kind) {
    case TransformKind::kFlipH:
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) sources[i * w + j] = at(i, reflect(j, w));
      break;
    case TransformKind::kFlipV:
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) sources[i * w + j] = at(reflect(i, h), j);
      break;
    case TransformKind::kRot90: {
      VORTEX_REQUIRE(h == w, "rot90 requires a square image");
      const int k = ((p.quarter_turns % 4) + 4) % 4;
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          std::size_t si = i, sj = j;
          for (int t = 0; t < k; ++t) {
            const std::size_t ni = sj, nj = reflect(si, h);
            si = ni;
            sj = nj;
          }
          sources[i * w + j] = at(si, sj);
        }
      break;
    }
    default:
      return std::nullopt;
  }
  return ResamplingPlan::permutation(h, w, sources);
}

std::pair<ComplexTensor, SensitivityMaps> apply_image_transform(
    const ComplexTensor& x, const SensitivityMaps& maps, const ImageTransformParams& params) {
  VORTEX_REQUIRE(x.rank() == 2 && x.dim(0) == maps.height() && x.dim(1) == maps.width(),
                 "apply_image_transform: image and maps disagree on H x W");
  const ResamplingPlan plan = image_plan(params, x.dim(0), x.dim(1));
  return {plan.apply(x), SensitivityMaps(plan.apply(maps.tensor()))};
}

UndersamplingMask transform_mask(const UndersamplingMask& mask,
                                 const ImageTransformParams& params) {
  auto plan = kspace_mask_plan(params, mask.height, mask.width);
  if (!plan) return mask;
  ComplexTensor bits = ComplexTensor::image(mask.height, mask.width);
  for (std::size_t p = 0; p < mask.bits.size(); ++p) bits[p] = mask.bits[p] ? 1.0 : 0.0;
  const ComplexTensor moved = plan->apply(bits);
  UndersamplingMask out = mask;
  for (std::size_t p = 0; p < out.bits.size(); ++p) out.bits[p] = moved[p].real() != 0.0 ? 1 : 0;
  return out;
}

std::pair<KSpaceTensor, ForwardOperator> equivariant_on_kspace(
    const KSpaceTensor& y, const ForwardOperator& op, const ImageTransformParams& params) {
  VORTEX_REQUIRE(y.rank() == 3 && y.dim(0) == op.coils() && y.dim(1) == op.height() &&
                     y.dim(2) == op.width(),
                 "equivariant_on_kspace: k-space does not match operator");
  const ResamplingPlan plan = image_plan(params, op.height(), op.width());
  const ComplexTensor coil_images = plan.apply(ifft2c(y));
  ForwardOperator moved(SensitivityMaps(plan.apply(op.maps().tensor())),
                        transform_mask(op.mask(), params));
  KSpaceTensor out = apply_mask(moved.mask(), fft2c(coil_images));
  return {std::move(out), std::move(moved)};
}

// ---- composition -------------------------------------------------------------

AugmentPlan draw_plan(const std::vector<TransformSpec>& specs, std::size_t h, std::size_t w,
                      const ImageTransformRanges& ranges, KeyedRng& rng) {
  AugmentPlan plan;
  for (const TransformSpec& spec : specs) {
    VORTEX_REQUIRE(spec.difficulty_lo >= 0.0 && spec.difficulty_lo <= spec.difficulty_hi,
                   "transform spec: invalid difficulty range");
    VORTEX_REQUIRE(spec.probability >= 0.0 && spec.probability <= 1.0,
                   "transform spec: probability outside [0, 1]");
    if (!(rng.uniform() < spec.probability)) continue;
    DrawnTransform t;
    t.kind = spec.kind;
    switch (spec.kind) {
      case TransformKind::kNoise:
        t.noise.sigma = rng.uniform(spec.difficulty_lo, spec.difficulty_hi);
        t.noise.stream = rng.next_u64();
        plan.invariant.push_back(t);
        break;
      case TransformKind::kMotion:
        t.motion = draw_motion(rng.uniform(spec.difficulty_lo, spec.difficulty_hi), rng);
        plan.invariant.push_back(t);
        break;
      default:
        t.image = draw_image_params(spec.kind, h, w, ranges, rng);
        plan.equivariant.push_back(t);
        break;
    }
  }
  return plan;
}

ResamplingPlan equivariant_image_plan(const AugmentPlan& plan, std::size_t h, std::size_t w) {
  ResamplingPlan composite = ResamplingPlan::identity(h, w);
  for (const DrawnTransform& t : plan.equivariant)
    composite = image_plan(t.image, h, w).after(composite);
  return composite;
}

AugmentOutput apply_plan(const AugmentPlan& plan, const AugmentInput& input) {
  AugmentOutput out{input.kspace, input.op, input.target};
  if (plan.has_equivariant()) {
    const std::size_t h = input.op.height(), w = input.op.width();
    if (input.fully_sampled) {
      const ResamplingPlan image = equivariant_image_plan(plan, h, w);
      UndersamplingMask mask = input.op.mask();
      for (const DrawnTransform& t : plan.equivariant) mask = transform_mask(mask, t.image);
      out.op = ForwardOperator(SensitivityMaps(image.apply(input.op.maps().tensor())),
                               std::move(mask));
      if (input.target) {
        // Regenerate measurements from the transformed image and maps.
        out.target = image.apply(*input.target);
        out.kspace = forward_apply(out.op, *out.target);
      } else {
        out.kspace = fft2c(image.apply(ifft2c(input.kspace)));
      }
    } else {
      for (const DrawnTransform& t : plan.equivariant) {
        auto [y, op] = equivariant_on_kspace(out.kspace, out.op, t.image);
        out.kspace = std::move(y);
        out.op = std::move(op);
      }
      if (out.target) out.target = equivariant_image_plan(plan, h, w).apply(*out.target);
    }
  }
  out.kspace = apply_mask(out.op.mask(), out.kspace);
  for (const DrawnTransform& t : plan.invariant) {
    if (t.kind == TransformKind::kNoise)
      out.kspace = apply_noise(out.kspace, out.op.mask(), t.noise);
    else
      out.kspace = apply_motion(out.kspace, t.motion);
  }
  return out;
}

AugmentOutput compose(const std::vector<TransformSpec>& specs, const AugmentInput& input,
                      const ImageTransformRanges& ranges, KeyedRng& rng) {
  VORTEX_REQUIRE(!specs.empty(), "compose: empty transform list");
  const AugmentPlan plan = draw_plan(specs, input.op.height(), input.op.width(), ranges, rng);
  return apply_plan(plan, input);
}

}  // namespace vortex
