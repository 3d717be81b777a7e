#include "vortex/config.hpp"

#include <set>
#include <type_traits>

#include <json.hpp>

#include "binary_io.hpp"
#include "vortex/error.hpp"
#include "vortex/parallel.hpp"
#include "vortex/rng.hpp"

namespace vortex {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Object reader that remembers which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidArgument("config: '" + where() + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const json& v = j_.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer())
        throw InvalidArgument("config: '" + child_path(key) + "' must be an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() &&
          v.get<long long>() < 0)
        throw InvalidArgument("config: '" + child_path(key) + "' must be nonnegative");
    }
    try {
      out = v.get<T>();
    } catch (const json::exception&) {
      throw InvalidArgument("config: '" + child_path(key) + "' has the wrong type");
    }
  }

  const json* child(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  // Throws on the first key that was never consumed.
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw InvalidArgument("config: unknown key '" + child_path(key) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_curriculum(const json& j, const std::string& path, CurriculumSchedule& c) {
  Section s(j, path);
  std::string kind = std::string(to_string(c.kind));
  s.get("kind", kind);
  try {
    c.kind = parse_curriculum_kind(kind);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("config: '" + path + ".kind' is not a curriculum kind");
  }
  s.get("epochs_to_max", c.epochs_to_max);
  s.get("gamma", c.gamma);
  s.finish();
}

TransformSpec read_transform(const json& j, const std::string& path) {
  Section s(j, path);
  TransformSpec t;
  std::string kind;
  s.get("kind", kind);
  if (kind.empty()) throw InvalidArgument("config: '" + path + ".kind' is required");
  t.kind = parse_transform_kind(kind);
  std::vector<double> range;
  s.get("range", range);
  if (!range.empty()) {
    if (range.size() != 2) throw InvalidArgument("config: '" + path + ".range' needs [lo, hi]");
    t.difficulty_lo = range[0];
    t.difficulty_hi = range[1];
  }
  s.get("probability", t.probability);
  if (const json* c = s.child("curriculum")) read_curriculum(*c, path + ".curriculum", t.curriculum);
  s.finish();
  return t;
}

PerturbationSpec read_perturbation(const json& j, const std::string& path, std::uint64_t seed) {
  Section s(j, path);
  PerturbationSpec p;
  p.seed = seed;
  std::string kind = "none";
  s.get("name", p.name);
  s.get("kind", kind);
  s.get("level", p.level);
  if (kind == "none")
    p.kind = PerturbationKind::kNone;
  else if (kind == "noise")
    p.kind = PerturbationKind::kNoise;
  else if (kind == "motion")
    p.kind = PerturbationKind::kMotion;
  else
    throw InvalidArgument("config: '" + path + ".kind' must be none, noise or motion");
  if (p.name.empty()) p.name = kind;
  s.finish();
  return p;
}

std::string_view perturbation_kind_name(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::kNone: return "none";
    case PerturbationKind::kNoise: return "noise";
    case PerturbationKind::kMotion: return "motion";
  }
  return "?";
}

ojson curriculum_json(const CurriculumSchedule& c) {
  return {{"kind", to_string(c.kind)}, {"epochs_to_max", c.epochs_to_max}, {"gamma", c.gamma}};
}

}  // namespace

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  c.data.pad_multiple = std::size_t{1} << c.train.model.depth;
  c.perturbations = standard_perturbations(0);
  c.set_seed(0);
  return c;
}

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  data.seed = s;
  train.seed = s;
  for (auto& p : perturbations) p.seed = s;
}

void ExperimentConfig::validate() const {
  data.validate();
  train.validate();
  VORTEX_REQUIRE(data.pad_multiple % (std::size_t{1} << train.model.depth) == 0,
                 "config: data padding must be a multiple of 2^depth");
  for (const auto& p : perturbations) p.validate();
  VORTEX_REQUIRE(!eval_checkpoint.empty(), "config: eval.checkpoint must not be empty");
}

std::string ExperimentConfig::to_json() const {
  ojson j;
  j["seed"] = seed;
  j["output_dir"] = output_dir.generic_string();
  const Geometry& g = data.geometry;
  j["data"] = {{"dir", data_dir.generic_string()},
               {"coils", g.coils},
               {"height", g.height},
               {"width", g.width},
               {"slices", g.slices},
               {"acceleration", data.acceleration},
               {"calibration", {data.calibration.height, data.calibration.width}},
               {"splits",
                {{"train_supervised", data.splits.train_supervised},
                 {"train_unsupervised", data.splits.train_unsupervised},
                 {"val", data.splits.validation},
                 {"test", data.splits.test}}}};
  const ModelConfig& m = train.model;
  j["model"] = {{"depth", m.depth},
                {"base_channels", m.base_channels},
                {"latent_taps", m.latent_taps},
                {"leaky_slope", m.leaky_slope}};
  ojson transforms = ojson::array();
  for (const auto& t : train.transforms)
    transforms.push_back({{"kind", to_string(t.kind)},
                          {"range", {t.difficulty_lo, t.difficulty_hi}},
                          {"probability", t.probability},
                          {"curriculum", curriculum_json(t.curriculum)}});
  const ImageTransformRanges& r = train.ranges;
  j["train"] = {
      {"mode", to_string(train.mode)},
      {"epochs", train.epochs},
      {"batch_size", train.batch_size},
      {"learning_rate", train.adam.learning_rate},
      {"beta1", train.adam.beta1},
      {"beta2", train.adam.beta2},
      {"epsilon", train.adam.epsilon},
      {"weight_decay", train.adam.weight_decay},
      {"lambda", train.loss.lambda},
      {"consistency",
       {{"mode", train.loss.consistency.mode == ConsistencyMode::kLatent ? "latent" : "pixel"},
        {"levels", train.loss.consistency.latent_levels}}},
      {"transforms", transforms},
      {"aug_p_max", train.aug_p_max},
      {"aug_schedule", curriculum_json(train.aug_schedule)},
      {"ranges",
       {{"max_rotation_deg", r.max_rotation_deg},
        {"max_translation_frac", r.max_translation_frac},
        {"scale", {r.scale_lo, r.scale_hi}},
        {"max_shear_deg", r.max_shear_deg}}},
      {"workers", train.workers}};
  ojson perts = ojson::array();
  for (const auto& p : perturbations)
    perts.push_back({{"name", p.name}, {"kind", perturbation_kind_name(p.kind)}, {"level", p.level}});
  j["eval"] = {{"checkpoint", eval_checkpoint}, {"perturbations", perts}};
  return j.dump(2) + "\n";
}

std::uint64_t ExperimentConfig::tag() const {
  // Settings that cannot change results are left out.
  ExperimentConfig canonical = *this;
  canonical.output_dir.clear();
  canonical.train.workers = 0;
  canonical.eval_checkpoint = "best";
  canonical.perturbations.clear();
  const std::string text = canonical.to_json();
  std::uint64_t h = 0;
  for (unsigned char ch : text) h = hash64(h, ch);
  return h;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg = default_experiment_config();
  Section top(root, "");
  std::uint64_t seed = 0;
  top.get("seed", seed);
  std::string out_dir = cfg.output_dir.string();
  top.get("output_dir", out_dir);
  cfg.output_dir = out_dir;

  if (const json* d = top.child("data")) {
    Section s(*d, "data");
    std::string dir = cfg.data_dir.string();
    s.get("dir", dir);
    cfg.data_dir = dir;
    s.get("coils", cfg.data.geometry.coils);
    s.get("height", cfg.data.geometry.height);
    s.get("width", cfg.data.geometry.width);
    s.get("slices", cfg.data.geometry.slices);
    s.get("acceleration", cfg.data.acceleration);
    std::vector<std::size_t> cal;
    s.get("calibration", cal);
    if (!cal.empty()) {
      if (cal.size() != 2) throw InvalidArgument("config: 'data.calibration' needs [h, w]");
      cfg.data.calibration = {cal[0], cal[1]};
    }
    if (const json* sp = s.child("splits")) {
      Section ss(*sp, "data.splits");
      ss.get("train_supervised", cfg.data.splits.train_supervised);
      ss.get("train_unsupervised", cfg.data.splits.train_unsupervised);
      ss.get("val", cfg.data.splits.validation);
      ss.get("test", cfg.data.splits.test);
      ss.finish();
    }
    s.finish();
  }

  if (const json* m = top.child("model")) {
    Section s(*m, "model");
    s.get("depth", cfg.train.model.depth);
    s.get("base_channels", cfg.train.model.base_channels);
    s.get("latent_taps", cfg.train.model.latent_taps);
    s.get("leaky_slope", cfg.train.model.leaky_slope);
    s.finish();
  }
  VORTEX_REQUIRE(cfg.train.model.depth >= 0 && cfg.train.model.depth < 8,
                 "config: model.depth out of range");
  cfg.data.pad_multiple = std::size_t{1} << cfg.train.model.depth;

  bool lambda_given = false;
  if (const json* t = top.child("train")) {
    Section s(*t, "train");
    std::string mode = std::string(to_string(cfg.train.mode));
    s.get("mode", mode);
    cfg.train.mode = parse_train_mode(mode);
    s.get("epochs", cfg.train.epochs);
    s.get("batch_size", cfg.train.batch_size);
    s.get("learning_rate", cfg.train.adam.learning_rate);
    s.get("beta1", cfg.train.adam.beta1);
    s.get("beta2", cfg.train.adam.beta2);
    s.get("epsilon", cfg.train.adam.epsilon);
    s.get("weight_decay", cfg.train.adam.weight_decay);
    lambda_given = s.has("lambda");
    s.get("lambda", cfg.train.loss.lambda);
    if (const json* c = s.child("consistency")) {
      Section cs(*c, "train.consistency");
      std::string cmode = "pixel";
      cs.get("mode", cmode);
      if (cmode == "pixel")
        cfg.train.loss.consistency.mode = ConsistencyMode::kPixel;
      else if (cmode == "latent")
        cfg.train.loss.consistency.mode = ConsistencyMode::kLatent;
      else
        throw InvalidArgument("config: 'train.consistency.mode' must be pixel or latent");
      cs.get("levels", cfg.train.loss.consistency.latent_levels);
      cs.finish();
    }
    if (const json* list = s.child("transforms")) {
      if (!list->is_array()) throw InvalidArgument("config: 'train.transforms' must be a list");
      for (std::size_t i = 0; i < list->size(); ++i)
        cfg.train.transforms.push_back(
            read_transform(list->at(i), "train.transforms[" + std::to_string(i) + "]"));
    }
    s.get("aug_p_max", cfg.train.aug_p_max);
    if (const json* c = s.child("aug_schedule"))
      read_curriculum(*c, "train.aug_schedule", cfg.train.aug_schedule);
    if (const json* r = s.child("ranges")) {
      Section rs(*r, "train.ranges");
      ImageTransformRanges& ranges = cfg.train.ranges;
      rs.get("max_rotation_deg", ranges.max_rotation_deg);
      rs.get("max_translation_frac", ranges.max_translation_frac);
      std::vector<double> scale;
      rs.get("scale", scale);
      if (!scale.empty()) {
        if (scale.size() != 2) throw InvalidArgument("config: 'train.ranges.scale' needs [lo, hi]");
        ranges.scale_lo = scale[0];
        ranges.scale_hi = scale[1];
      }
      rs.get("max_shear_deg", ranges.max_shear_deg);
      rs.finish();
    }
    s.get("workers", cfg.train.workers);
    s.finish();
  }
  if (cfg.train.workers <= 0) cfg.train.workers = 0;

  if (const json* e = top.child("eval")) {
    Section s(*e, "eval");
    s.get("checkpoint", cfg.eval_checkpoint);
    if (const json* list = s.child("perturbations")) {
      if (!list->is_array()) throw InvalidArgument("config: 'eval.perturbations' must be a list");
      cfg.perturbations.clear();
      for (std::size_t i = 0; i < list->size(); ++i)
        cfg.perturbations.push_back(read_perturbation(
            list->at(i), "eval.perturbations[" + std::to_string(i) + "]", seed));
    }
    s.finish();
  }
  top.finish();
  cfg.set_seed(seed);

  if (cfg.train.mode == TrainMode::kSupervised) {
    if (lambda_given) cfg.warnings.push_back("lambda ignored in supervised mode");
    if (!cfg.train.transforms.empty())
      cfg.warnings.push_back("transforms ignored in supervised mode");
  }
  if (cfg.train.mode == TrainMode::kAugment && lambda_given)
    cfg.warnings.push_back("lambda ignored in aug mode");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw IoError("config file '" + path.string() + "' not found");
  const auto bytes = detail::read_file(path);
  return parse_experiment_config(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace vortex
