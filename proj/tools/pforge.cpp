// pforge: batch generation, detection cleanup, background synthesis,
// metrics and output validation.

#include <cstdlib>
#include <iostream>
#include <regex>

#include <CLI11.hpp>

#include "pforge/background_synth.hpp"
#include "pforge/detect_clean.hpp"
#include "pforge/image_io.hpp"
#include "pforge/metrics.hpp"
#include "pforge/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pforge;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfigError = 2;

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

GenerationConfig resolve_config(const std::string& path) {
  std::string p = path;
  if (p.empty())
    if (const char* env = std::getenv("PLACID_FORGE_CONFIG")) p = env;
  if (p.empty()) return {};
  try {
    return load_config(p);
  } catch (const Error& e) {
    throw ConfigFailure(e.what());
  }
}

Size parse_size(const std::string& text) {
  static const std::regex re(R"((\d+)x(\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigFailure("size must look like WxH, got '" + text + "'");
  return {std::stoi(m[1]), std::stoi(m[2])};
}

Rgb parse_color(const std::string& text) {
  static const std::regex re(R"((\d+),(\d+),(\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigFailure("color must look like R,G,B");
  int c[3];
  for (int i = 0; i < 3; ++i) {
    c[i] = std::stoi(m[i + 1]);
    if (c[i] > 255) throw ConfigFailure("color component above 255");
  }
  return {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]), static_cast<std::uint8_t>(c[2])};
}

int cmd_gen(const std::string& manifests, const std::string& out, const std::string& config,
            std::optional<std::uint64_t> seed, std::optional<int> workers) {
  GenerationConfig cfg = resolve_config(config);
  if (seed) cfg.global_seed = *seed;
  if (workers) cfg.workers = *workers;
  try {
    validate_config(cfg);
  } catch (const Error& e) {
    throw ConfigFailure(e.what());
  }
  const BatchSummary s = run_batch(manifests, out, cfg);
  for (const auto& f : s.failures) std::cerr << "pforge: " << f.manifest << ": " << f.reason << "\n";
  std::cout << "built " << s.built << ", failed " << s.failed << ", elapsed " << s.elapsed_s << " s\n";
  return s.failed ? kPartial : kOk;
}

int cmd_clean(const std::string& detections, const std::string& image_path, const std::string& out,
              const std::string& config) {
  const GenerationConfig cfg = resolve_config(config);
  const RgbImage image = io::read_rgb(image_path);
  const auto records = load_detections(detections);
  const CleanedObjectSet cleaned = clean_detections(records, size_of(image), cfg.clean);
  const fs::path dir = out;
  fs::create_directories(dir / "objects");

  Json objects = Json::array();
  for (std::size_t i = 0; i < cleaned.objects.size(); ++i) {
    const auto& o = cleaned.objects[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "obj_%02zu", i);
    io::write_png(dir / "objects" / (std::string(stem) + ".png"), extract_cutout(image, o.mask));
    io::write_png(dir / "objects" / (std::string(stem) + "_mask.png"), mask_to_gray(o.mask));
    objects.push_back({{"label", o.label},
                       {"confidence", o.confidence},
                       {"sources", o.sources},
                       {"cutout", "objects/" + std::string(stem) + ".png"},
                       {"mask", "objects/" + std::string(stem) + "_mask.png"}});
  }
  Json rejected = Json::array();
  for (const auto& r : cleaned.rejected) rejected.push_back({{"reason", r.reason}, {"indices", r.indices}});
  Json doc = {{"schema", std::string(kSchema)}, {"objects", objects}, {"rejected", rejected}};
  if (!cleaned.objects.empty()) {
    io::write_png(dir / "inpaint_mask.png", mask_to_gray(inpaint_mask(cleaned, cfg.dilation_px)));
    doc["inpaint_mask"] = "inpaint_mask.png";
  }
  write_json(dir / "cleaned.json", doc);
  if (cleaned.objects.empty()) {
    std::cerr << "pforge: no valid detections; image dropped\n";
    return kPartial;
  }
  return kOk;
}

int cmd_bg(const std::string& kind, const std::string& size_text, std::uint64_t seed, const std::string& out,
           const std::string& color, const std::string& photo_dir) {
  const Size size = parse_size(size_text);
  BackgroundSpec spec;
  try {
    spec.kind = parse_background_kind(kind);
  } catch (const Error& e) {
    throw ConfigFailure(e.what());
  }
  if (spec.kind == BackgroundKind::inpainted_original)
    throw ConfigFailure("bg cannot synthesize inpainted_original backgrounds");
  if (spec.kind == BackgroundKind::plain_color)
    spec.color = color.empty() ? random_plain_color(seed) : parse_color(color);
  BackgroundPools pools;
  if (!photo_dir.empty()) pools.photo_dir = fs::path(photo_dir);
  io::write_png(out, pick_background(spec, fs::current_path(), pools, size, seed));
  return kOk;
}

int cmd_metrics_prepare(const std::string& cases_path, const std::string& out, const std::string& config) {
  const GenerationConfig cfg = resolve_config(config);
  const auto cases = load_eval_cases(cases_path);
  const fs::path crop_dir = fs::absolute(fs::path(out)).parent_path() / "crops";
  Json pairs = Json::array();
  int failed = 0;
  for (const auto& c : cases) {
    try {
      if (!c.detections) throw InvariantError("case has no detections file");
      const auto dets = load_detections(c.resolve(*c.detections));
      const auto matched = missing_rate(c.expected_objects, dets, cfg.conf_threshold);
      const RgbImage gen = io::read_rgb(c.resolve(c.generated_image));
      for (const auto& o : prepare_crops(c, gen, dets, matched, crop_dir))
        pairs.push_back({{"case_id", o.case_id}, {"object_index", o.object_index}, {"crop", o.crop}, {"reference", o.reference}});
    } catch (const Error& e) {
      std::cerr << "pforge: " << c.case_id << ": " << e.what() << "\n";
      ++failed;
    }
  }
  write_json(out, {{"schema", std::string(kSchema)}, {"pairs", pairs}});
  return failed ? kPartial : kOk;
}

int cmd_metrics_score(const std::string& cases_path, const std::string& out, const std::string& config) {
  const GenerationConfig cfg = resolve_config(config);
  const auto cases = load_eval_cases(cases_path);
  std::vector<MetricRow> rows;
  int failed = 0;
  for (const auto& c : cases) {
    try {
      rows.push_back(score_case(c, cfg.conf_threshold));
    } catch (const Error& e) {
      std::cerr << "pforge: " << c.case_id << ": " << e.what() << "\n";
      ++failed;
    }
  }
  if (rows.empty()) {
    std::cerr << "pforge: no case could be scored\n";
    return kPartial;
  }
  const MetricSummary s = aggregate(rows);
  write_json(out, report_json(rows, s));
  std::cout << report_table(rows, s);
  return failed ? kPartial : kOk;
}

int cmd_validate(const std::string& dir_text) {
  const fs::path dir = dir_text;
  std::vector<fs::path> samples;
  if (fs::exists(dir / "provenance.json")) {
    samples.push_back(dir);
  } else {
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory() && fs::exists(e.path() / "provenance.json")) samples.push_back(e.path());
    std::sort(samples.begin(), samples.end());
  }
  int bad = 0;
  for (const auto& s : samples) {
    std::vector<std::string> v;
    try {
      const Json prov = read_provenance(s);
      const SampleSpec spec = parse_sample_spec(prov.at("spec"), s);
      v = validate_output(s, spec);
    } catch (const std::exception& e) {
      v.push_back(e.what());
    }
    for (const auto& msg : v) std::cout << s.filename().string() << ": " << msg << "\n";
    if (!v.empty()) ++bad;
  }
  std::cout << samples.size() - bad << " valid, " << bad << " invalid\n";
  return bad ? kPartial : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pforge: synthetic compositing videos and evaluation metrics"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "Generation config JSON (falls back to $PLACID_FORGE_CONFIG)");

  auto* gen = app.add_subcommand("gen", "Render every spec of a manifest directory");
  std::string manifests, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  gen->add_option("--manifests", manifests)->required();
  gen->add_option("--out", out)->required();
  gen->add_option("--config", config);
  gen->add_option("--seed", seed, "Global seed");
  gen->add_option("--workers", workers)->check(CLI::PositiveNumber);

  auto* clean = app.add_subcommand("clean", "Clean grounded detections and emit cutouts + inpaint mask");
  std::string detections, image;
  clean->add_option("--detections", detections)->required();
  clean->add_option("--image", image)->required();
  clean->add_option("--out", out)->required();
  clean->add_option("--config", config);

  auto* bg = app.add_subcommand("bg", "Synthesize one background");
  std::string kind, size, color, photo_dir;
  std::uint64_t bg_seed = 0;
  bg->add_option("--kind", kind)->required();
  bg->add_option("--size", size)->required();
  bg->add_option("--seed", bg_seed);
  bg->add_option("--out", out)->required();
  bg->add_option("--color", color, "R,G,B for plain_color (random when omitted)");
  bg->add_option("--photo-dir", photo_dir);

  auto* metrics = app.add_subcommand("metrics", "Evaluation metrics");
  metrics->require_subcommand(1);
  std::string cases;
  auto* prepare = metrics->add_subcommand("prepare", "Write crops and the encoder work order");
  prepare->add_option("--cases", cases)->required();
  prepare->add_option("--out", out)->required();
  prepare->add_option("--config", config);
  auto* score = metrics->add_subcommand("score", "Score cases into a report");
  score->add_option("--cases", cases)->required();
  score->add_option("--out", out)->required();
  score->add_option("--config", config);

  auto* validate = app.add_subcommand("validate", "Check generated sample directories");
  std::string dir;
  validate->add_option("--dir", dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) return cmd_gen(manifests, out, config, seed, workers);
    if (*clean) return cmd_clean(detections, image, out, config);
    if (*bg) return cmd_bg(kind, size, bg_seed, out, color, photo_dir);
    if (*prepare) return cmd_metrics_prepare(cases, out, config);
    if (*score) return cmd_metrics_score(cases, out, config);
    if (*validate) return cmd_validate(dir);
  } catch (const ConfigFailure& e) {
    std::cerr << "pforge: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "pforge: " << e.what() << "\n";
    return kPartial;
  }
  return kOk;
}
