#include "pforge/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "pforge/image_io.hpp"
#include "pforge/kernels.hpp"

namespace fs = std::filesystem;

namespace pforge {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Rgb parse_rgb(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(where + ": expected [r,g,b]");
  std::uint8_t c[3];
  for (int i = 0; i < 3; ++i) {
    const long long v = j[i].get<long long>();
    if (v < 0 || v > 255) throw SchemaError(where + ": component outside [0,255]");
    c[i] = static_cast<std::uint8_t>(v);
  }
  return {c[0], c[1], c[2]};
}

std::optional<EmbeddingPairFiles> parse_pair_files(const Json& c, const char* key, const char* a,
                                                   const char* b) {
  if (!c.contains(key) || c[key].is_null()) return std::nullopt;
  return EmbeddingPairFiles{c[key].at(a).get<std::string>(), c[key].at(b).get<std::string>()};
}

Mask full_mask(Size s) { return Mask(s.width, s.height, 1); }

Mask load_mask(const EvalCase& c, Size size) {
  if (!c.bg_mask) return full_mask(size);
  Mask m = mask_from_gray(io::read_gray(c.resolve(*c.bg_mask)));
  if (size_of(m) != size) throw InvariantError(c.case_id + ": background mask size mismatch");
  return m;
}

std::optional<double> paired_score(const EvalCase& c, const EmbeddingPairFiles& f) {
  const Embeddings a = read_embeddings(c.resolve(f.crops));
  const Embeddings b = read_embeddings(c.resolve(f.refs));
  if (a.count != b.count || a.dim != b.dim)
    throw InvariantError(c.case_id + ": embedding files disagree on count or dim");
  std::vector<EmbeddingPair> pairs;
  for (int i = 0; i < a.count; ++i) {
    auto ra = a.row(i), rb = b.row(i);
    pairs.push_back({{ra.begin(), ra.end()}, {rb.begin(), rb.end()}});
  }
  return identity_scores(pairs);
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

}  // namespace

std::vector<EvalCase> load_eval_cases(const fs::path& path) {
  Json doc = read_json(path);
  if (doc.is_object()) {
    check_schema_version(doc, "cases");
    doc = doc.at("cases");
  }
  if (!doc.is_array()) throw SchemaError("cases: expected an array");
  std::vector<EvalCase> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& j = doc[i];
    const auto where = "cases[" + std::to_string(i) + "]";
    try {
      EvalCase c;
      c.base_dir = fs::absolute(path).parent_path();
      c.case_id = j.at("case_id").get<std::string>();
      for (const auto& e : j.at("expected_objects"))
        c.expected_objects.push_back({e.at("label").get<std::string>(), e.value("ref_image", std::string())});
      c.caption = j.value("caption", std::string());
      const Json& bg = j.at("background");
      c.background_kind = parse_background_kind(bg.at("kind").get<std::string>());
      if (c.background_kind == BackgroundKind::plain_color) {
        if (bg.contains("color")) c.background_colors.push_back(parse_rgb(bg["color"], where + ".background.color"));
        if (bg.contains("colors"))
          for (const auto& col : bg["colors"]) c.background_colors.push_back(parse_rgb(col, where + ".background.colors"));
        if (c.background_colors.empty() || c.background_colors.size() > 4)
          throw SchemaError(where + ".background: plain_color needs 1..4 colors");
      } else if (c.background_kind == BackgroundKind::photo) {
        c.background_image = bg.at("path").get<std::string>();
      } else {
        throw SchemaError(where + ".background.kind: only plain_color and photo are evaluated");
      }
      c.generated_image = j.at("generated_image").get<std::string>();
      if (j.contains("bg_mask")) c.bg_mask = j["bg_mask"].get<std::string>();
      if (j.contains("detections")) c.detections = j["detections"].get<std::string>();
      c.clip_i = parse_pair_files(j, "clip_i", "crops", "refs");
      c.dino = parse_pair_files(j, "dino", "crops", "refs");
      c.clip_t = parse_pair_files(j, "clip_t", "text", "image");
      out.push_back(std::move(c));
    } catch (const Json::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  return out;
}

MissingResult missing_rate(const std::vector<ExpectedObject>& expected,
                           const std::vector<DetectionRecord>& detections, double conf_threshold) {
  if (expected.empty()) throw InvariantError("missing_rate needs at least one expected object");
  std::vector<int> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return detections[a].confidence > detections[b].confidence;
  });
  std::vector<bool> found(expected.size(), false);
  MissingResult r;
  r.expected = static_cast<int>(expected.size());
  for (int d : order) {
    if (detections[d].confidence < conf_threshold) break;
    const auto label = lower(detections[d].label);
    for (std::size_t e = 0; e < expected.size(); ++e) {
      if (found[e] || lower(expected[e].label) != label) continue;
      found[e] = true;
      r.matches.push_back({static_cast<int>(e), d});
      break;
    }
  }
  r.missing = r.expected - static_cast<int>(r.matches.size());
  std::sort(r.matches.begin(), r.matches.end(),
            [](const Match& a, const Match& b) { return a.expected < b.expected; });
  return r;
}

Rect clamp_box(const Rect& box, Size image) {
  const Rect r = intersect(box, Rect{0, 0, image.width, image.height});
  if (r.empty()) throw InvariantError("detection box has no area inside the image");
  return r;
}

std::vector<CropOrder> prepare_crops(const EvalCase& c, const RgbImage& generated,
                                     const std::vector<DetectionRecord>& detections,
                                     const MissingResult& matched, const fs::path& crop_dir) {
  fs::create_directories(crop_dir);
  std::vector<CropOrder> out;
  for (const auto& m : matched.matches) {
    const Rect r = clamp_box(detections.at(m.detection).box, size_of(generated));
    RgbImage crop(r.w, r.h);
    for (int y = 0; y < r.h; ++y)
      std::memcpy(crop.row(y).data(), generated.at(r.x, r.y + y), static_cast<std::size_t>(r.w) * 3);
    char name[64];
    std::snprintf(name, sizeof name, "_obj%02d.png", m.expected);
    const fs::path file = fs::absolute(crop_dir / (c.case_id + name));
    io::write_png(file, crop);
    const auto& ref = c.expected_objects.at(m.expected).ref_image;
    out.push_back({c.case_id, m.expected, file.string(),
                   ref.empty() ? std::string() : fs::absolute(c.resolve(ref)).string()});
  }
  return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw InvariantError("cosine: vector length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw InvariantError("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::optional<double> identity_scores(const std::vector<EmbeddingPair>& pairs) {
  if (pairs.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& p : pairs) sum += cosine(p.crop, p.ref);
  return sum / static_cast<double>(pairs.size());
}

double mse_bg_unit(std::span<const double> gen, std::span<const double> ref, const Mask& mask) {
  const std::size_t n = mask.pixel_count();
  if (gen.size() != 3 * n || ref.size() != 3 * n) throw InvariantError("mse_bg: size mismatch");
  const long long count = mask_area(mask);
  if (count == 0) throw InvariantError("mse_bg: empty background mask");
  std::vector<std::uint8_t> m3(3 * n);
  for (std::size_t i = 0; i < n; ++i) m3[3 * i] = m3[3 * i + 1] = m3[3 * i + 2] = mask.bytes()[i];
  const double sum = kernels::active().masked_sq_diff(gen.data(), ref.data(), m3.data(), 3 * n);
  return sum / (3.0 * static_cast<double>(count));
}

double mse_bg(const RgbImage& generated, const RgbImage& reference, const Mask& mask) {
  if (size_of(generated) != size_of(reference) || size_of(generated) != size_of(mask))
    throw InvariantError("mse_bg: size mismatch");
  std::vector<double> a(generated.bytes().size()), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = generated.bytes()[i] / 255.0;
    b[i] = reference.bytes()[i] / 255.0;
  }
  return mse_bg_unit(a, b, mask);
}

double chamfer_color(const RgbImage& generated, const Mask& mask, std::span<const Rgb> targets) {
  if (size_of(generated) != size_of(mask)) throw InvariantError("chamfer: size mismatch");
  if (targets.empty()) throw InvariantError("chamfer: no target colors");
  const long long count = mask_area(mask);
  if (count == 0) throw InvariantError("chamfer: empty background mask");
  const std::size_t n = generated.pixel_count();
  std::vector<double> r(n), g(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = generated.bytes()[3 * i];
    g[i] = generated.bytes()[3 * i + 1];
    b[i] = generated.bytes()[3 * i + 2];
  }
  std::vector<double> colors;
  for (const auto& t : targets) colors.insert(colors.end(), {double(t.r), double(t.g), double(t.b)});
  const double sum = kernels::active().masked_min_dist(r.data(), g.data(), b.data(), mask.bytes().data(),
                                                       n, colors.data(), targets.size());
  return sum / static_cast<double>(count);
}

MetricSummary aggregate(const std::vector<MetricRow>& rows) {
  if (rows.empty()) throw InvariantError("aggregate needs at least one row");
  MetricSummary s;
  s.rows = static_cast<int>(rows.size());
  long long expected = 0, missing = 0;
  struct Acc {
    double sum = 0.0;
    int n = 0;
  } ci, di, ct, mse, ch;
  auto add = [](Acc& a, const std::optional<double>& v, int& skipped) {
    if (v) {
      a.sum += *v;
      ++a.n;
    } else {
      ++skipped;
    }
  };
  for (const auto& r : rows) {
    if (r.missing) {
      expected += r.expected;
      missing += *r.missing;
    } else {
      ++s.skipped_missing;
    }
    add(ci, r.clip_i, s.skipped_clip_i);
    add(di, r.dino, s.skipped_dino);
    add(ct, r.clip_t, s.skipped_clip_t);
    if (r.background_kind == BackgroundKind::photo) add(mse, r.mse_bg, s.skipped_mse_bg);
    if (r.background_kind == BackgroundKind::plain_color) add(ch, r.chamfer, s.skipped_chamfer);
  }
  auto mean = [](const Acc& a) { return a.n ? std::optional<double>(a.sum / a.n) : std::nullopt; };
  if (expected > 0) s.missing = static_cast<double>(missing) / static_cast<double>(expected);
  s.clip_i = mean(ci);
  s.dino = mean(di);
  s.clip_t = mean(ct);
  s.mse_bg = mean(mse);
  s.chamfer = mean(ch);
  return s;
}

Embeddings read_embeddings(const fs::path& path) {
  const Json side = read_json(fs::path(path.string() + ".json"));
  Embeddings e;
  try {
    e.dim = side.at("dim").get<int>();
    e.count = side.at("count").get<int>();
    e.source_tag = side.value("source_tag", std::string());
  } catch (const Json::exception& ex) {
    throw SchemaError(path.string() + ".json: " + ex.what());
  }
  if (e.dim <= 0 || e.count < 0) throw SchemaError(path.string() + ".json: invalid dim/count");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::size_t n = static_cast<std::size_t>(e.dim) * e.count;
  std::vector<unsigned char> raw(n * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size() || in.peek() != EOF)
    throw IoError(path.string() + ": size does not match dim*count float32 values");
  e.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t u = std::uint32_t(raw[4 * i]) | std::uint32_t(raw[4 * i + 1]) << 8 |
                            std::uint32_t(raw[4 * i + 2]) << 16 | std::uint32_t(raw[4 * i + 3]) << 24;
    e.values[i] = std::bit_cast<float>(u);
  }
  return e;
}

void write_embeddings(const fs::path& path, const Embeddings& e) {
  if (e.values.size() != static_cast<std::size_t>(e.dim) * e.count)
    throw InvariantError("embedding values do not match dim*count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (float f : e.values) {
    const std::uint32_t u = std::bit_cast<std::uint32_t>(f);
    const unsigned char b[4] = {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8),
                                static_cast<unsigned char>(u >> 16), static_cast<unsigned char>(u >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  if (!out) throw IoError("write failed: " + path.string());
  write_json(fs::path(path.string() + ".json"),
             {{"dim", e.dim}, {"count", e.count}, {"source_tag", e.source_tag}});
}

MetricRow score_case(const EvalCase& c, double conf_threshold) {
  MetricRow row;
  row.case_id = c.case_id;
  row.background_kind = c.background_kind;
  row.expected = static_cast<int>(c.expected_objects.size());
  const RgbImage gen = io::read_rgb(c.resolve(c.generated_image));
  if (c.detections && !c.expected_objects.empty())
    row.missing = missing_rate(c.expected_objects, load_detections(c.resolve(*c.detections)), conf_threshold).missing;
  if (c.clip_i) row.clip_i = paired_score(c, *c.clip_i);
  if (c.dino) row.dino = paired_score(c, *c.dino);
  if (c.clip_t) {
    const Embeddings t = read_embeddings(c.resolve(c.clip_t->crops));
    const Embeddings im = read_embeddings(c.resolve(c.clip_t->refs));
    if (t.count >= 1 && im.count >= 1) row.clip_t = cosine(t.row(0), im.row(0));
  }
  const Mask mask = load_mask(c, size_of(gen));
  if (c.background_kind == BackgroundKind::photo) {
    const RgbImage ref = io::read_rgb(c.resolve(*c.background_image));
    row.mse_bg = mse_bg(gen, ref, mask);
  } else {
    row.chamfer = chamfer_color(gen, mask, c.background_colors);
  }
  return row;
}

Json report_json(const std::vector<MetricRow>& rows, const MetricSummary& s) {
  Json cases = Json::array();
  for (const auto& r : rows)
    cases.push_back({{"case_id", r.case_id},
                     {"background", std::string(to_string(r.background_kind))},
                     {"expected", r.expected},
                     {"missing", r.missing ? Json(*r.missing) : Json()},
                     {"clip_i", opt(r.clip_i)},
                     {"dino", opt(r.dino)},
                     {"clip_t", opt(r.clip_t)},
                     {"mse_bg", opt(r.mse_bg)},
                     {"chamfer", opt(r.chamfer)}});
  Json agg = {{"rows", s.rows},
              {"missing", opt(s.missing)},
              {"clip_i", opt(s.clip_i)},
              {"dino", opt(s.dino)},
              {"clip_t", opt(s.clip_t)},
              {"mse_bg", opt(s.mse_bg)},
              {"chamfer", opt(s.chamfer)},
              {"skipped",
               {{"missing", s.skipped_missing},
                {"clip_i", s.skipped_clip_i},
                {"dino", s.skipped_dino},
                {"clip_t", s.skipped_clip_t},
                {"mse_bg", s.skipped_mse_bg},
                {"chamfer", s.skipped_chamfer}}}};
  return {{"schema", std::string(kSchema)}, {"cases", cases}, {"aggregate", agg}};
}

std::string report_table(const std::vector<MetricRow>& rows, const MetricSummary& s) {
  std::vector<std::vector<std::string>> t;
  t.push_back({"case", "missing", "clip_i", "dino", "clip_t", "mse_bg", "chamfer"});
  for (const auto& r : rows) {
    const std::optional<double> miss =
        r.missing && r.expected ? std::optional<double>(double(*r.missing) / r.expected) : std::nullopt;
    t.push_back({r.case_id, cell(miss), cell(r.clip_i), cell(r.dino), cell(r.clip_t), cell(r.mse_bg),
                 cell(r.chamfer)});
  }
  t.push_back({"ALL", cell(s.missing), cell(s.clip_i), cell(s.dino), cell(s.clip_t), cell(s.mse_bg),
               cell(s.chamfer)});
  std::vector<std::size_t> width(t[0].size(), 0);
  for (const auto& row : t)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::string out;
  for (const auto& row : t) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string pad(width[i] - row[i].size(), ' ');
      out += i == 0 ? row[i] + pad : "  " + pad + row[i];
    }
    out += "\n";
  }
  return out;
}

}  // namespace pforge
