#include "formeclust/synth.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "formeclust/csv.hpp"
#include "formeclust/error.hpp"

namespace formeclust {

using json = nlohmann::json;

int sheet_side_count(const SynthSpec& spec) {
  return spec.n_gatherings * static_cast<int>(imposition_table(spec.format, spec.leaves_per_gathering).size());
}

void validate(const SynthSpec& spec) {
  if (spec.n_formes < 1) throw ConfigError("n_formes must be at least 1");
  if (spec.n_gatherings < 1) throw ConfigError("n_gatherings must be at least 1");
  if (spec.title_height < 4) throw ConfigError("title_height must be at least 4");
  if (spec.title_width < 40) throw ConfigError("title_width must be at least 40");
  const auto& n = spec.noise;
  if (!(n.offset_max_frac >= 0.0 && n.offset_max_frac <= 0.2)) throw ConfigError("offset_max_frac must be in [0, 0.2]");
  if (!(n.pixel_noise_sd >= 0.0)) throw ConfigError("pixel_noise_sd must be nonnegative");
  if (!(n.inking_scale_min > 0.0 && n.inking_scale_min <= n.inking_scale_max)) {
    throw ConfigError("inking scale range must satisfy 0 < min <= max");
  }
  const int sides = sheet_side_count(spec);  // also validates the imposition
  if (!spec.forme_schedule.empty()) {
    if (static_cast<int>(spec.forme_schedule.size()) != sides) {
      throw ConfigError("forme_schedule has " + std::to_string(spec.forme_schedule.size()) + " entries, book has " +
                        std::to_string(sides) + " sheet sides");
    }
    for (int f : spec.forme_schedule) {
      if (f < 0 || f >= spec.n_formes) throw ConfigError("forme_schedule entry " + std::to_string(f) + " out of range");
    }
  }
}

SynthSpec parse_synth_spec(std::string_view json_text) {
  SynthSpec spec;
  try {
    const auto doc = json::parse(json_text);
    spec.format = Format::from_name(doc.at("format").get<std::string>());
    spec.leaves_per_gathering = doc.at("leaves_per_gathering").get<int>();
    spec.n_gatherings = doc.at("n_gatherings").get<int>();
    spec.n_formes = doc.at("n_formes").get<int>();
    spec.title_width = doc.value("title_width", spec.title_width);
    spec.title_height = doc.value("title_height", spec.title_height);
    if (doc.contains("forme_schedule")) {
      const auto& s = doc.at("forme_schedule");
      if (s.is_string()) {
        if (s.get<std::string>() != "round_robin") throw ConfigError("forme_schedule must be 'round_robin' or an array");
      } else {
        spec.forme_schedule = s.get<std::vector<int>>();
      }
    }
    if (doc.contains("noise")) {
      const auto& n = doc.at("noise");
      spec.noise.offset_max_frac = n.value("offset_max_frac", 0.0);
      spec.noise.pixel_noise_sd = n.value("pixel_noise_sd", 0.0);
      if (n.contains("inking_scale_range")) {
        const auto r = n.at("inking_scale_range").get<std::vector<double>>();
        if (r.size() != 2) throw ConfigError("inking_scale_range must have two entries");
        spec.noise.inking_scale_min = r[0];
        spec.noise.inking_scale_max = r[1];
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid synth spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

namespace {

// A glyph is a run of ink columns; each value is the inked fraction of the x-height.
struct Glyph {
  std::vector<double> columns;
};

struct LatentTitle {
  std::vector<Glyph> glyphs;
  std::vector<int> gaps;  // gaps[i] follows glyphs[i]; last entry unused

  bool operator==(const LatentTitle& o) const {
    if (gaps != o.gaps || glyphs.size() != o.glyphs.size()) return false;
    for (std::size_t i = 0; i < glyphs.size(); ++i) {
      if (glyphs[i].columns != o.glyphs[i].columns) return false;
    }
    return true;
  }

  int width() const {
    int w = 0;
    for (std::size_t i = 0; i < glyphs.size(); ++i) {
      w += static_cast<int>(glyphs[i].columns.size());
      if (i + 1 < glyphs.size()) w += gaps[i];
    }
    return w;
  }
};

constexpr double kStrokeLevels[] = {0.3, 0.5, 0.7, 0.9, 1.0};

Glyph random_glyph(Rng& rng) {
  Glyph g;
  const int width = 4 + static_cast<int>(uniform_index(rng, 5));
  for (int c = 0; c < width; ++c) g.columns.push_back(kStrokeLevels[uniform_index(rng, std::size(kStrokeLevels))]);
  return g;
}

// Base text of a running title, filling roughly `target` columns.
LatentTitle random_text(Rng& rng, int target) {
  LatentTitle t;
  int width = 0;
  int until_space = 3 + static_cast<int>(uniform_index(rng, 5));
  while (true) {
    Glyph g = random_glyph(rng);
    const int gap = --until_space == 0 ? 7 + static_cast<int>(uniform_index(rng, 3)) : 2 + static_cast<int>(uniform_index(rng, 2));
    if (until_space == 0) until_space = 3 + static_cast<int>(uniform_index(rng, 5));
    if (width + static_cast<int>(g.columns.size()) > target && !t.glyphs.empty()) break;
    width += static_cast<int>(g.columns.size()) + gap;
    t.glyphs.push_back(std::move(g));
    t.gaps.push_back(gap);
  }
  return t;
}

// Probabilities of a per-setting change, applied independently to each gap
// or glyph of the base text.
constexpr double kGapChange = 0.5;
constexpr double kWidthChange = 0.25;
constexpr double kAnatomyChange = 0.25;

// One physical setting of a title: same glyph sequence, its own spacing,
// glyph widths and damaged or substituted sorts.
LatentTitle kerning_variant(const LatentTitle& base, Rng& rng) {
  LatentTitle t = base;
  for (std::size_t i = 0; i + 1 < t.gaps.size(); ++i) {
    if (uniform01(rng) < kGapChange) {
      const int mag = 1 + static_cast<int>(uniform_index(rng, 2));
      const int delta = uniform01(rng) < 0.5 ? -mag : mag;
      t.gaps[i] = std::max(1, t.gaps[i] + delta);
    }
  }
  for (auto& g : t.glyphs) {
    if (uniform01(rng) < kAnatomyChange) {
      auto& col = g.columns[uniform_index(rng, g.columns.size())];
      col = kStrokeLevels[uniform_index(rng, std::size(kStrokeLevels))];
    }
    if (uniform01(rng) >= kWidthChange) continue;
    const auto mid = g.columns.begin() + static_cast<std::ptrdiff_t>(g.columns.size() / 2);
    if (uniform01(rng) < 0.5 && g.columns.size() > 3) {
      g.columns.erase(mid);
    } else {
      g.columns.insert(mid, *mid);
    }
  }
  return t;
}

TitleImage render(const LatentTitle& t, int start, int width, int height) {
  TitleImage img(height, width, 0.0);
  const int margin_bottom = std::max(1, height / 8);
  const int x_height = height - 2 * margin_bottom;
  int x = start;
  for (std::size_t i = 0; i < t.glyphs.size(); ++i) {
    for (double frac : t.glyphs[i].columns) {
      const int ink = std::max(1, static_cast<int>(std::lround(frac * x_height)));
      if (x >= 0 && x < width) {
        for (int r = height - margin_bottom - ink; r < height - margin_bottom; ++r) img.at(r, x) = 1.0;
      }
      ++x;
    }
    if (i + 1 < t.glyphs.size()) x += t.gaps[i];
  }
  return img;
}

int draw_shift(const NoiseParams& noise, int width, Rng& rng) {
  const int max_shift = static_cast<int>(std::floor(noise.offset_max_frac * width));
  if (max_shift <= 0) return 0;
  return static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(2 * max_shift + 1))) - max_shift;
}

double draw_scale(const NoiseParams& noise, Rng& rng) {
  if (noise.inking_scale_min == noise.inking_scale_max) return noise.inking_scale_min;
  return uniform_real(rng, noise.inking_scale_min, noise.inking_scale_max);
}

double noisy(double v, double scale, const NoiseParams& noise, Rng& rng) {
  double out = v * scale;
  if (noise.pixel_noise_sd > 0.0) out += noise.pixel_noise_sd * standard_normal(rng);
  return std::clamp(out, 0.0, 1.0);
}

}  // namespace

InkProfile shift_profile(const InkProfile& profile, int s) {
  InkProfile out;
  const auto w = static_cast<int>(profile.values.size());
  out.values.assign(profile.values.size(), 0.0);
  for (int j = 0; j < w; ++j) {
    const int src = j - s;
    if (src >= 0 && src < w) out.values[static_cast<std::size_t>(j)] = profile.values[static_cast<std::size_t>(src)];
  }
  return out;
}

InkProfile perturb_profile(const InkProfile& profile, const NoiseParams& noise, std::uint64_t seed) {
  Rng rng(seed);
  const int s = draw_shift(noise, static_cast<int>(profile.values.size()), rng);
  const double scale = draw_scale(noise, rng);
  InkProfile out = shift_profile(profile, s);
  for (auto& v : out.values) v = noisy(v, scale, noise, rng);
  return out;
}

TitleImage perturb_image(const TitleImage& img, const NoiseParams& noise, Rng& rng) {
  const int s = draw_shift(noise, img.width, rng);
  const double scale = draw_scale(noise, rng);
  TitleImage out(img.height, img.width, 0.0);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const int src = c - s;
      const double v = src >= 0 && src < img.width ? img.at(r, src) : 0.0;
      out.at(r, c) = noisy(v, scale, noise, rng);
    }
  }
  return out;
}

namespace {

// Snap ink to the levels an 8-bit greyscale PNG can hold, so in-memory books
// equal what write_synth_book puts on disk.
TitleImage to_8bit(TitleImage img) {
  for (auto& v : img.pixels) v = static_cast<double>(255 - std::lround(255.0 - 255.0 * v)) / 255.0;
  return img;
}

}  // namespace

SynthBook generate_book(const SynthSpec& spec, std::uint64_t seed) {
  validate(spec);
  const int pps = spec.format.pages_per_sheet_side();
  // Independent streams: latent type settings never depend on noise settings.
  Rng latent_rng(seed);
  Rng noise_rng(seed ^ 0x9E3779B97F4A7C15ULL);

  // Rectos and versos carry different title text; every (forme, position)
  // is its own setting of that text.
  const int target = spec.title_width * 3 / 5;
  const LatentTitle recto_text = random_text(latent_rng, target);
  const LatentTitle verso_text = random_text(latent_rng, target);
  const int recto_slots = pps / 2;

  std::vector<std::vector<TitleImage>> renders(static_cast<std::size_t>(spec.n_formes));
  std::vector<LatentTitle> settings;
  for (int f = 0; f < spec.n_formes; ++f) {
    for (int k = 0; k < pps; ++k) {
      const LatentTitle& base = k < recto_slots ? recto_text : verso_text;
      LatentTitle variant;
      // Every setting starts at the same column as its base text.
      const int start = (spec.title_width - base.width()) / 2;
      for (int attempt = 0;; ++attempt) {
        if (attempt > 1000) throw ConfigError("cannot draw distinct title settings; widen title_width");
        variant = kerning_variant(base, latent_rng);
        if (start + variant.width() > spec.title_width) continue;
        if (std::find(settings.begin(), settings.end(), variant) == settings.end()) break;
      }
      settings.push_back(variant);
      renders[static_cast<std::size_t>(f)].push_back(render(variant, start, spec.title_width, spec.title_height));
    }
  }

  SynthBook book;
  auto& m = book.manifest;
  m.title = "synthetic " + std::string(spec.format.name());
  m.format = spec.format;
  m.leaves_per_gathering = spec.leaves_per_gathering;
  const int pages_per_gathering = 2 * spec.leaves_per_gathering;
  for (int g = 0; g < spec.n_gatherings; ++g) {
    Gathering gathering;
    gathering.id = signature_label(g);
    gathering.leaves = spec.leaves_per_gathering;
    gathering.first_page = g * pages_per_gathering + 1;
    gathering.page_count = pages_per_gathering;
    for (int p = 0; p < pages_per_gathering; ++p) {
      PageRecord rec;
      rec.global_index = gathering.first_page + p;
      rec.gathering_id = gathering.id;
      rec.image_path = "titles/p" + std::to_string(rec.global_index) + ".png";
      m.pages.push_back(std::move(rec));
    }
    m.gatherings.push_back(std::move(gathering));
  }

  const auto units = build_units(m, UnitScheme::sheet_sides);
  for (std::size_t u = 0; u < units.size(); ++u) {
    const int forme = spec.forme_schedule.empty() ? static_cast<int>(u) % spec.n_formes : spec.forme_schedule[u];
    book.gold_units.emplace_back(units[u].id, forme);
    for (std::size_t k = 0; k < units[u].slot_pages.size(); ++k) {
      const int page = units[u].slot_pages[k];
      m.pages[static_cast<std::size_t>(page - 1)].gold_label = std::to_string(forme);
      book.titles[page] = to_8bit(perturb_image(renders[static_cast<std::size_t>(forme)][k], spec.noise, noise_rng));
    }
  }
  return book;
}

void write_synth_book(const SynthBook& book, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "titles", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "titles").string() + ": " + ec.message());
  for (const auto& [page, img] : book.titles) {
    save_title_png(img, out_dir / "titles" / ("p" + std::to_string(page) + ".png"));
  }
  write_file_atomic(out_dir / "manifest.json", serialize_manifest(book.manifest));
  CsvTable gold;
  gold.header = {"unit_id", "forme_id"};
  for (const auto& [unit, forme] : book.gold_units) gold.rows.push_back({unit, std::to_string(forme)});
  write_file_atomic(out_dir / "gold.csv", format_csv(gold));
}

}  // namespace formeclust
