#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "formeclust/imposition.hpp"
#include "formeclust/profiling.hpp"
#include "formeclust/rng.hpp"

namespace formeclust {

/// Per-impression noise applied to each rendered running title.
struct NoiseParams {
  double offset_max_frac = 0.0;  // global horizontal shift, |s| <= offset_max_frac * width
  double pixel_noise_sd = 0.0;   // additive Gaussian noise on ink values
  double inking_scale_min = 1.0;  // multiplicative inking factor range
  double inking_scale_max = 1.0;
};

struct SynthSpec {
  Format format{FormatKind::quarto};
  int leaves_per_gathering = 4;
  int n_gatherings = 20;
  int n_formes = 6;
  int title_width = 200;
  int title_height = 24;
  std::vector<int> forme_schedule;  // one forme id per sheet side; empty = round robin
  NoiseParams noise;
};

void validate(const SynthSpec& spec);
SynthSpec parse_synth_spec(std::string_view json_text);
int sheet_side_count(const SynthSpec& spec);

struct SynthBook {
  BookManifest manifest;
  std::map<int, TitleImage> titles;  // by global page index
  std::vector<std::pair<std::string, int>> gold_units;  // sheet-side unit id -> forme id
};

/// Renders one latent running title per (forme, position) and prints every
/// sheet side from its scheduled forme under independent per-title noise.
/// Formes differ only in glyph spacing and glyph widths.
SynthBook generate_book(const SynthSpec& spec, std::uint64_t seed);

/// Writes manifest.json, titles/p{index}.png and gold.csv into out_dir.
void write_synth_book(const SynthBook& book, const std::filesystem::path& out_dir);

/// Integer shift with zero padding: positive s moves content right.
InkProfile shift_profile(const InkProfile& profile, int s);

/// Draws shift, inking scale and per-value noise from `noise`; deterministic per seed.
InkProfile perturb_profile(const InkProfile& profile, const NoiseParams& noise, std::uint64_t seed);

/// Image analogue of perturb_profile: one shift and scale for the whole title,
/// independent noise per pixel.
TitleImage perturb_image(const TitleImage& img, const NoiseParams& noise, Rng& rng);

}  // namespace formeclust
