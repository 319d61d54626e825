#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace formeclust {

/// Row-major H x W ink image, values in [0,1] with 0 = paper, 1 = full ink.
struct TitleImage {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  TitleImage() = default;
  TitleImage(int h, int w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }

  friend bool operator==(const TitleImage&, const TitleImage&) = default;
};

/// Mean ink per column.
struct InkProfile {
  std::vector<double> values;
  friend bool operator==(const InkProfile&, const InkProfile&) = default;
};

enum class BinStrategy { uniform, quantile, kmeans };
std::string_view strategy_name(BinStrategy s) noexcept;
BinStrategy strategy_from_name(std::string_view name);

/// A running title as a symbol string over {0 .. n_bins-1}.
struct QuantizedTitle {
  std::vector<std::uint8_t> symbols;
  int n_bins = 0;
  BinStrategy strategy = BinStrategy::quantile;

  friend bool operator==(const QuantizedTitle&, const QuantizedTitle&) = default;
};

inline constexpr int kMaxBins = 36;  // digit-string alphabet of the CSV sidecar

/// Reads an 8-bit grayscale or RGB PNG, or a PGM (P2/P5). RGB is reduced to
/// Rec.601 luma; the result is inverted so ink is high.
TitleImage load_title_image(const std::filesystem::path& path);

/// Writes the image as an 8-bit grayscale PNG (paper white, ink black).
void save_title_png(const TitleImage& img, const std::filesystem::path& path);

/// Otsu's global threshold over a 256-bin histogram of round(255 v).
/// Bins above the threshold become 1. Images with a single occupied bin map to all 0.
TitleImage binarize(const TitleImage& img);

/// The histogram bin index selected by Otsu's criterion, or nullopt for a
/// degenerate (single-bin) histogram. Exposed for testing.
std::optional<int> otsu_threshold_bin(const TitleImage& img);

InkProfile column_profile(const TitleImage& img);

QuantizedTitle quantize(const InkProfile& profile, int n_bins, BinStrategy strategy);

struct ProfileConfig {
  bool binarize = true;
  int n_bins = 5;
  BinStrategy strategy = BinStrategy::quantile;
};

/// load-independent part of the feature map: [binarize] -> column profile -> quantize.
QuantizedTitle quantize_title(const TitleImage& img, const ProfileConfig& config);

/// Digit-string form used by the CSV sidecar: 0-9 then a-z.
std::string symbols_to_string(const QuantizedTitle& title);
std::vector<std::uint8_t> symbols_from_string(std::string_view s);

struct SidecarRow {
  int page_index = 0;
  int position = 0;
  std::string symbols;
};
std::string format_sidecar(const std::vector<SidecarRow>& rows);
std::vector<SidecarRow> parse_sidecar(std::string_view csv_text);

}  // namespace formeclust
