#include "formeclust/profiling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "formeclust/csv.hpp"
#include "formeclust/error.hpp"

namespace formeclust {

std::string_view strategy_name(BinStrategy s) noexcept {
  switch (s) {
    case BinStrategy::uniform:
      return "uniform";
    case BinStrategy::quantile:
      return "quantile";
    case BinStrategy::kmeans:
      return "kmeans";
  }
  return "";
}

BinStrategy strategy_from_name(std::string_view name) {
  if (name == "uniform") return BinStrategy::uniform;
  if (name == "quantile") return BinStrategy::quantile;
  if (name == "kmeans") return BinStrategy::kmeans;
  throw ConfigError("unknown binning strategy '" + std::string(name) + "'");
}

namespace {

int histogram_bin(double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

std::optional<int> otsu_threshold_bin(const TitleImage& img) {
  std::array<long long, 256> hist{};
  for (double v : img.pixels) ++hist[static_cast<std::size_t>(histogram_bin(v))];
  if (std::count_if(hist.begin(), hist.end(), [](long long c) { return c > 0; }) <= 1) return std::nullopt;

  long long total = 0;
  long long total_sum = 0;
  for (int b = 0; b < 256; ++b) {
    total += hist[b];
    total_sum += hist[b] * b;
  }
  long long n0 = 0;
  long long s0 = 0;
  long double best = -1.0L;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    n0 += hist[t];
    s0 += hist[t] * t;
    const long long n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    // between-class variance up to the constant factor 1/total^2
    const long double diff = static_cast<long double>(total) * s0 - static_cast<long double>(n0) * total_sum;
    const long double score = diff * diff / (static_cast<long double>(n0) * n1);
    if (score > best) {
      best = score;
      best_t = t;
    }
  }
  return best_t;
}

TitleImage binarize(const TitleImage& img) {
  TitleImage out(img.height, img.width, 0.0);
  const auto t = otsu_threshold_bin(img);
  if (!t) return out;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = histogram_bin(img.pixels[i]) > *t ? 1.0 : 0.0;
  return out;
}

InkProfile column_profile(const TitleImage& img) {
  InkProfile profile;
  profile.values.assign(static_cast<std::size_t>(img.width), 0.0);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) profile.values[c] += img.at(r, c);
  }
  for (auto& v : profile.values) v /= img.height;
  return profile;
}

namespace {

std::vector<std::uint8_t> quantize_uniform(const std::vector<double>& v, double lo, double hi, int n) {
  std::vector<std::uint8_t> out(v.size());
  const double range = hi - lo;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = (v[i] - lo) / range;
    const int bin = std::min(static_cast<int>(std::floor(t * n)), n - 1);
    out[i] = static_cast<std::uint8_t>(std::max(bin, 0));
  }
  return out;
}

// Tied values share the rank of the first member of their group so that the
// mapping stays monotone.
std::vector<std::uint8_t> quantize_quantile(const std::vector<double>& v, int n) {
  const std::size_t w = v.size();
  std::vector<std::size_t> order(w);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<std::uint8_t> out(w);
  std::size_t group_rank = 0;
  for (std::size_t r = 0; r < w; ++r) {
    if (r > 0 && v[order[r]] != v[order[r - 1]]) group_rank = r;
    const std::size_t bin = std::min(group_rank * static_cast<std::size_t>(n) / w, static_cast<std::size_t>(n - 1));
    out[order[r]] = static_cast<std::uint8_t>(bin);
  }
  return out;
}

std::size_t nearest_centroid(double x, const std::vector<double>& centroids) {
  std::size_t best = 0;
  double best_d = std::abs(x - centroids[0]);
  for (std::size_t k = 1; k < centroids.size(); ++k) {
    const double d = std::abs(x - centroids[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<std::uint8_t> quantize_kmeans(const std::vector<double>& v, int n) {
  constexpr int kMaxIterations = 50;
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t w = v.size();
  std::vector<double> centroids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(w - 1) / static_cast<double>(n - 1);
    centroids[i] = sorted[static_cast<std::size_t>(std::lround(pos))];
  }

  std::vector<std::size_t> assign(w, SIZE_MAX);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < w; ++i) {
      const auto k = nearest_centroid(v[i], centroids);
      if (k != assign[i]) {
        assign[i] = k;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(centroids.size(), 0.0);
    std::vector<std::size_t> count(centroids.size(), 0);
    for (std::size_t i = 0; i < w; ++i) {
      sum[assign[i]] += v[i];
      ++count[assign[i]];
    }
    for (std::size_t k = 0; k < centroids.size(); ++k) {
      if (count[k] > 0) centroids[k] = sum[k] / static_cast<double>(count[k]);
    }
    std::sort(centroids.begin(), centroids.end());
  }
  std::sort(centroids.begin(), centroids.end());
  std::vector<std::uint8_t> out(w);
  for (std::size_t i = 0; i < w; ++i) out[i] = static_cast<std::uint8_t>(nearest_centroid(v[i], centroids));
  return out;
}

}  // namespace

QuantizedTitle quantize(const InkProfile& profile, int n_bins, BinStrategy strategy) {
  if (n_bins < 2) throw ConfigError("n_bins must be at least 2, got " + std::to_string(n_bins));
  if (n_bins > kMaxBins) throw ConfigError("n_bins must be at most " + std::to_string(kMaxBins));
  QuantizedTitle q;
  q.n_bins = n_bins;
  q.strategy = strategy;
  const auto& v = profile.values;
  if (v.empty()) return q;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) {
    q.symbols.assign(v.size(), 0);
    return q;
  }
  switch (strategy) {
    case BinStrategy::uniform:
      q.symbols = quantize_uniform(v, *lo, *hi, n_bins);
      break;
    case BinStrategy::quantile:
      q.symbols = quantize_quantile(v, n_bins);
      break;
    case BinStrategy::kmeans:
      q.symbols = quantize_kmeans(v, n_bins);
      break;
  }
  return q;
}

QuantizedTitle quantize_title(const TitleImage& img, const ProfileConfig& config) {
  const InkProfile profile = config.binarize ? column_profile(binarize(img)) : column_profile(img);
  return quantize(profile, config.n_bins, config.strategy);
}

std::string symbols_to_string(const QuantizedTitle& title) {
  static constexpr std::string_view digits = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string s;
  s.reserve(title.symbols.size());
  for (auto sym : title.symbols) s += digits.at(sym);
  return s;
}

std::vector<std::uint8_t> symbols_from_string(std::string_view s) {
  std::vector<std::uint8_t> out;
  out.reserve(s.size());
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      out.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c >= 'a' && c <= 'z') {
      out.push_back(static_cast<std::uint8_t>(10 + c - 'a'));
    } else {
      throw ConfigError(std::string("invalid symbol character '") + c + "'");
    }
  }
  return out;
}

std::string format_sidecar(const std::vector<SidecarRow>& rows) {
  CsvTable table;
  table.header = {"page_index", "position", "symbols"};
  for (const auto& r : rows) table.rows.push_back({std::to_string(r.page_index), std::to_string(r.position), r.symbols});
  return format_csv(table);
}

std::vector<SidecarRow> parse_sidecar(std::string_view csv_text) {
  const auto table = parse_csv(csv_text);
  if (table.header != std::vector<std::string>{"page_index", "position", "symbols"}) {
    throw ConfigError("sidecar header must be page_index,position,symbols");
  }
  std::vector<SidecarRow> rows;
  for (const auto& r : table.rows) {
    symbols_from_string(r[2]);
    rows.push_back({parse_int(r[0]), parse_int(r[1]), r[2]});
  }
  return rows;
}

}  // namespace formeclust
