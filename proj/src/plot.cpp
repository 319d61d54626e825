#include "formeclust/plot.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "formeclust/error.hpp"

namespace formeclust {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

bool is_integer(const std::string& s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Distinct labels, numerically ordered when every label is an integer.
std::vector<std::string> ordered_levels(const std::vector<std::string>& labels) {
  std::vector<std::string> levels = labels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (std::all_of(levels.begin(), levels.end(), is_integer)) {
    std::sort(levels.begin(), levels.end(), [](const std::string& a, const std::string& b) {
      return std::stoi(a) < std::stoi(b);
    });
  }
  return levels;
}

constexpr int kLeft = 70;
constexpr int kRight = 20;
constexpr int kStep = 10;
constexpr int kLevelGap = 14;
constexpr int kPanelPad = 30;

void emit_panel(std::ostringstream& svg, const std::string& name, const std::vector<UnitLayout>& units,
                const std::vector<std::string>& labels, int top, int width) {
  const auto levels = ordered_levels(labels);
  std::map<std::string, int> level_of;
  for (std::size_t i = 0; i < levels.size(); ++i) level_of[levels[i]] = static_cast<int>(i);
  const int plot_h = static_cast<int>(levels.size()) * kLevelGap;
  const int axis_y = top + kPanelPad + plot_h;

  svg << "<g class=\"panel\" id=\"" << name << "\">\n";
  svg << "<text x=\"" << kLeft << "\" y=\"" << top + 16 << "\" font-size=\"13\">" << name << "</text>\n";
  svg << "<line class=\"axis\" x1=\"" << kLeft << "\" y1=\"" << axis_y << "\" x2=\"" << width - kRight << "\" y2=\""
      << axis_y << "\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const int y = axis_y - static_cast<int>(i + 1) * kLevelGap + kLevelGap / 2;
    svg << "<text class=\"ylabel\" x=\"" << kLeft - 8 << "\" y=\"" << y + 4
        << "\" font-size=\"9\" text-anchor=\"end\">" << xml_escape(levels[i]) << "</text>\n";
  }
  for (std::size_t u = 0; u < units.size(); ++u) {
    const int x = kLeft + kStep / 2 + static_cast<int>(u) * kStep;
    if (u == 0 || units[u].gathering_id != units[u - 1].gathering_id) {
      svg << "<line class=\"tick\" x1=\"" << x << "\" y1=\"" << axis_y << "\" x2=\"" << x << "\" y2=\"" << axis_y + 4
          << "\" stroke=\"#444\"/>\n";
      svg << "<text class=\"xlabel\" x=\"" << x << "\" y=\"" << axis_y + 14 << "\" font-size=\"9\">"
          << xml_escape(units[u].gathering_id) << "</text>\n";
    }
    const int y = axis_y - (level_of.at(labels[u]) + 1) * kLevelGap + kLevelGap / 2;
    svg << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"#1f77b4\"><title>" << xml_escape(units[u].id)
        << ": " << xml_escape(labels[u]) << "</title></circle>\n";
  }
  svg << "</g>\n";
}

int panel_height(const std::vector<std::string>& labels) {
  return 2 * kPanelPad + static_cast<int>(ordered_levels(labels).size()) * kLevelGap;
}

}  // namespace

std::string render_staircase_svg(const std::vector<UnitLayout>& units, const std::vector<std::string>& predicted,
                                 const std::optional<std::vector<std::string>>& gold, const std::string& title) {
  if (predicted.size() != units.size() || (gold && gold->size() != units.size())) {
    throw ConfigError("label/manifest mismatch: " + std::to_string(predicted.size()) + " labels for " +
                      std::to_string(units.size()) + " units");
  }
  const int width = kLeft + kRight + std::max(1, static_cast<int>(units.size())) * kStep;
  const int top_h = panel_height(predicted) + 10;
  const int height = 20 + top_h + (gold ? panel_height(*gold) : 0);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\" font-family=\"sans-serif\">\n";
  svg << "<title>" << xml_escape(title) << "</title>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  emit_panel(svg, "predicted", units, predicted, 10, width);
  if (gold) emit_panel(svg, "gold", units, *gold, 10 + top_h, width);
  svg << "</svg>\n";
  return svg.str();
}

TitleImage build_montage(const BookManifest& manifest, const std::filesystem::path& base_dir,
                         const std::vector<UnitLayout>& units) {
  constexpr int kGutter = 2;
  if (units.empty()) throw ConfigError("montage needs at least one unit");
  std::size_t columns = 0;
  for (const auto& u : units) columns = std::max(columns, u.slot_pages.size());

  std::map<int, TitleImage> images;
  int cell_w = 1;
  int cell_h = 1;
  for (const auto& u : units) {
    for (int page : u.slot_pages) {
      const auto& rec = manifest.page(page);
      if (!rec.image_path || images.count(page)) continue;
      std::filesystem::path path = *rec.image_path;
      if (path.is_relative()) path = base_dir / path;
      TitleImage img;
      try {
        img = load_title_image(path);
      } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + " (page " + std::to_string(page) + ")", page);
      }
      cell_w = std::max(cell_w, img.width);
      cell_h = std::max(cell_h, img.height);
      images.emplace(page, std::move(img));
    }
  }

  const int cols = static_cast<int>(columns);
  const int rows = static_cast<int>(units.size());
  TitleImage grid(rows * cell_h + (rows + 1) * kGutter, cols * cell_w + (cols + 1) * kGutter, 0.25);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int y0 = kGutter + r * (cell_h + kGutter);
      const int x0 = kGutter + c * (cell_w + kGutter);
      for (int y = 0; y < cell_h; ++y) {
        for (int x = 0; x < cell_w; ++x) grid.at(y0 + y, x0 + x) = 0.0;
      }
      const auto& slots = units[static_cast<std::size_t>(r)].slot_pages;
      if (static_cast<std::size_t>(c) >= slots.size()) continue;
      auto it = images.find(slots[static_cast<std::size_t>(c)]);
      if (it == images.end()) continue;
      const auto& img = it->second;
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) grid.at(y0 + y, x0 + x) = img.at(y, x);
      }
    }
  }
  return grid;
}

}  // namespace formeclust
