#pragma once

#include <filesystem>
#include <json.hpp>
#include <set>
#include <string>

#include "formeclust/imposition.hpp"
#include "formeclust/rng.hpp"

namespace testutil {

inline std::string signature(int ordinal) { return formeclust::signature_label(ordinal); }

// Manifest text with n_gatherings complete gatherings. Pages listed in
// `blank` get a null image.
inline std::string manifest_json(const std::string& format, int leaves, int n_gatherings,
                                 const std::set<int>& blank = {}, int extra_pages = 0) {
  nlohmann::ordered_json doc;
  doc["title"] = "test book";
  doc["format"] = format;
  doc["leaves_per_gathering"] = leaves;
  auto gatherings = nlohmann::ordered_json::array();
  int index = 1;
  for (int g = 0; g < n_gatherings + (extra_pages > 0 ? 1 : 0); ++g) {
    const int count = g < n_gatherings ? 2 * leaves : extra_pages;
    auto pages = nlohmann::ordered_json::array();
    for (int p = 0; p < count; ++p, ++index) {
      nlohmann::ordered_json page;
      page["index"] = index;
      page["image"] = blank.count(index) ? nlohmann::ordered_json(nullptr)
                                         : nlohmann::ordered_json("titles/p" + std::to_string(index) + ".png");
      pages.push_back(page);
    }
    gatherings.push_back({{"id", signature(g)}, {"pages", pages}});
  }
  doc["gatherings"] = gatherings;
  return doc.dump();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "formeclust_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<std::uint8_t> random_symbols(formeclust::Rng& rng, std::size_t max_len, std::uint64_t alphabet) {
  std::vector<std::uint8_t> s(formeclust::uniform_index(rng, max_len + 1));
  for (auto& c : s) c = static_cast<std::uint8_t>(formeclust::uniform_index(rng, alphabet));
  return s;
}

}  // namespace testutil
