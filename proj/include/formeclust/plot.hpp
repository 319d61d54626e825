#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "formeclust/imposition.hpp"
#include "formeclust/profiling.hpp"

namespace formeclust {

/// Staircase scatter: x = units in book order, tick-labelled with gathering
/// ids where a new gathering starts (ids repeat if the book reuses them),
/// y = cluster. One <circle> per unit per panel; gold, when given, is drawn as
/// a second panel below the predictions.
std::string render_staircase_svg(const std::vector<UnitLayout>& units, const std::vector<std::string>& predicted,
                                 const std::optional<std::vector<std::string>>& gold, const std::string& title);

/// Grid image: row r shows unit r, column k its slot-k title. Cells are sized
/// to the largest title; blank pages stay white.
TitleImage build_montage(const BookManifest& manifest, const std::filesystem::path& base_dir,
                         const std::vector<UnitLayout>& units);

}  // namespace formeclust
