#include "formeclust/imposition.hpp"

#include <algorithm>
#include <json.hpp>

#include "formeclust/error.hpp"

namespace formeclust {

using json = nlohmann::ordered_json;

int Format::pages_per_sheet_side() const noexcept {
  switch (kind) {
    case FormatKind::folio:
      return 2;
    case FormatKind::quarto:
      return 4;
    case FormatKind::octavo:
      return 8;
  }
  return 0;
}

std::string_view Format::name() const noexcept {
  switch (kind) {
    case FormatKind::folio:
      return "folio";
    case FormatKind::quarto:
      return "quarto";
    case FormatKind::octavo:
      return "octavo";
  }
  return "";
}

Format Format::from_name(std::string_view name) {
  if (name == "folio") return {FormatKind::folio};
  if (name == "quarto") return {FormatKind::quarto};
  if (name == "octavo") return {FormatKind::octavo};
  throw ConfigError("unknown format kind '" + std::string(name) + "'");
}

std::string_view side_name(Side side) noexcept { return side == Side::outer ? "outer" : "inner"; }

std::string_view scheme_name(UnitScheme scheme) noexcept {
  switch (scheme) {
    case UnitScheme::all_pages:
      return "all_pages";
    case UnitScheme::recto_pages:
      return "recto_pages";
    case UnitScheme::sheet_sides:
      return "sheet_sides";
  }
  return "";
}

UnitScheme scheme_from_name(std::string_view name) {
  if (name == "all_pages") return UnitScheme::all_pages;
  if (name == "recto_pages") return UnitScheme::recto_pages;
  if (name == "sheet_sides") return UnitScheme::sheet_sides;
  throw ConfigError("unknown unit scheme '" + std::string(name) + "'");
}

namespace {

std::optional<std::string> optional_label(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& v = j.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ConfigError(std::string("field '") + key + "' must be a string, integer or null");
}

void check_identifier(const std::string& s, const char* what) {
  if (s.empty()) throw ConfigError(std::string(what) + " must not be empty");
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw ConfigError(std::string(what) + " '" + s + "' contains a reserved character");
  }
}

// Rectos (odd local pages) first, then versos, each ascending.
void order_positions(std::vector<int>& pages) {
  std::sort(pages.begin(), pages.end(), [](int a, int b) {
    const bool ra = a % 2 == 1;
    const bool rb = b % 2 == 1;
    if (ra != rb) return ra;
    return a < b;
  });
}

}  // namespace

std::string signature_label(int ordinal) {
  static constexpr std::string_view letters = "ABCDEFGHIKLMNOPQRSTVXYZ";
  const int n = static_cast<int>(letters.size());
  const char first = letters[static_cast<std::size_t>(ordinal % n)];
  const int repeat = ordinal / n + 1;
  std::string out(1, first);
  out.append(static_cast<std::size_t>(repeat - 1), static_cast<char>(first - 'A' + 'a'));
  return out;
}

BookManifest parse_manifest(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }

  BookManifest m;
  try {
    if (!doc.is_object()) throw ConfigError("malformed manifest: top level must be an object");
    m.title = doc.at("title").get<std::string>();
    m.format = Format::from_name(doc.at("format").get<std::string>());
    m.leaves_per_gathering = doc.at("leaves_per_gathering").get<int>();
    if (doc.contains("merge_sheet_sides")) m.merge_sheet_sides = doc.at("merge_sheet_sides").get<bool>();
    if (doc.contains("gold_unit_labels")) {
      for (const auto& [unit, label] : doc.at("gold_unit_labels").items()) {
        if (label.is_string()) {
          m.gold_unit_labels[unit] = label.get<std::string>();
        } else if (label.is_number_integer()) {
          m.gold_unit_labels[unit] = std::to_string(label.get<long long>());
        } else {
          throw ConfigError("gold_unit_labels values must be strings or integers");
        }
      }
    }

    if (m.leaves_per_gathering < 1) throw ConfigError("leaves_per_gathering must be positive");

    const auto& gatherings = doc.at("gatherings");
    if (!gatherings.is_array() || gatherings.empty()) {
      throw ConfigError("malformed manifest: 'gatherings' must be a non-empty array");
    }
    const int full = 2 * m.leaves_per_gathering;
    int next_index = 1;
    for (std::size_t gi = 0; gi < gatherings.size(); ++gi) {
      const auto& g = gatherings[gi];
      Gathering gathering;
      gathering.id = g.at("id").get<std::string>();
      check_identifier(gathering.id, "gathering id");
      gathering.first_page = next_index;
      const auto& pages = g.at("pages");
      if (!pages.is_array()) throw ConfigError("malformed manifest: gathering pages must be an array");
      for (const auto& p : pages) {
        PageRecord rec;
        rec.global_index = p.at("index").get<int>();
        if (rec.global_index != next_index) {
          throw ConfigError("non-contiguous page indices: expected " + std::to_string(next_index) + ", got " +
                            std::to_string(rec.global_index));
        }
        ++next_index;
        rec.gathering_id = gathering.id;
        if (p.contains("image") && !p.at("image").is_null()) rec.image_path = p.at("image").get<std::string>();
        rec.gold_label = optional_label(p, "gold_label");
        if (rec.gold_label) check_identifier(*rec.gold_label, "gold label");
        m.pages.push_back(std::move(rec));
      }
      gathering.page_count = static_cast<int>(pages.size());
      const bool last = gi + 1 == gatherings.size();
      if (gathering.page_count == full) {
        gathering.complete = true;
      } else if (last && gathering.page_count > 0 && gathering.page_count < full && gathering.page_count % 2 == 0) {
        gathering.complete = false;
        m.warnings.push_back("gathering '" + gathering.id + "' is partial (" + std::to_string(gathering.page_count) +
                             " of " + std::to_string(full) + " pages); excluded from sheet-side units");
      } else {
        throw ConfigError("gathering size mismatch: gathering '" + gathering.id + "' has " +
                          std::to_string(gathering.page_count) + " pages, expected " + std::to_string(full));
      }
      gathering.leaves = gathering.page_count / 2;
      m.gatherings.push_back(std::move(gathering));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string serialize_manifest(const BookManifest& m) {
  json doc;
  doc["title"] = m.title;
  doc["format"] = std::string(m.format.name());
  doc["leaves_per_gathering"] = m.leaves_per_gathering;
  if (m.merge_sheet_sides) doc["merge_sheet_sides"] = true;
  json gatherings = json::array();
  for (const auto& g : m.gatherings) {
    json pages = json::array();
    for (int idx = g.first_page; idx < g.page_end(); ++idx) {
      const auto& p = m.page(idx);
      json jp;
      jp["index"] = p.global_index;
      jp["image"] = p.image_path ? json(*p.image_path) : json(nullptr);
      jp["gold_label"] = p.gold_label ? json(*p.gold_label) : json(nullptr);
      pages.push_back(std::move(jp));
    }
    gatherings.push_back(json{{"id", g.id}, {"pages", std::move(pages)}});
  }
  doc["gatherings"] = std::move(gatherings);
  if (!m.gold_unit_labels.empty()) {
    json labels = json::object();
    for (const auto& [unit, label] : m.gold_unit_labels) labels[unit] = label;
    doc["gold_unit_labels"] = std::move(labels);
  }
  return doc.dump(2) + "\n";
}

std::vector<LocalSheetSide> imposition_table(Format format, int leaves) {
  std::vector<LocalSheetSide> sides;
  switch (format.kind) {
    case FormatKind::folio: {
      // Nested sheets; sheet s carries leaves s+1 and leaves-s.
      if (leaves < 2 || leaves % 2 != 0) {
        throw ConfigError("folio imposition needs an even number of leaves, got " + std::to_string(leaves));
      }
      const int last = 2 * leaves;
      for (int s = 0; s < leaves / 2; ++s) {
        sides.push_back({s, Side::outer, {2 * s + 1, last - 2 * s}});
        sides.push_back({s, Side::inner, {2 * s + 2, last - 2 * s - 1}});
      }
      break;
    }
    case FormatKind::quarto:
    case FormatKind::octavo: {
      const int expected = format.kind == FormatKind::quarto ? 4 : 8;
      if (leaves != expected) {
        throw ConfigError(std::string(format.name()) + " imposition is defined for " + std::to_string(expected) +
                          "-leaf gatherings only, got " + std::to_string(leaves));
      }
      // Single sheet folded repeatedly: pages 1,4,5,8,... land on the outer side.
      LocalSheetSide outer{0, Side::outer, {}};
      LocalSheetSide inner{0, Side::inner, {}};
      for (int p = 1; p <= 2 * leaves; ++p) {
        (p % 4 == 0 || p % 4 == 1 ? outer : inner).pages.push_back(p);
      }
      sides.push_back(std::move(outer));
      sides.push_back(std::move(inner));
      break;
    }
  }
  for (auto& side : sides) order_positions(side.pages);
  return sides;
}

std::map<int, SheetSideCoord> impose(const BookManifest& manifest) {
  std::map<int, SheetSideCoord> coords;
  for (const auto& g : manifest.gatherings) {
    if (!g.complete) continue;
    for (const auto& side : imposition_table(manifest.format, g.leaves)) {
      for (std::size_t k = 0; k < side.pages.size(); ++k) {
        const int global = g.first_page + side.pages[k] - 1;
        coords.emplace(global, SheetSideCoord{g.id, side.sheet_index, side.side, static_cast<int>(k)});
      }
    }
  }
  return coords;
}

std::vector<UnitLayout> build_units(const BookManifest& manifest, UnitScheme scheme) {
  std::vector<UnitLayout> units;
  if (scheme != UnitScheme::sheet_sides) {
    for (const auto& p : manifest.pages) {
      if (!p.image_path) continue;
      if (scheme == UnitScheme::recto_pages && p.global_index % 2 == 0) continue;
      units.push_back({"p" + std::to_string(p.global_index), p.gathering_id, {p.global_index}});
    }
    return units;
  }

  // Signature letters may repeat across sections of a book; disambiguate ids.
  std::map<std::string, int> seen;
  for (const auto& g : manifest.gatherings) {
    const int occurrence = ++seen[g.id];
    if (!g.complete) continue;
    const std::string stem = occurrence == 1 ? g.id : g.id + "#" + std::to_string(occurrence);
    const auto table = imposition_table(manifest.format, g.leaves);
    auto to_global = [&g](int local) { return g.first_page + local - 1; };

    if (manifest.merge_sheet_sides) {
      std::map<int, UnitLayout> sheets;
      for (const auto& side : table) {
        auto& unit = sheets[side.sheet_index];
        unit.id = stem + "-" + std::to_string(side.sheet_index + 1);
        unit.gathering_id = g.id;
        // outer side precedes inner side in the table
        for (int local : side.pages) unit.slot_pages.push_back(to_global(local));
      }
      for (auto& [_, unit] : sheets) units.push_back(std::move(unit));
    } else {
      for (const auto& side : table) {
        UnitLayout unit;
        unit.id = stem + "-" + std::to_string(side.sheet_index + 1) + (side.side == Side::outer ? "o" : "i");
        unit.gathering_id = g.id;
        for (int local : side.pages) unit.slot_pages.push_back(to_global(local));
        units.push_back(std::move(unit));
      }
    }
  }
  std::stable_sort(units.begin(), units.end(), [](const UnitLayout& a, const UnitLayout& b) {
    return *std::min_element(a.slot_pages.begin(), a.slot_pages.end()) <
           *std::min_element(b.slot_pages.begin(), b.slot_pages.end());
  });
  return units;
}

std::optional<std::string> unit_gold_label(const BookManifest& manifest, const UnitLayout& unit) {
  if (auto it = manifest.gold_unit_labels.find(unit.id); it != manifest.gold_unit_labels.end()) return it->second;
  std::optional<std::string> label;
  int earliest = 0;
  for (int page : unit.slot_pages) {
    const auto& rec = manifest.page(page);
    if (rec.gold_label && (!label || page < earliest)) {
      label = rec.gold_label;
      earliest = page;
    }
  }
  return label;
}

}  // namespace formeclust
