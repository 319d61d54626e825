#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace formeclust {

enum class FormatKind { folio, quarto, octavo };

/// Book format: how many pages are printed on each side of a sheet.
struct Format {
  FormatKind kind = FormatKind::folio;

  int pages_per_sheet_side() const noexcept;
  std::string_view name() const noexcept;
  static Format from_name(std::string_view name);

  friend bool operator==(const Format&, const Format&) = default;
};

struct PageRecord {
  int global_index = 0;  // 1-based
  std::string gathering_id;
  std::optional<std::string> image_path;  // absent = blank page
  std::optional<std::string> gold_label;

  friend bool operator==(const PageRecord&, const PageRecord&) = default;
};

struct Gathering {
  std::string id;
  int leaves = 0;      // leaves actually present
  int first_page = 0;  // global index of the first page
  int page_count = 0;  // always 2 * leaves
  bool complete = true;

  int page_end() const noexcept { return first_page + page_count; }  // exclusive

  friend bool operator==(const Gathering&, const Gathering&) = default;
};

struct BookManifest {
  std::string title;
  Format format;
  int leaves_per_gathering = 0;
  std::vector<Gathering> gatherings;
  std::vector<PageRecord> pages;  // pages[i].global_index == i + 1
  std::map<std::string, std::string> gold_unit_labels;
  bool merge_sheet_sides = false;
  std::vector<std::string> warnings;  // not serialized

  const PageRecord& page(int global_index) const { return pages.at(static_cast<std::size_t>(global_index - 1)); }

  friend bool operator==(const BookManifest& a, const BookManifest& b) {
    return a.title == b.title && a.format == b.format && a.leaves_per_gathering == b.leaves_per_gathering &&
           a.gatherings == b.gatherings && a.pages == b.pages && a.gold_unit_labels == b.gold_unit_labels &&
           a.merge_sheet_sides == b.merge_sheet_sides;
  }
};

/// Conventional signature sequence: the 23-letter alphabet without J, U and W,
/// then doubled (Aa, Bb, ...), tripled, and so on. ordinal is 0-based.
std::string signature_label(int ordinal);

/// Parses and validates the JSON manifest document.
BookManifest parse_manifest(std::string_view json_text);
std::string serialize_manifest(const BookManifest& manifest);

enum class Side { outer, inner };
std::string_view side_name(Side side) noexcept;

struct SheetSideCoord {
  std::string gathering_id;
  int sheet_index = 0;  // 0 = outermost sheet of the gathering
  Side side = Side::outer;
  int position = 0;  // 0 .. pages_per_sheet_side - 1

  friend bool operator==(const SheetSideCoord&, const SheetSideCoord&) = default;
};

/// One side of one sheet inside a gathering, in gathering-local page numbers
/// (1-based). `pages[k]` is the page printed at position k.
struct LocalSheetSide {
  int sheet_index = 0;
  Side side = Side::outer;
  std::vector<int> pages;
};

/// Standard imposition table for a complete gathering. Positions put recto
/// pages first, then versos, each in ascending page order, so that slot k
/// always holds the same page parity on every sheet side of a book.
/// Throws ConfigError for unsupported (format, leaves) combinations.
std::vector<LocalSheetSide> imposition_table(Format format, int leaves);

/// Maps every page of every complete gathering to its sheet-side coordinate.
/// Pages of a partial final gathering are not imposed.
std::map<int, SheetSideCoord> impose(const BookManifest& manifest);

enum class UnitScheme { all_pages, recto_pages, sheet_sides };
std::string_view scheme_name(UnitScheme scheme) noexcept;
UnitScheme scheme_from_name(std::string_view name);

/// A clustering unit before profiling: an id and the page shown at each slot.
/// A slot's page may still be blank (no image).
struct UnitLayout {
  std::string id;
  std::string gathering_id;
  std::vector<int> slot_pages;
};

/// Builds clustering units in reading order of each unit's earliest page.
/// all_pages and recto_pages skip blank pages; sheet_sides covers complete
/// gatherings only and merges both sides of a sheet when the manifest asks for it.
std::vector<UnitLayout> build_units(const BookManifest& manifest, UnitScheme scheme);

/// Gold label of a unit: the manifest's unit-level label when given, else the
/// label shared by its pages. nullopt when no page carries one.
std::optional<std::string> unit_gold_label(const BookManifest& manifest, const UnitLayout& unit);

}  // namespace formeclust
