#include <doctest.h>

#include <algorithm>
#include <set>

#include "formeclust/csv.hpp"
#include "formeclust/error.hpp"
#include "formeclust/imposition.hpp"
#include "oracles/oracles.hpp"
#include "test_util.hpp"

using namespace formeclust;

namespace {

std::set<std::set<int>> side_sets(Format f, int leaves) {
  std::set<std::set<int>> out;
  for (const auto& s : imposition_table(f, leaves)) out.emplace(s.pages.begin(), s.pages.end());
  return out;
}

BookManifest fixture(const std::string& name) {
  return parse_manifest(read_text_file(std::filesystem::path(FORMECLUST_FIXTURES) / "books" / (name + ".json")));
}

}  // namespace

TEST_CASE("format sizes") {
  CHECK(Format{FormatKind::folio}.pages_per_sheet_side() == 2);
  CHECK(Format{FormatKind::quarto}.pages_per_sheet_side() == 4);
  CHECK(Format{FormatKind::octavo}.pages_per_sheet_side() == 8);
  CHECK(Format::from_name("octavo").kind == FormatKind::octavo);
  CHECK_THROWS_AS(Format::from_name("duodecimo"), ConfigError);
}

TEST_CASE("signature labels skip J, U and W and then double") {
  CHECK(signature_label(0) == "A");
  CHECK(signature_label(8) == "I");
  CHECK(signature_label(9) == "K");
  CHECK(signature_label(22) == "Z");
  CHECK(signature_label(23) == "Aa");
  CHECK(signature_label(46) == "Aaa");
}

TEST_CASE("parse minimal folio manifest") {
  const auto m = parse_manifest(testutil::manifest_json("folio", 4, 1));
  CHECK(m.pages.size() == 8);
  CHECK(m.gatherings.size() == 1);
  CHECK(m.gatherings[0].complete);
  CHECK(m.page(8).gathering_id == "A");
}

TEST_CASE("manifest errors") {
  SUBCASE("gathering size mismatch") {
    nlohmann::json doc = nlohmann::json::parse(testutil::manifest_json("folio", 4, 2));
    doc["gatherings"][0]["pages"].erase(7);
    // re-index the following gathering so only the size is wrong
    for (auto& p : doc["gatherings"][1]["pages"]) p["index"] = p["index"].get<int>() - 1;
    try {
      parse_manifest(doc.dump());
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("gathering size mismatch") != std::string::npos);
    }
  }
  SUBCASE("seven-page final gathering") {
    CHECK_THROWS_WITH_AS(parse_manifest(testutil::manifest_json("folio", 4, 1, {}, 7)),
                         doctest::Contains("gathering size mismatch"), ConfigError);
  }
  SUBCASE("non-contiguous indices") {
    nlohmann::json doc = nlohmann::json::parse(testutil::manifest_json("quarto", 4, 1));
    doc["gatherings"][0]["pages"][3]["index"] = 9;
    CHECK_THROWS_WITH_AS(parse_manifest(doc.dump()), doctest::Contains("non-contiguous"), ConfigError);
  }
  SUBCASE("unknown format") {
    CHECK_THROWS_AS(parse_manifest(testutil::manifest_json("sextodecimo", 4, 1)), ConfigError);
  }
  SUBCASE("malformed JSON") { CHECK_THROWS_AS(parse_manifest("{\"title\": "), ConfigError); }
}

TEST_CASE("partial final gathering is flagged and left out of sheet sides") {
  const auto m = parse_manifest(testutil::manifest_json("quarto", 4, 2, {}, 4));
  CHECK(m.warnings.size() == 1);
  CHECK_FALSE(m.gatherings.back().complete);
  CHECK(build_units(m, UnitScheme::all_pages).size() == 20);
  CHECK(build_units(m, UnitScheme::recto_pages).size() == 10);
  CHECK(build_units(m, UnitScheme::sheet_sides).size() == 4);
}

TEST_CASE("folio side sets") {
  CHECK(side_sets({FormatKind::folio}, 4) == std::set<std::set<int>>{{1, 8}, {2, 7}, {3, 6}, {4, 5}});
  const auto table = imposition_table({FormatKind::folio}, 4);
  // outer sheet carries leaves 1 and 4, inner sheet leaves 2 and 3
  for (const auto& s : table) {
    const int lo = *std::min_element(s.pages.begin(), s.pages.end());
    CHECK(s.sheet_index == (lo <= 2 ? 0 : 1));
  }
}

TEST_CASE("quarto and octavo formes") {
  const auto q = imposition_table({FormatKind::quarto}, 4);
  REQUIRE(q.size() == 2);
  CHECK(std::set<int>(q[0].pages.begin(), q[0].pages.end()) == std::set<int>{1, 4, 5, 8});
  CHECK(q[0].side == Side::outer);
  CHECK(std::set<int>(q[1].pages.begin(), q[1].pages.end()) == std::set<int>{2, 3, 6, 7});
  const auto o = imposition_table({FormatKind::octavo}, 8);
  CHECK(std::set<int>(o[0].pages.begin(), o[0].pages.end()) == std::set<int>{1, 4, 5, 8, 9, 12, 13, 16});
  CHECK(std::set<int>(o[1].pages.begin(), o[1].pages.end()) == std::set<int>{2, 3, 6, 7, 10, 11, 14, 15});
  CHECK_THROWS_AS(imposition_table({FormatKind::quarto}, 8), ConfigError);
  CHECK_THROWS_AS(imposition_table({FormatKind::octavo}, 4), ConfigError);
  CHECK_THROWS_AS(imposition_table({FormatKind::folio}, 3), ConfigError);
}

TEST_CASE("imposition tables agree with the paper-folding model") {
  struct Case {
    FormatKind kind;
    int leaves;
    int sheets;
    int folds;
  };
  for (const auto& c : {Case{FormatKind::folio, 2, 1, 1}, Case{FormatKind::folio, 4, 2, 1},
                        Case{FormatKind::folio, 6, 3, 1}, Case{FormatKind::quarto, 4, 1, 2},
                        Case{FormatKind::octavo, 8, 1, 3}}) {
    CAPTURE(c.leaves);
    const auto folded = oracle::fold_gathering(c.sheets, c.folds);
    const auto table = imposition_table({c.kind}, c.leaves);
    for (const auto& side : table) {
      for (int p : side.pages) {
        CHECK(folded.at(p).first == side.sheet_index);
        CHECK(folded.at(p).second == (side.side == Side::outer ? 0 : 1));
      }
    }
  }
}

TEST_CASE("slot positions keep page parity") {
  for (auto [kind, leaves] : {std::pair{FormatKind::folio, 4}, {FormatKind::quarto, 4}, {FormatKind::octavo, 8}}) {
    const auto table = imposition_table({kind}, leaves);
    const std::size_t pps = static_cast<std::size_t>(Format{kind}.pages_per_sheet_side());
    for (const auto& side : table) {
      REQUIRE(side.pages.size() == pps);
      for (std::size_t k = 0; k < pps; ++k) CHECK((side.pages[k] % 2 == 1) == (k < pps / 2));
    }
  }
}

TEST_CASE("impose is a bijection onto sheet-side slots") {
  for (auto [fmt, leaves] : {std::pair{"folio", 4}, {"folio", 6}, {"quarto", 4}, {"octavo", 8}}) {
    const auto m = parse_manifest(testutil::manifest_json(fmt, leaves, 3));
    const auto coords = impose(m);
    CHECK(coords.size() == m.pages.size());
    std::set<std::tuple<std::string, int, int, int>> seen;
    for (const auto& [page, c] : coords) {
      CHECK(c.gathering_id == m.page(page).gathering_id);
      CHECK(seen.emplace(c.gathering_id, c.sheet_index, static_cast<int>(c.side), c.position).second);
    }
  }
}

TEST_CASE("sheet-side units partition pages and follow reading order") {
  const auto m = parse_manifest(testutil::manifest_json("quarto", 4, 3));
  const auto units = build_units(m, UnitScheme::sheet_sides);
  REQUIRE(units.size() == 6);
  CHECK(units[0].id == "A-1o");
  CHECK(units[1].id == "A-1i");
  CHECK(units[0].slot_pages == std::vector<int>{1, 5, 4, 8});
  std::multiset<int> pages;
  int last_min = 0;
  for (const auto& u : units) {
    pages.insert(u.slot_pages.begin(), u.slot_pages.end());
    const int lo = *std::min_element(u.slot_pages.begin(), u.slot_pages.end());
    CHECK(lo > last_min);
    last_min = lo;
  }
  CHECK(pages.size() == 24);
  CHECK(std::set<int>(pages.begin(), pages.end()).size() == 24);
}

TEST_CASE("folio sheet sides: 8-page gathering gives 4 two-slot units") {
  const auto units = build_units(parse_manifest(testutil::manifest_json("folio", 4, 1)), UnitScheme::sheet_sides);
  REQUIRE(units.size() == 4);
  for (const auto& u : units) CHECK(u.slot_pages.size() == 2);
}

TEST_CASE("blank pages") {
  const auto m = parse_manifest(testutil::manifest_json("folio", 4, 1, {2, 8}));
  CHECK(build_units(m, UnitScheme::all_pages).size() == 6);
  CHECK(build_units(m, UnitScheme::recto_pages).size() == 4);
  // sheet sides keep the blank page's slot
  const auto sides = build_units(m, UnitScheme::sheet_sides);
  CHECK(sides.size() == 4);
  CHECK(sides[0].slot_pages == std::vector<int>{1, 8});
}

TEST_CASE("repeated gathering ids are disambiguated") {
  nlohmann::json doc = nlohmann::json::parse(testutil::manifest_json("folio", 4, 2));
  doc["gatherings"][1]["id"] = "A";
  const auto units = build_units(parse_manifest(doc.dump()), UnitScheme::sheet_sides);
  CHECK(units[4].id == "A#2-1o");
  CHECK(units[4].gathering_id == "A");
}

TEST_CASE("merge_sheet_sides joins both sides of a sheet") {
  auto m = parse_manifest(testutil::manifest_json("folio", 4, 2));
  m.merge_sheet_sides = true;
  const auto units = build_units(m, UnitScheme::sheet_sides);
  REQUIRE(units.size() == 4);
  CHECK(units[0].id == "A-1");
  CHECK(units[0].slot_pages == std::vector<int>{1, 8, 7, 2});
  CHECK(units[0].slot_pages.size() == 4);
}

TEST_CASE("gold labels for units") {
  nlohmann::json doc = nlohmann::json::parse(testutil::manifest_json("folio", 4, 1));
  doc["gatherings"][0]["pages"][7]["gold_label"] = "F2";
  doc["gatherings"][0]["pages"][0]["gold_label"] = "F1";
  doc["gold_unit_labels"] = {{"A-2o", 7}};
  const auto m = parse_manifest(doc.dump());
  const auto units = build_units(m, UnitScheme::sheet_sides);
  CHECK(unit_gold_label(m, units[0]) == "F1");  // earliest page wins
  CHECK(unit_gold_label(m, units[1]) == std::nullopt);
  CHECK(unit_gold_label(m, units[2]) == "7");
}

TEST_CASE("serialize round trip") {
  nlohmann::json doc = nlohmann::json::parse(testutil::manifest_json("octavo", 8, 2, {3, 17}));
  doc["gatherings"][0]["pages"][0]["gold_label"] = 4;
  doc["merge_sheet_sides"] = true;
  doc["gold_unit_labels"] = {{"B-1", "x"}};
  const auto m = parse_manifest(doc.dump());
  CHECK(parse_manifest(serialize_manifest(m)) == m);
}

TEST_CASE("book skeleton fixtures") {
  struct Row {
    const char* name;
    std::size_t pages, rectos, sides;
  };
  for (const auto& r : {Row{"paradise_lost", 336, 168, 84}, Row{"king_lear", 48, 24, 12}, Row{"mayor", 72, 36, 18},
                        Row{"parthenissa", 248, 124, 62}, Row{"institution", 80, 40, 10},
                        Row{"discourse", 192, 96, 24}, Row{"wisdom", 240, 120, 30}}) {
    CAPTURE(r.name);
    const auto m = fixture(r.name);
    CHECK(build_units(m, UnitScheme::all_pages).size() == r.pages);
    CHECK(build_units(m, UnitScheme::recto_pages).size() == r.rectos);
    CHECK(build_units(m, UnitScheme::sheet_sides).size() == r.sides);
  }
  auto lev = fixture("leviathan");
  CHECK(build_units(lev, UnitScheme::recto_pages).size() == 188);
  CHECK(build_units(lev, UnitScheme::sheet_sides).size() == 188);
  lev.merge_sheet_sides = true;
  CHECK(build_units(lev, UnitScheme::sheet_sides).size() == 94);
  CHECK(fixture("wisdom").gatherings.size() == 15);
}
