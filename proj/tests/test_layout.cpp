#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "finverify/layout.hpp"
#include "finverify/svg.hpp"
#include "finverify/techdb.hpp"
#include "oracles.hpp"

using namespace fv;
using json = nlohmann::json;

static const tech_db& tech() {
  static tech_db t = tech_db::load(std::string(FV_FIXTURES_DIR) + "/tech/freepdk15.json");
  return t;
}

static cell_library lib_from(const json& j) {
  return cell_library::parse(j.dump(), "inline", tech());
}

static json minimal_cell(const std::string& name) {
  return json{{"name", name},
              {"layers", {{"M1A", {{{"rect", {0, 0, 100, 50}}}}}}}};
}

TEST_CASE("inverter fixture loads") {
  cell_library lib =
      cell_library::load(std::string(FV_FIXTURES_DIR) + "/cells/inverter.json", tech());
  REQUIRE(lib.has("INV"));
  REQUIRE(lib.has("INV_STITCH"));
  const cell& inv = lib.at("INV");
  for (const char* l : {"ACT", "GATEA", "GATEB", "AIL1", "AIL2", "GIL", "M1A", "V0", "NWELL"})
    CHECK(inv.shapes.count(l));
  CHECK(inv.pins.size() == 5);
  flat_layout f = lib.flatten("INV");
  CHECK(f.layers.at("ACT").size() == 2);
  CHECK(area(f.layers.at("ACT")) == 2 * 120 * 88);
  CHECK(f.bbox() == Rect{0, 0, 200, 360});
}

TEST_CASE("load rejections") {
  json j{{"schema_version", 1}, {"cells", json::array()}};
  CHECK_NOTHROW(lib_from(j));  // empty library is fine

  // empty cell is valid
  j["cells"] = {json{{"name", "EMPTY"}}};
  cell_library lib = lib_from(j);
  CHECK(lib.flatten("EMPTY").layers.empty());

  // unknown layer
  j["cells"] = {json{{"name", "C"}, {"layers", {{"METAL99", {{{"rect", {0, 0, 10, 10}}}}}}}}};
  CHECK_THROWS_WITH_AS(lib_from(j), doctest::Contains("METAL99"), error);

  // off-grid coordinate reports the nm remainder
  j["cells"] = {json{{"name", "C"}, {"layers", {{"M1A", {{{"rect", {0, 0, 12.5, 10}}}}}}}}};
  CHECK_THROWS_WITH_AS(lib_from(j), doctest::Contains("0.5 nm"), error);

  // degenerate rect
  j["cells"] = {json{{"name", "C"}, {"layers", {{"M1A", {{{"rect", {10, 0, 10, 10}}}}}}}}};
  CHECK_THROWS_AS(lib_from(j), error);

  // non-rectilinear polygon
  j["cells"] = {json{
      {"name", "C"},
      {"layers", {{"M1A", {{{"poly", {{0, 0}, {10, 5}, {10, 10}, {0, 10}}}}}}}}}};
  CHECK_THROWS_AS(lib_from(j), error);

  // undefined instance target
  j["cells"] = {json{{"name", "C"}, {"instances", {{{"cell", "GHOST"}, {"at", {0, 0}}}}}}};
  CHECK_THROWS_WITH_AS(lib_from(j), doctest::Contains("GHOST"), error);

  // instantiation cycle
  j["cells"] = {json{{"name", "A"}, {"instances", {{{"cell", "B"}, {"at", {0, 0}}}}}},
                json{{"name", "B"}, {"instances", {{{"cell", "A"}, {"at", {0, 0}}}}}}};
  CHECK_THROWS_WITH_AS(lib_from(j), doctest::Contains("cycle"), error);

  // pin off its layer's geometry
  j["cells"] = {json{{"name", "C"},
                     {"layers", {{"M1A", {{{"rect", {0, 0, 100, 50}}}}}}},
                     {"pins", {{{"label", "A"}, {"layer", "M1A"}, {"at", {200, 200}}}}}}};
  CHECK_THROWS_WITH_AS(lib_from(j), doctest::Contains("outside"), error);
}

TEST_CASE("flatten translation and identity") {
  json j{{"schema_version", 1},
         {"cells",
          {minimal_cell("LEAF"),
           json{{"name", "TOP"},
                {"instances", {{{"cell", "LEAF"}, {"at", {1000, 0}}}}}}}}};
  cell_library lib = lib_from(j);
  flat_layout leaf = lib.flatten("LEAF");
  flat_layout top = lib.flatten("TOP");
  REQUIRE(top.layers.at("M1A").size() == 1);
  CHECK(top.layers.at("M1A")[0] == rect_poly({1000, 0, 1100, 50}));
  // identity: instance-free cell flattens to its own normalized shapes
  CHECK(leaf.layers.at("M1A")[0] == rect_poly({0, 0, 100, 50}));
}

TEST_CASE("flatten area bookkeeping for disjoint tiling") {
  json leaf = minimal_cell("LEAF");
  json top{{"name", "TOP"}, {"instances", json::array()}};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      top["instances"].push_back({{"cell", "LEAF"}, {"at", {c * 300, r * 300}}});
  cell_library lib = lib_from(json{{"schema_version", 1}, {"cells", {leaf, top}}});
  flat_layout f = lib.flatten("TOP");
  CHECK(f.layers.at("M1A").size() == 4);
  CHECK(area(f.layers.at("M1A")) == 4 * 100 * 50);
  // abutting tiling merges but keeps area
  json top2{{"name", "TOP2"}, {"instances", json::array()}};
  for (int c = 0; c < 4; ++c)
    top2["instances"].push_back({{"cell", "LEAF"}, {"at", {c * 100, 0}}});
  cell_library lib2 = lib_from(json{{"schema_version", 1}, {"cells", {leaf, top2}}});
  flat_layout f2 = lib2.flatten("TOP2");
  CHECK(f2.layers.at("M1A").size() == 1);
  CHECK(area(f2.layers.at("M1A")) == 4 * 100 * 50);
}

TEST_CASE("orientations place geometry where expected") {
  // asymmetric L-shape so every orientation is distinguishable
  json leaf{{"name", "L"},
            {"layers",
             {{"M1A",
               {{{"poly", {{0, 0}, {30, 0}, {30, 10}, {10, 10}, {10, 40}, {0, 40}}}}}}}}};
  auto place = [&](const std::string& o, Point at) {
    json top{{"name", "T"},
             {"instances", {{{"cell", "L"}, {"at", {at.x, at.y}}, {"orient", o}}}}};
    cell_library lib = lib_from(json{{"schema_version", 1}, {"cells", {leaf, top}}});
    return lib.flatten("T").layers.at("M1A");
  };
  // MX flips y: bbox [0,-40,30,0] before translation
  ShapeList mx = place("MX", {0, 100});
  CHECK(mx[0].bbox() == Rect{0, 60, 30, 100});
  CHECK(area(mx) == 30 * 10 + 10 * 30);
  CHECK(oracle::cell_in_set(mx, 25, 95));   // the long arm ends up at the top
  CHECK(!oracle::cell_in_set(mx, 25, 65));
  // R90 maps (x,y) -> (-y,x)
  ShapeList r90 = place("R90", {100, 0});
  CHECK(r90[0].bbox() == Rect{60, 0, 100, 30});
  // R180
  ShapeList r180 = place("R180", {50, 50});
  CHECK(r180[0].bbox() == Rect{20, 10, 50, 50});
  // MY flips x
  ShapeList my = place("MY", {50, 0});
  CHECK(my[0].bbox() == Rect{20, 0, 50, 40});
  CHECK(oracle::cell_in_set(my, 45, 35));
  // composition MXR90: first y -> -y, then rotate; net effect (x,y) -> (y,x)
  ShapeList mxr90 = place("MXR90", {0, 0});
  CHECK(mxr90[0].bbox() == Rect{0, 0, 40, 30});
  CHECK(oracle::cell_in_set(mxr90, 35, 5));   // long arm now lies along the bottom
  CHECK(!oracle::cell_in_set(mxr90, 35, 25));
}

TEST_CASE("flatten is translation-equivariant") {
  json leaf = minimal_cell("LEAF");
  json mid{{"name", "MID"},
           {"instances",
            {{{"cell", "LEAF"}, {"at", {40, 70}}, {"orient", "R90"}},
             {{"cell", "LEAF"}, {"at", {300, 0}}}}}};
  json top{{"name", "TOP"}, {"instances", {{{"cell", "MID"}, {"at", {1234, -567}}}}}};
  cell_library lib = lib_from(json{{"schema_version", 1}, {"cells", {leaf, mid, top}}});
  flat_layout fm = lib.flatten("MID");
  flat_layout ft = lib.flatten("TOP");
  REQUIRE(fm.layers.at("M1A").size() == ft.layers.at("M1A").size());
  for (size_t i = 0; i < fm.layers.at("M1A").size(); ++i) {
    Polygon moved = fm.layers.at("M1A")[i];
    for (Point& p : moved.v) { p.x += 1234; p.y += -567; }
    CHECK(normalize({moved}) == normalize({ft.layers.at("M1A")[i]}));
  }
}

TEST_CASE("save round-trips") {
  cell_library lib =
      cell_library::load(std::string(FV_FIXTURES_DIR) + "/cells/inverter.json", tech());
  std::string text = lib.save();
  cell_library lib2 = cell_library::parse(text, "roundtrip", tech());
  CHECK(lib2.save() == text);  // serialization is a fixed point
  flat_layout a = lib.flatten("INV");
  flat_layout b = lib2.flatten("INV");
  REQUIRE(a.layers.size() == b.layers.size());
  for (const auto& [layer, sl] : a.layers) CHECK(b.layers.at(layer) == sl);
  REQUIRE(a.pins.size() == b.pins.size());
}

TEST_CASE("svg rendering is deterministic and complete") {
  cell_library lib =
      cell_library::load(std::string(FV_FIXTURES_DIR) + "/cells/inverter.json", tech());
  flat_layout f = lib.flatten("INV");
  std::string s1 = svg_string(f, {}, tech());
  std::string s2 = svg_string(f, {}, tech());
  CHECK(s1 == s2);
  for (const auto& [layer, sl] : f.layers)
    CHECK(s1.find("layer_" + layer) != std::string::npos);
  CHECK(s1.find("violations") == std::string::npos);

  violation v;
  v.rule_id = "M1.W.1";
  v.location = {86, 162, 114, 198};
  v.message = "too narrow";
  std::string sv = svg_string(f, {v}, tech());
  CHECK(sv.find("violations") != std::string::npos);
  CHECK(sv.find("M1.W.1") != std::string::npos);
  // marker x = location.x1 - 2
  CHECK(sv.find("<rect x=\"84\"") != std::string::npos);
}
