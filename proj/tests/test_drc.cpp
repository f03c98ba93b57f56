#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <tuple>

#include "finverify/drc.hpp"
#include "finverify/layout.hpp"
#include "finverify/techdb.hpp"
#include <json.hpp>
#include "oracles.hpp"

using namespace fv;
using json = nlohmann::json;

static const tech_db& tech() {
  static tech_db t = tech_db::load(std::string(FV_FIXTURES_DIR) + "/tech/freepdk15.json");
  return t;
}

static const rule& deck_rule(const std::string& id) {
  for (const rule& r : tech().rules())
    if (r.id == id) return r;
  REQUIRE_MESSAGE(false, "no such rule in the deck: " << id);
  static rule dummy;
  return dummy;
}

static flat_layout fl_of(const std::map<std::string, std::vector<Rect>>& m) {
  flat_layout fl;
  for (const auto& [layer, rects] : m) {
    ShapeList s;
    for (const Rect& r : rects) s.push_back(rect_poly(r));
    fl.layers[layer] = normalize(s);
  }
  return fl;
}

// ---------------------------------------------------------------------------
// brute-force rule evaluation over plain rectangle soups; every shape is kept
// ≥ 1 nm from its color-family neighbours so nothing merges or stitches and
// each rule reduces to a direct all-pairs / all-shapes filter
// ---------------------------------------------------------------------------
namespace brute {

using sig = std::tuple<std::string, Rect, i64, i64>;  // rule, location, measured, required

i64 rect_gap(const Rect& a, const Rect& b) {
  i64 gx = std::max<i64>({0, a.x1 - b.x2, b.x1 - a.x2});
  i64 gy = std::max<i64>({0, a.y1 - b.y2, b.y1 - a.y2});
  return isqrt_floor(gx * gx + gy * gy);
}

Rect cover(const Rect& a, const Rect& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

i64 overlap_area(const Rect& a, const Rect& b) {
  i64 ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  i64 iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  return (ix > 0 && iy > 0) ? ix * iy : 0;
}

struct layout_rects {
  std::map<std::string, std::vector<Rect>> by_layer;

  std::vector<Rect> of(const std::vector<std::string>& names) const {
    std::vector<Rect> out;
    for (const std::string& n : names) {
      auto it = by_layer.find(n);
      if (it != by_layer.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  }
};

std::vector<sig> eval_rule(const layout_rects& g, const rule& r, const tech_db& t) {
  std::vector<sig> out;
  std::vector<std::string> fam = t.color_family(r.layers.at(0));
  auto members = [&](layer_color c) {
    std::vector<std::string> m;
    for (const std::string& n : fam)
      if (t.layer(n).color == c && g.by_layer.count(n)) m.push_back(n);
    return m;
  };
  switch (r.kind) {
    case rule_kind::min_width:
      for (const std::string& n : fam)
        for (const Rect& x : g.of({n}))
          if (std::min(x.w(), x.h()) < r.value)
            out.push_back({r.id, x, std::min(x.w(), x.h()), r.value});
      break;
    case rule_kind::min_area:
      for (const std::string& n : fam)
        for (const Rect& x : g.of({n}))
          if (x.area() < r.value) out.push_back({r.id, x, x.area(), r.value});
      break;
    case rule_kind::min_spacing_same_color:
      for (const std::string& n : fam) {
        auto v = g.of({n});
        for (size_t i = 0; i < v.size(); ++i)
          for (size_t j = i + 1; j < v.size(); ++j) {
            i64 d = rect_gap(v[i], v[j]);
            if (d < r.value) out.push_back({r.id, cover(v[i], v[j]), d, r.value});
          }
      }
      break;
    case rule_kind::min_spacing_diff_color:
      for (const std::string& na : members(layer_color::a))
        for (const std::string& nb : members(layer_color::b))
          for (const Rect& x : g.of({na}))
            for (const Rect& y : g.of({nb})) {
              i64 d = rect_gap(x, y);
              if (d < r.value) out.push_back({r.id, cover(x, y), d, r.value});
            }
      break;
    case rule_kind::width_quantized:
      for (const std::string& n : fam)
        for (const Rect& x : g.of({n})) {
          i64 w = t.fins().fins_horizontal ? x.h() : x.w();
          if (w >= r.base && (w - r.base) % r.step == 0) continue;
          i64 k = w <= r.base ? 0 : (w - r.base + r.step / 2) / r.step;
          out.push_back({r.id, x, w, r.base + k * r.step});
        }
      break;
    case rule_kind::discrete_length: {
      std::vector<Rect> act = g.of(t.color_family(t.active_layer()));
      for (const std::string& n : fam)
        for (const Rect& x : g.of({n})) {
          bool crosses = false;
          for (const Rect& a : act) crosses = crosses || overlap_area(x, a) > 0;
          i64 len = crosses ? (t.fins().fins_horizontal ? x.w() : x.h())
                            : std::min(x.w(), x.h());
          if (std::find(r.allowed.begin(), r.allowed.end(), len) != r.allowed.end())
            continue;
          i64 best = r.allowed.front();
          for (i64 v : r.allowed)
            if (std::llabs(v - len) < std::llabs(best - len)) best = v;
          out.push_back({r.id, x, len, best});
        }
      break;
    }
    case rule_kind::rect_only:
      break;  // plain rectangles never trip it
    case rule_kind::enclosure: {
      std::vector<Rect> outer;
      for (const std::string& o : r.outers) {
        auto v = g.of(t.color_family(o));
        outer.insert(outer.end(), v.begin(), v.end());
      }
      for (const std::string& n : fam)
        for (const Rect& x : g.of({n})) {
          i64 best = -1;  // outers are mutually gapped, so one rect must cover
          for (const Rect& o : outer) {
            i64 m = std::min({x.x1 - o.x1, x.y1 - o.y1, o.x2 - x.x2, o.y2 - x.y2});
            if (m >= 0) best = std::max(best, m);
          }
          if (best < r.value)
            out.push_back({r.id, x, best < 0 ? -1 : std::min(best, r.value - 1), r.value});
        }
      break;
    }
    case rule_kind::overlap: {
      std::vector<Rect> outer;
      for (const std::string& o : r.outers) {
        auto v = g.of(t.color_family(o));
        outer.insert(outer.end(), v.begin(), v.end());
      }
      for (const std::string& n : fam)
        for (const Rect& x : g.of({n})) {
          i64 a = 0;
          for (const Rect& o : outer) a += overlap_area(x, o);
          if (a < r.value) out.push_back({r.id, x, a, r.value});
        }
      break;
    }
  }
  return out;
}

std::vector<sig> eval_deck(const layout_rects& g, const tech_db& t) {
  std::vector<sig> out;
  for (const rule& r : t.rules()) {
    auto v = eval_rule(g, r, t);
    out.insert(out.end(), v.begin(), v.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace brute

static std::vector<brute::sig> sigs_of(const std::vector<violation>& vs) {
  std::vector<brute::sig> out;
  for (const violation& v : vs) out.push_back({v.rule_id, v.location, v.measured, v.required});
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

TEST_CASE("min width flags narrow polygons and passes the boundary") {
  rule r = deck_rule("M1.W.1");
  REQUIRE(r.value == 28);
  auto narrow = check_rule(fl_of({{"M1A", {{0, 0, 200, 26}}}}), tech(), r);
  REQUIRE(narrow.size() == 1);
  CHECK(narrow[0].measured == 26);
  CHECK(narrow[0].required == 28);
  CHECK(narrow[0].layers == std::vector<std::string>{"M1A"});
  CHECK(narrow[0].location == Rect{0, 0, 200, 26});
  CHECK(check_rule(fl_of({{"M1A", {{0, 0, 200, 28}}}}), tech(), r).empty());
}

TEST_CASE("min width equals a direct filter on random rects") {
  std::mt19937 rng(901);
  std::uniform_int_distribution<i64> pos(0, 2000), dim(20, 40);
  std::vector<Rect> rects;
  while (rects.size() < 50) {
    i64 x = pos(rng), y = pos(rng);
    Rect c{x, y, x + dim(rng), y + dim(rng)};
    bool ok = true;
    for (const Rect& e : rects) ok = ok && brute::rect_gap(e, c) >= 1;
    if (ok) rects.push_back(c);
  }
  auto got = sigs_of(check_rule(fl_of({{"M1A", rects}}), tech(), deck_rule("M1.W.1")));
  std::vector<brute::sig> want;
  for (const Rect& x : rects)
    if (std::min(x.w(), x.h()) < 28) want.push_back({"M1.W.1", x, std::min(x.w(), x.h()), 28});
  std::sort(want.begin(), want.end());
  CHECK(got == want);
  CHECK(!want.empty());  // the size range straddles the limit
}

TEST_CASE("same-color spacing fires where diff-color spacing does not") {
  // 20 nm apart on one mask: violation against the 28 nm same-color rule
  auto same = check_rule(fl_of({{"M1A", {{0, 0, 100, 30}, {0, 50, 100, 80}}}}), tech(),
                         deck_rule("M1.S.1"));
  REQUIRE(same.size() == 1);
  CHECK(same[0].measured == 20);
  CHECK(same[0].required == 28);
  CHECK(same[0].location == Rect{0, 0, 100, 80});
  // the same 20 nm across masks clears the smaller cross-color pitch
  flat_layout split = fl_of({{"M1A", {{0, 0, 100, 30}}}, {"M1B", {{0, 50, 100, 80}}}});
  CHECK(check_rule(split, tech(), deck_rule("M1.S.2")).empty());
  CHECK(check_rule(split, tech(), deck_rule("M1.S.1")).empty());
  // a single shape has no pairs
  CHECK(check_rule(fl_of({{"M1A", {{0, 0, 100, 30}}}}), tech(), deck_rule("M1.S.1")).empty());
  // diagonal gap is Euclidean: 20/21 offsets -> 29 nm, passes; corner contact is 0
  auto diag = check_rule(fl_of({{"M1A", {{0, 0, 100, 30}, {120, 51, 220, 80}}}}), tech(),
                         deck_rule("M1.S.1"));
  CHECK(diag.empty());
  auto corner = check_rule(fl_of({{"M1A", {{0, 0, 30, 30}, {30, 30, 60, 60}}}}), tech(),
                           deck_rule("M1.S.1"));
  REQUIRE(corner.size() == 1);
  CHECK(corner[0].measured == 0);
}

TEST_CASE("touching and stitched shapes are exempt from spacing") {
  // A--B overlap (a stitch) with the second A reachable only through B:
  // all one electrical shape, no spacing violations at 10 nm nominal gaps
  flat_layout stitched = fl_of({{"M1A", {{0, 0, 30, 30}, {40, 0, 70, 30}}},
                                {"M1B", {{25, 0, 55, 30}}}});
  CHECK(check_rule(stitched, tech(), deck_rule("M1.S.1")).empty());
  CHECK(check_rule(stitched, tech(), deck_rule("M1.S.2")).empty());
  // an unconnected island nearby is still checked against every neighbour
  flat_layout island = fl_of({{"M1A", {{0, 0, 30, 30}, {40, 0, 70, 30}, {0, 40, 30, 70}}},
                              {"M1B", {{25, 0, 55, 30}}}});
  auto s1 = check_rule(island, tech(), deck_rule("M1.S.1"));
  REQUIRE(s1.size() == 2);  // island vs both A shapes (the second diagonally)
  CHECK(s1[0].measured == 10);
  CHECK(s1[1].measured == 14);  // floor of the 10/10 diagonal gap
  auto s2 = check_rule(island, tech(), deck_rule("M1.S.2"));
  REQUIRE(s2.size() == 1);
  CHECK(s2[0].measured == 10);  // island to the stitching B shape
  CHECK(s2[0].layers == std::vector<std::string>{"M1A", "M1B"});
}

TEST_CASE("active width quantization accepts exactly the fin grid") {
  rule r = deck_rule("ACT.Q.1");
  REQUIRE(r.base == 8);
  REQUIRE(r.step == 40);
  CHECK(check_rule(fl_of({{"ACT", {{0, 0, 100, 88}}}}), tech(), r).empty());  // 3 fins
  CHECK(check_rule(fl_of({{"ACT", {{0, 0, 100, 8}}}}), tech(), r).empty());   // 1 fin
  auto bad = check_rule(fl_of({{"ACT", {{0, 0, 100, 60}}}}), tech(), r);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].measured == 60);
  CHECK(bad[0].required == 48);  // nearest drawable width
  for (i64 h = 1; h <= 170; ++h) {
    bool legal = h >= 8 && (h - 8) % 40 == 0;
    auto v = check_rule(fl_of({{"ACT", {{0, 0, 100, h}}}}), tech(), r);
    CHECK_MESSAGE(v.empty() == legal, "height " << h);
  }
}

TEST_CASE("quantization measures the drawn width across the fins, not the run") {
  // a long thin strip along the fin direction: the 60 nm is vertical
  auto v = check_rule(fl_of({{"ACT", {{0, 0, 1000, 60}}}}), tech(), deck_rule("ACT.Q.1"));
  REQUIRE(v.size() == 1);
  CHECK(v[0].measured == 60);
  // 88 nm tall but only 20 nm long still quantizes on the height
  CHECK(check_rule(fl_of({{"ACT", {{0, 0, 20, 88}}}}), tech(), deck_rule("ACT.Q.1")).empty());
}

TEST_CASE("gate lengths are restricted to the discrete menu") {
  rule r = deck_rule("GATE.L.1");
  REQUIRE(r.allowed == std::vector<i64>{14, 16, 20});
  auto gate_over_act = [&](i64 w) {
    return fl_of({{"ACT", {{0, 0, 200, 88}}}, {"GATEA", {{50, -20, 50 + w, 120}}}});
  };
  CHECK(check_rule(gate_over_act(16), tech(), r).empty());
  CHECK(check_rule(gate_over_act(20), tech(), r).empty());
  CHECK(check_rule(gate_over_act(14), tech(), r).empty());
  auto bad = check_rule(gate_over_act(15), tech(), r);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].measured == 15);
  CHECK(bad[0].message.find("{14, 16, 20}") != std::string::npos);
  // a wide gate region crossing active reads its length along the fins
  auto wide = check_rule(gate_over_act(30), tech(), r);
  REQUIRE(wide.size() == 1);
  CHECK(wide[0].measured == 30);
  // gates that never cross active (dummies, routing) use their smaller side
  CHECK(check_rule(fl_of({{"GATEA", {{300, 0, 600, 14}}}}), tech(), r).empty());
  auto dummy_bad = check_rule(fl_of({{"GATEA", {{300, 0, 315, 300}}}}), tech(), r);
  REQUIRE(dummy_bad.size() == 1);
  CHECK(dummy_bad[0].measured == 15);
}

TEST_CASE("gate shapes must be rectangles; bent gates skip the length check") {
  // two fused rects make a 6-vertex L; a cross makes 12 vertices
  flat_layout l_shape = fl_of({{"GATEA", {{0, 0, 30, 10}, {0, 0, 10, 40}}}});
  auto rv = check_rule(l_shape, tech(), deck_rule("GATE.R.1"));
  REQUIRE(rv.size() == 1);
  CHECK(rv[0].measured == 6);
  CHECK(rv[0].required == 4);
  CHECK(check_rule(l_shape, tech(), deck_rule("GATE.L.1")).empty());
  flat_layout t_shape = fl_of({{"GATEA", {{0, 0, 60, 10}, {25, 0, 35, 40}}}});
  auto tv = check_rule(t_shape, tech(), deck_rule("GATE.R.1"));
  REQUIRE(tv.size() == 1);
  CHECK(tv[0].measured == 8);
  CHECK(check_rule(fl_of({{"GATEA", {{0, 0, 16, 100}}}}), tech(), deck_rule("GATE.R.1")).empty());
  // non-rectangular active skips quantization the same way
  flat_layout act_l = fl_of({{"ACT", {{0, 0, 100, 48}, {0, 0, 40, 88}}}});
  CHECK(check_rule(act_l, tech(), deck_rule("ACT.Q.1")).empty());
  CHECK(check_rule(act_l, tech(), deck_rule("ACT.R.1")).size() == 1);
}

TEST_CASE("enclosure requires the grown shape to stay inside the outer layer") {
  rule e4 = deck_rule("V0.E.1");
  REQUIRE(e4.value == 4);
  flat_layout centered = fl_of({{"V0", {{4, 4, 18, 18}}}, {"M1A", {{0, 0, 22, 22}}}});
  CHECK(check_rule(centered, tech(), e4).empty());
  rule e5 = e4;
  e5.value = 5;
  auto v = check_rule(centered, tech(), e5);
  REQUIRE(v.size() == 1);
  CHECK(v[0].measured == 4);  // achieved margin
  CHECK(v[0].required == 5);
  // off-centre via: margin limited by the tight side
  auto tight = check_rule(fl_of({{"V0", {{2, 4, 16, 18}}}, {"M1A", {{0, 0, 22, 22}}}}),
                          tech(), e4);
  REQUIRE(tight.size() == 1);
  CHECK(tight[0].measured == 2);
  // a via with no metal at all is reported as uncovered
  auto bare = check_rule(fl_of({{"V0", {{100, 100, 114, 114}}}}), tech(), e4);
  REQUIRE(bare.size() == 1);
  CHECK(bare[0].measured == -1);
  // the outer side may be satisfied by the union across both masks
  flat_layout striped = fl_of({{"V0", {{4, 4, 18, 18}}},
                               {"M1A", {{0, 0, 11, 22}}},
                               {"M1B", {{11, 0, 22, 22}}}});
  CHECK(check_rule(striped, tech(), e4).empty());
}

TEST_CASE("landing overlap area is measured against the outer union") {
  rule r = deck_rule("V0.O.1");
  REQUIRE(r.value == 196);
  auto zero = check_rule(fl_of({{"V0", {{0, 0, 14, 14}}}, {"AIL2", {{50, 0, 64, 14}}}}),
                         tech(), r);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].measured == 0);
  auto part = check_rule(fl_of({{"V0", {{0, 0, 14, 14}}}, {"AIL2", {{7, 0, 60, 40}}}}),
                         tech(), r);
  REQUIRE(part.size() == 1);
  CHECK(part[0].measured == 98);
  CHECK(check_rule(fl_of({{"V0", {{0, 0, 14, 14}}}, {"AIL2", {{0, 0, 40, 40}}}}), tech(), r)
            .empty());  // exactly full landing passes
  // the 196 nm^2 may come from two landing layers jointly
  flat_layout joint = fl_of({{"V0", {{0, 0, 14, 14}}},
                             {"AIL2", {{0, 0, 7, 14}}},
                             {"GIL", {{7, 0, 14, 14}}}});
  CHECK(check_rule(joint, tech(), r).empty());
}

TEST_CASE("area rule passes at exactly the minimum") {
  rule r = deck_rule("M1.A.1");
  REQUIRE(r.value == 784);
  CHECK(check_rule(fl_of({{"M1B", {{0, 0, 28, 28}}}}), tech(), r).empty());
  auto v = check_rule(fl_of({{"M1B", {{0, 0, 28, 27}}}}), tech(), r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].measured == 756);
}

TEST_CASE("clean fixtures produce an empty report") {
  cell_library lib =
      cell_library::load(std::string(FV_FIXTURES_DIR) + "/cells/inverter.json", tech());
  for (const char* top : {"INV", "INV_STITCH"}) {
    drc_report rep = run_drc(lib.flatten(top), tech());
    CHECK_MESSAGE(rep.violations.empty(), top << ": " << rep.to_json());
  }
  CHECK(run_drc(flat_layout{}, tech()).violations.empty());
}

TEST_CASE("seeded mutations are reported exactly, with no bycatch") {
  std::string text =
      read_file(std::string(FV_FIXTURES_DIR) + "/cells/inverter.json");
  auto mutated = [&](const std::string& layer, size_t idx, Rect to) {
    json j = json::parse(text);
    for (auto& c : j["cells"])
      if (c["name"] == "INV") c["layers"][layer][idx]["rect"] = {to.x1, to.y1, to.x2, to.y2};
    cell_library lib = cell_library::parse(j.dump(), "mutated", tech());
    return run_drc(lib.flatten("INV"), tech());
  };

  // narrow the VSS rail to 26 nm: one width violation, nothing else
  drc_report narrow = run_drc(
      [&] {
        json j = json::parse(text);
        for (auto& c : j["cells"])
          if (c["name"] == "INV") c["layers"]["M1A"][0]["rect"] = {0, 0, 200, 26};
        return cell_library::parse(j.dump(), "mutated", tech()).flatten("INV");
      }(),
      tech());
  REQUIRE(narrow.violations.size() == 1);
  CHECK(narrow.violations[0].rule_id == "M1.W.1");
  CHECK(narrow.violations[0].measured == 26);

  // narrow it further and the via loses its metal cover too
  drc_report tight = mutated("M1A", 0, {0, 0, 200, 24});
  REQUIRE(tight.violations.size() == 2);
  CHECK(tight.violations[0].rule_id == "M1.W.1");
  CHECK(tight.violations[1].rule_id == "V0.E.1");
  CHECK(tight.violations[1].measured == 3);

  // a 15 nm gate is off the menu
  drc_report len = mutated("GATEA", 0, {92, 40, 107, 320});
  REQUIRE(len.violations.size() == 1);
  CHECK(len.violations[0].rule_id == "GATE.L.1");
  CHECK(len.violations[0].measured == 15);

  // slide a drain contact against its neighbour
  drc_report close = mutated("AIL1", 1, {80, 56, 100, 152});
  REQUIRE(close.violations.size() == 1);
  CHECK(close.violations[0].rule_id == "AIL1.S.1");
  CHECK(close.violations[0].measured == 4);

  // stretch the lower active row off the fin grid
  drc_report quant = mutated("ACT", 0, {40, 60, 160, 150});
  REQUIRE(quant.violations.size() == 1);
  CHECK(quant.violations[0].rule_id == "ACT.Q.1");
  CHECK(quant.violations[0].measured == 90);
}

TEST_CASE("report JSON is stable across runs and worker counts") {
  cell_library lib =
      cell_library::load(std::string(FV_FIXTURES_DIR) + "/cells/inverter.json", tech());
  // mutate in memory to get a non-empty report
  flat_layout fl = lib.flatten("INV_STITCH");
  fl.layers["M1A"].push_back(rect_poly({0, 400, 20, 420}));  // tiny island: area+width
  fl.layers["M1A"] = normalize(fl.layers["M1A"]);
  std::string first = run_drc(fl, tech(), 1).to_json();
  CHECK(!run_drc(fl, tech(), 1).violations.empty());
  for (int workers : {1, 2, 4, 8}) {
    CHECK(run_drc(fl, tech(), workers).to_json() == first);
    CHECK(run_drc(fl, tech(), workers).to_json() == first);
  }
}

TEST_CASE("full deck equals brute force on random rectangle layouts") {
  std::mt19937 rng(77001);
  std::uniform_int_distribution<i64> pos(0, 400);
  auto family_of = [](const std::string& l) -> std::string {
    if (l[0] == 'M') return "M1";
    if (l.substr(0, 4) == "GATE") return "GATE";
    return l;
  };
  struct spec_row {
    const char* layer;
    int max_n;
    i64 wlo, whi, hlo, hhi;
  };
  const spec_row plan[] = {
      {"M1A", 8, 20, 40, 20, 40},  {"M1B", 6, 20, 40, 20, 40},
      {"ACT", 5, 30, 120, 4, 100}, {"GATEA", 5, 12, 22, 30, 120},
      {"GATEB", 4, 12, 22, 30, 120}, {"V0", 6, 10, 18, 10, 18},
      {"AIL2", 5, 18, 60, 18, 60},
  };
  int checked_layouts = 0;
  size_t total_violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    brute::layout_rects g;
    for (const spec_row& row : plan) {
      std::uniform_int_distribution<int> cnt(0, row.max_n);
      std::uniform_int_distribution<i64> dw(row.wlo, row.whi), dh(row.hlo, row.hhi);
      int want = cnt(rng);
      auto& mine = g.by_layer[row.layer];
      for (int tries = 0; (int)mine.size() < want && tries < 400; ++tries) {
        i64 x = pos(rng), y = pos(rng);
        Rect c{x, y, x + dw(rng), y + dh(rng)};
        bool ok = true;
        for (const spec_row& other : plan)
          if (family_of(other.layer) == family_of(row.layer))
            for (const Rect& e : g.by_layer[other.layer])
              ok = ok && brute::rect_gap(e, c) >= 1;
        if (ok) mine.push_back(c);
      }
    }
    std::map<std::string, std::vector<Rect>> as_map;
    size_t shapes = 0;
    for (auto& [l, v] : g.by_layer) {
      as_map[l] = v;
      shapes += v.size();
    }
    REQUIRE(shapes <= 50);
    flat_layout fl = fl_of(as_map);
    // the gap discipline must have kept every rectangle intact
    for (auto& [l, v] : g.by_layer) CHECK(fl.layers[l].size() == v.size());

    drc_report rep = run_drc(fl, tech(), trial % 2 ? 4 : 1);
    auto got = sigs_of(rep.violations);
    auto want = brute::eval_deck(g, tech());
    CHECK_MESSAGE(got == want, "trial " << trial << ": engine " << got.size()
                                        << " vs brute " << want.size());
    ++checked_layouts;
    total_violations += want.size();
  }
  CHECK(checked_layouts == 20);
  CHECK(total_violations > 50);  // the ranges straddle the limits by design
}

TEST_CASE("violations come out sorted by rule then location") {
  flat_layout fl = fl_of({{"M1A", {{0, 0, 20, 20}, {100, 0, 120, 20}, {0, 100, 20, 120}}}});
  drc_report rep = run_drc(fl, tech());
  REQUIRE(rep.violations.size() >= 6);  // width + area per island, spacing pairs
  CHECK(std::is_sorted(rep.violations.begin(), rep.violations.end(),
                       [](const violation& a, const violation& b) { return a < b; }));
  for (size_t i = 1; i < rep.violations.size(); ++i)
    CHECK(rep.violations[i - 1].rule_id <= rep.violations[i].rule_id);
}
