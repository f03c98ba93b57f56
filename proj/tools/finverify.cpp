#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "finverify/drc.hpp"
#include "finverify/geometry.hpp"
#include "finverify/layout.hpp"
#include "finverify/netex.hpp"
#include "finverify/pex.hpp"
#include "finverify/svg.hpp"
#include "finverify/techdb.hpp"
#include "finverify/util.hpp"

namespace {

using nlohmann::ordered_json;

// reports land whole or not at all
void atomic_write(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw fv::error("cannot open " + tmp + " for writing");
    f << text;
    f.flush();
    if (!f) throw fv::error("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw fv::error("cannot move " + tmp + " into place at " + path);
  }
}

std::string resolve_top(const fv::cell_library& lib, const std::string& requested) {
  if (!requested.empty()) {
    if (!lib.has(requested)) {
      std::string known;
      for (const std::string& n : lib.names()) known += (known.empty() ? "" : ", ") + n;
      throw fv::error("no cell named " + requested + " (library has: " + known + ")");
    }
    return requested;
  }
  std::vector<std::string> names = lib.names();
  if (names.size() == 1) return names.front();
  std::string known;
  for (const std::string& n : names) known += (known.empty() ? "" : ", ") + n;
  throw fv::error("--top required, library has several cells: " + known);
}

struct loaded {
  fv::tech_db tech;
  fv::cell_library lib;
  std::string top;
  fv::flat_layout fl;
};

loaded load_all(const std::string& tech_path, const std::string& layout_path,
                const std::string& top) {
  fv::tech_db tech = fv::tech_db::load(tech_path);
  fv::cell_library lib = fv::cell_library::load(layout_path, tech);
  std::string t = resolve_top(lib, top);
  fv::flat_layout fl = lib.flatten(t);
  return {std::move(tech), std::move(lib), t, std::move(fl)};
}

ordered_json density_json(const fv::flat_layout& fl, const std::string& top) {
  ordered_json j;
  j["top"] = top;
  fv::Rect bb = fl.bbox();
  j["bbox"] = {bb.x1, bb.y1, bb.x2, bb.y2};
  j["bbox_area_nm2"] = (bb.x2 - bb.x1) * (bb.y2 - bb.y1);
  ordered_json layers = ordered_json::object();
  for (const auto& [name, shapes] : fl.layers) layers[name] = fv::area(shapes);
  j["layer_area_nm2"] = std::move(layers);
  return j;
}

int run_drc_cmd(const loaded& L, int workers, const std::string& report,
                const std::string& svg) {
  fv::drc_report rep = fv::run_drc(L.fl, L.tech, workers);
  if (!report.empty()) atomic_write(report, rep.to_json());
  if (!svg.empty()) atomic_write(svg, fv::svg_string(L.fl, rep.violations, L.tech));
  std::printf("drc %s: %zu violation%s\n", L.top.c_str(), rep.violations.size(),
              rep.violations.size() == 1 ? "" : "s");
  size_t shown = 0;
  for (const fv::violation& v : rep.violations) {
    std::printf("  %-14s %-10s (%lld,%lld)-(%lld,%lld) measured %lld, needs %lld\n",
                v.rule_id.c_str(), v.layers.empty() ? "" : v.layers[0].c_str(),
                (long long)v.location.x1, (long long)v.location.y1,
                (long long)v.location.x2, (long long)v.location.y2,
                (long long)v.measured, (long long)v.required);
    if (++shown == 20 && rep.violations.size() > 20) {
      std::printf("  ... %zu more\n", rep.violations.size() - shown);
      break;
    }
  }
  return rep.violations.empty() ? 0 : 1;
}

int run_extract_cmd(const loaded& L, const std::string& netlist_path) {
  fv::netlist nl = fv::extract(L.fl, L.tech);
  std::string text = fv::netlist_text(nl);
  if (netlist_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    atomic_write(netlist_path, text);
    std::printf("extract %s: %zu nets, %zu devices -> %s\n", L.top.c_str(),
                nl.nets.size(), nl.devices.size(), netlist_path.c_str());
  }
  return 0;
}

int run_lvs_cmd(const loaded& L, const std::string& schematic,
                const std::string& report) {
  fv::netlist ext = fv::extract(L.fl, L.tech);
  fv::netlist ref = fv::load_reference_netlist(schematic, L.top);
  fv::lvs_result r = fv::lvs_compare(ext, ref);
  if (!report.empty()) atomic_write(report, r.to_json());
  std::printf("lvs %s vs %s: %s\n", L.top.c_str(), schematic.c_str(),
              r.match ? "MATCH" : "MISMATCH");
  for (const std::string& d : r.diagnostics) std::printf("  %s\n", d.c_str());
  return r.match ? 0 : 1;
}

int run_pex_cmd(const loaded& L, fv::pex_model model, const std::string& report,
                const std::string& netlist_path) {
  fv::netlist nl = fv::extract(L.fl, L.tech);
  fv::pex_result px = fv::extract_parasitics(L.fl, L.tech, nl, model);
  if (!report.empty()) atomic_write(report, fv::pex_report_json(nl, px, model));
  if (!netlist_path.empty()) atomic_write(netlist_path, fv::annotated_netlist_text(nl, px));
  size_t caps = 0, ress = 0;
  for (const fv::parasitic_element& e : px.elements)
    (e.kind == fv::element_kind::cap ? caps : ress)++;
  std::printf("pex %s (%s): %zu capacitors, %zu resistors, %zu warning%s\n",
              L.top.c_str(), fv::to_string(model).c_str(), caps, ress,
              px.warnings.size(), px.warnings.size() == 1 ? "" : "s");
  for (const std::string& w : px.warnings) std::printf("  warning: %s\n", w.c_str());
  return 0;
}

int run_report_cmd(const loaded& L, const std::string& versus_path,
                   const std::string& versus_top, const std::string& report,
                   const std::string& svg) {
  ordered_json j = density_json(L.fl, L.top);
  if (!versus_path.empty()) {
    fv::cell_library vlib = fv::cell_library::load(versus_path, L.tech);
    std::string vtop = resolve_top(vlib, versus_top);
    fv::flat_layout vfl = vlib.flatten(vtop);
    ordered_json vj = density_json(vfl, vtop);
    double a = j["bbox_area_nm2"].get<double>();
    double b = vj["bbox_area_nm2"].get<double>();
    if (b <= 0) throw fv::error("versus layout has an empty bounding box");
    vj["area_ratio"] = a / b;
    j["versus"] = std::move(vj);
  }
  std::string text = j.dump(2) + "\n";
  if (!svg.empty()) atomic_write(svg, fv::svg_string(L.fl, {}, L.tech));
  if (report.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    atomic_write(report, text);
    std::printf("report %s -> %s\n", L.top.c_str(), report.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physical verification for a 15nm fin-based predictive PDK"};
  app.require_subcommand(1);

  std::string tech, layout, top, schematic, report, svg, netlist_path;
  std::string versus_path, versus_top;
  std::string model_name = "sakurai";
  int workers = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tech", tech, "technology JSON file")
        ->envname("FINVERIFY_TECH")
        ->required();
    sub->add_option("--layout", layout, "layout JSON file")->required();
    sub->add_option("--top", top, "top cell (defaults to the only cell)");
  };

  CLI::App* drc = app.add_subcommand("drc", "run the design rule deck");
  add_common(drc);
  drc->add_option("--workers", workers, "parallel rule evaluation")
      ->check(CLI::PositiveNumber);
  drc->add_option("--report", report, "write violation report JSON here");
  drc->add_option("--svg", svg, "render layout with violation markers");

  CLI::App* ext = app.add_subcommand("extract", "extract the device netlist");
  add_common(ext);
  ext->add_option("--netlist", netlist_path, "write netlist here instead of stdout");

  CLI::App* lvs = app.add_subcommand("lvs", "compare layout against a schematic");
  add_common(lvs);
  lvs->add_option("--schematic", schematic, "reference SPICE netlist")->required();
  lvs->add_option("--report", report, "write comparison report JSON here");

  CLI::App* pex = app.add_subcommand("pex", "extract parasitic R and C");
  add_common(pex);
  pex->add_option("--model", model_name,
                  "capacitance model: plate, sakurai, sakurai+coupling");
  pex->add_option("--workers", workers, "accepted for symmetry; extraction is serial")
      ->check(CLI::PositiveNumber);
  pex->add_option("--report", report, "write per-net parasitic summary JSON here");
  pex->add_option("--netlist", netlist_path, "write annotated netlist here");

  CLI::App* rep = app.add_subcommand("report", "layout density report");
  add_common(rep);
  rep->add_option("--versus", versus_path, "second layout to compare areas against");
  rep->add_option("--versus-top", versus_top, "top cell of the second layout");
  rep->add_option("--report", report, "write report JSON here instead of stdout");
  rep->add_option("--svg", svg, "render the layout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    loaded L = load_all(tech, layout, top);
    if (app.got_subcommand(drc)) return run_drc_cmd(L, workers, report, svg);
    if (app.got_subcommand(ext)) return run_extract_cmd(L, netlist_path);
    if (app.got_subcommand(lvs)) return run_lvs_cmd(L, schematic, report);
    if (app.got_subcommand(pex))
      return run_pex_cmd(L, fv::parse_pex_model(model_name), report, netlist_path);
    if (app.got_subcommand(rep))
      return run_report_cmd(L, versus_path, versus_top, report, svg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "finverify: %s\n", e.what());
    return 2;
  }
  return 2;
}
