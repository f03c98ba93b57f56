#pragma once

#include <map>
#include <string>
#include <vector>

#include "finverify/netex.hpp"

namespace fv {

// where a parasitic element came from; names appear in reports and cards
enum class parasitic_origin {
  plate,
  fringe,
  coupling,
  sheet,
  via,
  gate_contact,
  contact_contact,
};
std::string to_string(parasitic_origin o);

enum class element_kind { cap, res };

struct parasitic_element {
  element_kind kind = element_kind::cap;
  std::string a, b;  // node names; capacitors to ground use b = "GND"
  double value = 0;  // aF for capacitors, ohm for resistors
  parasitic_origin origin = parasitic_origin::plate;
};

// drawn-wire cross section, all in µm
struct wire_geometry {
  double w = 0;       // width
  double t = 0;       // thickness
  double h = 0;       // dielectric height below the wire
  double s = 0;       // edge-to-edge spacing to the neighbor (coupling only)
  double length = 0;  // facing run
};

enum class pex_model { plate, sakurai, sakurai_coupling };
pex_model parse_pex_model(const std::string& flag);
std::string to_string(pex_model m);

double cap_parallel_plate(double area_um2, double d_um, double k);
double cap_sakurai_total(const wire_geometry& g, double k,
                         std::vector<std::string>* warnings = nullptr);
double cap_sakurai_coupling(const wire_geometry& g, double k,
                            std::vector<std::string>* warnings = nullptr);

struct pex_result {
  std::vector<parasitic_element> elements;
  std::vector<std::string> warnings;
  std::map<std::string, int> node_net;               // node name -> net index
  std::map<std::string, std::string> pin_node;       // pin label -> node name
  std::map<std::string, std::string> terminal_node;  // "X<i>.<d|g|s>" -> node name
};

pex_result extract_parasitics(const flat_layout& fl, const tech_db& tech,
                              const netlist& nl, pex_model model);

// base netlist followed by C and R cards in sorted deterministic order
std::string annotated_netlist_text(const netlist& nl, const pex_result& px);

// per-net {C_ground_aF, C_coupling_aF, R_total_ohm} plus model and warnings
std::string pex_report_json(const netlist& nl, const pex_result& px, pex_model model);

// Elmore delay in seconds through the resistor tree rooted at `root`;
// capacitor values hang on their `a`/`b` nodes, non-tree topology is an error
double elmore_delay(const std::vector<parasitic_element>& elements,
                    const std::string& root, const std::string& sink);

// inverter-chain delay under three capacitance budgets: load gates only,
// plus junction geometry, plus extracted wiring
struct delay_study {
  double none = 0, geometry = 0, extracted = 0;  // seconds
};
delay_study chain_delay(const netlist& nl, const pex_result& px, const tech_db& tech,
                        const std::string& in_pin, const std::string& out_pin);

}  // namespace fv
