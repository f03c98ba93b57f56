#pragma once

#include <map>
#include <string>
#include <vector>

#include "finverify/layout.hpp"
#include "finverify/techdb.hpp"

namespace fv {

// one electrically contiguous piece of conductor material. Gate shapes are
// post-cut, active shapes are the diffusion left after subtracting the gate.
struct conductor {
  std::string layer;  // GATE / ACT / NWELL / drawn metal or local-interconnect name
  Polygon shape;
};

struct net {
  std::string name;          // pin label (instance-prefixed) or synthesized n<k>
  std::vector<int> members;  // conductor indices, ascending
};

enum class device_kind { nfin, pfin };
std::string to_string(device_kind k);

struct fin_device {
  device_kind kind = device_kind::nfin;
  int gate = -1, source = -1, drain = -1, bulk = -1;  // net indices
  i64 n_fin = 0;
  i64 l = 0;        // channel length, nm
  i64 w_fin = 0;    // nm
  i64 l_fin_s = 0;  // source-side diffusion extent, nm
  i64 l_fin_d = 0;  // drain-side diffusion extent, nm
  Rect location;    // channel region
};

// source/drain junction footprint of one device
struct junction_geometry {
  i64 area_d = 0, area_s = 0;    // nm^2
  i64 perim_d = 0, perim_s = 0;  // nm
};

junction_geometry fin_junctions(const fin_device& d);
junction_geometry planar_junctions(i64 w, i64 l_ds);  // reference model

struct netlist {
  std::vector<conductor> conductors;
  std::vector<net> nets;          // every conductor belongs to exactly one
  std::vector<fin_device> devices;

  int net_of(int conductor_index) const;  // -1 when out of range
};

// union of the gate color family minus the gate-cut layer, normalized
ShapeList effective_gate(const flat_layout& fl, const tech_db& tech);

// connectivity + device recognition over a flattened layout.
// Throws fv::error on label conflicts, non-integer fin counts, gate lengths
// off the menu, or geometry the device model cannot interpret.
netlist extract(const flat_layout& fl, const tech_db& tech);

// SPICE-like text: one X card per device, deterministic
std::string netlist_text(const netlist& nl);
void write_netlist(const netlist& nl, const std::string& path);

// reference netlist reader: .subckt/.ends, * comments, + continuations,
// X cards `X<name> <d> <g> <s> <b> <NFIN|PFIN> nfin=<n> l=<L>n ...`.
// Picks the .subckt named `top` (or the only one; top-level cards otherwise).
netlist read_reference_netlist(const std::string& text, const std::string& origin,
                               const std::string& top);
netlist load_reference_netlist(const std::string& path, const std::string& top);

struct lvs_result {
  bool match = false;
  std::vector<std::string> diagnostics;
  std::string to_json() const;
};

// MATCH iff a bijection of device-incident nets and devices preserves device
// kind, n_fin, L, and terminal roles with source/drain interchangeable
lvs_result lvs_compare(const netlist& a, const netlist& b);

}  // namespace fv
