#pragma once

#include <map>
#include <string>
#include <vector>

#include "finverify/util.hpp"

namespace fv {

enum class layer_class { active, gate, gate_cut, mol, metal, via };
enum class layer_color { none, a, b };

std::string to_string(layer_class c);
std::string to_string(layer_color c);

struct layer_def {
  std::string name;
  layer_class cls = layer_class::metal;
  int level = 0;  // metal stack position, 1..13; 0 for non-metals
  layer_color color = layer_color::none;
  std::string base;  // uncolored parent for A/B variants, else empty
  bool marker = false;  // well/implant marker, no electrical body
  i64 thickness = 0;    // nm
  i64 height = 0;       // nm, bottom of conductor above substrate
  double resistivity = 0;    // ohm*um
  double via_resistance = 0; // ohm, vias and MOL landing interfaces
};

enum class rule_kind {
  min_width,
  min_spacing_same_color,
  min_spacing_diff_color,
  min_area,
  enclosure,
  overlap,
  width_quantized,
  discrete_length,
  rect_only,
};

std::string to_string(rule_kind k);

struct rule {
  std::string id;
  rule_kind kind = rule_kind::min_width;
  std::vector<std::string> layers;  // subject layer(s); family-expanded by drc
  std::vector<std::string> outers;  // enclosure/overlap reference layers
  i64 value = 0;                    // nm, or nm^2 for area rules
  i64 base = 0, step = 0;           // width_quantized
  std::vector<i64> allowed;         // discrete_length
};

enum class connect_mode { overlap, through_via };

struct connect_entry {
  std::string layer_a, layer_b;
  connect_mode mode = connect_mode::overlap;
  std::string via;  // through_via only
};

struct fin_params {
  i64 w_fin = 0;
  i64 pitch_fin = 0;
  std::vector<i64> allowed_gate_lengths;
  bool fins_horizontal = true;
};

struct dielectric_slab {
  std::string name;
  i64 z_lo = 0, z_hi = 0;  // nm
  double k = 1.0;
};

struct delay_params {
  double switch_resistance_per_fin_ohm = 0;
  double gate_cap_af_per_nm2 = 0;
  double junction_cap_af_per_nm2 = 0;
  double junction_cap_af_per_nm = 0;
};

// Immutable technology description: layer stack, rule deck, connectivity
// table, fin quantization parameters, dielectric stack, delay constants.
class tech_db {
 public:
  static tech_db load(const std::string& path);
  static tech_db parse(const std::string& text, const std::string& origin);

  const std::string& name() const { return name_; }
  const std::vector<layer_def>& layers() const { return layers_; }
  bool has_layer(const std::string& n) const;
  const layer_def& layer(const std::string& n) const;

  // all members of the double-patterned level this layer belongs to,
  // including the uncolored base; singleton for unpatterned layers. Sorted.
  std::vector<std::string> color_family(const std::string& n) const;

  double sheet_resistance(const std::string& n) const;  // ohm per square

  const std::vector<rule>& rules() const { return rules_; }
  const std::vector<connect_entry>& connectivity() const { return connect_; }
  const fin_params& fins() const { return fins_; }
  const std::vector<dielectric_slab>& dielectrics() const { return diel_; }
  const delay_params& delay() const { return delay_; }

  const std::string& gate_cut_layer() const { return gate_cut_; }
  const std::string& gate_base_layer() const { return gate_base_; }
  const std::string& active_layer() const { return active_; }
  const std::string& well_layer() const { return well_; }

  // uncolored metal base names ordered by level 1..N
  std::vector<std::string> metals_in_order() const;

  double dielectric_k_at(i64 z) const;
  // series-combined effective k of the stack between two heights
  double k_eff_between(i64 z_lo, i64 z_hi) const;

 private:
  std::string name_;
  std::vector<layer_def> layers_;
  std::map<std::string, size_t> index_;
  std::vector<rule> rules_;
  std::vector<connect_entry> connect_;
  fin_params fins_;
  std::vector<dielectric_slab> diel_;
  delay_params delay_;
  std::string gate_cut_, gate_base_, active_, well_;

  void validate();
};

}  // namespace fv
