#pragma once

#include <string>
#include <vector>

#include "finverify/layout.hpp"
#include "finverify/techdb.hpp"

namespace fv {

struct violation {
  std::string rule_id;
  std::vector<std::string> layers;
  Rect location{0, 0, 0, 0};  // bounding box of the offending geometry
  i64 measured = 0;           // nm, or nm^2 for area rules
  i64 required = 0;
  std::string message;

  bool operator==(const violation& o) const {
    return rule_id == o.rule_id && layers == o.layers && location == o.location &&
           measured == o.measured && required == o.required;
  }
  bool operator<(const violation& o) const {
    if (rule_id != o.rule_id) return rule_id < o.rule_id;
    if (!(location == o.location)) return location < o.location;
    return layers < o.layers;
  }
};

struct drc_report {
  std::vector<violation> violations;
  std::string to_json() const;  // deterministic
};

// evaluate one rule against the flattened layout
std::vector<violation> check_rule(const flat_layout& layout, const tech_db& tech,
                                  const rule& r);

// full deck; rules may be evaluated in parallel (workers >= 1), output is
// sorted and identical for any worker count
drc_report run_drc(const flat_layout& layout, const tech_db& tech, int workers = 1);

}  // namespace fv
