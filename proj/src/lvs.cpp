#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "finverify/netex.hpp"

namespace fv {

namespace {

// role of a device terminal as seen from a net; source and drain fold together
enum : int { role_gate = 0, role_bulk = 1, role_sd = 2 };

struct side {
  const netlist* nl = nullptr;
  std::vector<int> dev_color;
  std::vector<int> net_color;           // -1 for nets with no device on them
  std::vector<int> nets;                // indices of device-incident nets
  std::vector<std::vector<std::pair<int, int>>> inc;  // net -> (device, role)
};

side make_side(const netlist& nl) {
  side s;
  s.nl = &nl;
  s.dev_color.assign(nl.devices.size(), 0);
  s.net_color.assign(nl.nets.size(), -1);
  s.inc.assign(nl.nets.size(), {});
  for (size_t i = 0; i < nl.devices.size(); ++i) {
    const fin_device& d = nl.devices[i];
    s.inc[d.gate].push_back({int(i), role_gate});
    s.inc[d.bulk].push_back({int(i), role_bulk});
    s.inc[d.source].push_back({int(i), role_sd});
    s.inc[d.drain].push_back({int(i), role_sd});
  }
  for (size_t n = 0; n < nl.nets.size(); ++n)
    if (!s.inc[n].empty()) {
      s.net_color[n] = 0;
      s.nets.push_back(int(n));
    }
  return s;
}

std::string dev_class_desc(const fin_device& d) {
  return strf("%s nfin=%lld l=%lldn", to_string(d.kind).c_str(), (long long)d.n_fin,
              (long long)d.l);
}

// one joint renumbering round; returns false when the two color histograms diverge
bool refine_round(side& a, side& b, bool& changed, std::string* why) {
  using net_sig = std::pair<int, std::vector<std::pair<int, int>>>;
  std::map<net_sig, int> net_ids;
  auto net_signature = [](const side& s, int n) {
    net_sig sig{s.net_color[n], {}};
    for (auto [d, role] : s.inc[n]) sig.second.push_back({role, s.dev_color[d]});
    std::sort(sig.second.begin(), sig.second.end());
    return sig;
  };
  std::map<net_sig, std::pair<int, int>> net_count;
  std::vector<int> na(a.nets.size()), nb(b.nets.size());
  for (size_t i = 0; i < a.nets.size(); ++i) {
    net_sig sig = net_signature(a, a.nets[i]);
    na[i] = net_ids.try_emplace(sig, int(net_ids.size())).first->second;
    net_count[sig].first++;
  }
  for (size_t i = 0; i < b.nets.size(); ++i) {
    net_sig sig = net_signature(b, b.nets[i]);
    nb[i] = net_ids.try_emplace(sig, int(net_ids.size())).first->second;
    net_count[sig].second++;
  }
  for (auto& [sig, c] : net_count)
    if (c.first != c.second) {
      if (why)
        *why = strf("net classes diverge: %d vs %d nets share one signature", c.first,
                    c.second);
      return false;
    }

  using dev_sig = std::tuple<int, int, int, int, int>;  // color, gate, bulk, sd lo, sd hi
  std::map<dev_sig, int> dev_ids;
  std::map<dev_sig, std::pair<int, int>> dev_count;
  auto dev_signature = [](const side& s, int i) {
    const fin_device& d = s.nl->devices[i];
    int sd1 = s.net_color[d.source], sd2 = s.net_color[d.drain];
    if (sd1 > sd2) std::swap(sd1, sd2);
    return dev_sig{s.dev_color[i], s.net_color[d.gate], s.net_color[d.bulk], sd1, sd2};
  };
  std::vector<int> da(a.dev_color.size()), db(b.dev_color.size());
  for (size_t i = 0; i < da.size(); ++i) {
    dev_sig sig = dev_signature(a, int(i));
    da[i] = dev_ids.try_emplace(sig, int(dev_ids.size())).first->second;
    dev_count[sig].first++;
  }
  for (size_t i = 0; i < db.size(); ++i) {
    dev_sig sig = dev_signature(b, int(i));
    db[i] = dev_ids.try_emplace(sig, int(dev_ids.size())).first->second;
    dev_count[sig].second++;
  }
  for (auto& [sig, c] : dev_count)
    if (c.first != c.second) {
      if (why)
        *why = strf("device classes diverge: %d vs %d devices share one signature",
                    c.first, c.second);
      return false;
    }

  changed = false;
  for (size_t i = 0; i < a.nets.size(); ++i) {
    if (a.net_color[a.nets[i]] != na[i]) changed = true;
    a.net_color[a.nets[i]] = na[i];
  }
  for (size_t i = 0; i < b.nets.size(); ++i) {
    if (b.net_color[b.nets[i]] != nb[i]) changed = true;
    b.net_color[b.nets[i]] = nb[i];
  }
  for (size_t i = 0; i < da.size(); ++i) {
    if (a.dev_color[i] != da[i]) changed = true;
    a.dev_color[i] = da[i];
  }
  for (size_t i = 0; i < db.size(); ++i) {
    if (b.dev_color[i] != db[i]) changed = true;
    b.dev_color[i] = db[i];
  }
  return true;
}

bool refine_to_fixpoint(side& a, side& b, std::string* why) {
  bool changed = true;
  while (changed)
    if (!refine_round(a, b, changed, why)) return false;
  return true;
}

// true when every color names exactly one net and one device per side
bool discrete(const side& a) {
  std::set<int> nc(a.net_color.begin(), a.net_color.end());
  nc.erase(-1);
  std::set<int> dc(a.dev_color.begin(), a.dev_color.end());
  return nc.size() == a.nets.size() && dc.size() == a.dev_color.size();
}

int fresh_color(const side& a, const side& b) {
  int m = 0;
  for (int c : a.net_color) m = std::max(m, c + 1);
  for (int c : a.dev_color) m = std::max(m, c + 1);
  for (int c : b.net_color) m = std::max(m, c + 1);
  for (int c : b.dev_color) m = std::max(m, c + 1);
  return m;
}

// backtracking individualization on top of refinement
bool match_search(side a, side b, side* out_a, side* out_b) {
  if (!refine_to_fixpoint(a, b, nullptr)) return false;
  if (discrete(a)) {
    if (out_a) *out_a = a;
    if (out_b) *out_b = b;
    return true;
  }
  // split the smallest ambiguous net class; fall back to devices
  std::map<int, std::vector<int>> by_color_a, by_color_b;
  for (int n : a.nets) by_color_a[a.net_color[n]].push_back(n);
  for (int n : b.nets) by_color_b[b.net_color[n]].push_back(n);
  int pick = -1;
  size_t best = SIZE_MAX;
  for (auto& [c, members] : by_color_a)
    if (members.size() > 1 && members.size() < best) {
      best = members.size();
      pick = c;
    }
  if (pick != -1) {
    int na = by_color_a[pick].front();
    for (int nb : by_color_b[pick]) {
      side a2 = a, b2 = b;
      int fc = fresh_color(a, b);
      a2.net_color[na] = fc;
      b2.net_color[nb] = fc;
      if (match_search(std::move(a2), std::move(b2), out_a, out_b)) return true;
    }
    return false;
  }
  std::map<int, std::vector<int>> dev_a, dev_b;
  for (size_t i = 0; i < a.dev_color.size(); ++i) dev_a[a.dev_color[i]].push_back(int(i));
  for (size_t i = 0; i < b.dev_color.size(); ++i) dev_b[b.dev_color[i]].push_back(int(i));
  for (auto& [c, members] : dev_a)
    if (members.size() > 1) {
      int ia = members.front();
      for (int ib : dev_b[c]) {
        side a2 = a, b2 = b;
        int fc = fresh_color(a, b);
        a2.dev_color[ia] = fc;
        b2.dev_color[ib] = fc;
        if (match_search(std::move(a2), std::move(b2), out_a, out_b)) return true;
      }
      return false;
    }
  return true;  // all classes singletons (discrete() already said so)
}

}  // namespace

lvs_result lvs_compare(const netlist& a, const netlist& b) {
  lvs_result r;
  r.match = false;

  if (a.devices.size() != b.devices.size()) {
    r.diagnostics.push_back(strf("device count differs: %zu vs %zu", a.devices.size(),
                                 b.devices.size()));
    return r;
  }
  if (a.devices.empty()) {
    r.match = true;
    r.diagnostics.push_back("both netlists are empty");
    return r;
  }

  // device identity histogram first: kind, fin count, drawn length
  std::map<std::string, std::pair<int, int>> classes;
  for (const fin_device& d : a.devices) classes[dev_class_desc(d)].first++;
  for (const fin_device& d : b.devices) classes[dev_class_desc(d)].second++;
  bool class_ok = true;
  for (auto& [desc, c] : classes)
    if (c.first != c.second) {
      r.diagnostics.push_back(
          strf("device class %s: %d vs %d", desc.c_str(), c.first, c.second));
      class_ok = false;
    }
  if (!class_ok) return r;

  side sa = make_side(a), sb = make_side(b);
  if (sa.nets.size() != sb.nets.size()) {
    r.diagnostics.push_back(strf("connected net count differs: %zu vs %zu",
                                 sa.nets.size(), sb.nets.size()));
    return r;
  }

  // seed device colors from the identity classes, jointly numbered
  {
    std::map<std::string, int> ids;
    for (size_t i = 0; i < a.devices.size(); ++i)
      sa.dev_color[i] =
          ids.try_emplace(dev_class_desc(a.devices[i]), int(ids.size())).first->second;
    for (size_t i = 0; i < b.devices.size(); ++i)
      sb.dev_color[i] =
          ids.try_emplace(dev_class_desc(b.devices[i]), int(ids.size())).first->second;
  }

  std::string why;
  if (!refine_to_fixpoint(sa, sb, &why)) {
    r.diagnostics.push_back("topologies differ: " + why);
    return r;
  }

  side ra, rb;
  if (!match_search(sa, sb, &ra, &rb)) {
    r.diagnostics.push_back(
        "no consistent net pairing exists: candidate classes refine apart");
    return r;
  }

  r.match = true;
  std::map<int, std::pair<int, int>> pair_by_color;
  for (int n : ra.nets) pair_by_color[ra.net_color[n]].first = n;
  for (int n : rb.nets) pair_by_color[rb.net_color[n]].second = n;
  for (auto& [c, p] : pair_by_color)
    r.diagnostics.push_back(strf("net %s = %s", a.nets[p.first].name.c_str(),
                                 b.nets[p.second].name.c_str()));
  return r;
}

std::string lvs_result::to_json() const {
  nlohmann::ordered_json j;
  j["verdict"] = match ? "MATCH" : "MISMATCH";
  j["diagnostics"] = diagnostics;
  return j.dump(2) + "\n";
}

}  // namespace fv
