#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "finverify/netex.hpp"

namespace fv {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

// logical lines: comments dropped, '+' continuations folded in
std::vector<std::pair<int, std::string>> logical_lines(const std::string& text) {
  std::vector<std::pair<int, std::string>> out;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    size_t first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (raw[first] == '*') continue;
    if (raw[first] == '+') {
      if (out.empty()) continue;
      out.back().second += " " + raw.substr(first + 1);
      continue;
    }
    out.push_back({lineno, raw});
  }
  return out;
}

i64 int_param(const std::string& value, const std::string& key, const std::string& origin,
              int line) {
  std::string v = value;
  if (!v.empty() && (v.back() == 'n' || v.back() == 'N')) v.pop_back();
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) {
        return std::isdigit(c);
      }))
    throw error(strf("%s:%d: %s=%s is not a plain integer", origin.c_str(), line,
                     key.c_str(), value.c_str()));
  return std::atoll(v.c_str());
}

struct card {
  int line;
  std::vector<std::string> tok;
};

}  // namespace

netlist read_reference_netlist(const std::string& text, const std::string& origin,
                               const std::string& top) {
  std::map<std::string, std::vector<card>> subckts;
  std::vector<std::string> subckt_order;
  std::vector<card> toplevel;
  std::string open;

  for (const auto& [lineno, line] : logical_lines(text)) {
    std::vector<std::string> tok = tokens_of(line);
    if (tok.empty()) continue;
    std::string head = lower(tok[0]);
    if (head == ".subckt") {
      if (tok.size() < 2)
        throw error(strf("%s:%d: .subckt needs a name", origin.c_str(), lineno));
      if (!open.empty())
        throw error(strf("%s:%d: nested .subckt", origin.c_str(), lineno));
      open = tok[1];
      subckt_order.push_back(open);
      subckts[open];
      continue;
    }
    if (head == ".ends") {
      if (open.empty())
        throw error(strf("%s:%d: .ends without .subckt", origin.c_str(), lineno));
      open.clear();
      continue;
    }
    if (head == ".end") continue;
    if (head[0] == '.')
      throw error(strf("%s:%d: unsupported control card %s", origin.c_str(), lineno,
                       tok[0].c_str()));
    (open.empty() ? toplevel : subckts[open]).push_back({lineno, tok});
  }
  if (!open.empty())
    throw error(strf("%s: .subckt %s never closed", origin.c_str(), open.c_str()));

  const std::vector<card>* cards = nullptr;
  if (subckts.count(top)) cards = &subckts.at(top);
  else if (subckt_order.size() == 1) cards = &subckts.at(subckt_order.front());
  else if (!toplevel.empty() && subckt_order.empty()) cards = &toplevel;
  else
    throw error(strf("%s: no .subckt named %s (found: %s)", origin.c_str(), top.c_str(),
                     subckt_order.empty() ? "none"
                                          : [&] {
                                              std::string s;
                                              for (auto& n : subckt_order)
                                                s += (s.empty() ? "" : ", ") + n;
                                              return s;
                                            }()
                                                .c_str()));

  netlist nl;
  std::map<std::string, int> net_index;
  auto net_id = [&](const std::string& name) {
    auto [it, fresh] = net_index.try_emplace(name, int(nl.nets.size()));
    if (fresh) nl.nets.push_back({name, {}});
    return it->second;
  };

  for (const card& c : *cards) {
    if (lower(c.tok[0].substr(0, 1)) != "x")
      throw error(strf("%s:%d: only X device cards are supported, got %s",
                       origin.c_str(), c.line, c.tok[0].c_str()));
    if (c.tok.size() < 6)
      throw error(strf("%s:%d: X card needs d g s b and a model", origin.c_str(),
                       c.line));
    fin_device d;
    d.drain = net_id(c.tok[1]);
    d.gate = net_id(c.tok[2]);
    d.source = net_id(c.tok[3]);
    d.bulk = net_id(c.tok[4]);
    std::string model = lower(c.tok[5]);
    if (model == "nfin") d.kind = device_kind::nfin;
    else if (model == "pfin") d.kind = device_kind::pfin;
    else
      throw error(strf("%s:%d: unknown device model %s", origin.c_str(), c.line,
                       c.tok[5].c_str()));
    bool saw_nfin = false, saw_l = false;
    for (size_t i = 6; i < c.tok.size(); ++i) {
      auto eq = c.tok[i].find('=');
      if (eq == std::string::npos)
        throw error(strf("%s:%d: expected key=value, got %s", origin.c_str(), c.line,
                         c.tok[i].c_str()));
      std::string key = lower(c.tok[i].substr(0, eq));
      std::string value = c.tok[i].substr(eq + 1);
      if (key == "nfin") {
        d.n_fin = int_param(value, key, origin, c.line);
        saw_nfin = true;
      } else if (key == "l") {
        d.l = int_param(value, key, origin, c.line);
        saw_l = true;
      }  // adej/asej/pdej/psej and anything else: annotation, not identity
    }
    if (!saw_nfin || !saw_l)
      throw error(strf("%s:%d: device %s needs nfin= and l=", origin.c_str(), c.line,
                       c.tok[0].c_str()));
    if (d.n_fin < 1)
      throw error(strf("%s:%d: nfin must be at least 1", origin.c_str(), c.line));
    nl.devices.push_back(d);
  }
  return nl;
}

netlist load_reference_netlist(const std::string& path, const std::string& top) {
  return read_reference_netlist(read_file(path), path, top);
}

}  // namespace fv
