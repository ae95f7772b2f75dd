#pragma once

// JSON case schema reader/writer.
//
// {"name": str, "periods": int, "slack_bus": int,
//  "buses": [{"id": int}],
//  "lines": [{"from": int, "to": int, "reactance": num, "capacity_mw": num}],
//  "generators": [{"id": str, "bus": int, "pmax_mw": num, "bid_per_mwh": num,
//                  "emission_t_per_mwh": num}],
//  "loads": [{"bus": int, "mw": [num x periods]}]}
//
// All keys are required except "loads"; unknown keys are rejected.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "carbon/errors.hpp"
#include "carbon/grid.hpp"

namespace carbon {

namespace detail {

using json = nlohmann::json;

inline void require_object(const json& j, const std::string& where, std::initializer_list<const char*> required,
                           std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw CaseParseError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) throw CaseParseError(where + ": unknown key \"" + key + "\"");
  }
  for (const char* k : required) {
    if (!j.contains(k)) throw CaseParseError(where + ": missing key \"" + std::string(k) + "\"");
  }
}

inline int get_int(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw CaseParseError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

inline double get_number(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw CaseParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::string get_string(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw CaseParseError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline const json& get_array(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw CaseParseError(where + "." + key + ": expected an array");
  return v;
}

}  // namespace detail

/// Parses and validates a case from JSON text.
inline CaseData parse_case(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CaseParseError(std::string("malformed JSON: ") + e.what());
  }

  detail::require_object(root, "case", {"name", "periods", "slack_bus", "buses", "lines", "generators"}, {"loads"});

  CaseData c;
  c.name = detail::get_string(root, "name", "case");
  c.periods = detail::get_int(root, "periods", "case");
  c.slack_bus = detail::get_int(root, "slack_bus", "case");

  const auto& buses = detail::get_array(root, "buses", "case");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string where = "buses[" + std::to_string(i) + "]";
    detail::require_object(buses[i], where, {"id"});
    c.buses.push_back(Bus{detail::get_int(buses[i], "id", where)});
  }

  const auto& lines = detail::get_array(root, "lines", "case");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "lines[" + std::to_string(i) + "]";
    detail::require_object(lines[i], where, {"from", "to", "reactance", "capacity_mw"});
    c.lines.push_back(Line{detail::get_int(lines[i], "from", where), detail::get_int(lines[i], "to", where),
                           detail::get_number(lines[i], "reactance", where),
                           detail::get_number(lines[i], "capacity_mw", where)});
  }

  const auto& gens = detail::get_array(root, "generators", "case");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string where = "generators[" + std::to_string(i) + "]";
    detail::require_object(gens[i], where, {"id", "bus", "pmax_mw", "bid_per_mwh", "emission_t_per_mwh"});
    Generator g;
    g.id = detail::get_string(gens[i], "id", where);
    g.bus = detail::get_int(gens[i], "bus", where);
    g.pmax_mw = detail::get_number(gens[i], "pmax_mw", where);
    g.bid_per_mwh = detail::get_number(gens[i], "bid_per_mwh", where);
    g.emission_t_per_mwh = detail::get_number(gens[i], "emission_t_per_mwh", where);
    c.generators.push_back(std::move(g));
  }

  if (root.contains("loads")) {
    const auto& loads = detail::get_array(root, "loads", "case");
    for (std::size_t i = 0; i < loads.size(); ++i) {
      const std::string where = "loads[" + std::to_string(i) + "]";
      detail::require_object(loads[i], where, {"bus", "mw"});
      LoadProfile p;
      p.bus = detail::get_int(loads[i], "bus", where);
      const auto& mw = detail::get_array(loads[i], "mw", where);
      for (const auto& v : mw) {
        if (!v.is_number()) throw CaseParseError(where + ".mw: expected numbers");
        p.mw.push_back(v.get<double>());
      }
      c.loads.push_back(std::move(p));
    }
  }

  validate_case(c);
  return c;
}

/// Reads, parses and validates a case file.
inline CaseData load_case(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaseValidationError("case file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str());
}

inline std::string case_to_json(const CaseData& c) {
  using detail::json;
  json root;
  root["name"] = c.name;
  root["periods"] = c.periods;
  root["slack_bus"] = c.slack_bus;
  root["buses"] = json::array();
  for (const auto& b : c.buses) root["buses"].push_back({{"id", b.id}});
  root["lines"] = json::array();
  for (const auto& l : c.lines) {
    root["lines"].push_back({{"from", l.from_bus}, {"to", l.to_bus}, {"reactance", l.reactance}, {"capacity_mw", l.capacity_mw}});
  }
  root["generators"] = json::array();
  for (const auto& g : c.generators) {
    root["generators"].push_back({{"id", g.id},
                                  {"bus", g.bus},
                                  {"pmax_mw", g.pmax_mw},
                                  {"bid_per_mwh", g.bid_per_mwh},
                                  {"emission_t_per_mwh", g.emission_t_per_mwh}});
  }
  root["loads"] = json::array();
  for (const auto& p : c.loads) root["loads"].push_back({{"bus", p.bus}, {"mw", p.mw}});
  return root.dump(2) + "\n";
}

}  // namespace carbon
