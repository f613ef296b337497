#pragma once

#include <psm/problem.hpp>
#include <psm/ps.hpp>

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace psm {

using json = nlohmann::ordered_json;

/// On-disk instance:
///
///   {"agents": [...], "houses": [...],
///    "prefs": [[house, ...], ...],          one list per agent, by name
///    "utility": {house: "p/q", ...},        optional, the manipulator's
///    "target": "p/q",                       optional
///    "params": {...}}                       optional, kept verbatim
///
/// The first agent is the manipulator and may list a subset of the houses.
struct InstanceFile {
  AssignmentProblem problem;
  std::optional<UtilityFunction> utility;
  std::optional<Rational> target;
  json params;
};

inline json rational_json(const Rational& r) { return to_string(r); }

inline Rational rational_from_json(const json& j, const std::string& what) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw InputError(what + ": expected an integer or a \"p/q\" string");
}

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("instance is missing \"") + key + "\"");
  return j.at(key);
}

inline std::vector<std::string> string_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array of names");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw InputError(what + " must be an array of names");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline UtilityFunction utility_from_json(const json& j, const AssignmentProblem& problem) {
  if (!j.is_object()) throw InputError("utility must map house names to values");
  UtilityFunction u{std::vector<Rational>(problem.num_houses(), Rational(0))};
  std::vector<bool> seen(problem.num_houses(), false);
  for (const auto& [name, value] : j.items()) {
    const auto h = problem.find_house(name);
    if (!h) throw InputError("utility names unknown house '" + name + "'");
    u.values[*h] = rational_from_json(value, "utility of " + name);
    seen[*h] = true;
  }
  for (House h = 0; h < problem.num_houses(); ++h) {
    if (!seen[h]) throw InputError("utility is missing house '" + problem.house_name(h) + "'");
  }
  return u;
}

inline InstanceFile instance_from_json(const json& j) {
  auto agents = detail::string_array(detail::require(j, "agents"), "agents");
  auto houses = detail::string_array(detail::require(j, "houses"), "houses");
  const json& pj = detail::require(j, "prefs");
  if (!pj.is_array() || pj.size() != agents.size()) {
    throw InputError("prefs must hold one list per agent");
  }
  std::map<std::string, House> index;
  for (House h = 0; h < houses.size(); ++h) index.emplace(houses[h], h);
  std::vector<HouseList> prefs;
  for (std::size_t i = 0; i < pj.size(); ++i) {
    HouseList list;
    for (const auto& name : detail::string_array(pj[i], "prefs of " + agents[i])) {
      const auto it = index.find(name);
      if (it == index.end()) throw InputError("agent " + agents[i] + " lists unknown house '" + name + "'");
      list.push_back(it->second);
    }
    prefs.push_back(std::move(list));
  }
  InstanceFile out{AssignmentProblem(std::move(agents), std::move(houses), std::move(prefs)), {}, {}, {}};
  if (j.contains("utility")) out.utility = utility_from_json(j.at("utility"), out.problem);
  if (j.contains("target")) out.target = rational_from_json(j.at("target"), "target");
  if (j.contains("params")) out.params = j.at("params");
  return out;
}

inline json utility_to_json(const UtilityFunction& u, const AssignmentProblem& problem) {
  json j = json::object();
  for (House h = 0; h < u.size(); ++h) j[problem.house_name(h)] = rational_json(u(h));
  return j;
}

inline json instance_to_json(const AssignmentProblem& problem, const UtilityFunction* u = nullptr,
                             const Rational* target = nullptr, const json& params = {}) {
  json j;
  j["agents"] = problem.agent_names();
  j["houses"] = problem.house_names();
  json prefs = json::array();
  for (Agent i = 0; i < problem.num_agents(); ++i) {
    json list = json::array();
    for (const House h : problem.pref(i)) list.push_back(problem.house_name(h));
    prefs.push_back(std::move(list));
  }
  j["prefs"] = std::move(prefs);
  if (u) j["utility"] = utility_to_json(*u, problem);
  if (target) j["target"] = rational_json(*target);
  if (!params.is_null()) j["params"] = params;
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline InstanceFile load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

/// {agent: {house: "p/q"}} with zero entries left out.
inline json assignment_json(const FractionalAssignment& p, const AssignmentProblem& problem) {
  json j = json::object();
  for (Agent i = 0; i < p.num_agents(); ++i) {
    json row = json::object();
    for (House h = 0; h < p.num_houses(); ++h) {
      if (sgn(p(i, h)) != 0) row[problem.house_name(h)] = rational_json(p(i, h));
    }
    j[problem.agent_name(i)] = std::move(row);
  }
  return j;
}

inline json row_json(std::span<const Rational> row, const AssignmentProblem& problem) {
  json j = json::object();
  for (House h = 0; h < row.size(); ++h) {
    if (sgn(row[h]) != 0) j[problem.house_name(h)] = rational_json(row[h]);
  }
  return j;
}

inline json house_list_json(std::span<const House> list, const AssignmentProblem& problem) {
  json j = json::array();
  for (const House h : list) j.push_back(problem.house_name(h));
  return j;
}

inline json trace_json(const EatingTrace& t, const AssignmentProblem& problem) {
  json j;
  json start = json::object();
  for (House h = 0; h < t.start.size(); ++h) {
    start[problem.house_name(h)] = t.start[h] ? rational_json(*t.start[h]) : json(nullptr);
  }
  j["est"] = std::move(start);
  json events = json::array();
  for (const auto& e : t.events) {
    events.push_back({{"time", rational_json(e.time)}, {"house", problem.house_name(e.house)}});
  }
  j["exhaustions"] = std::move(events);
  json intervals = json::array();
  for (const auto& iv : t.intervals) {
    intervals.push_back({{"agent", problem.agent_name(iv.agent)},
                         {"house", problem.house_name(iv.house)},
                         {"begin", rational_json(iv.begin)},
                         {"end", rational_json(iv.end)}});
  }
  j["intervals"] = std::move(intervals);
  j["end_time"] = rational_json(t.end_time);
  return j;
}

}  // namespace psm
