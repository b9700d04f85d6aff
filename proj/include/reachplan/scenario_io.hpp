#pragma once

// Scenario document ingestion. The format is a single JSON object; every
// parse failure names the offending path.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "reachplan/scenario.hpp"

namespace reachplan {
namespace io {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& why) {
  throw ParseError(path + ": " + why);
}

inline const json& member(const json& j, const std::string& path,
                          const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

inline Interval interval(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [lo, hi]");
  Interval out{number(j[0], path + "/0"), number(j[1], path + "/1")};
  if (!out.valid()) fail(path, "interval is empty (lo > hi)");
  return out;
}

}  // namespace detail

inline Scenario parse_scenario(const json& doc) {
  using detail::fail;
  using detail::integer;
  using detail::interval;
  using detail::member;
  using detail::number;

  if (!doc.is_object()) fail("/", "scenario document must be a JSON object");

  Scenario sc;

  const json& lanelets = member(doc, "", "lanelets");
  if (!lanelets.is_array() || lanelets.empty())
    fail("/lanelets", "expected a non-empty array");
  for (std::size_t i = 0; i < lanelets.size(); ++i) {
    const std::string path = "/lanelets/" + std::to_string(i);
    const json& jl = lanelets[i];
    Lanelet lane;
    lane.id = integer(member(jl, path, "id"), path + "/id");
    if (lane.id < 0) fail(path + "/id", "lanelet id must be >= 0");
    if (jl.contains("left") && !jl["left"].is_null())
      lane.left = integer(jl["left"], path + "/left");
    if (jl.contains("right") && !jl["right"].is_null())
      lane.right = integer(jl["right"], path + "/right");
    if (jl.contains("successors")) {
      const json& js = jl["successors"];
      if (!js.is_array()) fail(path + "/successors", "expected an array");
      for (std::size_t k = 0; k < js.size(); ++k)
        lane.successors.push_back(
            integer(js[k], path + "/successors/" + std::to_string(k)));
    }
    lane.speed_limit =
        number(member(jl, path, "speed_limit"), path + "/speed_limit");
    lane.width = number(member(jl, path, "width"), path + "/width");
    const json& jc = member(jl, path, "centerline");
    if (!jc.is_array() || jc.size() < 2)
      fail(path + "/centerline", "expected an array of >= 2 points");
    for (std::size_t k = 0; k < jc.size(); ++k) {
      const std::string pp = path + "/centerline/" + std::to_string(k);
      if (!jc[k].is_array() || jc[k].size() != 2) fail(pp, "expected [x, y]");
      lane.centerline.push_back(
          {number(jc[k][0], pp + "/0"), number(jc[k][1], pp + "/1")});
    }
    lane.finalize();
    sc.network.lanelets.push_back(std::move(lane));
  }

  if (doc.contains("obstacles")) {
    const json& obstacles = doc["obstacles"];
    if (!obstacles.is_array()) fail("/obstacles", "expected an array");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const std::string path = "/obstacles/" + std::to_string(i);
      const json& jo = obstacles[i];
      ObstacleTimeline ob;
      ob.id = integer(member(jo, path, "id"), path + "/id");
      ob.length = number(member(jo, path, "length"), path + "/length");
      ob.width = number(member(jo, path, "width"), path + "/width");
      const json& jt = member(jo, path, "trajectory");
      if (!jt.is_array() || jt.empty())
        fail(path + "/trajectory", "expected a non-empty array");
      for (std::size_t k = 0; k < jt.size(); ++k) {
        const std::string pp = path + "/trajectory/" + std::to_string(k);
        ObstacleTimeline::State st;
        st.t = number(member(jt[k], pp, "t"), pp + "/t");
        st.x = number(member(jt[k], pp, "x"), pp + "/x");
        st.y = number(member(jt[k], pp, "y"), pp + "/y");
        st.orientation =
            number(member(jt[k], pp, "orientation"), pp + "/orientation");
        ob.states.push_back(st);
      }
      sc.obstacles.push_back(std::move(ob));
    }
  }

  {
    const json& jp = member(doc, "", "planning_problem");
    const std::string path = "/planning_problem";
    const json& ji = member(jp, path, "initial");
    sc.problem.initial.x = number(member(ji, path + "/initial", "x"),
                                  path + "/initial/x");
    sc.problem.initial.y = number(member(ji, path + "/initial", "y"),
                                  path + "/initial/y");
    sc.problem.initial.v = number(member(ji, path + "/initial", "v"),
                                  path + "/initial/v");
    sc.problem.initial.orientation =
        number(member(ji, path + "/initial", "orientation"),
               path + "/initial/orientation");
    const json& jg = member(jp, path, "goal");
    sc.problem.goal_lanelet =
        integer(member(jg, path + "/goal", "lanelet"), path + "/goal/lanelet");
    sc.problem.goal_xi = interval(member(jg, path + "/goal", "xi"),
                                  path + "/goal/xi");
    sc.problem.goal_v = interval(member(jg, path + "/goal", "v"),
                                 path + "/goal/v");
    sc.problem.goal_time = interval(member(jg, path + "/goal", "time"),
                                    path + "/goal/time");
  }

  if (doc.contains("vehicle")) {
    const json& jv = doc["vehicle"];
    const std::string path = "/vehicle";
    sc.vehicle.length = number(member(jv, path, "length"), path + "/length");
    sc.vehicle.width = number(member(jv, path, "width"), path + "/width");
    sc.vehicle.wheelbase =
        number(member(jv, path, "wheelbase"), path + "/wheelbase");
    sc.vehicle.a_max = number(member(jv, path, "a_max"), path + "/a_max");
    sc.vehicle.s_max = number(member(jv, path, "s_max"), path + "/s_max");
  }

  if (doc.contains("config")) {
    const json& jc = doc["config"];
    const std::string path = "/config";
    auto opt = [&](const char* key, double& slot) {
      if (jc.contains(key)) slot = detail::number(jc[key], path + "/" + key);
    };
    opt("dt", sc.config.dt);
    opt("d_min", sc.config.d_min);
    opt("a_des", sc.config.a_des);
    opt("w_change", sc.config.w_change);
    opt("w_profile", sc.config.w_profile);
    opt("min_lateral_width", sc.config.min_lateral_width);
    opt("lateral_margin", sc.config.lateral_margin);
    opt("time_budget", sc.config.time_budget);
    opt("w_safe", sc.config.w_safe);
    opt("d_safe", sc.config.d_safe);
    // aliases used in the flat CLI flags
    opt("dmin", sc.config.d_min);
    opt("ades", sc.config.a_des);
    opt("wchange", sc.config.w_change);
    opt("wprofile", sc.config.w_profile);
  }

  if (doc.contains("traffic_lights")) {
    const json& jr = doc["traffic_lights"];
    if (!jr.is_array()) fail("/traffic_lights", "expected an array");
    for (std::size_t i = 0; i < jr.size(); ++i) {
      const std::string path = "/traffic_lights/" + std::to_string(i);
      TrafficLightRule rule;
      rule.lanelet =
          integer(member(jr[i], path, "lanelet"), path + "/lanelet");
      rule.stop_xi =
          number(member(jr[i], path, "stop_xi"), path + "/stop_xi");
      const json& jred = member(jr[i], path, "red");
      if (!jred.is_array()) fail(path + "/red", "expected an array");
      for (std::size_t k = 0; k < jred.size(); ++k)
        rule.red.push_back(
            interval(jred[k], path + "/red/" + std::to_string(k)));
      sc.traffic_lights.push_back(std::move(rule));
    }
  }

  sc.validate();
  return sc;
}

inline Scenario load_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_scenario_text(ss.str());
  } catch (const ScenarioError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline json scenario_to_json(const Scenario& sc) {
  json doc;
  doc["lanelets"] = json::array();
  for (const Lanelet& l : sc.network.lanelets) {
    json jl;
    jl["id"] = l.id;
    jl["left"] = l.left ? json(*l.left) : json(nullptr);
    jl["right"] = l.right ? json(*l.right) : json(nullptr);
    jl["successors"] = l.successors;
    jl["speed_limit"] = l.speed_limit;
    jl["width"] = l.width;
    json jc = json::array();
    for (const Vec2& p : l.centerline) jc.push_back({p.x, p.y});
    jl["centerline"] = std::move(jc);
    doc["lanelets"].push_back(std::move(jl));
  }
  doc["obstacles"] = json::array();
  for (const ObstacleTimeline& o : sc.obstacles) {
    json jo;
    jo["id"] = o.id;
    jo["length"] = o.length;
    jo["width"] = o.width;
    json jt = json::array();
    for (const ObstacleTimeline::State& st : o.states)
      jt.push_back({{"t", st.t},
                    {"x", st.x},
                    {"y", st.y},
                    {"orientation", st.orientation}});
    jo["trajectory"] = std::move(jt);
    doc["obstacles"].push_back(std::move(jo));
  }
  doc["planning_problem"] = {
      {"initial",
       {{"x", sc.problem.initial.x},
        {"y", sc.problem.initial.y},
        {"v", sc.problem.initial.v},
        {"orientation", sc.problem.initial.orientation}}},
      {"goal",
       {{"lanelet", sc.problem.goal_lanelet},
        {"xi", {sc.problem.goal_xi.lo, sc.problem.goal_xi.hi}},
        {"v", {sc.problem.goal_v.lo, sc.problem.goal_v.hi}},
        {"time", {sc.problem.goal_time.lo, sc.problem.goal_time.hi}}}}};
  doc["vehicle"] = {{"length", sc.vehicle.length},
                    {"width", sc.vehicle.width},
                    {"wheelbase", sc.vehicle.wheelbase},
                    {"a_max", sc.vehicle.a_max},
                    {"s_max", sc.vehicle.s_max}};
  doc["config"] = {{"dt", sc.config.dt},
                   {"d_min", sc.config.d_min},
                   {"a_des", sc.config.a_des},
                   {"w_change", sc.config.w_change},
                   {"w_profile", sc.config.w_profile},
                   {"min_lateral_width", sc.config.min_lateral_width},
                   {"lateral_margin", sc.config.lateral_margin},
                   {"time_budget", sc.config.time_budget}};
  if (!sc.traffic_lights.empty()) {
    doc["traffic_lights"] = json::array();
    for (const TrafficLightRule& r : sc.traffic_lights) {
      json jr;
      jr["lanelet"] = r.lanelet;
      jr["stop_xi"] = r.stop_xi;
      json jred = json::array();
      for (const Interval& iv : r.red) jred.push_back({iv.lo, iv.hi});
      jr["red"] = std::move(jred);
      doc["traffic_lights"].push_back(std::move(jr));
    }
  }
  return doc;
}

}  // namespace io
}  // namespace reachplan
