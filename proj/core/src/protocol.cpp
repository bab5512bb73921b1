#include "relief/protocol.hpp"

#include <cmath>

namespace relief::service {
namespace {

using nlohmann::json;

json parse_object(std::string_view text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ProtocolError("bad_json", "message is not valid JSON");
  if (!j.is_object()) throw ProtocolError("bad_json", "message must be a JSON object");
  return j;
}

double number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ProtocolError("bad_field", std::string("missing or non-numeric '") + key + "'");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ProtocolError("bad_field", std::string("'") + key + "' is not finite");
  return v;
}

std::size_t count(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer() || it->get<long long>() < 0) {
    throw ProtocolError("bad_field", std::string("'") + key + "' must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

RoiSelection roi_from(const json& j) {
  RoiSelection roi;
  roi.level = count(j, "level");
  roi.x = count(j, "x");
  roi.y = count(j, "y");
  roi.w = count(j, "w");
  roi.h = count(j, "h");
  return roi;
}

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Command parse_command(std::string_view text) {
  const json j = parse_object(text);
  Command cmd;
  if (const auto it = j.find("cmd_id"); it != j.end()) {
    if (!it->is_number_unsigned()) throw ProtocolError("bad_field", "'cmd_id' must be a positive integer");
    cmd.id = it->get<std::uint64_t>();
  }
  const auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) {
    throw ProtocolError("bad_type", "message needs a string 'type'");
  }
  const auto type = type_it->get<std::string>();
  if (type == "set_hip") {
    cmd.body = SetHip{Vec3(number(j, "x"), number(j, "y"), number(j, "z"))};
  } else if (type == "set_roi") {
    cmd.body = SetRoi{roi_from(j)};
  } else if (type == "set_level") {
    const auto it = j.find("delta");
    if (it == j.end() || !it->is_number_integer()) {
      throw ProtocolError("bad_field", "'delta' must be +1 or -1");
    }
    cmd.body = SetLevel{it->get<int>()};
  } else {
    throw ProtocolError("bad_type", "unknown message type '" + type + "'");
  }
  return cmd;
}

nlohmann::json to_json(const RoiSelection& roi) {
  return {{"level", roi.level}, {"x", roi.x}, {"y", roi.y}, {"w", roi.w}, {"h", roi.h}};
}

nlohmann::json to_json(const Snapshot& s) {
  return {{"type", "snapshot"},
          {"seq", s.seq},
          {"t", s.t_ms},
          {"hip", vec(s.hip)},
          {"proxy", vec(s.proxy)},
          {"force", vec(s.force)},
          {"in_contact", s.in_contact},
          {"converged", s.converged},
          {"roi", to_json(s.roi)},
          {"mapping_version", s.mapping_version},
          {"lateral_scale", s.lateral_scale},
          {"depth_gain", s.depth_gain},
          {"tick_stats", {{"mean_us", s.tick_mean_us}, {"p99_us", s.tick_p99_us}}},
          {"switch_us", s.last_switch_us}};
}

nlohmann::json to_json(const Ack& ack) {
  if (!ack.accepted) {
    json j = error_json(ack.error_code, ack.message);
    j["cmd_id"] = ack.cmd_id;
    return j;
  }
  return {{"type", "ack"}, {"cmd_id", ack.cmd_id}, {"seq", ack.seq}};
}

nlohmann::json error_json(std::string_view code, std::string_view message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

OpenRequest parse_open_request(std::string_view text) {
  const json j = parse_object(text);
  OpenRequest req;
  const auto asset = j.find("asset");
  if (asset == j.end() || !asset->is_string()) {
    throw ProtocolError("bad_field", "'asset' must be a string");
  }
  req.asset = asset->get<std::string>();
  if (const auto p = j.find("params"); p != j.end()) {
    if (!p->is_object()) throw ProtocolError("bad_field", "'params' must be an object");
    if (p->contains("k")) req.params.stiffness_k = number(*p, "k");
    if (p->contains("delta_n")) req.params.delta_n = number(*p, "delta_n");
    if (p->contains("eps_surface")) req.params.eps_surface = number(*p, "eps_surface");
    if (p->contains("eps_converge")) req.params.eps_converge = number(*p, "eps_converge");
    if (p->contains("max_iters")) req.params.max_iters = static_cast<int>(count(*p, "max_iters"));
    if (p->contains("tick_budget_us")) req.params.tick_budget_us = number(*p, "tick_budget_us");
  }
  if (const auto r = j.find("roi"); r != j.end()) {
    if (!r->is_object()) throw ProtocolError("bad_field", "'roi' must be an object");
    req.roi = roi_from(*r);
  }
  return req;
}

nlohmann::json assets_json(const std::vector<AssetInfo>& assets) {
  json out = json::array();
  for (const auto& a : assets) {
    json levels = json::array();
    for (std::size_t l = 0; l < a.pyramid->size(); ++l) {
      const auto& f = a.pyramid->level(l);
      levels.push_back({{"level", l},
                        {"width", f.width()},
                        {"height", f.height()},
                        {"spacing", f.spacing()}});
    }
    out.push_back({{"id", a.id}, {"levels", levels}});
  }
  return out;
}

}  // namespace relief::service
