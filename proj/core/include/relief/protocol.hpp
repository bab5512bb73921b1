#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "relief/session.hpp"

namespace relief::service {

/// Malformed client message; `code()` goes into the error reply.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// {"type":"set_hip","x":..,"y":..,"z":..}
/// {"type":"set_roi","level":..,"x":..,"y":..,"w":..,"h":..}
/// {"type":"set_level","delta":+1|-1}
/// Each may carry an optional positive integer "cmd_id" (0 when absent).
Command parse_command(std::string_view text);

nlohmann::json to_json(const Snapshot& snapshot);
nlohmann::json to_json(const Ack& ack);
nlohmann::json to_json(const RoiSelection& roi);
nlohmann::json error_json(std::string_view code, std::string_view message);

/// Body of POST /sessions: {"asset": id, "params": {...}?, "roi": {...}?}.
/// Param keys: k, delta_n, eps_surface, eps_converge, max_iters, tick_budget_us.
struct OpenRequest {
  std::string asset;
  RenderParams params;
  std::optional<RoiSelection> roi;
};
OpenRequest parse_open_request(std::string_view text);

/// [{"id":..,"levels":[{"level":l,"width":..,"height":..,"spacing":..}]}]
nlohmann::json assets_json(const std::vector<AssetInfo>& assets);

}  // namespace relief::service
