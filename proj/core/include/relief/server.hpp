#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "relief/session.hpp"

namespace relief::service {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  ///< 0 picks a free port
  std::optional<std::filesystem::path> static_dir;  ///< served under GET /
};

/// HTTP + WebSocket front end for a SessionManager.
///
///   GET    /assets                          asset list (JSON)
///   GET    /assets/{id}/levels/{l}/grid     level as .mhdf
///   POST   /sessions                        {"asset":..,"params":..,"roi":..}
///   DELETE /sessions/{id}
///   GET    /sessions/{id}/ws                WebSocket upgrade: snapshots, acks,
///                                           errors out; commands in
class Server {
 public:
  Server(SessionManager& sessions, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving on a background thread.
  void start();
  void stop();

  /// Bound port, valid after start().
  std::uint16_t port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace relief::service
