#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "relief/proxy_renderer.hpp"
#include "relief/scale_pyramid.hpp"
#include "relief/workspace_mapper.hpp"

namespace relief::service {

/// What observers see after a tick. Positions in workspace mm.
struct Snapshot {
  std::uint64_t seq = 0;
  std::int64_t t_ms = 0;
  Vec3 hip = Vec3::Zero();
  Vec3 proxy = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  bool in_contact = false;
  bool converged = true;
  RoiSelection roi;
  std::uint64_t mapping_version = 0;
  double lateral_scale = 1.0;
  double depth_gain = 1.0;
  double tick_mean_us = 0.0;
  double tick_p99_us = 0.0;
  double last_switch_us = 0.0;
};

struct SetHip {
  Vec3 position = Vec3::Zero();
};
struct SetRoi {
  RoiSelection roi;
};
struct SetLevel {
  int delta = 0;
};
using CommandBody = std::variant<SetHip, SetRoi, SetLevel>;

struct Command {
  std::uint64_t id = 0;
  CommandBody body;
};

/// Outcome of a command. When accepted, `seq` is the first snapshot that
/// reflects it.
struct Ack {
  std::uint64_t cmd_id = 0;
  bool accepted = true;
  std::uint64_t seq = 0;
  std::string error_code;
  std::string message;
};

/// Receives engine output on the tick thread. Implementations must return
/// quickly and never wait on the consumer.
class Subscriber {
 public:
  virtual ~Subscriber() = default;
  virtual void on_snapshot(const Snapshot& snapshot) = 0;
  virtual void on_ack(const Ack& ack) = 0;
};

struct EngineConfig {
  double snapshot_hz = 60.0;
  /// Ticks over which a new HIP target is approached linearly. 0 means one
  /// snapshot period.
  int hip_interp_ticks = 0;
  double workspace_extent = kDefaultWorkspaceExtent;
  std::size_t rolling_window = 1000;
};

/// One engine: the single writer of its EngineState. `post` may be called from
/// any thread; everything else belongs to the thread that calls `step`.
class SessionEngine {
 public:
  SessionEngine(std::shared_ptr<const DepthPyramid> pyramid, const RenderParams& params,
                const std::optional<RoiSelection>& roi = std::nullopt,
                const EngineConfig& config = {});

  /// Queues a command for the next tick boundary.
  void post(Command cmd);

  /// Applies queued commands, runs one haptic tick and publishes a snapshot
  /// when a snapshot period has elapsed.
  void step();

  void subscribe(const std::shared_ptr<Subscriber>& subscriber);

  /// Most recently published snapshot (thread-safe).
  Snapshot latest() const;

  const EngineState& state() const noexcept { return state_; }
  std::int64_t ticks() const noexcept { return t_ms_; }
  int ticks_per_snapshot() const noexcept { return interp_ticks_; }

  /// Initial ROI: the whole coarsest level when it fits the default window,
  /// otherwise a centred default-size window on it.
  static RoiSelection default_roi(const DepthPyramid& pyramid);

 private:
  void apply(const Command& cmd);
  void publish();
  void broadcast_ack(const Ack& ack);
  Snapshot make_snapshot() const;

  std::shared_ptr<const DepthPyramid> pyramid_;
  RenderParams params_;
  EngineConfig config_;
  EngineState state_;
  int interp_ticks_ = 1;

  Vec3 hip_from_ = Vec3::Zero();
  Vec3 hip_to_ = Vec3::Zero();
  int hip_step_ = 0;

  std::int64_t t_ms_ = 0;
  std::uint64_t next_seq_ = 0;
  double last_switch_us_ = 0.0;
  std::vector<double> durations_;
  std::size_t duration_head_ = 0;

  std::mutex queue_mu_;
  std::deque<Command> queue_;

  mutable std::mutex out_mu_;
  Snapshot latest_;
  std::vector<std::weak_ptr<Subscriber>> subscribers_;
};

/// A SessionEngine ticking on its own thread at 1 kHz.
class Session {
 public:
  Session(std::string id, std::string asset_id, std::unique_ptr<SessionEngine> engine);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void start();
  void stop();

  const std::string& id() const noexcept { return id_; }
  const std::string& asset_id() const noexcept { return asset_id_; }
  SessionEngine& engine() noexcept { return *engine_; }

  /// Assigns a command id when `cmd.id` is zero; returns the id used.
  std::uint64_t post(Command cmd);

 private:
  void run();

  std::string id_;
  std::string asset_id_;
  std::unique_ptr<SessionEngine> engine_;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> next_cmd_id_{1};
  std::thread thread_;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The session existed but has been closed.
class GoneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AssetInfo {
  std::string id;
  std::shared_ptr<const DepthPyramid> pyramid;
};

/// Asset registry plus the set of live sessions.
class SessionManager {
 public:
  explicit SessionManager(EngineConfig config = {}, bool autostart = true);
  ~SessionManager();

  void add_asset(const std::string& id, std::shared_ptr<const DepthPyramid> pyramid);
  std::vector<AssetInfo> assets() const;
  /// Throws NotFoundError.
  std::shared_ptr<const DepthPyramid> asset(const std::string& id) const;

  /// Validates params (ValidationError) and the asset (NotFoundError), then
  /// starts a session and returns its id.
  std::string open_session(const std::string& asset_id, const RenderParams& params,
                           const std::optional<RoiSelection>& roi = std::nullopt);

  /// Throws NotFoundError for unknown ids and GoneError for closed ones.
  std::shared_ptr<Session> session(const std::string& id) const;

  void close_session(const std::string& id);
  void close_all();

 private:
  EngineConfig config_;
  bool autostart_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const DepthPyramid>> assets_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::set<std::string> closed_;
  std::uint64_t next_session_ = 1;
};

}  // namespace relief::service
