#include "relief/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "relief/errors.hpp"

namespace relief::service {

SessionEngine::SessionEngine(std::shared_ptr<const DepthPyramid> pyramid,
                             const RenderParams& params, const std::optional<RoiSelection>& roi,
                             const EngineConfig& config)
    : pyramid_(std::move(pyramid)), params_(params), config_(config) {
  if (!pyramid_) throw ValidationError("session needs a pyramid");
  params_.validate();
  if (!(config_.snapshot_hz > 0.0)) throw ValidationError("snapshot rate must be positive");
  const RoiSelection sel = roi.value_or(default_roi(*pyramid_));
  state_ = start_engine(*pyramid_, sel, config_.workspace_extent);
  interp_ticks_ = config_.hip_interp_ticks > 0
                      ? config_.hip_interp_ticks
                      : static_cast<int>(std::ceil(1000.0 / config_.snapshot_hz));
  hip_from_ = hip_to_ = state_.haptic.hip;
  hip_step_ = interp_ticks_;
  durations_.reserve(std::max<std::size_t>(1, config_.rolling_window));
  latest_ = make_snapshot();
  next_seq_ = 1;
}

RoiSelection SessionEngine::default_roi(const DepthPyramid& pyramid) {
  const std::size_t coarsest = pyramid.size() - 1;
  const DepthField& level = pyramid.level(coarsest);
  const Vec2 center(level.extent_x() / 2.0, level.extent_y() / 2.0);
  return centered_window(pyramid, coarsest, center, kDefaultRoiNodes, kDefaultRoiNodes);
}

void SessionEngine::post(Command cmd) {
  std::lock_guard lock(queue_mu_);
  queue_.push_back(std::move(cmd));
}

void SessionEngine::subscribe(const std::shared_ptr<Subscriber>& subscriber) {
  std::lock_guard lock(out_mu_);
  subscribers_.push_back(subscriber);
}

Snapshot SessionEngine::latest() const {
  std::lock_guard lock(out_mu_);
  return latest_;
}

void SessionEngine::apply(const Command& cmd) {
  Ack ack;
  ack.cmd_id = cmd.id;
  ack.seq = next_seq_;

  auto switch_to = [&](const RoiSelection& sel) {
    const auto start = std::chrono::steady_clock::now();
    state_ = switch_roi(state_, *pyramid_, sel);
    last_switch_us_ = std::chrono::duration<double, std::micro>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    hip_from_ = hip_to_ = state_.haptic.hip;
    hip_step_ = interp_ticks_;
  };

  try {
    if (const auto* set_hip = std::get_if<SetHip>(&cmd.body)) {
      if (!set_hip->position.allFinite()) throw ValidationError("HIP must be finite");
      hip_from_ = state_.haptic.hip;
      hip_to_ = set_hip->position;
      hip_step_ = 0;
    } else if (const auto* set_roi = std::get_if<SetRoi>(&cmd.body)) {
      switch_to(set_roi->roi);
    } else if (const auto* set_level = std::get_if<SetLevel>(&cmd.body)) {
      if (set_level->delta != 1 && set_level->delta != -1) {
        throw SelectionError("level step must be +1 or -1");
      }
      const auto& cur = state_.roi.selection;
      const auto target = static_cast<long long>(cur.level) + set_level->delta;
      if (target < 0 || target >= static_cast<long long>(pyramid_->size())) {
        throw SelectionError("no pyramid level " + std::to_string(target));
      }
      switch_to(centered_window(*pyramid_, static_cast<std::size_t>(target),
                                window_center(*pyramid_, cur), cur.w, cur.h));
    }
  } catch (const ValidationError& e) {
    ack.accepted = false;
    ack.error_code = dynamic_cast<const SelectionError*>(&e) ? "invalid_roi" : "invalid_command";
    ack.message = e.what();
  }
  broadcast_ack(ack);
}

void SessionEngine::step() {
  std::deque<Command> pending;
  {
    std::lock_guard lock(queue_mu_);
    pending.swap(queue_);
  }
  for (const auto& cmd : pending) apply(cmd);

  Vec3 hip = hip_to_;
  if (hip_step_ < interp_ticks_) {
    ++hip_step_;
    const double s = static_cast<double>(hip_step_) / static_cast<double>(interp_ticks_);
    hip = hip_from_ + s * (hip_to_ - hip_from_);
  }
  state_.haptic = tick(state_.haptic, hip, *state_.roi.field, params_);

  const std::size_t window = std::max<std::size_t>(1, config_.rolling_window);
  if (durations_.size() < window) {
    durations_.push_back(state_.haptic.tick_us);
  } else {
    durations_[duration_head_] = state_.haptic.tick_us;
    duration_head_ = (duration_head_ + 1) % window;
  }

  ++t_ms_;
  const auto period = [&](std::int64_t t) {
    return static_cast<std::int64_t>(std::floor(static_cast<double>(t) * config_.snapshot_hz / 1000.0));
  };
  if (t_ms_ == 1 || period(t_ms_) != period(t_ms_ - 1)) publish();
}

Snapshot SessionEngine::make_snapshot() const {
  Snapshot s;
  s.seq = next_seq_;
  s.t_ms = t_ms_;
  s.hip = state_.haptic.hip;
  s.proxy = state_.haptic.proxy;
  s.force = state_.haptic.force;
  s.in_contact = state_.haptic.in_contact;
  s.converged = state_.haptic.converged;
  s.roi = state_.roi.selection;
  s.mapping_version = state_.roi.version;
  s.lateral_scale = state_.roi.mapping.lateral_scale;
  s.depth_gain = state_.roi.mapping.depth_gain;
  s.last_switch_us = last_switch_us_;
  if (!durations_.empty()) {
    std::vector<double> sorted = durations_;
    double sum = 0.0;
    for (double d : sorted) sum += d;
    s.tick_mean_us = sum / static_cast<double>(sorted.size());
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())));
    const auto idx = std::clamp<std::size_t>(rank, 1, sorted.size()) - 1;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(idx), sorted.end());
    s.tick_p99_us = sorted[idx];
  }
  return s;
}

void SessionEngine::publish() {
  const Snapshot snap = make_snapshot();
  ++next_seq_;
  std::vector<std::shared_ptr<Subscriber>> live;
  {
    std::lock_guard lock(out_mu_);
    latest_ = snap;
    std::erase_if(subscribers_, [](const auto& w) { return w.expired(); });
    for (const auto& w : subscribers_) {
      if (auto s = w.lock()) live.push_back(std::move(s));
    }
  }
  for (const auto& s : live) s->on_snapshot(snap);
}

void SessionEngine::broadcast_ack(const Ack& ack) {
  std::vector<std::shared_ptr<Subscriber>> live;
  {
    std::lock_guard lock(out_mu_);
    for (const auto& w : subscribers_) {
      if (auto s = w.lock()) live.push_back(std::move(s));
    }
  }
  for (const auto& s : live) s->on_ack(ack);
}

// ---------------------------------------------------------------------------

Session::Session(std::string id, std::string asset_id, std::unique_ptr<SessionEngine> engine)
    : id_(std::move(id)), asset_id_(std::move(asset_id)), engine_(std::move(engine)) {}

Session::~Session() { stop(); }

void Session::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] { run(); });
}

void Session::stop() {
  running_ = false;
  if (thread_.joinable()) thread_.join();
}

std::uint64_t Session::post(Command cmd) {
  if (cmd.id == 0) cmd.id = next_cmd_id_.fetch_add(1);
  const auto id = cmd.id;
  engine_->post(std::move(cmd));
  return id;
}

void Session::run() {
  using clock = std::chrono::steady_clock;
  constexpr auto kTick = std::chrono::milliseconds(1);
  auto next = clock::now();
  while (running_) {
    engine_->step();
    next += kTick;
    const auto now = clock::now();
    if (now - next > std::chrono::milliseconds(50)) next = now;  // resync after a stall
    std::this_thread::sleep_until(next);
  }
}

// ---------------------------------------------------------------------------

SessionManager::SessionManager(EngineConfig config, bool autostart)
    : config_(config), autostart_(autostart) {}

SessionManager::~SessionManager() { close_all(); }

void SessionManager::add_asset(const std::string& id,
                               std::shared_ptr<const DepthPyramid> pyramid) {
  if (!pyramid) throw ValidationError("asset needs a pyramid");
  for (const auto& level : pyramid->levels()) {
    if (!level.is_filled()) throw ValidationError("asset '" + id + "' has unfilled holes");
  }
  std::lock_guard lock(mu_);
  assets_[id] = std::move(pyramid);
}

std::vector<AssetInfo> SessionManager::assets() const {
  std::lock_guard lock(mu_);
  std::vector<AssetInfo> out;
  for (const auto& [id, p] : assets_) out.push_back({id, p});
  return out;
}

std::shared_ptr<const DepthPyramid> SessionManager::asset(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = assets_.find(id);
  if (it == assets_.end()) throw NotFoundError("unknown asset '" + id + "'");
  return it->second;
}

std::string SessionManager::open_session(const std::string& asset_id, const RenderParams& params,
                                         const std::optional<RoiSelection>& roi) {
  params.validate();
  auto pyramid = asset(asset_id);
  auto engine = std::make_unique<SessionEngine>(std::move(pyramid), params, roi, config_);
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(mu_);
    const std::string id = "s" + std::to_string(next_session_++);
    session = std::make_shared<Session>(id, asset_id, std::move(engine));
    sessions_[id] = session;
  }
  if (autostart_) session->start();
  return session->id();
}

std::shared_ptr<Session> SessionManager::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it != sessions_.end()) return it->second;
  if (closed_.count(id) != 0) throw GoneError("session '" + id + "' has been closed");
  throw NotFoundError("unknown session '" + id + "'");
}

void SessionManager::close_session(const std::string& id) {
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) {
      if (closed_.count(id) != 0) throw GoneError("session '" + id + "' has been closed");
      throw NotFoundError("unknown session '" + id + "'");
    }
    session = it->second;
    sessions_.erase(it);
    closed_.insert(id);
  }
  session->stop();
}

void SessionManager::close_all() {
  std::map<std::string, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
    for (const auto& [id, s] : sessions) closed_.insert(id);
  }
  for (auto& [id, s] : sessions) s->stop();
}

}  // namespace relief::service
