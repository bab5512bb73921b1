#include "relief/proxy_renderer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "relief/errors.hpp"
#include "relief/surface.hpp"

namespace relief {
namespace {

// Clamps p laterally into the extent; reports whether anything changed.
bool clamp_lateral(const DepthField& field, Vec3& p) {
  const Vec2 c = clamp_to_extent(field, p.x(), p.y());
  const bool changed = c.x() != p.x() || c.y() != p.y();
  p.x() = c.x();
  p.y() = c.y();
  return changed;
}

Vec3 lift(const DepthField& field, const Vec3& p, double delta_n, bool& clamped) {
  Vec3 lifted = p + delta_n * surface_normal(field, p.x(), p.y());
  clamped |= clamp_lateral(field, lifted);
  return lifted;
}

// Foot of the HIP on the tangent plane at the proxy, if that point lies on the
// surface close to the proxy. Exact on planar patches, where the lift and
// re-cast sequence only approaches it geometrically.
std::optional<Vec3> tangent_foot(const DepthField& field, const Vec3& proxy, const Vec3& hip,
                                 const RenderParams& params) {
  const Vec3 n = surface_normal(field, proxy.x(), proxy.y());
  Vec3 q = hip - (hip - proxy).dot(n) * n;
  if (!field.contains(q.x(), q.y())) return std::nullopt;
  if ((q - proxy).norm() > params.delta_n) return std::nullopt;
  const double z = sample_depth(field, q.x(), q.y());
  if (std::abs(q.z() - z) > params.eps_surface) return std::nullopt;
  q.z() = std::max(q.z(), z);
  if ((hip - q).norm() >= (hip - proxy).norm()) return std::nullopt;
  return q;
}

}  // namespace

void RenderParams::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(stiffness_k)) throw ValidationError("stiffness_k must be positive");
  if (!positive(delta_n)) throw ValidationError("delta_n must be positive");
  if (!positive(eps_surface)) throw ValidationError("eps_surface must be positive");
  if (!positive(eps_converge)) throw ValidationError("eps_converge must be positive");
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
  if (!positive(tick_budget_us)) throw ValidationError("tick_budget_us must be positive");
}

HapticState step_proxy(const HapticState& state, const DepthField& field,
                       const RenderParams& params) {
  HapticState next = state;
  next.clamped = false;
  if (is_penetrating(field, state.proxy)) {
    next.proxy = lift(field, state.proxy, params.delta_n, next.clamped);
    return next;
  }

  const Vec3 to_hip = state.hip - state.proxy;
  const double distance = to_hip.norm();
  if (distance == 0.0) return next;

  if (distance <= params.delta_n && field.contains(state.hip.x(), state.hip.y()) &&
      !ray_surface_intersect(field, state.proxy, state.hip, params.delta_n)) {
    next.proxy = state.hip;
    return next;
  }
  next.proxy = state.proxy + params.delta_n * (to_hip / distance);
  next.clamped = clamp_lateral(field, next.proxy);
  return next;
}

HapticState resolve_proxy(HapticState state, const DepthField& field,
                          const RenderParams& params) {
  state.converged = true;
  state.clamped = false;
  state.iterations = 0;

  Vec3 target = state.hip;
  state.clamped |= clamp_lateral(field, target);
  state.clamped |= clamp_lateral(field, state.proxy);

  int iters = 0;
  // A proxy left below the surface (new field, re-seed) is pushed out first.
  while (is_penetrating(field, state.proxy) && iters < params.max_iters) {
    state.proxy = lift(field, state.proxy, params.delta_n, state.clamped);
    ++iters;
  }
  if (is_penetrating(field, state.proxy)) {
    state.converged = false;
    state.iterations = iters;
    return state;
  }

  if (!state.in_contact) {
    if (state.proxy == target) {
      state.iterations = iters;
      return state;
    }
    const std::optional<Vec3> hit =
        ray_surface_intersect(field, state.proxy, target, params.delta_n);
    if (!hit) {
      state.proxy = target;
      state.iterations = iters;
      return state;
    }
    state.proxy = *hit;
    state.in_contact = true;
  }

  // Without stationarity (creases, fine texture) the closest iterate is returned.
  Vec3 best = state.proxy;
  double best_distance = (target - best).norm();
  bool stopped = false;
  while (iters < params.max_iters) {
    ++iters;
    const Vec3 previous = state.proxy;

    Vec3 lifted = lift(field, state.proxy, params.delta_n, state.clamped);
    for (int guard = 0; is_penetrating(field, lifted) && guard < params.max_iters; ++guard) {
      lifted = lift(field, lifted, params.delta_n, state.clamped);
    }
    if (is_penetrating(field, lifted)) break;

    if (lifted == target) {
      state.proxy = target;
      state.in_contact = false;
      stopped = true;
      break;
    }
    const std::optional<Vec3> hit = ray_surface_intersect(field, lifted, target, params.delta_n);
    if (!hit) {
      // Nothing between the lifted proxy and the HIP: the HIP is outside.
      state.proxy = target;
      state.in_contact = false;
      stopped = true;
      break;
    }
    state.proxy = *hit;
    if (const auto foot = tangent_foot(field, state.proxy, target, params)) state.proxy = *foot;
    if (const double d = (target - state.proxy).norm(); d < best_distance) {
      best = state.proxy;
      best_distance = d;
    }
    if ((state.proxy - previous).norm() < params.eps_converge) {
      stopped = true;
      break;
    }
  }
  if (!stopped) state.proxy = best;
  state.converged = stopped;
  state.iterations = iters;
  return state;
}

Vec3 compute_force(const HapticState& state, const RenderParams& params) {
  if (!state.in_contact) return Vec3::Zero();
  return params.stiffness_k * (state.proxy - state.hip);
}

HapticState tick(const HapticState& state, const Vec3& new_hip, const DepthField& field,
                 const RenderParams& params) {
  const auto start = std::chrono::steady_clock::now();
  HapticState next = state;
  next.hip = new_hip;
  next = resolve_proxy(std::move(next), field, params);
  next.force = compute_force(next, params);
  const auto stop = std::chrono::steady_clock::now();
  next.tick_us = std::chrono::duration<double, std::micro>(stop - start).count();
  return next;
}

}  // namespace relief
