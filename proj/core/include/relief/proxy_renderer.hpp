#pragma once

#include "relief/depth_field.hpp"

namespace relief {

/// Tuning of the proxy solver. Lengths in mm, stiffness in N/mm.
struct RenderParams {
  double stiffness_k = 0.5;
  double delta_n = 0.1;        ///< proxy step length, both along the normal and toward the HIP
  double eps_surface = 1e-3;   ///< on-surface tolerance
  double eps_converge = 1e-3;  ///< proxy stationarity tolerance between iterations
  int max_iters = 50;
  double tick_budget_us = 1000.0;

  /// Throws ValidationError naming the first offending field.
  void validate() const;
};

/// Per-tick state of the rendering loop. Positions in mm, force in N.
struct HapticState {
  Vec3 hip = Vec3::Zero();
  Vec3 proxy = Vec3::Zero();
  bool in_contact = false;
  Vec3 force = Vec3::Zero();

  bool converged = true;  ///< false when resolve_proxy hit max_iters
  bool clamped = false;   ///< proxy or HIP target was clamped to the lateral extent
  int iterations = 0;
  double tick_us = 0.0;   ///< wall-clock duration of the last tick()

  /// Free-space state with proxy and HIP collocated at `p`.
  static HapticState at_rest(const Vec3& p) {
    HapticState s;
    s.hip = p;
    s.proxy = p;
    return s;
  }
};

/// One application of the two-branch proxy update: lift by delta_n along the
/// surface normal when the proxy penetrates, otherwise step delta_n toward the
/// HIP (landing on it when within one step and the hop stays outside).
HapticState step_proxy(const HapticState& state, const DepthField& field,
                       const RenderParams& params);

/// Successive approximation of the proxy for the state's current HIP.
///
/// Out of contact, the proxy follows the HIP until the straight segment to it
/// crosses the surface, and is then placed at that crossing. In contact, each
/// iteration lifts the proxy by delta_n along the normal and re-casts the ray
/// to the HIP, taking the first crossing. Stops when the HIP is reached in free
/// space, the proxy moves less than eps_converge, or max_iters is spent (then
/// `converged` is false).
HapticState resolve_proxy(HapticState state, const DepthField& field,
                          const RenderParams& params);

/// k * (proxy - hip) in contact, zero otherwise.
Vec3 compute_force(const HapticState& state, const RenderParams& params);

/// Sets the HIP, resolves the proxy and force, and records the wall-clock
/// duration in `tick_us`.
HapticState tick(const HapticState& state, const Vec3& new_hip, const DepthField& field,
                 const RenderParams& params);

}  // namespace relief
