#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relief/asset_io.hpp"
#include "relief/depth_field.hpp"
#include "relief/proxy_renderer.hpp"

namespace relief {

struct ReplayOptions {
  /// Store measured tick durations in the trace. Off by default so that replays
  /// of the same inputs produce byte-identical files.
  bool record_timing = false;
};

/// Drives one tick per trajectory sample. The proxy starts at the first HIP,
/// raised onto the surface if that HIP is inside the object. Throws
/// ValidationError unless timestamps are consecutive milliseconds.
ForceTrace run_trajectory(const DepthField& field, const Trajectory& trajectory,
                          const RenderParams& params, const ReplayOptions& options = {});

struct LatencyStats {
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p99_us = 0.0;
  double max_us = 0.0;
  std::size_t overrun_count = 0;  ///< ticks slower than the budget
  std::size_t ticks = 0;
};

/// Nearest-rank percentiles over the given durations.
LatencyStats summarize_latency(std::span<const double> durations_us, double budget_us);

/// Replays the trajectory once to warm up, then `repeats` more times,
/// aggregating every tick's duration.
LatencyStats benchmark_latency(const DepthField& field, const Trajectory& trajectory,
                               const RenderParams& params, std::size_t repeats);

std::string format_latency(const LatencyStats& stats);

enum class Phase { kFree, kPenetrating, kHold };

std::string_view phase_name(Phase phase);

struct PhaseSegment {
  Phase phase;
  std::size_t begin;  ///< first tick index
  std::size_t end;    ///< one past the last
};

struct PhaseFailure {
  Phase phase;
  std::size_t tick;
  std::string reason;
};

/// Phases of a force-vs-time trace: free (OA), penetrating contact (AB) and
/// hold (BC).
struct PhaseReport {
  std::vector<PhaseSegment> segments;
  std::optional<PhaseFailure> failure;

  bool passed() const noexcept { return !failure.has_value(); }
};

/// Ticks out of contact are free; in contact with an unchanged HIP they are
/// hold, otherwise penetrating. Checks, in order of the trace:
///   free         force exactly zero
///   penetrating  per-tick proxy displacement <= 2 * max_iters * delta_n
///   hold         per-tick proxy displacement < eps_converge once the first
///                10 ticks of the hold have passed
PhaseReport check_phases(const ForceTrace& trace, const RenderParams& params);

/// `FAIL phase=<name> tick=<t_ms> reason=<text>` or `OK segments=<n>`.
std::string format_phase_report(const PhaseReport& report, const ForceTrace& trace);

inline constexpr std::size_t kHoldSettleTicks = 10;

}  // namespace relief
