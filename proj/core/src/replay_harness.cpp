#include "relief/replay_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "relief/errors.hpp"
#include "relief/surface.hpp"

namespace relief {

ForceTrace run_trajectory(const DepthField& field, const Trajectory& trajectory,
                          const RenderParams& params, const ReplayOptions& options) {
  params.validate();
  if (!field.is_filled()) throw ValidationError("trajectory replay needs a hole-filled field");
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    if (trajectory[k].t_ms != trajectory[k - 1].t_ms + 1) {
      throw ValidationError("trajectory timestamps must be consecutive milliseconds (sample " +
                            std::to_string(k) + ")");
    }
  }

  ForceTrace trace;
  if (trajectory.empty()) return trace;
  trace.samples.reserve(trajectory.size());

  Vec3 start = trajectory.front().position;
  const Vec2 lateral = clamp_to_extent(field, start.x(), start.y());
  start.x() = lateral.x();
  start.y() = lateral.y();
  HapticState state = HapticState::at_rest(start);
  state.proxy.z() = std::max(start.z(), sample_depth(field, start.x(), start.y()));

  for (const auto& sample : trajectory) {
    state = tick(state, sample.position, field, params);
    TraceSample out;
    out.t_ms = sample.t_ms;
    out.hip = state.hip;
    out.proxy = state.proxy;
    out.force = state.force;
    out.in_contact = state.in_contact;
    out.tick_us = options.record_timing ? state.tick_us : 0.0;
    trace.samples.push_back(out);
  }
  return trace;
}

LatencyStats summarize_latency(std::span<const double> durations_us, double budget_us) {
  LatencyStats stats;
  stats.ticks = durations_us.size();
  if (durations_us.empty()) return stats;
  std::vector<double> sorted(durations_us.begin(), durations_us.end());
  std::sort(sorted.begin(), sorted.end());
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(idx, 1, sorted.size()) - 1];
  };
  stats.mean_us = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                  static_cast<double>(sorted.size());
  stats.p50_us = rank(0.50);
  stats.p99_us = rank(0.99);
  stats.max_us = sorted.back();
  stats.overrun_count = static_cast<std::size_t>(
      std::count_if(sorted.begin(), sorted.end(), [&](double d) { return d > budget_us; }));
  return stats;
}

LatencyStats benchmark_latency(const DepthField& field, const Trajectory& trajectory,
                               const RenderParams& params, std::size_t repeats) {
  if (repeats < 1) throw ValidationError("repeats must be at least 1");
  ReplayOptions timed;
  timed.record_timing = true;
  if (trajectory.empty()) return summarize_latency({}, params.tick_budget_us);

  run_trajectory(field, trajectory, params, timed);  // warm-up
  std::vector<double> durations;
  durations.reserve(trajectory.size() * repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    const ForceTrace trace = run_trajectory(field, trajectory, params, timed);
    for (const auto& s : trace.samples) durations.push_back(s.tick_us);
  }
  return summarize_latency(durations, params.tick_budget_us);
}

std::string format_latency(const LatencyStats& stats) {
  std::ostringstream os;
  os << "ticks=" << stats.ticks << " mean_us=" << stats.mean_us << " p50_us=" << stats.p50_us
     << " p99_us=" << stats.p99_us << " max_us=" << stats.max_us
     << " overruns=" << stats.overrun_count;
  return os.str();
}

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::kFree: return "OA";
    case Phase::kPenetrating: return "AB";
    case Phase::kHold: return "BC";
  }
  return "?";
}

PhaseReport check_phases(const ForceTrace& trace, const RenderParams& params) {
  PhaseReport report;
  const auto& s = trace.samples;
  const double ab_cap = 2.0 * static_cast<double>(params.max_iters) * params.delta_n;

  auto classify = [&](std::size_t k) {
    if (!s[k].in_contact) return Phase::kFree;
    if (k > 0 && s[k].hip == s[k - 1].hip) return Phase::kHold;
    return Phase::kPenetrating;
  };
  auto fail = [&](Phase phase, std::size_t k, std::string reason) {
    if (!report.failure) report.failure = PhaseFailure{phase, k, std::move(reason)};
  };

  for (std::size_t k = 0; k < s.size(); ++k) {
    const Phase phase = classify(k);
    if (report.segments.empty() || report.segments.back().phase != phase) {
      report.segments.push_back({phase, k, k + 1});
    } else {
      report.segments.back().end = k + 1;
    }
    const PhaseSegment& seg = report.segments.back();
    const double moved = k > 0 ? (s[k].proxy - s[k - 1].proxy).norm() : 0.0;

    switch (phase) {
      case Phase::kFree:
        if (!s[k].force.isZero(0.0)) {
          fail(phase, k, "nonzero force out of contact");
        }
        break;
      case Phase::kPenetrating:
        if (k > 0 && s[k - 1].in_contact && moved > ab_cap) {
          std::ostringstream os;
          os << "proxy jumped " << moved << " mm (cap " << ab_cap << ")";
          fail(phase, k, os.str());
        }
        break;
      case Phase::kHold:
        if (k - seg.begin >= kHoldSettleTicks && moved >= params.eps_converge) {
          std::ostringstream os;
          os << "proxy moved " << moved << " mm while holding (tolerance "
             << params.eps_converge << ")";
          fail(phase, k, os.str());
        }
        break;
    }
  }
  return report;
}

std::string format_phase_report(const PhaseReport& report, const ForceTrace& trace) {
  std::ostringstream os;
  if (report.failure) {
    const auto& f = *report.failure;
    const auto t = f.tick < trace.samples.size() ? trace.samples[f.tick].t_ms
                                                 : static_cast<std::int64_t>(f.tick);
    os << "FAIL phase=" << phase_name(f.phase) << " tick=" << t << " reason=" << f.reason;
  } else {
    os << "OK segments=" << report.segments.size();
    for (const auto& seg : report.segments) {
      os << ' ' << phase_name(seg.phase) << '[' << seg.begin << ',' << seg.end << ')';
    }
  }
  return os.str();
}

}  // namespace relief
