#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cycletrail/enrich.hpp"

namespace cycletrail::metrics {

struct StopConfig {
  double speed_threshold_ms = 0.3;
  double duration_threshold_s = 20.0;

  void validate() const;
};

enum class MotionStatus { Moving, Stopped };

/// Maximal runs of consecutive sub-threshold speeds become Stopped when the
/// run lasts strictly longer than the duration threshold (each point stands
/// for dt seconds).
std::vector<MotionStatus> identify_stops(std::span<const double> speeds_ms,
                                         const StopConfig& cfg, double dt_s = 1.0);

enum class SpeedLimitClass { Mph20, Mph30, Other };

/// 20/30 mph classes with +-1 mph tolerance after unit conversion
/// ("32 km/h" ~ 19.9 mph -> 20 mph); absent or out-of-band -> Other.
SpeedLimitClass maxspeed_normalize(const std::optional<net::MaxspeedTag>& tag);

/// One point of a stop-flagged, enriched trip; the unit derive_variables
/// aggregates. Mirrors one row of the persisted trip attributes table.
struct PointSample {
  bool has_leg = false;  // false on each trip's last point
  double leg_duration_s = 0.0;
  double leg_distance_m = 0.0;
  SpeedLimitClass limit = SpeedLimitClass::Other;
  net::CyclewayKind cycleway = net::CyclewayKind::None;
  int signals = 0;
  bool stopped = false;
};

struct VariablesRecord {
  std::string participant_id;
  double total_distance_m = 0.0;
  double total_time_s = 0.0;
  double avg_speed_ms = 0.0;
  double avg_speed_kmh = 0.0;
  double avg_moving_speed_kmh = 0.0;
  double prop_time_20mph = 0.0;
  double prop_time_30mph = 0.0;
  double prop_shared_lane = 0.0;
  double prop_track = 0.0;
  double prop_separate = 0.0;
  double prop_lane = 0.0;
  double prop_share_busway = 0.0;
  long signals_total = 0;
  double signal_density_per_km = 0.0;
};

/// Aggregates every derived variable for one participant's trips. Throws
/// ZeroDuration when no trip contributes time.
VariablesRecord derive_variables(const std::string& participant_id,
                                 const std::vector<std::vector<PointSample>>& trips);

/// Per-point speeds for stop detection: each point's outgoing leg speed, the
/// last point reusing its incoming leg.
std::vector<double> point_speeds(const std::vector<enrich::EnrichedPoint>& points,
                                 const std::vector<mm::MatchedLeg>& legs);

/// Flattens an enriched, stop-flagged trip into derive_variables input.
std::vector<PointSample> to_point_samples(const std::vector<enrich::EnrichedPoint>& points,
                                          const std::vector<mm::MatchedLeg>& legs,
                                          const std::vector<MotionStatus>& status);

}  // namespace cycletrail::metrics
