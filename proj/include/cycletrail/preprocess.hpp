#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cycletrail/gpx.hpp"

namespace cycletrail::pre {

/// Gap-split unit of a trip at a uniform sampling grid.
struct TripSegment {
  std::string trip_id;
  int segment_index = 0;
  std::vector<Waypoint> points;
};

using Ring = std::vector<GeoPoint>;

/// Even-odd polygon set; a point on an edge or vertex counts as inside.
class BoundaryPolygon {
 public:
  BoundaryPolygon() = default;
  explicit BoundaryPolygon(std::vector<Ring> rings);

  bool contains(const GeoPoint& p) const;
  bool empty() const { return rings_.empty(); }
  const std::vector<Ring>& rings() const { return rings_; }

 private:
  std::vector<Ring> rings_;
};

struct StationaryTrim {
  double speed_ms = 0.3;     // below this the trace counts as stationary
  double duration_s = 20.0;  // leading prefixes at most this long are kept
};

struct PreprocessConfig {
  BoundaryPolygon boundary;  // empty ring set disables the bounds filter
  double max_speed_kmh = 50.0;
  double gap_split_seconds = 60.0;
  double resample_hz = 1.0;
  int min_points = 120;  // ~2 minutes at 1 Hz; file-size rule translated to points
  std::uint64_t min_file_bytes = 0;  // raw prefilter, 0 disables
  StationaryTrim stationary_trim;

  void validate() const;  // throws ConfigError
};

/// Per-trajectory drop accounting; every filter satisfies in = out + dropped.
struct PreprocessStats {
  std::int64_t points_parsed = 0;
  std::int64_t dropped_missing_time = 0;
  std::int64_t dropped_bad_interval = 0;
  std::int64_t dropped_out_of_bounds = 0;
  std::int64_t dropped_overspeed = 0;
  std::int64_t dropped_stationary_start = 0;
  std::int64_t resampled_points = 0;
  std::int64_t segments = 0;
  std::int64_t dropped_short_segments = 0;
  bool degenerate_stationary = false;
};

/// Keeps a point only when its time strictly exceeds the last kept point's
/// time; output is strictly increasing. Idempotent.
Trajectory fix_timestamps(const Trajectory& t);

/// Drops points outside the boundary (edge/vertex counts inside).
Trajectory filter_bounds(const Trajectory& t, const BoundaryPolygon& boundary);

/// Single forward pass; a point whose speed from the last kept point exceeds
/// the limit is dropped (strictly greater than; the earlier point is kept).
Trajectory filter_speed(const Trajectory& t, double max_speed_kmh);

/// Drops the maximal leading run of sub-threshold consecutive speeds when it
/// lasts longer than the duration threshold; the first moving point becomes
/// the new start. An entirely stationary trace collapses to its last point
/// and sets *degenerate.
Trajectory trim_stationary_start(const Trajectory& t, const StationaryTrim& cfg,
                                 bool* degenerate = nullptr);

/// Resamples to a uniform grid at hz (grid points at k / hz for integer k,
/// covering [ceil(first*hz)/hz, floor(last*hz)/hz]). Sub-second source
/// intervals use the nearest original point; gaps up to max_fill_gap_s are
/// linearly interpolated in lat/lon; larger gaps are left unfilled.
Trajectory resample(const Trajectory& t, double hz = 1.0, double max_fill_gap_s = 60.0);

/// Splits on consecutive-point gaps strictly greater than gap_split_seconds
/// and discards segments with fewer than min_points points. Surviving
/// segments are indexed 0.. in temporal order.
std::vector<TripSegment> split_on_gaps(const Trajectory& t, double gap_split_seconds = 60.0,
                                       int min_points = 1);

/// Full chain: fix_timestamps, filter_bounds, filter_speed,
/// trim_stationary_start, resample, split_on_gaps.
std::vector<TripSegment> preprocess_trajectory(const Trajectory& raw, const PreprocessConfig& cfg,
                                               PreprocessStats* stats = nullptr);

}  // namespace cycletrail::pre
