#include "cycletrail/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace cycletrail::pre {

namespace {

bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  const double cross =
      (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  if (std::abs(cross) > 1e-12) return false;
  const double dot =
      (p.lon - a.lon) * (b.lon - a.lon) + (p.lat - a.lat) * (b.lat - a.lat);
  const double len2 =
      (b.lon - a.lon) * (b.lon - a.lon) + (b.lat - a.lat) * (b.lat - a.lat);
  return dot >= 0.0 && dot <= len2;
}

}  // namespace

BoundaryPolygon::BoundaryPolygon(std::vector<Ring> rings) : rings_(std::move(rings)) {
  for (auto& ring : rings_) {
    if (ring.size() >= 2 && ring.front().lat == ring.back().lat &&
        ring.front().lon == ring.back().lon) {
      ring.pop_back();  // accept explicitly closed rings
    }
    if (!ring.empty() && ring.size() < 3) {
      throw ConfigError("BoundaryPolygon: ring with fewer than 3 vertices");
    }
  }
}

bool BoundaryPolygon::contains(const GeoPoint& p) const {
  bool inside = false;
  for (const auto& ring : rings_) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const GeoPoint& a = ring[i];
      const GeoPoint& b = ring[(i + 1) % n];
      if (on_segment(p, a, b)) return true;  // boundary counts as inside
      if ((a.lat > p.lat) != (b.lat > p.lat)) {
        const double x_int = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
        if (p.lon < x_int) inside = !inside;
      }
    }
  }
  return inside;
}

void PreprocessConfig::validate() const {
  if (max_speed_kmh <= 0.0) throw ConfigError("max_speed_kmh must be positive");
  if (gap_split_seconds <= 0.0) throw ConfigError("gap_split_seconds must be positive");
  if (resample_hz <= 0.0) throw ConfigError("resample_hz must be positive");
  if (min_points <= 0) throw ConfigError("min_points must be positive");
  if (stationary_trim.speed_ms <= 0.0) throw ConfigError("stationary speed must be positive");
  if (stationary_trim.duration_s <= 0.0) throw ConfigError("stationary duration must be positive");
}

Trajectory fix_timestamps(const Trajectory& t) {
  Trajectory out;
  out.trip_id = t.trip_id;
  out.points.reserve(t.points.size());
  for (const auto& wp : t.points) {
    if (out.points.empty() || wp.time > out.points.back().time) {
      out.points.push_back(wp);
    }
  }
  return out;
}

Trajectory filter_bounds(const Trajectory& t, const BoundaryPolygon& boundary) {
  if (boundary.empty()) return t;
  Trajectory out;
  out.trip_id = t.trip_id;
  out.points.reserve(t.points.size());
  for (const auto& wp : t.points) {
    if (boundary.contains(wp.point)) out.points.push_back(wp);
  }
  return out;
}

Trajectory filter_speed(const Trajectory& t, double max_speed_kmh) {
  const double limit_ms = max_speed_kmh / 3.6;
  Trajectory out;
  out.trip_id = t.trip_id;
  out.points.reserve(t.points.size());
  for (const auto& wp : t.points) {
    if (!out.points.empty() && speed_between(out.points.back(), wp) > limit_ms) {
      continue;  // the earlier point stays, the jump target goes
    }
    out.points.push_back(wp);
  }
  return out;
}

Trajectory trim_stationary_start(const Trajectory& t, const StationaryTrim& cfg,
                                 bool* degenerate) {
  if (degenerate) *degenerate = false;
  if (t.points.size() < 2) return t;

  std::size_t first_moving = t.points.size();
  for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
    if (speed_between(t.points[i], t.points[i + 1]) >= cfg.speed_ms) {
      first_moving = i;
      break;
    }
  }

  Trajectory out;
  out.trip_id = t.trip_id;
  if (first_moving == t.points.size()) {
    // never moves
    out.points.push_back(t.points.back());
    if (degenerate) *degenerate = true;
    return out;
  }
  const double prefix_s =
      t.points[first_moving].time.epoch_s - t.points.front().time.epoch_s;
  if (first_moving == 0 || prefix_s <= cfg.duration_s) return t;
  out.points.assign(t.points.begin() + static_cast<std::ptrdiff_t>(first_moving),
                    t.points.end());
  return out;
}

Trajectory resample(const Trajectory& t, double hz, double max_fill_gap_s) {
  if (hz <= 0.0) throw ConfigError("resample: hz must be positive");
  Trajectory out;
  out.trip_id = t.trip_id;
  if (t.points.empty()) return out;

  const double step = 1.0 / hz;
  const double first = t.points.front().time.epoch_s;
  const double last = t.points.back().time.epoch_s;
  const auto k0 = static_cast<std::int64_t>(std::ceil(first * hz));
  const auto k1 = static_cast<std::int64_t>(std::floor(last * hz));

  std::size_t lo = 0;  // last original index with time <= g
  for (std::int64_t k = k0; k <= k1; ++k) {
    const double g = static_cast<double>(k) * step;
    while (lo + 1 < t.points.size() && t.points[lo + 1].time.epoch_s <= g) ++lo;
    const Waypoint& prev = t.points[lo];

    GeoPoint coords;
    if (prev.time.epoch_s == g || lo + 1 == t.points.size()) {
      coords = prev.point;
    } else {
      const Waypoint& next = t.points[lo + 1];
      const double dt = next.time.epoch_s - prev.time.epoch_s;
      if (dt < step) {
        // burst denser than the grid: nearest original wins, earlier on ties
        coords = (g - prev.time.epoch_s <= next.time.epoch_s - g) ? prev.point : next.point;
      } else if (dt <= max_fill_gap_s) {
        const double f = (g - prev.time.epoch_s) / dt;
        coords = GeoPoint(prev.point.lat + f * (next.point.lat - prev.point.lat),
                          prev.point.lon + f * (next.point.lon - prev.point.lon));
      } else {
        continue;  // residual gap, handled by split_on_gaps
      }
    }
    out.points.push_back(Waypoint{coords, Timestamp(g),
                                  static_cast<std::int64_t>(out.points.size())});
  }
  return out;
}

namespace {

std::vector<TripSegment> split_impl(const Trajectory& t, double gap_split_seconds,
                                    int min_points, std::int64_t* dropped_segments) {
  std::vector<std::vector<Waypoint>> chunks;
  for (const auto& wp : t.points) {
    if (chunks.empty() ||
        wp.time.epoch_s - chunks.back().back().time.epoch_s > gap_split_seconds) {
      chunks.emplace_back();
    }
    chunks.back().push_back(wp);
  }
  std::vector<TripSegment> out;
  std::int64_t dropped = 0;
  for (auto& chunk : chunks) {
    if (static_cast<int>(chunk.size()) < min_points) {
      ++dropped;
      continue;
    }
    TripSegment seg;
    seg.trip_id = t.trip_id;
    seg.segment_index = static_cast<int>(out.size());
    seg.points = std::move(chunk);
    out.push_back(std::move(seg));
  }
  if (dropped_segments) *dropped_segments = dropped;
  return out;
}

}  // namespace

std::vector<TripSegment> split_on_gaps(const Trajectory& t, double gap_split_seconds,
                                       int min_points) {
  return split_impl(t, gap_split_seconds, min_points, nullptr);
}

std::vector<TripSegment> preprocess_trajectory(const Trajectory& raw, const PreprocessConfig& cfg,
                                               PreprocessStats* stats) {
  cfg.validate();
  PreprocessStats local;
  PreprocessStats& st = stats ? *stats : local;
  st.points_parsed = static_cast<std::int64_t>(raw.points.size());

  const Trajectory fixed = fix_timestamps(raw);
  st.dropped_bad_interval =
      static_cast<std::int64_t>(raw.points.size() - fixed.points.size());

  const Trajectory bounded = filter_bounds(fixed, cfg.boundary);
  st.dropped_out_of_bounds =
      static_cast<std::int64_t>(fixed.points.size() - bounded.points.size());

  const Trajectory slowed = filter_speed(bounded, cfg.max_speed_kmh);
  st.dropped_overspeed =
      static_cast<std::int64_t>(bounded.points.size() - slowed.points.size());

  bool degenerate = false;
  const Trajectory trimmed = trim_stationary_start(slowed, cfg.stationary_trim, &degenerate);
  st.dropped_stationary_start =
      static_cast<std::int64_t>(slowed.points.size() - trimmed.points.size());
  st.degenerate_stationary = degenerate;

  const Trajectory gridded = resample(trimmed, cfg.resample_hz, cfg.gap_split_seconds);
  st.resampled_points = static_cast<std::int64_t>(gridded.points.size());

  auto segments = split_impl(gridded, cfg.gap_split_seconds, cfg.min_points,
                             &st.dropped_short_segments);
  st.segments = static_cast<std::int64_t>(segments.size());
  return segments;
}

}  // namespace cycletrail::pre
