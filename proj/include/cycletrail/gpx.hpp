#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cycletrail/geo.hpp"

namespace cycletrail::pre {

struct Trajectory {
  std::string trip_id;
  std::vector<Waypoint> points;
};

struct GpxParseResult {
  Trajectory trajectory;
  int dropped_missing_time = 0;  // trkpt without <time>, dropped per rule
};

/// Parses GPX 1.0/1.1 track points (trkpt lat/lon/time) in document order.
/// Points without a <time> child are dropped and counted. Throws MalformedGpx
/// when the bytes are not XML or contain no track, EmptyTrack when no usable
/// point remains.
GpxParseResult parse_gpx(std::string_view bytes, std::string trip_id);

/// Serializes waypoints as a single-track GPX 1.1 document.
std::string write_gpx(const std::string& name, const std::vector<Waypoint>& points);

/// "2023-05-01T10:02:03Z", optional fractional seconds, optional +-hh:mm
/// offset. Returns epoch seconds.
std::optional<double> parse_iso8601(std::string_view text);
std::string format_iso8601(double epoch_s);

}  // namespace cycletrail::pre
