#pragma once

#include <compare>
#include <cstdint>
#include <utility>

#include "cycletrail/errors.hpp"

namespace cycletrail {

/// IUGG mean Earth radius. Every great-circle distance in the library and in
/// the test oracles is computed on a sphere of this radius.
inline constexpr double kEarthRadiusM = 6371008.8;

inline constexpr double kMetersPerMile = 1609.344;

/// WGS84 coordinate pair in degrees. Construction validates ranges and
/// rejects non-finite values.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  GeoPoint() = default;
  GeoPoint(double lat_deg, double lon_deg);
};

/// Seconds since the Unix epoch, UTC. Sub-second precision preserved.
struct Timestamp {
  double epoch_s = 0.0;

  Timestamp() = default;
  explicit Timestamp(double seconds);

  auto operator<=>(const Timestamp&) const = default;
};

/// A single GPS observation.
struct Waypoint {
  GeoPoint point;
  Timestamp time;
  std::int64_t source_index = 0;
};

/// Great-circle distance in meters on the kEarthRadiusM sphere.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Speed in m/s between two observations. Throws NonPositiveInterval when
/// b is not strictly later than a; such pairs must have been repaired by
/// the timestamp fixer before any speed is computed.
double speed_between(const Waypoint& a, const Waypoint& b);

/// Equirectangular plane anchored at a reference point, in meters. Accurate
/// at the sub-kilometer scales used for candidate projection and noise
/// generation; never used for trip-length accounting.
class LocalPlane {
 public:
  explicit LocalPlane(const GeoPoint& origin);

  std::pair<double, double> to_xy(const GeoPoint& p) const;
  GeoPoint to_geo(double x_m, double y_m) const;

 private:
  double lat0_;
  double lon0_;
  double m_per_deg_lat_;
  double m_per_deg_lon_;
};

}  // namespace cycletrail
