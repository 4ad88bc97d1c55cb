#include "cycletrail/geo.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cycletrail {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool range_ok(double v, double lo, double hi) {
  return std::isfinite(v) && v >= lo && v <= hi;
}

}  // namespace

GeoPoint::GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
  if (!range_ok(lat_deg, -90.0, 90.0)) {
    throw Error("GeoPoint: latitude out of range: " + std::to_string(lat_deg));
  }
  if (!range_ok(lon_deg, -180.0, 180.0)) {
    throw Error("GeoPoint: longitude out of range: " + std::to_string(lon_deg));
  }
}

Timestamp::Timestamp(double seconds) : epoch_s(seconds) {
  if (!std::isfinite(seconds)) {
    throw Error("Timestamp: non-finite value");
  }
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlam = (b.lon - a.lon) * kDegToRad;
  const double sp = std::sin(dphi / 2.0);
  const double sl = std::sin(dlam / 2.0);
  const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double speed_between(const Waypoint& a, const Waypoint& b) {
  const double dt = b.time.epoch_s - a.time.epoch_s;
  if (dt <= 0.0) {
    throw NonPositiveInterval("speed_between: interval " + std::to_string(dt) +
                              " s is not positive");
  }
  return haversine_distance(a.point, b.point) / dt;
}

LocalPlane::LocalPlane(const GeoPoint& origin)
    : lat0_(origin.lat),
      lon0_(origin.lon),
      m_per_deg_lat_(kEarthRadiusM * kDegToRad),
      m_per_deg_lon_(kEarthRadiusM * kDegToRad * std::cos(origin.lat * kDegToRad)) {}

std::pair<double, double> LocalPlane::to_xy(const GeoPoint& p) const {
  return {(p.lon - lon0_) * m_per_deg_lon_, (p.lat - lat0_) * m_per_deg_lat_};
}

GeoPoint LocalPlane::to_geo(double x_m, double y_m) const {
  return {lat0_ + y_m / m_per_deg_lat_, lon0_ + x_m / m_per_deg_lon_};
}

}  // namespace cycletrail
