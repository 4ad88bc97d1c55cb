#include "cycletrail/gpx.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace cycletrail::pre {

namespace pt = boost::property_tree;

namespace {

// days since 1970-01-01 for a proleptic Gregorian civil date
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

bool read_digits(std::string_view s, std::size_t& pos, int count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (int i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += count;
  out = v;
  return true;
}

}  // namespace

std::optional<double> parse_iso8601(std::string_view text) {
  // strip surrounding whitespace
  while (!text.empty() && (text.front() == ' ' || text.front() == '\n' || text.front() == '\t' ||
                           text.front() == '\r')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\n' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }

  std::size_t pos = 0;
  int year, month, day, hour, minute, second;
  if (!read_digits(text, pos, 4, year)) return std::nullopt;
  if (pos >= text.size() || text[pos] != '-') return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, month)) return std::nullopt;
  if (pos >= text.size() || text[pos] != '-') return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, day)) return std::nullopt;
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) {
    return std::nullopt;
  }
  ++pos;
  if (!read_digits(text, pos, 2, hour)) return std::nullopt;
  if (pos >= text.size() || text[pos] != ':') return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, minute)) return std::nullopt;
  if (pos >= text.size() || text[pos] != ':') return std::nullopt;
  ++pos;
  if (!read_digits(text, pos, 2, second)) return std::nullopt;

  double fraction = 0.0;
  if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
    ++pos;
    double scale = 0.1;
    bool any = false;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      fraction += (text[pos] - '0') * scale;
      scale *= 0.1;
      ++pos;
      any = true;
    }
    if (!any) return std::nullopt;
  }

  int offset_s = 0;
  if (pos < text.size()) {
    const char c = text[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      ++pos;
      int oh, om = 0;
      if (!read_digits(text, pos, 2, oh)) return std::nullopt;
      if (pos < text.size() && text[pos] == ':') ++pos;
      if (pos < text.size()) {
        if (!read_digits(text, pos, 2, om)) return std::nullopt;
      }
      offset_s = (oh * 3600 + om * 60) * (c == '+' ? 1 : -1);
    }
  }
  if (pos != text.size()) return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
    return std::nullopt;
  }

  const std::int64_t days = days_from_civil(year, month, day);
  return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + second + fraction -
         offset_s;
}

std::string format_iso8601(double epoch_s) {
  double whole = std::floor(epoch_s);
  double frac = epoch_s - whole;
  // millisecond precision; carry a rounded-up fraction into the seconds
  int ms = static_cast<int>(std::lround(frac * 1000.0));
  if (ms >= 1000) {
    ms -= 1000;
    whole += 1.0;
  }
  const std::int64_t total = static_cast<std::int64_t>(whole);
  std::int64_t days = total / 86400;
  std::int64_t rem = total % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  const int hh = static_cast<int>(rem / 3600);
  const int mm = static_cast<int>((rem % 3600) / 60);
  const int ss = static_cast<int>(rem % 60);
  char buf[40];
  if (ms > 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", y, m, d, hh, mm, ss, ms);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d, hh, mm, ss);
  }
  return buf;
}

GpxParseResult parse_gpx(std::string_view bytes, std::string trip_id) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(bytes)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw MalformedGpx("GPX '" + trip_id + "': " + e.message());
  }

  const auto gpx = doc.get_child_optional("gpx");
  if (!gpx) {
    throw MalformedGpx("GPX '" + trip_id + "': missing <gpx> root");
  }

  GpxParseResult result;
  result.trajectory.trip_id = std::move(trip_id);
  std::int64_t ordinal = 0;
  bool any_track = false;

  for (const auto& [trk_name, trk] : *gpx) {
    if (trk_name != "trk") continue;
    any_track = true;
    for (const auto& [seg_name, seg] : trk) {
      if (seg_name != "trkseg") continue;
      for (const auto& [pt_name, trkpt] : seg) {
        if (pt_name != "trkpt") continue;
        const std::int64_t idx = ordinal++;
        const auto lat = trkpt.get_optional<double>("<xmlattr>.lat");
        const auto lon = trkpt.get_optional<double>("<xmlattr>.lon");
        if (!lat || !lon) {
          throw MalformedGpx("GPX '" + result.trajectory.trip_id +
                             "': trkpt without lat/lon attributes");
        }
        const auto time_text = trkpt.get_optional<std::string>("time");
        if (!time_text) {
          ++result.dropped_missing_time;
          continue;
        }
        const auto epoch = parse_iso8601(*time_text);
        if (!epoch) {
          ++result.dropped_missing_time;
          continue;
        }
        result.trajectory.points.push_back(
            Waypoint{GeoPoint(*lat, *lon), Timestamp(*epoch), idx});
      }
    }
  }

  if (!any_track) {
    throw MalformedGpx("GPX '" + result.trajectory.trip_id + "': no <trk> element");
  }
  if (result.trajectory.points.empty()) {
    throw EmptyTrack("GPX '" + result.trajectory.trip_id + "': zero usable points");
  }
  return result;
}

std::string write_gpx(const std::string& name, const std::vector<Waypoint>& points) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<gpx version=\"1.1\" creator=\"cycletrail\" "
         "xmlns=\"http://www.topografix.com/GPX/1/1\">\n";
  out << "  <trk>\n    <name>" << name << "</name>\n    <trkseg>\n";
  char buf[96];
  for (const auto& wp : points) {
    std::snprintf(buf, sizeof(buf), "      <trkpt lat=\"%.7f\" lon=\"%.7f\">", wp.point.lat,
                  wp.point.lon);
    out << buf << "<time>" << format_iso8601(wp.time.epoch_s) << "</time></trkpt>\n";
  }
  out << "    </trkseg>\n  </trk>\n</gpx>\n";
  return out.str();
}

}  // namespace cycletrail::pre
