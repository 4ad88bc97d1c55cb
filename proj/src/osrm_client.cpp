#include "cycletrail/osrm_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

namespace cycletrail::mm {

using nlohmann::json;

namespace {

std::string build_match_path(const RemoteMatchOptions& options,
                             std::span<const Waypoint> points) {
  std::string path = "/match/v1/" + options.profile + "/";
  char buf[64];
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", points[i].point.lon, points[i].point.lat);
    if (i) path += ';';
    path += buf;
  }
  path += "?timestamps=";
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%lld",
                  static_cast<long long>(std::llround(points[i].time.epoch_s)));
    if (i) path += ';';
    path += buf;
  }
  path += "&annotations=true";
  return path;
}

/// Resolve a snapped location against the network using the leg node pair
/// next to it; falls back to a plain nearest lookup.
void resolve_network_refs(const net::RoadNetwork& network, MatchedTrip& trip) {
  for (std::size_t k = 0; k < trip.points.size(); ++k) {
    MatchedPoint& point = trip.points[k];
    const MatchedLeg* leg = nullptr;
    bool use_front = true;
    if (k < trip.legs.size() && trip.legs[k].node_sequence.size() >= 2) {
      leg = &trip.legs[k];
    } else if (k > 0 && trip.legs[k - 1].node_sequence.size() >= 2) {
      leg = &trip.legs[k - 1];
      use_front = false;
    }
    net::WayId way_from_leg = 0;
    if (leg) {
      const auto& nodes = leg->node_sequence;
      const net::NodeId a = use_front ? nodes[0] : nodes[nodes.size() - 2];
      const net::NodeId b = use_front ? nodes[1] : nodes[nodes.size() - 1];
      try {
        const auto ways_a = network.node_to_ways(a);
        const auto ways_b = network.node_to_ways(b);
        for (const auto way : ways_a) {
          if (std::find(ways_b.begin(), ways_b.end(), way) != ways_b.end()) {
            way_from_leg = way;
            break;  // smallest id wins; lists are sorted
          }
        }
      } catch (const UnknownNode&) {
        way_from_leg = 0;
      }
    }
    const auto candidates = network.nearest_candidates(point.snapped, 30.0, 16);
    for (const auto& cand : candidates) {
      if (way_from_leg == 0 || network.arc(cand.arc).way_id == way_from_leg) {
        point.way_id = network.arc(cand.arc).way_id;
        point.arc = cand.arc;
        point.offset_m = cand.offset_m;
        break;
      }
    }
    if (point.way_id == 0 && way_from_leg != 0) point.way_id = way_from_leg;
  }
}

}  // namespace

MatchedTrip parse_osrm_response(const json& response, const pre::TripSegment& seg,
                                std::size_t first_index, std::size_t count,
                                const net::RoadNetwork* network) {
  MatchedTrip trip;
  trip.trip_id = seg.trip_id;
  trip.segment_index = seg.segment_index;

  const std::string code = response.value("code", "");
  if (code == "NoMatch") {
    for (std::size_t i = 0; i < count; ++i) {
      trip.discarded.push_back(static_cast<std::int64_t>(first_index + i));
    }
    return trip;
  }
  if (code != "Ok") {
    throw RemoteRejected("match service returned code '" + code + "'");
  }
  if (!response.contains("tracepoints") || !response["tracepoints"].is_array() ||
      !response.contains("matchings") || !response["matchings"].is_array()) {
    throw ResponseParseError("match response missing tracepoints/matchings");
  }
  const auto& tracepoints = response["tracepoints"];
  const auto& matchings = response["matchings"];
  if (tracepoints.size() != count) {
    throw ResponseParseError("match response tracepoint count " +
                             std::to_string(tracepoints.size()) + " != request count " +
                             std::to_string(count));
  }

  try {
    for (std::size_t i = 0; i < count; ++i) {
      const auto& tp = tracepoints[i];
      const std::size_t seq = first_index + i;
      if (tp.is_null()) {
        trip.discarded.push_back(static_cast<std::int64_t>(seq));
        continue;
      }
      MatchedPoint point;
      point.point_seq = static_cast<std::int64_t>(seq);
      const auto& loc = tp.at("location");
      point.snapped = GeoPoint(loc.at(1).get<double>(), loc.at(0).get<double>());
      point.observed = seg.points[seq].point;
      point.time = seg.points[seq].time;
      point.emission_distance_m = haversine_distance(point.observed, point.snapped);

      if (!trip.points.empty()) {
        // locate the leg bridging the previous retained point and this one
        const auto prev_tp_index =
            static_cast<std::size_t>(trip.points.back().point_seq - static_cast<std::int64_t>(first_index));
        const auto& prev_tp = tracepoints[prev_tp_index];
        MatchedLeg leg;
        leg.from_seq = trip.points.back().point_seq;
        leg.to_seq = point.point_seq;
        leg.duration_s = point.time.epoch_s - trip.points.back().time.epoch_s;
        const int m_prev = prev_tp.at("matchings_index").get<int>();
        const int m_cur = tp.at("matchings_index").get<int>();
        const int w_prev = prev_tp.at("waypoint_index").get<int>();
        if (m_prev == m_cur) {
          const auto& osrm_leg = matchings.at(m_cur).at("legs").at(w_prev);
          leg.distance_m = osrm_leg.value("distance", 0.0);
          if (osrm_leg.contains("annotation") && osrm_leg["annotation"].contains("nodes")) {
            for (const auto& node : osrm_leg["annotation"]["nodes"]) {
              leg.node_sequence.push_back(node.get<net::NodeId>());
            }
          }
        } else {
          // matchings gap: connector leg, network route unknown
          leg.distance_m = haversine_distance(trip.points.back().snapped, point.snapped);
        }
        trip.legs.push_back(std::move(leg));
      }
      trip.points.push_back(std::move(point));
    }
  } catch (const json::exception& e) {
    throw ResponseParseError(std::string("match response shape: ") + e.what());
  }

  if (network) resolve_network_refs(*network, trip);
  return trip;
}

namespace {

void append_chunk(MatchedTrip& total, MatchedTrip&& chunk, bool overlap_first_point) {
  // the overlap point was already emitted by the previous chunk
  std::size_t skip_points = 0;
  if (overlap_first_point && !chunk.points.empty() && !total.points.empty() &&
      chunk.points.front().point_seq == total.points.back().point_seq) {
    skip_points = 1;
  }
  for (std::size_t i = skip_points; i < chunk.points.size(); ++i) {
    total.points.push_back(std::move(chunk.points[i]));
  }
  for (auto& leg : chunk.legs) total.legs.push_back(std::move(leg));
  for (const auto seq : chunk.discarded) {
    if (total.discarded.empty() || total.discarded.back() != seq) {
      total.discarded.push_back(seq);
    }
  }
}

}  // namespace

RemoteMatchResult remote_match(const RemoteMatchOptions& options, const pre::TripSegment& seg,
                               const net::RoadNetwork* network) {
  if (seg.points.size() < 2) {
    throw Error("remote_match: segment must have at least 2 points");
  }
  const std::size_t n = seg.points.size();
  const std::size_t chunk_size =
      std::max<std::size_t>(2, static_cast<std::size_t>(options.max_coords_per_request));

  httplib::Client client(options.base_url);
  client.set_connection_timeout(options.timeout_s, 0);
  client.set_read_timeout(options.timeout_s, 0);

  RemoteMatchResult result;
  result.trip.trip_id = seg.trip_id;
  result.trip.segment_index = seg.segment_index;

  std::size_t start = 0;
  bool first_chunk = true;
  while (start + 1 < n) {
    const std::size_t end = std::min(n, start + chunk_size);  // exclusive
    const std::span<const Waypoint> slice(seg.points.data() + start, end - start);
    const std::string path = build_match_path(options, slice);

    httplib::Result response;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
      response = client.Get(path);
      if (response) break;
      if (attempt < options.max_retries) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100 * (attempt + 1)));
      }
    }
    if (!response) {
      throw RemoteUnavailable("match endpoint " + options.base_url + " unreachable: " +
                              httplib::to_string(response.error()));
    }

    json body;
    try {
      body = json::parse(response->body);
    } catch (const json::parse_error& e) {
      throw ResponseParseError(std::string("match response is not JSON: ") + e.what());
    }
    const std::string code = body.value("code", "");
    if (response->status != 200 && code != "NoMatch") {
      throw RemoteRejected("match endpoint returned HTTP " + std::to_string(response->status) +
                           " code '" + code + "'");
    }

    MatchedTrip chunk = parse_osrm_response(body, seg, start, end - start, network);
    append_chunk(result.trip, std::move(chunk), !first_chunk);
    result.raw_responses.push_back(std::move(body));

    if (end == n) break;
    start = end - 1;  // 1-point overlap keeps the bridging leg
    first_chunk = false;
  }
  return result;
}

// ---------------------------------------------------------------------------
// persisted match documents

json to_match_json(const MatchedTrip& trip, std::size_t total_points) {
  json legs = json::array();
  double total_distance = 0.0, total_duration = 0.0;
  for (const auto& leg : trip.legs) {
    json annotation;
    annotation["nodes"] = leg.node_sequence;
    annotation["distance"] = json::array({leg.distance_m});
    annotation["duration"] = json::array({leg.duration_s});
    json out;
    out["distance"] = leg.distance_m;
    out["duration"] = leg.duration_s;
    out["annotation"] = std::move(annotation);
    out["cycletrail"] = json{{"intersections", leg.intersections}};
    legs.push_back(std::move(out));
    total_distance += leg.distance_m;
    total_duration += leg.duration_s;
  }

  json tracepoints = json::array();
  std::size_t retained = 0;
  std::size_t discarded_cursor = 0;
  for (std::size_t seq = 0; seq < total_points; ++seq) {
    const bool is_discarded = discarded_cursor < trip.discarded.size() &&
                              trip.discarded[discarded_cursor] == static_cast<std::int64_t>(seq);
    if (is_discarded) {
      ++discarded_cursor;
      tracepoints.push_back(nullptr);
      continue;
    }
    if (retained >= trip.points.size() ||
        trip.points[retained].point_seq != static_cast<std::int64_t>(seq)) {
      tracepoints.push_back(nullptr);  // defensive: unmapped sequence slot
      continue;
    }
    const MatchedPoint& point = trip.points[retained];
    json tp;
    tp["location"] = json::array({point.snapped.lon, point.snapped.lat});
    tp["matchings_index"] = 0;
    tp["waypoint_index"] = static_cast<int>(retained);
    tp["name"] = "";
    tp["cycletrail"] = json{{"point_seq", point.point_seq},
                            {"way_id", point.way_id},
                            {"arc", point.arc == net::kNoArc ? -1 : static_cast<long>(point.arc)},
                            {"offset_m", point.offset_m},
                            {"emission_m", point.emission_distance_m},
                            {"time", point.time.epoch_s},
                            {"observed", json::array({point.observed.lon, point.observed.lat})}};
    tracepoints.push_back(std::move(tp));
    ++retained;
  }

  json matching;
  matching["confidence"] = 1.0;
  matching["distance"] = total_distance;
  matching["duration"] = total_duration;
  matching["legs"] = std::move(legs);

  json doc;
  doc["code"] = trip.points.empty() ? "NoMatch" : "Ok";
  doc["matchings"] = json::array({std::move(matching)});
  doc["tracepoints"] = std::move(tracepoints);
  doc["cycletrail"] = json{{"trip_id", trip.trip_id},
                           {"segment_index", trip.segment_index},
                           {"total_points", total_points},
                           {"joint_log_prob", trip.joint_log_prob}};
  return doc;
}

MatchedTrip from_match_json(const json& doc) {
  MatchedTrip trip;
  try {
    const auto& meta = doc.at("cycletrail");
    trip.trip_id = meta.at("trip_id").get<std::string>();
    trip.segment_index = meta.at("segment_index").get<int>();
    trip.joint_log_prob = meta.value("joint_log_prob", 0.0);

    const auto& tracepoints = doc.at("tracepoints");
    for (std::size_t seq = 0; seq < tracepoints.size(); ++seq) {
      const auto& tp = tracepoints[seq];
      if (tp.is_null()) {
        trip.discarded.push_back(static_cast<std::int64_t>(seq));
        continue;
      }
      const auto& ext = tp.at("cycletrail");
      MatchedPoint point;
      point.point_seq = ext.at("point_seq").get<std::int64_t>();
      const auto& loc = tp.at("location");
      point.snapped = GeoPoint(loc.at(1).get<double>(), loc.at(0).get<double>());
      point.way_id = ext.at("way_id").get<net::WayId>();
      const long arc = ext.at("arc").get<long>();
      point.arc = arc < 0 ? net::kNoArc : static_cast<net::ArcId>(arc);
      point.offset_m = ext.at("offset_m").get<double>();
      point.emission_distance_m = ext.at("emission_m").get<double>();
      point.time = Timestamp(ext.at("time").get<double>());
      const auto& obs = ext.at("observed");
      point.observed = GeoPoint(obs.at(1).get<double>(), obs.at(0).get<double>());
      trip.points.push_back(std::move(point));
    }

    if (!doc.at("matchings").empty()) {
      const auto& legs = doc.at("matchings").at(0).at("legs");
      for (std::size_t i = 0; i < legs.size(); ++i) {
        const auto& in = legs[i];
        MatchedLeg leg;
        leg.distance_m = in.value("distance", 0.0);
        leg.duration_s = in.value("duration", 0.0);
        if (in.contains("annotation") && in["annotation"].contains("nodes")) {
          for (const auto& node : in["annotation"]["nodes"]) {
            leg.node_sequence.push_back(node.get<net::NodeId>());
          }
        }
        if (in.contains("cycletrail")) {
          leg.intersections = in["cycletrail"].value("intersections", 0);
        }
        trip.legs.push_back(std::move(leg));
      }
      for (std::size_t i = 0; i + 1 < trip.points.size() && i < trip.legs.size(); ++i) {
        trip.legs[i].from_seq = trip.points[i].point_seq;
        trip.legs[i].to_seq = trip.points[i + 1].point_seq;
      }
    }
  } catch (const json::exception& e) {
    throw ResponseParseError(std::string("match document shape: ") + e.what());
  }
  return trip;
}

}  // namespace cycletrail::mm
