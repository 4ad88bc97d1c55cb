#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "cycletrail/matching.hpp"

namespace cycletrail::mm {

struct RemoteMatchOptions {
  std::string base_url = "http://localhost:5000";
  std::string profile = "bike";
  int timeout_s = 30;
  int max_retries = 2;
  int max_coords_per_request = 100;  // chunk longer segments, 1-point overlap
};

struct RemoteMatchResult {
  MatchedTrip trip;
  std::vector<nlohmann::json> raw_responses;  // one per issued request
};

/// Issues OSRM match API v5 requests
/// (/match/v1/{profile}/{lon},{lat};...?timestamps=...&annotations=true) and
/// folds the responses into a MatchedTrip. When a network is supplied, way
/// ids and arc offsets are resolved against it. Throws RemoteUnavailable,
/// RemoteRejected, ResponseParseError.
RemoteMatchResult remote_match(const RemoteMatchOptions& options, const pre::TripSegment& seg,
                               const net::RoadNetwork* network = nullptr);

/// Parses one OSRM match response into trip fragments. point_seq values are
/// offset by first_seq; times come from the request's waypoints. Exposed for
/// canned-fixture tests.
MatchedTrip parse_osrm_response(const nlohmann::json& response, const pre::TripSegment& seg,
                                std::size_t first_index, std::size_t count,
                                const net::RoadNetwork* network);

/// OSRM-shaped document for a matched trip, with a "cycletrail" extension
/// per tracepoint so the trip reloads losslessly. The builtin backend writes
/// these; the remote backend rewrites its responses into the same shape.
nlohmann::json to_match_json(const MatchedTrip& trip, std::size_t total_points);

/// Reload of to_match_json output. Throws ResponseParseError on shape errors.
MatchedTrip from_match_json(const nlohmann::json& doc);

}  // namespace cycletrail::mm
