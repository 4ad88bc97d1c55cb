#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>

#include "cycletrail/road_network.hpp"

namespace cycletrail::net {

struct OverpassOptions {
  std::string endpoint = "https://overpass-api.de";
  int timeout_s = 30;
  int max_retries = 2;
  double min_request_interval_s = 1.0;  // client-side rate limit
};

/// Fetches way metadata by id ([out:json]; way(id:N); out meta;). Requests
/// are serialized and rate limited; safe to share across workers.
class OverpassClient {
 public:
  explicit OverpassClient(OverpassOptions options);

  /// Tags for one way, or nullopt when the way is unknown to the service.
  /// Throws RemoteUnavailable / RemoteRejected / ResponseParseError.
  std::optional<WayTags> fetch_way_tags(WayId way_id);

  const OverpassOptions& options() const { return options_; }

 private:
  OverpassOptions options_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point last_request_{};
};

}  // namespace cycletrail::net
