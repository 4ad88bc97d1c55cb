#include "cycletrail/overpass_client.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <map>
#include <thread>

namespace cycletrail::net {

using nlohmann::json;

OverpassClient::OverpassClient(OverpassOptions options) : options_(std::move(options)) {}

std::optional<WayTags> OverpassClient::fetch_way_tags(WayId way_id) {
  std::lock_guard<std::mutex> lock(mutex_);

  const auto now = std::chrono::steady_clock::now();
  if (last_request_.time_since_epoch().count() != 0) {
    const auto min_gap = std::chrono::duration<double>(options_.min_request_interval_s);
    const auto elapsed = std::chrono::duration<double>(now - last_request_);
    if (elapsed < min_gap) {
      std::this_thread::sleep_for(min_gap - elapsed);
    }
  }
  last_request_ = std::chrono::steady_clock::now();

  const std::string query =
      "[out:json]; way(id:" + std::to_string(way_id) + "); out meta;";

  httplib::Client client(options_.endpoint);
  client.set_connection_timeout(options_.timeout_s, 0);
  client.set_read_timeout(options_.timeout_s, 0);
  client.set_follow_location(true);

  httplib::Result response;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    response = client.Post("/api/interpreter", "data=" + httplib::detail::encode_url(query),
                           "application/x-www-form-urlencoded");
    if (response) break;
    if (attempt < options_.max_retries) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200 * (attempt + 1)));
    }
  }
  if (!response) {
    throw RemoteUnavailable("overpass endpoint " + options_.endpoint + " unreachable: " +
                            httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw RemoteRejected("overpass endpoint returned HTTP " + std::to_string(response->status));
  }

  json doc;
  try {
    doc = json::parse(response->body);
  } catch (const json::parse_error& e) {
    throw ResponseParseError(std::string("overpass response is not JSON: ") + e.what());
  }
  if (!doc.contains("elements") || !doc["elements"].is_array()) {
    throw ResponseParseError("overpass response missing elements array");
  }
  for (const auto& element : doc["elements"]) {
    if (element.value("type", "") != "way" || element.value("id", WayId{0}) != way_id) continue;
    std::map<std::string, std::string> kv;
    if (element.contains("tags")) {
      for (const auto& [k, v] : element["tags"].items()) kv[k] = v.get<std::string>();
    }
    return way_tags_from_map(kv);
  }
  return std::nullopt;
}

}  // namespace cycletrail::net
