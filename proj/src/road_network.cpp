#include "cycletrail/road_network.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace cycletrail::net {

namespace pt = boost::property_tree;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct RawNode {
  NodeId id = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::map<std::string, std::string> tags;
};

struct RawWay {
  WayId id = 0;
  std::vector<NodeId> refs;
  std::map<std::string, std::string> tags;
};

bool signal_excluded(const std::map<std::string, std::string>& tags, const SignalFilter& filter) {
  for (const auto& key : filter.exclude_keys) {
    if (tags.count(key)) return true;
  }
  const auto it = tags.find("traffic_signals");
  if (it != tags.end()) {
    for (const auto& value : filter.exclude_signal_values) {
      if (it->second == value) return true;
    }
  }
  return false;
}

bool is_oneway(const std::map<std::string, std::string>& tags) {
  const auto it = tags.find("oneway");
  if (it == tags.end()) return false;
  return it->second == "yes" || it->second == "true" || it->second == "1";
}

}  // namespace

std::optional<MaxspeedTag> parse_maxspeed_value(std::string_view raw) {
  const std::string text = trim(raw);
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || !std::isfinite(value) || value < 0.0) return std::nullopt;
  const std::string unit = lower(trim(std::string_view(end)));
  if (unit.empty() || unit == "km/h" || unit == "kmh" || unit == "kph") {
    return MaxspeedTag{value, SpeedUnit::Kmh};
  }
  if (unit == "mph") {
    return MaxspeedTag{value, SpeedUnit::Mph};
  }
  return std::nullopt;
}

std::string format_maxspeed(const MaxspeedTag& tag) {
  char buf[48];
  if (tag.value == std::floor(tag.value)) {
    std::snprintf(buf, sizeof(buf), "%.0f", tag.value);
  } else {
    std::snprintf(buf, sizeof(buf), "%g", tag.value);
  }
  std::string out = buf;
  if (tag.unit == SpeedUnit::Mph) out += " mph";
  return out;
}

CyclewayTag parse_cycleway_value(std::string_view raw) {
  const std::string value = trim(raw);
  CyclewayTag tag;
  tag.raw = value;
  if (value == "shared_lane") {
    tag.kind = CyclewayKind::SharedLane;
  } else if (value == "share_busway") {
    tag.kind = CyclewayKind::ShareBusway;
  } else if (value == "track") {
    tag.kind = CyclewayKind::Track;
  } else if (value == "lane") {
    tag.kind = CyclewayKind::Lane;
  } else if (value == "separate") {
    tag.kind = CyclewayKind::Separate;
  } else if (value == "none" || value == "no") {
    tag.kind = CyclewayKind::None;
  } else {
    tag.kind = CyclewayKind::Other;
  }
  return tag;
}

std::string_view cycleway_kind_name(CyclewayKind kind) {
  switch (kind) {
    case CyclewayKind::SharedLane: return "shared_lane";
    case CyclewayKind::ShareBusway: return "share_busway";
    case CyclewayKind::Track: return "track";
    case CyclewayKind::Lane: return "lane";
    case CyclewayKind::Separate: return "separate";
    case CyclewayKind::None: return "none";
    case CyclewayKind::Other: return "other";
  }
  return "none";
}

WayTags way_tags_from_map(const std::map<std::string, std::string>& kv) {
  WayTags tags;
  if (const auto it = kv.find("maxspeed"); it != kv.end()) {
    tags.maxspeed = parse_maxspeed_value(it->second);
  }
  if (const auto it = kv.find("highway"); it != kv.end()) tags.highway = it->second;
  if (const auto it = kv.find("name"); it != kv.end()) tags.name = it->second;
  if (const auto it = kv.find("ref"); it != kv.end()) tags.ref = it->second;
  if (const auto it = kv.find("lanes"); it != kv.end()) {
    char* end = nullptr;
    const long lanes = std::strtol(it->second.c_str(), &end, 10);
    if (end != it->second.c_str() && lanes > 0) tags.lanes = static_cast<int>(lanes);
  }
  if (const auto it = kv.find("traffic_calming"); it != kv.end()) {
    tags.traffic_calming = it->second;
  }
  if (const auto it = kv.find("cycleway:left"); it != kv.end()) {
    tags.cycleway_left = parse_cycleway_value(it->second);
  }
  if (const auto it = kv.find("cycleway:right"); it != kv.end()) {
    tags.cycleway_right = parse_cycleway_value(it->second);
  }
  if (const auto it = kv.find("cycleway:both"); it != kv.end()) {
    tags.cycleway_both = parse_cycleway_value(it->second);
  }
  return tags;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct ParsedElements {
  std::map<NodeId, RoadNode> nodes;
  std::map<WayId, RoadWay> ways;
};

ParsedElements ingest(const std::vector<RawNode>& raw_nodes, std::vector<RawWay> raw_ways,
                      const SignalFilter& filter, ParseReport* report) {
  ParsedElements out;
  for (const auto& raw : raw_nodes) {
    RoadNode node;
    node.id = raw.id;
    node.point = GeoPoint(raw.lat, raw.lon);
    const auto highway = raw.tags.find("highway");
    node.is_traffic_signal = highway != raw.tags.end() &&
                             highway->second == "traffic_signals" &&
                             !signal_excluded(raw.tags, filter);
    out.nodes[node.id] = node;
  }

  for (auto& raw : raw_ways) {
    if (!raw.tags.count("highway")) continue;  // only routable road ways

    // collapse consecutive duplicate refs
    raw.refs.erase(std::unique(raw.refs.begin(), raw.refs.end()), raw.refs.end());

    bool dangling = false;
    for (const NodeId ref : raw.refs) {
      if (!out.nodes.count(ref)) {
        dangling = true;
        break;
      }
    }
    if (dangling) {
      if (report) {
        ++report->dangling_node_ways;
        report->warnings.push_back("way " + std::to_string(raw.id) +
                                   " references a missing node; skipped");
      }
      continue;
    }
    if (raw.refs.size() < 2) {
      if (report) {
        report->warnings.push_back("way " + std::to_string(raw.id) +
                                   " has fewer than 2 nodes; skipped");
      }
      continue;
    }

    RoadWay way;
    way.id = raw.id;
    way.node_ids = raw.refs;
    way.tags = way_tags_from_map(raw.tags);
    way.oneway = is_oneway(raw.tags);
    way.length_m = 0.0;
    for (std::size_t i = 0; i + 1 < way.node_ids.size(); ++i) {
      way.length_m += haversine_distance(out.nodes.at(way.node_ids[i]).point,
                                         out.nodes.at(way.node_ids[i + 1]).point);
    }
    if (way.length_m <= 0.0) {
      if (report) {
        report->warnings.push_back("way " + std::to_string(raw.id) +
                                   " has zero geometric length; skipped");
      }
      continue;
    }
    out.ways[way.id] = std::move(way);
  }
  return out;
}

}  // namespace

RoadNetwork::RoadNetwork(std::map<NodeId, RoadNode> nodes, std::map<WayId, RoadWay> ways)
    : nodes_(std::move(nodes)), ways_(std::move(ways)) {
  build_arcs();
  build_spatial_index();
}

RoadNetwork RoadNetwork::parse(std::string_view bytes, OsmFormat format,
                               const SignalFilter& filter, ParseReport* report) {
  return format == OsmFormat::Xml ? from_osm_xml(bytes, filter, report)
                                  : from_overpass_json(bytes, filter, report);
}

RoadNetwork RoadNetwork::from_osm_xml(std::string_view bytes, const SignalFilter& filter,
                                      ParseReport* report) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(bytes)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw MalformedOsm(std::string("OSM XML: ") + e.message());
  }
  const auto osm = doc.get_child_optional("osm");
  if (!osm) throw MalformedOsm("OSM XML: missing <osm> root");

  std::vector<RawNode> raw_nodes;
  std::vector<RawWay> raw_ways;
  for (const auto& [name, element] : *osm) {
    if (name == "node") {
      RawNode node;
      const auto id = element.get_optional<NodeId>("<xmlattr>.id");
      const auto lat = element.get_optional<double>("<xmlattr>.lat");
      const auto lon = element.get_optional<double>("<xmlattr>.lon");
      if (!id || !lat || !lon) throw MalformedOsm("OSM XML: node missing id/lat/lon");
      node.id = *id;
      node.lat = *lat;
      node.lon = *lon;
      for (const auto& [child_name, child] : element) {
        if (child_name != "tag") continue;
        node.tags[child.get<std::string>("<xmlattr>.k")] = child.get<std::string>("<xmlattr>.v");
      }
      raw_nodes.push_back(std::move(node));
    } else if (name == "way") {
      RawWay way;
      const auto id = element.get_optional<WayId>("<xmlattr>.id");
      if (!id) throw MalformedOsm("OSM XML: way missing id");
      way.id = *id;
      for (const auto& [child_name, child] : element) {
        if (child_name == "nd") {
          way.refs.push_back(child.get<NodeId>("<xmlattr>.ref"));
        } else if (child_name == "tag") {
          way.tags[child.get<std::string>("<xmlattr>.k")] = child.get<std::string>("<xmlattr>.v");
        }
      }
      raw_ways.push_back(std::move(way));
    }
  }
  auto parsed = ingest(raw_nodes, std::move(raw_ways), filter, report);
  return RoadNetwork(std::move(parsed.nodes), std::move(parsed.ways));
}

RoadNetwork RoadNetwork::from_overpass_json(std::string_view bytes, const SignalFilter& filter,
                                            ParseReport* report) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw MalformedOsm(std::string("Overpass JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("elements") || !doc["elements"].is_array()) {
    throw MalformedOsm("Overpass JSON: missing elements array");
  }

  std::vector<RawNode> raw_nodes;
  std::vector<RawWay> raw_ways;
  for (const auto& element : doc["elements"]) {
    const std::string type = element.value("type", "");
    if (type == "node") {
      RawNode node;
      node.id = element.at("id").get<NodeId>();
      node.lat = element.at("lat").get<double>();
      node.lon = element.at("lon").get<double>();
      if (element.contains("tags")) {
        for (const auto& [k, v] : element["tags"].items()) {
          node.tags[k] = v.get<std::string>();
        }
      }
      raw_nodes.push_back(std::move(node));
    } else if (type == "way") {
      RawWay way;
      way.id = element.at("id").get<WayId>();
      if (element.contains("nodes")) {
        for (const auto& ref : element["nodes"]) way.refs.push_back(ref.get<NodeId>());
      }
      if (element.contains("tags")) {
        for (const auto& [k, v] : element["tags"].items()) {
          way.tags[k] = v.get<std::string>();
        }
      }
      raw_ways.push_back(std::move(way));
    }
  }
  auto parsed = ingest(raw_nodes, std::move(raw_ways), filter, report);
  return RoadNetwork(std::move(parsed.nodes), std::move(parsed.ways));
}

void RoadNetwork::set_way_tags(WayId id, WayTags tags) {
  const auto it = ways_.find(id);
  if (it == ways_.end()) return;
  it->second.tags = std::move(tags);
}

const RoadNode* RoadNetwork::find_node(NodeId id) const {
  const auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const RoadWay* RoadNetwork::find_way(WayId id) const {
  const auto it = ways_.find(id);
  return it == ways_.end() ? nullptr : &it->second;
}

std::vector<WayId> RoadNetwork::node_to_ways(NodeId id) const {
  if (!nodes_.count(id)) {
    throw UnknownNode("node " + std::to_string(id) + " is not in the network");
  }
  const auto it = node_ways_.find(id);
  if (it == node_ways_.end()) return {};
  return it->second;
}

int RoadNetwork::junction_degree(NodeId id) const {
  const auto it = junction_degree_.find(id);
  return it == junction_degree_.end() ? 0 : it->second;
}

void RoadNetwork::build_arcs() {
  arcs_.clear();
  out_arcs_.clear();
  node_ways_.clear();
  junction_degree_.clear();

  // usage counts decide junctions: nodes referenced by >=2 (way, position) slots
  std::unordered_map<NodeId, int> usage;
  for (const auto& [way_id, way] : ways_) {
    std::unordered_set<NodeId> seen_in_way;
    for (const NodeId node : way.node_ids) {
      ++usage[node];
      if (seen_in_way.insert(node).second) node_ways_[node].push_back(way_id);
    }
  }
  for (auto& [node, list] : node_ways_) {
    std::sort(list.begin(), list.end());
  }

  for (const auto& [way_id, way] : ways_) {
    std::vector<std::size_t> cuts{0};
    for (std::size_t i = 1; i + 1 < way.node_ids.size(); ++i) {
      if (usage[way.node_ids[i]] >= 2) cuts.push_back(i);
    }
    cuts.push_back(way.node_ids.size() - 1);

    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const std::size_t begin = cuts[c];
      const std::size_t end = cuts[c + 1];

      Arc forward;
      forward.way_id = way_id;
      forward.canonical = true;
      for (std::size_t i = begin; i <= end; ++i) {
        const NodeId node = way.node_ids[i];
        forward.node_ids.push_back(node);
        forward.points.push_back(nodes_.at(node).point);
      }
      forward.cum_m.resize(forward.points.size(), 0.0);
      for (std::size_t i = 1; i < forward.points.size(); ++i) {
        forward.cum_m[i] =
            forward.cum_m[i - 1] + haversine_distance(forward.points[i - 1], forward.points[i]);
      }
      if (forward.cum_m.back() <= 0.0) continue;

      forward.id = static_cast<ArcId>(arcs_.size());
      if (!way.oneway) {
        Arc backward;
        backward.way_id = way_id;
        backward.canonical = false;
        backward.node_ids.assign(forward.node_ids.rbegin(), forward.node_ids.rend());
        backward.points.assign(forward.points.rbegin(), forward.points.rend());
        backward.cum_m.resize(forward.cum_m.size());
        const double total = forward.cum_m.back();
        for (std::size_t i = 0; i < forward.cum_m.size(); ++i) {
          backward.cum_m[i] = total - forward.cum_m[forward.cum_m.size() - 1 - i];
        }
        backward.id = static_cast<ArcId>(arcs_.size() + 1);
        forward.twin = backward.id;
        backward.twin = forward.id;
        arcs_.push_back(forward);
        arcs_.push_back(std::move(backward));
      } else {
        forward.twin = kNoArc;
        arcs_.push_back(std::move(forward));
      }
    }
  }

  for (const Arc& arc : arcs_) {
    out_arcs_[arc.from_node()].push_back(arc.id);
    if (arc.canonical) {
      ++junction_degree_[arc.from_node()];
      ++junction_degree_[arc.to_node()];
    }
  }
}

std::uint64_t RoadNetwork::cell_key(std::int64_t ix, std::int64_t iy) const {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy));
}

void RoadNetwork::build_spatial_index() {
  grid_ = GridIndex{};
  if (arcs_.empty()) return;

  double min_lat = 90.0, max_lat = -90.0, min_lon = 180.0, max_lon = -180.0;
  for (const Arc& arc : arcs_) {
    for (const GeoPoint& p : arc.points) {
      min_lat = std::min(min_lat, p.lat);
      max_lat = std::max(max_lat, p.lat);
      min_lon = std::min(min_lon, p.lon);
      max_lon = std::max(max_lon, p.lon);
    }
  }
  constexpr double kCellMeters = 250.0;
  const double m_per_deg_lat = kEarthRadiusM * std::numbers::pi / 180.0;
  const double mid_lat = (min_lat + max_lat) / 2.0;
  const double cos_mid = std::max(0.05, std::cos(mid_lat * std::numbers::pi / 180.0));
  grid_.cell_deg_lat = kCellMeters / m_per_deg_lat;
  grid_.cell_deg_lon = kCellMeters / (m_per_deg_lat * cos_mid);
  grid_.min_lat = min_lat;
  grid_.min_lon = min_lon;

  for (const Arc& arc : arcs_) {
    if (arc.canonical) index_arc(arc.id);
  }
}

void RoadNetwork::index_arc(ArcId id) {
  const Arc& arc = arcs_[id];
  std::unordered_set<std::uint64_t> keys;
  for (std::size_t i = 0; i + 1 < arc.points.size(); ++i) {
    const GeoPoint& a = arc.points[i];
    const GeoPoint& b = arc.points[i + 1];
    const auto ix0 = static_cast<std::int64_t>(
        std::floor((std::min(a.lon, b.lon) - grid_.min_lon) / grid_.cell_deg_lon));
    const auto ix1 = static_cast<std::int64_t>(
        std::floor((std::max(a.lon, b.lon) - grid_.min_lon) / grid_.cell_deg_lon));
    const auto iy0 = static_cast<std::int64_t>(
        std::floor((std::min(a.lat, b.lat) - grid_.min_lat) / grid_.cell_deg_lat));
    const auto iy1 = static_cast<std::int64_t>(
        std::floor((std::max(a.lat, b.lat) - grid_.min_lat) / grid_.cell_deg_lat));
    for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
      for (std::int64_t iy = iy0; iy <= iy1; ++iy) {
        keys.insert(cell_key(ix, iy));
      }
    }
  }
  for (const auto key : keys) grid_.cells[key].push_back(id);
}

namespace {

struct Projection {
  double distance_m = 0.0;
  double offset_m = 0.0;
  GeoPoint snapped;
};

Projection project_to_arc(const Arc& arc, const GeoPoint& p) {
  const LocalPlane plane(p);
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  double best_t = 0.0, best_x = 0.0, best_y = 0.0;
  for (std::size_t i = 0; i + 1 < arc.points.size(); ++i) {
    const auto [ax, ay] = plane.to_xy(arc.points[i]);
    const auto [bx, by] = plane.to_xy(arc.points[i + 1]);
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp((-ax * dx - ay * dy) / len2, 0.0, 1.0);
    const double qx = ax + t * dx;
    const double qy = ay + t * dy;
    const double d2 = qx * qx + qy * qy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best_i = i;
      best_t = t;
      best_x = qx;
      best_y = qy;
    }
  }
  Projection out;
  out.snapped = plane.to_geo(best_x, best_y);
  out.offset_m = arc.cum_m[best_i] + best_t * (arc.cum_m[best_i + 1] - arc.cum_m[best_i]);
  out.distance_m = haversine_distance(p, out.snapped);
  return out;
}

}  // namespace

std::vector<Candidate> RoadNetwork::nearest_candidates(const GeoPoint& p, double radius_m,
                                                       int k) const {
  std::vector<Candidate> result;
  if (radius_m <= 0.0 || k <= 0 || arcs_.empty() || grid_.cells.empty()) return result;

  const double m_per_deg_lat = kEarthRadiusM * std::numbers::pi / 180.0;
  const double cos_lat = std::max(0.05, std::cos(p.lat * std::numbers::pi / 180.0));
  const double pad_lat = radius_m / m_per_deg_lat;
  const double pad_lon = radius_m / (m_per_deg_lat * cos_lat);

  const auto ix0 = static_cast<std::int64_t>(
      std::floor((p.lon - pad_lon - grid_.min_lon) / grid_.cell_deg_lon));
  const auto ix1 = static_cast<std::int64_t>(
      std::floor((p.lon + pad_lon - grid_.min_lon) / grid_.cell_deg_lon));
  const auto iy0 = static_cast<std::int64_t>(
      std::floor((p.lat - pad_lat - grid_.min_lat) / grid_.cell_deg_lat));
  const auto iy1 = static_cast<std::int64_t>(
      std::floor((p.lat + pad_lat - grid_.min_lat) / grid_.cell_deg_lat));

  std::vector<ArcId> hits;
  for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
    for (std::int64_t iy = iy0; iy <= iy1; ++iy) {
      const auto it = grid_.cells.find(cell_key(ix, iy));
      if (it == grid_.cells.end()) continue;
      hits.insert(hits.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());

  for (const ArcId id : hits) {
    const Arc& arc = arcs_[id];
    const Projection proj = project_to_arc(arc, p);
    if (proj.distance_m > radius_m) continue;
    result.push_back(Candidate{id, proj.offset_m, proj.snapped, proj.distance_m});
    if (arc.twin != kNoArc) {
      result.push_back(
          Candidate{arc.twin, arc.length_m() - proj.offset_m, proj.snapped, proj.distance_m});
    }
  }

  std::sort(result.begin(), result.end(), [this](const Candidate& a, const Candidate& b) {
    const WayId wa = arcs_[a.arc].way_id;
    const WayId wb = arcs_[b.arc].way_id;
    return std::tie(a.distance_m, wa, a.arc) < std::tie(b.distance_m, wb, b.arc);
  });
  if (static_cast<int>(result.size()) > k) result.resize(static_cast<std::size_t>(k));
  return result;
}

// ---------------------------------------------------------------------------
// routing

namespace {

struct SearchState {
  std::unordered_map<NodeId, double> dist;
  std::unordered_map<NodeId, ArcId> via;
};

void run_dijkstra(const std::vector<Arc>& arcs,
                  const std::unordered_map<NodeId, std::vector<ArcId>>& out_arcs, NodeId start,
                  double init_cost, double cutoff, const std::unordered_set<NodeId>* targets,
                  SearchState& st) {
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  st.dist[start] = init_cost;
  queue.emplace(init_cost, start);
  std::size_t remaining = targets ? targets->size() : 0;

  while (!queue.empty()) {
    const auto [cost, node] = queue.top();
    queue.pop();
    const auto it = st.dist.find(node);
    if (it == st.dist.end() || cost > it->second) continue;  // stale entry
    if (targets && targets->count(node) && remaining > 0) {
      if (--remaining == 0) break;
    }
    if (cost > cutoff) break;
    const auto out = out_arcs.find(node);
    if (out == out_arcs.end()) continue;
    for (const ArcId arc_id : out->second) {
      const Arc& arc = arcs[arc_id];
      const double next_cost = cost + arc.length_m();
      if (next_cost > cutoff) continue;
      const NodeId next = arc.to_node();
      const auto dit = st.dist.find(next);
      if (dit == st.dist.end() || next_cost < dit->second) {
        st.dist[next] = next_cost;
        st.via[next] = arc_id;
        queue.emplace(next_cost, next);
      } else if (next_cost == dit->second && arc_id < st.via[next]) {
        st.via[next] = arc_id;  // deterministic parent on exact ties
      }
    }
  }
}

}  // namespace

void RoadNetwork::check_anchor(const Anchor& a) const {
  if (a.arc >= arcs_.size()) throw Error("anchor references an unknown arc");
  const double len = arcs_[a.arc].length_m();
  if (a.offset_m < -1e-6 || a.offset_m > len + 1e-6) {
    throw Error("anchor offset outside arc length");
  }
}

std::vector<std::optional<double>> RoadNetwork::route_distances(const Anchor& from,
                                                                std::span<const Anchor> to,
                                                                double cutoff_m) const {
  check_anchor(from);
  const Arc& from_arc = arcs_[from.arc];
  const double exit_cost = from_arc.length_m() - from.offset_m;

  std::unordered_set<NodeId> target_nodes;
  for (const Anchor& anchor : to) {
    check_anchor(anchor);
    target_nodes.insert(arcs_[anchor.arc].from_node());
  }

  SearchState st;
  run_dijkstra(arcs_, out_arcs_, from_arc.to_node(), exit_cost, cutoff_m, &target_nodes, st);

  std::vector<std::optional<double>> result(to.size());
  for (std::size_t i = 0; i < to.size(); ++i) {
    const Anchor& anchor = to[i];
    std::optional<double> best;
    if (anchor.arc == from.arc && anchor.offset_m >= from.offset_m) {
      best = anchor.offset_m - from.offset_m;  // direct along the shared arc
    }
    const auto it = st.dist.find(arcs_[anchor.arc].from_node());
    if (it != st.dist.end()) {
      const double via_graph = it->second + anchor.offset_m;
      if (via_graph <= cutoff_m && (!best || via_graph < *best)) best = via_graph;
    }
    result[i] = best;
  }
  return result;
}

std::optional<double> RoadNetwork::route_distance(const Anchor& from, const Anchor& to) const {
  const Anchor targets[] = {to};
  return route_distances(from, targets, std::numeric_limits<double>::infinity())[0];
}

std::optional<RoutePath> RoadNetwork::shortest_path(const Anchor& from, const Anchor& to) const {
  check_anchor(from);
  check_anchor(to);
  const Arc& from_arc = arcs_[from.arc];
  const Arc& to_arc = arcs_[to.arc];

  std::optional<RoutePath> direct;
  if (from.arc == to.arc && to.offset_m >= from.offset_m) {
    direct = RoutePath{to.offset_m - from.offset_m, {from.arc}};
  }

  SearchState st;
  std::unordered_set<NodeId> target{to_arc.from_node()};
  run_dijkstra(arcs_, out_arcs_, from_arc.to_node(), from_arc.length_m() - from.offset_m,
               std::numeric_limits<double>::infinity(), &target, st);

  std::optional<RoutePath> via_graph;
  const auto it = st.dist.find(to_arc.from_node());
  if (it != st.dist.end()) {
    RoutePath path;
    path.distance_m = it->second + to.offset_m;
    std::vector<ArcId> chain;
    NodeId cursor = to_arc.from_node();
    while (cursor != from_arc.to_node()) {
      const ArcId arc_id = st.via.at(cursor);
      chain.push_back(arc_id);
      cursor = arcs_[arc_id].from_node();
    }
    path.arcs.push_back(from.arc);
    for (auto rit = chain.rbegin(); rit != chain.rend(); ++rit) path.arcs.push_back(*rit);
    path.arcs.push_back(to.arc);
    via_graph = std::move(path);
  }

  if (direct && (!via_graph || direct->distance_m <= via_graph->distance_m)) return direct;
  return via_graph;
}

// ---------------------------------------------------------------------------
// serialization

std::string RoadNetwork::to_overpass_json() const {
  json elements = json::array();
  for (const auto& [id, node] : nodes_) {
    json e;
    e["type"] = "node";
    e["id"] = id;
    e["lat"] = node.point.lat;
    e["lon"] = node.point.lon;
    if (node.is_traffic_signal) {
      e["tags"] = json{{"highway", "traffic_signals"}};
    }
    elements.push_back(std::move(e));
  }
  for (const auto& [id, way] : ways_) {
    json e;
    e["type"] = "way";
    e["id"] = id;
    e["nodes"] = way.node_ids;
    json tags = json::object();
    tags["highway"] = way.tags.highway.value_or("unclassified");
    if (way.tags.maxspeed) tags["maxspeed"] = format_maxspeed(*way.tags.maxspeed);
    if (way.tags.name) tags["name"] = *way.tags.name;
    if (way.tags.ref) tags["ref"] = *way.tags.ref;
    if (way.tags.lanes) tags["lanes"] = std::to_string(*way.tags.lanes);
    if (way.tags.traffic_calming) tags["traffic_calming"] = *way.tags.traffic_calming;
    if (way.tags.cycleway_left) tags["cycleway:left"] = way.tags.cycleway_left->raw;
    if (way.tags.cycleway_right) tags["cycleway:right"] = way.tags.cycleway_right->raw;
    if (way.tags.cycleway_both) tags["cycleway:both"] = way.tags.cycleway_both->raw;
    if (way.oneway) tags["oneway"] = "yes";
    e["tags"] = std::move(tags);
    elements.push_back(std::move(e));
  }
  json doc;
  doc["version"] = 0.6;
  doc["generator"] = "cycletrail";
  doc["elements"] = std::move(elements);
  return doc.dump(2);
}

}  // namespace cycletrail::net
