#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cycletrail/geo.hpp"

namespace cycletrail::net {

using NodeId = std::int64_t;
using WayId = std::int64_t;
using ArcId = std::uint32_t;
inline constexpr ArcId kNoArc = std::numeric_limits<ArcId>::max();

enum class SpeedUnit { Kmh, Mph };

struct MaxspeedTag {
  double value = 0.0;
  SpeedUnit unit = SpeedUnit::Kmh;
};

/// "20 mph" -> (20, mph); bare number -> km/h per OSM convention;
/// anything non-numeric -> nullopt.
std::optional<MaxspeedTag> parse_maxspeed_value(std::string_view raw);
std::string format_maxspeed(const MaxspeedTag& tag);

enum class CyclewayKind { SharedLane, ShareBusway, Track, Lane, Separate, None, Other };

struct CyclewayTag {
  CyclewayKind kind = CyclewayKind::None;
  std::string raw;  // original tag value, kept for passthrough
};

CyclewayTag parse_cycleway_value(std::string_view raw);
std::string_view cycleway_kind_name(CyclewayKind kind);

struct WayTags {
  std::optional<MaxspeedTag> maxspeed;
  std::optional<std::string> highway;
  std::optional<std::string> name;
  std::optional<std::string> ref;
  std::optional<int> lanes;
  std::optional<std::string> traffic_calming;
  std::optional<CyclewayTag> cycleway_left;
  std::optional<CyclewayTag> cycleway_right;
  std::optional<CyclewayTag> cycleway_both;
};

/// Builds WayTags from a raw OSM key/value map (modeled keys only).
WayTags way_tags_from_map(const std::map<std::string, std::string>& kv);

struct RoadNode {
  NodeId id = 0;
  GeoPoint point;
  bool is_traffic_signal = false;
};

struct RoadWay {
  WayId id = 0;
  std::vector<NodeId> node_ids;
  WayTags tags;
  double length_m = 0.0;
  bool oneway = false;
};

/// Signals tagged for non-motorized traffic do not interrupt cycling and are
/// not flagged. The exclusion set is configurable, not definitive.
struct SignalFilter {
  std::vector<std::string> exclude_keys{"crossing", "crossing_ref", "button_operated"};
  std::vector<std::string> exclude_signal_values{"crossing", "pedestrian_crossing"};
};

struct ParseReport {
  int dangling_node_ways = 0;  // ways skipped over a missing node reference
  std::vector<std::string> warnings;
};

/// Directed traversable piece of a way between junction/terminal nodes.
struct Arc {
  ArcId id = 0;
  WayId way_id = 0;
  std::vector<NodeId> node_ids;
  std::vector<GeoPoint> points;  // parallel to node_ids
  std::vector<double> cum_m;     // cum_m[i] = meters from arc start to node i
  ArcId twin = kNoArc;           // opposite direction, kNoArc when oneway
  bool canonical = true;         // exactly one of a twin pair is canonical

  double length_m() const { return cum_m.back(); }
  NodeId from_node() const { return node_ids.front(); }
  NodeId to_node() const { return node_ids.back(); }
};

/// Position on the network: a directed arc plus meters from its start.
struct Anchor {
  ArcId arc = kNoArc;
  double offset_m = 0.0;
};

struct Candidate {
  ArcId arc = kNoArc;
  double offset_m = 0.0;
  GeoPoint snapped;
  double distance_m = 0.0;  // great-circle query-point-to-projection distance
};

struct RoutePath {
  double distance_m = 0.0;
  std::vector<ArcId> arcs;  // from.arc first, to.arc last (single entry when equal)
};

enum class OsmFormat { Xml, OverpassJson };

class RoadNetwork {
 public:
  static RoadNetwork parse(std::string_view bytes, OsmFormat format,
                           const SignalFilter& filter = {}, ParseReport* report = nullptr);
  static RoadNetwork from_osm_xml(std::string_view bytes, const SignalFilter& filter = {},
                                  ParseReport* report = nullptr);
  static RoadNetwork from_overpass_json(std::string_view bytes, const SignalFilter& filter = {},
                                        ParseReport* report = nullptr);

  /// Overpass-JSON shaped dump; parsing it back reproduces the network.
  std::string to_overpass_json() const;

  const std::map<NodeId, RoadNode>& nodes() const { return nodes_; }
  const std::map<WayId, RoadWay>& ways() const { return ways_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Arc& arc(ArcId id) const { return arcs_[id]; }
  const RoadNode* find_node(NodeId id) const;
  const RoadWay* find_way(WayId id) const;

  /// All ways whose node list contains the node. Throws UnknownNode.
  std::vector<WayId> node_to_ways(NodeId id) const;

  /// Number of undirected arc endpoints incident to the node; >= 3 marks an
  /// intersection.
  int junction_degree(NodeId id) const;

  /// Up to k candidates whose projection distance is <= radius_m, ascending
  /// by (distance, way_id, arc). Both directions of a two-way arc appear as
  /// separate candidates.
  std::vector<Candidate> nearest_candidates(const GeoPoint& p, double radius_m, int k) const;

  /// Shortest directed network distance between anchors; nullopt when
  /// unreachable. Same-arc forward offsets resolve exactly.
  std::optional<double> route_distance(const Anchor& from, const Anchor& to) const;

  /// One-to-many variant with a search horizon; entries beyond cutoff_m come
  /// back as nullopt.
  std::vector<std::optional<double>> route_distances(const Anchor& from,
                                                     std::span<const Anchor> to,
                                                     double cutoff_m) const;

  /// Distance plus the traversed arc sequence. Nullopt when unreachable.
  std::optional<RoutePath> shortest_path(const Anchor& from, const Anchor& to) const;

  /// Adds or replaces the tag set of a way without touching geometry; used by
  /// the Overpass backfill.
  void set_way_tags(WayId id, WayTags tags);

 private:
  struct GridIndex {
    double cell_deg_lat = 0.0;
    double cell_deg_lon = 0.0;
    double min_lat = 0.0;
    double min_lon = 0.0;
    std::unordered_map<std::uint64_t, std::vector<ArcId>> cells;
  };

  RoadNetwork() = default;
  RoadNetwork(std::map<NodeId, RoadNode> nodes, std::map<WayId, RoadWay> ways);

  void build_arcs();
  void build_spatial_index();
  void index_arc(ArcId id);
  void check_anchor(const Anchor& a) const;
  std::uint64_t cell_key(std::int64_t ix, std::int64_t iy) const;

  std::map<NodeId, RoadNode> nodes_;
  std::map<WayId, RoadWay> ways_;
  std::vector<Arc> arcs_;
  std::unordered_map<NodeId, std::vector<ArcId>> out_arcs_;
  std::unordered_map<NodeId, std::vector<WayId>> node_ways_;
  std::unordered_map<NodeId, int> junction_degree_;
  GridIndex grid_;
};

}  // namespace cycletrail::net
