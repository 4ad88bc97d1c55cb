#include "cycletrail/enrich.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace cycletrail::enrich {

std::string_view direction_name(TravelDirection d) {
  switch (d) {
    case TravelDirection::Forward: return "forward";
    case TravelDirection::Backward: return "backward";
    case TravelDirection::Undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string_view handedness_name(Handedness h) {
  return h == Handedness::RightHandTraffic ? "right" : "left";
}

TravelDirection direction_of_travel(std::span<const net::NodeId> way_nodes,
                                    std::span<const net::NodeId> leg_nodes) {
  if (leg_nodes.empty()) return TravelDirection::Undetermined;

  std::vector<std::size_t> positions;
  positions.reserve(leg_nodes.size());
  for (const net::NodeId node : leg_nodes) {
    const auto it = std::find(way_nodes.begin(), way_nodes.end(), node);
    if (it == way_nodes.end()) {
      throw NodeNotOnWay("node " + std::to_string(node) + " is not on the way");
    }
    positions.push_back(static_cast<std::size_t>(it - way_nodes.begin()));
  }
  if (positions.size() < 2) return TravelDirection::Undetermined;

  bool increasing = true, decreasing = true;
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (positions[i] <= positions[i - 1]) increasing = false;
    if (positions[i] >= positions[i - 1]) decreasing = false;
  }
  if (increasing) return TravelDirection::Forward;
  if (decreasing) return TravelDirection::Backward;
  return TravelDirection::Undetermined;
}

net::CyclewayTag assign_cycleway(const net::WayTags& tags, TravelDirection dir, Handedness hand) {
  if (dir != TravelDirection::Undetermined) {
    const bool right_side = (dir == TravelDirection::Forward) ==
                            (hand == Handedness::RightHandTraffic);
    const auto& side = right_side ? tags.cycleway_right : tags.cycleway_left;
    if (side) return *side;
  }
  if (tags.cycleway_both) return *tags.cycleway_both;
  return net::CyclewayTag{net::CyclewayKind::None, ""};
}

int count_signals(const net::RoadNetwork& net, const mm::MatchedLeg& leg) {
  std::unordered_set<net::NodeId> seen;
  int count = 0;
  for (const net::NodeId node : leg.node_sequence) {
    if (!seen.insert(node).second) continue;
    const net::RoadNode* road_node = net.find_node(node);
    if (road_node && road_node->is_traffic_signal) ++count;
  }
  return count;
}

std::vector<EnrichedPoint> enrich_trip(const net::RoadNetwork& net, const mm::MatchedTrip& trip,
                                       const EnrichOptions& options) {
  std::vector<EnrichedPoint> out;
  out.reserve(trip.points.size());
  if (trip.points.empty()) return out;

  // per-leg signal counts with trip-level dedup: earliest leg wins
  std::vector<int> leg_signals(trip.legs.size(), 0);
  {
    std::unordered_set<net::NodeId> seen;
    for (std::size_t l = 0; l < trip.legs.size(); ++l) {
      for (const net::NodeId node : trip.legs[l].node_sequence) {
        if (!seen.insert(node).second) continue;
        const net::RoadNode* road_node = net.find_node(node);
        if (road_node && road_node->is_traffic_signal) ++leg_signals[l];
      }
    }
  }

  std::unordered_map<net::WayId, std::optional<net::WayTags>> backfill_cache;

  for (std::size_t k = 0; k < trip.points.size(); ++k) {
    EnrichedPoint ep;
    ep.point = trip.points[k];

    // the containing leg: outgoing for all but the last point
    const mm::MatchedLeg* leg = nullptr;
    if (k < trip.legs.size()) {
      leg = &trip.legs[k];
      ep.signals_count = leg_signals[k];
    } else if (!trip.legs.empty()) {
      leg = &trip.legs.back();
    }

    const net::RoadWay* way = net.find_way(ep.point.way_id);
    const std::vector<net::NodeId>* way_nodes = nullptr;
    if (way) {
      ep.tags = way->tags;
      ep.tags_resolved = true;
      way_nodes = &way->node_ids;
    } else if (options.backfill && ep.point.way_id != 0) {
      auto [it, inserted] = backfill_cache.try_emplace(ep.point.way_id);
      if (inserted) {
        it->second = options.backfill->fetch_way_tags(ep.point.way_id);
      }
      if (it->second) {
        ep.tags = *it->second;
        ep.tags_resolved = true;
      } else {
        ep.warning = "way " + std::to_string(ep.point.way_id) + " unknown to backfill";
      }
    } else {
      ep.warning = "way " + std::to_string(ep.point.way_id) + " absent from local extract";
    }

    ep.direction = TravelDirection::Undetermined;
    if (leg && way_nodes) {
      std::vector<net::NodeId> on_way;
      for (const net::NodeId node : leg->node_sequence) {
        if (std::find(way_nodes->begin(), way_nodes->end(), node) != way_nodes->end()) {
          on_way.push_back(node);
        }
      }
      try {
        ep.direction = direction_of_travel(*way_nodes, on_way);
      } catch (const NodeNotOnWay& e) {
        ep.warning = e.what();
      }
    }

    ep.effective_cycleway = assign_cycleway(ep.tags, ep.direction, options.handedness);
    out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace cycletrail::enrich
