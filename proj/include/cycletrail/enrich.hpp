#pragma once

#include <span>
#include <string>
#include <vector>

#include "cycletrail/matching.hpp"
#include "cycletrail/overpass_client.hpp"
#include "cycletrail/road_network.hpp"

namespace cycletrail::enrich {

enum class TravelDirection { Forward, Backward, Undetermined };

enum class Handedness { RightHandTraffic, LeftHandTraffic };

std::string_view direction_name(TravelDirection d);
std::string_view handedness_name(Handedness h);

/// Forward when the leg nodes appear at strictly increasing way positions,
/// Backward when strictly decreasing, Undetermined for a single node or a
/// non-monotone subset. Throws NodeNotOnWay when a leg node is missing from
/// the way.
TravelDirection direction_of_travel(std::span<const net::NodeId> way_nodes,
                                    std::span<const net::NodeId> leg_nodes);

/// Side selection: right for (Forward, right-hand traffic) and
/// (Backward, left-hand traffic), left otherwise; Undetermined skips the
/// sides. The chosen side's tag wins, then cycleway:both, then none.
net::CyclewayTag assign_cycleway(const net::WayTags& tags, TravelDirection dir, Handedness hand);

/// Distinct flagged signal nodes on the leg's node sequence.
int count_signals(const net::RoadNetwork& net, const mm::MatchedLeg& leg);

struct EnrichedPoint {
  mm::MatchedPoint point;
  net::WayTags tags;
  bool tags_resolved = false;
  TravelDirection direction = TravelDirection::Undetermined;
  net::CyclewayTag effective_cycleway;
  int signals_count = 0;
  std::string warning;
};

struct EnrichOptions {
  Handedness handedness = Handedness::LeftHandTraffic;
  net::OverpassClient* backfill = nullptr;  // optional; offline works without it
};

/// Joins each retained point with its way's tags, the containing leg's
/// travel direction, the effective cycleway, and leg signal counts (a signal
/// node shared by legs is attributed to the earliest leg only). Geometry
/// passes through untouched.
std::vector<EnrichedPoint> enrich_trip(const net::RoadNetwork& net, const mm::MatchedTrip& trip,
                                       const EnrichOptions& options);

}  // namespace cycletrail::enrich
