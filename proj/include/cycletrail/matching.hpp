#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cycletrail/preprocess.hpp"
#include "cycletrail/road_network.hpp"

namespace cycletrail::mm {

struct MatcherConfig {
  double sigma_m = 4.07;           // GPS noise std-dev (Newson & Krumm estimate)
  double beta_m = 3.0;             // transition scale
  double candidate_radius_m = 50.0;
  int candidate_k = 8;
  double max_route_m = 2000.0;     // transition search horizon

  void validate() const;  // throws ConfigError
};

/// Log density of a zero-mean Gaussian in the snap distance.
double emission_log_prob(double distance_m, double sigma_m);

/// Log density of an exponential in |great-circle - route| discrepancy;
/// -infinity when the route is unreachable.
double transition_log_prob(double gc_m, std::optional<double> route_m, double beta_m);

struct MatchedPoint {
  std::int64_t point_seq = 0;  // position within the segment
  GeoPoint snapped;
  net::WayId way_id = 0;
  net::ArcId arc = net::kNoArc;
  double offset_m = 0.0;
  double emission_distance_m = 0.0;
  Timestamp time;
  GeoPoint observed;
};

struct MatchedLeg {
  std::int64_t from_seq = 0;
  std::int64_t to_seq = 0;
  std::vector<net::NodeId> node_sequence;  // bracketing nodes included
  double distance_m = 0.0;
  double duration_s = 0.0;
  int intersections = 0;  // traversed nodes of junction degree >= 3
};

struct MatchedTrip {
  std::string trip_id;
  int segment_index = 0;
  std::vector<MatchedPoint> points;
  std::vector<MatchedLeg> legs;  // legs.size() == points.size() - 1
  std::vector<std::int64_t> discarded;
  double joint_log_prob = 0.0;
};

/// Viterbi decode over per-point candidate lattices. Points without any
/// candidate, or severed from every surviving path, land in `discarded` and
/// the lattice re-bridges across them. Throws NoMatch when no point has a
/// candidate.
MatchedTrip match_segment(const net::RoadNetwork& net, const pre::TripSegment& seg,
                          const MatcherConfig& cfg);

/// Ordered node ids traversed between two anchors along a path, including
/// the node at-or-before the entry anchor and at-or-after the exit anchor.
std::vector<net::NodeId> node_sequence_between(const net::RoadNetwork& net,
                                               const net::Anchor& from, const net::Anchor& to,
                                               const net::RoutePath& path);

}  // namespace cycletrail::mm
