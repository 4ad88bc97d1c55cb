#include "cycletrail/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

namespace cycletrail::mm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

void MatcherConfig::validate() const {
  if (sigma_m <= 0.0) throw ConfigError("matcher sigma_m must be positive");
  if (beta_m <= 0.0) throw ConfigError("matcher beta_m must be positive");
  if (candidate_radius_m <= 0.0) throw ConfigError("matcher candidate_radius_m must be positive");
  if (candidate_k <= 0) throw ConfigError("matcher candidate_k must be positive");
  if (max_route_m <= 0.0) throw ConfigError("matcher max_route_m must be positive");
}

double emission_log_prob(double distance_m, double sigma_m) {
  const double z = distance_m / sigma_m;
  return -0.5 * z * z - std::log(sigma_m * std::sqrt(2.0 * std::numbers::pi));
}

double transition_log_prob(double gc_m, std::optional<double> route_m, double beta_m) {
  if (!route_m) return kNegInf;
  return -std::abs(gc_m - *route_m) / beta_m - std::log(beta_m);
}

std::vector<net::NodeId> node_sequence_between(const net::RoadNetwork& net,
                                               const net::Anchor& from, const net::Anchor& to,
                                               const net::RoutePath& path) {
  std::vector<net::NodeId> out;
  if (path.arcs.empty()) return out;

  const auto bracket_before = [](const net::Arc& arc, double offset) {
    std::size_t i = 0;
    while (i + 1 < arc.cum_m.size() && arc.cum_m[i + 1] <= offset) ++i;
    return i;
  };
  const auto bracket_after = [](const net::Arc& arc, double offset) {
    std::size_t i = arc.cum_m.size() - 1;
    while (i > 0 && arc.cum_m[i - 1] >= offset) --i;
    return i;
  };

  if (path.arcs.size() == 1) {
    const net::Arc& arc = net.arc(path.arcs.front());
    const std::size_t i0 = bracket_before(arc, from.offset_m);
    std::size_t i1 = bracket_after(arc, to.offset_m);
    if (i1 < i0) i1 = i0;
    for (std::size_t i = i0; i <= i1; ++i) out.push_back(arc.node_ids[i]);
    return out;
  }

  for (std::size_t a = 0; a < path.arcs.size(); ++a) {
    const net::Arc& arc = net.arc(path.arcs[a]);
    std::size_t begin = 0;
    std::size_t end = arc.node_ids.size() - 1;
    if (a == 0) begin = bracket_before(arc, from.offset_m);
    if (a + 1 == path.arcs.size()) end = bracket_after(arc, to.offset_m);
    for (std::size_t i = begin; i <= end; ++i) {
      if (!out.empty() && out.back() == arc.node_ids[i]) continue;
      out.push_back(arc.node_ids[i]);
    }
  }
  return out;
}

namespace {

int count_intersections(const net::RoadNetwork& net, const std::vector<net::NodeId>& sequence) {
  if (sequence.size() < 3) return 0;
  std::unordered_set<net::NodeId> seen;
  int count = 0;
  for (std::size_t i = 1; i + 1 < sequence.size(); ++i) {
    const net::NodeId node = sequence[i];
    if (net.junction_degree(node) >= 3 && seen.insert(node).second) ++count;
  }
  return count;
}

}  // namespace

MatchedTrip match_segment(const net::RoadNetwork& net, const pre::TripSegment& seg,
                          const MatcherConfig& cfg) {
  cfg.validate();
  if (seg.points.size() < 2) {
    throw Error("match_segment: segment must have at least 2 points");
  }

  const std::size_t n = seg.points.size();
  std::vector<std::vector<net::Candidate>> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    candidates[i] =
        net.nearest_candidates(seg.points[i].point, cfg.candidate_radius_m, cfg.candidate_k);
  }

  MatchedTrip trip;
  trip.trip_id = seg.trip_id;
  trip.segment_index = seg.segment_index;

  struct Stage {
    std::size_t point_index = 0;
    std::vector<double> score;
    std::vector<int> backpointer;  // index into the previous stage
  };
  std::vector<Stage> stages;

  for (std::size_t i = 0; i < n; ++i) {
    if (candidates[i].empty()) {
      trip.discarded.push_back(static_cast<std::int64_t>(i));
      continue;
    }
    const auto& cands = candidates[i];

    if (stages.empty()) {
      Stage stage;
      stage.point_index = i;
      stage.score.reserve(cands.size());
      for (const auto& cand : cands) {
        stage.score.push_back(emission_log_prob(cand.distance_m, cfg.sigma_m));
      }
      stage.backpointer.assign(cands.size(), -1);
      stages.push_back(std::move(stage));
      continue;
    }

    const Stage& prev = stages.back();
    const auto& prev_cands = candidates[prev.point_index];
    const double gc =
        haversine_distance(seg.points[prev.point_index].point, seg.points[i].point);

    std::vector<net::Anchor> anchors;
    anchors.reserve(cands.size());
    for (const auto& cand : cands) anchors.push_back({cand.arc, cand.offset_m});

    Stage stage;
    stage.point_index = i;
    stage.score.assign(cands.size(), kNegInf);
    stage.backpointer.assign(cands.size(), -1);

    for (std::size_t p = 0; p < prev_cands.size(); ++p) {
      if (prev.score[p] == kNegInf) continue;
      const net::Anchor from{prev_cands[p].arc, prev_cands[p].offset_m};
      const auto routes = net.route_distances(from, anchors, cfg.max_route_m);
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const double trans = transition_log_prob(gc, routes[c], cfg.beta_m);
        if (trans == kNegInf) continue;
        const double score = prev.score[p] + trans;
        if (score > stage.score[c]) {  // ties keep the earlier (smaller) ordinal
          stage.score[c] = score;
          stage.backpointer[c] = static_cast<int>(p);
        }
      }
    }

    bool reachable = false;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (stage.score[c] != kNegInf) {
        stage.score[c] += emission_log_prob(cands[c].distance_m, cfg.sigma_m);
        reachable = true;
      }
    }
    if (!reachable) {
      trip.discarded.push_back(static_cast<std::int64_t>(i));  // bridge across
      continue;
    }
    stages.push_back(std::move(stage));
  }

  if (stages.empty()) {
    throw NoMatch("match_segment: no point has any candidate within " +
                  std::to_string(cfg.candidate_radius_m) + " m");
  }

  // backtrack, smallest ordinal on ties
  std::vector<int> chosen(stages.size(), 0);
  {
    const Stage& last = stages.back();
    int best = 0;
    for (std::size_t c = 1; c < last.score.size(); ++c) {
      if (last.score[c] > last.score[best]) best = static_cast<int>(c);
    }
    chosen.back() = best;
    trip.joint_log_prob = last.score[static_cast<std::size_t>(best)];
    for (std::size_t k = stages.size(); k-- > 1;) {
      chosen[k - 1] = stages[k].backpointer[static_cast<std::size_t>(chosen[k])];
    }
  }

  trip.points.reserve(stages.size());
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const std::size_t i = stages[k].point_index;
    const net::Candidate& cand = candidates[i][static_cast<std::size_t>(chosen[k])];
    MatchedPoint point;
    point.point_seq = static_cast<std::int64_t>(i);
    point.snapped = cand.snapped;
    point.way_id = net.arc(cand.arc).way_id;
    point.arc = cand.arc;
    point.offset_m = cand.offset_m;
    point.emission_distance_m = cand.distance_m;
    point.time = seg.points[i].time;
    point.observed = seg.points[i].point;
    trip.points.push_back(point);
  }

  trip.legs.reserve(trip.points.size() - 1);
  for (std::size_t k = 0; k + 1 < trip.points.size(); ++k) {
    const MatchedPoint& a = trip.points[k];
    const MatchedPoint& b = trip.points[k + 1];
    const net::Anchor from{a.arc, a.offset_m};
    const net::Anchor to{b.arc, b.offset_m};
    const auto path = net.shortest_path(from, to);
    if (!path) {
      throw Error("match_segment: chosen transition lost its route");  // unreachable by design
    }
    MatchedLeg leg;
    leg.from_seq = a.point_seq;
    leg.to_seq = b.point_seq;
    leg.distance_m = path->distance_m;
    leg.duration_s = b.time.epoch_s - a.time.epoch_s;
    leg.node_sequence = node_sequence_between(net, from, to, *path);
    leg.intersections = count_intersections(net, leg.node_sequence);
    trip.legs.push_back(std::move(leg));
  }
  return trip;
}

}  // namespace cycletrail::mm
