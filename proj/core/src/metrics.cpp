#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "szloca/simulation.hpp"

namespace szloca {

Metrics evaluate(std::span<const TruthFrame> truth, std::span<const TrackFrame> outputs,
                 const EvaluationOptions& options) {
  std::unordered_map<std::int64_t, const TrackFrame*> by_frame;
  for (const auto& f : outputs) by_frame[f.frame_index] = &f;

  Metrics m;
  std::vector<double> errors;
  std::map<int, TrackId> last_match;
  std::set<TrackId> all_tracks;
  std::set<TrackId> matched_tracks;
  std::map<long, std::pair<std::size_t, double>> buckets;  // index -> (count, sum)

  for (const auto& frame : truth) {
    const auto it = by_frame.find(frame.frame_index);
    const std::vector<Track3D> none;
    const auto& tracks = it == by_frame.end() ? none : it->second->tracks;
    for (const auto& t : tracks) all_tracks.insert(t.id);

    struct Candidate {
      double dist;
      int truth_id;
      TrackId track_id;
      std::size_t ai;
      std::size_t ti;
    };
    std::vector<Candidate> candidates;
    for (std::size_t ai = 0; ai < frame.agents.size(); ++ai) {
      const auto& agent = frame.agents[ai];
      for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
        const Vec3& p = options.use_smoothed ? tracks[ti].smoothed : tracks[ti].position;
        const double d = planar_distance(p, agent.footprint);
        if (d <= options.matching_radius_m) {
          candidates.push_back({d, agent.id, tracks[ti].id, ai, ti});
        }
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return std::tie(a.dist, a.truth_id, a.track_id) < std::tie(b.dist, b.truth_id, b.track_id);
    });

    std::vector<bool> agent_done(frame.agents.size(), false);
    std::vector<bool> track_done(tracks.size(), false);
    for (const auto& c : candidates) {
      if (agent_done[c.ai] || track_done[c.ti]) continue;
      agent_done[c.ai] = true;
      track_done[c.ti] = true;
      errors.push_back(c.dist);
      matched_tracks.insert(c.track_id);
      const auto prev = last_match.find(c.truth_id);
      if (prev != last_match.end() && prev->second != c.track_id) ++m.identity_switches;
      last_match[c.truth_id] = c.track_id;
      if (options.reference_point) {
        const double range = planar_distance(*options.reference_point, frame.agents[c.ai].footprint);
        auto& b = buckets[static_cast<long>(std::floor(range / options.bucket_width_m))];
        ++b.first;
        b.second += c.dist;
      }
    }
    for (std::size_t ai = 0; ai < frame.agents.size(); ++ai) {
      if (!frame.agents[ai].in_view) continue;
      ++m.truth_instances;
      if (!agent_done[ai]) ++m.missed;
    }
    m.unmatched_outputs += static_cast<std::size_t>(
        std::count(track_done.begin(), track_done.end(), false));
  }

  m.matched = errors.size();
  if (!errors.empty()) {
    double sum = 0.0;
    for (double e : errors) sum += e;
    m.mean_error_m = sum / static_cast<double>(errors.size());
    m.max_error_m = *std::max_element(errors.begin(), errors.end());
    std::sort(errors.begin(), errors.end());
    const std::size_t mid = errors.size() / 2;
    m.median_error_m =
        errors.size() % 2 == 1 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
  }
  m.miss_rate = m.truth_instances == 0
                    ? 0.0
                    : static_cast<double>(m.missed) / static_cast<double>(m.truth_instances);
  for (TrackId id : all_tracks) {
    if (!matched_tracks.contains(id)) ++m.false_tracks;
  }
  for (const auto& [index, b] : buckets) {
    m.distance_buckets.push_back({static_cast<double>(index) * options.bucket_width_m,
                                  static_cast<double>(index + 1) * options.bucket_width_m, b.first,
                                  b.second / static_cast<double>(b.first)});
  }
  return m;
}

}  // namespace szloca
