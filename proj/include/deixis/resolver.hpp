#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "deixis/hand.hpp"
#include "deixis/scene.hpp"
#include "deixis/synth.hpp"

namespace deixis {

struct ResolverConfig {
    double conf_threshold = 0.5; // frames below are discarded
    double dwell_min_s = 1.0;    // shortest run that counts as a gesture
    double angle_max_deg = 15.0; // mean ray-to-referent angle cap
};

struct GestureEvent {
    int start_frame = 0;
    int end_frame = 0; // inclusive
    std::string referent_id;
    double mean_score = 0.0;
};

/// Ray from the index fingertip along the extended finger (keypoints 5 -> 8).
Ray pointing_ray(const HandPose& pose);

struct FrameScore {
    std::map<std::string, double> scores; // -inf means behind the fingertip
    std::string best_id;                  // empty when nothing scores
    double best_angle_deg = 0.0;
    double best_score = 0.0;
};

/// Per-object pointing score: cosine of the angle between the pointing ray
/// and the fingertip-to-centroid direction, plus 1 when the ray enters the
/// object's box. Objects behind the fingertip score -infinity.
FrameScore score_frame(const HandPose& pose, const Scene& scene);

std::vector<GestureEvent> segment_gestures(const HandTrack& track, const Scene& scene,
                                           const ResolverConfig& config = {});

/// segment_gestures over the clip's hand track with consecutive duplicate
/// referents merged when the gap is shorter than the dwell window.
std::vector<GestureEvent> resolve_referents(const ClipRecord& clip,
                                            const ResolverConfig& config = {});

nlohmann::json events_to_json(const std::string& clip_id,
                              const std::vector<GestureEvent>& events);

} // namespace deixis
