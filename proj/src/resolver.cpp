#include "deixis/resolver.hpp"

#include <cmath>
#include <limits>

namespace deixis {

Ray pointing_ray(const HandPose& pose) {
    const Vec3 seg = pose.keypoints[kIndexTip] - pose.keypoints[kIndexMcp];
    const double len = seg.norm();
    if (len < 1e-6) {
        throw DegeneratePose("index fingertip and MCP coincide (|seg| = " +
                             std::to_string(len) + ")");
    }
    return {pose.keypoints[kIndexTip], seg / len};
}

FrameScore score_frame(const HandPose& pose, const Scene& scene) {
    const Ray ray = pointing_ray(pose);
    FrameScore out;
    out.best_score = -std::numeric_limits<double>::infinity();

    double best_tiebreak = std::numeric_limits<double>::infinity();
    for (const auto& obj : scene.objects) {
        const Vec3 to_obj = obj.centroid() - ray.origin;
        const double along = to_obj.dot(ray.direction);
        double score;
        double cosine = -1.0;
        double tiebreak = std::numeric_limits<double>::infinity();
        if (along < 0.0) {
            score = -std::numeric_limits<double>::infinity();
        } else {
            cosine = std::min(1.0, along / to_obj.norm());
            score = cosine;
            tiebreak = along;
            if (const auto t = ray_aabb_intersect(ray, obj.bounds)) {
                score += 1.0;
                tiebreak = *t; // nearest entry wins ties among intersected boxes
            }
        }
        out.scores[obj.id] = score;

        const bool better =
            score > out.best_score ||
            (score == out.best_score &&
             (tiebreak < best_tiebreak ||
              (tiebreak == best_tiebreak && (out.best_id.empty() || obj.id < out.best_id))));
        if (better) {
            out.best_score = score;
            out.best_id = obj.id;
            best_tiebreak = tiebreak;
            out.best_angle_deg =
                std::isfinite(score) ? rad_to_deg(std::acos(cosine)) : 180.0;
        }
    }
    if (!std::isfinite(out.best_score)) out.best_id.clear();
    return out;
}

std::vector<GestureEvent> segment_gestures(const HandTrack& track, const Scene& scene,
                                           const ResolverConfig& config) {
    struct Labeled {
        int frame;
        std::string id;
        double angle_deg;
        double score;
    };
    std::vector<Labeled> labeled;
    for (const auto& pose : track.poses) {
        if (pose.confidence < config.conf_threshold) continue;
        const FrameScore fs = score_frame(pose, scene);
        if (fs.best_id.empty()) continue;
        labeled.push_back({pose.frame_index, fs.best_id, fs.best_angle_deg, fs.best_score});
    }

    std::vector<GestureEvent> events;
    const double dwell_frames = config.dwell_min_s * track.fps;

    // runs of one label; short dropouts (discarded frames) do not break a
    // run, but a silence of at least one dwell window does
    std::size_t i = 0;
    while (i < labeled.size()) {
        std::size_t j = i;
        double angle_sum = 0.0;
        double score_sum = 0.0;
        while (j < labeled.size() && labeled[j].id == labeled[i].id &&
               (j == i || labeled[j].frame - labeled[j - 1].frame < dwell_frames)) {
            angle_sum += labeled[j].angle_deg;
            score_sum += labeled[j].score;
            ++j;
        }
        const int start = labeled[i].frame;
        const int end = labeled[j - 1].frame;
        const double n = static_cast<double>(j - i);
        if (end - start + 1 >= dwell_frames && angle_sum / n <= config.angle_max_deg) {
            events.push_back({start, end, labeled[i].id, score_sum / n});
        }
        i = j;
    }
    return events;
}

std::vector<GestureEvent> resolve_referents(const ClipRecord& clip,
                                            const ResolverConfig& config) {
    auto events = segment_gestures(clip.hand_track, clip.scene, config);

    std::vector<GestureEvent> merged;
    for (const auto& ev : events) {
        if (!merged.empty() && merged.back().referent_id == ev.referent_id &&
            (ev.start_frame - merged.back().end_frame) < config.dwell_min_s * clip.fps) {
            merged.back().end_frame = ev.end_frame;
            merged.back().mean_score = 0.5 * (merged.back().mean_score + ev.mean_score);
        } else {
            merged.push_back(ev);
        }
    }
    return merged;
}

nlohmann::json events_to_json(const std::string& clip_id,
                              const std::vector<GestureEvent>& events) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ev : events) {
        arr.push_back({{"referent_id", ev.referent_id},
                       {"start_frame", ev.start_frame},
                       {"end_frame", ev.end_frame},
                       {"mean_score", ev.mean_score}});
    }
    return nlohmann::json{{"clip_id", clip_id}, {"events", std::move(arr)}};
}

} // namespace deixis
