#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "deixis/hand.hpp"
#include "deixis/scene.hpp"

namespace deixis {

struct GenConfig {
    int min_objects = 6;
    int max_objects = 10;
    double fps = 30.0;
    double clip_len_min_s = 3.0;
    double clip_len_max_s = 5.0;
    int max_gestures = 3;

    // synthetic confidence model: c = base - lambda*angular_velocity - mu*edge + noise
    double confidence_base = 0.95;
    double confidence_lambda = 0.08; // per rad/s of pointing-direction change
    double confidence_mu = 0.30;     // weight of fingertip edge proximity
    double confidence_noise = 0.05;  // gaussian sigma; 0 disables

    double jitter_deg = 0.5; // angular tremor bound during holds; 0 disables

    double target_depth_max = 2.0;    // eligibility: centroid depth below this
    double visibility_min = 0.1;      // eligibility: visible fraction above this
    double tau_hand_visible = 0.5;    // quality filter hand-confidence threshold
    int visibility_grid = 8;
    int viewpoint_attempts = 64;

    double hold_min_s = 1.0; // floor when fitting multiple gestures into short clips
    double hold_pref_s = 2.0;
};

struct GestureSpec {
    std::string target_id;
    int hold_start = 0; // inclusive
    int hold_end = 0;   // inclusive
    int approach_frames = 0;
};

struct ClipRecord {
    std::string clip_id;
    Scene scene;
    std::vector<CameraPose> camera_track; // one per frame
    HandTrack hand_track;
    std::vector<GestureSpec> gestures; // time-ordered, non-overlapping
    double fps = 30.0;
    int n_frames = 0;
    std::uint64_t rng_seed = 0;
};

struct FilterReport {
    bool accept = false;
    std::vector<std::string> reasons; // failed criteria, empty when accepted
};

/// Desk-scale scene with objects drawn from a built-in vocabulary, placed
/// inside the frustum of the identity camera. Deterministic per seed.
Scene sample_scene(std::uint64_t seed, const GenConfig& config);

/// Camera pose from which at least three objects pass the visibility filter.
CameraPose sample_viewpoint(const Scene& scene, std::uint64_t seed,
                            const GenConfig& config = {});

/// Objects passing both eligibility criteria (visibility and depth).
std::vector<std::string> eligible_targets(const Scene& scene, const CameraPose& camera,
                                          const GenConfig& config = {});

/// Uniform pick among eligible targets.
std::string select_target(const Scene& scene, const CameraPose& camera,
                          std::uint64_t seed, const GenConfig& config = {});

/// Hand poses for frames [hold_start - approach_frames, hold_end]. Every
/// hold-phase frame's fingertip ray intersects the target box.
HandTrack synthesize_gesture(const Scene& scene,
                             const std::vector<CameraPose>& camera_track,
                             const GestureSpec& spec, std::uint64_t seed,
                             const GenConfig& config = {});

FilterReport quality_filter(const ClipRecord& clip, const GenConfig& config = {});

/// Full clip: scene, camera track, scheduled gestures, stitched hand track.
/// Pure function of (seed, config). Run quality_filter afterwards to decide
/// acceptance.
ClipRecord forge_clip(std::uint64_t seed, const GenConfig& config = {});

/// Builds the full 21-keypoint pointing hand from fingertip and direction.
std::array<Vec3, kNumHandKeypoints> build_pointing_hand(const Vec3& fingertip,
                                                        const Vec3& direction,
                                                        double shape_scale = 1.0);

nlohmann::json clip_to_json(const ClipRecord& clip);
ClipRecord clip_from_json(const nlohmann::json& j);

} // namespace deixis
