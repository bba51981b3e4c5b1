#include "deixis/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deixis/rng.hpp"
#include "deixis/vocab.hpp"

namespace deixis {

namespace {

// World frame matches the identity camera: +x right, +y down, +z forward.
// Scenes are laid out inside the identity camera's frustum so viewpoint
// sampling around the origin nearly always succeeds.

constexpr double kLateralSlope = 0.45;  // |x| <= slope * z keeps objects in frame
constexpr double kDepthMin = 0.62;
constexpr double kDepthMax = 1.90;
constexpr double kHeightMin = 0.04;    // y is down, so this is below eye level
constexpr double kHeightMax = 0.34;
constexpr double kPlacementMargin = 0.015;

Aabb make_bounds(const Vec3& center, const Vec3& half) {
    return {center - half, center + half};
}

bool too_close(const Aabb& a, const Aabb& b) {
    const Aabb grown{{a.min.x - kPlacementMargin, a.min.y - kPlacementMargin,
                      a.min.z - kPlacementMargin},
                     {a.max.x + kPlacementMargin, a.max.y + kPlacementMargin,
                      a.max.z + kPlacementMargin}};
    return grown.overlaps(b);
}

std::vector<SceneObject> occluders_excluding(const Scene& scene, const std::string& id) {
    std::vector<SceneObject> out;
    out.reserve(scene.objects.size());
    for (const auto& o : scene.objects) {
        if (o.id != id) out.push_back(o);
    }
    return out;
}

Vec3 rotate_toward(const Vec3& unit_dir, const Vec3& axis, double angle_rad) {
    return Quat::from_axis_angle(axis, angle_rad).rotate(unit_dir);
}

/// Any unit vector perpendicular to d.
Vec3 perpendicular(const Vec3& d) {
    const Vec3 ref = std::fabs(d.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return d.cross(ref).normalized();
}

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

struct HandAnchor {
    Vec3 tip;      // fingertip position, camera space
    Vec3 rest_tip; // fingertip at rest, camera space
    Vec3 rest_dir; // pointing direction at rest
    double shape_scale = 1.0;
};

HandAnchor sample_anchor(Rng& rng) {
    HandAnchor a;
    a.tip = {rng.uniform(0.05, 0.15), rng.uniform(0.10, 0.18), rng.uniform(0.36, 0.48)};
    a.rest_tip = {rng.uniform(0.08, 0.16), rng.uniform(0.26, 0.34), rng.uniform(0.30, 0.40)};
    a.rest_dir = Vec3{rng.uniform(0.0, 0.1), 0.9, 0.35}.normalized();
    a.shape_scale = rng.uniform(0.92, 1.08);
    return a;
}

double edge_proximity(const CameraIntrinsics& in, const Vec3& cam_point) {
    if (cam_point.z <= 0.0) return 1.0;
    const double u = in.cx + in.fx * cam_point.x / cam_point.z;
    const double v = in.cy + in.fy * cam_point.y / cam_point.z;
    if (u < 0.0 || u >= in.width || v < 0.0 || v >= in.height) return 1.0;
    const double margin = std::min(std::min(u, in.width - u), std::min(v, in.height - v));
    return std::clamp(1.0 - margin / 80.0, 0.0, 1.0);
}

Vec3 pointing_dir_of(const HandPose& pose) {
    return (pose.keypoints[kIndexTip] - pose.keypoints[kIndexMcp]).normalized();
}

/// The target must win the frame outright: cosine-to-centroid plus the box
/// bonus, strictly above every other object. Pointing through clutter, or
/// at an object directly in front of another, is ambiguous and rejected.
/// `ray` is in world coordinates.
bool target_wins_frame(const Scene& scene, const Ray& ray, const std::string& target_id,
                       double margin = 1e-3) {
    double target_score = -std::numeric_limits<double>::infinity();
    double best_other = -std::numeric_limits<double>::infinity();
    for (const auto& obj : scene.objects) {
        const Vec3 to_obj = obj.centroid() - ray.origin;
        const double along = to_obj.dot(ray.direction);
        double score = -std::numeric_limits<double>::infinity();
        if (along > 0.0) {
            score = along / to_obj.norm();
            if (ray_aabb_intersect(ray, obj.bounds)) score += 1.0;
        }
        if (obj.id == target_id) {
            target_score = score;
        } else {
            best_other = std::max(best_other, score);
        }
    }
    return target_score >= 1.0 && target_score > best_other + margin;
}

} // namespace

std::array<Vec3, kNumHandKeypoints> build_pointing_hand(const Vec3& fingertip,
                                                        const Vec3& direction,
                                                        double shape_scale) {
    const double s = shape_scale;
    const Vec3 d = direction.normalized();
    const Vec3 side = perpendicular(d);
    const Vec3 up = d.cross(side); // palm normal-ish

    std::array<Vec3, kNumHandKeypoints> k{};
    k[kIndexTip] = fingertip;
    k[kIndexMcp] = fingertip - d * (0.072 * s);
    k[6] = k[kIndexMcp] + (k[kIndexTip] - k[kIndexMcp]) * 0.42;
    k[7] = k[kIndexMcp] + (k[kIndexTip] - k[kIndexMcp]) * 0.74;

    const Vec3 wrist = k[kIndexMcp] - d * (0.085 * s) + up * (0.015 * s);
    k[kWrist] = wrist;

    // thumb, slightly abducted toward the camera side
    k[1] = wrist + side * (0.025 * s) + d * (0.015 * s);
    k[2] = k[1] + side * (0.022 * s) + d * (0.018 * s);
    k[3] = k[2] + side * (0.015 * s) + d * (0.016 * s);
    k[4] = k[3] + side * (0.008 * s) + d * (0.014 * s);

    // curled middle/ring/pinky: MCP beside the index MCP, tips folded to the palm
    const double mcp_gap = 0.019 * s;
    int finger = 0;
    for (int base : {9, 13, 17}) {
        ++finger;
        const Vec3 mcp = k[kIndexMcp] - side * (mcp_gap * finger) - d * (0.006 * finger * s);
        k[base] = mcp;
        k[base + 1] = mcp + d * (0.020 * s) + up * (0.012 * s);
        k[base + 2] = mcp + d * (0.018 * s) + up * (0.028 * s);
        k[base + 3] = mcp + d * (0.004 * s) + up * (0.036 * s);
    }
    return k;
}

Scene sample_scene(std::uint64_t seed, const GenConfig& config) {
    if (config.min_objects < 3) {
        throw ConfigInvalid("min_objects must be >= 3, got " +
                            std::to_string(config.min_objects));
    }
    if (config.max_objects < config.min_objects) {
        throw ConfigInvalid("max_objects below min_objects");
    }

    Rng rng(seed ^ 0x5ce7e5c3a151ULL);
    Scene scene;
    scene.scene_id = "scene-" + std::to_string(seed);
    scene.rng_seed = seed;

    const int target_count =
        static_cast<int>(rng.uniform_int(config.min_objects, config.max_objects));

    const auto& cats = vocab::categories();
    const auto& cols = vocab::colors();
    std::vector<std::pair<std::string, std::string>> used_cat_color;

    int attempts = 0;
    while (static_cast<int>(scene.objects.size()) < target_count && attempts < 600) {
        ++attempts;
        SceneObject obj;

        // occasionally duplicate an existing category so Counting has work to do
        if (!scene.objects.empty() && rng.coin(0.45)) {
            obj.category = scene.objects[rng.index(scene.objects.size())].category;
        } else {
            obj.category = cats[rng.index(cats.size())];
        }

        std::string color;
        bool color_ok = false;
        for (int c = 0; c < 24 && !color_ok; ++c) {
            color = cols[rng.index(cols.size())];
            color_ok = std::find(used_cat_color.begin(), used_cat_color.end(),
                                 std::make_pair(obj.category, color)) == used_cat_color.end();
        }
        if (!color_ok) continue; // this category's colors are exhausted

        const double z = rng.uniform(kDepthMin, kDepthMax);
        const double x = rng.uniform(-kLateralSlope, kLateralSlope) * z;
        const double y = rng.uniform(kHeightMin, kHeightMax);
        const Vec3 half = vocab::category_half_extent(obj.category) * rng.uniform(0.85, 1.2);
        obj.bounds = make_bounds({x, y, z}, half);

        bool collides = false;
        for (const auto& other : scene.objects) {
            if (too_close(obj.bounds, other.bounds)) {
                collides = true;
                break;
            }
        }
        if (collides) continue;

        obj.id = "obj" + std::to_string(scene.objects.size());
        const auto states = vocab::category_state_pair(obj.category);
        obj.attributes["color"] = color;
        obj.attributes["material"] = vocab::materials()[rng.index(vocab::materials().size())];
        obj.attributes["shape"] = vocab::shapes()[rng.index(vocab::shapes().size())];
        obj.attributes["state"] = rng.coin() ? states.first : states.second;
        used_cat_color.emplace_back(obj.category, color);
        scene.objects.push_back(std::move(obj));
    }

    if (static_cast<int>(scene.objects.size()) < config.min_objects) {
        throw ConfigInvalid("could not place " + std::to_string(config.min_objects) +
                            " non-overlapping objects");
    }
    return scene;
}

CameraPose sample_viewpoint(const Scene& scene, std::uint64_t seed,
                            const GenConfig& config) {
    Rng rng(seed ^ 0x9b8c1f2e3d4aULL);
    for (int attempt = 0; attempt < config.viewpoint_attempts; ++attempt) {
        CameraPose pose;
        pose.position = {rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03),
                         rng.uniform(-0.03, 0.03)};
        const double yaw = deg_to_rad(rng.uniform(-6.0, 6.0));
        const double pitch = deg_to_rad(rng.uniform(-4.0, 6.0));
        pose.orientation = Quat::from_axis_angle({0, 1, 0}, yaw) *
                           Quat::from_axis_angle({1, 0, 0}, pitch);

        int visible = 0;
        for (const auto& obj : scene.objects) {
            const auto occ = occluders_excluding(scene, obj.id);
            if (visible_fraction(obj, pose, occ, config.visibility_grid) >
                config.visibility_min) {
                ++visible;
            }
            if (visible >= 3) break;
        }
        if (visible >= 3) return pose;
    }
    throw NoValidViewpoint("no viewpoint with 3 visible objects after " +
                           std::to_string(config.viewpoint_attempts) + " attempts");
}

std::vector<std::string> eligible_targets(const Scene& scene, const CameraPose& camera,
                                          const GenConfig& config) {
    std::vector<std::string> out;
    for (const auto& obj : scene.objects) {
        const Vec3 cam_c = camera.world_to_camera(obj.centroid());
        if (cam_c.z <= 0.0 || cam_c.z >= config.target_depth_max) continue;
        const auto occ = occluders_excluding(scene, obj.id);
        if (visible_fraction(obj, camera, occ, config.visibility_grid) >
            config.visibility_min) {
            out.push_back(obj.id);
        }
    }
    return out;
}

std::string select_target(const Scene& scene, const CameraPose& camera,
                          std::uint64_t seed, const GenConfig& config) {
    const auto eligible = eligible_targets(scene, camera, config);
    if (eligible.empty()) {
        throw NoEligibleTarget("no object is both visible and within " +
                               std::to_string(config.target_depth_max) + " m");
    }
    Rng rng(seed ^ 0x17ac3b5d42ULL);
    return eligible[rng.index(eligible.size())];
}

HandTrack synthesize_gesture(const Scene& scene,
                             const std::vector<CameraPose>& camera_track,
                             const GestureSpec& spec, std::uint64_t seed,
                             const GenConfig& config) {
    const SceneObject* target = scene.find(spec.target_id);
    if (target == nullptr) throw ConfigInvalid("unknown target " + spec.target_id);
    const int first = spec.hold_start - spec.approach_frames;
    if (first < 0 || spec.hold_end >= static_cast<int>(camera_track.size()) ||
        spec.hold_start > spec.hold_end) {
        throw ConfigInvalid("gesture window outside camera track");
    }

    Rng rng(seed ^ 0x6d2f8a91c4ULL);
    HandAnchor anchor = sample_anchor(rng);

    // reachability: the target must sit in front of the fingertip envelope
    {
        const Vec3 c = camera_track[spec.hold_start].world_to_camera(target->centroid());
        if (c.z <= anchor.tip.z + 0.08) {
            throw UnreachableTarget(spec.target_id + " at depth " + std::to_string(c.z) +
                                    " is behind the reachable envelope");
        }
        if (angle_between(c, {0, 0, 1}) > deg_to_rad(75.0)) {
            throw UnreachableTarget(spec.target_id + " outside the pointing cone");
        }
    }

    HandTrack track;
    track.fps = config.fps;
    Vec3 prev_dir{0, 0, 1};
    bool have_prev = false;

    for (int f = first; f <= spec.hold_end; ++f) {
        const CameraPose& cam = camera_track[f];
        const Vec3 target_cam = cam.world_to_camera(target->centroid());

        Vec3 tip;
        Vec3 dir;
        if (f < spec.hold_start) {
            const double s =
                smoothstep(static_cast<double>(f - first + 1) / (spec.approach_frames + 1));
            tip = anchor.rest_tip + (anchor.tip - anchor.rest_tip) * s;
            const Vec3 aim = (target_cam - tip).normalized();
            dir = (anchor.rest_dir * (1.0 - s) + aim * s).normalized();
        } else {
            // hold phase: re-aim at the centroid every frame, then apply tremor
            Vec3 tremor{0, 0, 0};
            if (config.jitter_deg > 0.0) {
                tremor = {rng.gaussian(0, 0.0008), rng.gaussian(0, 0.0008),
                          rng.gaussian(0, 0.0008)};
            }
            tip = anchor.tip + tremor;
            const Vec3 exact = (target_cam - tip).normalized();

            // checks run in world coordinates: the ray must hit the target
            // and designate it unambiguously
            auto world_ray = [&](const Vec3& d) {
                return Ray{cam.camera_to_world(tip), cam.orientation.rotate(d)};
            };
            if (!target_wins_frame(scene, world_ray(exact), spec.target_id)) {
                throw UnreachableTarget(spec.target_id +
                                        " is ambiguous along the pointing ray");
            }
            dir = exact;
            if (config.jitter_deg > 0.0) {
                const double ang = deg_to_rad(rng.uniform(0.0, config.jitter_deg));
                const Vec3 axis = rotate_toward(perpendicular(exact), exact,
                                                rng.uniform(0.0, 2.0 * M_PI));
                const Vec3 jittered = rotate_toward(exact, axis, ang);
                // tremor must never break the hold-phase contract
                if (target_wins_frame(scene, world_ray(jittered), spec.target_id)) {
                    dir = jittered;
                }
            }
        }

        HandPose pose;
        pose.frame_index = f;
        pose.keypoints = build_pointing_hand(tip, dir, anchor.shape_scale);

        const double ang_vel =
            have_prev ? angle_between(dir, prev_dir) * config.fps : 0.0;
        const double edge = edge_proximity(cam.intrinsics, tip);
        double conf = config.confidence_base - config.confidence_lambda * ang_vel -
                      config.confidence_mu * edge;
        if (config.confidence_noise > 0.0) conf += rng.gaussian(0, config.confidence_noise);
        pose.confidence = std::clamp(conf, 0.0, 1.0);

        prev_dir = dir;
        have_prev = true;
        track.poses.push_back(std::move(pose));
    }
    return track;
}

namespace {

struct Schedule {
    std::vector<GestureSpec> gestures; // targets unset
    int lead_frames = 0;
};

/// Fits `want` gestures into n_frames; returns fewer when holds would drop
/// below the configured floor.
Schedule plan_schedule(int n_frames, int want, Rng& rng, const GenConfig& config) {
    const double fps = config.fps;
    for (int count = want; count >= 1; --count) {
        const int lead = static_cast<int>(fps * rng.uniform(0.25, 0.40));
        const int tail = static_cast<int>(fps * 0.2);
        std::vector<int> approaches;
        approaches.push_back(static_cast<int>(fps * rng.uniform(0.30, 0.50)));
        for (int g = 1; g < count; ++g) {
            approaches.push_back(static_cast<int>(fps * rng.uniform(0.50, 0.85)));
        }
        int overhead = lead + tail;
        for (int a : approaches) overhead += a;

        const int avail = n_frames - overhead;
        const int hold = avail / count;
        if (hold < static_cast<int>(fps * config.hold_min_s)) continue;

        Schedule sched;
        sched.lead_frames = lead;
        const int hold_capped = std::min(hold, static_cast<int>(fps * config.hold_pref_s *
                                                                (count == 1 ? 2.2 : 1.0)));
        int cursor = lead;
        for (int g = 0; g < count; ++g) {
            GestureSpec spec;
            spec.approach_frames = approaches[g];
            spec.hold_start = cursor + approaches[g];
            spec.hold_end = spec.hold_start + hold_capped - 1;
            cursor = spec.hold_end + 1;
            sched.gestures.push_back(spec);
        }
        return sched;
    }
    Schedule sched; // count = 0 cannot happen: hold_min_s always fits one gesture
    return sched;
}

} // namespace

ClipRecord forge_clip(std::uint64_t seed, const GenConfig& config) {
    Rng rng(seed);
    ClipRecord clip;
    clip.clip_id = "clip-" + std::to_string(seed);
    clip.rng_seed = seed;
    clip.fps = config.fps;
    clip.scene = sample_scene(rng.next_u64(), config);

    const CameraPose base = sample_viewpoint(clip.scene, rng.next_u64(), config);

    const double len_s = rng.uniform(config.clip_len_min_s, config.clip_len_max_s);
    clip.n_frames = static_cast<int>(config.fps * len_s);

    // gentle egocentric sway around the base pose
    const double amp_x = rng.uniform(0.004, 0.015);
    const double amp_y = rng.uniform(0.003, 0.010);
    const double freq = rng.uniform(0.2, 0.45);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double yaw_amp = deg_to_rad(rng.uniform(0.3, 1.5));
    const double pitch_amp = deg_to_rad(rng.uniform(0.2, 1.0));
    for (int f = 0; f < clip.n_frames; ++f) {
        const double t = f / config.fps;
        CameraPose pose = base;
        pose.position += Vec3{amp_x * std::sin(2 * M_PI * freq * t + phase),
                              amp_y * std::sin(2 * M_PI * freq * 1.3 * t),
                              0.004 * std::sin(2 * M_PI * freq * 0.7 * t)};
        pose.orientation = base.orientation *
                           Quat::from_axis_angle({0, 1, 0},
                                                 yaw_amp * std::sin(2 * M_PI * freq * t)) *
                           Quat::from_axis_angle({1, 0, 0},
                                                 pitch_amp * std::cos(2 * M_PI * freq * t));
        clip.camera_track.push_back(pose);
    }

    // how many gestures, capped by schedule fit and distinct eligible targets
    int want = 1;
    if (config.max_gestures >= 2) {
        const double roll = rng.uniform();
        if (roll < 0.20 && config.max_gestures >= 3)
            want = 3;
        else if (roll < 0.70)
            want = 2;
    }
    auto eligible = eligible_targets(clip.scene, base, config);
    if (eligible.empty()) throw NoEligibleTarget(clip.clip_id + ": no eligible target");
    want = std::min(want, static_cast<int>(eligible.size()));

    Schedule sched = plan_schedule(clip.n_frames, want, rng, config);
    rng.shuffle(eligible);
    for (std::size_t g = 0; g < sched.gestures.size(); ++g) {
        sched.gestures[g].target_id = eligible[g];
    }

    clip.hand_track.fps = config.fps;
    std::vector<HandPose> rest_poses;

    // gesture segments; frames not covered get a low rest pose
    std::vector<HandTrack> segments;
    for (const auto& spec : sched.gestures) {
        segments.push_back(
            synthesize_gesture(clip.scene, clip.camera_track, spec, rng.next_u64(), config));
    }

    Rng rest_rng = rng.fork(0xe57);
    const HandAnchor rest_anchor = sample_anchor(rest_rng);
    std::size_t seg = 0;
    for (int f = 0; f < clip.n_frames; ++f) {
        while (seg < segments.size() && f > segments[seg].poses.back().frame_index) ++seg;
        if (seg < segments.size() && f >= segments[seg].poses.front().frame_index) {
            clip.hand_track.poses.push_back(
                segments[seg].poses[f - segments[seg].poses.front().frame_index]);
            continue;
        }
        HandPose pose;
        pose.frame_index = f;
        pose.keypoints =
            build_pointing_hand(rest_anchor.rest_tip, rest_anchor.rest_dir,
                                rest_anchor.shape_scale);
        const double edge =
            edge_proximity(clip.camera_track[f].intrinsics, rest_anchor.rest_tip);
        double conf = config.confidence_base - config.confidence_mu * edge;
        if (config.confidence_noise > 0.0)
            conf += rest_rng.gaussian(0, config.confidence_noise);
        pose.confidence = std::clamp(conf, 0.0, 1.0);
        clip.hand_track.poses.push_back(std::move(pose));
    }

    clip.gestures = std::move(sched.gestures);
    return clip;
}

FilterReport quality_filter(const ClipRecord& clip, const GenConfig& config) {
    FilterReport report;

    bool targets_ok = true;
    for (const auto& gesture : clip.gestures) {
        const SceneObject* target = clip.scene.find(gesture.target_id);
        if (target == nullptr) {
            targets_ok = false;
            break;
        }
        const auto occ = occluders_excluding(clip.scene, gesture.target_id);
        int visible = 0;
        for (int f = 0; f < clip.n_frames; ++f) {
            if (visible_fraction(*target, clip.camera_track[f], occ,
                                 config.visibility_grid) > 0.0) {
                ++visible;
            }
        }
        if (visible * 2 < clip.n_frames) { // "at least 50%" -> exactly half passes
            targets_ok = false;
            break;
        }
    }
    if (!targets_ok) report.reasons.push_back("target-visibility");

    int confident = 0;
    for (const auto& pose : clip.hand_track.poses) {
        if (pose.confidence >= config.tau_hand_visible) ++confident;
    }
    // "over 60%" is strict
    if (!(static_cast<double>(confident) > 0.6 * clip.n_frames)) {
        report.reasons.push_back("hand-visibility");
    }

    report.accept = report.reasons.empty();
    return report;
}

nlohmann::json clip_to_json(const ClipRecord& clip) {
    nlohmann::json cams = nlohmann::json::array();
    for (const auto& c : clip.camera_track) cams.push_back(camera_to_json(c));

    nlohmann::json hand = nlohmann::json::array();
    for (const auto& pose : clip.hand_track.poses) {
        nlohmann::json kps = nlohmann::json::array();
        for (const auto& kp : pose.keypoints) kps.push_back({kp.x, kp.y, kp.z});
        hand.push_back({{"frame", pose.frame_index},
                        {"confidence", pose.confidence},
                        {"keypoints", std::move(kps)}});
    }

    nlohmann::json gestures = nlohmann::json::array();
    for (const auto& g : clip.gestures) {
        gestures.push_back({{"target_id", g.target_id},
                            {"hold_start", g.hold_start},
                            {"hold_end", g.hold_end}});
    }

    return nlohmann::json{{"clip_id", clip.clip_id},
                          {"rng_seed", clip.rng_seed},
                          {"fps", clip.fps},
                          {"n_frames", clip.n_frames},
                          {"scene", scene_to_json(clip.scene)},
                          {"camera_track", std::move(cams)},
                          {"hand_track", std::move(hand)},
                          {"gestures", std::move(gestures)}};
}

ClipRecord clip_from_json(const nlohmann::json& j) {
    ClipRecord clip;
    clip.clip_id = j.at("clip_id").get<std::string>();
    clip.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    clip.fps = j.at("fps").get<double>();
    clip.n_frames = j.at("n_frames").get<int>();
    clip.scene = scene_from_json(j.at("scene"));
    for (const auto& jc : j.at("camera_track")) clip.camera_track.push_back(camera_from_json(jc));
    clip.hand_track.fps = clip.fps;
    for (const auto& jp : j.at("hand_track")) {
        HandPose pose;
        pose.frame_index = jp.at("frame").get<int>();
        pose.confidence = jp.at("confidence").get<double>();
        const auto& kps = jp.at("keypoints");
        for (int i = 0; i < kNumHandKeypoints; ++i) {
            pose.keypoints[i] = {kps[i][0], kps[i][1], kps[i][2]};
        }
        clip.hand_track.poses.push_back(std::move(pose));
    }
    for (const auto& jg : j.at("gestures")) {
        GestureSpec g;
        g.target_id = jg.at("target_id").get<std::string>();
        g.hold_start = jg.at("hold_start").get<int>();
        g.hold_end = jg.at("hold_end").get<int>();
        clip.gestures.push_back(std::move(g));
    }
    return clip;
}

} // namespace deixis
