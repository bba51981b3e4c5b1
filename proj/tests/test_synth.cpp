#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "deixis/resolver.hpp"
#include "deixis/synth.hpp"

using namespace deixis;

namespace {

Scene tiny_scene(double z) {
    Scene scene;
    scene.scene_id = "tiny";
    SceneObject o;
    o.id = "obj0";
    o.category = "mug";
    o.attributes = {{"color", "red"}, {"material", "ceramic"}, {"shape", "round"},
                    {"state", "full"}};
    o.bounds = {{-0.05, -0.05, z - 0.05}, {0.05, 0.05, z + 0.05}};
    scene.objects.push_back(o);
    return scene;
}

} // namespace

TEST_CASE("sample_scene is deterministic per seed") {
    const GenConfig cfg;
    const Scene a = sample_scene(7, cfg);
    const Scene b = sample_scene(7, cfg);
    CHECK(scene_to_json(a).dump() == scene_to_json(b).dump());
    const Scene c = sample_scene(8, cfg);
    CHECK(scene_to_json(a).dump() != scene_to_json(c).dump());
}

TEST_CASE("sample_scene rejects min_objects below three") {
    GenConfig cfg;
    cfg.min_objects = 2;
    CHECK_THROWS_AS(sample_scene(1, cfg), ConfigInvalid);
}

TEST_CASE("scene object ids are unique and attributes complete") {
    const Scene scene = sample_scene(123, {});
    std::set<std::string> ids;
    for (const auto& o : scene.objects) {
        CHECK(ids.insert(o.id).second);
        CHECK(o.attributes.count("color") == 1);
        CHECK(o.attributes.count("shape") == 1);
        CHECK(o.bounds.valid());
    }
    CHECK(scene.objects.size() >= 3);
}

TEST_CASE("mean object count tracks the configured midpoint") {
    GenConfig cfg;
    cfg.min_objects = 6;
    cfg.max_objects = 10;
    double total = 0;
    const int n = 1000;
    for (int seed = 0; seed < n; ++seed) {
        total += static_cast<double>(sample_scene(seed, cfg).objects.size());
    }
    const double mean = total / n;
    const double midpoint = 8.0;
    CHECK(std::fabs(mean - midpoint) < 0.1 * midpoint);
}

TEST_CASE("sample_viewpoint fails on a single-object scene") {
    const Scene scene = tiny_scene(1.0);
    GenConfig cfg;
    cfg.viewpoint_attempts = 8;
    CHECK_THROWS_AS(sample_viewpoint(scene, 3, cfg), NoValidViewpoint);
}

TEST_CASE("sample_viewpoint postcondition holds and succeeds on generated scenes") {
    GenConfig cfg;
    cfg.min_objects = 10;
    cfg.max_objects = 10;
    int successes = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const Scene scene = sample_scene(seed, cfg);
        try {
            const CameraPose pose = sample_viewpoint(scene, seed, cfg);
            int visible = 0;
            for (const auto& obj : scene.objects) {
                std::vector<SceneObject> occ;
                for (const auto& o : scene.objects) {
                    if (o.id != obj.id) occ.push_back(o);
                }
                if (visible_fraction(obj, pose, occ) > 0.1) ++visible;
            }
            CHECK(visible >= 3);
            ++successes;
        } catch (const NoValidViewpoint&) {
        }
    }
    CHECK(successes > 95);
}

TEST_CASE("select_target rejects all-far scenes") {
    Scene scene = tiny_scene(3.0);
    SceneObject o2 = scene.objects[0];
    o2.id = "obj1";
    o2.bounds = {{0.2, 0.0, 2.95}, {0.3, 0.1, 3.05}};
    scene.objects.push_back(o2);
    CHECK_THROWS_AS(select_target(scene, CameraPose{}, 1, {}), NoEligibleTarget);
}

TEST_CASE("select_target returns the only eligible object") {
    const Scene scene = tiny_scene(1.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CHECK(select_target(scene, CameraPose{}, seed, {}) == "obj0");
    }
}

TEST_CASE("select_target is uniform over the eligible set") {
    const Scene scene = sample_scene(31, {});
    const CameraPose camera = sample_viewpoint(scene, 31, {});
    const auto eligible = eligible_targets(scene, camera, {});
    REQUIRE(eligible.size() >= 3);

    std::map<std::string, int> counts;
    const int n = 10000;
    for (int seed = 0; seed < n; ++seed) {
        ++counts[select_target(scene, camera, seed, {})];
    }
    const double expected = static_cast<double>(n) / eligible.size();
    const double sigma = std::sqrt(expected * (1.0 - 1.0 / eligible.size()));
    for (const auto& id : eligible) {
        CHECK(std::fabs(counts[id] - expected) < 5.0 * sigma);
    }
}

TEST_CASE("synthesized hold frames always intersect the target box") {
    GenConfig cfg;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const ClipRecord clip = forge_clip(seed, cfg);
        for (const auto& gesture : clip.gestures) {
            const SceneObject* target = clip.scene.find(gesture.target_id);
            REQUIRE(target != nullptr);
            for (int f = gesture.hold_start; f <= gesture.hold_end; ++f) {
                const HandPose* pose = clip.hand_track.at_frame(f);
                REQUIRE(pose != nullptr);
                const Ray ray = pointing_ray(*pose);
                // target box in the same (camera) frame as the keypoints
                const CameraPose& cam = clip.camera_track[f];
                const Vec3 a = cam.world_to_camera(target->bounds.min);
                const Vec3 b = cam.world_to_camera(target->bounds.max);
                const Aabb box{{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)},
                               {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}};
                CHECK(ray_aabb_intersect(ray, box).has_value());
            }
        }
    }
}

TEST_CASE("synthesize_gesture rejects targets behind the camera") {
    const Scene scene = tiny_scene(-1.0);
    std::vector<CameraPose> track(60);
    GestureSpec spec;
    spec.target_id = "obj0";
    spec.hold_start = 10;
    spec.hold_end = 50;
    spec.approach_frames = 5;
    CHECK_THROWS_AS(synthesize_gesture(scene, track, spec, 1, {}), UnreachableTarget);
}

TEST_CASE("hold-phase jitter stays within the documented envelope") {
    GenConfig cfg;
    const ClipRecord clip = forge_clip(55, cfg);
    for (const auto& gesture : clip.gestures) {
        const SceneObject* target = clip.scene.find(gesture.target_id);
        for (int f = gesture.hold_start; f <= gesture.hold_end; ++f) {
            const HandPose* pose = clip.hand_track.at_frame(f);
            const Ray ray = pointing_ray(*pose);
            const Vec3 centroid_cam =
                clip.camera_track[f].world_to_camera(target->centroid());
            const Vec3 exact = (centroid_cam - ray.origin).normalized();
            const double deviation = rad_to_deg(angle_between(ray.direction, exact));
            // half the angular radius of the target from the fingertip
            const double radius =
                0.5 * (target->bounds.max - target->bounds.min).norm();
            const double dist = (centroid_cam - ray.origin).norm();
            const double half_angular_radius = rad_to_deg(std::asin(
                std::min(1.0, radius / dist))) / 2.0;
            CHECK(deviation <= cfg.jitter_deg + half_angular_radius + 1e-6);
        }
    }
}

TEST_CASE("forge_clip is a pure function of seed and config") {
    const GenConfig cfg;
    const auto a = clip_to_json(forge_clip(77, cfg)).dump();
    const auto b = clip_to_json(forge_clip(77, cfg)).dump();
    CHECK(a == b);
}

TEST_CASE("gestures are time-ordered and non-overlapping") {
    for (std::uint64_t seed = 200; seed < 240; ++seed) {
        const ClipRecord clip = forge_clip(seed, {});
        for (std::size_t g = 1; g < clip.gestures.size(); ++g) {
            CHECK(clip.gestures[g - 1].hold_end < clip.gestures[g].hold_start);
        }
        for (const auto& gesture : clip.gestures) {
            CHECK(gesture.hold_start < gesture.hold_end);
            CHECK(clip.scene.find(gesture.target_id) != nullptr);
        }
        CHECK(static_cast<int>(clip.camera_track.size()) == clip.n_frames);
        CHECK(static_cast<int>(clip.hand_track.poses.size()) == clip.n_frames);
    }
}

TEST_CASE("quality_filter boundary semantics") {
    // 10 frames; target visible in exactly 5 (>= 50% passes), hand confident
    // in exactly 6 (60.0% is not "over 60%", so it fails)
    ClipRecord clip;
    clip.clip_id = "boundary";
    clip.fps = 10;
    clip.n_frames = 10;
    clip.scene = tiny_scene(1.0);

    CameraPose facing;
    CameraPose away = facing;
    away.orientation = Quat::from_axis_angle({0, 1, 0}, M_PI); // target behind
    for (int f = 0; f < 10; ++f) clip.camera_track.push_back(f < 5 ? facing : away);

    GestureSpec g;
    g.target_id = "obj0";
    g.hold_start = 0;
    g.hold_end = 4;
    clip.gestures.push_back(g);

    clip.hand_track.fps = 10;
    for (int f = 0; f < 10; ++f) {
        HandPose pose;
        pose.frame_index = f;
        pose.keypoints = build_pointing_hand({0.1, 0.1, 0.4}, {0, 0, 1});
        pose.confidence = f < 6 ? 0.9 : 0.1;
        clip.hand_track.poses.push_back(pose);
    }

    const FilterReport report = quality_filter(clip, {});
    CHECK(!report.accept);
    REQUIRE(report.reasons.size() == 1);
    CHECK(report.reasons[0] == "hand-visibility");

    // one more confident frame tips "over 60%"
    clip.hand_track.poses[6].confidence = 0.9;
    const FilterReport report2 = quality_filter(clip, {});
    CHECK(report2.accept);
}

TEST_CASE("quality_filter rejects low target visibility with a named reason") {
    ClipRecord clip;
    clip.clip_id = "lowvis";
    clip.fps = 10;
    clip.n_frames = 10;
    clip.scene = tiny_scene(1.0);
    CameraPose facing;
    CameraPose away;
    away.orientation = Quat::from_axis_angle({0, 1, 0}, M_PI);
    for (int f = 0; f < 10; ++f) clip.camera_track.push_back(f < 4 ? facing : away);
    GestureSpec g;
    g.target_id = "obj0";
    g.hold_start = 0;
    g.hold_end = 3;
    clip.gestures.push_back(g);
    clip.hand_track.fps = 10;
    for (int f = 0; f < 10; ++f) {
        HandPose pose;
        pose.frame_index = f;
        pose.keypoints = build_pointing_hand({0.1, 0.1, 0.4}, {0, 0, 1});
        pose.confidence = 0.9;
        clip.hand_track.poses.push_back(pose);
    }
    const FilterReport report = quality_filter(clip, {});
    CHECK(!report.accept);
    REQUIRE(report.reasons.size() == 1);
    CHECK(report.reasons[0] == "target-visibility");
}

TEST_CASE("quality_filter is monotone in the hand threshold") {
    GenConfig strict;
    GenConfig loose;
    loose.tau_hand_visible = 0.3;
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        const ClipRecord clip = forge_clip(seed, strict);
        if (quality_filter(clip, strict).accept) {
            CHECK(quality_filter(clip, loose).accept);
        }
    }
}

TEST_CASE("clip JSON round trip is exact") {
    const ClipRecord clip = forge_clip(404, {});
    const auto j = clip_to_json(clip);
    const ClipRecord back = clip_from_json(j);
    CHECK(clip_to_json(back).dump() == j.dump());
}
