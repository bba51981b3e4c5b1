#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deixis/geometry.hpp"

namespace deixis {

struct SceneObject {
    std::string id;
    std::string category;
    std::map<std::string, std::string> attributes; // color, material, shape, state
    Aabb bounds;
    std::optional<std::string> referring_expression;

    Vec3 centroid() const { return bounds.centroid(); }
};

struct Scene {
    std::string scene_id;
    std::vector<SceneObject> objects;
    std::uint64_t rng_seed = 0;

    const SceneObject* find(const std::string& id) const {
        for (const auto& o : objects) {
            if (o.id == id) return &o;
        }
        return nullptr;
    }
};

/// Fraction of surface sample points of `object` that project inside the
/// image, in front of the camera, and are not blocked by any occluder box.
/// Samples are the surface shell of an NxNxN lattice over the object Aabb,
/// so the result is deterministic for a fixed grid density.
double visible_fraction(const SceneObject& object, const CameraPose& camera,
                        const std::vector<SceneObject>& occluders, int grid_n = 8);

/// Same surface-shell lattice used by visible_fraction, exposed so tests can
/// run denser oracles over identical geometry.
std::vector<Vec3> surface_samples(const Aabb& box, int grid_n);

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

nlohmann::json camera_to_json(const CameraPose& camera);
CameraPose camera_from_json(const nlohmann::json& j);

} // namespace deixis
