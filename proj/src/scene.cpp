#include "deixis/scene.hpp"

namespace deixis {

std::vector<Vec3> surface_samples(const Aabb& box, int grid_n) {
    std::vector<Vec3> pts;
    const int n = grid_n < 2 ? 2 : grid_n;
    pts.reserve(static_cast<std::size_t>(n) * n * 6);
    const Vec3 e = box.extent();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const bool on_shell = i == 0 || i == n - 1 || j == 0 || j == n - 1 ||
                                      k == 0 || k == n - 1;
                if (!on_shell) continue;
                pts.push_back({box.min.x + e.x * i / (n - 1),
                               box.min.y + e.y * j / (n - 1),
                               box.min.z + e.z * k / (n - 1)});
            }
        }
    }
    return pts;
}

double visible_fraction(const SceneObject& object, const CameraPose& camera,
                        const std::vector<SceneObject>& occluders, int grid_n) {
    const std::vector<Vec3> samples = surface_samples(object.bounds, grid_n);
    if (samples.empty()) return 0.0;

    std::size_t visible = 0;
    for (const Vec3& p : samples) {
        const Vec3 cam_p = camera.world_to_camera(p);
        if (cam_p.z <= 0.0) continue;
        const double u = camera.intrinsics.cx + camera.intrinsics.fx * cam_p.x / cam_p.z;
        const double v = camera.intrinsics.cy + camera.intrinsics.fy * cam_p.y / cam_p.z;
        if (u < 0.0 || u >= camera.intrinsics.width || v < 0.0 || v >= camera.intrinsics.height)
            continue;

        const Vec3 to_p = p - camera.position;
        const double dist = to_p.norm();
        if (dist == 0.0) continue;
        const Ray ray{camera.position, to_p / dist};

        bool blocked = false;
        for (const auto& occ : occluders) {
            const auto t = ray_aabb_intersect(ray, occ.bounds);
            // blocked only when the occluder is entered strictly before the sample
            if (t && *t < dist * (1.0 - 1e-9) && *t > 0.0) {
                blocked = true;
                break;
            }
        }
        if (!blocked) ++visible;
    }
    return static_cast<double>(visible) / static_cast<double>(samples.size());
}

nlohmann::json scene_to_json(const Scene& scene) {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : scene.objects) {
        nlohmann::json jo{
            {"id", o.id},
            {"category", o.category},
            {"attributes", o.attributes},
            {"bounds",
             {{"min", {o.bounds.min.x, o.bounds.min.y, o.bounds.min.z}},
              {"max", {o.bounds.max.x, o.bounds.max.y, o.bounds.max.z}}}},
        };
        if (o.referring_expression) jo["referring_expression"] = *o.referring_expression;
        objs.push_back(std::move(jo));
    }
    return nlohmann::json{{"scene_id", scene.scene_id},
                          {"rng_seed", scene.rng_seed},
                          {"objects", std::move(objs)}};
}

Scene scene_from_json(const nlohmann::json& j) {
    Scene scene;
    scene.scene_id = j.at("scene_id").get<std::string>();
    scene.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    for (const auto& jo : j.at("objects")) {
        SceneObject o;
        o.id = jo.at("id").get<std::string>();
        o.category = jo.at("category").get<std::string>();
        o.attributes = jo.at("attributes").get<std::map<std::string, std::string>>();
        const auto& b = jo.at("bounds");
        o.bounds.min = {b.at("min")[0], b.at("min")[1], b.at("min")[2]};
        o.bounds.max = {b.at("max")[0], b.at("max")[1], b.at("max")[2]};
        if (jo.contains("referring_expression"))
            o.referring_expression = jo.at("referring_expression").get<std::string>();
        scene.objects.push_back(std::move(o));
    }
    return scene;
}

nlohmann::json camera_to_json(const CameraPose& c) {
    return nlohmann::json{
        {"position", {c.position.x, c.position.y, c.position.z}},
        {"orientation", {c.orientation.w, c.orientation.x, c.orientation.y, c.orientation.z}},
        {"intrinsics",
         {{"fx", c.intrinsics.fx},
          {"fy", c.intrinsics.fy},
          {"cx", c.intrinsics.cx},
          {"cy", c.intrinsics.cy},
          {"width", c.intrinsics.width},
          {"height", c.intrinsics.height}}},
    };
}

CameraPose camera_from_json(const nlohmann::json& j) {
    CameraPose c;
    c.position = {j.at("position")[0], j.at("position")[1], j.at("position")[2]};
    const auto& q = j.at("orientation");
    c.orientation = {q[0], q[1], q[2], q[3]};
    const auto& in = j.at("intrinsics");
    c.intrinsics.fx = in.at("fx");
    c.intrinsics.fy = in.at("fy");
    c.intrinsics.cx = in.at("cx");
    c.intrinsics.cy = in.at("cy");
    c.intrinsics.width = in.at("width");
    c.intrinsics.height = in.at("height");
    return c;
}

} // namespace deixis
