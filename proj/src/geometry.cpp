#include "deixis/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace deixis {

std::optional<double> ray_aabb_intersect(const Ray& ray, const Aabb& box) {
    double t_enter = 0.0;
    double t_exit = std::numeric_limits<double>::infinity();

    const double o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
    const double d[3] = {ray.direction.x, ray.direction.y, ray.direction.z};
    const double lo[3] = {box.min.x, box.min.y, box.min.z};
    const double hi[3] = {box.max.x, box.max.y, box.max.z};

    for (int axis = 0; axis < 3; ++axis) {
        if (d[axis] == 0.0) {
            // parallel to the slab: miss unless the origin lies inside it
            if (o[axis] < lo[axis] || o[axis] > hi[axis]) return std::nullopt;
            continue;
        }
        const double inv = 1.0 / d[axis];
        double t0 = (lo[axis] - o[axis]) * inv;
        double t1 = (hi[axis] - o[axis]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter > t_exit) return std::nullopt;
    }
    if (t_exit < 0.0) return std::nullopt;
    // t_enter was clamped at 0, so an origin inside the box reports 0
    return t_enter;
}

PixelPoint project_point(const CameraPose& camera, const Vec3& point) {
    const Vec3 p = camera.world_to_camera(point);
    if (p.z <= 0.0) {
        throw PointBehindCamera("point at camera-space depth " + std::to_string(p.z));
    }
    PixelPoint out;
    out.u = camera.intrinsics.cx + camera.intrinsics.fx * p.x / p.z;
    out.v = camera.intrinsics.cy + camera.intrinsics.fy * p.y / p.z;
    out.depth = p.z;
    return out;
}

Vec3 unproject_point(const CameraPose& camera, double u, double v, double depth) {
    const Vec3 p{(u - camera.intrinsics.cx) / camera.intrinsics.fx * depth,
                 (v - camera.intrinsics.cy) / camera.intrinsics.fy * depth, depth};
    return camera.camera_to_world(p);
}

} // namespace deixis
