#pragma once

#include <array>
#include <vector>

#include "deixis/geometry.hpp"

namespace deixis {

// Standard 21-landmark hand topology. Index finger chain is 5,6,7,8 with 8
// the fingertip; wrist is 0.
inline constexpr int kWrist = 0;
inline constexpr int kIndexMcp = 5;
inline constexpr int kIndexTip = 8;
inline constexpr int kNumHandKeypoints = 21;

struct HandPose {
    std::array<Vec3, kNumHandKeypoints> keypoints; // camera space, meters
    double confidence = 0.0;                       // detection confidence in [0,1]
    int frame_index = 0;
};

struct HandTrack {
    std::vector<HandPose> poses; // frame indices strictly increasing
    double fps = 30.0;

    const HandPose* at_frame(int frame) const {
        for (const auto& p : poses) {
            if (p.frame_index == frame) return &p;
            if (p.frame_index > frame) break;
        }
        return nullptr;
    }
};

} // namespace deixis
