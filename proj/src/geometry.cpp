#include "odct/geometry.hpp"

#include <algorithm>
#include <string>

#include "odct/error.hpp"

namespace odct {

bool valid_box(const BoundingBox& b) {
    return b.frame_index >= 0 && b.w > 0.0 && b.h > 0.0 && b.objectness >= 0.0 &&
           b.objectness <= 1.0;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

BoundingBox shift_box(const BoundingBox& b, const FlowOffset& flow) {
    if (flow.frame_index != b.frame_index) {
        throw InputError("shift_box: flow frame " + std::to_string(flow.frame_index) +
                         " does not match box frame " + std::to_string(b.frame_index));
    }
    BoundingBox out = b;
    out.x += flow.dx;
    out.y += flow.dy;
    return out;
}

std::vector<BoundingBox> nms(std::vector<BoundingBox> proposals, double overlap) {
    std::stable_sort(proposals.begin(), proposals.end(),
                     [](const BoundingBox& a, const BoundingBox& b) {
                         return a.objectness > b.objectness;
                     });
    std::vector<BoundingBox> kept;
    kept.reserve(proposals.size());
    for (const BoundingBox& candidate : proposals) {
        const bool suppressed =
            std::any_of(kept.begin(), kept.end(), [&](const BoundingBox& k) {
                return iou(candidate, k) > overlap;
            });
        if (!suppressed) kept.push_back(candidate);
    }
    return kept;
}

}  // namespace odct
