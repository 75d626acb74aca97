#pragma once

#include <vector>

namespace odct {

/// A scored spatial box in a frame; the atom of track generation.
/// (x, y) is the top-left corner, sizes are in pixels.
struct BoundingBox {
    int frame_index = 0;
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    double objectness = 0.0;

    double area() const { return w * h; }
    bool operator==(const BoundingBox&) const = default;
};

/// Mean pixel displacement registering frame `frame_index` onto the next
/// frame, one offset per consecutive frame pair in a snippet.
struct FlowOffset {
    int frame_index = 0;
    double dx = 0.0;
    double dy = 0.0;
};

/// True when the box satisfies its invariants: positive extent,
/// objectness in [0, 1] and a non-negative frame index.
bool valid_box(const BoundingBox& b);

/// Intersection over union of two boxes, in [0, 1]. Symmetric.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Translates the box by the flow offset. The frame index is unchanged:
/// the shift is a matching aid, not a frame move. Throws InputError when
/// the flow does not belong to the box's frame.
BoundingBox shift_box(const BoundingBox& b, const FlowOffset& flow);

/// Greedy non-maximal suppression by descending objectness. A box is kept
/// iff its IoU with every previously kept box is <= overlap; the output is
/// sorted by descending objectness (ties keep input order).
std::vector<BoundingBox> nms(std::vector<BoundingBox> proposals, double overlap);

}  // namespace odct
