// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "geometry.hpp"

namespace sscurv {

// Static 2-d tree over a point set; nearest-neighbour distance queries only.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(std::vector<Vec2> pts) : pts_(std::move(pts)) {
        if (!pts_.empty()) build(0, pts_.size(), 0);
    }

    bool empty() const { return pts_.empty(); }
    std::size_t size() const { return pts_.size(); }
    const std::vector<Vec2>& points() const { return pts_; }

    // Distance to the nearest point, or `bound` if none is strictly closer.
    double nearest(Vec2 q, double bound = std::numeric_limits<double>::infinity()) const {
        if (pts_.empty()) return bound;
        double best2 = bound * bound;
        struct Frame {
            std::uint32_t lo, hi;
            std::uint8_t axis;
            double off[2];  // per-axis offset of q from the cell
            double rd;      // squared distance from q to the cell
        };
        Frame stack[128];
        int top = 0;
        stack[top++] = {0, static_cast<std::uint32_t>(pts_.size()), 0, {0.0, 0.0}, 0.0};
        while (top > 0) {
            const Frame f = stack[--top];
            if (f.rd >= best2) continue;
            if (f.hi - f.lo <= kLeaf) {
                for (std::uint32_t i = f.lo; i < f.hi; ++i) {
                    const double dx = pts_[i].x - q.x, dy = pts_[i].y - q.y;
                    const double d2 = dx * dx + dy * dy;
                    if (d2 < best2) best2 = d2;
                }
                continue;
            }
            const std::uint32_t mid = f.lo + (f.hi - f.lo) / 2;
            const Vec2 m = pts_[mid];
            {
                const double dx = m.x - q.x, dy = m.y - q.y;
                const double d2 = dx * dx + dy * dy;
                if (d2 < best2) best2 = d2;
            }
            const double diff = f.axis == 0 ? q.x - m.x : q.y - m.y;
            const auto next = static_cast<std::uint8_t>(1 - f.axis);
            Frame near_side{diff < 0 ? f.lo : mid + 1, diff < 0 ? mid : f.hi, next, {f.off[0], f.off[1]}, f.rd};
            Frame far_side{diff < 0 ? mid + 1 : f.lo, diff < 0 ? f.hi : mid, next, {f.off[0], f.off[1]}, 0.0};
            const double old = f.off[f.axis];
            far_side.off[f.axis] = diff;
            far_side.rd = f.rd - old * old + diff * diff;
            if (far_side.rd < best2) stack[top++] = far_side;
            stack[top++] = near_side;
        }
        return std::sqrt(best2);
    }

private:
    static constexpr std::uint32_t kLeaf = 8;

    void build(std::size_t lo, std::size_t hi, int axis) {
        if (hi - lo <= kLeaf) return;
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(pts_.begin() + static_cast<long>(lo), pts_.begin() + static_cast<long>(mid), pts_.begin() + static_cast<long>(hi),
                         [axis](Vec2 a, Vec2 b) { return axis == 0 ? a.x < b.x : a.y < b.y; });
        build(lo, mid, 1 - axis);
        build(mid + 1, hi, 1 - axis);
    }

    std::vector<Vec2> pts_;
};

}  // namespace sscurv
