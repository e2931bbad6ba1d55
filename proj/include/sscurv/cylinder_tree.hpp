// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "ifs.hpp"

namespace sscurv {

// Ball hierarchy over the cylinders whose balls come within `cap` of a box, expanded
// on demand. Leaves carry S_w(seed). Queries can be restricted to the subtree of a word
// and may stop as soon as a leaf closer than `enough` turns up.
class CylinderTree {
public:
    struct Node {
        Affine s;
        Vec2 c;
        double r = 0;
        std::uint32_t first = 0;  // children [first, first + count) once expanded
        std::uint8_t count = 0;
        std::uint8_t letter = 0;
        bool leaf = false;
        bool expanded = false;
    };

    CylinderTree(const Frame& fr, const Box& box, double cap, double leaf_error)
        : fr_(&fr), box_(box), cap_(cap), leaf_error_(leaf_error) {
        if (fr.maps.size() > 32) throw DomainError("cylinder tree supports at most 32 maps");
        reset(box);
    }

    // Start over around another box; storage is kept.
    void reset(const Box& box) {
        box_ = box;
        nodes_.clear();
        admit(Affine{}, 0);
    }

    std::size_t size() const { return nodes_.size(); }

    // Node index of the word's subtree, or -1 when it was pruned.
    long find(const Word& w) {
        if (nodes_.empty()) return -1;
        std::uint32_t i = 0;
        for (int letter : w) {
            expand(i);
            if (nodes_[i].leaf) return -1;
            bool found = false;
            for (std::uint32_t j = nodes_[i].first; j < nodes_[i].first + nodes_[i].count; ++j)
                if (nodes_[j].letter == letter) {
                    i = j;
                    found = true;
                    break;
                }
            if (!found) return -1;
        }
        return static_cast<long>(i);
    }

    double nearest(Vec2 q, double bound, const std::vector<long>& roots, double enough = -1) {
        for (long r : roots) {
            bound = nearest(q, bound, r, enough);
            if (bound < enough) break;
        }
        return bound;
    }

    // Distance from q to the nearest leaf under `root`, or `bound` if none is closer.
    // Results below `enough` are only guaranteed to be below `enough`.
    double nearest(Vec2 q, double bound, long root = 0, double enough = -1) {
        if (root < 0 || nodes_.empty()) return bound;
        double best = bound;
        stack_.clear();
        stack_.push_back(static_cast<std::uint32_t>(root));
        while (!stack_.empty()) {
            const std::uint32_t i = stack_.back();
            stack_.pop_back();
            if (distance(q, nodes_[i].c) - nodes_[i].r >= best) continue;
            expand(i);
            const Node& n = nodes_[i];
            if (n.leaf) {
                best = std::min(best, distance(q, n.s.apply(fr_->seed.point)));
                if (best < enough) return best;
                continue;
            }
            std::uint32_t kids[32];
            double keys[32];
            int nk = 0;
            for (std::uint32_t j = n.first; j < n.first + n.count; ++j) {
                const double lb = distance(q, nodes_[j].c) - nodes_[j].r;
                if (lb >= best) continue;
                int at = nk++;
                while (at > 0 && keys[at - 1] < lb) {
                    kids[at] = kids[at - 1];
                    keys[at] = keys[at - 1];
                    --at;
                }
                kids[at] = j;
                keys[at] = lb;
            }
            for (int k = 0; k < nk; ++k) stack_.push_back(kids[k]);
        }
        return best;
    }

    // Calls f(word) for every cylinder with R r_w < level <= R r_parent lying within
    // `lim` of q. Pruned cylinders are never reported.
    template <class F>
    void cylinders_within(Vec2 q, double lim, double big_R, double level, F&& f) {
        if (nodes_.empty()) return;
        struct Item {
            std::uint32_t i;
            std::size_t depth;
        };
        std::vector<Item> todo{{0, 0}};
        Word path;
        while (!todo.empty()) {
            const Item it = todo.back();
            todo.pop_back();
            path.resize(it.depth > 0 ? it.depth - 1 : 0);
            if (it.depth > 0) path.push_back(nodes_[it.i].letter);
            if (distance(q, nodes_[it.i].c) - nodes_[it.i].r > lim) continue;
            if (it.depth > 0 && (big_R * nodes_[it.i].s.ratio < level || nodes_[it.i].leaf)) {
                const Word w = path;
                if (nearest(q, lim * 2 + 1, static_cast<long>(it.i), lim) <= lim) f(w);
                continue;
            }
            expand(it.i);
            const Node& n = nodes_[it.i];
            for (std::uint32_t j = n.first; j < n.first + n.count; ++j) todo.push_back({j, it.depth + 1});
        }
    }

private:
    void admit(const Affine& s, std::uint8_t letter) {
        const Vec2 c = s.apply(fr_->ball.center);
        const double r = s.ratio * fr_->ball.radius;
        if (box_.distance(c) - r > cap_) return;
        Node n;
        n.s = s;
        n.c = c;
        n.r = r;
        n.letter = letter;
        n.leaf = s.ratio * fr_->seed.radius <= leaf_error_;
        nodes_.push_back(n);
    }

    void expand(std::uint32_t i) {
        if (nodes_[i].expanded) return;
        nodes_[i].expanded = true;
        if (nodes_[i].leaf) return;
        const auto first = static_cast<std::uint32_t>(nodes_.size());
        const Affine s = nodes_[i].s;
        for (std::size_t k = 0; k < fr_->maps.size(); ++k) admit(compose(s, fr_->maps[k]), static_cast<std::uint8_t>(k + 1));
        nodes_[i].first = first;
        nodes_[i].count = static_cast<std::uint8_t>(nodes_.size() - first);
    }

    const Frame* fr_;
    Box box_;
    double cap_, leaf_error_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> stack_;
};

}  // namespace sscurv
