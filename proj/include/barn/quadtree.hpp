#ifndef BARN_QUADTREE_HPP_
#define BARN_QUADTREE_HPP_

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "barn/geometry.hpp"

namespace barn {

/// Point quadtree over a fixed bounding box. Stores (point, id) pairs;
/// supports nearest-neighbor (with an optional id filter) and axis-aligned
/// box queries. Points outside the root box land in a linear overflow list
/// so queries stay exact.
class PointQuadtree {
public:
    PointQuadtree(const Vec2& min, const Vec2& max, int node_capacity = 8, int max_depth = 10)
        : min_(min), max_(max), node_capacity_(node_capacity), max_depth_(max_depth),
          root_(std::make_unique<Node>()) {}

    void insert(const Vec2& point, int id) {
        ++size_;
        if (point.x < min_.x || point.x > max_.x || point.y < min_.y || point.y > max_.y) {
            overflow_.push_back({point, id});
            return;
        }
        insert_into(*root_, point, id, min_, max_, 0);
    }

    std::size_t size() const { return size_; }

    /// Id of the nearest accepted point, or -1 if none.
    int nearest(const Vec2& query, double* dist_out = nullptr,
                const std::function<bool(int)>& accept = {}) const {
        double best = std::numeric_limits<double>::infinity();
        int best_id = -1;
        nearest_in(*root_, query, min_, max_, accept, best, best_id);
        for (const auto& e : overflow_) {
            if (accept && !accept(e.id)) continue;
            const double d = distance(e.point, query);
            if (d < best) {
                best = d;
                best_id = e.id;
            }
        }
        if (dist_out) *dist_out = best;
        return best_id;
    }

    /// Ids of all points inside [box_min, box_max] (inclusive), ascending.
    std::vector<int> query_box(const Vec2& box_min, const Vec2& box_max) const {
        std::vector<int> out;
        box_in(*root_, box_min, box_max, min_, max_, out);
        for (const auto& e : overflow_) {
            if (inside_box(e.point, box_min, box_max)) out.push_back(e.id);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct Entry {
        Vec2 point;
        int id;
    };

    struct Node {
        std::vector<Entry> entries;                  // leaf payload
        std::array<std::unique_ptr<Node>, 4> child;  // set once split
        bool is_leaf() const { return !child[0]; }
    };

    static bool inside_box(const Vec2& p, const Vec2& lo, const Vec2& hi) {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }

    static int quadrant(const Vec2& p, const Vec2& mid) {
        return (p.x >= mid.x ? 1 : 0) + (p.y >= mid.y ? 2 : 0);
    }

    static Vec2 child_min(int q, const Vec2& lo, const Vec2& mid) {
        return {(q & 1) ? mid.x : lo.x, (q & 2) ? mid.y : lo.y};
    }

    static Vec2 child_max(int q, const Vec2& mid, const Vec2& hi) {
        return {(q & 1) ? hi.x : mid.x, (q & 2) ? hi.y : mid.y};
    }

    void insert_into(Node& node, const Vec2& p, int id, const Vec2& lo, const Vec2& hi,
                     int depth) {
        if (node.is_leaf()) {
            if (static_cast<int>(node.entries.size()) < node_capacity_ || depth >= max_depth_) {
                node.entries.push_back({p, id});
                return;
            }
            for (auto& c : node.child) c = std::make_unique<Node>();
            const Vec2 mid{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
            for (const Entry& e : node.entries) {
                const int q = quadrant(e.point, mid);
                insert_into(*node.child[q], e.point, e.id, child_min(q, lo, mid),
                            child_max(q, mid, hi), depth + 1);
            }
            node.entries.clear();
        }
        const Vec2 mid{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
        const int q = quadrant(p, mid);
        insert_into(*node.child[q], p, id, child_min(q, lo, mid), child_max(q, mid, hi),
                    depth + 1);
    }

    void nearest_in(const Node& node, const Vec2& query, const Vec2& lo, const Vec2& hi,
                    const std::function<bool(int)>& accept, double& best, int& best_id) const {
        // Prune nodes whose box cannot contain a closer point.
        const double dx = std::max({lo.x - query.x, 0.0, query.x - hi.x});
        const double dy = std::max({lo.y - query.y, 0.0, query.y - hi.y});
        if (dx * dx + dy * dy > best * best) return;

        if (node.is_leaf()) {
            for (const Entry& e : node.entries) {
                if (accept && !accept(e.id)) continue;
                const double d = distance(e.point, query);
                if (d < best) {
                    best = d;
                    best_id = e.id;
                }
            }
            return;
        }
        const Vec2 mid{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
        const int first = quadrant(query, mid);
        for (int i = 0; i < 4; ++i) {
            const int q = (i == 0) ? first : (i == 1 ? (first ^ 1) : (i == 2 ? (first ^ 2) : (first ^ 3)));
            nearest_in(*node.child[q], query, child_min(q, lo, mid), child_max(q, mid, hi),
                       accept, best, best_id);
        }
    }

    void box_in(const Node& node, const Vec2& box_min, const Vec2& box_max, const Vec2& lo,
                const Vec2& hi, std::vector<int>& out) const {
        if (box_max.x < lo.x || box_min.x > hi.x || box_max.y < lo.y || box_min.y > hi.y) return;
        if (node.is_leaf()) {
            for (const Entry& e : node.entries) {
                if (inside_box(e.point, box_min, box_max)) out.push_back(e.id);
            }
            return;
        }
        const Vec2 mid{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
        for (int q = 0; q < 4; ++q) {
            box_in(*node.child[q], box_min, box_max, child_min(q, lo, mid),
                   child_max(q, mid, hi), out);
        }
    }

    Vec2 min_, max_;
    int node_capacity_;
    int max_depth_;
    std::unique_ptr<Node> root_;
    std::vector<Entry> overflow_;
    std::size_t size_{0};
};

}  // namespace barn

#endif  // BARN_QUADTREE_HPP_
