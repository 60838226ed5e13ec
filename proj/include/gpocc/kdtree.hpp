#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gpocc/geometry.hpp"

namespace gpocc {

/// Static 2D kd-tree over a point set. Built once per map revision
/// (median split, alternating axis); leaves are scanned with the SIMD
/// min-squared-distance kernel. Queries are exact and thread-safe.
class KdTree2D {
public:
    struct Hit {
        std::uint32_t index{0};  // index into the point set passed to build()
        double dist2{0.0};
    };

    KdTree2D() = default;

    void build(const std::vector<Point2>& points);
    void clear();

    std::size_t size() const { return xs_.size(); }
    bool empty() const { return xs_.empty(); }

    /// Exact nearest neighbor; empty optional when the tree is empty.
    std::optional<Hit> nearest(Point2 q) const;

    /// Nearest neighbor no farther than max_dist; empty when none qualifies.
    std::optional<Hit> nearest_within(Point2 q, double max_dist) const;

    /// All points with distance <= radius, unordered.
    void radius_search(Point2 q, double radius, std::vector<Hit>& out) const;

private:
    struct Node {
        double split{0.0};
        std::int32_t axis{-1};  // -1 marks a leaf
        std::uint32_t left{0}, right{0};
        std::uint32_t begin{0}, end{0};
    };

    std::uint32_t build_node(std::uint32_t begin, std::uint32_t end, int axis);
    void search(std::uint32_t node, Point2 q, Hit& best) const;
    void collect(std::uint32_t node, Point2 q, double r2, std::vector<Hit>& out) const;

    std::vector<Node> nodes_;
    std::uint32_t root_{0};
    // Points permuted into tree order, SoA for the leaf scans.
    std::vector<double> xs_, ys_;
    std::vector<std::uint32_t> ids_;
};

}  // namespace gpocc
