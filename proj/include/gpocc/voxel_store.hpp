#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gpocc/geometry.hpp"
#include "gpocc/kdtree.hpp"

namespace gpocc {

struct CellIndex {
    std::int32_t ix{0};
    std::int32_t iy{0};

    friend bool operator==(CellIndex a, CellIndex b) { return a.ix == b.ix && a.iy == b.iy; }
    friend bool operator<(CellIndex a, CellIndex b) {
        return a.ix != b.ix ? a.ix < b.ix : a.iy < b.iy;
    }
};

/// Point measurements bucketed into voxels: a hash map from cell index to
/// the running centroid, plus a kd-tree over the centroids for nearest /
/// radius queries and the exact Euclidean distance field. The index is
/// rebuilt at the end of every insert batch, so between batches the store
/// is immutable and safe for concurrent readers.
class VoxelStore {
public:
    explicit VoxelStore(double resolution);

    struct InsertReport {
        std::size_t cells_created{0};
        std::size_t cells_updated{0};
        std::size_t points_rejected{0};  // non-finite coordinates
    };

    InsertReport insert(std::span<const Point2> points);

    struct CentroidHit {
        CellIndex cell;
        Point2 centroid;
        double dist{0.0};
    };

    /// Exact nearest centroid (ties broken by lexicographic cell index);
    /// empty optional on an empty store.
    std::optional<CentroidHit> nearest_centroid(Point2 query) const;

    /// Centroids with distance <= radius, ascending by distance
    /// (ties by lexicographic cell index).
    std::vector<CentroidHit> radius_search(Point2 query, double radius) const;

    /// Distance to the nearest centroid; +inf on an empty store.
    double edf(Point2 query) const;

    double resolution() const { return resolution_; }
    std::size_t cell_count() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    std::uint64_t revision() const { return revision_; }

    CellIndex cell_of(Point2 p) const;
    Point2 centroid_of(CellIndex c) const;  // throws if absent
    bool has_cell(CellIndex c) const;
    std::uint64_t count_of(CellIndex c) const;

    /// Cells in lexicographic (ix, iy) order.
    std::vector<CellIndex> sorted_cells() const;

    Box2 bounds() const;  // over centroids; empty box when empty

    /// Rebuilds the spatial index from the hash map (queries must be
    /// unaffected; exercised by tests).
    void reindex();

    void save(std::ostream& out) const;
    static VoxelStore load(std::istream& in);

private:
    struct Cell {
        double sum_x{0.0};
        double sum_y{0.0};
        std::uint64_t count{0};
    };

    static std::uint64_t key_of(CellIndex c);
    static CellIndex cell_from_key(std::uint64_t key);
    Point2 centroid(const Cell& c) const { return {c.sum_x / static_cast<double>(c.count),
                                                   c.sum_y / static_cast<double>(c.count)}; }

    double resolution_;
    std::unordered_map<std::uint64_t, Cell> cells_;
    KdTree2D index_;
    std::vector<std::uint64_t> index_keys_;  // kd point id -> cell key
    std::uint64_t revision_{0};
};

}  // namespace gpocc
