#include "gpocc/voxel_store.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "gpocc/errors.hpp"
#include "gpocc/io_text.hpp"

namespace gpocc {

VoxelStore::VoxelStore(double resolution) : resolution_(resolution) {
    if (!(resolution > 0.0)) throw ContractViolation("VoxelStore: resolution must be > 0");
}

std::uint64_t VoxelStore::key_of(CellIndex c) {
    const auto ux = static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.ix));
    const auto uy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.iy));
    return (ux << 32) | uy;
}

CellIndex VoxelStore::cell_from_key(std::uint64_t key) {
    return {static_cast<std::int32_t>(static_cast<std::uint32_t>(key >> 32)),
            static_cast<std::int32_t>(static_cast<std::uint32_t>(key & 0xffffffffull))};
}

CellIndex VoxelStore::cell_of(Point2 p) const {
    return {static_cast<std::int32_t>(std::floor(p.x / resolution_)),
            static_cast<std::int32_t>(std::floor(p.y / resolution_))};
}

VoxelStore::InsertReport VoxelStore::insert(std::span<const Point2> points) {
    InsertReport report;
    for (const Point2& p : points) {
        if (!is_finite(p)) {
            ++report.points_rejected;
            continue;
        }
        auto [it, created] = cells_.try_emplace(key_of(cell_of(p)));
        it->second.sum_x += p.x;
        it->second.sum_y += p.y;
        it->second.count += 1;
        if (created)
            ++report.cells_created;
        else
            ++report.cells_updated;
    }
    reindex();
    ++revision_;
    return report;
}

void VoxelStore::reindex() {
    // Deterministic index contents: feed the kd-tree in sorted cell order.
    index_keys_.clear();
    index_keys_.reserve(cells_.size());
    for (const auto& [key, cell] : cells_) index_keys_.push_back(key);
    std::sort(index_keys_.begin(), index_keys_.end(), [](std::uint64_t a, std::uint64_t b) {
        return cell_from_key(a) < cell_from_key(b);
    });
    std::vector<Point2> pts;
    pts.reserve(index_keys_.size());
    for (const std::uint64_t key : index_keys_) pts.push_back(centroid(cells_.at(key)));
    index_.build(pts);
}

std::optional<VoxelStore::CentroidHit> VoxelStore::nearest_centroid(Point2 query) const {
    const auto hit = index_.nearest(query);
    if (!hit) return std::nullopt;
    // Resolve exact-distance ties by lexicographic cell index.
    const double d = std::sqrt(hit->dist2);
    std::vector<KdTree2D::Hit> near;
    index_.radius_search(query, d + 1e-12, near);
    CellIndex best_cell = cell_from_key(index_keys_[hit->index]);
    double best_d2 = hit->dist2;
    for (const auto& h : near) {
        if (h.dist2 > best_d2) continue;
        const CellIndex c = cell_from_key(index_keys_[h.index]);
        if (h.dist2 < best_d2 || c < best_cell) {
            best_d2 = h.dist2;
            best_cell = c;
        }
    }
    return CentroidHit{best_cell, centroid(cells_.at(key_of(best_cell))), std::sqrt(best_d2)};
}

std::vector<VoxelStore::CentroidHit> VoxelStore::radius_search(Point2 query, double radius) const {
    if (!(radius > 0.0)) throw ContractViolation("VoxelStore::radius_search: radius must be > 0");
    std::vector<KdTree2D::Hit> hits;
    index_.radius_search(query, radius, hits);
    std::vector<CentroidHit> out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        const CellIndex c = cell_from_key(index_keys_[h.index]);
        out.push_back({c, centroid(cells_.at(key_of(c))), std::sqrt(h.dist2)});
    }
    std::sort(out.begin(), out.end(), [](const CentroidHit& a, const CentroidHit& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.cell < b.cell;
    });
    return out;
}

double VoxelStore::edf(Point2 query) const {
    const auto hit = index_.nearest(query);
    if (!hit) return std::numeric_limits<double>::infinity();
    return std::sqrt(hit->dist2);
}

bool VoxelStore::has_cell(CellIndex c) const { return cells_.count(key_of(c)) > 0; }

Point2 VoxelStore::centroid_of(CellIndex c) const {
    const auto it = cells_.find(key_of(c));
    if (it == cells_.end()) throw ContractViolation("VoxelStore::centroid_of: no such cell");
    return centroid(it->second);
}

std::uint64_t VoxelStore::count_of(CellIndex c) const {
    const auto it = cells_.find(key_of(c));
    if (it == cells_.end()) throw ContractViolation("VoxelStore::count_of: no such cell");
    return it->second.count;
}

std::vector<CellIndex> VoxelStore::sorted_cells() const {
    std::vector<CellIndex> cells;
    cells.reserve(cells_.size());
    for (const auto& [key, cell] : cells_) cells.push_back(cell_from_key(key));
    std::sort(cells.begin(), cells.end());
    return cells;
}

Box2 VoxelStore::bounds() const {
    Box2 box;
    for (const auto& [key, cell] : cells_) box.extend(centroid(cell));
    return box;
}

void VoxelStore::save(std::ostream& out) const {
    out << "gpocc-voxel-store 1\n";
    out << "resolution " << io::format_double(resolution_) << "\n";
    const auto cells = sorted_cells();
    out << "cells " << cells.size() << "\n";
    for (const CellIndex c : cells) {
        const Cell& cell = cells_.at(key_of(c));
        out << c.ix << ' ' << c.iy << ' ' << io::format_double(cell.sum_x) << ' '
            << io::format_double(cell.sum_y) << ' ' << cell.count << "\n";
    }
}

VoxelStore VoxelStore::load(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "gpocc-voxel-store" || version != 1)
        throw IoError("VoxelStore::load: bad header");
    std::string tag;
    double resolution = 0.0;
    in >> tag >> resolution;
    if (tag != "resolution") throw IoError("VoxelStore::load: missing resolution");
    VoxelStore store(resolution);
    std::size_t count = 0;
    in >> tag >> count;
    if (tag != "cells") throw IoError("VoxelStore::load: missing cell count");
    for (std::size_t i = 0; i < count; ++i) {
        CellIndex c;
        Cell cell;
        in >> c.ix >> c.iy >> cell.sum_x >> cell.sum_y >> cell.count;
        if (!in) throw IoError("VoxelStore::load: truncated cell table");
        store.cells_.emplace(key_of(c), cell);
    }
    store.reindex();
    return store;
}

}  // namespace gpocc
