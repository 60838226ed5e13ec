#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "gpocc/field.hpp"
#include "gpocc/geometry.hpp"

namespace gpocc {

struct GridSpec {
    Point2 bbox_min;
    Point2 bbox_max;
    double cell_size{0.05};

    int cols() const;  // node count along x
    int rows() const;  // node count along y
    Point2 node(int col, int row) const {
        return {bbox_min.x + col * cell_size, bbox_min.y + row * cell_size};
    }
    void validate(double lengthscale) const;
};

struct ContourSegment {
    Point2 a, b;
    double var_a{0.0}, var_b{0.0};
    CrossingKind kind{CrossingKind::wall};
};

/// Field evaluation interface for contour extraction. `probe` feeds the
/// cell-skip rule and may be null (no skipping).
struct FieldAccessor {
    std::function<std::vector<FieldSample>(std::span<const Point2>)> evaluate;
    std::function<FieldView::Probe(Point2)> probe;
};

FieldAccessor make_accessor(const FieldView& field, int threads = 1);

/// Marching squares over the level set (mean == c) with linear edge
/// interpolation. Saddle cells are disambiguated by the cell-center sample.
/// Cells whose four corners have no centroid in reach and a prior uniformly
/// far from c are skipped without corner evaluation; `use_skip_rule`
/// disables that fast path (results must be identical either way).
std::vector<ContourSegment> extract_contour(const GridSpec& grid, const FieldAccessor& accessor,
                                            const FieldConfig& config, bool use_skip_rule = true);

struct SurfacePartition {
    std::vector<ContourSegment> walls;
    std::vector<ContourSegment> frontiers;
};

SurfacePartition filter_surface(std::span<const ContourSegment> segments,
                                const FieldConfig& config);

// One segment per record: ax ay bx by var_a var_b kind
void save_contour(std::span<const ContourSegment> segments, std::ostream& out);
std::vector<ContourSegment> load_contour(std::istream& in);

}  // namespace gpocc
