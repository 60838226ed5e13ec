#include "gpocc/contour.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "gpocc/errors.hpp"
#include "gpocc/io_text.hpp"

namespace gpocc {

int GridSpec::cols() const {
    return static_cast<int>(std::floor((bbox_max.x - bbox_min.x) / cell_size)) + 1;
}

int GridSpec::rows() const {
    return static_cast<int>(std::floor((bbox_max.y - bbox_min.y) / cell_size)) + 1;
}

void GridSpec::validate(double lengthscale) const {
    if (!(bbox_max.x > bbox_min.x && bbox_max.y > bbox_min.y))
        throw ContractViolation("GridSpec: bbox_max must exceed bbox_min componentwise");
    if (!(cell_size > 0.0)) throw ContractViolation("GridSpec: cell_size must be > 0");
    if (cols() < 2 || rows() < 2)
        throw ContractViolation("GridSpec: degenerate grid (need >= 2 nodes per axis)");
    if (!(cell_size <= lengthscale + 1e-12))
        throw ContractViolation("GridSpec: cell_size must not exceed the field lengthscale");
}

FieldAccessor make_accessor(const FieldView& field, int threads) {
    FieldAccessor acc;
    acc.evaluate = [&field, threads](std::span<const Point2> pts) {
        return field.batch_query(pts, threads);
    };
    acc.probe = [&field](Point2 p) { return field.probe(p); };
    return acc;
}

namespace {

struct NodeData {
    double value{0.0};  // mean - c; free iff > 0
    double variance{1.0};
};

struct Crossing {
    Point2 p;
    double variance;
};

Crossing interpolate(Point2 pa, const NodeData& a, Point2 pb, const NodeData& b) {
    double t = a.value / (a.value - b.value);
    t = std::clamp(t, 1e-9, 1.0 - 1e-9);  // endpoints stay strictly inside the edge
    return {pa + t * (pb - pa), a.variance + t * (b.variance - a.variance)};
}

}  // namespace

std::vector<ContourSegment> extract_contour(const GridSpec& grid, const FieldAccessor& accessor,
                                            const FieldConfig& config, bool use_skip_rule) {
    grid.validate(config.lengthscale);
    const int nx = grid.cols();
    const int ny = grid.rows();
    const double c = config.level_set_c;
    const auto node_index = [nx](int col, int row) {
        return static_cast<std::size_t>(row) * nx + col;
    };

    // Cell-skip pass: prior-only probes decide which cells cannot contain a
    // crossing without any corner (GP) evaluation.
    std::vector<std::uint8_t> cell_skipped(static_cast<std::size_t>(nx - 1) * (ny - 1), 0);
    if (use_skip_rule && accessor.probe) {
        std::vector<FieldView::Probe> probes(static_cast<std::size_t>(nx) * ny);
        for (int row = 0; row < ny; ++row)
            for (int col = 0; col < nx; ++col)
                probes[node_index(col, row)] = accessor.probe(grid.node(col, row));
        for (int row = 0; row + 1 < ny; ++row) {
            for (int col = 0; col + 1 < nx; ++col) {
                const FieldView::Probe* quad[4] = {
                    &probes[node_index(col, row)], &probes[node_index(col + 1, row)],
                    &probes[node_index(col + 1, row + 1)], &probes[node_index(col, row + 1)]};
                bool any_neighbor = false;
                bool all_high = true;
                bool all_low = true;
                for (const auto* p : quad) {
                    any_neighbor |= p->has_neighbor;
                    all_high &= p->prior > 1.5 * c;
                    all_low &= p->prior < 0.5 * c;
                }
                if (!any_neighbor && (all_high || all_low))
                    cell_skipped[static_cast<std::size_t>(row) * (nx - 1) + col] = 1;
            }
        }
    }

    // Evaluate only the nodes touched by a live cell.
    std::vector<std::int32_t> node_slot(static_cast<std::size_t>(nx) * ny, -1);
    std::vector<Point2> need;
    for (int row = 0; row + 1 < ny; ++row) {
        for (int col = 0; col + 1 < nx; ++col) {
            if (cell_skipped[static_cast<std::size_t>(row) * (nx - 1) + col]) continue;
            const int corners[4][2] = {{col, row}, {col + 1, row}, {col + 1, row + 1}, {col, row + 1}};
            for (const auto& cr : corners) {
                auto& slot = node_slot[node_index(cr[0], cr[1])];
                if (slot < 0) {
                    slot = static_cast<std::int32_t>(need.size());
                    need.push_back(grid.node(cr[0], cr[1]));
                }
            }
        }
    }
    const auto samples = accessor.evaluate(need);

    const auto node_data = [&](int col, int row) {
        const auto slot = node_slot[node_index(col, row)];
        const FieldSample& s = samples[static_cast<std::size_t>(slot)];
        // Failed samples read as unknown with prior variance.
        if (!s.ok) return NodeData{-1.0, 1.0};
        return NodeData{s.mean - c, s.variance};
    };

    std::vector<ContourSegment> segments;
    const auto emit = [&](const Crossing& a, const Crossing& b) {
        ContourSegment seg;
        seg.a = a.p;
        seg.b = b.p;
        seg.var_a = a.variance;
        seg.var_b = b.variance;
        seg.kind = std::max(a.variance, b.variance) < config.variance_wall_threshold
                       ? CrossingKind::wall
                       : CrossingKind::frontier;
        segments.push_back(seg);
    };

    for (int row = 0; row + 1 < ny; ++row) {
        for (int col = 0; col + 1 < nx; ++col) {
            if (cell_skipped[static_cast<std::size_t>(row) * (nx - 1) + col]) continue;
            const Point2 pbl = grid.node(col, row);
            const Point2 pbr = grid.node(col + 1, row);
            const Point2 ptr = grid.node(col + 1, row + 1);
            const Point2 ptl = grid.node(col, row + 1);
            const NodeData bl = node_data(col, row);
            const NodeData br = node_data(col + 1, row);
            const NodeData tr = node_data(col + 1, row + 1);
            const NodeData tl = node_data(col, row + 1);

            const int mask = (bl.value > 0.0 ? 1 : 0) | (br.value > 0.0 ? 2 : 0) |
                             (tr.value > 0.0 ? 4 : 0) | (tl.value > 0.0 ? 8 : 0);
            if (mask == 0 || mask == 15) continue;

            const auto bottom = [&] { return interpolate(pbl, bl, pbr, br); };
            const auto right = [&] { return interpolate(pbr, br, ptr, tr); };
            const auto top = [&] { return interpolate(ptl, tl, ptr, tr); };
            const auto left = [&] { return interpolate(pbl, bl, ptl, tl); };

            switch (mask) {
                case 1:
                case 14:
                    emit(left(), bottom());
                    break;
                case 2:
                case 13:
                    emit(bottom(), right());
                    break;
                case 4:
                case 11:
                    emit(right(), top());
                    break;
                case 8:
                case 7:
                    emit(top(), left());
                    break;
                case 3:
                case 12:
                    emit(left(), right());
                    break;
                case 6:
                case 9:
                    emit(bottom(), top());
                    break;
                case 5:
                case 10: {
                    // Saddle: one extra sample at the cell centre decides the
                    // pairing.
                    const Point2 centre = pbl + 0.5 * (ptr - pbl);
                    const auto cs = accessor.evaluate(std::span<const Point2>(&centre, 1));
                    const bool centre_free = cs[0].ok && cs[0].mean > c;
                    const bool diag_bl_tr = mask == 5;  // free corners on the BL-TR diagonal
                    if (diag_bl_tr == centre_free) {
                        emit(bottom(), right());
                        emit(top(), left());
                    } else {
                        emit(left(), bottom());
                        emit(right(), top());
                    }
                    break;
                }
                default:
                    break;
            }
        }
    }
    return segments;
}

SurfacePartition filter_surface(std::span<const ContourSegment> segments,
                                const FieldConfig& config) {
    SurfacePartition out;
    for (const ContourSegment& seg : segments) {
        const bool wall =
            std::max(seg.var_a, seg.var_b) < config.variance_wall_threshold;
        (wall ? out.walls : out.frontiers).push_back(seg);
    }
    return out;
}

void save_contour(std::span<const ContourSegment> segments, std::ostream& out) {
    out << "gpocc-contour 1\n";
    out << "segments " << segments.size() << "\n";
    for (const ContourSegment& s : segments) {
        out << io::format_double(s.a.x) << ' ' << io::format_double(s.a.y) << ' '
            << io::format_double(s.b.x) << ' ' << io::format_double(s.b.y) << ' '
            << io::format_double(s.var_a) << ' ' << io::format_double(s.var_b) << ' '
            << (s.kind == CrossingKind::wall ? "wall" : "frontier") << "\n";
    }
}

std::vector<ContourSegment> load_contour(std::istream& in) {
    std::string magic, tag;
    int version = 0;
    in >> magic >> version;
    if (magic != "gpocc-contour" || version != 1) throw IoError("load_contour: bad header");
    std::size_t count = 0;
    in >> tag >> count;
    if (tag != "segments") throw IoError("load_contour: missing segment count");
    std::vector<ContourSegment> segments(count);
    for (ContourSegment& s : segments) {
        std::string kind;
        in >> s.a.x >> s.a.y >> s.b.x >> s.b.y >> s.var_a >> s.var_b >> kind;
        if (!in) throw IoError("load_contour: truncated segment table");
        s.kind = kind == "wall" ? CrossingKind::wall : CrossingKind::frontier;
    }
    return segments;
}

}  // namespace gpocc
