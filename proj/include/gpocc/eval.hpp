#pragma once

#include <span>
#include <vector>

#include "gpocc/contour.hpp"
#include "gpocc/geometry.hpp"
#include "gpocc/scan.hpp"
#include "gpocc/sim.hpp"

namespace gpocc {

/// Point-to-surface reconstruction error, reported in millimeters.
struct ReconError {
    double mean_abs_mm{0.0};
    double rmse_mm{0.0};
    std::size_t n_samples{0};
};

/// Exact minimum distance of every sample to the world's obstacle segments.
/// Throws ContractViolation on an empty sample set (metric undefined).
ReconError point_to_surface_errors(std::span<const Point2> samples, const World& world);

struct OccGridConfig {
    double resolution{0.05};
    double hit_logodds{0.85};
    double miss_logodds{-0.4};
    double occupied_threshold{2.0};
    double free_threshold{-1.0};
    double min_logodds{-4.0};
    double max_logodds{6.0};
};

/// Conventional log-odds occupancy grid used as the reconstruction
/// baseline: integer grid walking along each beam, miss increments before
/// the hit cell, hit increment in the hit cell, saturation at the clamps.
class OccGrid {
public:
    OccGrid(Box2 bounds, OccGridConfig config);

    void integrate(const SensorScan& scan);

    int width() const { return width_; }
    int height() const { return height_; }
    double log_odds_at(Point2 p) const;  // 0 outside the grid

    /// Centers of cells above the occupied threshold, row-major order.
    std::vector<Point2> occupied_cell_centers() const;

private:
    std::size_t index_of(int cx, int cy) const {
        return static_cast<std::size_t>(cy) * width_ + cx;
    }
    bool cell_of(Point2 p, int& cx, int& cy) const;

    Box2 bounds_;
    OccGridConfig config_;
    int width_{0}, height_{0};
    std::vector<double> log_odds_;
};

/// Points along each wall segment at <= spacing intervals, endpoints
/// included; count per segment is ceil(len/spacing) + 1.
std::vector<Point2> sample_reconstruction(std::span<const ContourSegment> walls, double spacing);

struct TimingStats {
    std::size_t n{0};
    double mean{0.0};
    double median{0.0};
    double p95{0.0};
    double min{0.0};
    double max{0.0};
};

/// Order statistics over raw duration samples; empty input gives all-zero
/// stats.
TimingStats timing_report(std::vector<double> samples);

}  // namespace gpocc
