#include "gpocc/eval.hpp"

#include <algorithm>
#include <cmath>

#include "gpocc/errors.hpp"

namespace gpocc {

ReconError point_to_surface_errors(std::span<const Point2> samples, const World& world) {
    if (samples.empty())
        throw ContractViolation("point_to_surface_errors: empty sample set");
    const auto segments = world.segments();
    if (segments.empty()) throw ContractViolation("point_to_surface_errors: empty world");

    double sum_abs = 0.0;
    double sum_sq = 0.0;
    for (const Point2& p : samples) {
        double best = std::numeric_limits<double>::infinity();
        for (const Segment2& seg : segments) best = std::min(best, point_segment_distance(p, seg));
        sum_abs += best;
        sum_sq += best * best;
    }
    const double n = static_cast<double>(samples.size());
    return {1000.0 * sum_abs / n, 1000.0 * std::sqrt(sum_sq / n), samples.size()};
}

OccGrid::OccGrid(Box2 bounds, OccGridConfig config) : bounds_(bounds), config_(config) {
    if (bounds.empty()) throw ContractViolation("OccGrid: empty bounds");
    if (!(config.resolution > 0.0)) throw ContractViolation("OccGrid: resolution must be > 0");
    width_ = static_cast<int>(std::ceil((bounds.max.x - bounds.min.x) / config.resolution));
    height_ = static_cast<int>(std::ceil((bounds.max.y - bounds.min.y) / config.resolution));
    width_ = std::max(width_, 1);
    height_ = std::max(height_, 1);
    log_odds_.assign(static_cast<std::size_t>(width_) * height_, 0.0);
}

bool OccGrid::cell_of(Point2 p, int& cx, int& cy) const {
    cx = static_cast<int>(std::floor((p.x - bounds_.min.x) / config_.resolution));
    cy = static_cast<int>(std::floor((p.y - bounds_.min.y) / config_.resolution));
    return cx >= 0 && cx < width_ && cy >= 0 && cy < height_;
}

double OccGrid::log_odds_at(Point2 p) const {
    int cx = 0, cy = 0;
    if (!cell_of(p, cx, cy)) return 0.0;
    return log_odds_[index_of(cx, cy)];
}

void OccGrid::integrate(const SensorScan& scan) {
    const Point2 origin = scan.pose.position;
    for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
        const bool miss = scan.is_miss(i);
        const double range = scan.ranges[i];
        const double angle = scan.pose.heading + scan.angles[i];
        const Point2 dir{std::cos(angle), std::sin(angle)};
        const Point2 end = origin + range * dir;

        // Amanatides-Woo traversal from the origin cell to the beam end cell.
        const double res = config_.resolution;
        int cx = static_cast<int>(std::floor((origin.x - bounds_.min.x) / res));
        int cy = static_cast<int>(std::floor((origin.y - bounds_.min.y) / res));
        int ex = 0, ey = 0;
        cell_of(end, ex, ey);

        const int step_x = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
        const int step_y = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);
        const double inv_dx = dir.x != 0.0 ? 1.0 / dir.x : 0.0;
        const double inv_dy = dir.y != 0.0 ? 1.0 / dir.y : 0.0;

        double t_max_x = std::numeric_limits<double>::infinity();
        double t_max_y = std::numeric_limits<double>::infinity();
        double t_delta_x = std::numeric_limits<double>::infinity();
        double t_delta_y = std::numeric_limits<double>::infinity();
        if (step_x != 0) {
            const double next_x =
                bounds_.min.x + (cx + (step_x > 0 ? 1 : 0)) * res;
            t_max_x = (next_x - origin.x) * inv_dx;
            t_delta_x = res * std::abs(inv_dx);
        }
        if (step_y != 0) {
            const double next_y =
                bounds_.min.y + (cy + (step_y > 0 ? 1 : 0)) * res;
            t_max_y = (next_y - origin.y) * inv_dy;
            t_delta_y = res * std::abs(inv_dy);
        }

        const auto apply = [&](int x, int y, double increment) {
            if (x < 0 || x >= width_ || y < 0 || y >= height_) return;
            double& lo = log_odds_[index_of(x, y)];
            lo = std::clamp(lo + increment, config_.min_logodds, config_.max_logodds);
        };

        double t = 0.0;
        while (t < range) {
            const bool at_end = cx == ex && cy == ey;
            if (at_end) break;
            apply(cx, cy, config_.miss_logodds);
            if (t_max_x < t_max_y) {
                t = t_max_x;
                t_max_x += t_delta_x;
                cx += step_x;
            } else {
                t = t_max_y;
                t_max_y += t_delta_y;
                cy += step_y;
            }
            if (t > range) break;
        }
        // The beam end cell: hit increment for a return, miss for max-range.
        apply(ex, ey, miss ? config_.miss_logodds : config_.hit_logodds);
    }
}

std::vector<Point2> OccGrid::occupied_cell_centers() const {
    std::vector<Point2> centers;
    for (int cy = 0; cy < height_; ++cy) {
        for (int cx = 0; cx < width_; ++cx) {
            if (log_odds_[index_of(cx, cy)] >= config_.occupied_threshold) {
                centers.push_back({bounds_.min.x + (cx + 0.5) * config_.resolution,
                                   bounds_.min.y + (cy + 0.5) * config_.resolution});
            }
        }
    }
    return centers;
}

std::vector<Point2> sample_reconstruction(std::span<const ContourSegment> walls, double spacing) {
    if (!(spacing > 0.0)) throw ContractViolation("sample_reconstruction: spacing must be > 0");
    std::vector<Point2> points;
    for (const ContourSegment& seg : walls) {
        const double len = distance(seg.a, seg.b);
        const auto steps = static_cast<std::size_t>(std::ceil(len / spacing));
        for (std::size_t k = 0; k <= steps; ++k) {
            const double t = steps == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(steps);
            points.push_back(seg.a + t * (seg.b - seg.a));
        }
    }
    return points;
}

TimingStats timing_report(std::vector<double> samples) {
    TimingStats stats;
    if (samples.empty()) return stats;
    std::sort(samples.begin(), samples.end());
    stats.n = samples.size();
    double sum = 0.0;
    for (const double v : samples) sum += v;
    stats.mean = sum / static_cast<double>(samples.size());
    const std::size_t n = samples.size();
    stats.median = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
    const auto p95_idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n))) - 1;
    stats.p95 = samples[std::min(p95_idx, n - 1)];
    stats.min = samples.front();
    stats.max = samples.back();
    return stats;
}

}  // namespace gpocc
