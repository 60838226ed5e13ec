#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "gpocc/kernel.hpp"
#include "gpocc/linalg.hpp"
#include "gpocc/map.hpp"

namespace gpocc {

enum class OccClass : std::uint8_t { free, unknown };
enum class CrossingKind : std::uint8_t { none, wall, frontier };
enum class PriorMode : std::uint8_t { pose_only, bubbles };

struct FieldSample {
    double mean{0.0};
    double variance{1.0};
    OccClass occupancy{OccClass::unknown};
    CrossingKind crossing{CrossingKind::none};
    bool ok{true};  // false marks a per-point numerical failure in batch queries
};

struct FieldConfig {
    double level_set_c{1.0};
    double lengthscale{0.3};            // meters
    double obs_noise_sigma2{1e-6};
    double neighborhood_radius{1.0};    // meters, >= 3 * lengthscale
    double variance_wall_threshold{0.4};
    PriorMode prior_mode{PriorMode::bubbles};
    double jitter{1e-10};
    std::size_t local_gp_cap{64};

    void validate() const;
};

/// Read-only view over a map snapshot that answers occupancy queries:
/// prior mean from the coverage (or poses), local GP conditioning on the
/// voxel centroids around the query, classification by the level set.
/// Concurrent queries are safe; the per-voxel factorization cache is shared.
class FieldView {
public:
    FieldView(const Map& map, FieldConfig config, PriorParams prior);

    double prior_mean(Point2 x) const;

    /// Throws NumericalError (with the query location) if conditioning fails.
    FieldSample query(Point2 x) const;

    /// Results in input order, identical to sequential queries regardless
    /// of thread count; failures land in per-point slots.
    std::vector<FieldSample> batch_query(std::span<const Point2> points, int threads = 1) const;

    /// Wall when both straddling samples have low variance, else frontier.
    /// The pair must straddle the level set.
    static CrossingKind classify_crossing(const FieldSample& a, const FieldSample& b,
                                          const FieldConfig& config);

    struct Probe {
        bool has_neighbor{false};  // any centroid within neighborhood_radius
        double prior{0.0};
    };
    Probe probe(Point2 x) const;

    const FieldConfig& config() const { return config_; }
    const Map& map() const { return map_; }
    std::size_t cache_size() const;

private:
    struct LocalGp {
        std::vector<double> xs, ys;
        SpdSolver solver;
        Eigen::VectorXd alpha;

        LocalGp(std::vector<double> px, std::vector<double> py, SpdSolver s, Eigen::VectorXd a)
            : xs(std::move(px)), ys(std::move(py)), solver(std::move(s)), alpha(std::move(a)) {}
    };

    std::shared_ptr<const LocalGp> local_gp(std::span<const Point2> points) const;
    FieldSample evaluate(Point2 x, const LocalGp& gp, double prior_at_x) const;
    FieldSample classify(double mean, double variance) const;

    const Map& map_;
    FieldConfig config_;
    PriorParams prior_;
    std::uint64_t bound_revision_;
    mutable std::mutex cache_mu_;
    mutable std::unordered_map<std::uint64_t, std::shared_ptr<const LocalGp>> cache_;
};

/// Node-sampled rasters over a bounding box; row 0 is the top (max y) row.
struct FieldRaster {
    Box2 bbox;
    double resolution{0.05};
    int width{0}, height{0};
    std::vector<double> mean, variance;
    std::vector<std::uint8_t> occupancy;  // 1 = free, 0 = unknown

    Point2 node(int col, int row) const {
        return {bbox.min.x + col * resolution, bbox.max.y - row * resolution};
    }
};

FieldRaster render_field(const FieldView& field, Box2 bbox, double resolution, int threads = 1);

/// PGM (P5) plus a plain-text matrix, one row per line.
void write_raster_pgm(const std::string& path, int width, int height,
                      std::span<const double> values, double lo, double hi);
void write_raster_txt(const std::string& path, int width, int height,
                      std::span<const double> values);

}  // namespace gpocc
